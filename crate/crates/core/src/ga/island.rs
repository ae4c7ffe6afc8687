use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scheduler::AssignerContext;

use super::batch::Batch;
use super::fitness::{BatchModel, GeneSpace};
use super::{batch_seed, mix_seed, GaConfig};

/// Resource index per batch slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: Vec<usize>,
    pub fitness: f64,
}

impl Individual {
    pub fn evaluate(genes: Vec<usize>, model: &BatchModel) -> Self {
        let fitness = model.evaluate(&genes);
        Self { genes, fitness }
    }

    pub fn chromosome(&self) -> Chromosome {
        Chromosome {
            genes: self.genes.clone(),
        }
    }
}

/// Total order used everywhere: lower fitness, then smaller genes.
fn rank(a: &Individual, b: &Individual) -> Ordering {
    a.fitness.total_cmp(&b.fitness).then_with(|| a.genes.cmp(&b.genes))
}

fn fittest(pop: &[Individual]) -> &Individual {
    pop.iter().min_by(|a, b| rank(a, b)).expect("population is never empty")
}

/// One island: a population, its best-so-far and a private RNG.
#[derive(Debug, Clone)]
pub struct IslandState {
    pub id: usize,
    pub population: Vec<Individual>,
    pub best: Individual,
    rng: ChaCha8Rng,
}

impl IslandState {
    pub fn from_population(id: usize, genes: Vec<Vec<usize>>, model: &BatchModel, seed: u64) -> Self {
        assert!(!genes.is_empty(), "an island needs at least one individual");
        let population: Vec<Individual> = genes
            .into_iter()
            .map(|g| Individual::evaluate(g, model))
            .collect();
        let best = fittest(&population).clone();
        Self {
            id,
            population,
            best,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Island 0 starts with the greedy earliest-finish individual. Half of
    /// every population is drawn from the candidate hints, the rest uniformly.
    pub fn initialize(id: usize, model: &BatchModel, space: &GeneSpace, cfg: &GaConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut genes = Vec::with_capacity(cfg.population_size);
        if id == 0 {
            genes.push(model.greedy_genes(space));
        }
        let hinted = cfg.population_size / 2;
        while genes.len() < cfg.population_size {
            let pool = if genes.len() < hinted { &space.hints } else { &space.domains };
            genes.push(pool.iter().map(|d| d[rng.random_range(0..d.len())]).collect());
        }
        let mut island = Self::from_population(id, genes, model, 0);
        island.rng = rng;
        island
    }

    fn tournament(&mut self, size: usize) -> usize {
        let n = self.population.len();
        let mut winner = self.rng.random_range(0..n);
        for _ in 1..size {
            let c = self.rng.random_range(0..n);
            if rank(&self.population[c], &self.population[winner]).is_lt() {
                winner = c;
            }
        }
        winner
    }

    fn note(&mut self) {
        let top = fittest(&self.population);
        if rank(top, &self.best).is_lt() {
            self.best = top.clone();
        }
    }
}

/// Tournament selection, single-point crossover and per-gene reset mutation.
/// The best individual is carried over unchanged.
pub fn evolve_generation(island: &mut IslandState, model: &BatchModel, space: &GeneSpace, cfg: &GaConfig) {
    let size = island.population.len();
    let len = space.domains.len();
    let mutation = cfg.effective_mutation_rate();
    let mut next = Vec::with_capacity(size);
    next.push(fittest(&island.population).clone());
    while next.len() < size {
        let a = island.tournament(cfg.tournament_size);
        let b = island.tournament(cfg.tournament_size);
        let mut genes = island.population[a].genes.clone();
        if len > 1 && island.rng.random_bool(cfg.crossover_rate) {
            let cut = island.rng.random_range(1..len);
            genes[cut..].copy_from_slice(&island.population[b].genes[cut..]);
        }
        for (g, domain) in genes.iter_mut().zip(&space.domains) {
            if island.rng.random_bool(mutation) {
                *g = domain[island.rng.random_range(0..domain.len())];
            }
        }
        next.push(Individual::evaluate(genes, model));
    }
    island.population = next;
    island.note();
}

/// Sends the `migrants` best of every island to all others, where they
/// replace the worst residents. An island's own best is never replaced.
pub fn migrate(islands: &mut [IslandState], migrants: usize) {
    if islands.len() < 2 {
        return;
    }
    let emigrants: Vec<Vec<Individual>> = islands
        .iter()
        .map(|isl| {
            let mut sorted = isl.population.clone();
            sorted.sort_by(rank);
            sorted.truncate(migrants);
            sorted
        })
        .collect();
    for (j, isl) in islands.iter_mut().enumerate() {
        let mut incoming: Vec<Individual> = emigrants
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .flat_map(|(_, e)| e.iter().cloned())
            .collect();
        incoming.sort_by(rank);
        incoming.truncate(isl.population.len().saturating_sub(1));
        let mut worst_first: Vec<usize> = (0..isl.population.len()).collect();
        worst_first.sort_by(|&a, &b| rank(&isl.population[b], &isl.population[a]).then(b.cmp(&a)));
        for (slot, ind) in worst_first.into_iter().zip(incoming) {
            isl.population[slot] = ind;
        }
        isl.note();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    /// Consensus best over all islands.
    pub best: Individual,
    /// Global best fitness after each generation.
    pub trajectory: Vec<f64>,
    pub islands: Vec<IslandState>,
}

impl PartialEq for IslandState {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.population == other.population && self.best == other.best
    }
}

/// Runs the island model on a detached batch model. `order` fixes the
/// sequence in which islands evolve within a generation; the result does not
/// depend on it.
pub fn run_islands(
    model: &BatchModel,
    space: &GeneSpace,
    cfg: &GaConfig,
    seed: u64,
    order: Option<&[usize]>,
) -> GaResult {
    let n = cfg.islands.max(1);
    let order: Vec<usize> = match order {
        Some(o) => {
            let mut check = o.to_vec();
            check.sort_unstable();
            assert!(check == (0..n).collect::<Vec<_>>(), "order must permute the islands");
            o.to_vec()
        }
        None => (0..n).collect(),
    };
    let mut islands: Vec<IslandState> = (0..n)
        .map(|i| IslandState::initialize(i, model, space, cfg, mix_seed(seed, i as u64)))
        .collect();
    let global = |islands: &[IslandState]| {
        islands
            .iter()
            .map(|i| &i.best)
            .min_by(|a, b| rank(a, b))
            .expect("at least one island")
            .clone()
    };
    let mut trajectory = Vec::with_capacity(cfg.generations);
    for g in 0..cfg.generations {
        if cfg.parallel {
            islands
                .par_iter_mut()
                .for_each(|isl| evolve_generation(isl, model, space, cfg));
        } else {
            for &i in &order {
                evolve_generation(&mut islands[i], model, space, cfg);
            }
        }
        if (g + 1) % cfg.migration_interval == 0 {
            migrate(&mut islands, cfg.migrants);
        }
        trajectory.push(global(&islands).fitness);
    }
    GaResult {
        best: global(&islands),
        trajectory,
        islands,
    }
}

/// Optimizes `batch` against the live scheduler state.
pub fn run_distributed_ga(batch: &Batch, ctx: &AssignerContext<'_>, cfg: &GaConfig) -> GaResult {
    let order: Vec<usize> = (0..cfg.islands.max(1)).collect();
    run_distributed_ga_with_order(batch, ctx, cfg, &order)
}

pub fn run_distributed_ga_with_order(
    batch: &Batch,
    ctx: &AssignerContext<'_>,
    cfg: &GaConfig,
    order: &[usize],
) -> GaResult {
    let model = BatchModel::new(batch, ctx, ctx.now, &ctx.snapshot.ready_time);
    let space = model.gene_space(batch, ctx, cfg.restrict_to_candidates);
    run_islands(&model, &space, cfg, batch_seed(cfg.seed, batch), Some(order))
}

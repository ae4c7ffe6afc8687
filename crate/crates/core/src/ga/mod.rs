//! Island-model genetic algorithm used as a CCF resource assigner.
//!
//! Ready tasks are grouped into fixed-length batches (padded with neutral
//! slots, overflow deferred to the next batch). Each batch is optimized by a
//! set of logical islands that evolve independently between migration
//! barriers, exchange their best individuals, and finally agree on the
//! global best chromosome. Every island draws from its own seeded RNG, so the
//! outcome does not depend on the order or parallelism of island evolution.

mod batch;
mod fitness;
mod history;
mod island;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::platform::ResourceId;
use crate::scheduler::{Assigner, AssignerContext, Assignment, SchedError};

pub use batch::{build_batch, Batch, BatchDecision, Slot};
pub use fitness::{fitness, BatchModel, GeneSpace, SlotCost};
pub use history::{append_history, read_history, HistoryEntry};
pub use island::{
    evolve_generation, migrate, run_distributed_ga, run_distributed_ga_with_order, run_islands,
    Chromosome, GaResult, Individual, IslandState,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    /// Individuals per island.
    pub population_size: usize,
    pub generations: usize,
    /// Number of islands (the level of decentralization).
    pub islands: usize,
    /// Generations between migrations.
    pub migration_interval: usize,
    /// Best individuals each island sends to every other island.
    pub migrants: usize,
    pub crossover_rate: f64,
    /// Per-gene reset probability; `None` means 1 / batch_length.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
    /// Chromosome length L.
    pub batch_length: usize,
    /// Time an under-full batch waits before it is padded (T).
    pub batch_wait: f64,
    pub seed: u64,
    /// Limit genes to each task's candidate resources instead of all resources.
    pub restrict_to_candidates: bool,
    /// Evolve islands on the rayon pool between migrations.
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 32,
            generations: 100,
            islands: 3,
            migration_interval: 1,
            migrants: 1,
            crossover_rate: 0.9,
            mutation_rate: None,
            tournament_size: 3,
            batch_length: 8,
            batch_wait: 0.0,
            seed: 0,
            restrict_to_candidates: false,
            parallel: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("population_size", self.population_size),
            ("generations", self.generations),
            ("islands", self.islands),
            ("migration_interval", self.migration_interval),
            ("migrants", self.migrants),
            ("tournament_size", self.tournament_size),
            ("batch_length", self.batch_length),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("ga.{name} must be positive"));
            }
        }
        let rates = [
            ("crossover_rate", Some(self.crossover_rate)),
            ("mutation_rate", self.mutation_rate),
        ];
        for (name, v) in rates {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(format!("ga.{name} must lie in [0, 1]"));
                }
            }
        }
        if !(self.batch_wait >= 0.0 && self.batch_wait.is_finite()) {
            return Err("ga.batch_wait must be non-negative".into());
        }
        Ok(())
    }

    pub fn effective_mutation_rate(&self) -> f64 {
        self.mutation_rate
            .unwrap_or(1.0 / self.batch_length.max(1) as f64)
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// CCF assigner backed by [`run_distributed_ga`].
#[derive(Debug, Clone)]
pub struct GaAssigner {
    pub config: GaConfig,
    history: Option<PathBuf>,
}

impl GaAssigner {
    pub fn new(config: GaConfig) -> Result<Self, SchedError> {
        config.validate().map_err(SchedError::Assigner)?;
        Ok(Self {
            config,
            history: None,
        })
    }

    /// Appends one record per GA run to `path`.
    pub fn with_history(mut self, path: impl Into<PathBuf>) -> Self {
        self.history = Some(path.into());
        self
    }
}

impl Assigner for GaAssigner {
    fn name(&self) -> &str {
        "ccf-ga"
    }

    fn assign(&mut self, ctx: &AssignerContext<'_>) -> Result<Vec<Assignment>, SchedError> {
        let cfg = &self.config;
        let mut ready_time = ctx.snapshot.ready_time.clone();
        let mut pending = ctx.ready.clone();
        let mut out = Vec::with_capacity(pending.len());
        loop {
            let (batch, not_before) = match build_batch(&pending, ctx.levels, cfg, 0.0) {
                BatchDecision::Empty => break,
                BatchDecision::Ready(b) => (b, ctx.now),
                BatchDecision::Wait { remaining } => {
                    match build_batch(&pending, ctx.levels, cfg, cfg.batch_wait) {
                        BatchDecision::Ready(b) => (b, ctx.now + remaining),
                        _ => unreachable!("a waited batch is always ready"),
                    }
                }
            };
            let model = BatchModel::new(&batch, ctx, not_before, &ready_time);
            let space = model.gene_space(&batch, ctx, cfg.restrict_to_candidates);
            let result = run_islands(&model, &space, cfg, batch_seed(cfg.seed, &batch), None);
            for (slot, st_ft) in model.timeline(&result.best.genes).into_iter().enumerate() {
                if let (Slot::Task(task), Some((_, ft))) = (batch.slots[slot], st_ft) {
                    let resource = ResourceId(result.best.genes[slot]);
                    ready_time[resource.0] = ready_time[resource.0].max(ft);
                    out.push(Assignment {
                        task,
                        resource,
                        not_before,
                    });
                }
            }
            if let Some(path) = &self.history {
                let entry = HistoryEntry::new(ctx.now, &batch, &result, model);
                append_history(&entry, path)
                    .map_err(|e| SchedError::Assigner(format!("history file: {e}")))?;
            }
            pending = batch.overflow;
        }
        Ok(out)
    }
}

fn batch_seed(seed: u64, batch: &Batch) -> u64 {
    batch.slots.iter().fold(seed, |acc, s| match s {
        Slot::Task(t) => mix_seed(acc, t.0 as u64 + 1),
        Slot::Pad => acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scheduler::{levels_for, run_ccf, verify_schedule};

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = GaConfig {
            islands: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GaConfig {
            crossover_rate: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(GaConfig::default().effective_mutation_rate(), 1.0 / 8.0);
    }

    #[test]
    fn config_reads_partial_toml_like_json() {
        let cfg: GaConfig = serde_json::from_str(r#"{"generations": 10, "seed": 4}"#).unwrap();
        assert_eq!(cfg.generations, 10);
        assert_eq!(cfg.islands, 3);
        assert!(serde_json::from_str::<GaConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn ccf_with_ga_is_valid_and_deterministic() {
        let g = fixtures::nine_task_graph();
        let p = fixtures::three_unit_platform();
        let levels = levels_for(&g, &p).unwrap();
        let cfg = GaConfig {
            seed: 11,
            ..Default::default()
        };
        let a = run_ccf(&g, &p, &levels, &mut GaAssigner::new(cfg.clone()).unwrap()).unwrap();
        let b = run_ccf(&g, &p, &levels, &mut GaAssigner::new(cfg).unwrap()).unwrap();
        assert!(verify_schedule(&a.schedule, &g, &p).is_ok());
        assert_eq!(
            serde_json::to_string(&a.schedule).unwrap(),
            serde_json::to_string(&b.schedule).unwrap()
        );
    }

    #[test]
    fn batch_wait_delays_underfull_batches() {
        let g = fixtures::nine_task_graph();
        let p = fixtures::three_unit_platform();
        let levels = levels_for(&g, &p).unwrap();
        let cfg = GaConfig {
            batch_wait: 1.5,
            generations: 5,
            ..Default::default()
        };
        let out = run_ccf(&g, &p, &levels, &mut GaAssigner::new(cfg).unwrap()).unwrap();
        assert!(verify_schedule(&out.schedule, &g, &p).is_ok());
        // The source is alone in its batch, so it waits the full window.
        assert_eq!(out.schedule.placements[0].st, 1.5);
    }

    #[test]
    fn overflow_is_scheduled_in_later_batches() {
        let g = crate::taskgraph::TaskGraph::new(
            (0..7).map(|i| crate::taskgraph::TaskNode::new(i, 1.0 + i as f64)).collect(),
            vec![],
        );
        let p = fixtures::three_unit_platform();
        let levels = levels_for(&g, &p).unwrap();
        let cfg = GaConfig {
            batch_length: 3,
            generations: 20,
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("history.jsonl");
        let mut ga = GaAssigner::new(cfg).unwrap().with_history(&path);
        let out = run_ccf(&g, &p, &levels, &mut ga).unwrap();
        assert!(verify_schedule(&out.schedule, &g, &p).is_ok());
        // 7 sources, batches of 3: three GA runs.
        assert_eq!(read_history(&path).unwrap().len(), 3);
    }
}

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{ccr, DepEdge, GraphError, TaskGraph, TaskNode};

/// Parameters of the random layered DAG generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredParams {
    pub n_tasks: usize,
    pub n_layers: usize,
    /// Probability of each additional edge between adjacent layers.
    pub edge_density: f64,
    pub cost_range: (f64, f64),
    pub data_range: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_ccr: Option<f64>,
    /// When set, every task also gets `work = cost * work_scale` (MI).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work_scale: Option<f64>,
    pub seed: u64,
}

impl Default for LayeredParams {
    fn default() -> Self {
        Self {
            n_tasks: 25,
            n_layers: 5,
            edge_density: 0.3,
            cost_range: (1.0, 10.0),
            data_range: (1.0, 10.0),
            target_ccr: None,
            work_scale: None,
            seed: 0,
        }
    }
}

impl LayeredParams {
    fn check(&self) -> Result<(), GraphError> {
        let bad = |msg: &str| Err(GraphError::Infeasible(msg.to_string()));
        if self.n_layers == 0 || self.n_tasks < self.n_layers {
            return bad("need n_tasks >= n_layers >= 1");
        }
        if self.n_layers == 1 && self.n_tasks > 1 {
            return bad("a single layer holds only the source task");
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return bad("edge_density must lie in [0, 1]");
        }
        for (name, (lo, hi)) in [("cost_range", self.cost_range), ("data_range", self.data_range)] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(GraphError::Infeasible(format!(
                    "{name} must be positive with min <= max"
                )));
            }
        }
        if let Some(t) = self.target_ccr {
            if !(t > 0.0 && t.is_finite()) {
                return bad("target_ccr must be positive");
            }
        }
        if let Some(s) = self.work_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad("work_scale must be positive");
            }
        }
        Ok(())
    }
}

fn round_to(v: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    (v * f).round() / f
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Generates a single-source layered DAG. The first layer holds only the
/// source; every other task has at least one parent in the previous layer.
pub fn generate_layered(params: &LayeredParams) -> Result<TaskGraph, GraphError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_tasks;

    // Every later layer gets one task, the rest land uniformly at random.
    let mut layer_sizes = vec![1usize; params.n_layers];
    for _ in params.n_layers..n {
        layer_sizes[rng.random_range(1..params.n_layers)] += 1;
    }

    let nodes: Vec<TaskNode> = (0..n)
        .map(|i| {
            let cost = round_to(sample_range(&mut rng, params.cost_range), 2).max(params.cost_range.0);
            let node = TaskNode::new(i, cost);
            match params.work_scale {
                Some(scale) => node.with_work(cost * scale),
                None => node,
            }
        })
        .collect();

    let mut edges = Vec::new();
    let mut layer_start = 0;
    for pair in layer_sizes.windows(2) {
        let (prev_size, size) = (pair[0], pair[1]);
        let prev_start = layer_start;
        let start = prev_start + prev_size;
        let extra = Binomial::new((prev_size - 1) as u64, params.edge_density)
            .map_err(|e| GraphError::Infeasible(e.to_string()))?;
        for v in start..start + size {
            let anchor = rng.random_range(0..prev_size);
            let k = extra.sample(&mut rng) as usize;
            let mut parents: Vec<usize> = vec![anchor];
            if k > 0 {
                parents.extend(
                    index::sample(&mut rng, prev_size - 1, k)
                        .into_iter()
                        .map(|p| if p >= anchor { p + 1 } else { p }),
                );
            }
            parents.sort_unstable();
            for p in parents {
                let data = round_to(sample_range(&mut rng, params.data_range), 2);
                edges.push(DepEdge::new(prev_start + p, v, data));
            }
        }
        layer_start = start;
    }

    let mut graph = TaskGraph::new(nodes, edges);
    if let Some(target) = params.target_ccr {
        if !graph.edges.is_empty() {
            let current = ccr(&graph, &graph.unit_tau())?;
            let factor = target / current;
            for e in &mut graph.edges {
                e.data_size = round_to(e.data_size * factor, 6);
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgraph::{compute_levels_weighted, validate};

    #[test]
    fn one_task() {
        let p = LayeredParams {
            n_tasks: 1,
            n_layers: 1,
            ..Default::default()
        };
        let g = generate_layered(&p).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let p = LayeredParams {
            seed: 7,
            ..Default::default()
        };
        let a = serde_json::to_string(&generate_layered(&p).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_layered(&p).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = LayeredParams { seed: 8, ..p };
        assert_ne!(a, serde_json::to_string(&generate_layered(&other).unwrap()).unwrap());
    }

    #[test]
    fn hits_target_ccr() {
        let p = LayeredParams {
            n_tasks: 100,
            n_layers: 10,
            target_ccr: Some(2.0),
            seed: 3,
            ..Default::default()
        };
        let g = generate_layered(&p).unwrap();
        let c = ccr(&g, &g.unit_tau()).unwrap();
        assert!((1.98..=2.02).contains(&c), "ccr {c}");
    }

    #[test]
    fn layered_and_single_source() {
        for seed in 0..20 {
            let p = LayeredParams {
                n_tasks: 40,
                n_layers: 6,
                edge_density: 0.5,
                seed,
                ..Default::default()
            };
            let g = generate_layered(&p).unwrap();
            assert!(validate(&g).is_ok());
            assert_eq!(g.sources().len(), 1);
            assert!(g.edges.iter().all(|e| e.src < e.dst));
            // Unit costs, free edges: the longest path crosses every layer.
            let ones = vec![1.0; g.nodes.len()];
            let zeros = vec![0.0; g.edges.len()];
            let depth = compute_levels_weighted(&g, &ones, &zeros).unwrap();
            assert_eq!(depth.critical_path_length(), 6.0);
        }
    }

    #[test]
    fn infeasible_parameters() {
        let bad = [
            LayeredParams { n_tasks: 2, n_layers: 3, ..Default::default() },
            LayeredParams { n_tasks: 5, n_layers: 1, ..Default::default() },
            LayeredParams { edge_density: 1.5, ..Default::default() },
            LayeredParams { cost_range: (0.0, 1.0), ..Default::default() },
            LayeredParams { data_range: (3.0, 1.0), ..Default::default() },
            LayeredParams { target_ccr: Some(-1.0), ..Default::default() },
        ];
        for p in bad {
            assert!(matches!(generate_layered(&p), Err(GraphError::Infeasible(_))), "{p:?}");
        }
    }
}

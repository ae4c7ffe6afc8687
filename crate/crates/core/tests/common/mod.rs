#![allow(dead_code)]

use gridsched::platform::{GridPlatform, NetLink, Resource};
use gridsched::taskgraph::{DepEdge, TaskGraph, TaskNode};
use proptest::prelude::*;

/// Random DAG with up to `max_n` tasks. Edges only go from lower to higher
/// rank, and ranks are shuffled onto ids so ids are not a topological order.
pub fn dag(max_n: usize) -> impl Strategy<Value = TaskGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(1u32..10, n),
            prop::collection::vec(prop::bool::weighted(0.35), pairs),
            prop::collection::vec(0u32..10, pairs),
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        )
            .prop_map(move |(costs, present, data, perm)| {
                let nodes = (0..n)
                    .map(|id| {
                        let rank = perm.iter().position(|&p| p == id).unwrap();
                        TaskNode::new(id, costs[rank] as f64)
                    })
                    .collect();
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if present[k] {
                            edges.push(DepEdge::new(perm[i], perm[j], data[k] as f64));
                        }
                        k += 1;
                    }
                }
                TaskGraph::new(nodes, edges)
            })
    })
}

/// Like [`dag`], but every task also carries `work = cost` so execution
/// time depends on resource speed.
pub fn work_dag(max_n: usize) -> impl Strategy<Value = TaskGraph> {
    dag(max_n).prop_map(|mut g| {
        for node in &mut g.nodes {
            node.work = Some(node.cost);
        }
        g
    })
}

/// Up to three resources of mixed speed in two clusters.
pub fn platform() -> impl Strategy<Value = GridPlatform> {
    (1usize..=3, prop::collection::vec((0usize..4, 0usize..2), 3)).prop_map(|(m, spec)| {
        let speeds = [0.5, 1.0, 1.5, 2.0];
        let resources = (0..m)
            .map(|i| Resource::new(i, speeds[spec[i].0], spec[i].1))
            .collect();
        GridPlatform::new(
            resources,
            vec![NetLink::new(0, 0, 2.0, 0.0), NetLink::new(1, 1, 2.0, 0.0)],
            NetLink::new(0, 1, 1.0, 0.25),
        )
    })
}

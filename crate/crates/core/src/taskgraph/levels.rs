use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{GraphError, TaskGraph, TaskId};

/// Level attributes of one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    /// Longest path from a source to the task, excluding the task's own cost.
    pub tlevel: f64,
    /// Longest path from the task to an exit, including the task's own cost.
    pub blevel: f64,
    /// Latest start that does not stretch the critical path.
    pub alap: f64,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    rows: Vec<Levels>,
    critical_path: f64,
}

impl LevelTable {
    pub fn get(&self, task: TaskId) -> &Levels {
        &self.rows[task.0]
    }

    pub fn priority(&self, task: TaskId) -> f64 {
        self.rows[task.0].priority
    }

    pub fn rows(&self) -> &[Levels] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// max over v of blevel(v).
    pub fn critical_path_length(&self) -> f64 {
        self.critical_path
    }

    /// Tolerance used for "equal to the critical path" comparisons.
    pub fn epsilon(&self) -> f64 {
        1e-9 * self.critical_path.abs().max(1.0)
    }
}

/// Work done by one `compute_levels` call, for checking the linear-time bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VisitCounters {
    pub node_visits: u64,
    pub edge_visits: u64,
}

impl VisitCounters {
    pub fn total(&self) -> u64 {
        self.node_visits + self.edge_visits
    }
}

/// Levels using each node's `cost` and the given per-edge times.
pub fn compute_levels(graph: &TaskGraph, tau: &[f64]) -> Result<LevelTable, GraphError> {
    let costs: Vec<f64> = graph.nodes.iter().map(|n| n.cost).collect();
    compute_levels_weighted(graph, &costs, tau)
}

/// Levels with explicit node weights, e.g. mean execution times on a platform.
pub fn compute_levels_weighted(
    graph: &TaskGraph,
    costs: &[f64],
    tau: &[f64],
) -> Result<LevelTable, GraphError> {
    compute_levels_counted(graph, costs, tau).map(|(table, _)| table)
}

pub fn compute_levels_counted(
    graph: &TaskGraph,
    costs: &[f64],
    tau: &[f64],
) -> Result<(LevelTable, VisitCounters), GraphError> {
    let n = graph.nodes.len();
    assert_eq!(costs.len(), n, "one cost per node");
    assert_eq!(tau.len(), graph.edges.len(), "one tau per edge");
    if let Some(c) = costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(GraphError::NegativeWeight(format!("node cost {c}")));
    }
    if let Some(t) = tau.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(GraphError::NegativeWeight(format!("edge weight {t}")));
    }

    let mut counters = VisitCounters::default();
    let adj = graph.adjacency();

    // FIFO Kahn: any topological order works for the level recurrences.
    let mut indeg: Vec<usize> = (0..n).map(|i| adj.in_degree(TaskId(i))).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop_front() {
        counters.node_visits += 1;
        order.push(u);
        for &e in adj.outgoing(TaskId(u)) {
            counters.edge_visits += 1;
            let v = graph.edges[e].dst.0;
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    if order.len() != n {
        return Err(GraphError::Cycle);
    }

    let mut tlevel = vec![0.0f64; n];
    for &u in &order {
        counters.node_visits += 1;
        let mut best = 0.0f64;
        for &e in adj.incoming(TaskId(u)) {
            counters.edge_visits += 1;
            let p = graph.edges[e].src.0;
            best = best.max(tlevel[p] + costs[p] + tau[e]);
        }
        tlevel[u] = best;
    }

    let mut blevel = vec![0.0f64; n];
    for &u in order.iter().rev() {
        counters.node_visits += 1;
        let mut tail = 0.0f64;
        for &e in adj.outgoing(TaskId(u)) {
            counters.edge_visits += 1;
            let s = graph.edges[e].dst.0;
            tail = tail.max(tau[e] + blevel[s]);
        }
        blevel[u] = costs[u] + tail;
    }

    let critical_path = blevel.iter().copied().fold(0.0, f64::max);
    let rows = (0..n)
        .map(|u| Levels {
            tlevel: tlevel[u],
            blevel: blevel[u],
            alap: critical_path - blevel[u],
            priority: tlevel[u] + blevel[u],
        })
        .collect();
    Ok((
        LevelTable {
            rows,
            critical_path,
        },
        counters,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPath {
    pub length: f64,
    pub tasks: BTreeSet<TaskId>,
}

/// Tasks whose tlevel + blevel reaches the critical-path length.
pub fn critical_path(levels: &LevelTable) -> CriticalPath {
    let length = levels.critical_path_length();
    let eps = levels.epsilon();
    let tasks = levels
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, l)| (l.priority - length).abs() <= eps)
        .map(|(i, _)| TaskId(i))
        .collect();
    CriticalPath { length, tasks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::taskgraph::{DepEdge, TaskNode};

    #[test]
    fn lone_node() {
        let g = TaskGraph::new(vec![TaskNode::new(0, 5.0)], vec![]);
        let t = compute_levels(&g, &[]).unwrap();
        let l = t.get(TaskId(0));
        assert_eq!((l.tlevel, l.blevel, l.alap), (0.0, 5.0, 0.0));
        let cp = critical_path(&t);
        assert_eq!(cp.length, 5.0);
        assert_eq!(cp.tasks.into_iter().collect::<Vec<_>>(), vec![TaskId(0)]);
    }

    #[test]
    fn two_task_chain_by_hand() {
        // A(2) --3--> B(4): tlevel B = 2+3, blevel A = 2+3+4.
        let g = TaskGraph::new(
            vec![TaskNode::new(0, 2.0), TaskNode::new(1, 4.0)],
            vec![DepEdge::new(0, 1, 3.0)],
        );
        let t = compute_levels(&g, &g.unit_tau()).unwrap();
        let (a, b) = (t.get(TaskId(0)), t.get(TaskId(1)));
        assert_eq!((a.tlevel, b.tlevel), (0.0, 5.0));
        assert_eq!((a.blevel, b.blevel), (9.0, 4.0));
        assert_eq!((a.alap, b.alap), (0.0, 5.0));
    }

    #[test]
    fn nine_task_level_table() {
        let g = fixtures::nine_task_graph();
        let t = compute_levels(&g, &g.unit_tau()).unwrap();
        for &(label, tl, bl, alap) in fixtures::NINE_TASK_LEVELS {
            let l = t.get(g.find(label).unwrap());
            assert_eq!((l.tlevel, l.blevel, l.alap), (tl, bl, alap), "task {label}");
        }
        let cp = critical_path(&t);
        assert_eq!(cp.length, 23.0);
        let labels: Vec<String> = cp.tasks.iter().map(|&id| g.node(id).label()).collect();
        assert_eq!(labels, vec!["1", "7", "9"]);
    }

    #[test]
    fn rejects_negative_tau_and_cycles() {
        let g = TaskGraph::new(
            vec![TaskNode::new(0, 1.0), TaskNode::new(1, 1.0)],
            vec![DepEdge::new(0, 1, 1.0)],
        );
        assert!(matches!(
            compute_levels(&g, &[-1.0]),
            Err(GraphError::NegativeWeight(_))
        ));
        let g = TaskGraph::new(
            vec![TaskNode::new(0, 1.0), TaskNode::new(1, 1.0)],
            vec![DepEdge::new(0, 1, 1.0), DepEdge::new(1, 0, 1.0)],
        );
        assert!(matches!(compute_levels(&g, &[1.0, 1.0]), Err(GraphError::Cycle)));
    }

    #[test]
    fn counters_are_three_passes() {
        let g = fixtures::nine_task_graph();
        let costs: Vec<f64> = g.nodes.iter().map(|n| n.cost).collect();
        let (_, c) = compute_levels_counted(&g, &costs, &g.unit_tau()).unwrap();
        assert_eq!(c.node_visits, 27);
        assert_eq!(c.edge_visits, 36);
    }
}

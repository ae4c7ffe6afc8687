//! Weighted task DAGs.
//!
//! A [`TaskGraph`] holds task nodes with an abstract execution cost and
//! dependency edges carrying a data size. Communication times are not stored
//! on edges; callers derive them from a link model (see
//! [`crate::platform`]) or use the data size directly as the edge weight.

mod generate;
mod io;
mod levels;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_layered, LayeredParams};
pub use io::{from_json, from_xml, load_graph, save_graph, to_dot, to_json};
pub use levels::{
    compute_levels, compute_levels_counted, compute_levels_weighted, critical_path, CriticalPath,
    LevelTable, Levels, VisitCounters,
};

/// Dense task index, `0..|V|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub usize);

impl TaskId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskNode {
    pub id: TaskId,
    /// Abstract execution time, used when `work` is absent.
    pub cost: f64,
    /// Million instructions; when present, execution time is `work / mips`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work: Option<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub mem_req: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub disk_req: f64,
    /// Human label, e.g. the id the task had in its source file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl TaskNode {
    pub fn new(id: usize, cost: f64) -> Self {
        Self {
            id: TaskId(id),
            cost,
            work: None,
            mem_req: 0.0,
            disk_req: 0.0,
            name: None,
        }
    }

    pub fn with_work(mut self, work: f64) -> Self {
        self.work = Some(work);
        self
    }

    pub fn with_requirements(mut self, mem_req: f64, disk_req: f64) -> Self {
        self.mem_req = mem_req;
        self.disk_req = disk_req;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// The name if one is set, otherwise the numeric id.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.id.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepEdge {
    pub src: TaskId,
    pub dst: TaskId,
    pub data_size: f64,
}

impl DepEdge {
    pub fn new(src: usize, dst: usize, data_size: f64) -> Self {
        Self {
            src: TaskId(src),
            dst: TaskId(dst),
            data_size,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskGraph {
    pub nodes: Vec<TaskNode>,
    pub edges: Vec<DepEdge>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
    #[error("graph contains a cycle")]
    Cycle,
    #[error("negative or non-finite weight: {0}")]
    NegativeWeight(String),
    #[error("graph has no edges")]
    EmptyEdgeSet,
    #[error("total node weight is zero")]
    ZeroNodeWeight,
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single problem found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NonDenseId { index: usize, id: TaskId },
    NegativeWeight { field: &'static str, owner: String, value: f64 },
    DanglingEdge { edge: usize, id: TaskId },
    SelfLoop { task: TaskId },
    DuplicateEdge { src: TaskId, dst: TaskId },
    Cycle { tasks: Vec<TaskId> },
}

impl Violation {
    /// Short machine-friendly tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Empty => "empty",
            Violation::NonDenseId { .. } => "non-dense-id",
            Violation::NegativeWeight { .. } => "negative-weight",
            Violation::DanglingEdge { .. } => "dangling-id",
            Violation::SelfLoop { .. } => "self-loop",
            Violation::DuplicateEdge { .. } => "duplicate-edge",
            Violation::Cycle { .. } => "cycle",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no nodes"),
            Violation::NonDenseId { index, id } => {
                write!(f, "node at position {index} has id {id}, expected {index}")
            }
            Violation::NegativeWeight { field, owner, value } => {
                write!(f, "{owner}: {field} = {value} is negative or not finite")
            }
            Violation::DanglingEdge { edge, id } => {
                write!(f, "edge #{edge} references unknown task {id}")
            }
            Violation::SelfLoop { task } => write!(f, "self loop on task {task}"),
            Violation::DuplicateEdge { src, dst } => write!(f, "duplicate edge {src}->{dst}"),
            Violation::Cycle { tasks } => {
                let ids: Vec<String> = tasks.iter().map(|t| t.to_string()).collect();
                write!(f, "cycle through tasks [{}]", ids.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Compressed forward/backward adjacency. Entries are edge indices into
/// [`TaskGraph::edges`]; edges with out-of-range endpoints are skipped.
#[derive(Debug, Clone)]
pub struct Adjacency {
    out_offsets: Vec<usize>,
    out_edges: Vec<usize>,
    in_offsets: Vec<usize>,
    in_edges: Vec<usize>,
}

impl Adjacency {
    pub fn new(graph: &TaskGraph) -> Self {
        let n = graph.nodes.len();
        let mut out_deg = vec![0usize; n + 1];
        let mut in_deg = vec![0usize; n + 1];
        for e in &graph.edges {
            if e.src.0 < n && e.dst.0 < n {
                out_deg[e.src.0 + 1] += 1;
                in_deg[e.dst.0 + 1] += 1;
            }
        }
        for i in 0..n {
            out_deg[i + 1] += out_deg[i];
            in_deg[i + 1] += in_deg[i];
        }
        let mut out_edges = vec![0; out_deg[n]];
        let mut in_edges = vec![0; in_deg[n]];
        let mut out_fill = out_deg.clone();
        let mut in_fill = in_deg.clone();
        for (idx, e) in graph.edges.iter().enumerate() {
            if e.src.0 < n && e.dst.0 < n {
                out_edges[out_fill[e.src.0]] = idx;
                out_fill[e.src.0] += 1;
                in_edges[in_fill[e.dst.0]] = idx;
                in_fill[e.dst.0] += 1;
            }
        }
        Self {
            out_offsets: out_deg,
            out_edges,
            in_offsets: in_deg,
            in_edges,
        }
    }

    /// Indices of edges leaving `task`.
    pub fn outgoing(&self, task: TaskId) -> &[usize] {
        &self.out_edges[self.out_offsets[task.0]..self.out_offsets[task.0 + 1]]
    }

    /// Indices of edges entering `task`.
    pub fn incoming(&self, task: TaskId) -> &[usize] {
        &self.in_edges[self.in_offsets[task.0]..self.in_offsets[task.0 + 1]]
    }

    pub fn in_degree(&self, task: TaskId) -> usize {
        self.in_offsets[task.0 + 1] - self.in_offsets[task.0]
    }

    pub fn out_degree(&self, task: TaskId) -> usize {
        self.out_offsets[task.0 + 1] - self.out_offsets[task.0]
    }
}

impl TaskGraph {
    pub fn new(nodes: Vec<TaskNode>, edges: Vec<DepEdge>) -> Self {
        Self { nodes, edges }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: TaskId) -> &TaskNode {
        &self.nodes[id.0]
    }

    pub fn task_ids(&self) -> impl Iterator<Item = TaskId> + '_ {
        (0..self.nodes.len()).map(TaskId)
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }

    /// Edge weights under a unit link: τ = data_size.
    pub fn unit_tau(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.data_size).collect()
    }

    pub fn sources(&self) -> Vec<TaskId> {
        let adj = self.adjacency();
        self.task_ids().filter(|&t| adj.in_degree(t) == 0).collect()
    }

    pub fn exits(&self) -> Vec<TaskId> {
        let adj = self.adjacency();
        self.task_ids().filter(|&t| adj.out_degree(t) == 0).collect()
    }

    /// Finds a task by label (name, falling back to the dense id).
    pub fn find(&self, label: &str) -> Option<TaskId> {
        self.nodes.iter().find(|n| n.label() == label).map(|n| n.id)
    }

    pub fn ensure_valid(&self) -> Result<(), GraphError> {
        let report = validate(self);
        if report.is_ok() {
            Ok(())
        } else {
            Err(GraphError::Invalid(report))
        }
    }
}

fn check_weight(out: &mut Vec<Violation>, field: &'static str, owner: impl Fn() -> String, value: f64) {
    if !(value.is_finite() && value >= 0.0) {
        out.push(Violation::NegativeWeight {
            field,
            owner: owner(),
            value,
        });
    }
}

/// Reports every structural problem in `graph`. An ok report implies the
/// graph is a non-empty DAG with dense ids and non-negative weights.
pub fn validate(graph: &TaskGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let n = graph.nodes.len();
    if n == 0 {
        violations.push(Violation::Empty);
    }
    for (index, node) in graph.nodes.iter().enumerate() {
        if node.id.0 != index {
            violations.push(Violation::NonDenseId { index, id: node.id });
        }
        let owner = || format!("task {}", node.id);
        check_weight(&mut violations, "cost", owner, node.cost);
        if let Some(work) = node.work {
            check_weight(&mut violations, "work", owner, work);
        }
        check_weight(&mut violations, "mem_req", owner, node.mem_req);
        check_weight(&mut violations, "disk_req", owner, node.disk_req);
    }
    let mut seen = HashSet::with_capacity(graph.edges.len());
    for (idx, e) in graph.edges.iter().enumerate() {
        for id in [e.src, e.dst] {
            if id.0 >= n {
                violations.push(Violation::DanglingEdge { edge: idx, id });
            }
        }
        if e.src == e.dst {
            violations.push(Violation::SelfLoop { task: e.src });
        }
        if !seen.insert((e.src, e.dst)) {
            violations.push(Violation::DuplicateEdge {
                src: e.src,
                dst: e.dst,
            });
        }
        check_weight(
            &mut violations,
            "data_size",
            || format!("edge {}->{}", e.src, e.dst),
            e.data_size,
        );
    }
    // Self loops are already reported; keep them out of the cycle search.
    let stuck = kahn_leftovers(graph);
    if !stuck.is_empty() {
        violations.push(Violation::Cycle { tasks: stuck });
    }
    ValidationReport { violations }
}

/// Tasks that never reach in-degree zero under Kahn's algorithm, ignoring
/// self loops and dangling edges.
fn kahn_leftovers(graph: &TaskGraph) -> Vec<TaskId> {
    let n = graph.nodes.len();
    let adj = graph.adjacency();
    let mut indeg: Vec<usize> = (0..n)
        .map(|i| {
            adj.incoming(TaskId(i))
                .iter()
                .filter(|&&e| graph.edges[e].src != graph.edges[e].dst)
                .count()
        })
        .collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut done = vec![false; n];
    while let Some(u) = stack.pop() {
        done[u] = true;
        for &e in adj.outgoing(TaskId(u)) {
            let v = graph.edges[e].dst.0;
            if v == u {
                continue;
            }
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    (0..n).filter(|&i| !done[i]).map(TaskId).collect()
}

/// Topological order with ties broken by ascending id.
pub fn topological_order(graph: &TaskGraph) -> Result<Vec<TaskId>, GraphError> {
    let n = graph.nodes.len();
    let adj = graph.adjacency();
    let mut indeg: Vec<usize> = (0..n).map(|i| adj.in_degree(TaskId(i))).collect();
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(TaskId(u));
        for &e in adj.outgoing(TaskId(u)) {
            let v = graph.edges[e].dst.0;
            indeg[v] -= 1;
            if indeg[v] == 0 {
                heap.push(Reverse(v));
            }
        }
    }
    if order.len() != n {
        return Err(GraphError::Cycle);
    }
    Ok(order)
}

/// Ensures a single source by adding a zero-cost virtual source when the
/// graph has several. Single-source graphs are returned unchanged.
pub fn normalize(graph: &TaskGraph) -> Result<TaskGraph, GraphError> {
    graph.ensure_valid()?;
    let sources = graph.sources();
    if sources.len() <= 1 {
        return Ok(graph.clone());
    }
    let mut out = graph.clone();
    let root = out.nodes.len();
    out.nodes.push(TaskNode::new(root, 0.0).with_name("virtual-source"));
    out.edges
        .extend(sources.into_iter().map(|s| DepEdge::new(root, s.0, 0.0)));
    Ok(out)
}

/// Communication-to-computation ratio: mean edge weight over mean node cost.
pub fn ccr(graph: &TaskGraph, tau: &[f64]) -> Result<f64, GraphError> {
    if graph.edges.is_empty() || tau.is_empty() {
        return Err(GraphError::EmptyEdgeSet);
    }
    let total_cost: f64 = graph.nodes.iter().map(|n| n.cost).sum();
    if graph.nodes.is_empty() || total_cost <= 0.0 {
        return Err(GraphError::ZeroNodeWeight);
    }
    let mean_edge = tau.iter().sum::<f64>() / tau.len() as f64;
    let mean_node = total_cost / graph.nodes.len() as f64;
    Ok(mean_edge / mean_node)
}

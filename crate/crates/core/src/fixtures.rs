//! Built-in reference instances.

use crate::platform::{GridPlatform, NetLink, Resource};
use crate::taskgraph::{DepEdge, TaskGraph, TaskNode};

/// Nine-task reference DAG. Tasks are named "1".."9"; dense ids are 0..8.
pub fn nine_task_graph() -> TaskGraph {
    let costs = [2.0, 3.0, 3.0, 4.0, 5.0, 4.0, 4.0, 4.0, 1.0];
    let nodes = costs
        .iter()
        .enumerate()
        .map(|(i, &c)| TaskNode::new(i, c).with_name((i + 1).to_string()))
        .collect();
    // (from, to, data) using the 1-based task names.
    let deps: [(usize, usize, f64); 12] = [
        (1, 2, 4.0),
        (1, 3, 1.0),
        (1, 4, 1.0),
        (1, 5, 1.0),
        (1, 7, 10.0),
        (2, 6, 1.0),
        (2, 7, 1.0),
        (3, 8, 1.0),
        (4, 8, 1.0),
        (6, 9, 5.0),
        (7, 9, 6.0),
        (8, 9, 5.0),
    ];
    let edges = deps
        .iter()
        .map(|&(a, b, d)| DepEdge::new(a - 1, b - 1, d))
        .collect();
    TaskGraph::new(nodes, edges)
}

/// Expected (name, tlevel, blevel, alap) rows for [`nine_task_graph`] under
/// the unit link.
pub const NINE_TASK_LEVELS: &[(&str, f64, f64, f64)] = &[
    ("1", 0.0, 23.0, 0.0),
    ("2", 6.0, 15.0, 8.0),
    ("3", 3.0, 14.0, 9.0),
    ("4", 3.0, 15.0, 8.0),
    ("5", 3.0, 5.0, 18.0),
    ("6", 10.0, 10.0, 13.0),
    ("7", 12.0, 11.0, 12.0),
    ("8", 8.0, 10.0, 13.0),
    ("9", 22.0, 1.0, 22.0),
];

/// `count` identical unit-speed resources in one cluster joined by the unit
/// link (bandwidth 1, latency 0).
pub fn unit_platform(count: usize) -> GridPlatform {
    let resources = (0..count).map(|i| Resource::new(i, 1.0, 0)).collect();
    GridPlatform::new(resources, vec![], NetLink::unit())
}

/// Three identical unit processors.
pub fn three_unit_platform() -> GridPlatform {
    unit_platform(3)
}

//! Exhaustive minimum-makespan search for tiny instances.
//!
//! Every feasible schedule's per-resource task orders can be replayed as a
//! global sequence in start-time order; appending each task at its earliest
//! start on its resource never starts it later. Enumerating all ready-task
//! sequences together with all resource choices therefore reaches an optimal
//! schedule. A running best bound prunes partial schedules.

use crate::platform::{exec_time, fits, GridPlatform, MonitorSnapshot, ResourceId};
use crate::taskgraph::TaskGraph;

use super::{Placement, SchedError, Schedule};

pub const ORACLE_MAX_RESOURCES: usize = 3;

struct Search<'a> {
    graph: &'a TaskGraph,
    platform: &'a GridPlatform,
    parents: Vec<Vec<(usize, f64)>>,
    children: Vec<Vec<usize>>,
    allowed: Vec<Vec<usize>>,
    exec: Vec<Vec<f64>>,
    missing: Vec<usize>,
    slot: Vec<Option<(usize, f64, f64)>>,
    ready_time: Vec<f64>,
    best: f64,
    best_slots: Vec<Option<(usize, f64, f64)>>,
}

impl Search<'_> {
    fn dfs(&mut self, placed: usize, current: f64) {
        let n = self.graph.nodes.len();
        if placed == n {
            if current < self.best {
                self.best = current;
                self.best_slots = self.slot.clone();
            }
            return;
        }
        for task in 0..n {
            if self.slot[task].is_some() || self.missing[task] != 0 {
                continue;
            }
            for ai in 0..self.allowed[task].len() {
                let r = self.allowed[task][ai];
                let mut st = self.ready_time[r];
                for &(p, data) in &self.parents[task] {
                    let (pr, _, pft) = self.slot[p].expect("parents placed first");
                    let comm = self
                        .platform
                        .comm_time(data, ResourceId(pr), ResourceId(r));
                    st = st.max(pft + comm);
                }
                let ft = st + self.exec[task][r];
                let next = current.max(ft);
                if next >= self.best {
                    continue;
                }
                let saved = self.ready_time[r];
                self.ready_time[r] = ft;
                self.slot[task] = Some((r, st, ft));
                for ci in 0..self.children[task].len() {
                    let c = self.children[task][ci];
                    self.missing[c] -= 1;
                }
                self.dfs(placed + 1, next);
                for ci in 0..self.children[task].len() {
                    let c = self.children[task][ci];
                    self.missing[c] += 1;
                }
                self.slot[task] = None;
                self.ready_time[r] = saved;
            }
        }
    }
}

/// Minimum-makespan schedule by exhaustive search. Limited to
/// `max_nodes` tasks and [`ORACLE_MAX_RESOURCES`] resources.
pub fn oracle_schedule(
    graph: &TaskGraph,
    platform: &GridPlatform,
    max_nodes: usize,
) -> Result<Schedule, SchedError> {
    graph.ensure_valid()?;
    platform.validate()?;
    let n = graph.nodes.len();
    let m = platform.len();
    if n > max_nodes || m > ORACLE_MAX_RESOURCES {
        return Err(SchedError::InstanceTooLarge {
            tasks: n,
            resources: m,
        });
    }
    let mut parents = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    for e in &graph.edges {
        parents[e.dst.0].push((e.src.0, e.data_size));
        children[e.src.0].push(e.dst.0);
    }
    let empty = MonitorSnapshot::new(m, 0);
    let mut allowed = Vec::with_capacity(n);
    for node in &graph.nodes {
        let ok: Vec<usize> = (0..m)
            .filter(|&r| fits(node, &platform.resources[r], &empty))
            .collect();
        if ok.is_empty() {
            return Err(SchedError::NoFittingResource(node.id));
        }
        allowed.push(ok);
    }
    let exec = graph
        .nodes
        .iter()
        .map(|node| platform.resources.iter().map(|r| exec_time(node, r)).collect())
        .collect();
    let missing = parents.iter().map(Vec::len).collect();
    let mut search = Search {
        graph,
        platform,
        parents,
        children,
        allowed,
        exec,
        missing,
        slot: vec![None; n],
        ready_time: vec![0.0; m],
        best: f64::INFINITY,
        best_slots: Vec::new(),
    };
    search.dfs(0, 0.0);
    let placements = search
        .best_slots
        .into_iter()
        .enumerate()
        .map(|(task, slot)| {
            let (r, st, ft) = slot.expect("complete schedule");
            Placement {
                task: crate::taskgraph::TaskId(task),
                resource: ResourceId(r),
                st,
                ft,
            }
        })
        .collect();
    Ok(Schedule::from_placements(placements))
}

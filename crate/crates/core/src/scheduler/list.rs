use std::collections::BinaryHeap;

use crate::platform::{fits, GridPlatform, MonitorSnapshot, ResourceId};
use crate::taskgraph::{LevelTable, TaskGraph};

use super::{data_ready, ByPriority, Placement, SchedError, Schedule};

/// Static list scheduling: repeatedly take the ready task with the highest
/// tlevel + blevel and append it to the fitting resource where it finishes
/// earliest (ties to the lowest resource id).
pub fn static_list_schedule(
    graph: &TaskGraph,
    platform: &GridPlatform,
    levels: &LevelTable,
) -> Result<Schedule, SchedError> {
    graph.ensure_valid()?;
    platform.validate()?;
    let adj = graph.adjacency();
    let mut missing: Vec<usize> = graph.task_ids().map(|t| adj.in_degree(t)).collect();
    let mut ready: BinaryHeap<ByPriority> = graph
        .task_ids()
        .filter(|&t| missing[t.0] == 0)
        .map(|task| ByPriority {
            priority: levels.priority(task),
            task,
        })
        .collect();

    // Tasks on one resource run back to back, so a task's commitments are
    // released before the next one starts there.
    let mut snapshot = MonitorSnapshot::for_run(platform, graph);
    let mut placements = Vec::with_capacity(graph.len());

    while let Some(ByPriority { task, .. }) = ready.pop() {
        let node = graph.node(task);
        let mut best: Option<(f64, f64, ResourceId)> = None;
        for r in platform.resource_ids() {
            if !fits(node, platform.resource(r), &snapshot) {
                continue;
            }
            let arrival = data_ready(graph, &adj, platform, task, r, |p| {
                snapshot.placement(p).map(|rec| (rec.resource, rec.ft))
            });
            let st = snapshot.ready_time[r.0].max(arrival);
            let ft = st + platform.exec_time(node, r);
            if best.is_none_or(|(_, bft, _)| ft < bft) {
                best = Some((st, ft, r));
            }
        }
        let (st, ft, resource) = best.ok_or(SchedError::NoFittingResource(task))?;
        snapshot.update_resources(node, resource, st, ft)?;
        snapshot.complete(task);
        placements.push(Placement {
            task,
            resource,
            st,
            ft,
        });
        for &e in adj.outgoing(task) {
            let child = graph.edges[e].dst;
            missing[child.0] -= 1;
            if missing[child.0] == 0 {
                ready.push(ByPriority {
                    priority: levels.priority(child),
                    task: child,
                });
            }
        }
    }
    debug_assert_eq!(placements.len(), graph.len());
    Ok(Schedule::from_placements(placements))
}

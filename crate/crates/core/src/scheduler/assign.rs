use std::collections::BTreeMap;

use crate::platform::{GridPlatform, MonitorSnapshot, ResourceId};
use crate::taskgraph::{Adjacency, LevelTable, TaskGraph, TaskId};

use super::{data_ready, SchedError};

/// Everything an assignment strategy may look at when placing a batch of
/// ready tasks. All views are read-only.
pub struct AssignerContext<'a> {
    pub graph: &'a TaskGraph,
    pub adjacency: &'a Adjacency,
    pub platform: &'a GridPlatform,
    pub levels: &'a LevelTable,
    pub snapshot: &'a MonitorSnapshot,
    /// Resource chosen for each task by the static list schedule.
    pub static_mapping: &'a [ResourceId],
    pub suggestions: &'a BTreeMap<TaskId, ResourceId>,
    pub now: f64,
    /// Ready tasks, highest priority first.
    pub ready: Vec<TaskId>,
    /// Candidate resources for each entry of `ready`; never empty.
    pub candidates: Vec<Vec<ResourceId>>,
}

impl AssignerContext<'_> {
    /// Earliest arrival of all parent data at `resource`. Parents of a ready
    /// task are always placed.
    pub fn data_ready(&self, task: TaskId, resource: ResourceId) -> f64 {
        data_ready(
            self.graph,
            self.adjacency,
            self.platform,
            task,
            resource,
            |p| self.snapshot.placement(p).map(|rec| (rec.resource, rec.ft)),
        )
    }

    /// Predicted (start, finish) if `task` were appended to `resource` when
    /// that resource frees up at `ready_time`.
    pub fn predict(&self, task: TaskId, resource: ResourceId, ready_time: f64) -> (f64, f64) {
        let st = self.now.max(ready_time).max(self.data_ready(task, resource));
        let ft = st + self.platform.exec_time(self.graph.node(task), resource);
        (st, ft)
    }
}

/// A decision for one task. `not_before` lets a strategy hold a task back
/// (e.g. while waiting to fill a batch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub task: TaskId,
    pub resource: ResourceId,
    pub not_before: f64,
}

/// A resource-assignment strategy plugged into the CCF loop.
///
/// Assignments are applied in the returned order; tasks sent to the same
/// resource are serialized in that order. Implementations must be
/// deterministic functions of the context and their own configuration.
pub trait Assigner {
    fn name(&self) -> &str;

    fn assign(&mut self, ctx: &AssignerContext<'_>) -> Result<Vec<Assignment>, SchedError>;
}

/// The resource with the smallest predicted finish; ties go to the lowest id.
pub fn argmin_finish(predicted: &[(ResourceId, f64)]) -> Option<ResourceId> {
    predicted
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
        .map(|(r, _)| r)
}

/// Earliest-finish-time choice over each task's candidate set, taking the
/// tasks in priority order and accounting for earlier picks in the batch.
pub fn greedy_assign(ctx: &AssignerContext<'_>) -> Vec<Assignment> {
    let mut ready_time = ctx.snapshot.ready_time.clone();
    let mut out = Vec::with_capacity(ctx.ready.len());
    for (task, candidates) in ctx.ready.iter().zip(&ctx.candidates) {
        let predicted: Vec<(ResourceId, f64)> = candidates
            .iter()
            .map(|&r| (r, ctx.predict(*task, r, ready_time[r.0]).1))
            .collect();
        let resource = argmin_finish(&predicted).expect("candidate set is never empty");
        let ft = predicted
            .iter()
            .find(|(r, _)| *r == resource)
            .map(|(_, ft)| *ft)
            .unwrap_or(0.0);
        ready_time[resource.0] = ready_time[resource.0].max(ft);
        out.push(Assignment {
            task: *task,
            resource,
            not_before: ctx.now,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyAssigner;

impl Assigner for GreedyAssigner {
    fn name(&self) -> &str {
        "ccf-greedy"
    }

    fn assign(&mut self, ctx: &AssignerContext<'_>) -> Result<Vec<Assignment>, SchedError> {
        Ok(greedy_assign(ctx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::platform::Resource;
    use crate::scheduler::levels_for;
    use crate::taskgraph::{DepEdge, TaskNode};
    use proptest::prelude::*;

    #[test]
    fn argmin_examples() {
        let r = |i| ResourceId(i);
        assert_eq!(argmin_finish(&[(r(4), 1.0)]), Some(r(4)));
        assert_eq!(argmin_finish(&[(r(0), 7.0), (r(1), 6.5), (r(2), 9.0)]), Some(r(1)));
        assert_eq!(argmin_finish(&[(r(2), 3.0), (r(1), 3.0)]), Some(r(1)));
        assert_eq!(argmin_finish(&[]), None);
    }

    proptest! {
        #[test]
        fn argmin_is_scale_invariant(
            finishes in prop::collection::vec(0.0f64..100.0, 1..8),
            scale in 0.01f64..100.0,
        ) {
            let a: Vec<_> = finishes.iter().enumerate().map(|(i, &f)| (ResourceId(i), f)).collect();
            let b: Vec<_> = a.iter().map(|&(r, f)| (r, f * scale)).collect();
            prop_assert_eq!(argmin_finish(&a), argmin_finish(&b));
        }
    }

    #[test]
    fn co_location_beats_transfer() {
        // Parent on R1, heavy edge, equal speeds.
        let graph = TaskGraph::new(
            vec![TaskNode::new(0, 1.0), TaskNode::new(1, 1.0)],
            vec![DepEdge::new(0, 1, 100.0)],
        );
        let platform = fixtures::unit_platform(2);
        let levels = levels_for(&graph, &platform).unwrap();
        let adjacency = graph.adjacency();
        let mut snapshot = MonitorSnapshot::for_run(&platform, &graph);
        snapshot
            .update_resources(graph.node(TaskId(0)), ResourceId(1), 0.0, 1.0)
            .unwrap();
        snapshot.complete(TaskId(0));
        let suggestions = BTreeMap::new();
        let static_mapping = vec![ResourceId(0); 2];
        let ctx = AssignerContext {
            graph: &graph,
            adjacency: &adjacency,
            platform: &platform,
            levels: &levels,
            snapshot: &snapshot,
            static_mapping: &static_mapping,
            suggestions: &suggestions,
            now: 1.0,
            ready: vec![TaskId(1)],
            candidates: vec![vec![ResourceId(0), ResourceId(1)]],
        };
        let out = greedy_assign(&ctx);
        assert_eq!(out[0].resource, ResourceId(1));
        assert_eq!(ctx.predict(TaskId(1), ResourceId(0), 0.0), (101.0, 102.0));
        assert_eq!(ctx.predict(TaskId(1), ResourceId(1), 1.0), (1.0, 2.0));
    }

    #[test]
    fn batch_accounts_for_earlier_picks() {
        let graph = TaskGraph::new((0..2).map(|i| TaskNode::new(i, 4.0)).collect(), vec![]);
        let platform = GridPlatform::new(
            vec![Resource::new(0, 1.0, 0), Resource::new(1, 1.0, 0)],
            vec![],
            crate::platform::NetLink::unit(),
        );
        let levels = levels_for(&graph, &platform).unwrap();
        let adjacency = graph.adjacency();
        let snapshot = MonitorSnapshot::for_run(&platform, &graph);
        let suggestions = BTreeMap::new();
        let static_mapping = vec![ResourceId(0); 2];
        let all = vec![ResourceId(0), ResourceId(1)];
        let ctx = AssignerContext {
            graph: &graph,
            adjacency: &adjacency,
            platform: &platform,
            levels: &levels,
            snapshot: &snapshot,
            static_mapping: &static_mapping,
            suggestions: &suggestions,
            now: 0.0,
            ready: vec![TaskId(0), TaskId(1)],
            candidates: vec![all.clone(), all],
        };
        let out = greedy_assign(&ctx);
        assert_eq!(out[0].resource, ResourceId(0));
        assert_eq!(out[1].resource, ResourceId(1));
    }
}

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use crate::platform::{fits, GridPlatform, MonitorSnapshot, ResourceId};
use crate::taskgraph::{Adjacency, LevelTable, TaskGraph, TaskId};

use super::{
    sort_by_priority, static_list_schedule, Assigner, AssignerContext, ByPriority, EventKind,
    Placement, SchedError, Schedule, SchedulerEvent,
};

/// Result of a CCF run.
#[derive(Debug, Clone)]
pub struct CcfOutcome {
    pub schedule: Schedule,
    pub trace: Vec<SchedulerEvent>,
    /// The list schedule used as the initial static mapping.
    pub static_schedule: Schedule,
    /// Monitor state after the last task finished.
    pub snapshot: MonitorSnapshot,
}

/// A task is ready once every parent has finished.
pub fn is_ready(graph: &TaskGraph, adj: &Adjacency, task: TaskId, snapshot: &MonitorSnapshot) -> bool {
    adj.incoming(task)
        .iter()
        .all(|&e| snapshot.is_finished(graph.edges[e].src))
}

/// Suggests the resource of the finished parent that sends the most data to
/// `task` (ties to the lower parent id). `None` when no parent has finished.
pub fn suggest_resources(
    graph: &TaskGraph,
    adj: &Adjacency,
    task: TaskId,
    snapshot: &MonitorSnapshot,
) -> Option<ResourceId> {
    adj.incoming(task)
        .iter()
        .map(|&e| &graph.edges[e])
        .filter(|e| snapshot.is_finished(e.src))
        .max_by(|a, b| {
            a.data_size
                .total_cmp(&b.data_size)
                .then_with(|| b.src.cmp(&a.src))
        })
        .and_then(|e| snapshot.placement(e.src).map(|p| p.resource))
}

#[derive(Debug, Clone, Copy)]
struct FinishKey {
    ft: f64,
    task: TaskId,
}

impl PartialEq for FinishKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FinishKey {}

impl PartialOrd for FinishKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FinishKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ft
            .total_cmp(&other.ft)
            .then_with(|| self.task.cmp(&other.task))
    }
}

struct Ccf<'a> {
    graph: &'a TaskGraph,
    adj: Adjacency,
    platform: &'a GridPlatform,
    levels: &'a LevelTable,
    static_mapping: Vec<ResourceId>,
    snapshot: MonitorSnapshot,
    suggestions: BTreeMap<TaskId, ResourceId>,
    running: BinaryHeap<Reverse<FinishKey>>,
    placements: Vec<Placement>,
    trace: Vec<SchedulerEvent>,
}

impl Ccf<'_> {
    fn event(&mut self, time: f64, kind: EventKind, task: TaskId, resource: Option<ResourceId>) {
        self.trace.push(SchedulerEvent {
            time,
            kind,
            task,
            resource,
        });
    }

    /// Static-mapping resource, parents' resources and the suggestion,
    /// filtered by capacity. Falls back to every resource with room, then to
    /// every resource whose raw capacity could ever hold the task.
    fn candidates(&self, task: TaskId) -> Result<Vec<ResourceId>, SchedError> {
        let node = self.graph.node(task);
        let mut set = vec![self.static_mapping[task.0]];
        set.extend(
            self.adj
                .incoming(task)
                .iter()
                .filter_map(|&e| self.snapshot.placement(self.graph.edges[e].src))
                .map(|p| p.resource),
        );
        set.extend(self.suggestions.get(&task).copied());
        set.sort_unstable();
        set.dedup();
        let room = |r: &ResourceId| fits(node, self.platform.resource(*r), &self.snapshot);
        set.retain(room);
        if set.is_empty() {
            set = self.platform.resource_ids().filter(room).collect();
        }
        if set.is_empty() {
            let empty = MonitorSnapshot::new(self.platform.len(), 0);
            set = self
                .platform
                .resource_ids()
                .filter(|r| fits(node, self.platform.resource(*r), &empty))
                .collect();
        }
        if set.is_empty() {
            return Err(SchedError::NoFittingResource(task));
        }
        Ok(set)
    }

    /// assignResource + updateResources + enq(RUNNING-QUEUE) for a batch of
    /// ready tasks.
    fn submit(&mut self, mut batch: Vec<TaskId>, now: f64, assigner: &mut dyn Assigner) -> Result<(), SchedError> {
        sort_by_priority(&mut batch, self.levels);
        let candidates = batch
            .iter()
            .map(|&t| self.candidates(t))
            .collect::<Result<Vec<_>, _>>()?;
        let ctx = AssignerContext {
            graph: self.graph,
            adjacency: &self.adj,
            platform: self.platform,
            levels: self.levels,
            snapshot: &self.snapshot,
            static_mapping: &self.static_mapping,
            suggestions: &self.suggestions,
            now,
            ready: batch.clone(),
            candidates,
        };
        let decisions = assigner.assign(&ctx)?;

        let mut seen = vec![false; batch.len()];
        for d in &decisions {
            let slot = batch.iter().position(|&t| t == d.task).ok_or_else(|| {
                SchedError::Assigner(format!("task {} is not in the batch", d.task))
            })?;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(SchedError::Assigner(format!("task {} assigned twice", d.task)));
            }
            if d.resource.0 >= self.platform.len() {
                return Err(SchedError::Assigner(format!("unknown resource {}", d.resource)));
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(SchedError::Assigner(format!("task {} left unassigned", batch[i])));
        }

        for d in decisions {
            let node = self.graph.node(d.task);
            let arrival = super::data_ready(self.graph, &self.adj, self.platform, d.task, d.resource, |p| {
                self.snapshot.placement(p).map(|rec| (rec.resource, rec.ft))
            });
            let st = now
                .max(d.not_before)
                .max(self.snapshot.ready_time[d.resource.0])
                .max(arrival);
            let ft = st + self.platform.exec_time(node, d.resource);
            self.snapshot.update_resources(node, d.resource, st, ft)?;
            self.suggestions.remove(&d.task);
            self.placements.push(Placement {
                task: d.task,
                resource: d.resource,
                st,
                ft,
            });
            self.running.push(Reverse(FinishKey { ft, task: d.task }));
            self.event(now, EventKind::Submitted, d.task, Some(d.resource));
        }
        Ok(())
    }
}

/// Runs the CCF dynamic scheduler.
///
/// Sources enter RUNNING-QUEUE first. Each loop iteration dequeues the next
/// task to finish in simulated time, pushes all of its children into
/// CHILDREN-QUEUE (drained by descending tlevel + blevel), hands the children
/// whose parents have all finished to `assigner` as one batch, and records a
/// resource suggestion for the others.
pub fn run_ccf(
    graph: &TaskGraph,
    platform: &GridPlatform,
    levels: &LevelTable,
    assigner: &mut dyn Assigner,
) -> Result<CcfOutcome, SchedError> {
    let static_schedule = static_list_schedule(graph, platform, levels)?;
    let mut ccf = Ccf {
        graph,
        adj: graph.adjacency(),
        platform,
        levels,
        static_mapping: static_schedule.mapping(),
        snapshot: MonitorSnapshot::for_run(platform, graph),
        suggestions: BTreeMap::new(),
        running: BinaryHeap::new(),
        placements: Vec::with_capacity(graph.len()),
        trace: Vec::new(),
    };

    let sources = graph.sources();
    ccf.submit(sources, 0.0, assigner)?;

    while let Some(Reverse(FinishKey { ft: now, task })) = ccf.running.pop() {
        ccf.snapshot.complete(task);
        let resource = ccf.snapshot.placement(task).map(|p| p.resource);
        ccf.event(now, EventKind::Finished, task, resource);

        let mut children: BinaryHeap<ByPriority> = BinaryHeap::new();
        for i in 0..ccf.adj.out_degree(task) {
            let child = graph.edges[ccf.adj.outgoing(task)[i]].dst;
            children.push(ByPriority {
                priority: levels.priority(child),
                task: child,
            });
            ccf.event(now, EventKind::Queued, child, None);
        }

        let mut batch = Vec::new();
        while let Some(ByPriority { task: child, .. }) = children.pop() {
            if ccf.snapshot.placement(child).is_some() {
                continue;
            }
            if is_ready(graph, &ccf.adj, child, &ccf.snapshot) {
                batch.push(child);
            } else if let Some(r) = suggest_resources(graph, &ccf.adj, child, &ccf.snapshot) {
                ccf.suggestions.insert(child, r);
                ccf.event(now, EventKind::Suggested, child, Some(r));
            }
        }
        if !batch.is_empty() {
            ccf.submit(batch, now, assigner)?;
        }
    }

    if let Some(t) = graph.task_ids().find(|&t| ccf.snapshot.placement(t).is_none()) {
        return Err(SchedError::Assigner(format!("task {t} was never scheduled")));
    }
    Ok(CcfOutcome {
        schedule: Schedule::from_placements(ccf.placements),
        trace: ccf.trace,
        static_schedule,
        snapshot: ccf.snapshot,
    })
}

//! Schedulers and the schedule model.
//!
//! * [`static_list_schedule`]: priority list scheduling with earliest finish
//!   time placement, also used as the initial static mapping.
//! * [`run_ccf`]: the Cluster-ready Children First dynamic scheduler driven
//!   by a discrete-event loop, parameterized by an [`Assigner`].
//! * [`oracle_schedule`]: exhaustive search for tiny instances.
//! * [`verify_schedule`]: the feasibility gate every schedule must pass.

mod assign;
mod ccf;
mod export;
mod list;
mod oracle;
mod verify;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::platform::{GridPlatform, PlatformError, ResourceId};
use crate::taskgraph::{
    compute_levels_weighted, Adjacency, GraphError, LevelTable, TaskGraph, TaskId,
};

pub use assign::{argmin_finish, greedy_assign, Assigner, AssignerContext, Assignment, GreedyAssigner};
pub use ccf::{is_ready, run_ccf, suggest_resources, CcfOutcome};
pub use export::{format_trace, gantt_rows, load_schedule, save_schedule, trace_line};
pub use list::static_list_schedule;
pub use oracle::{oracle_schedule, ORACLE_MAX_RESOURCES};
pub use verify::{load_balance_report, verify_schedule, LoadBalance, ScheduleIssue, ScheduleReport};

#[derive(Debug, Error)]
pub enum SchedError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error("no resource can hold task {0}")]
    NoFittingResource(TaskId),
    #[error("assigner failed: {0}")]
    Assigner(String),
    #[error("instance too large for exhaustive search: {tasks} tasks, {resources} resources")]
    InstanceTooLarge { tasks: usize, resources: usize },
}

/// One task's slot in a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub task: TaskId,
    pub resource: ResourceId,
    pub st: f64,
    pub ft: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub makespan: f64,
    pub placements: Vec<Placement>,
}

impl Schedule {
    /// Builds a schedule sorted by task id with makespan = max ft.
    pub fn from_placements(mut placements: Vec<Placement>) -> Self {
        placements.sort_by_key(|p| p.task);
        let makespan = placements.iter().map(|p| p.ft).fold(0.0, f64::max);
        Self {
            makespan,
            placements,
        }
    }

    pub fn placement(&self, task: TaskId) -> Option<&Placement> {
        match self.placements.get(task.0) {
            Some(p) if p.task == task => Some(p),
            _ => self.placements.iter().find(|p| p.task == task),
        }
    }

    /// Resource of each task, indexed by task id.
    pub fn mapping(&self) -> Vec<ResourceId> {
        let mut out = vec![ResourceId(0); self.placements.len()];
        for p in &self.placements {
            if p.task.0 < out.len() {
                out[p.task.0] = p.resource;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    /// Task assigned to a resource and placed in RUNNING-QUEUE.
    Submitted,
    /// Task dequeued from RUNNING-QUEUE at its finish time.
    Finished,
    /// Child inserted into CHILDREN-QUEUE by a finishing parent.
    Queued,
    /// Child not ready yet; a resource suggestion was recorded.
    Suggested,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Submitted => "submitted",
            EventKind::Finished => "finished",
            EventKind::Queued => "queued",
            EventKind::Suggested => "suggested",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerEvent {
    pub time: f64,
    pub kind: EventKind,
    pub task: TaskId,
    pub resource: Option<ResourceId>,
}

/// Levels computed from the platform's mean execution and transfer times.
pub fn levels_for(graph: &TaskGraph, platform: &GridPlatform) -> Result<LevelTable, GraphError> {
    let (costs, tau) = platform.level_weights(graph);
    compute_levels_weighted(graph, &costs, &tau)
}

/// Earliest time all of `task`'s input data can be on `resource`, given a
/// lookup of each parent's (resource, finish time).
pub(crate) fn data_ready(
    graph: &TaskGraph,
    adj: &Adjacency,
    platform: &GridPlatform,
    task: TaskId,
    resource: ResourceId,
    parent_slot: impl Fn(TaskId) -> Option<(ResourceId, f64)>,
) -> f64 {
    adj.incoming(task)
        .iter()
        .map(|&e| {
            let edge = &graph.edges[e];
            let (pr, pft) = parent_slot(edge.src).expect("parent placed before child");
            pft + platform.comm_time(edge.data_size, pr, resource)
        })
        .fold(0.0, f64::max)
}

/// Heap key: highest priority first, then lowest id.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ByPriority {
    pub priority: f64,
    pub task: TaskId,
}

impl PartialEq for ByPriority {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ByPriority {}

impl PartialOrd for ByPriority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByPriority {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.task.cmp(&self.task))
    }
}

/// Sorts tasks by descending priority, ascending id.
pub(crate) fn sort_by_priority(tasks: &mut [TaskId], levels: &LevelTable) {
    tasks.sort_by(|a, b| {
        levels
            .priority(*b)
            .total_cmp(&levels.priority(*a))
            .then_with(|| a.cmp(b))
    });
}

use serde::{Deserialize, Serialize};

use crate::scheduler::sort_by_priority;
use crate::taskgraph::{LevelTable, TaskId};

use super::GaConfig;

/// A chromosome position: a real task or neutral padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Task(TaskId),
    Pad,
}

impl Slot {
    pub fn task(self) -> Option<TaskId> {
        match self {
            Slot::Task(t) => Some(t),
            Slot::Pad => None,
        }
    }
}

/// Exactly `batch_length` slots, plus the ready tasks that did not fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub slots: Vec<Slot>,
    pub overflow: Vec<TaskId>,
}

impl Batch {
    pub fn tasks(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.slots.iter().filter_map(|s| s.task())
    }

    pub fn real_len(&self) -> usize {
        self.tasks().count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BatchDecision {
    Empty,
    /// Under-full and the wait window has not elapsed yet.
    Wait { remaining: f64 },
    Ready(Batch),
}

/// Groups ready tasks into a batch of `cfg.batch_length` slots, highest
/// priority first. `waited` is how long the oldest ready task has been held.
pub fn build_batch(ready: &[TaskId], levels: &LevelTable, cfg: &GaConfig, waited: f64) -> BatchDecision {
    if ready.is_empty() {
        return BatchDecision::Empty;
    }
    let len = cfg.batch_length;
    if ready.len() < len && waited < cfg.batch_wait {
        return BatchDecision::Wait {
            remaining: cfg.batch_wait - waited,
        };
    }
    let mut order = ready.to_vec();
    sort_by_priority(&mut order, levels);
    let overflow = order.split_off(order.len().min(len));
    let mut slots: Vec<Slot> = order.into_iter().map(Slot::Task).collect();
    slots.resize(len, Slot::Pad);
    BatchDecision::Ready(Batch { slots, overflow })
}

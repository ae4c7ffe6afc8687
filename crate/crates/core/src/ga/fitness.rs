use serde::{Deserialize, Serialize};

use crate::platform::{fits, MonitorSnapshot, ResourceId};
use crate::scheduler::AssignerContext;
use crate::taskgraph::TaskId;

use super::batch::{Batch, Slot};
use super::island::Chromosome;

/// Per-resource costs of one real task in a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotCost {
    pub task: TaskId,
    /// Time all parent data is present on each resource.
    pub arrival: Vec<f64>,
    pub exec: Vec<f64>,
    /// Resource capacity admits the task.
    pub feasible: Vec<bool>,
}

/// Everything needed to evaluate a chromosome, detached from the scheduler
/// state. Stored verbatim in the history file so runs can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchModel {
    /// Earliest start for any task of the batch.
    pub start: f64,
    pub ready_time: Vec<f64>,
    /// `None` for padding slots.
    pub slots: Vec<Option<SlotCost>>,
    /// Added once per slot placed on an infeasible resource.
    pub penalty: f64,
}

/// Allowed genes per slot, plus the scheduler's candidate resources used to
/// seed part of the initial population.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSpace {
    pub domains: Vec<Vec<usize>>,
    pub hints: Vec<Vec<usize>>,
}

impl GeneSpace {
    /// Every slot may use any of `resources`; padding slots are pinned to 0.
    pub fn full(model: &BatchModel) -> Self {
        let all: Vec<usize> = (0..model.ready_time.len()).collect();
        let domains: Vec<Vec<usize>> = model
            .slots
            .iter()
            .map(|s| if s.is_some() { all.clone() } else { vec![0] })
            .collect();
        Self {
            hints: domains.clone(),
            domains,
        }
    }

    pub fn size(&self) -> f64 {
        self.domains.iter().map(|d| d.len() as f64).product()
    }
}

impl BatchModel {
    pub fn new(batch: &Batch, ctx: &AssignerContext<'_>, not_before: f64, ready_time: &[f64]) -> Self {
        let m = ctx.platform.len();
        let empty = MonitorSnapshot::new(m, 0);
        let mut slots = Vec::with_capacity(batch.slots.len());
        let mut bound = 0.0f64;
        let mut serial = 0.0;
        for slot in &batch.slots {
            let Slot::Task(task) = *slot else {
                slots.push(None);
                continue;
            };
            let node = ctx.graph.node(task);
            let arrival: Vec<f64> = (0..m).map(|r| ctx.data_ready(task, ResourceId(r))).collect();
            let exec: Vec<f64> = (0..m)
                .map(|r| ctx.platform.exec_time(node, ResourceId(r)))
                .collect();
            let mut feasible: Vec<bool> = ctx
                .platform
                .resources
                .iter()
                .map(|r| fits(node, r, ctx.snapshot))
                .collect();
            if !feasible.contains(&true) {
                feasible = ctx.platform.resources.iter().map(|r| fits(node, r, &empty)).collect();
            }
            bound = arrival.iter().copied().fold(bound, f64::max);
            serial += exec.iter().copied().fold(0.0, f64::max);
            slots.push(Some(SlotCost {
                task,
                arrival,
                exec,
                feasible,
            }));
        }
        let start = ctx.now.max(not_before);
        let bound = ready_time.iter().copied().fold(bound.max(start), f64::max) + serial;
        Self {
            start,
            ready_time: ready_time.to_vec(),
            slots,
            penalty: 10.0 * bound.max(1.0),
        }
    }

    pub fn gene_space(&self, batch: &Batch, ctx: &AssignerContext<'_>, restrict: bool) -> GeneSpace {
        let mut space = GeneSpace::full(self);
        for (i, slot) in batch.slots.iter().enumerate() {
            let Slot::Task(task) = *slot else { continue };
            let Some(pos) = ctx.ready.iter().position(|&t| t == task) else {
                continue;
            };
            let cands: Vec<usize> = ctx.candidates[pos].iter().map(|r| r.0).collect();
            if restrict {
                space.domains[i] = cands.clone();
            }
            space.hints[i] = cands;
        }
        space
    }

    /// (start, finish) of each slot, tasks on one resource serialized in slot
    /// order. Padding yields `None`.
    pub fn timeline(&self, genes: &[usize]) -> Vec<Option<(f64, f64)>> {
        let mut rt = self.ready_time.clone();
        self.slots
            .iter()
            .zip(genes)
            .map(|(slot, &r)| {
                let c = slot.as_ref()?;
                let st = self.start.max(rt[r]).max(c.arrival[r]);
                let ft = st + c.exec[r];
                rt[r] = ft;
                Some((st, ft))
            })
            .collect()
    }

    /// Predicted batch makespan plus infeasibility penalties. Lower is better;
    /// an all-padding chromosome scores 0.
    pub fn evaluate(&self, genes: &[usize]) -> f64 {
        debug_assert_eq!(genes.len(), self.slots.len());
        let mut rt = self.ready_time.clone();
        let mut makespan = 0.0f64;
        let mut penalty = 0.0;
        for (slot, &r) in self.slots.iter().zip(genes) {
            let Some(c) = slot else { continue };
            let st = self.start.max(rt[r]).max(c.arrival[r]);
            let ft = st + c.exec[r];
            rt[r] = ft;
            makespan = makespan.max(ft);
            if !c.feasible[r] {
                penalty += self.penalty;
            }
        }
        makespan + penalty
    }

    /// Earliest-finish-time assignment in slot order over each slot's domain.
    pub fn greedy_genes(&self, space: &GeneSpace) -> Vec<usize> {
        let mut rt = self.ready_time.clone();
        let mut genes = Vec::with_capacity(self.slots.len());
        for (slot, domain) in self.slots.iter().zip(&space.domains) {
            let Some(c) = slot else {
                genes.push(domain[0]);
                continue;
            };
            let finish = |r: usize| {
                let ft = self.start.max(rt[r]).max(c.arrival[r]) + c.exec[r];
                if c.feasible[r] { ft } else { ft + self.penalty }
            };
            let best = domain
                .iter()
                .copied()
                .min_by(|&a, &b| finish(a).total_cmp(&finish(b)).then(a.cmp(&b)))
                .expect("gene domains are never empty");
            rt[best] = self.start.max(rt[best]).max(c.arrival[best]) + c.exec[best];
            genes.push(best);
        }
        genes
    }

    /// Minimum over the whole gene space by enumeration. Only sensible for
    /// tiny spaces; ties go to the lexicographically smallest genes.
    pub fn exhaustive_minimum(&self, space: &GeneSpace) -> (Vec<usize>, f64) {
        let mut idx = vec![0usize; space.domains.len()];
        let mut best: Option<(Vec<usize>, f64)> = None;
        loop {
            let genes: Vec<usize> = idx.iter().zip(&space.domains).map(|(&i, d)| d[i]).collect();
            let f = self.evaluate(&genes);
            let better = match &best {
                None => true,
                Some((bg, bf)) => f < *bf || (f == *bf && genes < *bg),
            };
            if better {
                best = Some((genes, f));
            }
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return best.expect("at least one chromosome");
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < space.domains[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// Fitness of `chrom` for `batch` against the live scheduler state.
pub fn fitness(chrom: &Chromosome, batch: &Batch, ctx: &AssignerContext<'_>) -> f64 {
    BatchModel::new(batch, ctx, ctx.now, &ctx.snapshot.ready_time).evaluate(&chrom.genes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cost(task: usize, arrival: Vec<f64>, exec: Vec<f64>) -> Option<SlotCost> {
        let feasible = vec![true; exec.len()];
        Some(SlotCost {
            task: TaskId(task),
            arrival,
            exec,
            feasible,
        })
    }

    #[test]
    fn single_task_waits_for_resource() {
        let m = BatchModel {
            start: 0.0,
            ready_time: vec![3.0],
            slots: vec![cost(0, vec![0.0], vec![2.0])],
            penalty: 100.0,
        };
        assert_eq!(m.evaluate(&[0]), 5.0);
    }

    #[test]
    fn same_resource_serializes_in_slot_order() {
        let m = BatchModel {
            start: 1.0,
            ready_time: vec![0.0, 0.0],
            slots: vec![cost(0, vec![0.0, 0.0], vec![2.0, 4.0]), cost(1, vec![0.0, 2.0], vec![3.0, 3.0])],
            penalty: 100.0,
        };
        assert_eq!(m.evaluate(&[0, 0]), 6.0);
        assert_eq!(m.evaluate(&[0, 1]), 5.0);
        assert_eq!(m.timeline(&[0, 0]), vec![Some((1.0, 3.0)), Some((3.0, 6.0))]);
        let space = GeneSpace::full(&m);
        assert_eq!(m.exhaustive_minimum(&space), (vec![0, 1], 5.0));
        assert_eq!(m.greedy_genes(&space), vec![0, 1]);
    }

    #[test]
    fn padding_is_neutral_and_infeasible_is_penalized() {
        let mut m = BatchModel {
            start: 0.0,
            ready_time: vec![0.0, 0.0],
            slots: vec![None, None],
            penalty: 50.0,
        };
        assert_eq!(m.evaluate(&[0, 0]), 0.0);
        m.slots.push(cost(0, vec![0.0, 0.0], vec![1.0, 1.0]));
        m.slots[2].as_mut().unwrap().feasible[1] = false;
        assert_eq!(m.evaluate(&[0, 0, 0]), 1.0);
        assert_eq!(m.evaluate(&[0, 0, 1]), 51.0);
        assert_eq!(GeneSpace::full(&m).domains, vec![vec![0], vec![0], vec![0, 1]]);
    }
}

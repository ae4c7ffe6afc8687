use std::fmt;

use serde::Serialize;

use crate::platform::{GridPlatform, ResourceId};
use crate::taskgraph::{TaskGraph, TaskId};

use super::Schedule;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleIssue {
    Missing(TaskId),
    Duplicate(TaskId),
    UnknownTask(TaskId),
    UnknownResource { task: TaskId, resource: ResourceId },
    NegativeStart { task: TaskId, st: f64 },
    WrongDuration { task: TaskId, expected: f64, actual: f64 },
    Precedence { src: TaskId, dst: TaskId, earliest: f64, st: f64 },
    Overlap { resource: ResourceId, first: TaskId, second: TaskId },
    Makespan { recorded: f64, actual: f64 },
}

impl fmt::Display for ScheduleIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleIssue::*;
        match self {
            Missing(t) => write!(f, "task {t} is not scheduled"),
            Duplicate(t) => write!(f, "task {t} is scheduled more than once"),
            UnknownTask(t) => write!(f, "unknown task {t}"),
            UnknownResource { task, resource } => {
                write!(f, "task {task} placed on unknown resource {resource}")
            }
            NegativeStart { task, st } => write!(f, "task {task} starts at {st} < 0"),
            WrongDuration {
                task,
                expected,
                actual,
            } => write!(f, "task {task} runs for {actual}, expected {expected}"),
            Precedence {
                src,
                dst,
                earliest,
                st,
            } => write!(
                f,
                "task {dst} starts at {st} before data from {src} arrives at {earliest}"
            ),
            Overlap {
                resource,
                first,
                second,
            } => write!(f, "tasks {first} and {second} overlap on {resource}"),
            Makespan { recorded, actual } => {
                write!(f, "makespan recorded as {recorded}, actual {actual}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleReport {
    pub issues: Vec<ScheduleIssue>,
}

impl ScheduleReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ScheduleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks completeness, durations, precedence including transfer times,
/// resource exclusivity and the recorded makespan.
pub fn verify_schedule(schedule: &Schedule, graph: &TaskGraph, platform: &GridPlatform) -> ScheduleReport {
    let n = graph.nodes.len();
    let mut issues = Vec::new();
    let scale = schedule.makespan.abs().max(1.0);
    let tol = 1e-9 * scale;

    let mut slot = vec![None; n];
    for p in &schedule.placements {
        if p.task.0 >= n {
            issues.push(ScheduleIssue::UnknownTask(p.task));
            continue;
        }
        if slot[p.task.0].is_some() {
            issues.push(ScheduleIssue::Duplicate(p.task));
            continue;
        }
        slot[p.task.0] = Some(*p);
        if p.resource.0 >= platform.len() {
            issues.push(ScheduleIssue::UnknownResource {
                task: p.task,
                resource: p.resource,
            });
            continue;
        }
        if p.st < 0.0 {
            issues.push(ScheduleIssue::NegativeStart {
                task: p.task,
                st: p.st,
            });
        }
        let expected = platform.exec_time(graph.node(p.task), p.resource);
        if ((p.ft - p.st) - expected).abs() > tol {
            issues.push(ScheduleIssue::WrongDuration {
                task: p.task,
                expected,
                actual: p.ft - p.st,
            });
        }
    }
    for (i, s) in slot.iter().enumerate() {
        if s.is_none() {
            issues.push(ScheduleIssue::Missing(TaskId(i)));
        }
    }

    for e in &graph.edges {
        let (Some(Some(u)), Some(Some(v))) = (slot.get(e.src.0), slot.get(e.dst.0)) else {
            continue;
        };
        if u.resource.0 >= platform.len() || v.resource.0 >= platform.len() {
            continue;
        }
        let earliest = u.ft + platform.comm_time(e.data_size, u.resource, v.resource);
        if v.st + tol < earliest {
            issues.push(ScheduleIssue::Precedence {
                src: e.src,
                dst: e.dst,
                earliest,
                st: v.st,
            });
        }
    }

    let mut by_resource: Vec<Vec<(f64, f64, TaskId)>> = vec![Vec::new(); platform.len()];
    for p in slot.iter().flatten() {
        if p.resource.0 < platform.len() {
            by_resource[p.resource.0].push((p.st, p.ft, p.task));
        }
    }
    for (r, mut spans) in by_resource.into_iter().enumerate() {
        spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in spans.windows(2) {
            if w[1].0 + tol < w[0].1 {
                issues.push(ScheduleIssue::Overlap {
                    resource: ResourceId(r),
                    first: w[0].2,
                    second: w[1].2,
                });
            }
        }
    }

    let actual = schedule.placements.iter().map(|p| p.ft).fold(0.0, f64::max);
    if (actual - schedule.makespan).abs() > tol {
        issues.push(ScheduleIssue::Makespan {
            recorded: schedule.makespan,
            actual,
        });
    }
    ScheduleReport { issues }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadBalance {
    /// Fraction of the makespan each resource spends executing.
    pub busy: Vec<f64>,
    /// max busy - min busy.
    pub imbalance: f64,
}

pub fn load_balance_report(schedule: &Schedule, platform: &GridPlatform) -> LoadBalance {
    let mut work = vec![0.0; platform.len()];
    for p in &schedule.placements {
        if let Some(w) = work.get_mut(p.resource.0) {
            *w += p.ft - p.st;
        }
    }
    let busy: Vec<f64> = if schedule.makespan > 0.0 {
        work.iter().map(|w| w / schedule.makespan).collect()
    } else {
        vec![0.0; work.len()]
    };
    let max = busy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = busy.iter().copied().fold(f64::INFINITY, f64::min);
    let imbalance = if busy.is_empty() { 0.0 } else { max - min };
    LoadBalance { busy, imbalance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scheduler::Placement;
    use crate::taskgraph::{DepEdge, TaskNode};

    fn pl(task: usize, resource: usize, st: f64, ft: f64) -> Placement {
        Placement {
            task: TaskId(task),
            resource: ResourceId(resource),
            st,
            ft,
        }
    }

    fn pair() -> TaskGraph {
        TaskGraph::new(
            vec![TaskNode::new(0, 2.0), TaskNode::new(1, 3.0)],
            vec![DepEdge::new(0, 1, 4.0)],
        )
    }

    #[test]
    fn accepts_valid() {
        let s = Schedule::from_placements(vec![pl(0, 0, 0.0, 2.0), pl(1, 1, 6.0, 9.0)]);
        assert!(verify_schedule(&s, &pair(), &fixtures::unit_platform(2)).is_ok());
    }

    #[test]
    fn flags_early_start_after_transfer() {
        let s = Schedule::from_placements(vec![pl(0, 0, 0.0, 2.0), pl(1, 1, 5.0, 8.0)]);
        let r = verify_schedule(&s, &pair(), &fixtures::unit_platform(2));
        assert!(matches!(r.issues[..], [ScheduleIssue::Precedence { .. }]), "{r}");
    }

    #[test]
    fn flags_overlap() {
        let g = TaskGraph::new(vec![TaskNode::new(0, 2.0), TaskNode::new(1, 3.0)], vec![]);
        let s = Schedule::from_placements(vec![pl(0, 0, 0.0, 2.0), pl(1, 0, 1.0, 4.0)]);
        let r = verify_schedule(&s, &g, &fixtures::unit_platform(2));
        assert!(matches!(r.issues[..], [ScheduleIssue::Overlap { .. }]), "{r}");
    }

    #[test]
    fn flags_missing_duplicate_duration_and_makespan() {
        let g = pair();
        let p = fixtures::unit_platform(2);
        let mut s = Schedule::from_placements(vec![pl(0, 0, 0.0, 2.0), pl(0, 0, 2.0, 4.0)]);
        s.makespan = 1.0;
        let r = verify_schedule(&s, &g, &p);
        assert!(r.issues.contains(&ScheduleIssue::Missing(TaskId(1))));
        assert!(r.issues.contains(&ScheduleIssue::Duplicate(TaskId(0))));
        assert!(r.issues.iter().any(|i| matches!(i, ScheduleIssue::Makespan { .. })));
        let s = Schedule::from_placements(vec![pl(0, 0, 0.0, 1.0), pl(1, 5, 6.0, 9.0)]);
        let r = verify_schedule(&s, &g, &p);
        assert!(r.issues.iter().any(|i| matches!(i, ScheduleIssue::WrongDuration { .. })));
        assert!(r.issues.iter().any(|i| matches!(i, ScheduleIssue::UnknownResource { .. })));
    }

    #[test]
    fn load_balance_cases() {
        let p = fixtures::three_unit_platform();
        let one = Schedule::from_placements(vec![pl(0, 0, 0.0, 2.0), pl(1, 0, 2.0, 5.0)]);
        let lb = load_balance_report(&one, &p);
        assert_eq!(lb.busy, vec![1.0, 0.0, 0.0]);
        assert_eq!(lb.imbalance, 1.0);
        let even = Schedule::from_placements((0..3).map(|i| pl(i, i, 0.0, 5.0)).collect());
        assert_eq!(load_balance_report(&even, &p).imbalance, 0.0);
    }
}

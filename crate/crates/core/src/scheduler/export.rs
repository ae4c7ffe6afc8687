use std::fmt::Write as _;
use std::path::Path;

use crate::platform::GridPlatform;
use crate::taskgraph::{GraphError, TaskGraph};

use super::{Schedule, SchedulerEvent};

pub fn save_schedule(schedule: &Schedule, path: &Path) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(schedule).expect("schedule serializes");
    std::fs::write(path, text + "\n")
}

pub fn load_schedule(path: &Path) -> Result<Schedule, GraphError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| GraphError::Parse(e.to_string()))
}

/// One line per resource: `R0: 1@[0,2) 3@[2,5)`, segments in time order.
pub fn gantt_rows(schedule: &Schedule, graph: &TaskGraph, platform: &GridPlatform) -> String {
    let mut out = String::new();
    for r in platform.resource_ids() {
        let mut segs: Vec<_> = schedule
            .placements
            .iter()
            .filter(|p| p.resource == r)
            .collect();
        segs.sort_by(|a, b| a.st.total_cmp(&b.st).then(a.task.cmp(&b.task)));
        let _ = write!(out, "{r}:");
        for p in segs {
            let label = graph
                .nodes
                .get(p.task.0)
                .map(|n| n.label())
                .unwrap_or_else(|| p.task.to_string());
            let _ = write!(out, " {label}@[{},{})", p.st, p.ft);
        }
        out.push('\n');
    }
    out
}

/// `(time, kind, task, resource)`, with `-` when no resource applies.
pub fn trace_line(event: &SchedulerEvent, graph: &TaskGraph) -> String {
    let task = graph
        .nodes
        .get(event.task.0)
        .map(|n| n.label())
        .unwrap_or_else(|| event.task.to_string());
    let resource = event
        .resource
        .map(|r| r.to_string())
        .unwrap_or_else(|| "-".to_string());
    format!("({}, {}, {}, {})", event.time, event.kind.as_str(), task, resource)
}

pub fn format_trace(events: &[SchedulerEvent], graph: &TaskGraph) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&trace_line(e, graph));
        out.push('\n');
    }
    out
}

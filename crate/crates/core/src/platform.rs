//! Grid resources, network links and the simulated monitoring snapshot.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taskgraph::{TaskGraph, TaskId, TaskNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceId(pub usize);

impl ResourceId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    /// Million instructions per second.
    pub mips: f64,
    #[serde(default)]
    pub mem: f64,
    #[serde(default)]
    pub disk: f64,
    #[serde(default)]
    pub cluster: usize,
}

impl Resource {
    pub fn new(id: usize, mips: f64, cluster: usize) -> Self {
        Self {
            id: ResourceId(id),
            mips,
            mem: 0.0,
            disk: 0.0,
            cluster,
        }
    }

    pub fn with_capacity(mut self, mem: f64, disk: f64) -> Self {
        self.mem = mem;
        self.disk = disk;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLink {
    #[serde(default)]
    pub src_cluster: usize,
    #[serde(default)]
    pub dst_cluster: usize,
    /// Data units per second.
    pub bandwidth: f64,
    #[serde(default)]
    pub latency: f64,
}

impl NetLink {
    pub fn new(src_cluster: usize, dst_cluster: usize, bandwidth: f64, latency: f64) -> Self {
        Self {
            src_cluster,
            dst_cluster,
            bandwidth,
            latency,
        }
    }

    /// Bandwidth 1, latency 0: transfer time equals data size.
    pub fn unit() -> Self {
        Self::new(0, 0, 1.0, 0.0)
    }

    pub fn transfer_time(&self, data_size: f64) -> f64 {
        data_size / self.bandwidth + self.latency
    }

    fn connects(&self, a: usize, b: usize) -> bool {
        (self.src_cluster == a && self.dst_cluster == b)
            || (self.src_cluster == b && self.dst_cluster == a)
    }
}

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error("invalid platform: {0}")]
    Invalid(String),
    #[error("task {0} is already placed")]
    AlreadyPlaced(TaskId),
    #[error("task {task}: finish {ft} precedes start {st} or start is negative")]
    BadInterval { task: TaskId, st: f64, ft: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Resources plus the links between their clusters. Links are undirected;
/// cluster pairs without an explicit link use `default_link`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPlatform {
    pub resources: Vec<Resource>,
    #[serde(default)]
    pub links: Vec<NetLink>,
    pub default_link: NetLink,
}

impl GridPlatform {
    pub fn new(resources: Vec<Resource>, links: Vec<NetLink>, default_link: NetLink) -> Self {
        Self {
            resources,
            links,
            default_link,
        }
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn resource(&self, id: ResourceId) -> &Resource {
        &self.resources[id.0]
    }

    pub fn resource_ids(&self) -> impl Iterator<Item = ResourceId> + '_ {
        (0..self.resources.len()).map(ResourceId)
    }

    pub fn validate(&self) -> Result<(), PlatformError> {
        let invalid = |msg: String| Err(PlatformError::Invalid(msg));
        if self.resources.is_empty() {
            return invalid("no resources".into());
        }
        for (i, r) in self.resources.iter().enumerate() {
            if r.id.0 != i {
                return invalid(format!("resource at position {i} has id {}", r.id.0));
            }
            if !(r.mips > 0.0 && r.mips.is_finite()) {
                return invalid(format!("{}: mips must be positive", r.id));
            }
            if !(r.mem >= 0.0 && r.disk >= 0.0) {
                return invalid(format!("{}: negative capacity", r.id));
            }
        }
        for l in self.links.iter().chain(std::iter::once(&self.default_link)) {
            if !(l.bandwidth > 0.0 && l.latency >= 0.0 && l.latency.is_finite()) {
                return invalid(format!(
                    "link {}-{}: bandwidth must be positive and latency non-negative",
                    l.src_cluster, l.dst_cluster
                ));
            }
        }
        for (i, a) in self.links.iter().enumerate() {
            if self.links[i + 1..]
                .iter()
                .any(|b| b.connects(a.src_cluster, a.dst_cluster))
            {
                return invalid(format!(
                    "clusters {} and {} have more than one link",
                    a.src_cluster, a.dst_cluster
                ));
            }
        }
        Ok(())
    }

    /// The link used between two clusters (a cluster's self-link covers
    /// transfers between its own resources).
    pub fn link(&self, a: usize, b: usize) -> &NetLink {
        self.links
            .iter()
            .find(|l| l.connects(a, b))
            .unwrap_or(&self.default_link)
    }

    /// Transfer time of `data_size` between two resources; zero when they
    /// are the same resource.
    pub fn comm_time(&self, data_size: f64, from: ResourceId, to: ResourceId) -> f64 {
        if from == to {
            return 0.0;
        }
        let (a, b) = (self.resource(from), self.resource(to));
        self.link(a.cluster, b.cluster).transfer_time(data_size)
    }

    pub fn exec_time(&self, task: &TaskNode, resource: ResourceId) -> f64 {
        exec_time(task, self.resource(resource))
    }

    /// Node and edge weights for level computation: mean execution time over
    /// all resources and mean transfer time over all ordered pairs of
    /// distinct resources.
    pub fn level_weights(&self, graph: &TaskGraph) -> (Vec<f64>, Vec<f64>) {
        let r = self.resources.len() as f64;
        let costs = graph
            .nodes
            .iter()
            .map(|n| self.resources.iter().map(|res| exec_time(n, res)).sum::<f64>() / r)
            .collect();
        let mut inv_bw = 0.0;
        let mut latency = 0.0;
        let mut pairs = 0usize;
        for a in &self.resources {
            for b in &self.resources {
                if a.id != b.id {
                    let l = self.link(a.cluster, b.cluster);
                    inv_bw += 1.0 / l.bandwidth;
                    latency += l.latency;
                    pairs += 1;
                }
            }
        }
        let tau = if pairs == 0 {
            vec![0.0; graph.edges.len()]
        } else {
            let (inv_bw, latency) = (inv_bw / pairs as f64, latency / pairs as f64);
            graph
                .edges
                .iter()
                .map(|e| e.data_size * inv_bw + latency)
                .collect()
        };
        (costs, tau)
    }
}

/// `work / mips` when the task carries a work amount, else its abstract cost.
pub fn exec_time(task: &TaskNode, resource: &Resource) -> f64 {
    match task.work {
        Some(work) => work / resource.mips,
        None => task.cost,
    }
}

/// Whether the task's memory and disk requirements fit in what is left on
/// the resource. The bound is inclusive.
pub fn fits(task: &TaskNode, resource: &Resource, snapshot: &MonitorSnapshot) -> bool {
    let r = resource.id.0;
    task.mem_req <= resource.mem - snapshot.committed_mem[r]
        && task.disk_req <= resource.disk - snapshot.committed_disk[r]
}

pub fn load_platform(path: &Path) -> Result<GridPlatform, PlatformError> {
    let text = std::fs::read_to_string(path)?;
    let platform: GridPlatform =
        serde_json::from_str(&text).map_err(|e| PlatformError::Parse(e.to_string()))?;
    platform.validate()?;
    Ok(platform)
}

pub fn save_platform(platform: &GridPlatform, path: &Path) -> Result<(), PlatformError> {
    let text = serde_json::to_string_pretty(platform).expect("platform serializes");
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Where and when a task runs, as seen by the monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub resource: ResourceId,
    pub st: f64,
    pub ft: f64,
    pub finished: bool,
    mem: f64,
    disk: f64,
}

/// Simulated monitoring view of the grid: when each resource becomes free,
/// what is committed on it, and where tasks were placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSnapshot {
    pub ready_time: Vec<f64>,
    pub committed_mem: Vec<f64>,
    pub committed_disk: Vec<f64>,
    placements: Vec<Option<TaskRecord>>,
    /// Reporting delay of the monitor. Always 0 in simulation.
    pub staleness: f64,
}

impl MonitorSnapshot {
    pub fn new(n_resources: usize, n_tasks: usize) -> Self {
        Self {
            ready_time: vec![0.0; n_resources],
            committed_mem: vec![0.0; n_resources],
            committed_disk: vec![0.0; n_resources],
            placements: vec![None; n_tasks],
            staleness: 0.0,
        }
    }

    pub fn for_run(platform: &GridPlatform, graph: &TaskGraph) -> Self {
        Self::new(platform.len(), graph.len())
    }

    pub fn placement(&self, task: TaskId) -> Option<&TaskRecord> {
        self.placements[task.0].as_ref()
    }

    pub fn is_finished(&self, task: TaskId) -> bool {
        self.placements[task.0].is_some_and(|p| p.finished)
    }

    pub fn placed_count(&self) -> usize {
        self.placements.iter().filter(|p| p.is_some()).count()
    }

    /// Records `task` on `resource` over `[st, ft)` and commits its
    /// requirements until [`MonitorSnapshot::complete`] is called.
    pub fn update_resources(
        &mut self,
        task: &TaskNode,
        resource: ResourceId,
        st: f64,
        ft: f64,
    ) -> Result<(), PlatformError> {
        if !(st >= 0.0 && ft >= st) {
            return Err(PlatformError::BadInterval {
                task: task.id,
                st,
                ft,
            });
        }
        let slot = &mut self.placements[task.id.0];
        if slot.is_some() {
            return Err(PlatformError::AlreadyPlaced(task.id));
        }
        *slot = Some(TaskRecord {
            resource,
            st,
            ft,
            finished: false,
            mem: task.mem_req,
            disk: task.disk_req,
        });
        let r = resource.0;
        self.ready_time[r] = self.ready_time[r].max(ft);
        self.committed_mem[r] += task.mem_req;
        self.committed_disk[r] += task.disk_req;
        Ok(())
    }

    /// Marks a placed task finished and releases its commitments.
    pub fn complete(&mut self, task: TaskId) {
        if let Some(p) = self.placements[task.0].as_mut() {
            if !p.finished {
                p.finished = true;
                let r = p.resource.0;
                self.committed_mem[r] = (self.committed_mem[r] - p.mem).max(0.0);
                self.committed_disk[r] = (self.committed_disk[r] - p.disk).max(0.0);
            }
        }
    }

    pub fn max_ready_time(&self) -> f64 {
        self.ready_time.iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgraph::TaskNode;

    fn two_cluster() -> GridPlatform {
        GridPlatform::new(
            vec![
                Resource::new(0, 50.0, 0),
                Resource::new(1, 100.0, 0),
                Resource::new(2, 100.0, 1),
            ],
            vec![NetLink::new(0, 1, 50.0, 0.5), NetLink::new(0, 0, 1000.0, 0.0)],
            NetLink::new(0, 0, 10.0, 1.0),
        )
    }

    #[test]
    fn comm_time_cases() {
        let p = two_cluster();
        assert_eq!(p.comm_time(123.0, ResourceId(1), ResourceId(1)), 0.0);
        assert_eq!(p.comm_time(100.0, ResourceId(0), ResourceId(2)), 2.5);
        assert_eq!(p.comm_time(100.0, ResourceId(2), ResourceId(0)), 2.5);
        // Self-link of cluster 0.
        assert_eq!(p.comm_time(100.0, ResourceId(0), ResourceId(1)), 0.1);
        let unit = crate::fixtures::unit_platform(2);
        assert_eq!(unit.comm_time(6.0, ResourceId(0), ResourceId(1)), 6.0);
    }

    #[test]
    fn missing_pair_uses_default_link() {
        let mut p = two_cluster();
        p.resources.push(Resource::new(3, 1.0, 2));
        assert_eq!(p.comm_time(10.0, ResourceId(0), ResourceId(3)), 2.0);
    }

    #[test]
    fn exec_time_modes() {
        let r = Resource::new(0, 50.0, 0);
        assert_eq!(exec_time(&TaskNode::new(0, 1.0).with_work(100.0), &r), 2.0);
        assert_eq!(exec_time(&TaskNode::new(0, 6.0), &r), 6.0);
    }

    #[test]
    fn fits_is_inclusive() {
        let r = Resource::new(0, 1.0, 0).with_capacity(8.0, 0.0);
        let mut snap = MonitorSnapshot::new(1, 3);
        assert!(fits(&TaskNode::new(0, 1.0), &r, &snap));
        let t = TaskNode::new(1, 1.0).with_requirements(4.0, 0.0);
        snap.committed_mem[0] = 5.0;
        assert!(!fits(&t, &r, &snap));
        snap.committed_mem[0] = 4.0;
        assert!(fits(&t, &r, &snap));
    }

    #[test]
    fn update_resources_is_monotone_and_rejects_replacement() {
        let mut snap = MonitorSnapshot::new(1, 3);
        snap.update_resources(&TaskNode::new(0, 5.0), ResourceId(0), 0.0, 5.0)
            .unwrap();
        assert_eq!(snap.ready_time[0], 5.0);
        snap.update_resources(&TaskNode::new(1, 2.0), ResourceId(0), 5.0, 7.0)
            .unwrap();
        assert_eq!(snap.ready_time[0], 7.0);
        snap.update_resources(&TaskNode::new(2, 0.0), ResourceId(0), 1.0, 1.0)
            .unwrap();
        assert_eq!(snap.ready_time[0], 7.0);
        assert!(matches!(
            snap.update_resources(&TaskNode::new(0, 5.0), ResourceId(0), 7.0, 12.0),
            Err(PlatformError::AlreadyPlaced(TaskId(0)))
        ));
        let mut fresh = MonitorSnapshot::new(1, 1);
        assert!(fresh
            .update_resources(&TaskNode::new(0, 1.0), ResourceId(0), 3.0, 2.0)
            .is_err());
    }

    #[test]
    fn commitments_released_on_completion() {
        let r = Resource::new(0, 1.0, 0).with_capacity(8.0, 8.0);
        let t = TaskNode::new(0, 1.0).with_requirements(6.0, 1.0);
        let mut snap = MonitorSnapshot::new(1, 2);
        snap.update_resources(&t, r.id, 0.0, 1.0).unwrap();
        let other = TaskNode::new(1, 1.0).with_requirements(4.0, 0.0);
        assert!(!fits(&other, &r, &snap));
        assert!(!snap.is_finished(t.id));
        snap.complete(t.id);
        assert!(snap.is_finished(t.id));
        assert!(fits(&other, &r, &snap));
        assert_eq!(snap.committed_disk[0], 0.0);
    }

    #[test]
    fn validation() {
        assert!(two_cluster().validate().is_ok());
        let mut p = two_cluster();
        p.resources[1].mips = 0.0;
        assert!(p.validate().is_err());
        let mut p = two_cluster();
        p.links.push(NetLink::new(1, 0, 5.0, 0.0));
        assert!(p.validate().is_err());
        let mut p = two_cluster();
        p.default_link.bandwidth = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn level_weights_on_unit_platform_are_identity() {
        let g = crate::fixtures::nine_task_graph();
        let (costs, tau) = crate::fixtures::three_unit_platform().level_weights(&g);
        let want: Vec<f64> = g.nodes.iter().map(|n| n.cost).collect();
        assert_eq!(costs, want);
        assert_eq!(tau, g.unit_tau());
    }
}

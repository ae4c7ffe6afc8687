//! DAG scheduling on simulated grids.
//!
//! * [`taskgraph`]: task graphs, validation, level analysis, generators, I/O.
//! * [`platform`]: resources, network links and the monitoring snapshot.
//! * [`scheduler`]: static list scheduling, the CCF dynamic scheduler,
//!   an exhaustive oracle and schedule verification.
//! * [`ga`]: the island-model genetic assigner for CCF.

pub mod fixtures;
pub mod ga;
pub mod platform;
pub mod scheduler;
pub mod taskgraph;

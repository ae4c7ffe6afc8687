use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::taskgraph::TaskId;

use super::batch::Batch;
use super::fitness::BatchModel;
use super::island::GaResult;

/// One GA run. Each line of a history file is self-contained: replaying
/// `model.evaluate(&genes)` reproduces `fitness`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Simulated time of the run.
    pub timestamp: f64,
    /// Slot contents, `null` for padding.
    pub batch: Vec<Option<TaskId>>,
    pub genes: Vec<usize>,
    pub fitness: f64,
    pub model: BatchModel,
}

impl HistoryEntry {
    pub fn new(timestamp: f64, batch: &Batch, result: &GaResult, model: BatchModel) -> Self {
        Self {
            timestamp,
            batch: batch.slots.iter().map(|s| s.task()).collect(),
            genes: result.best.genes.clone(),
            fitness: result.best.fitness,
            model,
        }
    }
}

/// Appends `entry` as one JSON line. Batches without real tasks are skipped.
pub fn append_history(entry: &HistoryEntry, path: &Path) -> std::io::Result<()> {
    if entry.batch.iter().all(Option::is_none) {
        return Ok(());
    }
    let line = serde_json::to_string(entry).map_err(std::io::Error::other)?;
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "{line}")
}

pub fn read_history(path: &Path) -> std::io::Result<Vec<HistoryEntry>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(std::io::Error::other)?);
    }
    Ok(out)
}

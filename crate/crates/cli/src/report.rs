use std::fmt;

use serde::Serialize;

/// Improvement of CCF-GA over the static baseline quoted next to the
/// achieved value in comparison output.
pub const REFERENCE_IMPROVEMENT_PCT: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub task: String,
    pub tlevel: f64,
    pub blevel: f64,
    pub alap: f64,
    pub priority: f64,
    pub critical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub rows: Vec<LevelRow>,
    pub critical_path: f64,
    pub critical_tasks: Vec<String>,
    /// `None` for graphs without edges.
    pub ccr: Option<f64>,
}

impl fmt::Display for AnalyzeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>10} {:>10} {:>10} {:>10}  critical",
            "task", "tlevel", "blevel", "alap", "priority"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>10} {:>10} {:>10} {:>10}  {}",
                r.task,
                r.tlevel,
                r.blevel,
                r.alap,
                r.priority,
                if r.critical { "*" } else { "" }
            )?;
        }
        writeln!(
            f,
            "critical path: {} ({})",
            self.critical_path,
            self.critical_tasks.join(", ")
        )?;
        match self.ccr {
            Some(c) => writeln!(f, "ccr: {c}"),
            None => writeln!(f, "ccr: n/a (no edges)"),
        }
    }
}

/// One CSV row of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub graph: String,
    pub strategy: String,
    pub seed: u64,
    pub makespan: f64,
    pub improvement_pct: f64,
    pub imbalance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphInfo {
    pub name: String,
    pub tasks: usize,
    pub ccr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub runs: usize,
    pub mean_makespan: f64,
    /// Mean of the per-run improvements.
    pub mean_improvement_pct: f64,
    /// Same, restricted to graphs with CCR >= 1.
    pub mean_improvement_high_ccr_pct: Option<f64>,
    pub mean_imbalance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub graphs: Vec<GraphInfo>,
    pub rows: Vec<ComparisonRow>,
}

/// `(static - other) / static * 100`, or 0 for an empty baseline.
pub fn improvement_pct(static_makespan: f64, other: f64) -> f64 {
    if static_makespan > 0.0 {
        (static_makespan - other) / static_makespan * 100.0
    } else {
        0.0
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl ComparisonReport {
    /// Strategies in order of first appearance.
    pub fn strategies(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.strategy) {
                out.push(r.strategy.clone());
            }
        }
        out
    }

    pub fn graph(&self, name: &str) -> Option<&GraphInfo> {
        self.graphs.iter().find(|g| g.name == name)
    }

    pub fn summary(&self) -> Vec<StrategySummary> {
        self.strategies()
            .into_iter()
            .map(|s| {
                let rows: Vec<&ComparisonRow> = self.rows.iter().filter(|r| r.strategy == s).collect();
                let high_ccr = rows
                    .iter()
                    .filter(|r| self.graph(&r.graph).and_then(|g| g.ccr).is_some_and(|c| c >= 1.0))
                    .map(|r| r.improvement_pct);
                StrategySummary {
                    runs: rows.len(),
                    mean_makespan: mean(rows.iter().map(|r| r.makespan)).unwrap_or(0.0),
                    mean_improvement_pct: mean(rows.iter().map(|r| r.improvement_pct)).unwrap_or(0.0),
                    mean_improvement_high_ccr_pct: mean(high_ccr),
                    mean_imbalance: mean(rows.iter().map(|r| r.imbalance)).unwrap_or(0.0),
                    strategy: s,
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<24} {:<12} {:>6} {:>12} {:>14} {:>10}",
            "graph", "strategy", "seed", "makespan", "improvement%", "imbalance"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<24} {:<12} {:>6} {:>12.4} {:>14.2} {:>10.3}",
                r.graph, r.strategy, r.seed, r.makespan, r.improvement_pct, r.imbalance
            )?;
        }
        writeln!(f)?;
        for s in self.summary() {
            write!(
                f,
                "{}: mean makespan {:.4}, mean improvement {:.2}%",
                s.strategy, s.mean_makespan, s.mean_improvement_pct
            )?;
            if let Some(h) = s.mean_improvement_high_ccr_pct {
                write!(f, " ({h:.2}% on CCR >= 1)")?;
            }
            writeln!(f, ", mean imbalance {:.3}", s.mean_imbalance)?;
        }
        writeln!(
            f,
            "reference improvement over static: {REFERENCE_IMPROVEMENT_PCT}%"
        )
    }
}

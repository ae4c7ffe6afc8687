//! Commands behind the `gridsched` binary: level analysis, scheduling runs,
//! strategy comparisons and corpus generation.

mod config;
mod report;

use std::path::{Path, PathBuf};

use gridsched::ga::{GaAssigner, GaConfig};
use gridsched::platform::{load_platform, GridPlatform, PlatformError};
use gridsched::scheduler::{
    format_trace, gantt_rows, levels_for, load_balance_report, load_schedule, run_ccf,
    save_schedule, static_list_schedule, verify_schedule, GreedyAssigner, SchedError, Schedule,
    SchedulerEvent,
};
use gridsched::taskgraph::{
    ccr, compute_levels, critical_path, generate_layered, load_graph, save_graph, GraphError,
    LayeredParams, TaskGraph,
};
use serde::Serialize;
use thiserror::Error;

pub use config::{resolve_output_dir, ExperimentConfig, Strategy, OUTPUT_ENV};
pub use report::{
    improvement_pct, AnalyzeReport, ComparisonReport, ComparisonRow, GraphInfo, LevelRow,
    StrategySummary, REFERENCE_IMPROVEMENT_PCT,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("scheduling failed: {0}")]
    Scheduling(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Scheduling(_) => 3,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PlatformError> for CliError {
    fn from(e: PlatformError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SchedError> for CliError {
    fn from(e: SchedError) -> Self {
        match e {
            SchedError::Graph(g) => g.into(),
            SchedError::Platform(PlatformError::Invalid(msg)) => CliError::Validation(msg),
            other => CliError::Scheduling(other.to_string()),
        }
    }
}

fn read_graph(path: &Path) -> Result<TaskGraph, CliError> {
    let g = load_graph(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    g.ensure_valid()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(g)
}

fn read_platform(path: &Path) -> Result<GridPlatform, CliError> {
    load_platform(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn graph_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into())
}

/// Level table of a graph file using its abstract costs and data sizes.
pub fn cmd_analyze(path: &Path) -> Result<AnalyzeReport, CliError> {
    let graph = read_graph(path)?;
    analyze_graph(&graph)
}

pub fn analyze_graph(graph: &TaskGraph) -> Result<AnalyzeReport, CliError> {
    let tau = graph.unit_tau();
    let levels = compute_levels(graph, &tau)?;
    let cp = critical_path(&levels);
    let rows = graph
        .task_ids()
        .map(|t| {
            let l = levels.get(t);
            LevelRow {
                task: graph.node(t).label(),
                tlevel: l.tlevel,
                blevel: l.blevel,
                alap: l.alap,
                priority: l.priority,
                critical: cp.tasks.contains(&t),
            }
        })
        .collect();
    Ok(AnalyzeReport {
        rows,
        critical_path: cp.length,
        critical_tasks: cp.tasks.iter().map(|&t| graph.node(t).label()).collect(),
        ccr: ccr(graph, &tau).ok(),
    })
}

/// Outcome of one strategy on one graph.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub schedule: Schedule,
    /// Event trace; empty for the static strategy.
    pub trace: Vec<SchedulerEvent>,
}

/// Runs `strategy` and rejects any schedule that fails verification.
pub fn run_strategy(
    strategy: Strategy,
    graph: &TaskGraph,
    platform: &GridPlatform,
    ga: &GaConfig,
    seed: u64,
    history: Option<&Path>,
) -> Result<RunOutput, CliError> {
    let levels = levels_for(graph, platform)?;
    let out = match strategy {
        Strategy::Static => RunOutput {
            schedule: static_list_schedule(graph, platform, &levels)?,
            trace: Vec::new(),
        },
        Strategy::CcfGreedy => {
            let o = run_ccf(graph, platform, &levels, &mut GreedyAssigner)?;
            RunOutput {
                schedule: o.schedule,
                trace: o.trace,
            }
        }
        Strategy::CcfGa => {
            let mut assigner = GaAssigner::new(GaConfig {
                seed,
                ..ga.clone()
            })?;
            if let Some(h) = history {
                assigner = assigner.with_history(h);
            }
            let o = run_ccf(graph, platform, &levels, &mut assigner)?;
            RunOutput {
                schedule: o.schedule,
                trace: o.trace,
            }
        }
    };
    let report = verify_schedule(&out.schedule, graph, platform);
    if !report.is_ok() {
        return Err(CliError::Scheduling(format!("{strategy} produced an invalid schedule: {report}")));
    }
    Ok(out)
}

/// Files written for one scheduling run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub graph: String,
    pub strategy: String,
    pub seed: u64,
    pub repetition: usize,
    pub makespan: f64,
    pub schedule: PathBuf,
    pub gantt: PathBuf,
    pub trace: PathBuf,
    pub verify: PathBuf,
    pub history: Option<PathBuf>,
}

/// Runs the configured strategy for every graph, seed and repetition and
/// writes schedule, Gantt rows, event trace and verification report.
pub fn cmd_schedule(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<RunRecord>, CliError> {
    let strategy = cfg.schedule_strategy()?;
    let platform = read_platform(&cfg.platform)?;
    std::fs::create_dir_all(out_dir)?;
    let mut records = Vec::new();
    for path in cfg.graph_files()? {
        let graph = read_graph(&path)?;
        let name = graph_name(&path);
        for seed in cfg.seed_list() {
            for rep in 0..cfg.repetitions {
                let stem = out_dir.join(format!("{name}.{strategy}.s{seed}.r{rep}"));
                let file = |suffix: &str| PathBuf::from(format!("{}.{suffix}", stem.display()));
                let history = (cfg.history && strategy == Strategy::CcfGa).then(|| file("history.jsonl"));
                if let Some(h) = &history {
                    if h.exists() {
                        std::fs::remove_file(h)?;
                    }
                }
                let run = run_strategy(strategy, &graph, &platform, &cfg.ga, seed, history.as_deref())?;

                let record = RunRecord {
                    graph: name.clone(),
                    strategy: strategy.to_string(),
                    seed,
                    repetition: rep,
                    makespan: run.schedule.makespan,
                    schedule: file("schedule.json"),
                    gantt: file("gantt.txt"),
                    trace: file("trace.txt"),
                    verify: file("verify.txt"),
                    history,
                };
                save_schedule(&run.schedule, &record.schedule)?;
                std::fs::write(&record.gantt, gantt_rows(&run.schedule, &graph, &platform))?;
                std::fs::write(&record.trace, format_trace(&run.trace, &graph))?;

                // Round-trip gate: the file on disk must verify, not just the
                // in-memory schedule.
                let reloaded = load_schedule(&record.schedule)?;
                let report = verify_schedule(&reloaded, &graph, &platform);
                std::fs::write(&record.verify, format!("{report}\n"))?;
                if !report.is_ok() {
                    return Err(CliError::Scheduling(format!(
                        "{} does not verify: {report}",
                        record.schedule.display()
                    )));
                }
                records.push(record);
            }
        }
    }
    Ok(records)
}

/// Runs every strategy on every graph and seed and reports makespans and
/// improvements over the static baseline. Writes `comparison.csv` and
/// `comparison.txt` when `out_dir` is given.
pub fn cmd_compare(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ComparisonReport, CliError> {
    let strategies = cfg.compare_strategies()?;
    let platform = read_platform(&cfg.platform)?;
    let mut graphs = Vec::new();
    let mut rows = Vec::new();
    for path in cfg.graph_files()? {
        let graph = read_graph(&path)?;
        let name = graph_name(&path);
        graphs.push(GraphInfo {
            name: name.clone(),
            tasks: graph.len(),
            ccr: ccr(&graph, &graph.unit_tau()).ok(),
        });
        for seed in cfg.seed_list() {
            let baseline = run_strategy(Strategy::Static, &graph, &platform, &cfg.ga, seed, None)?;
            for &strategy in &strategies {
                let run = if strategy == Strategy::Static {
                    baseline.clone()
                } else {
                    run_strategy(strategy, &graph, &platform, &cfg.ga, seed, None)?
                };
                rows.push(ComparisonRow {
                    graph: name.clone(),
                    strategy: strategy.to_string(),
                    seed,
                    makespan: run.schedule.makespan,
                    improvement_pct: improvement_pct(baseline.schedule.makespan, run.schedule.makespan),
                    imbalance: load_balance_report(&run.schedule, &platform).imbalance,
                });
            }
        }
    }
    let report = ComparisonReport { graphs, rows };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let csv = report
            .to_csv()
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        std::fs::write(dir.join("comparison.csv"), csv)?;
        std::fs::write(dir.join("comparison.txt"), report.to_string())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedGraph {
    pub file: String,
    pub seed: u64,
    pub tasks: usize,
    pub edges: usize,
    pub ccr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateManifest {
    pub params: LayeredParams,
    pub count: usize,
    pub graphs: Vec<GeneratedGraph>,
}

/// Writes `count` graphs `{prefix}-NNN.json` with seeds `params.seed + i`,
/// plus `manifest.json`.
pub fn cmd_generate(
    params: &LayeredParams,
    count: usize,
    prefix: &str,
    out_dir: &Path,
) -> Result<GenerateManifest, CliError> {
    if count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut graphs = Vec::with_capacity(count);
    for i in 0..count {
        let seed = params.seed.wrapping_add(i as u64);
        let graph = generate_layered(&LayeredParams {
            seed,
            ..params.clone()
        })?;
        let file = format!("{prefix}-{i:03}.json");
        save_graph(&graph, &out_dir.join(&file))?;
        graphs.push(GeneratedGraph {
            file,
            seed,
            tasks: graph.len(),
            edges: graph.edges.len(),
            ccr: ccr(&graph, &graph.unit_tau()).ok(),
        });
    }
    let manifest = GenerateManifest {
        params: params.clone(),
        count,
        graphs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out_dir.join("manifest.json"), text + "\n")?;
    Ok(manifest)
}

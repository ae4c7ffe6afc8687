use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridsched::taskgraph::LayeredParams;
use gridsched_cli::{
    cmd_analyze, cmd_compare, cmd_generate, cmd_schedule, resolve_output_dir, CliError,
    ExperimentConfig,
};

/// DAG scheduling experiments on simulated grids.
#[derive(Debug, Parser)]
#[command(name = "gridsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print tlevel, blevel, ALAP and priority of every task.
    Analyze {
        graph: PathBuf,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run one strategy and write schedule, Gantt rows, trace and verify report.
    Schedule {
        #[arg(short, long)]
        config: PathBuf,
        /// Output directory (defaults to the config value, then $GRIDSCHED_OUT).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare strategies against the static baseline.
    Compare {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate random layered DAGs and a manifest.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 25)]
    tasks: usize,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1.0, 10.0])]
    cost: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], default_values_t = [1.0, 10.0])]
    data: Vec<f64>,
    /// Rescale data sizes to reach this communication-to-computation ratio.
    #[arg(long)]
    ccr: Option<f64>,
    /// Also set `work = cost * scale` on every task.
    #[arg(long)]
    work_scale: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value = "layered")]
    prefix: String,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { graph, json } => {
            let report = cmd_analyze(&graph)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{report}");
            }
        }
        Command::Schedule { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cfg.output_dir(out.as_deref());
            for r in cmd_schedule(&cfg, &dir)? {
                println!(
                    "{} {} seed {} rep {}: makespan {} -> {}",
                    r.graph,
                    r.strategy,
                    r.seed,
                    r.repetition,
                    r.makespan,
                    r.schedule.display()
                );
            }
        }
        Command::Compare { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cfg.output_dir(out.as_deref());
            let report = cmd_compare(&cfg, Some(&dir))?;
            print!("{report}");
            println!("wrote {}", dir.join("comparison.csv").display());
        }
        Command::Generate(a) => {
            let params = LayeredParams {
                n_tasks: a.tasks,
                n_layers: a.layers,
                edge_density: a.density,
                cost_range: (a.cost[0], a.cost[1]),
                data_range: (a.data[0], a.data[1]),
                target_ccr: a.ccr,
                work_scale: a.work_scale,
                seed: a.seed,
            };
            let dir = resolve_output_dir(a.out.as_deref(), None);
            let manifest = cmd_generate(&params, a.count, &a.prefix, &dir)?;
            for g in &manifest.graphs {
                let ccr = g.ccr.map_or("n/a".to_string(), |c| format!("{c:.4}"));
                println!("{} seed {} tasks {} edges {} ccr {ccr}", g.file, g.seed, g.tasks, g.edges);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

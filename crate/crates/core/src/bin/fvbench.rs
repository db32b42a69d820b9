//! `fvbench synth|qaoa|hitting`: run the paired SA/FV benchmarks and the
//! hitting-time study, writing CSV/JSON results to an output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible ansatz rule,
//! 4 I/O error, 1 anything else.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use fvopt::bench::{
    hitting_time_study, prepare_functions, run_paired, summarize, write_csv, write_event_logs, write_plot_data,
    write_summary, BenchError, ExperimentSpec, HittingSpec, Instance, ObjectiveSpec,
};
use fvopt::landscape::write_landscape;
use fvopt::qaoa::write_graph;

#[derive(Parser)]
#[command(name = "fvbench", version, about = "Fleming-Viot vs simulated annealing benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Paired runs on synthesized barren-plateau landscapes.
    Synth(SynthArgs),
    /// Paired runs on QAOA Max-Cut.
    Qaoa(QaoaArgs),
    /// Hitting-time scaling study over barren fraction and plateau count.
    Hitting(HittingArgs),
}

#[derive(Args)]
struct Common {
    /// JSON experiment spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "fvbench-out")]
    out_dir: PathBuf,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    exploration_rate: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    particles: Option<usize>,
    /// Optimization steps per particle after burn-in.
    #[arg(long)]
    steps: Option<usize>,
    /// Also write plot_data.json with raw per-replication errors.
    #[arg(long)]
    emit_plot_data: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    functions: Option<usize>,
    /// Replay a stored landscape file.
    #[arg(long)]
    landscape_in: Option<PathBuf>,
    /// Directory receiving one landscape file per function.
    #[arg(long)]
    landscape_out: Option<PathBuf>,
}

#[derive(Args)]
struct QaoaArgs {
    #[command(flatten)]
    common: Common,
    /// Shots per circuit estimate (0 for exact expectations).
    #[arg(long)]
    shots: Option<u32>,
    #[arg(long)]
    graph_in: Option<PathBuf>,
    /// Write the (first) graph to this file.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(long)]
    graph_seed: Option<u64>,
}

#[derive(Args)]
struct HittingArgs {
    /// JSON hitting-study spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "fvbench-out")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    exploration_rate: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    particles: Option<usize>,
}

enum Failure {
    Config(String),
    Bench(BenchError),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Failure::Bench(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Bench(e) => match e {
                BenchError::Config(_) | BenchError::Fv(_) | BenchError::Landscape(_) => 2,
                BenchError::AnsatzInfeasible(_) => 3,
                BenchError::Io { .. } | BenchError::LandscapeFile(_) | BenchError::GraphFile(_) => 4,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(msg) => write!(f, "configuration error: {msg}"),
            Failure::Bench(e) => write!(f, "{e}"),
        }
    }
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| {
        Failure::Bench(BenchError::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(|e| {
        Failure::Bench(BenchError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn apply_common(spec: &mut ExperimentSpec, c: &Common) {
    if let Some(v) = c.seed {
        spec.master_seed = v;
    }
    if let Some(v) = c.replications {
        spec.replications = v;
    }
    if let Some(v) = c.exploration_rate {
        spec.fv.exploration_rate = v;
    }
    if let Some(v) = c.alpha {
        spec.fv.alpha = v;
    }
    if let Some(v) = c.particles {
        spec.fv.particles = v;
    }
    if let Some(v) = c.steps {
        spec.fv.steps = v;
    }
}

fn run_experiment(spec: &ExperimentSpec, common: &Common, landscape_out: Option<&Path>, graph_out: Option<&Path>) -> Result<(), Failure> {
    spec.validate()?;
    let functions = prepare_functions(spec)?;
    let out = &common.out_dir;
    create_dir(out)?;
    if let Some(dir) = landscape_out {
        create_dir(dir)?;
        for f in &functions {
            if let Instance::Synthetic(l) = &f.instance {
                let path = dir.join(format!("function_{}.json", f.id));
                write_landscape(&path, l).map_err(BenchError::from)?;
            }
        }
    }
    if let (Some(path), Some(f)) = (graph_out, functions.first()) {
        if let Instance::Qaoa { problem, .. } = &f.instance {
            write_graph(path, problem.graph()).map_err(BenchError::from)?;
        }
    }
    let runs = run_paired(spec, &functions)?;
    let records: Vec<_> = runs.iter().map(|r| r.record.clone()).collect();
    let summary = summarize(&records, &functions);
    write_json(&out.join("spec.json"), spec)?;
    write_csv(&out.join("records.csv"), &records)?;
    write_summary(&out.join("summary.json"), &summary)?;
    write_event_logs(&out.join("events"), &runs)?;
    if common.emit_plot_data {
        write_plot_data(&out.join("plot_data.json"), &runs, &summary)?;
    }
    println!("function  advantage  median_err_SA  median_err_FV");
    for s in &summary.functions {
        println!("{:>8}  {:>9.4}  {:>13.4}  {:>13.4}", s.function_id, s.advantage, s.sa.median, s.fv.median);
    }
    println!(
        "mean advantage {:.4}; positive on {}/{} functions; results in {}",
        summary.mean_advantage,
        summary.positive_advantage_count,
        summary.functions.len(),
        out.display()
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let mut spec = match &args.common.config {
        Some(path) => load_config(path)?,
        None => ExperimentSpec::synthetic(),
    };
    apply_common(&mut spec, &args.common);
    let ObjectiveSpec::Synthetic(s) = &mut spec.objective else {
        return Err(Failure::Config("`synth` needs a synthetic objective in the config".into()));
    };
    if let Some(v) = args.functions {
        s.functions = v;
    }
    if let Some(p) = args.landscape_in {
        s.landscape_in = Some(p);
    }
    run_experiment(&spec, &args.common, args.landscape_out.as_deref(), None)
}

fn qaoa(args: QaoaArgs) -> Result<(), Failure> {
    let mut spec = match &args.common.config {
        Some(path) => load_config(path)?,
        None => ExperimentSpec::qaoa(),
    };
    apply_common(&mut spec, &args.common);
    let ObjectiveSpec::Qaoa(q) = &mut spec.objective else {
        return Err(Failure::Config("`qaoa` needs a QAOA objective in the config".into()));
    };
    if let Some(v) = args.shots {
        q.shots = v;
    }
    if let Some(v) = args.graph_seed {
        q.graph_seed = v;
    }
    if let Some(p) = args.graph_in {
        q.graph_in = Some(p);
    }
    run_experiment(&spec, &args.common, None, args.graph_out.as_deref())
}

fn hitting(args: HittingArgs) -> Result<(), Failure> {
    let mut spec: HittingSpec = match &args.config {
        Some(path) => load_config(path)?,
        None => HittingSpec::default(),
    };
    if let Some(v) = args.seed {
        spec.master_seed = v;
    }
    if let Some(v) = args.trials {
        spec.trials = v;
    }
    if let Some(v) = args.exploration_rate {
        spec.fv.exploration_rate = v;
    }
    if let Some(v) = args.alpha {
        spec.fv.alpha = v;
    }
    if let Some(v) = args.particles {
        spec.fv.particles = v;
    }
    let report = hitting_time_study(&spec)?;
    create_dir(&args.out_dir)?;
    write_json(&args.out_dir.join("hitting_spec.json"), &spec)?;
    write_json(&args.out_dir.join("hitting.json"), &report)?;
    println!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Qaoa(a) => qaoa(a),
        Command::Hitting(a) => hitting(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fvbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

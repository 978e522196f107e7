//! Command-line front end: bench / ablate / stats / tune-demo.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 partial
//! experiment failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use snakeopt::harness::{
    run_ablation, run_experiment, AlgorithmSpec, BudgetMode, ExperimentSpec,
};
use snakeopt::stats::{sign_summary, wilcoxon_rank_sum};
use snakeopt::tunedemo::{tune, TuneAlgorithm};

#[derive(Debug, Parser)]
#[command(name = "snakeopt", version, about = "Snake-optimizer benchmark harness")]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an algorithm x benchmark-function grid and export reports.
    Bench(BenchArgs),
    /// Run the six-rung strategy-ablation ladder.
    Ablate(AblateArgs),
    /// Recompute rank-sum tests and sign counts from bench outputs.
    Stats(StatsArgs),
    /// Tune surrogate hyperparameters with a chosen optimizer.
    TuneDemo(TuneArgs),
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Benchmark suite name (only `cec-like` is available).
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated algorithm list (so, so-vanilla, pso, de, ga, gwo, woa).
    #[arg(long)]
    algos: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count (0 = library default); falls back to
    /// SNAKEOPT_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    /// Use each rival's reference population size instead of --pop.
    #[arg(long)]
    reference_pops: bool,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Directory holding a previous bench export (reads boxplot.csv).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Reference algorithm the others are compared against.
    #[arg(long = "ref")]
    reference: Option<String>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    /// Tuning algorithm (so, so-vanilla, pso, de, ga, gwo, woa, random).
    #[arg(long)]
    algo: Option<String>,
    /// Objective-evaluation budget (>= 20).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional values accepted from a JSON config file. Flags win.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    suite: Option<String>,
    dim: Option<usize>,
    pop: Option<usize>,
    iters: Option<usize>,
    trials: Option<usize>,
    algos: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    reference_pops: Option<bool>,
    input: Option<PathBuf>,
    reference: Option<String>,
    algo: Option<String>,
    budget: Option<u64>,
}

#[derive(Debug)]
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 1,
        }
    }

    fn partial(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

fn env_workers() -> Option<usize> {
    std::env::var("SNAKEOPT_WORKERS").ok()?.parse().ok()
}

fn write_snapshot(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).expect("snapshot json"))
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_bench(args: &BenchArgs, file: &FileConfig) -> Result<(), CliError> {
    let suite = args
        .suite
        .clone()
        .or_else(|| file.suite.clone())
        .unwrap_or_else(|| "cec-like".to_string());
    if suite != "cec-like" {
        return Err(CliError::usage(format!("unknown suite: {suite}")));
    }
    let algos_text = args
        .algos
        .clone()
        .or_else(|| file.algos.clone())
        .unwrap_or_else(|| "so,so-vanilla,pso,de,ga,gwo,woa".to_string());
    let algorithms: Vec<AlgorithmSpec> = algos_text
        .split(',')
        .map(|n| AlgorithmSpec::parse(n.trim()).map_err(|e| CliError::usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let reference = algorithms[0].name().to_string();
    let spec = ExperimentSpec {
        algorithms,
        function_slots: (0..10).collect(),
        dim: args.dim.or(file.dim).unwrap_or(10),
        pop_size: args.pop.or(file.pop).unwrap_or(30),
        max_iter: args.iters.or(file.iters).unwrap_or(500),
        trials: args.trials.or(file.trials).unwrap_or(20),
        master_seed: args.seed.or(file.seed).unwrap_or(1),
        budget_mode: if args.reference_pops || file.reference_pops.unwrap_or(false) {
            BudgetMode::ReferencePop
        } else {
            BudgetMode::UniformPop
        },
    };
    let workers = args.workers.or(file.workers).or_else(env_workers).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::usage("--out is required"))?;

    write_snapshot(
        &out,
        "resolved_config.json",
        &serde_json::json!({"command": "bench", "suite": suite, "spec": spec, "workers": workers}),
    )?;
    let report = run_experiment(&spec, workers).map_err(|e| CliError::usage(e.to_string()))?;
    report
        .export(&out, &reference)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let failed = report.failed_cells();
    if failed > 0 {
        return Err(CliError::partial(format!(
            "{failed} of {} cells failed; partial results in {}",
            report.cells.len(),
            out.display()
        )));
    }
    println!(
        "bench complete: {} cells -> {}",
        report.cells.len(),
        out.display()
    );
    Ok(())
}

fn cmd_ablate(args: &AblateArgs, file: &FileConfig) -> Result<(), CliError> {
    let spec = ExperimentSpec {
        algorithms: vec![],
        function_slots: (0..10).collect(),
        dim: args.dim.or(file.dim).unwrap_or(10),
        pop_size: args.pop.or(file.pop).unwrap_or(30),
        max_iter: args.iters.or(file.iters).unwrap_or(500),
        trials: args.trials.or(file.trials).unwrap_or(20),
        master_seed: args.seed.or(file.seed).unwrap_or(1),
        budget_mode: BudgetMode::UniformPop,
    };
    let workers = args.workers.or(file.workers).or_else(env_workers).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::usage("--out is required"))?;

    write_snapshot(
        &out,
        "resolved_config.json",
        &serde_json::json!({"command": "ablate", "spec": spec, "workers": workers}),
    )?;
    let report = run_ablation(&spec, workers).map_err(|e| CliError::usage(e.to_string()))?;
    report.export(&out).map_err(|e| CliError::usage(e.to_string()))?;
    let failed = report.base.failed_cells();
    if failed > 0 {
        return Err(CliError::partial(format!(
            "{failed} ablation cells failed; partial results in {}",
            out.display()
        )));
    }
    println!("ablation complete: 6 rungs -> {}", out.display());
    Ok(())
}

fn cmd_stats(args: &StatsArgs, file: &FileConfig) -> Result<(), CliError> {
    let input = args
        .input
        .clone()
        .or_else(|| file.input.clone())
        .ok_or_else(|| CliError::usage("--in is required"))?;
    let reference = args
        .reference
        .clone()
        .or_else(|| file.reference.clone())
        .ok_or_else(|| CliError::usage("--ref is required"))?;

    let path = input.join("boxplot.csv");
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    // (algorithm, function) -> per-trial final values, in file order
    let mut samples: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut algorithms: Vec<String> = Vec::new();
    let mut functions: Vec<String> = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::usage(format!("malformed row in {}", path.display())));
        }
        let (algo, func) = (fields[0].to_string(), fields[1].to_string());
        let value: f64 = fields[3]
            .parse()
            .map_err(|e| CliError::usage(format!("bad value in {}: {e}", path.display())))?;
        if !algorithms.contains(&algo) {
            algorithms.push(algo.clone());
        }
        if !functions.contains(&func) {
            functions.push(func.clone());
        }
        samples.entry((algo, func)).or_default().push(value);
    }
    if !algorithms.contains(&reference) {
        return Err(CliError::usage(format!(
            "reference algorithm {reference} not present in {}",
            path.display()
        )));
    }

    // compare the reference against every other algorithm; a single-algo
    // report degenerates to a self-comparison
    let rivals: Vec<String> = if algorithms.len() == 1 {
        algorithms.clone()
    } else {
        algorithms.iter().filter(|a| **a != reference).cloned().collect()
    };

    let mut wilcoxon = String::from("reference,rival,function,p,verdict\n");
    let mut signs = String::from("rival,plus,equal,minus\n");
    for rival in &rivals {
        let mut verdicts = Vec::new();
        for func in &functions {
            let x = &samples[&(reference.clone(), func.clone())];
            let y = samples
                .get(&(rival.clone(), func.clone()))
                .ok_or_else(|| CliError::usage(format!("missing sample for {rival} on {func}")))?;
            let r = wilcoxon_rank_sum(x, y);
            wilcoxon.push_str(&format!(
                "{reference},{rival},{func},{:.17e},{}\n",
                r.p_value,
                r.verdict.symbol()
            ));
            verdicts.push(r.verdict);
        }
        let (p, e, m) = sign_summary(&verdicts);
        signs.push_str(&format!("{rival},{p},{e},{m}\n"));
    }
    fs::write(input.join("wilcoxon.csv"), wilcoxon)
        .map_err(|e| CliError::usage(format!("cannot write wilcoxon.csv: {e}")))?;
    fs::write(input.join("signs.csv"), signs)
        .map_err(|e| CliError::usage(format!("cannot write signs.csv: {e}")))?;
    write_snapshot(
        &input,
        "resolved_stats_config.json",
        &serde_json::json!({"command": "stats", "in": input, "ref": reference}),
    )?;
    println!(
        "stats complete: {} rivals x {} functions -> {}",
        rivals.len(),
        functions.len(),
        input.display()
    );
    Ok(())
}

fn cmd_tune_demo(args: &TuneArgs, file: &FileConfig) -> Result<(), CliError> {
    let algo_name = args
        .algo
        .clone()
        .or_else(|| file.algo.clone())
        .unwrap_or_else(|| "so".to_string());
    let algorithm = TuneAlgorithm::parse(&algo_name)
        .ok_or_else(|| CliError::usage(format!("unknown algorithm name: {algo_name}")))?;
    let budget = args.budget.or(file.budget).unwrap_or(300);
    if budget < 20 {
        return Err(CliError::usage("--budget must be at least 20"));
    }
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let out = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::usage("--out is required"))?;

    write_snapshot(
        &out,
        "resolved_config.json",
        &serde_json::json!({"command": "tune-demo", "algo": algorithm.name(), "budget": budget, "seed": seed}),
    )?;
    let result = tune(algorithm, budget, seed);

    let trace_name = "trace.csv";
    let mut trace = String::from("iter,best_loss\n");
    for (i, v) in result.trace.iter().enumerate() {
        trace.push_str(&format!("{i},{v:.17e}\n"));
    }
    fs::write(out.join(trace_name), trace)
        .map_err(|e| CliError::usage(format!("cannot write trace.csv: {e}")))?;

    let json = serde_json::json!({
        "algorithm": result.algorithm,
        "best": {
            "nodes": result.best.nodes,
            "batch": result.best.batch,
            "lr": result.best.lr(),
        },
        "loss": result.loss,
        "stabilizing_iterations": result.stabilizing,
        "trace_csv_path": trace_name,
    });
    fs::write(
        out.join("result.json"),
        serde_json::to_string_pretty(&json).expect("result json"),
    )
    .map_err(|e| CliError::usage(format!("cannot write result.json: {e}")))?;
    println!(
        "tune-demo complete: {} loss {:.6e} -> {}",
        result.algorithm,
        result.loss,
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = || -> Result<(), CliError> {
        let file = load_config(cli.config.as_deref())?;
        match &cli.command {
            Command::Bench(args) => cmd_bench(args, &file),
            Command::Ablate(args) => cmd_ablate(args, &file),
            Command::Stats(args) => cmd_stats(args, &file),
            Command::TuneDemo(args) => cmd_tune_demo(args, &file),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

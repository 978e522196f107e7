//! Experiment orchestration: algorithm x function x trial grids, the
//! ablation ladder, and CSV/JSON result export.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchfns::{make_suite, suite_manifest, SuiteError, TestFunction};
use crate::core::{derive_seed, RngStream, RunResult};
use crate::rivals::{run_rival, RivalConfig, RivalKind};
use crate::snake::{run_snake, SnakeConfig, StrategyToggles};
use crate::stats::{describe, rank_algorithms, sign_summary, wilcoxon_rank_sum, Describe, TrialSample, WilcoxonResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unknown algorithm name: {0}")]
    UnknownAlgorithm(String),
    #[error("empty algorithm list")]
    NoAlgorithms,
    #[error("missing cell for {algorithm} on {function}")]
    MissingCell { algorithm: String, function: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One entry of the experiment's algorithm list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlgorithmSpec {
    Snake {
        name: String,
        toggles: StrategyToggles,
    },
    Rival(RivalKind),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &str {
        match self {
            AlgorithmSpec::Snake { name, .. } => name,
            AlgorithmSpec::Rival(kind) => kind.name(),
        }
    }

    /// Identity used for RNG substream derivation. Snake variants are
    /// keyed by their toggle set, not their display name, so two rungs
    /// with identical toggles consume identical randomness.
    fn seed_id(&self) -> String {
        match self {
            AlgorithmSpec::Snake { toggles, .. } => format!(
                "so:{}{}{}{}",
                toggles.gps_init as u8,
                toggles.adaptive_params as u8,
                toggles.dual_mutation as u8,
                toggles.flight as u8
            ),
            AlgorithmSpec::Rival(kind) => kind.name().to_string(),
        }
    }

    /// Parse a CLI-facing algorithm name: `so` (full strategies),
    /// `so-vanilla`, or a rival name.
    pub fn parse(name: &str) -> Result<Self, HarnessError> {
        match name {
            "so" | "so-full" => Ok(AlgorithmSpec::Snake {
                name: "so-full".to_string(),
                toggles: StrategyToggles::all(),
            }),
            "so-vanilla" => Ok(AlgorithmSpec::Snake {
                name: "so-vanilla".to_string(),
                toggles: StrategyToggles::default(),
            }),
            "pso" => Ok(AlgorithmSpec::Rival(RivalKind::Pso)),
            "de" => Ok(AlgorithmSpec::Rival(RivalKind::De)),
            "ga" => Ok(AlgorithmSpec::Rival(RivalKind::Ga)),
            "gwo" => Ok(AlgorithmSpec::Rival(RivalKind::Gwo)),
            "woa" => Ok(AlgorithmSpec::Rival(RivalKind::Woa)),
            other => Err(HarnessError::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Whether rivals use the uniform population size or their reference
/// per-algorithm defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    UniformPop,
    ReferencePop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub algorithms: Vec<AlgorithmSpec>,
    /// Suite slots (0-based) to run; defaults to all ten.
    pub function_slots: Vec<usize>,
    pub dim: usize,
    pub pop_size: usize,
    pub max_iter: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub budget_mode: BudgetMode,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            algorithms: vec![],
            function_slots: (0..10).collect(),
            dim: 10,
            pop_size: 30,
            max_iter: 500,
            trials: 20,
            master_seed: 1,
            budget_mode: BudgetMode::UniformPop,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub algorithm: String,
    pub function: String,
    pub slot: usize,
    pub trial: usize,
    pub seed: u64,
    pub wall_ms: f64,
    pub outcome: Result<RunResult, String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub cells: Vec<CellResult>,
}

fn run_cell(
    spec: &ExperimentSpec,
    suite: &[TestFunction],
    algo_idx: usize,
    slot: usize,
    trial: usize,
) -> CellResult {
    let algo = &spec.algorithms[algo_idx];
    let func = suite.iter().find(|f| f.slot == slot).expect("slot exists");
    let space = func.space();
    let seed = derive_seed(
        spec.master_seed,
        &[trial as u64, hash_name(&algo.seed_id()), slot as u64],
    );
    let mut rng = RngStream::new(seed);
    let start = Instant::now();
    let outcome = match algo {
        AlgorithmSpec::Snake { toggles, .. } => {
            let cfg = SnakeConfig {
                pop_size: spec.pop_size,
                max_iter: spec.max_iter,
                toggles: *toggles,
                ..SnakeConfig::default()
            };
            run_snake(func, &space, &cfg, &mut rng).map_err(|e| e.to_string())
        }
        AlgorithmSpec::Rival(kind) => {
            let pop = match spec.budget_mode {
                BudgetMode::UniformPop => spec.pop_size,
                BudgetMode::ReferencePop => kind.default_pop_size(),
            };
            let config = RivalConfig::new(*kind, pop, spec.max_iter);
            run_rival(func, &space, &config, &mut rng).map_err(|e| e.to_string())
        }
    };
    CellResult {
        algorithm: algo.name().to_string(),
        function: func.name.clone(),
        slot,
        trial,
        seed,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        outcome,
    }
}

fn hash_name(name: &str) -> u64 {
    let mut acc: u64 = 0xcbf29ce484222325;
    for b in name.bytes() {
        acc ^= b as u64;
        acc = acc.wrapping_mul(0x100000001b3);
    }
    acc
}

fn cell_indices(spec: &ExperimentSpec) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for algo_idx in 0..spec.algorithms.len() {
        for &slot in &spec.function_slots {
            for trial in 0..spec.trials {
                out.push((algo_idx, slot, trial));
            }
        }
    }
    out
}

/// Run every grid cell sequentially.
pub fn run_cells_sequential(
    spec: &ExperimentSpec,
    suite: &[TestFunction],
) -> Vec<CellResult> {
    cell_indices(spec)
        .iter()
        .map(|&(a, s, t)| run_cell(spec, suite, a, s, t))
        .collect()
}

/// Run every grid cell on the rayon pool. Cell order (and therefore the
/// report) is identical to the sequential path.
#[cfg(feature = "parallel")]
pub fn run_cells_parallel(spec: &ExperimentSpec, suite: &[TestFunction]) -> Vec<CellResult> {
    use rayon::prelude::*;
    cell_indices(spec)
        .par_iter()
        .map(|&(a, s, t)| run_cell(spec, suite, a, s, t))
        .collect()
}

/// Run the full grid. Uses the parallel path when compiled with the
/// `parallel` feature; `workers` caps the pool (0 = rayon default).
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentReport, HarnessError> {
    if spec.algorithms.is_empty() {
        return Err(HarnessError::NoAlgorithms);
    }
    let suite = make_suite(spec.dim)?;
    #[cfg(feature = "parallel")]
    let cells = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| run_cells_parallel(spec, &suite))
    } else {
        run_cells_parallel(spec, &suite)
    };
    #[cfg(not(feature = "parallel"))]
    let cells = {
        let _ = workers;
        run_cells_sequential(spec, &suite)
    };
    Ok(ExperimentReport {
        spec: spec.clone(),
        cells,
    })
}

impl ExperimentReport {
    /// Final best-fitness values of one algorithm on one slot, in trial
    /// order; failed cells are skipped.
    pub fn trial_sample(&self, algorithm: &str, slot: usize) -> TrialSample {
        let mut values = Vec::new();
        let mut function = String::new();
        for c in &self.cells {
            if c.algorithm == algorithm && c.slot == slot {
                function = c.function.clone();
                if let Ok(r) = &c.outcome {
                    values.push(r.best_fitness);
                }
            }
        }
        TrialSample {
            algorithm: algorithm.to_string(),
            function,
            values,
        }
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    /// Per-(algorithm, slot) descriptive stats plus competition rank of
    /// each algorithm within each slot.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for &slot in &self.spec.function_slots {
            let samples: Vec<(String, Describe)> = self
                .spec
                .algorithms
                .iter()
                .filter_map(|a| {
                    let s = self.trial_sample(a.name(), slot);
                    describe(&s.values).ok().map(|d| (a.name().to_string(), d))
                })
                .collect();
            let means: Vec<f64> = samples.iter().map(|(_, d)| d.mean).collect();
            let ranks = rank_algorithms(&means);
            for ((name, d), rank) in samples.into_iter().zip(ranks) {
                rows.push(SummaryRow {
                    algorithm: name,
                    slot,
                    stats: d,
                    rank,
                });
            }
        }
        rows
    }

    /// Wilcoxon comparisons of `reference` against every other algorithm
    /// per function slot.
    pub fn wilcoxon_vs(&self, reference: &str) -> Vec<WilcoxonRow> {
        let mut rows = Vec::new();
        for algo in &self.spec.algorithms {
            if algo.name() == reference {
                continue;
            }
            for &slot in &self.spec.function_slots {
                let x = self.trial_sample(reference, slot);
                let y = self.trial_sample(algo.name(), slot);
                if x.values.is_empty() || y.values.is_empty() {
                    continue;
                }
                rows.push(WilcoxonRow {
                    reference: reference.to_string(),
                    rival: algo.name().to_string(),
                    slot,
                    result: wilcoxon_rank_sum(&x.values, &y.values),
                });
            }
        }
        rows
    }

    /// (+, =, -) counts per rival, as seen from the reference.
    pub fn signs_vs(&self, reference: &str) -> Vec<(String, (usize, usize, usize))> {
        let rows = self.wilcoxon_vs(reference);
        self.spec
            .algorithms
            .iter()
            .filter(|a| a.name() != reference)
            .map(|a| {
                let verdicts: Vec<_> = rows
                    .iter()
                    .filter(|r| r.rival == a.name())
                    .map(|r| r.result.verdict)
                    .collect();
                (a.name().to_string(), sign_summary(&verdicts))
            })
            .collect()
    }

    /// Write summary.csv, wilcoxon.csv, boxplot.csv, per-cell convergence
    /// CSVs, and manifest.json under `dir`.
    pub fn export(&self, dir: &Path, reference: &str) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;

        let path = dir.join("summary.csv");
        let mut out = String::from("algorithm,function,best,worst,mean,std,rank\n");
        for row in self.summary() {
            let function = self.slot_name(row.slot);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.algorithm,
                function,
                fmt_g(row.stats.best),
                fmt_g(row.stats.worst),
                fmt_g(row.stats.mean),
                fmt_g(row.stats.std),
                row.rank
            ));
        }
        fs::write(&path, out).map_err(io_err(&path))?;

        let path = dir.join("wilcoxon.csv");
        let mut out = String::from("reference,rival,function,p,verdict\n");
        for row in self.wilcoxon_vs(reference) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.reference,
                row.rival,
                self.slot_name(row.slot),
                fmt_g(row.result.p_value),
                row.result.verdict.symbol()
            ));
        }
        fs::write(&path, out).map_err(io_err(&path))?;

        let path = dir.join("boxplot.csv");
        let mut out = String::from("algorithm,function,trial,final_value\n");
        for c in &self.cells {
            if let Ok(r) = &c.outcome {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    c.algorithm,
                    c.function,
                    c.trial,
                    fmt_g(r.best_fitness)
                ));
            }
        }
        fs::write(&path, out).map_err(io_err(&path))?;

        let conv_dir = dir.join("convergence");
        fs::create_dir_all(&conv_dir).map_err(io_err(&conv_dir))?;
        for c in &self.cells {
            if let Ok(r) = &c.outcome {
                let path = conv_dir.join(format!("{}_{}_{}.csv", c.algorithm, c.function, c.trial));
                let mut file = fs::File::create(&path).map_err(io_err(&path))?;
                writeln!(file, "iter,best_so_far").map_err(io_err(&path))?;
                for (i, v) in r.history.iter().enumerate() {
                    writeln!(file, "{},{}", i, fmt_g(*v)).map_err(io_err(&path))?;
                }
            }
        }

        let suite = make_suite(self.spec.dim)?;
        let manifest = serde_json::json!({
            "spec": self.spec,
            "suite": suite_manifest(&suite),
            "cells": self.cells.iter().map(|c| serde_json::json!({
                "algorithm": c.algorithm,
                "function": c.function,
                "trial": c.trial,
                "seed": c.seed,
                "ok": c.outcome.is_ok(),
                "error": c.outcome.as_ref().err(),
                "wall_ms": c.wall_ms,
            })).collect::<Vec<_>>(),
        });
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).map_err(io_err(&path))?;
        Ok(())
    }

    fn slot_name(&self, slot: usize) -> String {
        self.cells
            .iter()
            .find(|c| c.slot == slot)
            .map(|c| c.function.clone())
            .unwrap_or_else(|| format!("F{}", slot + 1))
    }
}

/// Full-precision float formatting that survives a CSV round trip.
fn fmt_g(v: f64) -> String {
    format!("{v:.17e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub slot: usize,
    pub stats: Describe,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonRow {
    pub reference: String,
    pub rival: String,
    pub slot: usize,
    pub result: WilcoxonResult,
}

/// The six-rung ablation ladder: vanilla, then strategies enabled
/// cumulatively in order (initialization, adaptive parameters, dual
/// mutation, flight), closed by the all-strategies configuration. The
/// fifth and sixth rungs carry the same toggles; running both verifies
/// the toggle contract (they must agree bitwise under shared seeds).
pub fn ablation_ladder() -> Vec<(String, StrategyToggles)> {
    let mut t = StrategyToggles::default();
    let mut rungs = vec![("so-vanilla".to_string(), t)];
    t.gps_init = true;
    rungs.push(("so+gps".to_string(), t));
    t.adaptive_params = true;
    rungs.push(("so+gps+adaptive".to_string(), t));
    t.dual_mutation = true;
    rungs.push(("so+gps+adaptive+dual".to_string(), t));
    t.flight = true;
    rungs.push(("so+gps+adaptive+dual+flight".to_string(), t));
    rungs.push(("so-full".to_string(), StrategyToggles::all()));
    rungs
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRung {
    pub name: String,
    pub toggles: StrategyToggles,
    pub stats: Describe,
    /// Mean improvement vs the vanilla rung, percent.
    pub improvement_pct: f64,
    /// Wilcoxon p-value vs the vanilla rung (1.0 for vanilla itself).
    pub p_vs_vanilla: f64,
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub base: ExperimentReport,
    pub rungs: Vec<AblationRung>,
}

/// Run the ablation ladder under identical seeds per rung.
pub fn run_ablation(base_spec: &ExperimentSpec, workers: usize) -> Result<AblationReport, HarnessError> {
    let mut spec = base_spec.clone();
    spec.algorithms = ablation_ladder()
        .into_iter()
        .map(|(name, toggles)| AlgorithmSpec::Snake { name, toggles })
        .collect();
    let report = run_experiment(&spec, workers)?;

    let pooled = |name: &str| -> Vec<f64> {
        spec.function_slots
            .iter()
            .flat_map(|&slot| report.trial_sample(name, slot).values)
            .collect()
    };
    let vanilla_vals = pooled("so-vanilla");
    let vanilla_mean = vanilla_vals.iter().sum::<f64>() / vanilla_vals.len() as f64;
    let rungs = ablation_ladder()
        .into_iter()
        .map(|(name, toggles)| {
            let vals = pooled(&name);
            let stats = describe(&vals).expect("ablation rung sample");
            let improvement_pct = 100.0 * (vanilla_mean - stats.mean) / vanilla_mean.abs();
            let p_vs_vanilla = if name == "so-vanilla" {
                1.0
            } else {
                wilcoxon_rank_sum(&vals, &vanilla_vals).p_value
            };
            AblationRung {
                name,
                toggles,
                stats,
                improvement_pct,
                p_vs_vanilla,
            }
        })
        .collect();
    Ok(AblationReport {
        base: report,
        rungs,
    })
}

impl AblationReport {
    /// ladder.csv: rung, mean, std, improvement-vs-vanilla %.
    pub fn export(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("ladder.csv");
        let mut out = String::from("rung,mean,std,improvement_pct,p_vs_vanilla\n");
        for r in &self.rungs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.name,
                fmt_g(r.stats.mean),
                fmt_g(r.stats.std),
                fmt_g(r.improvement_pct),
                fmt_g(r.p_vs_vanilla)
            ));
        }
        fs::write(&path, out).map_err(io_err(&path))?;
        self.base.export(dir, "so-full")
    }
}

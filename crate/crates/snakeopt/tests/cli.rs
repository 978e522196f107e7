//! End-to-end tests of the `snakeopt` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_snakeopt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn snakeopt")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

fn tmp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("snakeopt-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

const SMALL: &[&str] = &["--dim", "2", "--pop", "10", "--iters", "30", "--trials", "5"];

#[test]
fn bench_exports_reports() {
    let out = tmp_dir("bench");
    let mut args = vec!["bench", "--algos", "so,pso", "--seed", "3"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let res = run(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let summary = read(&out, "summary.csv");
    // header + 2 algorithms x 10 functions
    assert_eq!(summary.lines().count(), 21);
    assert!(summary.starts_with("algorithm,function,best,worst,mean,std,rank"));

    let boxplot = read(&out, "boxplot.csv");
    assert_eq!(boxplot.lines().count(), 1 + 2 * 10 * 5);

    let wilcoxon = read(&out, "wilcoxon.csv");
    assert_eq!(wilcoxon.lines().count(), 1 + 10);

    assert!(out.join("manifest.json").exists());
    assert!(out.join("resolved_config.json").exists());
    let convergence: Vec<_> = fs::read_dir(out.join("convergence")).unwrap().collect();
    assert_eq!(convergence.len(), 2 * 10 * 5);

    // identical invocation reproduces identical reports
    let out2 = tmp_dir("bench-repeat");
    let mut args2 = args.clone();
    *args2.last_mut().unwrap() = out2.to_str().unwrap();
    assert!(run(&args2).status.success());
    assert_eq!(summary, read(&out2, "summary.csv"));
    assert_eq!(boxplot, read(&out2, "boxplot.csv"));
}

#[test]
fn bench_rejects_unknown_algorithm() {
    let out = tmp_dir("badalgo");
    let res = run(&[
        "bench",
        "--algos",
        "so,frogger",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("frogger"));
}

#[test]
fn bench_requires_out() {
    let res = run(&["bench", "--algos", "so"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("--out"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let out = tmp_dir("config");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("cfg.json");
    fs::write(
        &cfg,
        r#"{"dim": 2, "pop": 10, "iters": 30, "trials": 5, "algos": "so", "seed": 9}"#,
    )
    .unwrap();
    let res = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "bench",
        "--trials",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    // flag overrides trials=5 from the file: 1 algo x 10 fns x 3 trials
    assert_eq!(read(&out, "boxplot.csv").lines().count(), 1 + 30);
    let resolved = read(&out, "resolved_config.json");
    assert!(resolved.contains("\"trials\": 3"));
    assert!(resolved.contains("\"master_seed\": 9"));

    let bad = out.join("bad.json");
    fs::write(&bad, r#"{"dims": 2}"#).unwrap();
    let res = run(&[
        "--config",
        bad.to_str().unwrap(),
        "bench",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn ablate_exports_ladder() {
    let out = tmp_dir("ablate");
    let mut args = vec!["ablate", "--seed", "2"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let res = run(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let ladder = read(&out, "ladder.csv");
    assert_eq!(ladder.lines().count(), 7);
    let vanilla: Vec<&str> = ladder.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(vanilla[0], "so-vanilla");
    // the baseline rung improves on itself by exactly zero
    assert_eq!(vanilla[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn stats_recomputes_from_bench_output() {
    let out = tmp_dir("stats");
    let mut args = vec!["bench", "--algos", "so,so-vanilla,pso", "--seed", "4"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let original = read(&out, "wilcoxon.csv");

    let res = run(&["stats", "--in", out.to_str().unwrap(), "--ref", "so-full"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let recomputed = read(&out, "wilcoxon.csv");
    assert_eq!(recomputed.lines().count(), 1 + 2 * 10);
    assert_eq!(original, recomputed);

    let signs = read(&out, "signs.csv");
    assert_eq!(signs.lines().count(), 3);
    for line in signs.lines().skip(1) {
        let counts: Vec<usize> = line
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(counts.iter().sum::<usize>(), 10);
    }
    assert!(out.join("resolved_stats_config.json").exists());
}

#[test]
fn stats_self_comparison_is_null() {
    let out = tmp_dir("stats-self");
    let mut args = vec!["bench", "--algos", "so", "--seed", "4"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let res = run(&["stats", "--in", out.to_str().unwrap(), "--ref", "so-full"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for line in read(&out, "wilcoxon.csv").lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3].parse::<f64>().unwrap(), 1.0);
        assert_eq!(fields[4], "=");
    }
    assert_eq!(read(&out, "signs.csv").lines().nth(1).unwrap(), "so-full,0,10,0");
}

#[test]
fn stats_rejects_missing_reference() {
    let out = tmp_dir("stats-missing");
    let mut args = vec!["bench", "--algos", "so", "--seed", "4"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    assert!(run(&args).status.success());
    let res = run(&["stats", "--in", out.to_str().unwrap(), "--ref", "pso"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("pso"));
}

#[test]
fn tune_demo_writes_result_and_trace() {
    let out = tmp_dir("tune");
    let args = [
        "tune-demo",
        "--algo",
        "random",
        "--budget",
        "40",
        "--seed",
        "6",
        "--out",
        out.to_str().unwrap(),
    ];
    let res = run(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let result: serde_json::Value = serde_json::from_str(&read(&out, "result.json")).unwrap();
    assert_eq!(result["algorithm"], "random");
    let nodes = result["best"]["nodes"].as_u64().unwrap();
    let batch = result["best"]["batch"].as_u64().unwrap();
    let lr = result["best"]["lr"].as_f64().unwrap();
    assert!((50..=200).contains(&nodes));
    assert!((16..=128).contains(&batch));
    assert!((0.0001..=0.02).contains(&lr));
    for field in ["batch", "lr", "nodes"] {
        let stabilizing = result["stabilizing_iterations"][field].as_u64().unwrap();
        assert!(stabilizing <= 40);
    }

    let trace = read(&out, "trace.csv");
    assert_eq!(trace.lines().count(), 1 + 40);
    // best-so-far trace is non-increasing and ends at the reported loss
    let vals: Vec<f64> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    // serde_json's default float parsing is not exactly round-tripping,
    // so allow sub-ulp-scale slack
    let loss = result["loss"].as_f64().unwrap();
    assert!((vals.last().unwrap() - loss).abs() <= 1e-12 * loss.abs());

    let out2 = tmp_dir("tune-repeat");
    let mut args2 = args;
    *args2.last_mut().unwrap() = out2.to_str().unwrap();
    assert!(run(&args2).status.success());
    assert_eq!(read(&out, "result.json"), read(&out2, "result.json"));
    assert_eq!(trace, read(&out2, "trace.csv"));
}

#[test]
fn tune_demo_rejects_tiny_budget() {
    let out = tmp_dir("tune-bad");
    let res = run(&[
        "tune-demo",
        "--budget",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("budget"));
}

#[test]
fn help_and_bad_subcommand_exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

//! End-to-end tests of the `mechsched` binary: JSON envelope shape,
//! exit codes, determinism across worker counts, and CSV output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mechsched"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON envelope")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("mechsched-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn allocate_envelope_and_fixture() {
    let out = run(&["allocate", "--mechanism", "k", "--inline", "1,2,3"]);
    let v = json_of(&out);
    assert_eq!(v["command"], "allocate");
    assert_eq!(v["parameters"]["mechanism"], "k");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    let probs = v["results"]["tasks"][0]["probs"].as_array().unwrap();
    let want = [23.0 / 36.0, 2.0 / 9.0, 5.0 / 36.0];
    for (p, w) in probs.iter().zip(want) {
        assert!((p.as_f64().unwrap() - w).abs() < 1e-12);
    }
    let sc = v["results"]["tasks"][0]["social_cost"].as_f64().unwrap();
    assert!((sc - 1.5).abs() < 1e-12);
    assert_eq!(v["results"]["tasks"][0]["opt_cost"], 1.0);
}

#[test]
fn allocate_from_csv_file_with_header() {
    let path = temp_path("costs.csv");
    std::fs::write(&path, "m1,m2\n1,2\n1,2\n").unwrap();
    let out = run(&[
        "allocate",
        "--mechanism",
        "p",
        "--costs",
        path.to_str().unwrap(),
        "--header",
    ]);
    let v = json_of(&out);
    assert_eq!(v["results"]["tasks"].as_array().unwrap().len(), 2);
    let probs = v["results"]["tasks"][1]["probs"].as_array().unwrap();
    assert!((probs[0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn compare_reports_dominance_and_threshold() {
    let out = run(&["compare", "--inline", "1,2,3"]);
    let v = json_of(&out);
    assert_eq!(v["command"], "compare");
    let r = &v["results"]["tasks"][0];
    assert!(r["sc_k"].as_f64().unwrap() <= r["sc_p"].as_f64().unwrap() + 1e-9);
    assert_eq!(r["threshold_l"], 1);
    assert_eq!(r["dominance"], true);
}

#[test]
fn compare_random_mode() {
    let out = run(&["compare", "--random", "n=5,trials=200,seed=3"]);
    let v = json_of(&out);
    assert_eq!(v["results"]["dominance"], true);
    assert!(v["results"]["max_sc_k_minus_sc_p"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn ratio_reports_limit_and_is_seed_deterministic() {
    let args = [
        "ratio",
        "--mechanism",
        "k",
        "--dist",
        "pareto:tmin=1,alpha=2",
        "--n",
        "20",
        "--trials",
        "500",
        "--seed",
        "42",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert!((v["results"]["theoretical_limit"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!(v["results"]["mean"].as_f64().unwrap() > 1.0);
}

#[test]
fn ratio_identical_across_thread_counts() {
    let args = [
        "ratio",
        "--mechanism",
        "k",
        "--dist",
        "pareto:tmin=1,alpha=2",
        "--n",
        "50",
        "--trials",
        "400",
        "--seed",
        "9",
    ];
    let one = bin()
        .args(args)
        .env("MECHSCHED_THREADS", "1")
        .output()
        .unwrap();
    let four = bin()
        .args(args)
        .env("MECHSCHED_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn quiet_suppresses_stdout() {
    let out = run(&["--quiet", "allocate", "--mechanism", "p", "--inline", "1,2"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn sweep_writes_parsable_csv() {
    let path = temp_path("sweep.csv");
    let out = run(&[
        "sweep",
        "--dist",
        "pareto:tmin=1,alpha=2",
        "--n-list",
        "2,8",
        "--trials",
        "200",
        "--seed",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    let v = json_of(&out);
    assert_eq!(v["results"]["rows_written"], 2);
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = mechsched::analysis::sweep_rows_from_csv(&text).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].n, 2);
    assert!((rows[1].limit - 1.5).abs() < 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn truthfulness_passes_on_defaults() {
    let out = run(&[
        "truthfulness",
        "--mechanism",
        "p",
        "--random",
        "n=3,m=2,trials=50,seed=4",
    ]);
    let v = json_of(&out);
    assert_eq!(v["results"]["pass"], true);
    assert!(v["results"]["min_gap"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn exit_code_2_on_parse_errors() {
    for args in [
        vec!["allocate", "--mechanism", "vcg", "--inline", "1,2"],
        vec!["allocate", "--mechanism", "k", "--inline", "1,abc"],
        vec![
            "ratio",
            "--mechanism",
            "k",
            "--dist",
            "gauss:tmin=1,alpha=2",
            "--n",
            "2",
        ],
        vec!["compare", "--random", "n=2,bogus=1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn exit_code_3_on_domain_errors() {
    for args in [
        vec!["allocate", "--mechanism", "k", "--inline", "1,-2"],
        vec!["allocate", "--mechanism", "k", "--inline", "0,1"],
        vec![
            "ratio",
            "--mechanism",
            "k",
            "--dist",
            "uniform:tmin=3,tmax=1",
            "--n",
            "2",
        ],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn exit_code_4_on_missing_file() {
    let out = run(&[
        "allocate",
        "--mechanism",
        "k",
        "--costs",
        "/nonexistent/costs.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn exit_code_2_on_bad_thread_env() {
    let out = bin()
        .args(["allocate", "--mechanism", "k", "--inline", "1,2"])
        .env("MECHSCHED_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn costs_and_inline_are_mutually_exclusive() {
    let out = run(&["allocate", "--mechanism", "k"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_documents_the_distribution_grammar() {
    let out = run(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("pareto:tmin=<f>,alpha=<f>"));
    assert!(text.contains("MECHSCHED_THREADS"));
}

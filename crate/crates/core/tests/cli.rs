use std::path::Path;
use std::process::{Command, Output};

use edgelab::measures::{Density, SignedMeasure};
use edgelab::tridiag::{matrix_stream, sample_gbeta, TridiagonalSym};
use serde_json::Value;

fn edgelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgelab")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn tw_tail_csv_has_table_and_slope() {
    let out = edgelab(&[
        "tw-tail", "--beta", "2", "--n", "512", "--s-grid", "2,2.5,3,3.5", "--reps", "100000", "--seed", "7", "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let summary = text.lines().find_map(|l| l.strip_prefix("# summary: ")).unwrap();
    let summary: Value = serde_json::from_str(summary).unwrap();
    let slope = summary["estimates"]["slope"].as_f64().unwrap();
    assert!((-0.125..=-0.055).contains(&slope), "{slope}");
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(body[0].starts_with("s,log_freq,stderr"));
    assert_eq!(body.len(), 5);
    assert!(text.lines().any(|l| l == "# schema: 1"));
}

#[test]
fn phi_minus_prints_five_digits() {
    let out = edgelab(&["rate-fn", "--phi-minus", "--z", "-1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\n-1,0.05026"), "{}", stdout(&out));
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let out = edgelab(&["tw-tail", "--beta", "2", "--s-grid", "2,3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--n"), "{}", stderr(&out));
    let out = edgelab(&["tw-tail", "--beta", "2", "--n", "16", "--s-grid", "2", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = edgelab(&["rigidity", "--n", "16", "--beta", "2", "--a", "1", "--bogus", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = edgelab(&["rigidity", "--n", "16", "--beta", "2", "--a", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_tail_is_a_numerical_failure() {
    let out = edgelab(&["tw-tail", "--beta", "2", "--n", "32", "--s-grid", "40,50", "--reps", "20"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn io_failures_exit_4() {
    let out = edgelab(&["rate-fn", "--phi-minus", "--z", "-1", "--out", "/nonexistent/dir/out.json"]);
    assert_eq!(out.status.code(), Some(4));
    let out = edgelab(&["bl-distance", "--mu", "/nonexistent.json", "--nu", "/nonexistent.json", "--r", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# rigidity run\nn = 64\nbeta = 1\na = 0.5\nreps = 7\nseed = 3\n").unwrap();
    let out_path = dir.path().join("out.json");
    let out = edgelab(&[
        "rigidity",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "32",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["config"]["params"]["n"], 32);
    assert_eq!(doc["config"]["params"]["beta"], 1.0);
    assert_eq!(doc["config"]["reps"], 7);
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["result"]["reps"], 7);
}

fn payload(args: &[&str]) -> Value {
    let out = edgelab(args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    doc["result"].clone()
}

#[test]
fn payload_is_independent_of_workers() {
    let base = ["sao-simulate", "--beta", "2", "--lambda", "2,4", "--matrix-n", "64", "--reps", "50", "--seed", "5"];
    let runs: Vec<String> = ["1", "4", "8"]
        .iter()
        .map(|w| {
            let mut args = base.to_vec();
            args.extend(["--workers", w, "--out", "-"]);
            serde_json::to_string(&payload(&args)).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn dumped_matrix_matches_replica_zero() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m.csv");
    let out = edgelab(&["gbe-sample", "--n", "16", "--beta", "1.5", "--reps", "3", "--seed", "9", "--dump", dump.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let read = TridiagonalSym::from_csv(&std::fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(read, sample_gbeta(16, 1.5, matrix_stream(9, 0)).unwrap());
}

fn write_measure(path: &Path, m: &SignedMeasure) {
    std::fs::write(path, m.to_json().unwrap()).unwrap();
}

#[test]
fn measure_files_round_trip_and_feed_bl_distance() {
    let dir = tempfile::tempdir().unwrap();
    let mu = SignedMeasure::new(
        vec![(-0.3, 0.1 + 0.2), (1.0 / 3.0, -2.5e-7)],
        Density::SemicircleRescaled { n: 100, k: 3, sign: 1.0 },
        (-3.0, 3.0),
    )
    .unwrap();
    let nu = SignedMeasure::atomic(vec![(0.0, 1.0)], (-3.0, 3.0)).unwrap();
    let (mp, np) = (dir.path().join("mu.json"), dir.path().join("nu.json"));
    write_measure(&mp, &mu);
    write_measure(&np, &nu);
    assert_eq!(SignedMeasure::load(&mp).unwrap(), mu);
    let out = payload(&[
        "bl-distance",
        "--mu",
        mp.to_str().unwrap(),
        "--nu",
        np.to_str().unwrap(),
        "--r",
        "2",
        "--grid",
        "128",
    ]);
    let d = out["estimates"]["distance"].as_f64().unwrap();
    assert!(d > 0.0 && d.is_finite());
}

#[test]
fn every_subcommand_has_help() {
    for cmd in [
        "gbe-sample", "sao-simulate", "tw-tail", "rigidity", "bl-distance", "rate-fn", "kpz", "decay", "blowup-times",
        "deviation-event",
    ] {
        let out = edgelab(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
    }
}

//! Command-line behaviour: exit codes, files, hashes and reproducibility.

use bnlog::cli::{cmd_verify, run, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use bnlog::report::{embedded_hash, read_json, read_profile_csv, RunManifest};
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::Command;

const SMALL: [&str; 6] = ["--dim", "3", "--theta", "-1.5", "--nodes", "2049"];

fn bnlog(out: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["bnlog"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out.to_str().unwrap()]);
    run(argv)
}

fn small_manifest(out: &Path, seed: u64) -> RunManifest {
    RunManifest {
        dim: 3,
        theta: -1.5,
        node_count: 2049,
        rng_seed: seed,
        out_dir: out.to_path_buf(),
        ..RunManifest::default()
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bnlog(d, &["classify"]), EXIT_PASS);
    assert_eq!(bnlog(d, &["classify", "--theta", "-100"]), EXIT_FAIL);
    assert_eq!(bnlog(d, &["classify", "--theta", "0"]), EXIT_USAGE);
    assert_eq!(bnlog(d, &["classify", "--dim", "6"]), EXIT_USAGE);
    assert_eq!(bnlog(d, &["classify", "--mu", "-1"]), EXIT_USAGE);
    assert_eq!(bnlog(d, &["bubbles", "--eps-count", "2"]), EXIT_USAGE);
    assert_eq!(bnlog(d, &["bubbles", "--dim", "5", "--delta", "0.2"]), EXIT_USAGE);
    assert_eq!(bnlog(d, &["solve", "min", "--theta", "-100"]), EXIT_USAGE);
    assert_eq!(bnlog(d, &["frobnicate"]), EXIT_USAGE);
}

#[test]
fn binary_runs_classify() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_bnlog"))
        .args(["classify", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_PASS));
    let env = read_json::<Value>(&dir.path().join("classify.json")).unwrap();
    assert_eq!(env.manifest_hash, env.manifest.hash());
    let bad = Command::new(env!("CARGO_BIN_EXE_bnlog")).args(["solve", "sideways"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

#[test]
fn verdicts_do_not_depend_on_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = cmd_verify(&small_manifest(dir.path(), 7), None, 1_000_000).unwrap();
    let b = cmd_verify(&small_manifest(dir.path(), 8), None, 1_000_000).unwrap();
    assert_eq!(a.verdicts(), b.verdicts());
}

#[test]
fn loosened_log_bound_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let bound = (1.0 / std::f64::consts::E - 0.01).to_string();
    let mut args = vec!["verify", "--log-bound", bound.as_str()];
    args.extend_from_slice(&SMALL);
    assert_eq!(bnlog(dir.path(), &args), EXIT_FAIL);
    let env = read_json::<Value>(&dir.path().join("verify.json")).unwrap();
    let rows = env.result["rows"].as_array().unwrap();
    let row = |k: &str| rows.iter().find(|r| r["key"] == k).unwrap()["pass"].as_bool().unwrap();
    assert!(!row("lemma_2_1"));
    assert!(row("eq_3_4_3_5"));
}

#[test]
fn outputs_are_reproducible_and_hashed() {
    let a = tempfile::tempdir().unwrap();
    let files = [
        "solve_min.json",
        "solve_mp.json",
        "u0.csv",
        "u_mp.csv",
        "profiles.svg",
        "bubbles.csv",
        "rates.json",
    ];
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let mut args = vec!["solve", "mp", "--svg"];
        args.extend_from_slice(&SMALL);
        assert_eq!(bnlog(a.path(), &args), EXIT_PASS);
        let mut args = vec!["bubbles", "--svg"];
        args.extend_from_slice(&SMALL);
        assert_eq!(bnlog(a.path(), &args), EXIT_PASS);
        let snap: Vec<String> = files.iter().map(|f| fs::read_to_string(a.path().join(f)).unwrap()).collect();
        for f in files {
            fs::remove_file(a.path().join(f)).unwrap();
        }
        snapshots.push(snap);
    }
    for (f, (x, y)) in files.iter().zip(snapshots[0].iter().zip(&snapshots[1])) {
        assert!(x == y, "{f} differs between runs");
    }
    let mut args = vec!["solve", "mp", "--svg"];
    args.extend_from_slice(&SMALL);
    assert_eq!(bnlog(a.path(), &args), EXIT_PASS);
    let mut args = vec!["bubbles", "--svg"];
    args.extend_from_slice(&SMALL);
    assert_eq!(bnlog(a.path(), &args), EXIT_PASS);
    let env = read_json::<Value>(&a.path().join("solve_min.json")).unwrap();
    let hash = env.manifest.hash();
    for f in files {
        let text = fs::read_to_string(a.path().join(f)).unwrap();
        if f.ends_with(".json") {
            let e = read_json::<Value>(&a.path().join(f)).unwrap();
            assert_eq!(e.manifest_hash, hash, "{f}");
        } else {
            assert_eq!(embedded_hash(&text), Some(hash.as_str()), "{f}");
        }
    }
    let profile = read_profile_csv(&fs::read_to_string(a.path().join("u_mp.csv")).unwrap()).unwrap();
    assert_eq!(profile.len(), 2049);
    assert_eq!(profile.last().unwrap().1, 0.0);
}

#[test]
fn json_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["solve", "min"];
    args.extend_from_slice(&SMALL);
    assert_eq!(bnlog(dir.path(), &args), EXIT_PASS);
    let path = dir.path().join("solve_min.json");
    let text = fs::read_to_string(&path).unwrap();
    let env = read_json::<Value>(&path).unwrap();
    let again = serde_json::to_string_pretty(&env).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), serde_json::from_str::<Value>(&text).unwrap());
    let field: Vec<f64> = serde_json::from_value(env.result["outcome"]["field"].clone()).unwrap();
    let csv = read_profile_csv(&fs::read_to_string(dir.path().join("u0.csv")).unwrap()).unwrap();
    assert!(field.iter().zip(&csv).all(|(a, (_, b))| a.to_bits() == b.to_bits()));
}

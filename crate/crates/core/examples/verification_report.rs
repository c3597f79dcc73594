//! Runs the full check table for one manifest and writes `verify.json` into a
//! temporary directory.
//!
//! `cargo run --release --example verification_report -- [dim] [theta]`

use bnlog::cli::cmd_verify;
use bnlog::report::RunManifest;

fn main() -> bnlog::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let theta: f64 = args
        .next()
        .and_then(|a| a.parse().ok())
        .unwrap_or(if dim == 4 { -0.5 } else { -1.5 });
    let dir = tempfile::tempdir()?;
    let manifest = RunManifest {
        dim,
        theta,
        out_dir: dir.path().to_path_buf(),
        ..RunManifest::default()
    };
    let table = cmd_verify(&manifest, None, 1_000_000)?;
    println!("manifest {}", manifest.hash());
    println!("all pass: {}", table.all_pass());
    let text = std::fs::read_to_string(dir.path().join("verify.json"))?;
    println!("verify.json: {} bytes", text.len());
    Ok(())
}

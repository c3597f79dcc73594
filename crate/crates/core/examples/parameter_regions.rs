//! Sobolev constant from the bubble quotient, region classification and the
//! resulting ball radius for a few parameter sets.
//!
//! `cargo run --release --example parameter_regions`

use bnlog::constants::{classify, energy_gap_threshold, rho, sobolev_constant};
use bnlog::{build_grid, ProblemParams};

fn main() -> bnlog::Result<()> {
    let cases = [
        (4, 0.0, 1.0, -0.5),
        (4, 5.0, 1.0, -2.0),
        (4, 0.0, 1.0, -100.0),
        (3, 0.0, 1.0, -1.5),
        (5, 0.0, 1.0, -10.0),
        (5, 30.0, 1.0, -1.0),
    ];
    for (dim, lambda, mu, theta) in cases {
        let params = ProblemParams::new(dim, lambda, mu, theta)?;
        let grid = build_grid(dim, 1.0, 4096)?;
        let s = sobolev_constant(dim)?;
        let lambda1 = grid.smallest_eigenvalue()?;
        let verdict = classify(&params, s, lambda1, grid.volume())?;
        println!("N={dim} lambda={lambda} mu={mu} theta={theta}");
        println!("  S = {s:.6}, lambda1 = {lambda1:.6}, gap = {:.6}", energy_gap_threshold(&params, s));
        println!("  margins: {}", verdict.describe());
        match rho(&params, s, lambda1, &verdict) {
            Ok(r) => println!("  region {:?}, rho = {r:.6}", verdict.region().expect("admissible")),
            Err(e) => println!("  {e}"),
        }
    }
    Ok(())
}

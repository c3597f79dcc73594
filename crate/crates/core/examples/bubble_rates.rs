//! Integrals of truncated bubbles over an `ε` sweep and the fitted rates.
//!
//! `cargo run --release --example bubble_rates -- [dim] [delta]`

use bnlog::bubbles::{
    default_delta, default_eps_sweep, rate_regression, run_sweep, whole_space_bubble_identity,
    DEFAULT_CUTOFF_RADIUS,
};
use bnlog::build_grid;

fn main() -> bnlog::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let delta = args.next().and_then(|a| a.parse().ok()).or_else(|| default_delta(dim));

    let (grad, crit) = whole_space_bubble_identity(dim, 1.0)?;
    println!("whole space: grad = {grad:.8}, crit = {crit:.8}");

    let grid = build_grid(dim, 1.0, 4096)?;
    let eps = default_eps_sweep(DEFAULT_CUTOFF_RADIUS);
    let sweep = run_sweep(&grid, DEFAULT_CUTOFF_RADIUS, &eps, delta)?;
    let table = rate_regression(&sweep)?;
    println!("{:>16} {:>10} {:>10} {:>14} {:>10} {:>6}", "quantity", "expected", "fitted", "coefficient", "drift", "pass");
    for f in &table.fits {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.5}"));
        println!(
            "{:>16} {:>10} {:>10.4} {:>14} {:>10} {:>6}",
            f.quantity.label(),
            opt(f.expected),
            f.fitted,
            opt(f.coefficient),
            opt(f.drift),
            f.pass
        );
    }
    Ok(())
}

//! Line scan `β ↦ J(u₀+βψ_ε)` over a sweep of `ε`, compared with
//! `c_K + (1/N) μ^{−(N−2)/2} S^{N/2}`.
//!
//! `cargo run --release --example sup_scan -- [dim] [lambda] [mu] [theta]`

use bnlog::bubbles::{default_eps_sweep, DEFAULT_CUTOFF_RADIUS};
use bnlog::constants::{classify, rho, sobolev_constant};
use bnlog::solvers::{find_local_min, sup_sweep, TOL_MIN};
use bnlog::{build_grid, ProblemParams};

fn main() -> bnlog::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let dim = args.first().map_or(4, |&d| d as usize);
    let lambda = args.get(1).copied().unwrap_or(0.0);
    let mu = args.get(2).copied().unwrap_or(1.0);
    let theta = args.get(3).copied().unwrap_or(-0.5);

    let params = ProblemParams::new(dim, lambda, mu, theta)?;
    let grid = build_grid(dim, 1.0, 4096)?;
    let s = sobolev_constant(dim)?;
    let lambda1 = grid.smallest_eigenvalue()?;
    let radius = rho(&params, s, lambda1, &classify(&params, s, lambda1, grid.volume())?)?;
    let u0 = find_local_min(&grid, &params, radius, None, TOL_MIN)?;

    let eps = default_eps_sweep(DEFAULT_CUTOFF_RADIUS);
    let sweep = sup_sweep(&grid, &params, &u0, DEFAULT_CUTOFF_RADIUS, &eps, s)?;
    println!("c_K = {:.6e}, threshold = {:.10}", sweep.c_k, sweep.threshold);
    println!("{:>14} {:>10} {:>16} {:>14}", "eps", "beta", "sup - c_K", "gap");
    for e in &sweep.entries {
        println!(
            "{:>14.6e} {:>10.6} {:>16.10} {:>14.6e}",
            e.eps,
            e.beta,
            e.excess,
            sweep.threshold - e.excess
        );
    }
    println!(
        "beta in [{:.4}, {:.4}], allowed [{:.4}, {:.4}]; holds = {}",
        sweep.beta_min, sweep.beta_max, sweep.beta_bounds.0, sweep.beta_bounds.1, sweep.holds
    );
    Ok(())
}

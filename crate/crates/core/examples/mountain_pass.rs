//! Second critical point by path deformation between the local minimiser and
//! a bubble endpoint, followed by the energy-gap test.
//!
//! `cargo run --release --example mountain_pass -- [dim] [lambda] [mu] [theta] [eps]`

use bnlog::bubbles::{BubbleSpec, DEFAULT_CUTOFF_RADIUS};
use bnlog::constants::{classify, rho, sobolev_constant};
use bnlog::solvers::{
    choose_endpoint, find_local_min, mountain_pass, positivity_report, verify_energy_gap,
    MountainPassConfig, TOL_MIN,
};
use bnlog::{build_grid, ProblemParams};

fn main() -> bnlog::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let dim = args.first().map_or(3, |&d| d as usize);
    let lambda = args.get(1).copied().unwrap_or(0.0);
    let mu = args.get(2).copied().unwrap_or(1.0);
    let theta = args.get(3).copied().unwrap_or(-1.5);
    let eps = args.get(4).copied().unwrap_or(DEFAULT_CUTOFF_RADIUS / 16.0);

    let params = ProblemParams::new(dim, lambda, mu, theta)?;
    let grid = build_grid(dim, 1.0, 4096)?;
    let s = sobolev_constant(dim)?;
    let lambda1 = grid.smallest_eigenvalue()?;
    let radius = rho(&params, s, lambda1, &classify(&params, s, lambda1, grid.volume())?)?;
    let u0 = find_local_min(&grid, &params, radius, None, TOL_MIN)?;

    let spec = BubbleSpec::new(dim, eps, DEFAULT_CUTOFF_RADIUS)?;
    let (beta, endpoint) = choose_endpoint(&grid, &params, &u0, &spec, radius)?;
    println!("endpoint beta = {beta:.4}");
    let run = mountain_pass(&grid, &params, &u0, &endpoint, &MountainPassConfig::default())?;
    let out = &run.outcome;
    let gap = verify_energy_gap(out.energy, u0.energy, &params, s)?;
    println!("c_K          = {:.10e}", u0.energy);
    println!("c_M          = {:.10e}", out.energy);
    println!("threshold    = {:.10e}", gap.threshold);
    println!("margin       = {:.6e} ({})", gap.margin, if gap.holds { "holds" } else { "fails" });
    println!("residual     = {:.3e}", out.residual);
    println!("morse index  = {}", out.morse_index);
    println!("positive     = {}", positivity_report(&out.field).strictly_positive);
    println!("steps        = {} (+ Newton)", run.deformation_steps);
    Ok(())
}

//! Negative-energy local minimiser inside the ball `B_ρ`.
//!
//! `cargo run --release --example local_minimum -- [dim] [lambda] [mu] [theta]`

use bnlog::constants::{classify, rho, sobolev_constant};
use bnlog::solvers::{find_local_min, positivity_report, TOL_MIN};
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
    let verdict = classify(&params, s, lambda1, grid.volume())?;
    let radius = rho(&params, s, lambda1, &verdict)?;
    println!("region {:?}, rho = {radius:.6}", verdict.region());

    let out = find_local_min(&grid, &params, radius, None, TOL_MIN)?;
    let pos = positivity_report(&out.field);
    println!("J(u0)      = {:.12e}", out.energy);
    println!("||u0||     = {:.6e}", out.norm);
    println!("residual   = {:.3e}", out.residual);
    println!("morse idx  = {}", out.morse_index);
    println!("u0(0)      = {:.6e}", out.field.values()[0]);
    println!("min u0     = {:.3e} (interior {:.3e})", pos.min_value, pos.min_interior);
    println!("iterations = {}", out.iterations);
    Ok(())
}

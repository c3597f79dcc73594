//! Energy of scaled first eigenfunctions, the strong-form gradient, and the
//! randomised pointwise inequalities behind the logarithmic term.
//!
//! `cargo run --release --example energy_functional`

use bnlog::functional::{
    check_log_inequalities, check_power_inequalities, energy, g_max, gradient,
};
use bnlog::{build_grid, ProblemParams};

fn main() -> bnlog::Result<()> {
    let params = ProblemParams::new(4, 0.0, 1.0, -0.5)?;
    let grid = build_grid(4, 1.0, 4096)?;
    let e1 = grid.first_eigenpair()?.vector;

    println!("{:>10} {:>16} {:>14} {:>14} {:>14}", "t", "J(t e1)", "dirichlet", "critical", "log");
    for t in [1e-6, 1e-4, 1e-2, 0.5, 1.0, 2.0, 4.0] {
        let rep = energy(&grid, &params, &e1.scaled(t))?;
        println!(
            "{t:>10.0e} {:>16.8e} {:>14.6e} {:>14.6e} {:>14.6e}",
            rep.total, rep.dirichlet, rep.critical_term, rep.log_term
        );
    }
    let g = gradient(&grid, &params, &e1.scaled(0.1))?;
    println!("dual norm of J'(0.1 e1) = {:.6e}", grid.dual_norm(&g)?);

    let (t, g) = g_max(params.mu)?;
    println!("max of t^2/2 - mu t^4/4: {g:.6} at t = {t:.6}");

    let logs = check_log_inequalities(1_000_000, 7)?;
    println!(
        "log inequalities: {} samples, {} violations, max |t log t| = {:.12} at t = {:.8}",
        logs.samples,
        logs.violations,
        logs.max_abs_tlogt.unwrap_or(f64::NAN),
        logs.argmax_t.unwrap_or(f64::NAN)
    );
    let powers = check_power_inequalities(1_000_000, 7)?;
    println!("power inequalities: {} samples, {} violations", powers.samples, powers.violations);
    Ok(())
}

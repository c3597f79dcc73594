//! `classify`, `bubbles`, `solve` and `verify` subcommands.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a solver
//! gives up, 2 for usage and configuration errors.

use crate::bubbles::{
    check_log_decomposition, check_mass_lower_bound, check_resolution, check_superadditivity, rate_regression,
    run_sweep, unit_mass_integral, BubbleSpec, BubbleSweep, RateTable,
};
use crate::constants::{classify, rho, sobolev_constant, RegionVerdict};
use crate::error::{Error, Result};
use crate::functional::{check_log_inequalities_with_bound, check_power_inequalities, g_max, ProblemParams};
use crate::radial::{build_grid, sphere_area, RadialGrid};
use crate::report::{
    plot_profiles, profile_csv, sweep_csv, write_atomic, write_json, Curve, RunManifest, VerifyRow, VerifyTable,
};
use crate::solvers::{
    choose_endpoint, estimate_sphere_floor, find_local_min, mountain_pass, positivity_report, sup_sweep,
    verify_energy_gap, EnergyOrdering, GapVerdict, MountainPassConfig, MountainPassRun, PositivityReport,
    SolveOutcome, SphereFloor, SupSweep,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bnlog", about = "Critical-exponent problem with logarithmic perturbation on the ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: ManifestArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Min,
    Mp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region memberships and margins.
    Classify,
    /// Truncated-bubble integral sweep and rate fits.
    Bubbles,
    /// Local minimiser, optionally followed by the mountain pass.
    Solve {
        #[arg(value_enum)]
        which: Which,
    },
    /// Every check in one table.
    Verify {
        /// Replaces 1/e in the `|t log t|` bound (harness self-test).
        #[arg(long)]
        log_bound: Option<f64>,
        /// Random samples per pointwise inequality.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ManifestArgs {
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Ball radius used instead of the region formula.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub cutoff_rho: Option<f64>,
    #[arg(long, global = true)]
    pub eps_from: Option<f64>,
    #[arg(long, global = true)]
    pub eps_to: Option<f64>,
    #[arg(long, global = true)]
    pub eps_count: Option<usize>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub tol_min: Option<f64>,
    #[arg(long, global = true)]
    pub tol_mp: Option<f64>,
    #[arg(long, global = true)]
    pub path_points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub svg: bool,
}

impl ManifestArgs {
    pub fn manifest(&self) -> RunManifest {
        let d = RunManifest::default();
        let cutoff = self.cutoff_rho.unwrap_or(d.cutoff_radius);
        RunManifest {
            dim: self.dim.unwrap_or(d.dim),
            radius: self.radius.unwrap_or(d.radius),
            node_count: self.nodes.unwrap_or(d.node_count),
            lambda: self.lambda.unwrap_or(d.lambda),
            mu: self.mu.unwrap_or(d.mu),
            theta: self.theta.unwrap_or(d.theta),
            rho_override: self.rho,
            cutoff_radius: cutoff,
            eps_from: self.eps_from.unwrap_or(cutoff / 16.0),
            eps_to: self.eps_to.unwrap_or(cutoff / 4096.0),
            eps_count: self.eps_count.unwrap_or(d.eps_count),
            delta: self.delta,
            tol_min: self.tol_min.unwrap_or(d.tol_min),
            tol_mp: self.tol_mp.unwrap_or(d.tol_mp),
            path_points: self.path_points.unwrap_or(d.path_points),
            rng_seed: self.seed.unwrap_or(d.rng_seed),
            out_dir: self.out.clone().unwrap_or(d.out_dir),
            svg: self.svg,
        }
    }
}

/// Exit code for an error.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::UnsupportedDimension(_)
        | Error::InvalidParameter(_)
        | Error::LengthMismatch { .. }
        | Error::BoundaryValue(_)
        | Error::DeltaOutsideWindow { .. }
        | Error::SweepTooShort { .. }
        | Error::UnderResolved { .. }
        | Error::OutsideRegion(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

/// Parses `argv`, runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let m = cli.opts.manifest();
    let outcome = match cli.command {
        Command::Classify => cmd_classify(&m),
        Command::Bubbles => cmd_bubbles(&m),
        Command::Solve { which } => cmd_solve(&m, which),
        Command::Verify { log_bound, samples } => cmd_verify(&m, log_bound, samples).map(|t| t.all_pass()),
    };
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

/// Grid, constants and classification shared by every command.
pub struct Setup {
    pub params: ProblemParams,
    pub grid: RadialGrid,
    pub sobolev: f64,
    pub lambda1: f64,
    pub verdict: RegionVerdict,
}

impl Setup {
    pub fn new(m: &RunManifest) -> Result<Self> {
        let params = m.params()?;
        let grid = build_grid(m.dim, m.radius, m.node_count)?;
        let sobolev = sobolev_constant(m.dim)?;
        let lambda1 = grid.smallest_eigenvalue()?;
        let verdict = classify(&params, sobolev, lambda1, grid.volume())?;
        Ok(Self {
            params,
            grid,
            sobolev,
            lambda1,
            verdict,
        })
    }

    /// Override if given, else the region formula; refuses outside every region.
    pub fn rho(&self, m: &RunManifest) -> Result<f64> {
        let from_region = rho(&self.params, self.sobolev, self.lambda1, &self.verdict)?;
        Ok(m.rho_override.unwrap_or(from_region))
    }
}

#[derive(Debug, Serialize)]
struct ClassifyResult {
    verdict: RegionVerdict,
    admissible: bool,
    sobolev: f64,
    lambda1: f64,
    volume: f64,
    rho: Option<f64>,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn cmd_classify(m: &RunManifest) -> Result<bool> {
    let setup = Setup::new(m)?;
    let res = ClassifyResult {
        verdict: setup.verdict,
        admissible: setup.verdict.admissible(),
        sobolev: setup.sobolev,
        lambda1: setup.lambda1,
        volume: setup.grid.volume(),
        rho: setup.rho(m).ok(),
    };
    write_json(&m.out_dir.join("classify.json"), m, &res)?;
    print_json(&res)?;
    Ok(res.admissible)
}

/// Sweep and fits for the manifest, after checking the grid resolves every `ε`.
pub fn bubble_rates(m: &RunManifest, grid: &RadialGrid) -> Result<(BubbleSweep, RateTable)> {
    let eps = m.eps_list()?;
    for &e in &eps {
        check_resolution(grid, e)?;
    }
    let sweep = run_sweep(grid, m.cutoff_radius, &eps, m.delta())?;
    let table = rate_regression(&sweep)?;
    Ok((sweep, table))
}

pub fn cmd_bubbles(m: &RunManifest) -> Result<bool> {
    let params = m.params()?;
    let grid = build_grid(params.dim, m.radius, m.node_count)?;
    let (sweep, table) = bubble_rates(m, &grid)?;
    write_atomic(&m.out_dir.join("bubbles.csv"), sweep_csv(m, &sweep)?.as_bytes())?;
    write_json(&m.out_dir.join("rates.json"), m, &table)?;
    print_json(&table)?;
    Ok(table.all_pass())
}

/// Checks attached to a local minimiser.
#[derive(Debug, Clone, Serialize)]
pub struct MinChecklist {
    pub rho: f64,
    pub energy_negative: bool,
    pub inside_ball: bool,
    pub residual_ok: bool,
    pub positivity: PositivityReport,
}

impl MinChecklist {
    pub fn new(out: &SolveOutcome, rho: f64, tol: f64) -> Self {
        Self {
            rho,
            energy_negative: out.energy < 0.0,
            inside_ball: out.norm <= rho,
            residual_ok: out.residual <= tol,
            positivity: positivity_report(&out.field),
        }
    }

    pub fn pass(&self) -> bool {
        self.energy_negative && self.inside_ball && self.residual_ok && self.positivity.strictly_positive
    }
}

/// Checks attached to a mountain-pass candidate.
#[derive(Debug, Clone, Serialize)]
pub struct MpChecklist {
    pub residual_ok: bool,
    pub morse_index_one: bool,
    pub positivity: PositivityReport,
    pub gap: GapVerdict,
    pub sphere_floor: SphereFloor,
    pub ordering: EnergyOrdering,
}

impl MpChecklist {
    pub fn pass(&self) -> bool {
        self.residual_ok
            && self.morse_index_one
            && self.positivity.strictly_positive
            && self.gap.holds
            && self.ordering.holds()
    }
}

#[derive(Debug, Serialize)]
struct MinReport<'a> {
    outcome: &'a SolveOutcome,
    checks: &'a MinChecklist,
}

#[derive(Debug, Serialize)]
struct MpReport<'a> {
    outcome: &'a SolveOutcome,
    path_energies: &'a [f64],
    candidate_index: usize,
    deformation_steps: usize,
    checks: &'a MpChecklist,
}

/// Local minimiser with its checklist.
pub fn solve_min(m: &RunManifest, setup: &Setup) -> Result<(SolveOutcome, MinChecklist)> {
    let radius = setup.rho(m)?;
    let out = find_local_min(&setup.grid, &setup.params, radius, None, m.tol_min)?;
    let checks = MinChecklist::new(&out, radius, m.tol_min);
    Ok((out, checks))
}

/// Mountain pass from `u0` towards a bubble at `ε = eps_from`, with its checklist.
pub fn solve_mp(m: &RunManifest, setup: &Setup, u0: &SolveOutcome) -> Result<(MountainPassRun, MpChecklist)> {
    let radius = setup.rho(m)?;
    let spec = BubbleSpec::new(m.dim, m.eps_from, m.cutoff_radius)?;
    let (_, endpoint) = choose_endpoint(&setup.grid, &setup.params, u0, &spec, radius)?;
    let config = MountainPassConfig {
        path_points: m.path_points,
        tol: m.tol_mp,
        ..MountainPassConfig::default()
    };
    let run = mountain_pass(&setup.grid, &setup.params, u0, &endpoint, &config)?;
    let out = &run.outcome;
    let gap = verify_energy_gap(out.energy, u0.energy, &setup.params, setup.sobolev)?;
    let crossing = run.sphere_crossing(&setup.grid, radius);
    let mut directions = vec![&u0.field, &endpoint];
    directions.extend(crossing.as_ref());
    let floor = estimate_sphere_floor(&setup.grid, &setup.params, radius, 256, m.rng_seed, &directions)?;
    let checks = MpChecklist {
        residual_ok: out.residual <= m.tol_mp,
        morse_index_one: out.morse_index == 1,
        positivity: positivity_report(&out.field),
        gap,
        sphere_floor: floor,
        ordering: EnergyOrdering::new(u0.energy, floor.min_energy, out.energy, gap.threshold),
    };
    Ok((run, checks))
}

pub fn cmd_solve(m: &RunManifest, which: Which) -> Result<bool> {
    let setup = Setup::new(m)?;
    if !setup.verdict.admissible() {
        return Err(Error::OutsideRegion(setup.verdict.describe()));
    }
    let (u0, min_checks) = solve_min(m, &setup)?;
    write_json(
        &m.out_dir.join("solve_min.json"),
        m,
        &MinReport {
            outcome: &u0,
            checks: &min_checks,
        },
    )?;
    write_atomic(&m.out_dir.join("u0.csv"), profile_csv(m, &setup.grid, &u0.field)?.as_bytes())?;
    print_json(&summary(&MinReport {
        outcome: &u0,
        checks: &min_checks,
    })?)?;
    let r = setup.grid.nodes();
    if which == Which::Min {
        if m.svg {
            let svg = plot_profiles(&m.hash(), &[Curve { label: "u0", r, u: u0.field.values() }], None);
            write_atomic(&m.out_dir.join("profiles.svg"), svg.as_bytes())?;
        }
        return Ok(min_checks.pass());
    }
    let (run, mp_checks) = solve_mp(m, &setup, &u0)?;
    let out = &run.outcome;
    let report = MpReport {
        outcome: out,
        path_energies: &run.path_energies,
        candidate_index: run.candidate_index,
        deformation_steps: run.deformation_steps,
        checks: &mp_checks,
    };
    write_json(&m.out_dir.join("solve_mp.json"), m, &report)?;
    write_atomic(&m.out_dir.join("u_mp.csv"), profile_csv(m, &setup.grid, &out.field)?.as_bytes())?;
    print_json(&summary(&report)?)?;
    if m.svg {
        let svg = plot_profiles(
            &m.hash(),
            &[
                Curve { label: "u0", r, u: u0.field.values() },
                Curve { label: "mountain pass", r, u: out.field.values() },
            ],
            Some((&run.path_energies, run.candidate_index)),
        );
        write_atomic(&m.out_dir.join("profiles.svg"), svg.as_bytes())?;
    }
    Ok(min_checks.pass() && mp_checks.pass())
}

/// Report without the profile, history and path, for terminal output.
fn summary<T: Serialize>(report: &T) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(report)?;
    if let Some(o) = v.as_object_mut() {
        o.remove("path_energies");
        if let Some(out) = o.get_mut("outcome").and_then(|x| x.as_object_mut()) {
            out.remove("field");
            out.remove("history");
        }
    }
    Ok(v)
}

fn row(key: &str, pass: bool, detail: serde_json::Value) -> VerifyRow {
    VerifyRow {
        key: key.to_string(),
        pass,
        detail,
    }
}

fn failed(key: &str, e: &Error) -> VerifyRow {
    row(key, false, json!({ "error": e.to_string() }))
}

/// Runs every check for the manifest and writes `verify.json`.
///
/// Configuration errors abort; a check that errors becomes a failing row.
pub fn cmd_verify(m: &RunManifest, log_bound: Option<f64>, samples: usize) -> Result<VerifyTable> {
    let setup = Setup::new(m)?;
    let dim = m.dim;
    let four = dim == 4;
    let mut rows = Vec::new();
    let inv_e = (-1f64).exp();

    let logs = check_log_inequalities_with_bound(samples, m.rng_seed, log_bound.unwrap_or(inv_e))?;
    let (gt, gv) = g_max(m.mu)?;
    let max_ok = logs.max_abs_tlogt.is_some_and(|v| (v - inv_e).abs() <= 1e-9);
    rows.push(row(
        "lemma_2_1",
        logs.passed() && max_ok,
        json!({ "inequalities": logs, "g_argmax": gt, "g_max": gv }),
    ));

    let powers = check_power_inequalities(samples, m.rng_seed)?;
    rows.push(row("eq_3_4_3_5", powers.passed(), json!(powers)));

    let rates_key = if four { "lemma_3_1" } else { "lemma_5_5" };
    let sweep = match bubble_rates(m, &setup.grid) {
        Ok((sweep, table)) => {
            rows.push(row(rates_key, table.all_pass(), json!(table)));
            Some(sweep)
        }
        Err(e) if error_code(&e) == EXIT_USAGE => return Err(e),
        Err(e) => {
            rows.push(failed(rates_key, &e));
            None
        }
    };
    let eps = sweep.as_ref().map(|s| s.eps_list()).unwrap_or_default();

    let weights: [(&str, fn(f64) -> f64); 3] = [("1", |_| 1.0), ("1-r^2", |r| 1.0 - r * r), ("1+r", |r| 1.0 + r)];
    let dec_key = if four { "lemma_3_2" } else { "lemma_5_7" };
    let mut worst = f64::INFINITY;
    let mut dec_err = None;
    'outer: for &e in &eps {
        let spec = BubbleSpec::new(dim, e, m.cutoff_radius)?;
        for (_, w) in &weights {
            for beta in [0.25, 1.0, 4.0] {
                match check_log_decomposition(&spec, w, beta, m.delta()) {
                    Ok(d) => worst = worst.min(d.margin),
                    Err(err) => {
                        dec_err = Some(err);
                        break 'outer;
                    }
                }
            }
        }
    }
    let mut dec_detail = json!({ "min_margin": worst, "tuples": eps.len() * 9 });
    let mut dec_pass = dec_err.is_none() && !eps.is_empty() && worst >= 0.0;
    if !four {
        let sup = check_superadditivity(samples, dim, m.rng_seed)?;
        dec_pass &= sup.passed();
        dec_detail["superadditivity"] = json!(sup);
    }
    if let Some(e) = dec_err {
        dec_detail["error"] = json!(e.to_string());
    }
    rows.push(row(dec_key, dec_pass, dec_detail));

    let mass_key = if four { "lemma_3_3" } else { "lemma_5_6" };
    let constant = unit_mass_integral(dim)?;
    let oracle = sphere_area(dim)? / dim as f64;
    let constant_ok = (constant / oracle - 1.0).abs() <= 1e-3;
    let mut bounds = Vec::new();
    let mut mass_pass = constant_ok;
    let small: Vec<f64> = eps.iter().copied().filter(|&e| e <= m.cutoff_radius / 50.0).collect();
    for &e in &small {
        let spec = BubbleSpec::new(dim, e, m.cutoff_radius)?;
        for (label, w) in &weights[..2] {
            match check_mass_lower_bound(&spec, w) {
                Ok(b) => {
                    mass_pass &= b.margin >= 0.0;
                    bounds.push(json!({ "w": label, "bound": b }));
                }
                Err(err) => {
                    mass_pass = false;
                    bounds.push(json!({ "w": label, "eps": e, "error": err.to_string() }));
                }
            }
        }
    }
    mass_pass &= !small.is_empty();
    rows.push(row(
        mass_key,
        mass_pass,
        json!({ "constant": constant, "oracle": oracle, "bounds": bounds }),
    ));

    let sup_key = if four { "lemma_3_4" } else { "lemma_5_8" };
    let u0 = match solve_min(m, &setup) {
        Ok((u0, checks)) => {
            rows.push(row("local_minimum", checks.pass(), json!({ "energy": u0.energy, "norm": u0.norm, "residual": u0.residual, "checks": checks })));
            Some(u0)
        }
        Err(e) if error_code(&e) == EXIT_USAGE => return Err(e),
        Err(e) => {
            rows.push(failed("local_minimum", &e));
            None
        }
    };
    match &u0 {
        Some(u0) => match sup_sweep(&setup.grid, &setup.params, u0, m.cutoff_radius, &eps, setup.sobolev) {
            Ok(s) => rows.push(row(sup_key, s.holds, sup_detail(&s))),
            Err(e) => rows.push(failed(sup_key, &e)),
        },
        None => rows.push(row(sup_key, false, json!({ "error": "no local minimiser" }))),
    }

    match &u0 {
        Some(u0) => match solve_mp(m, &setup, u0) {
            Ok((run, checks)) => rows.push(row(
                "energy_ordering",
                checks.pass(),
                json!({ "c_k": u0.energy, "c_m": run.outcome.energy, "residual": run.outcome.residual, "checks": checks }),
            )),
            Err(e) => rows.push(failed("energy_ordering", &e)),
        },
        None => rows.push(row("energy_ordering", false, json!({ "error": "no local minimiser" }))),
    }

    let table = VerifyTable { rows };
    write_json(&m.out_dir.join("verify.json"), m, &table)?;
    for r in &table.rows {
        println!("{:<16} {}", r.key, if r.pass { "pass" } else { "FAIL" });
    }
    if !table.all_pass() {
        eprintln!("failing: {}", table.failing().join(", "));
    }
    Ok(table)
}

fn sup_detail(s: &SupSweep) -> serde_json::Value {
    json!({
        "c_k": s.c_k,
        "threshold": s.threshold,
        "margin": s.margin,
        "beta_range": [s.beta_min, s.beta_max],
        "beta_bounds": [s.beta_bounds.0, s.beta_bounds.1],
        "entries": s.entries,
    })
}

//! Local minimiser in the ball, the line scan `β ↦ J(u₀+βψ_ε)`, the
//! mountain-pass deformation and the energy-level checks.

use crate::bubbles::{bubble_field, BubbleSpec};
use crate::constants::energy_gap_threshold;
use crate::error::{Error, Result};
use crate::functional::{energy_value, weak_gradient, ProblemParams};
use crate::quadrature::{merge, PanelRule};
use crate::radial::{sphere_area, RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dual-norm tolerance for the local minimiser.
pub const TOL_MIN: f64 = 1e-8;
/// Dual-norm tolerance for the mountain-pass candidate.
pub const TOL_MP: f64 = 1e-6;
/// Default number of path segments.
pub const PATH_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveKind {
    LocalMin,
    MountainPass,
}

/// A converged critical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub kind: SolveKind,
    pub field: RadialField,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// `sqrt(∫|∇u|²)`
    pub norm: f64,
    /// Negative eigenvalues of the discrete Hessian at the point.
    pub morse_index: usize,
    /// Energies of accepted iterates.
    pub history: Vec<f64>,
}

/// `sqrt(⟨g, K⁻¹g⟩)` for the weak gradient `g`.
pub fn residual_norm(grid: &RadialGrid, params: &ProblemParams, u: &[f64]) -> Result<f64> {
    let g = weak_gradient(grid, params, u);
    let v = grid.solve_stiffness(&g)?;
    Ok(dot(&g, &v).max(0.0).sqrt())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn h1_norm(grid: &RadialGrid, u: &[f64]) -> f64 {
    grid.energy_of(u).max(0.0).sqrt()
}

/// Number of negative eigenvalues of `K − M f'(u)`.
pub fn morse_index(grid: &RadialGrid, params: &ProblemParams, u: &RadialField) -> Result<usize> {
    let shift: Vec<f64> = u.interior().iter().map(|&v| params.source_prime(v)).collect();
    grid.shifted_stiffness(&shift).negative_count()
}

/// Damped Newton iteration on the weak gradient; returns the iterate, its
/// residual and the number of steps taken.
fn newton(
    grid: &RadialGrid,
    params: &ProblemParams,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let mut u = start[..grid.unknowns()].to_vec();
    let mut res = residual_norm(grid, params, &u)?;
    for it in 0..max_iter {
        let g = weak_gradient(grid, params, &u);
        let shift: Vec<f64> = u.iter().map(|&v| params.source_prime(v)).collect();
        let step = grid.shifted_stiffness(&shift).solve(&g)?;
        let mut s = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a - s * b).collect();
            let r = residual_norm(grid, params, &trial)?;
            if r.is_finite() && r < res {
                let moved = s * step.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                u = trial;
                res = r;
                if res <= tol && moved <= 1e-13 * scale.max(1e-300) {
                    return Ok((u, res, it + 1));
                }
                break;
            }
            s *= 0.5;
            if s < 1e-6 {
                return Ok((u, res, it + 1));
            }
        }
    }
    Ok((u, res, max_iter))
}

fn outcome(
    grid: &RadialGrid,
    params: &ProblemParams,
    kind: SolveKind,
    u: Vec<f64>,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
) -> Result<SolveOutcome> {
    let field = RadialField::from_interior(&u);
    let morse_index = morse_index(grid, params, &field)?;
    Ok(SolveOutcome {
        kind,
        energy: energy_value(grid, params, &u),
        norm: h1_norm(grid, &u),
        field,
        residual,
        iterations,
        morse_index,
        history,
    })
}

/// `t·e₁` with `t` at the first negative-energy well of the scan
/// `t ↦ J(t e₁)`, restricted to `‖t e₁‖ ≤ ρ`.
pub fn initial_guess(grid: &RadialGrid, params: &ProblemParams, rho: f64) -> Result<RadialField> {
    let e1 = grid.first_eigenpair()?.vector;
    let unit = h1_norm(grid, e1.values());
    let t_max = rho / unit;
    let count = 600;
    let lo = (1e-300f64).ln().max(t_max.ln() - 600.0);
    let hi = t_max.ln();
    let mut best: Option<(f64, f64)> = None;
    let mut prev = f64::INFINITY;
    for k in 0..=count {
        let t = (lo + (hi - lo) * k as f64 / count as f64).exp();
        let j = energy_value(grid, params, e1.scaled(t).values());
        match best {
            Some((_, bj)) if j >= bj => {
                if j > prev && bj < 0.0 {
                    break;
                }
            }
            _ => best = Some((t, j)),
        }
        prev = j;
    }
    let (t, j) = best.expect("scan is non-empty");
    if !(j < 0.0) {
        return Err(Error::NoNegativeEnergy(j));
    }
    Ok(e1.scaled(t))
}

/// Minimises `J` over `{‖u‖ ≤ ρ}`: preconditioned gradient descent with
/// Armijo backtracking and radial projection, then a Newton polish.
pub fn find_local_min(
    grid: &RadialGrid,
    params: &ProblemParams,
    rho: f64,
    init: Option<&RadialField>,
    tol: f64,
) -> Result<SolveOutcome> {
    let n = grid.unknowns();
    let start = match init {
        Some(f) if f.len() == grid.node_count() && energy_value(grid, params, f.values()) < 0.0 => f.clone(),
        Some(f) if f.len() != grid.node_count() => {
            return Err(Error::LengthMismatch {
                expected: grid.node_count(),
                got: f.len(),
            })
        }
        _ => initial_guess(grid, params, rho)?,
    };
    let mut u = start.interior().to_vec();
    let project = |v: &mut Vec<f64>| {
        let nrm = h1_norm(grid, v);
        if nrm > rho {
            for x in v.iter_mut() {
                *x *= rho / nrm;
            }
        }
    };
    project(&mut u);
    let mut j = energy_value(grid, params, &u);
    let mut history = vec![j];
    let mut step = 1.0f64;
    let mut iterations = 0;
    for _ in 0..2000 {
        let g = weak_gradient(grid, params, &u);
        let d = grid.solve_stiffness(&g)?;
        let slope = dot(&g, &d);
        let res = slope.max(0.0).sqrt();
        if res <= 1e-3 * h1_norm(grid, &u) || res <= tol {
            break;
        }
        let mut s = (2.0 * step).min(1.0);
        let mut accepted = false;
        while s > 1e-12 {
            let mut trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - s * b).collect();
            project(&mut trial);
            let jt = energy_value(grid, params, &trial);
            if jt < j - 1e-4 * s * slope {
                u = trial;
                j = jt;
                history.push(j);
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        step = s;
    }
    let (u, res, newton_steps) = newton(grid, params, &u, tol, 60)?;
    let out = outcome(grid, params, SolveKind::LocalMin, u, res, iterations + newton_steps, history)?;
    debug_assert_eq!(out.field.len(), n + 1);
    if !(out.energy < 0.0) {
        return Err(Error::NoNegativeEnergy(out.energy));
    }
    if out.norm >= rho {
        return Err(Error::ConstraintActive { norm: out.norm, rho });
    }
    if !(out.residual <= tol) {
        return Err(Error::NoConvergence {
            what: "local minimisation",
            iterations: out.iterations,
        });
    }
    Ok(out)
}

/// `c_K = J(u₀)` for a local-minimum outcome.
pub fn least_energy_level(outcome: &SolveOutcome) -> Result<f64> {
    match outcome.kind {
        SolveKind::LocalMin => Ok(outcome.energy),
        SolveKind::MountainPass => Err(Error::Rejected(
            "least energy level needs the local minimiser".into(),
        )),
    }
}

/// `D(β) = J(u₀+βψ_ε) − J(u₀)` with `u₀` the piecewise-linear interpolant and
/// `ψ_ε` in closed form, integrated on panels aligned with both the grid and
/// the bubble scale.
pub struct RayEnergy {
    params: ProblemParams,
    weights: Vec<f64>,
    u0: Vec<f64>,
    psi: Vec<f64>,
    base: Vec<f64>,
    grad_psi: f64,
    cross: f64,
}

impl RayEnergy {
    pub fn new(grid: &RadialGrid, params: &ProblemParams, u0: &RadialField, spec: &BubbleSpec) -> Result<Self> {
        if spec.dim != grid.dim() || spec.dim != params.dim {
            return Err(Error::InvalidParameter("dimension mismatch".into()));
        }
        let support = 2.0 * spec.cutoff_radius;
        if support > grid.radius() {
            return Err(Error::InvalidParameter("cutoff support exceeds the domain".into()));
        }
        let omega = sphere_area(grid.dim())?;
        let n = grid.dim() as f64;
        let mut pts: Vec<f64> = grid.nodes().iter().copied().filter(|&r| r < support).collect();
        pts.extend(spec.breaks());
        let breaks = merge(pts);
        let (xs, ws) = PanelRule::new(8).points(&breaks);
        let mut weights = Vec::with_capacity(xs.len());
        let mut u0v = Vec::with_capacity(xs.len());
        let mut psi = Vec::with_capacity(xs.len());
        let (mut grad_psi, mut cross) = (0.0, 0.0);
        for (&r, &w) in xs.iter().zip(&ws) {
            let wt = omega * w * r.powf(n - 1.0);
            let (u, du) = grid.interpolate(u0, r);
            let dp = spec.derivative(r);
            grad_psi += wt * dp * dp;
            cross += wt * du * dp;
            weights.push(wt);
            u0v.push(u);
            psi.push(spec.value(r));
        }
        let base = u0v.iter().map(|&u| params.potential(u)).collect();
        Ok(Self {
            params: *params,
            weights,
            u0: u0v,
            psi,
            base,
            grad_psi,
            cross,
        })
    }

    /// `D(β)`.
    pub fn excess(&self, beta: f64) -> f64 {
        let mut nonlinear = 0.0;
        for i in 0..self.weights.len() {
            let v = self.u0[i] + beta * self.psi[i];
            nonlinear += self.weights[i] * (self.params.potential(v) - self.base[i]);
        }
        0.5 * beta * beta * self.grad_psi + beta * self.cross - nonlinear
    }

    /// `∫|∇ψ_ε|²` on the panels.
    pub fn gradient_integral(&self) -> f64 {
        self.grad_psi
    }
}

/// Maximiser of `β ↦ J(u₀+βψ_ε)` for one `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSup {
    pub eps: f64,
    pub beta: f64,
    /// `sup_β J(u₀+βψ_ε) − J(u₀)`.
    pub excess: f64,
    /// `c_K + excess`.
    pub sup_value: f64,
    /// Upper end of the search interval.
    pub beta_max: f64,
}

/// Natural scale `μ^{−(N−2)/4}` of the maximiser.
pub fn beta_scale(params: &ProblemParams) -> f64 {
    params.mu.powf(-(params.dim as f64 - 2.0) / 4.0)
}

/// Brackets the maximiser by marching up from `β = 0`, then refines it by
/// golden-section search.
pub fn beta_sup_scan(
    grid: &RadialGrid,
    params: &ProblemParams,
    u0: &SolveOutcome,
    spec: &BubbleSpec,
) -> Result<BetaSup> {
    let c_k = least_energy_level(u0)?;
    let ray = RayEnergy::new(grid, params, &u0.field, spec)?;
    let scale = beta_scale(params);
    let h = 0.05 * scale;
    let beta_max = 20.0 * scale;
    let mut prev = (0.0, ray.excess(0.0));
    let mut cur = (h, ray.excess(h));
    let mut lo = None;
    while cur.0 <= beta_max {
        let next = (cur.0 + h, ray.excess(cur.0 + h));
        if cur.1 >= prev.1 && cur.1 > next.1 {
            lo = Some((prev.0, next.0));
            break;
        }
        prev = cur;
        cur = next;
    }
    let (mut a, mut b) = lo.ok_or(Error::Bracketing(beta_max))?;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ray.excess(c), ray.excess(d));
    while (b - a) > 1e-10 * scale {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ray.excess(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ray.excess(d);
        }
    }
    let beta = 0.5 * (a + b);
    let excess = ray.excess(beta);
    Ok(BetaSup {
        eps: spec.eps,
        beta,
        excess,
        sup_value: c_k + excess,
        beta_max,
    })
}

/// The line-scan estimate over a sweep of `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupSweep {
    pub c_k: f64,
    pub threshold: f64,
    pub entries: Vec<BetaSup>,
    /// `threshold − max excess`; positive when every scan stays below `c_K + threshold`.
    pub margin: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Fixed interval `[½, 2]·μ^{−(N−2)/4}` the maximisers must stay in.
    pub beta_bounds: (f64, f64),
    pub holds: bool,
}

pub fn sup_sweep(
    grid: &RadialGrid,
    params: &ProblemParams,
    u0: &SolveOutcome,
    cutoff_radius: f64,
    eps_list: &[f64],
    s: f64,
) -> Result<SupSweep> {
    let c_k = least_energy_level(u0)?;
    let threshold = energy_gap_threshold(params, s);
    let entries = eps_list
        .par_iter()
        .map(|&eps| {
            let spec = BubbleSpec::new(params.dim, eps, cutoff_radius)?;
            beta_sup_scan(grid, params, u0, &spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = entries.iter().map(|e| e.excess).fold(f64::NEG_INFINITY, f64::max);
    let beta_min = entries.iter().map(|e| e.beta).fold(f64::INFINITY, f64::min);
    let beta_max = entries.iter().map(|e| e.beta).fold(f64::NEG_INFINITY, f64::max);
    let scale = beta_scale(params);
    let beta_bounds = (0.5 * scale, 2.0 * scale);
    let margin = threshold - worst;
    Ok(SupSweep {
        c_k,
        threshold,
        entries,
        margin,
        beta_min,
        beta_max,
        beta_bounds,
        holds: margin > 0.0 && beta_min >= beta_bounds.0 && beta_max <= beta_bounds.1,
    })
}

/// Endpoint `u₀ + β*ψ_ε` with `J ≤ J(u₀)` and norm beyond `ρ`.
pub fn choose_endpoint(
    grid: &RadialGrid,
    params: &ProblemParams,
    u0: &SolveOutcome,
    spec: &BubbleSpec,
    rho: f64,
) -> Result<(f64, RadialField)> {
    let psi = bubble_field(grid, spec)?;
    let mut beta = beta_scale(params);
    for _ in 0..200 {
        let end = u0.field.axpy(beta, &psi);
        if energy_value(grid, params, end.values()) <= u0.energy && h1_norm(grid, end.values()) > rho {
            return Ok((beta, end));
        }
        beta *= 1.2;
    }
    Err(Error::Bracketing(beta))
}

/// Settings of the deformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MountainPassConfig {
    pub path_points: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Hand over to Newton once the step orthogonal to the path is this small.
    pub ridge_tol: f64,
}

impl Default for MountainPassConfig {
    fn default() -> Self {
        Self {
            path_points: PATH_POINTS,
            tol: TOL_MP,
            max_iter: 3000,
            ridge_tol: 1e-4,
        }
    }
}

/// Candidate saddle and the final path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPassRun {
    pub outcome: SolveOutcome,
    pub path_energies: Vec<f64>,
    /// Path maximum after each deformation step.
    pub max_history: Vec<f64>,
    pub candidate_index: usize,
    pub deformation_steps: usize,
    /// Final path, endpoints included.
    #[serde(skip)]
    pub path: Vec<RadialField>,
}

impl MountainPassRun {
    /// First point where the path leaves `{‖u‖ < ρ}`, located by bisection on
    /// the crossing segment.
    pub fn sphere_crossing(&self, grid: &RadialGrid, rho: f64) -> Option<RadialField> {
        let norm = |u: &RadialField| h1_norm(grid, u.values());
        let k = self.path.iter().position(|u| norm(u) >= rho)?;
        if k == 0 {
            return Some(self.path[0].clone());
        }
        let (a, b) = (&self.path[k - 1], &self.path[k]);
        let diff = b.axpy(-1.0, a);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if norm(&a.axpy(mid, &diff)) < rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(a.axpy(hi, &diff))
    }
}

fn redistribute(grid: &RadialGrid, path: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let seg: Vec<f64> = path
        .windows(2)
        .map(|w| {
            let d: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            h1_norm(grid, &d)
        })
        .collect();
    let mut cum = vec![0.0];
    for s in &seg {
        cum.push(cum.last().unwrap() + s);
    }
    let total = *cum.last().unwrap();
    let p = path.len() - 1;
    let mut out = Vec::with_capacity(path.len());
    out.push(path[0].clone());
    let mut j = 0;
    for k in 1..p {
        let target = total * k as f64 / p as f64;
        while j + 1 < p && cum[j + 1] < target {
            j += 1;
        }
        let w = if seg[j] > 0.0 { (target - cum[j]) / seg[j] } else { 0.0 };
        out.push(path[j].iter().zip(&path[j + 1]).map(|(a, b)| (1.0 - w) * a + w * b).collect());
    }
    out.push(path[p].clone());
    out
}

fn path_energies(grid: &RadialGrid, params: &ProblemParams, path: &[Vec<f64>]) -> Vec<f64> {
    path.par_iter().map(|u| energy_value(grid, params, u)).collect()
}

/// Discrete mountain-pass deformation from the segment `u₀ → endpoint`.
///
/// Each step moves the highest interior point along the Sobolev gradient with
/// its component along the path removed, then re-spaces the points by arc
/// length unless that would raise the path maximum. Once the orthogonal step is
/// small the highest point climbs along the unstable Hessian direction while
/// descending across it, and Newton finishes.
pub fn mountain_pass(
    grid: &RadialGrid,
    params: &ProblemParams,
    u0: &SolveOutcome,
    endpoint: &RadialField,
    config: &MountainPassConfig,
) -> Result<MountainPassRun> {
    let p = config.path_points.max(4);
    let a = u0.field.interior().to_vec();
    let b = endpoint.interior().to_vec();
    let end_energy = energy_value(grid, params, &b);
    if end_energy > u0.energy {
        return Err(Error::Rejected("endpoint energy exceeds J(u0)".into()));
    }
    let mut path: Vec<Vec<f64>> = (0..=p)
        .map(|k| {
            let t = k as f64 / p as f64;
            a.iter().zip(&b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
        })
        .collect();
    let mut energies = path_energies(grid, params, &path);
    let floor = u0.energy.max(end_energy);
    let mut max_history = Vec::new();
    let mut steps = 0;
    for _ in 0..config.max_iter {
        let k = argmax_interior(grid, params, &path, &energies)?;
        let top = energies[k];
        if top <= floor {
            return Err(Error::PathCollapse(top));
        }
        max_history.push(top);
        let x = &path[k];
        let g = weak_gradient(grid, params, x);
        let v = grid.solve_stiffness(&g)?;
        let mut tau: Vec<f64> = path[k + 1].iter().zip(&path[k - 1]).map(|(a, b)| a - b).collect();
        let tn = h1_norm(grid, &tau);
        if tn > 0.0 {
            tau.iter_mut().for_each(|t| *t /= tn);
        }
        let along = dot(&tau, &g);
        let d: Vec<f64> = v.iter().zip(&tau).map(|(vi, ti)| vi - along * ti).collect();
        let dn2 = (dot(&v, &g) - along * along).max(0.0);
        if dn2.sqrt() <= config.ridge_tol {
            break;
        }
        let mut s = 1.0;
        let mut moved = None;
        while s > 1e-10 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - s * di).collect();
            let jt = energy_value(grid, params, &trial);
            if jt <= top - 1e-4 * s * dn2 {
                moved = Some((trial, jt));
                break;
            }
            s *= 0.5;
        }
        steps += 1;
        let Some((trial, jt)) = moved else { break };
        path[k] = trial;
        energies[k] = jt;
        let spaced = redistribute(grid, &path);
        let spaced_energies = path_energies(grid, params, &spaced);
        let old_max = energies[1..p].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let new_max = spaced_energies[1..p].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if new_max <= old_max {
            path = spaced;
            energies = spaced_energies;
        }
    }
    let k = argmax_interior(grid, params, &path, &energies)?;
    let (mut u, mut res, mut newton_steps) = newton(grid, params, &path[k], config.tol, 60)?;
    let mut climbed = path[k].clone();
    if !(res <= config.tol) {
        climbed = climb(grid, params, &path[k - 1], &path[k], &path[k + 1], 500)?;
        (u, res, newton_steps) = newton(grid, params, &climbed, config.tol, 60)?;
    }
    let ridge_residual = residual_norm(grid, params, &climbed)?;
    let out = outcome(
        grid,
        params,
        SolveKind::MountainPass,
        u,
        res,
        steps + newton_steps,
        max_history.clone(),
    )?;
    if !(out.residual <= config.tol) || !out.energy.is_finite() {
        return Err(Error::Stagnation {
            iterations: steps,
            residual: ridge_residual,
            energy: energy_value(grid, params, &climbed),
            morse_index: morse_index(grid, params, &RadialField::from_interior(&climbed))?,
        });
    }
    Ok(MountainPassRun {
        outcome: out,
        path_energies: energies,
        max_history,
        candidate_index: k,
        deformation_steps: steps,
        path: path.iter().map(|u| RadialField::from_interior(u)).collect(),
    })
}

/// Climbing-image iteration: descend along the Sobolev gradient orthogonal
/// to the path tangent and ascend along it, accepting steps that lower the
/// residual.
fn climb(
    grid: &RadialGrid,
    params: &ProblemParams,
    prev: &[f64],
    top: &[f64],
    next: &[f64],
    max_iter: usize,
) -> Result<Vec<f64>> {
    let mut tau: Vec<f64> = next.iter().zip(prev).map(|(a, b)| a - b).collect();
    let tn = h1_norm(grid, &tau);
    if !(tn > 0.0) {
        return Ok(top.to_vec());
    }
    tau.iter_mut().for_each(|t| *t /= tn);
    let lambda1 = grid.smallest_eigenvalue()?;
    let mut x = top.to_vec();
    let mut res = residual_norm(grid, params, &x)?;
    let mut s = 1.0f64;
    for it in 0..max_iter {
        if it % 5 == 0 {
            tau = unstable_direction(grid, params, lambda1, &x, &tau)?;
        }
        let g = weak_gradient(grid, params, &x);
        let v = grid.solve_stiffness(&g)?;
        let along = dot(&tau, &g);
        let d: Vec<f64> = v.iter().zip(&tau).map(|(vi, ti)| vi - 2.0 * along * ti).collect();
        s = (2.0 * s).min(1.0);
        let mut moved = false;
        while s > 1e-8 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - s * b).collect();
            let r = residual_norm(grid, params, &trial)?;
            if r < res {
                x = trial;
                res = r;
                moved = true;
                break;
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(x)
}

/// Eigenvector of the lowest eigenvalue of `K⁻¹H`, `H = K − M f'(x)`, by
/// shifted inverse iteration from `start`; normalised in the energy norm and
/// oriented like `start`.
fn unstable_direction(
    grid: &RadialGrid,
    params: &ProblemParams,
    lambda1: f64,
    x: &[f64],
    start: &[f64],
) -> Result<Vec<f64>> {
    let fp: Vec<f64> = x.iter().map(|&v| params.source_prime(v)).collect();
    let top = fp.iter().cloned().fold(0.0f64, f64::max);
    // Rayleigh quotients of K⁻¹H lie above 1 − max f'/λ₁.
    let sigma = 1.0 - top / lambda1 - 1.0;
    let mut a = grid.shifted_stiffness(&fp);
    let kmat = grid.stiffness_matrix();
    for (i, d) in a.diag.iter_mut().enumerate() {
        *d -= sigma * kmat.diag[i];
    }
    for (i, o) in a.off.iter_mut().enumerate() {
        *o -= sigma * kmat.off[i];
    }
    let mut y = start.to_vec();
    for _ in 0..30 {
        let ky = grid.stiffness_apply(&y);
        y = a.solve(&ky)?;
        let nrm = h1_norm(grid, &y);
        y.iter_mut().for_each(|v| *v /= nrm);
    }
    if grid.energy_of(&y.iter().zip(start).map(|(a, b)| a - b).collect::<Vec<_>>()) > 2.0 {
        y.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(y)
}

/// Highest interior point; ties go to the point with the larger residual.
fn argmax_interior(
    grid: &RadialGrid,
    params: &ProblemParams,
    path: &[Vec<f64>],
    energies: &[f64],
) -> Result<usize> {
    let p = path.len() - 1;
    let top = energies[1..p].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (1..p).filter(|&j| energies[j] == top).collect();
    if ties.len() == 1 {
        return Ok(ties[0]);
    }
    let mut best = (ties[0], f64::NEG_INFINITY);
    for j in ties {
        let r = residual_norm(grid, params, &path[j])?;
        if r > best.1 {
            best = (j, r);
        }
    }
    Ok(best.0)
}

/// Smallest sampled energy on the sphere `‖u‖ = ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereFloor {
    pub rho: f64,
    pub samples: usize,
    pub min_energy: f64,
}

/// Samples random combinations of the first ten eigenfunctions (coefficients
/// damped like `1/k`) plus the given directions, each scaled to norm `ρ`, then
/// runs projected gradient descent on the sphere from the lowest sample.
pub fn estimate_sphere_floor(
    grid: &RadialGrid,
    params: &ProblemParams,
    rho: f64,
    sample_count: usize,
    rng_seed: u64,
    directions: &[&RadialField],
) -> Result<SphereFloor> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be at least 1".into()));
    }
    let modes = grid.eigenpairs(10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = grid.unknowns();
    let to_rho = |u: &[f64]| -> Vec<f64> {
        let nrm = h1_norm(grid, u);
        u.iter().map(|x| x * rho / nrm).collect()
    };
    let mut best = (f64::INFINITY, Vec::new());
    let mut consider = |u: Vec<f64>| {
        let j = energy_value(grid, params, &u);
        if j < best.0 {
            best = (j, u);
        }
    };
    for _ in 0..sample_count {
        let mut u = vec![0.0; n];
        for (k, m) in modes.iter().enumerate() {
            let c: f64 = rng.gen_range(-1.0..1.0) / (k as f64 + 1.0);
            for (ui, mi) in u.iter_mut().zip(m.vector.interior()) {
                *ui += c * mi;
            }
        }
        consider(to_rho(&u));
    }
    for d in directions {
        consider(to_rho(d.interior()));
    }
    let min_energy = descend_on_sphere(grid, params, best.1, best.0, rho, 500)?;
    if !(min_energy > 0.0) {
        return Err(Error::SphereFloor(min_energy));
    }
    Ok(SphereFloor {
        rho,
        samples: sample_count + directions.len(),
        min_energy,
    })
}

/// Armijo descent along the Sobolev gradient projected onto the tangent space
/// of `{‖u‖ = ρ}`, retracting by rescaling.
fn descend_on_sphere(
    grid: &RadialGrid,
    params: &ProblemParams,
    mut u: Vec<f64>,
    mut j: f64,
    rho: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut s = 1.0f64;
    for _ in 0..max_iter {
        let g = weak_gradient(grid, params, &u);
        let v = grid.solve_stiffness(&g)?;
        let radial = dot(&u, &g) / (rho * rho);
        let d: Vec<f64> = v.iter().zip(&u).map(|(vi, ui)| vi - radial * ui).collect();
        let slope = dot(&d, &g);
        if !(slope > 1e-14 * j.abs().max(1.0)) {
            break;
        }
        s = (2.0 * s).min(1.0);
        let mut moved = false;
        while s > 1e-12 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - s * b).collect();
            let nrm = h1_norm(grid, &trial);
            let trial: Vec<f64> = trial.iter().map(|x| x * rho / nrm).collect();
            let jt = energy_value(grid, params, &trial);
            if jt < j - 1e-4 * s * slope {
                u = trial;
                j = jt;
                moved = true;
                break;
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(j)
}

/// Sign information of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_value: f64,
    /// Minimum over the nodes with `r ≤ R − h`.
    pub min_interior: f64,
    pub nonnegative: bool,
    pub strictly_positive: bool,
}

pub fn positivity_report(field: &RadialField) -> PositivityReport {
    let min_value = field.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let min_interior = field.interior().iter().cloned().fold(f64::INFINITY, f64::min);
    PositivityReport {
        min_value,
        min_interior,
        nonnegative: min_value >= -1e-10,
        strictly_positive: min_interior > 0.0,
    }
}

/// `c_M < c_K + (1/N) μ^{−(N−2)/2} S^{N/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapVerdict {
    pub c_m: f64,
    pub c_k: f64,
    pub threshold: f64,
    /// `c_K + threshold − c_M`.
    pub margin: f64,
    pub holds: bool,
}

pub fn verify_energy_gap(c_m: f64, c_k: f64, params: &ProblemParams, s: f64) -> Result<GapVerdict> {
    if c_m < 0.0 {
        return Err(Error::Rejected(format!(
            "mountain-pass level must be positive, got {c_m}"
        )));
    }
    let threshold = energy_gap_threshold(params, s);
    let margin = c_k + threshold - c_m;
    Ok(GapVerdict {
        c_m,
        c_k,
        threshold,
        margin,
        holds: margin > 0.0,
    })
}

/// `c_K < 0 < α̂ ≤ c_M < c_K + threshold`, each inequality separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyOrdering {
    pub c_k_negative: bool,
    pub floor_positive: bool,
    pub floor_below_c_m: bool,
    pub below_gap: bool,
}

impl EnergyOrdering {
    pub fn new(c_k: f64, alpha: f64, c_m: f64, threshold: f64) -> Self {
        Self {
            c_k_negative: c_k < 0.0,
            floor_positive: alpha > 0.0,
            floor_below_c_m: alpha <= c_m,
            below_gap: c_m < c_k + threshold,
        }
    }

    pub fn holds(&self) -> bool {
        self.c_k_negative && self.floor_positive && self.floor_below_c_m && self.below_gap
    }
}

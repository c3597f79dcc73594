//! Truncated Aubin–Talenti bubbles `ψ_ε = φ U_ε` and their integral asymptotics.
//!
//! Integrals use the closed-form profile on geometric Gauss–Legendre panels
//! rather than nodal samples: at the smallest swept `ε` the grid spacing near
//! `r = ε` is a sizeable fraction of `ε`, far too coarse for the `O(ε⁴)`
//! remainders. Quantities of the form `S^{N/2} + O(ε^k)` are evaluated as
//! excesses over the whole-space value directly, never by subtraction.

use crate::constants::{bubble_normalization, whole_space_integrals};
use crate::error::{Error, Result};
use crate::functional::{crit_exp, InequalityReport};
use crate::quadrature::{bubble_breaks, geometric, PanelRule};
use crate::radial::{sphere_area, RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default plateau radius of the cutoff.
pub const DEFAULT_CUTOFF_RADIUS: f64 = 0.2;

/// Smallest allowed sweep length.
pub const MIN_SWEEP: usize = 6;

/// Allowed deviation of a fitted exponent from its expected order.
pub const RATE_TOLERANCE: f64 = 0.1;

/// Allowed relative drift of the `ε²|log ε|` coefficient over the last decade.
pub const COEFFICIENT_DRIFT: f64 = 0.05;

/// `φ(r)`: 1 on `[0, ϱ]`, quintic smoothstep down to 0 on `[ϱ, 2ϱ]`.
pub fn cutoff(rho: f64, r: f64) -> f64 {
    let t = ((r - rho) / rho).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

pub fn cutoff_derivative(rho: f64, r: f64) -> f64 {
    let t = (r - rho) / rho;
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    -30.0 * t * t * (1.0 - t) * (1.0 - t) / rho
}

/// Bubble width, cutoff radius and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleSpec {
    pub dim: usize,
    pub eps: f64,
    pub cutoff_radius: f64,
}

impl BubbleSpec {
    pub fn new(dim: usize, eps: f64, cutoff_radius: f64) -> Result<Self> {
        sphere_area(dim)?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if !(cutoff_radius > 0.0 && cutoff_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff radius must be positive, got {cutoff_radius}"
            )));
        }
        Ok(Self {
            dim,
            eps,
            cutoff_radius,
        })
    }

    pub fn normalization(&self) -> f64 {
        bubble_normalization(self.dim)
    }

    fn exponent(&self) -> f64 {
        (self.dim as f64 - 2.0) / 2.0
    }

    /// `U_ε(r) = C_N (ε/(ε²+r²))^{(N−2)/2}`.
    pub fn profile(&self, r: f64) -> f64 {
        let e = self.eps;
        self.normalization() * (e / (e * e + r * r)).powf(self.exponent())
    }

    pub fn profile_derivative(&self, r: f64) -> f64 {
        let e = self.eps;
        -2.0 * self.exponent() * r / (e * e + r * r) * self.profile(r)
    }

    /// `ψ_ε(r)`.
    pub fn value(&self, r: f64) -> f64 {
        if r >= 2.0 * self.cutoff_radius {
            return 0.0;
        }
        cutoff(self.cutoff_radius, r) * self.profile(r)
    }

    /// `ψ_ε'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        let rho = self.cutoff_radius;
        if r >= 2.0 * rho {
            return 0.0;
        }
        cutoff_derivative(rho, r) * self.profile(r) + cutoff(rho, r) * self.profile_derivative(r)
    }

    /// Panels adapted to this bubble on `[0, 2ϱ]`.
    pub fn breaks(&self) -> Vec<f64> {
        bubble_breaks(self.eps, self.cutoff_radius)
    }
}

/// Nodal values of `ψ_ε`.
pub fn bubble_field(grid: &RadialGrid, spec: &BubbleSpec) -> Result<RadialField> {
    if 2.0 * spec.cutoff_radius > grid.radius() {
        return Err(Error::InvalidParameter(format!(
            "cutoff support 2*rho = {} exceeds the radius {}",
            2.0 * spec.cutoff_radius,
            grid.radius()
        )));
    }
    if spec.dim != grid.dim() {
        return Err(Error::InvalidParameter("bubble and grid dimensions differ".into()));
    }
    Ok(RadialField::from_fn(grid, |r| spec.value(r)))
}

/// Fails when the grid cannot resolve a bubble of width `eps`.
pub fn check_resolution(grid: &RadialGrid, eps: f64) -> Result<()> {
    let spacing = grid.spacing_at(eps);
    if spacing > eps {
        return Err(Error::UnderResolved { eps, spacing });
    }
    Ok(())
}

/// Whole-space `(∫|∇U_ε|², ∫U_ε^{2*})`; both equal `S^{N/2}`.
pub fn whole_space_bubble_identity(dim: usize, eps: f64) -> Result<(f64, f64)> {
    whole_space_integrals(dim, eps, 1e4 * eps)
}

/// `∫_{R^N} (1+|y|²)^{−(N+2)/2} dy` by radial quadrature with analytic tail.
pub fn unit_mass_integral(dim: usize) -> Result<f64> {
    let omega = sphere_area(dim)?;
    let n = dim as f64;
    let rule = PanelRule::default();
    let r_inf = 1e4;
    let mut breaks = vec![0.0];
    breaks.extend(geometric(1e-4, r_inf, 200));
    let body = rule.integrate(&breaks, |r| r.powf(n - 1.0) * (1.0 + r * r).powf(-(n + 2.0) / 2.0));
    // integrand ~ r^{−3} beyond r_inf
    let tail = 0.5 / (r_inf * r_inf);
    Ok(omega * (body + tail))
}

/// `ω_N ∫_0^{2ϱ} g(r) r^{N−1} dr` on the bubble panels.
fn radial_integral(spec: &BubbleSpec, rule: &PanelRule, g: impl Fn(f64) -> f64) -> f64 {
    let omega = sphere_area(spec.dim).expect("validated dimension");
    let n = spec.dim as f64;
    omega * rule.integrate(&spec.breaks(), |r| g(r) * r.powf(n - 1.0))
}

/// `∫ ψ_ε^p` without any restriction on `p`.
pub fn power_integral(spec: &BubbleSpec, p: f64) -> f64 {
    radial_integral(spec, &PanelRule::default(), |r| spec.value(r).powf(p))
}

/// `∫|∇ψ_ε|² − S^{N/2}`, computed as an excess over the whole-space value.
pub fn gradient_excess(spec: &BubbleSpec) -> f64 {
    let rule = PanelRule::default();
    let omega = sphere_area(spec.dim).expect("validated dimension");
    let n = spec.dim as f64;
    let rho = spec.cutoff_radius;
    let annulus = crate::quadrature::uniform(rho, 2.0 * rho, 33);
    let shell = rule.integrate(&annulus, |r| {
        (spec.derivative(r).powi(2) - spec.profile_derivative(r).powi(2)) * r.powf(n - 1.0)
    });
    let tail = rule.integrate_to_infinity(2.0 * rho, |r| spec.profile_derivative(r).powi(2) * r.powf(n - 1.0));
    omega * (shell - tail)
}

/// `∫ψ_ε^{2*} − S^{N/2}`, computed as an excess over the whole-space value.
pub fn critical_excess(spec: &BubbleSpec) -> f64 {
    let rule = PanelRule::default();
    let omega = sphere_area(spec.dim).expect("validated dimension");
    let n = spec.dim as f64;
    let p = crit_exp(spec.dim);
    let rho = spec.cutoff_radius;
    let annulus = crate::quadrature::uniform(rho, 2.0 * rho, 33);
    let shell = rule.integrate(&annulus, |r| {
        (cutoff(rho, r).powf(p) - 1.0) * spec.profile(r).powf(p) * r.powf(n - 1.0)
    });
    let tail = rule.integrate_to_infinity(2.0 * rho, |r| spec.profile(r).powf(p) * r.powf(n - 1.0));
    omega * (shell - tail)
}

/// Integrated quantities tracked across an `ε` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `∫|∇ψ_ε|² − S^{N/2}`
    GradExcess,
    /// `∫ψ_ε^{2*} − S^{N/2}`
    CritExcess,
    /// `∫ψ_ε`
    L1,
    /// `∫ψ_ε²`
    L2,
    /// `∫ψ_ε³` (N = 4)
    L3,
    /// `∫ψ_ε^{5/2}` (N = 4)
    L5Half,
    /// `∫ψ_ε^{2*−1}` (N = 3, 5)
    CritMinusOne,
    /// `∫ψ_ε^{2+2δ}` (N = 3, 5)
    Power2Delta,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::GradExcess => "grad_excess",
            Quantity::CritExcess => "crit_excess",
            Quantity::L1 => "l1",
            Quantity::L2 => "l2",
            Quantity::L3 => "l3",
            Quantity::L5Half => "l5half",
            Quantity::CritMinusOne => "crit_minus_one",
            Quantity::Power2Delta => "power_2_plus_2delta",
        }
    }

    /// Quantities checked in dimension `dim`.
    pub fn for_dim(dim: usize) -> &'static [Quantity] {
        if dim == 4 {
            &[
                Quantity::GradExcess,
                Quantity::L1,
                Quantity::L2,
                Quantity::L3,
                Quantity::CritExcess,
                Quantity::L5Half,
            ]
        } else {
            &[
                Quantity::GradExcess,
                Quantity::CritExcess,
                Quantity::L1,
                Quantity::CritMinusOne,
                Quantity::L2,
                Quantity::Power2Delta,
            ]
        }
    }

    /// Expected power of `ε`; `None` for `∫ψ_ε²` in dimension 4, which goes
    /// like `ε²|log ε|`.
    pub fn expected_order(&self, dim: usize, delta: Option<f64>) -> Option<f64> {
        let n = dim as f64;
        match (self, dim) {
            (Quantity::L2, 4) => None,
            (Quantity::GradExcess, _) => Some(n - 2.0),
            (Quantity::CritExcess, _) => Some(n),
            (Quantity::L1, 4) | (Quantity::L3, _) => Some(1.0),
            (Quantity::L1, _) | (Quantity::CritMinusOne, _) => Some((n - 2.0) / 2.0),
            (Quantity::L5Half, _) => Some(1.5),
            (Quantity::L2, 3) => Some(1.0),
            (Quantity::L2, _) => Some(2.0),
            (Quantity::Power2Delta, _) => delta.map(|d| 2.0 - (n - 2.0) * d),
        }
    }
}

/// Open interval of admissible `δ` for N = 3, 5.
pub fn delta_window(dim: usize) -> (f64, f64) {
    let n = dim as f64;
    let lower = ((4.0 - n) / (2.0 * (n - 2.0))).max(0.0);
    let upper = (6.0 - n) / (2.0 * (n - 2.0));
    (lower, upper)
}

/// Default `δ` inside the window.
pub fn default_delta(dim: usize) -> Option<f64> {
    match dim {
        3 => Some(1.0),
        5 => Some(0.1),
        _ => None,
    }
}

fn validate_delta(dim: usize, delta: Option<f64>) -> Result<Option<f64>> {
    if dim == 4 {
        return Ok(None);
    }
    let d = delta.ok_or_else(|| Error::InvalidParameter("delta is required for N = 3, 5".into()))?;
    let (lower, upper) = delta_window(dim);
    if !(d > lower && d < upper) {
        return Err(Error::DeltaOutsideWindow {
            delta: d,
            lower,
            upper,
            dim,
        });
    }
    Ok(Some(d))
}

/// Per-`ε` values of the dimension's quantity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleIntegrals {
    pub eps: f64,
    pub values: Vec<(Quantity, f64)>,
}

impl BubbleIntegrals {
    pub fn get(&self, q: Quantity) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == q).map(|(_, v)| *v)
    }
}

/// All integrals for one bubble. For N = 3, 5 `delta` must lie in [`delta_window`].
pub fn bubble_integrals(grid: &RadialGrid, spec: &BubbleSpec, delta: Option<f64>) -> Result<BubbleIntegrals> {
    if 2.0 * spec.cutoff_radius > grid.radius() {
        return Err(Error::InvalidParameter("cutoff support exceeds the domain".into()));
    }
    let delta = validate_delta(spec.dim, delta)?;
    let p = crit_exp(spec.dim);
    let values = Quantity::for_dim(spec.dim)
        .iter()
        .map(|&q| {
            let v = match q {
                Quantity::GradExcess => gradient_excess(spec),
                Quantity::CritExcess => critical_excess(spec),
                Quantity::L1 => power_integral(spec, 1.0),
                Quantity::L2 => power_integral(spec, 2.0),
                Quantity::L3 => power_integral(spec, 3.0),
                Quantity::L5Half => power_integral(spec, 2.5),
                Quantity::CritMinusOne => power_integral(spec, p - 1.0),
                Quantity::Power2Delta => power_integral(spec, 2.0 + 2.0 * delta.expect("validated")),
            };
            (q, v)
        })
        .collect();
    Ok(BubbleIntegrals { eps: spec.eps, values })
}

/// `count` values from `from` down to `to`, geometrically spaced.
pub fn eps_sweep(from: f64, to: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(from > to && to > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps sweep needs from > to > 0 and at least two values (from={from}, to={to}, count={count})"
        )));
    }
    let mut v = geometric(to, from, count);
    v.reverse();
    Ok(v)
}

/// Default sweep `ϱ·2^{-4}, …, ϱ·2^{-12}`.
pub fn default_eps_sweep(cutoff_radius: f64) -> Vec<f64> {
    (4..=12).map(|k| cutoff_radius * 2f64.powi(-k)).collect()
}

/// Integrals over a decreasing list of `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleSweep {
    pub dim: usize,
    pub cutoff_radius: f64,
    pub delta: Option<f64>,
    pub records: Vec<BubbleIntegrals>,
}

impl BubbleSweep {
    pub fn eps_list(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.eps).collect()
    }

    pub fn series(&self, q: Quantity) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.get(q)).collect()
    }
}

/// Evaluates every `ε` independently (in parallel) and keeps the input order.
pub fn run_sweep(
    grid: &RadialGrid,
    cutoff_radius: f64,
    eps_list: &[f64],
    delta: Option<f64>,
) -> Result<BubbleSweep> {
    if eps_list.len() < MIN_SWEEP {
        return Err(Error::SweepTooShort {
            required: MIN_SWEEP,
            got: eps_list.len(),
        });
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps values must be strictly decreasing".into()));
    }
    let dim = grid.dim();
    let records = eps_list
        .par_iter()
        .map(|&eps| {
            let spec = BubbleSpec::new(dim, eps, cutoff_radius)?;
            bubble_integrals(grid, &spec, delta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BubbleSweep {
        dim,
        cutoff_radius,
        delta,
        records,
    })
}

/// Least-squares slope and intercept of `log|v|` against `log ε`.
pub fn fit_power_law(eps: &[f64], values: &[f64]) -> (f64, f64) {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&xs, &ys)
}

/// Least-squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fitted rate of one quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub quantity: Quantity,
    pub expected: Option<f64>,
    /// Fitted exponent of `ε`, or the fitted coefficient `d` for the
    /// `ε²|log ε|` quantity.
    pub fitted: f64,
    pub intercept: f64,
    /// Leading coefficient where one is reported (`d` in `d ε² |log ε|` or `d ε²`).
    pub coefficient: Option<f64>,
    /// Relative change of `coefficient` between the full sweep and its last decade.
    pub drift: Option<f64>,
    pub pass: bool,
}

/// Fitted exponents with pass/fail against the expected orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub dim: usize,
    pub delta: Option<f64>,
    pub fits: Vec<RateFit>,
}

impl RateTable {
    pub fn all_pass(&self) -> bool {
        self.fits.iter().all(|f| f.pass)
    }

    pub fn get(&self, q: Quantity) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.quantity == q)
    }
}

fn last_decade(eps: &[f64]) -> usize {
    let smallest = *eps.last().expect("non-empty");
    eps.iter().position(|&e| e <= 10.0 * smallest).unwrap_or(0)
}

fn check_monotone(q: Quantity, eps: &[f64], values: &[f64]) -> Result<()> {
    for k in 1..values.len() {
        if !(values[k].abs() < values[k - 1].abs()) || !values[k].is_finite() {
            return Err(Error::NonMonotone {
                quantity: q.label().to_string(),
                eps: eps[k],
            });
        }
    }
    Ok(())
}

/// `value/ε² ≈ d·g(ε) + c`; returns `d`.
/// Slope and intercept of `v/ε²` against `g(ε)`.
fn coefficient_fit(eps: &[f64], values: &[f64], g: impl Fn(f64) -> f64) -> (f64, f64) {
    let xs: Vec<f64> = eps.iter().map(|&e| g(e)).collect();
    let ys: Vec<f64> = eps.iter().zip(values).map(|(e, v)| v / (e * e)).collect();
    linear_fit(&xs, &ys)
}

/// Log–log regression of every quantity in the sweep.
pub fn rate_regression(sweep: &BubbleSweep) -> Result<RateTable> {
    let eps = sweep.eps_list();
    if eps.len() < MIN_SWEEP {
        return Err(Error::SweepTooShort {
            required: MIN_SWEEP,
            got: eps.len(),
        });
    }
    let tail = last_decade(&eps);
    let mut fits = Vec::new();
    for &q in Quantity::for_dim(sweep.dim) {
        let values = sweep.series(q);
        check_monotone(q, &eps, &values)?;
        let expected = q.expected_order(sweep.dim, sweep.delta);
        let fit = if q == Quantity::L2 && sweep.dim == 4 {
            let g = |e: f64| e.ln().abs();
            let (d_full, intercept) = coefficient_fit(&eps, &values, g);
            let (d_tail, _) = coefficient_fit(&eps[tail..], &values[tail..], g);
            let drift = (d_tail / d_full - 1.0).abs();
            RateFit {
                quantity: q,
                expected,
                fitted: d_full,
                intercept,
                coefficient: Some(d_full),
                drift: Some(drift),
                pass: d_full > 0.0 && drift <= COEFFICIENT_DRIFT,
            }
        } else {
            let (slope, intercept) = fit_power_law(&eps, &values);
            let (coefficient, drift) = if q == Quantity::L2 && sweep.dim == 5 {
                let d_full = coefficient_fit(&eps, &values, |e| e).1;
                let d_tail = coefficient_fit(&eps[tail..], &values[tail..], |e| e).1;
                (Some(d_full), Some((d_tail / d_full - 1.0).abs()))
            } else {
                (None, None)
            };
            let exp = expected.ok_or_else(|| Error::InvalidParameter("delta is required for N = 3, 5".into()))?;
            let coeff_ok = match (coefficient, drift) {
                (Some(d), Some(dr)) => d > 0.0 && dr <= COEFFICIENT_DRIFT,
                _ => true,
            };
            RateFit {
                quantity: q,
                expected,
                fitted: slope,
                intercept,
                coefficient,
                drift,
                pass: (slope - exp).abs() <= RATE_TOLERANCE && coeff_ok,
            }
        };
        fits.push(fit);
    }
    Ok(RateTable {
        dim: sweep.dim,
        delta: sweep.delta,
        fits,
    })
}

/// Both sides of the logarithmic decomposition inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionMargin {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; nonnegative when the inequality holds.
    pub margin: f64,
}

fn sample_weight(spec: &BubbleSpec, rule: &PanelRule, w: &dyn Fn(f64) -> f64) -> Result<()> {
    let (xs, _) = rule.points(&spec.breaks());
    for r in xs {
        if !(w(r) > 0.0) {
            return Err(Error::NonPositiveWeight(r));
        }
    }
    Ok(())
}

/// Checks, for a positive weight `w`,
///
/// `∫(w+βψ)² log(w+βψ)² − ∫w² log w² − 2β∫wψ log w²  ≤  RHS`
///
/// with `RHS = (8/e)β²∫w^{1/2}ψ² + (8/e)β^{5/2}∫ψ^{5/2} + 2β∫wψ + 6β²∫ψ²`
/// for N = 4 and
/// `RHS = (2/(eδ))β²∫w^{2δ}ψ² + (2/(eδ))β^{2+2δ}∫ψ^{2+2δ} + 2β∫wψ + 6β²∫ψ²`
/// for N = 3, 5.
pub fn check_log_decomposition(
    spec: &BubbleSpec,
    w: &dyn Fn(f64) -> f64,
    beta: f64,
    delta: Option<f64>,
) -> Result<DecompositionMargin> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let rule = PanelRule::default();
    sample_weight(spec, &rule, w)?;
    let e = std::f64::consts::E;
    let xl = |t: f64| if t > 0.0 { t * t * (t * t).ln() } else { 0.0 };
    let lhs = radial_integral(spec, &rule, |r| {
        let (wr, pr) = (w(r), spec.value(r));
        xl(wr + beta * pr) - xl(wr) - 2.0 * beta * wr * pr * (wr * wr).ln()
    });
    let (c, weight_pow, extra) = if spec.dim == 4 {
        (8.0 / e, 0.5, 0.5)
    } else {
        let d = delta.ok_or_else(|| Error::InvalidParameter("delta is required for N = 3, 5".into()))?;
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {d}")));
        }
        (2.0 / (e * d), 2.0 * d, 2.0 * d)
    };
    let rhs = radial_integral(spec, &rule, |r| {
        let (wr, pr) = (w(r), spec.value(r));
        c * beta * beta * wr.powf(weight_pow) * pr * pr
            + c * beta.powf(2.0 + extra) * pr.powf(2.0 + extra)
            + 2.0 * beta * wr * pr
            + 6.0 * beta * beta * pr * pr
    });
    Ok(DecompositionMargin {
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

/// `∫wψ^{2*−1}` against `½ C_N^{2*−1} w(0) ε^{(N−2)/2} ∫_{R^N}(1+|y|²)^{−(N+2)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBound {
    pub eps: f64,
    pub integral: f64,
    pub leading: f64,
    /// `integral − leading`.
    pub margin: f64,
    /// `margin / ε^{(N+2)/2}`; bounded below across a sweep.
    pub scaled_margin: f64,
}

pub fn check_mass_lower_bound(spec: &BubbleSpec, w: &dyn Fn(f64) -> f64) -> Result<MassBound> {
    let rule = PanelRule::default();
    sample_weight(spec, &rule, w)?;
    let w0 = w(0.0);
    let half = 0.5 * w0;
    let min_plateau = crate::quadrature::uniform(0.0, spec.cutoff_radius, 401)
        .into_iter()
        .map(|r| w(r))
        .fold(f64::INFINITY, f64::min);
    if min_plateau < half {
        return Err(Error::HalfValueCondition {
            min: min_plateau,
            half,
        });
    }
    let n = spec.dim as f64;
    let p = crit_exp(spec.dim);
    let integral = radial_integral(spec, &rule, |r| w(r) * spec.value(r).powf(p - 1.0));
    let leading =
        0.5 * spec.normalization().powf(p - 1.0) * w0 * spec.eps.powf((n - 2.0) / 2.0) * unit_mass_integral(spec.dim)?;
    let margin = integral - leading;
    Ok(MassBound {
        eps: spec.eps,
        integral,
        leading,
        margin,
        scaled_margin: margin / spec.eps.powf((n + 2.0) / 2.0),
    })
}

/// `(a+b)^{2*} ≥ a^{2*} + b^{2*} + 2*a^{2*−1}b + 2*ab^{2*−1}` for random `a, b ≥ 0`.
pub fn check_superadditivity(sample_count: usize, dim: usize, rng_seed: u64) -> Result<InequalityReport> {
    if dim != 3 && dim != 5 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be at least 1".into()));
    }
    let p = crit_exp(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut violations = 0;
    for i in 0..sample_count {
        let lu = |rng: &mut ChaCha8Rng| (rng.gen::<f64>() * 2.0 * 6.0 * std::f64::consts::LN_10 - 6.0 * std::f64::consts::LN_10).exp();
        let mut a = lu(&mut rng);
        let mut b = lu(&mut rng);
        match i % 32 {
            0 => a = 0.0,
            1 => b = 0.0,
            _ => {}
        }
        let lhs = (a + b).powf(p);
        let rhs = a.powf(p) + b.powf(p) + p * a.powf(p - 1.0) * b + p * a * b.powf(p - 1.0);
        if lhs < rhs * (1.0 - 1e-12) {
            violations += 1;
        }
    }
    Ok(InequalityReport {
        samples: sample_count,
        violations,
        max_abs_tlogt: None,
        argmax_t: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.2, 0.1), 1.0);
        assert_eq!(cutoff(0.2, 0.4), 0.0);
        assert!((cutoff(0.2, 0.3) - 0.5).abs() < 1e-14);
        assert_eq!(cutoff_derivative(0.2, 0.2), 0.0);
    }

    #[test]
    fn window_bounds() {
        assert_eq!(delta_window(3), (0.5, 1.5));
        let (lo, hi) = delta_window(5);
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn synthetic_rates() {
        let eps: Vec<f64> = (4..=12).map(|k| 0.2 * 2f64.powi(-k)).collect();
        let v: Vec<f64> = eps.iter().map(|e| 3.0 * e * e).collect();
        let (s, c) = fit_power_law(&eps, &v);
        assert!((s - 2.0).abs() < 1e-12 && (c.exp() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn superadditivity_rejects_four() {
        assert!(check_superadditivity(10, 4, 0).is_err());
    }
}

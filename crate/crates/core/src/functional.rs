//! The energy
//! `J(u) = ½∫|∇u|² − λ/2 ∫(u⁺)² − μ/2* ∫(u⁺)^{2*} − θ/2 ∫(u⁺)²(log(u⁺)² − 1)`,
//! its gradient, and the scalar inequalities used in the energy estimates.

use crate::error::{Error, Result};
use crate::radial::{RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `(λ, μ, θ)` and the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, lambda: f64, mu: f64, theta: f64) -> Result<Self> {
        if !(3..=5).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(theta < 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be negative, got {theta}")));
        }
        Ok(Self {
            dim,
            lambda,
            mu,
            theta,
        })
    }

    /// Critical exponent `2* = 2N/(N−2)`.
    pub fn crit_exp(&self) -> f64 {
        crit_exp(self.dim)
    }

    /// Primitive `F(s)` of the nonlinearity; zero for `s ≤ 0`.
    pub fn potential(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let p = self.crit_exp();
        let s2 = s * s;
        0.5 * self.lambda * s2 + self.mu / p * crit_power(self.dim, s) + 0.5 * self.theta * s2 * (s2.ln() - 1.0)
    }

    /// `f(s) = λs⁺ + μ(s⁺)^{2*−1} + θ s⁺ log (s⁺)²`.
    pub fn source(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.lambda * s + self.mu * crit_power(self.dim, s) / s + self.theta * 2.0 * s * s.ln()
    }

    /// `f'(s)` for `s > 0`, zero otherwise.
    pub fn source_prime(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let p = self.crit_exp();
        self.lambda + (p - 1.0) * self.mu * s.powf(p - 2.0) + self.theta * (2.0 * s.ln() + 2.0)
    }
}

/// `s^{2*}` for `s > 0`, avoiding `powf` where the exponent is an integer.
fn crit_power(dim: usize, s: f64) -> f64 {
    match dim {
        3 => s.powi(6),
        4 => s.powi(4),
        _ => s.powi(3) * s.cbrt(),
    }
}

pub fn crit_exp(dim: usize) -> f64 {
    2.0 * dim as f64 / (dim as f64 - 2.0)
}

/// `t² log t²`, continuously extended by 0 at `t = 0`.
pub fn xlogsq(t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidParameter(format!("xlogsq needs t >= 0, got {t}")));
    }
    Ok(xlogsq_unchecked(t))
}

fn xlogsq_unchecked(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        let t2 = t * t;
        t2 * t2.ln()
    }
}

/// Energy with its four stored integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    /// `∫|∇u|²`
    pub dirichlet: f64,
    /// `∫(u⁺)²`
    pub lambda_term: f64,
    /// `∫(u⁺)^{2*}`
    pub critical_term: f64,
    /// `∫(u⁺)²(log(u⁺)² − 1)`
    pub log_term: f64,
}

pub fn energy(grid: &RadialGrid, params: &ProblemParams, u: &RadialField) -> Result<EnergyReport> {
    let dirichlet = grid.dirichlet_energy(u)?;
    let p = params.crit_exp();
    let (mut l2, mut lp, mut lg) = (0.0, 0.0, 0.0);
    for (w, &v) in grid.weights().iter().zip(u.values()) {
        if v > 0.0 {
            l2 += w * v * v;
            lp += w * v.powf(p);
            lg += w * (xlogsq_unchecked(v) - v * v);
        }
    }
    let total = 0.5 * dirichlet
        - 0.5 * params.lambda * l2
        - params.mu / p * lp
        - 0.5 * params.theta * lg;
    Ok(EnergyReport {
        total,
        dirichlet,
        lambda_term: l2,
        critical_term: lp,
        log_term: lg,
    })
}

/// `J` alone, without the breakdown.
pub(crate) fn energy_value(grid: &RadialGrid, params: &ProblemParams, u: &[f64]) -> f64 {
    let mut nonlinear = 0.0;
    for (w, &v) in grid.weights().iter().zip(u) {
        nonlinear += w * params.potential(v);
    }
    0.5 * grid.energy_of(u) - nonlinear
}

/// Weak gradient `K u − M f(u)` on the unknowns.
pub(crate) fn weak_gradient(grid: &RadialGrid, params: &ProblemParams, u: &[f64]) -> Vec<f64> {
    let mut g = grid.stiffness_apply(u);
    for (i, gi) in g.iter_mut().enumerate() {
        *gi -= grid.weights()[i] * params.source(u[i]);
    }
    g
}

/// Strong-form residual `−Δu − f(u)`, zero at `r = R`.
pub fn gradient(grid: &RadialGrid, params: &ProblemParams, u: &RadialField) -> Result<RadialField> {
    if u.len() != grid.node_count() {
        return Err(Error::LengthMismatch {
            expected: grid.node_count(),
            got: u.len(),
        });
    }
    let g = weak_gradient(grid, params, u.values());
    let strong: Vec<f64> = g.iter().zip(grid.weights()).map(|(a, w)| a / w).collect();
    Ok(RadialField::new(grid, {
        let mut v = strong;
        v.push(0.0);
        v
    })?)
}

/// `g(t) = t²/2 − μ t⁴/4`.
pub fn g_profile(mu: f64, t: f64) -> f64 {
    0.5 * t * t - 0.25 * mu * t.powi(4)
}

/// Maximiser and maximum of [`g_profile`]: `(μ^{-1/2}, 1/(4μ))`.
pub fn g_max(mu: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    let t = mu.powf(-0.5);
    Ok((t, g_profile(mu, t)))
}

/// Outcome of a randomised inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `|t log t|` seen, when the check samples it.
    pub max_abs_tlogt: Option<f64>,
    /// Sample attaining `max_abs_tlogt`.
    pub argmax_t: Option<f64>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Relative slack for floating-point ties at equality cases.
const ROUNDING: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + ROUNDING * a.abs().max(b.abs()).max(1.0)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen::<f64>() * (hi.ln() - lo.ln()) + lo.ln()).exp()
}

/// `|t log t| ≤ bound` on `(0, 1]` and `log t ≤ t^δ/(eδ)` on `t > 0`.
///
/// `bound` is `1/e` for the true inequality; other values exist to exercise the
/// harness.
pub fn check_log_inequalities_with_bound(
    sample_count: usize,
    rng_seed: u64,
    bound: f64,
) -> Result<InequalityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let e = std::f64::consts::E;
    let mut violations = 0;
    let (mut best, mut best_t) = (0.0f64, 0.0);
    for _ in 0..sample_count {
        let t = log_uniform(&mut rng, 1e-12, 1.0);
        let v = (t * t.ln()).abs();
        if v > best {
            best = v;
            best_t = t;
        }
        if !le(v, bound) {
            violations += 1;
        }
        let s = log_uniform(&mut rng, 1e-12, 1e12);
        let delta = log_uniform(&mut rng, 1e-3, 10.0);
        let rhs = s.powf(delta) / (e * delta);
        if rhs.is_finite() && !le(s.ln(), rhs) {
            violations += 1;
        }
    }
    Ok(InequalityReport {
        samples: sample_count,
        violations,
        max_abs_tlogt: Some(best),
        argmax_t: Some(best_t),
    })
}

pub fn check_log_inequalities(sample_count: usize, rng_seed: u64) -> Result<InequalityReport> {
    check_log_inequalities_with_bound(sample_count, rng_seed, 1.0 / std::f64::consts::E)
}

/// Two-sided power bounds: for `k ∈ (0,1)`,
/// `½(aᵏ+bᵏ) ≤ (a+b)ᵏ ≤ aᵏ+bᵏ`; for `k ≥ 1`, `aᵏ+bᵏ ≤ (a+b)ᵏ ≤ 2^{k−1}(aᵏ+bᵏ)`.
pub fn check_power_inequalities(sample_count: usize, rng_seed: u64) -> Result<InequalityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut violations = 0;
    for i in 0..sample_count {
        let mut a = log_uniform(&mut rng, 1e-6, 1e6);
        let mut b = log_uniform(&mut rng, 1e-6, 1e6);
        match i % 16 {
            0 => a = 0.0,
            1 => b = 0.0,
            _ => {}
        }
        let small: f64 = rng.gen_range(1e-6..1.0);
        let large: f64 = rng.gen_range(1.0..8.0);
        for (k, lo_c, hi_c) in [(small, 0.5, 1.0), (large, 1.0, 2f64.powf(large - 1.0))] {
            let sum = a.powf(k) + b.powf(k);
            let mid = (a + b).powf(k);
            if !(le(lo_c * sum, mid) && le(mid, hi_c * sum)) {
                violations += 1;
            }
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
    use crate::radial::build_grid;

    #[test]
    fn xlogsq_values() {
        assert_eq!(xlogsq(0.0).unwrap(), 0.0);
        assert_eq!(xlogsq(1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((xlogsq(e.sqrt()).unwrap() - e).abs() < 1e-14);
        assert!(xlogsq(-1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ProblemParams::new(4, 0.0, 1.0, 0.0).is_err());
        assert!(ProblemParams::new(4, 0.0, 0.0, -1.0).is_err());
        assert!(matches!(
            ProblemParams::new(6, 0.0, 1.0, -1.0),
            Err(Error::UnsupportedDimension(6))
        ));
        assert_eq!(ProblemParams::new(3, 0.0, 1.0, -1.0).unwrap().crit_exp(), 6.0);
        assert!((ProblemParams::new(5, 0.0, 1.0, -1.0).unwrap().crit_exp() - 10.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = build_grid(4, 1.0, 64).unwrap();
        let p = ProblemParams::new(4, 1.0, 1.0, -1.0).unwrap();
        let z = RadialField::zeros(&g);
        let e = energy(&g, &p, &z).unwrap();
        assert_eq!(e.total, 0.0);
        let r = gradient(&g, &p, &z).unwrap();
        assert!(r.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_field_only_sees_dirichlet() {
        let g = build_grid(4, 1.0, 128).unwrap();
        let p = ProblemParams::new(4, 2.0, 1.0, -1.0).unwrap();
        let u = RadialField::from_fn(&g, |r| -(1.0 - r * r));
        let e = energy(&g, &p, &u).unwrap();
        assert_eq!(e.total, 0.5 * e.dirichlet);
    }

    #[test]
    fn g_max_closed_form() {
        assert_eq!(g_max(1.0).unwrap(), (1.0, 0.25));
        let (t, v) = g_max(4.0).unwrap();
        assert!((t - 0.5).abs() < 1e-15 && (v - 0.0625).abs() < 1e-15);
        let (t, v) = g_max(0.25).unwrap();
        assert!((t - 2.0).abs() < 1e-15 && (v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inequalities_small_run() {
        assert!(check_log_inequalities(10_000, 1).unwrap().passed());
        assert!(check_power_inequalities(10_000, 1).unwrap().passed());
        assert!(check_log_inequalities(0, 1).is_err());
    }
}

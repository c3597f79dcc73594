//! Composite Gauss–Legendre rules on caller-supplied panels.
//!
//! Radial integrands here vary on two scales (a bubble width and the domain
//! size), so panels are placed geometrically and the rule is applied per panel.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Default number of nodes per panel.
pub const DEFAULT_DEGREE: usize = 20;

/// A fixed Gauss–Legendre rule reused over many panels.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pairs: Vec<(f64, f64)>,
}

impl Default for PanelRule {
    fn default() -> Self {
        Self::new(DEFAULT_DEGREE)
    }
}

impl PanelRule {
    pub fn new(degree: usize) -> Self {
        let degree = NonZeroUsize::new(degree.max(1)).expect("degree is positive");
        let rule = GaussLegendre::new(degree);
        Self {
            pairs: rule.as_node_weight_pairs().to_vec(),
        }
    }

    pub fn degree(&self) -> usize {
        self.pairs.len()
    }

    /// Integrates `f` over the union of consecutive panels `breaks[k]..breaks[k+1]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            let mut s = 0.0;
            for &(x, wt) in &self.pairs {
                s += wt * f(mid + half * x);
            }
            total += half * s;
        }
        total
    }

    /// Flattened nodes and weights for the given panels.
    pub fn points(&self, breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity(breaks.len() * self.pairs.len());
        let mut ws = Vec::with_capacity(xs.capacity());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for &(x, wt) in &self.pairs {
                xs.push(mid + half * x);
                ws.push(half * wt);
            }
        }
        (xs, ws)
    }

    /// `∫_a^∞ f(r) dr` through the substitution `r = a / s`.
    ///
    /// Needs `f(r) = O(r^{-1-κ})` with `κ > 0`.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, a: f64, mut f: F) -> f64 {
        let mut breaks = vec![0.0];
        breaks.extend(geometric(1e-10, 1.0, 80));
        self.integrate(&breaks, |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let r = a / s;
            f(r) * a / (s * s)
        })
    }
}

/// `count` points from `a` to `b` (inclusive) in geometric progression.
pub fn geometric(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && count >= 2);
    let ratio = (b / a).ln() / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|k| a * (ratio * k as f64).exp()).collect();
    v[count - 1] = b;
    v
}

/// `count` points from `a` to `b` (inclusive), evenly spaced.
pub fn uniform(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let h = (b - a) / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|k| a + h * k as f64).collect();
    v[count - 1] = b;
    v
}

/// Sorted union of breakpoints with near-duplicates removed.
pub fn merge(mut pts: Vec<f64>) -> Vec<f64> {
    pts.retain(|x| x.is_finite());
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&q) if (p - q).abs() <= 1e-14 * p.abs().max(1e-300) => {}
            _ => out.push(p),
        }
    }
    out
}

/// Panels for integrands that concentrate at scale `eps` near the origin and
/// have kinks at `rho` and `2 rho`.
pub fn bubble_breaks(eps: f64, rho: f64) -> Vec<f64> {
    let lo = (eps * 1e-4).min(rho * 1e-6);
    let mut pts = vec![0.0];
    pts.extend(geometric(lo, rho, 160));
    pts.extend(uniform(rho, 2.0 * rho, 32));
    merge(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let rule = PanelRule::new(5);
        let v = rule.integrate(&[0.0, 0.5, 2.0], |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_tail() {
        let rule = PanelRule::default();
        let v = rule.integrate_to_infinity(2.0, |r| r.powi(-3));
        assert!((v - 0.125).abs() < 1e-14);
    }

    #[test]
    fn merge_dedups() {
        assert_eq!(merge(vec![1.0, 0.0, 1.0, 0.5]), vec![0.0, 0.5, 1.0]);
    }
}

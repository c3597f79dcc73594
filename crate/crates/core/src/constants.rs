//! Sobolev constant, admissible parameter regions, ball radii and the energy
//! gap below which compactness is available.

use crate::error::{Error, Result};
use crate::functional::{crit_exp, ProblemParams};
use crate::quadrature::{geometric, PanelRule};
use crate::radial::sphere_area;
use serde::{Deserialize, Serialize};

/// `C_N = [N(N−2)]^{(N−2)/4}`.
pub fn bubble_normalization(dim: usize) -> f64 {
    let n = dim as f64;
    (n * (n - 2.0)).powf((n - 2.0) / 4.0)
}

/// Whole-space `∫|∇U_ε|²` and `∫U_ε^{2*}` for the bubble centred at 0.
///
/// Integrates over `[0, r_inf]` and adds the leading-order tail.
pub fn whole_space_integrals(dim: usize, eps: f64, r_inf: f64) -> Result<(f64, f64)> {
    let omega = sphere_area(dim)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let n = dim as f64;
    let a = (n - 2.0) / 2.0;
    let c = bubble_normalization(dim);
    let p = crit_exp(dim);
    let rule = PanelRule::default();
    let mut breaks = vec![0.0];
    breaks.extend(geometric(1e-4 * eps, r_inf, 240));

    let du = |r: f64| -2.0 * a * c * eps.powf(a) * r * (eps * eps + r * r).powf(-a - 1.0);
    let u = |r: f64| c * (eps / (eps * eps + r * r)).powf(a);
    let grad = omega * rule.integrate(&breaks, |r| du(r).powi(2) * r.powf(n - 1.0));
    let crit = omega * rule.integrate(&breaks, |r| u(r).powf(p) * r.powf(n - 1.0));

    // |U'|² r^{N−1} ~ (N−2)² C² ε^{N−2} r^{1−N},  U^{2*} r^{N−1} ~ C^{2*} ε^N r^{−N−1}.
    let grad_tail = omega * (n - 2.0).powi(2) * c * c * eps.powf(n - 2.0) * r_inf.powf(2.0 - n) / (n - 2.0);
    let crit_tail = omega * c.powf(p) * eps.powf(n) * r_inf.powf(-n) / n;
    let relative_tail = (grad_tail / grad).max(crit_tail / crit);
    if relative_tail > 1e-2 {
        return Err(Error::TailTooLarge {
            cutoff: r_inf,
            relative_tail,
        });
    }
    Ok((grad + grad_tail, crit + crit_tail))
}

/// Best Sobolev constant from the bubble quotient
/// `S = ∫|∇U|² / (∫U^{2*})^{2/2*}`.
pub fn sobolev_constant(dim: usize) -> Result<f64> {
    let (grad, crit) = whole_space_integrals(dim, 1.0, 1e4)?;
    Ok(grad / crit.powf(2.0 / crit_exp(dim)))
}

/// `(1/N) μ^{−(N−2)/2} S^{N/2}`.
pub fn energy_gap_threshold(params: &ProblemParams, s: f64) -> f64 {
    let n = params.dim as f64;
    params.mu.powf(-(n - 2.0) / 2.0) * s.powf(n / 2.0) / n
}

/// Region memberships with the value of each defining left-hand side.
///
/// Regions that are not evaluated for the dimension carry `None` margins and
/// `false` membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub in_a1: bool,
    pub in_a2: bool,
    pub in_a3: bool,
    pub in_a4: bool,
    pub in_sigma1: bool,
    pub in_sigma2: bool,
    pub margin_a1: Option<f64>,
    pub margin_a2: Option<f64>,
    pub margin_a3: Option<f64>,
    pub margin_a4: Option<f64>,
    pub margin_sigma1: Option<f64>,
    pub margin_sigma2: Option<f64>,
}

/// Which region fixes the ball radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    A1,
    A2,
    A3,
    A4,
}

impl RegionVerdict {
    /// True when the parameters lie in A1 ∪ A2 (N = 4) or A3 ∪ A4 (N = 3, 5).
    pub fn admissible(&self) -> bool {
        self.in_a1 || self.in_a2 || self.in_a3 || self.in_a4
    }

    /// Preferred region: A2 over A1 and A4 over A3.
    pub fn region(&self) -> Option<Region> {
        if self.in_a2 {
            Some(Region::A2)
        } else if self.in_a1 {
            Some(Region::A1)
        } else if self.in_a4 {
            Some(Region::A4)
        } else if self.in_a3 {
            Some(Region::A3)
        } else {
            None
        }
    }

    pub fn describe(&self) -> String {
        let f = |name: &str, m: Option<f64>| m.map(|v| format!("{name}={v:.6}"));
        [
            f("A1", self.margin_a1),
            f("A2", self.margin_a2),
            f("A3", self.margin_a3),
            f("A4", self.margin_a4),
            f("Sigma1", self.margin_sigma1),
            f("Sigma2", self.margin_sigma2),
        ]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join(", ")
    }
}

/// Evaluates each region's inequality literally.
pub fn classify(params: &ProblemParams, s: f64, lambda1: f64, volume: f64) -> Result<RegionVerdict> {
    if !(s > 0.0 && lambda1 > 0.0 && volume > 0.0) {
        return Err(Error::InvalidParameter(
            "S, lambda1 and the volume must be positive".into(),
        ));
    }
    let n = params.dim as f64;
    let (lam, mu, th) = (params.lambda, params.mu, params.theta);
    let e = std::f64::consts::E;
    let below_l1 = (0.0..lambda1).contains(&lam);
    let ratio = (lambda1 - lam) / lambda1;
    let crit_part = mu.powf(-(n - 2.0) / 2.0) * s.powf(n / 2.0);

    let mut v = RegionVerdict {
        in_a1: false,
        in_a2: false,
        in_a3: false,
        in_a4: false,
        in_sigma1: false,
        in_sigma2: false,
        margin_a1: None,
        margin_a2: None,
        margin_a3: None,
        margin_a4: None,
        margin_sigma1: None,
        margin_sigma2: None,
    };
    if params.dim == 4 {
        let m1 = ratio * ratio / mu * s * s + e * th * volume;
        let m2 = s * s / mu + th * (1.0 - lam / th).exp() * volume;
        v.margin_a1 = below_l1.then_some(m1);
        v.margin_a2 = Some(m2);
        v.in_a1 = below_l1 && m1 >= 0.0;
        v.in_a2 = m2 >= 0.0;
    } else {
        let m3 = ratio.powf(n / 2.0) * crit_part + th * ((n - 2.0) / 2.0).exp() * volume;
        let m4 = crit_part + th * ((n - 2.0) / 2.0 - lam / th).exp() * volume;
        v.margin_a3 = below_l1.then_some(m3);
        v.margin_a4 = Some(m4);
        v.in_a3 = below_l1 && m3 >= 0.0;
        v.in_a4 = m4 >= 0.0;
    }
    let s1 = ratio.powf(n / 2.0) * crit_part + n / 2.0 * th * volume;
    let s2 = crit_part + n / 2.0 * th * (-lam / th).exp() * volume;
    v.margin_sigma1 = below_l1.then_some(s1);
    v.margin_sigma2 = Some(s2);
    v.in_sigma1 = below_l1 && s1 > 0.0;
    v.in_sigma2 = s2 > 0.0;
    Ok(v)
}

/// Radius of the ball holding the local minimiser for the given region.
pub fn rho_for(params: &ProblemParams, s: f64, lambda1: f64, region: Region) -> f64 {
    let (lam, mu) = (params.lambda, params.mu);
    let p = params.crit_exp();
    match region {
        Region::A2 => mu.powf(-0.5) * s,
        Region::A1 => ((lambda1 - lam) / (lambda1 * mu)).sqrt() * s,
        Region::A4 => (s.powf(p / 2.0) / mu).powf(1.0 / (p - 2.0)),
        Region::A3 => ((lambda1 - lam) / (lambda1 * mu) * s.powf(p / 2.0)).powf(1.0 / (p - 2.0)),
    }
}

/// Ball radius from the classification; errors outside every region.
pub fn rho(params: &ProblemParams, s: f64, lambda1: f64, verdict: &RegionVerdict) -> Result<f64> {
    let region = verdict
        .region()
        .ok_or_else(|| Error::OutsideRegion(verdict.describe()))?;
    Ok(rho_for(params, s, lambda1, region))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_in_four_dimensions() {
        assert!((bubble_normalization(4) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn threshold_scaling() {
        let s = 10.0;
        let p1 = ProblemParams::new(4, 0.0, 1.0, -1.0).unwrap();
        let p4 = ProblemParams::new(4, 0.0, 4.0, -1.0).unwrap();
        assert!((energy_gap_threshold(&p1, s) - 25.0).abs() < 1e-12);
        assert!((energy_gap_threshold(&p4, s) - 100.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn rho_closed_forms() {
        let p = ProblemParams::new(4, 5.0, 1.0, -0.1).unwrap();
        assert!((rho_for(&p, 3.0, 10.0, Region::A1) - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        let p3 = ProblemParams::new(3, 0.0, 1.0, -0.1).unwrap();
        assert!((rho_for(&p3, 2.0, 10.0, Region::A4) - 2f64.powf(0.75)).abs() < 1e-14);
    }
}

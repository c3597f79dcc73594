//! Radial reduction of the ball problem.
//!
//! Nodes follow `r_i = R (i/n)^{3/2}`. The stiffness matrix is the P1 finite
//! element matrix of `ω_N ∫ u'v' r^{N-1} dr`. Node weights are dual-cell
//! masses chosen so that `M^{-1} K` reproduces `-Δ` exactly on `1 - r²`; at the
//! origin this is the regularised row `2N (u_0 - u_1) / r_1²`, i.e. `-N u''(0)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Exponent of the power map that clusters nodes near the origin.
pub const GRADING: f64 = 1.5;

/// Smallest accepted node count.
pub const MIN_NODES: usize = 16;

/// Surface measure of the unit sphere in `R^dim`.
pub fn sphere_area(dim: usize) -> Result<f64> {
    match dim {
        3 => Ok(4.0 * PI),
        4 => Ok(2.0 * PI * PI),
        5 => Ok(8.0 * PI * PI / 3.0),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Symmetric tridiagonal matrix, factorised as `L D Lᵀ` without pivoting.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    fn pivots(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = self.diag[0];
        for i in 1..n {
            if d[i - 1] == 0.0 || !d[i - 1].is_finite() {
                return Err(Error::SingularPivot(i - 1));
            }
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] - l[i - 1] * self.off[i - 1];
        }
        if d[n - 1] == 0.0 || !d[n - 1].is_finite() {
            return Err(Error::SingularPivot(n - 1));
        }
        Ok((d, l))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let (d, l) = self.pivots()?;
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= l[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= d[i];
        }
        for i in (0..n - 1).rev() {
            y[i] -= l[i] * y[i + 1];
        }
        Ok(y)
    }

    /// Number of negative eigenvalues (Sylvester inertia of the pivots).
    pub fn negative_count(&self) -> Result<usize> {
        let (d, _) = self.pivots()?;
        Ok(d.iter().filter(|&&p| p < 0.0).count())
    }
}

/// Nodal values of a radial profile; the value at `r = R` is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadialField {
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::LengthMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        let last = *values.last().expect("non-empty");
        if last != 0.0 {
            return Err(Error::BoundaryValue(last));
        }
        Ok(Self { values })
    }

    /// Samples `f` at the nodes and pins the boundary value to zero.
    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        *values.last_mut().expect("non-empty") = 0.0;
        Self { values }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values at nodes `0..n`, i.e. without the Dirichlet node.
    pub fn interior(&self) -> &[f64] {
        &self.values[..self.values.len() - 1]
    }

    pub(crate) fn from_interior(interior: &[f64]) -> Self {
        let mut values = interior.to_vec();
        values.push(0.0);
        Self { values }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &RadialField) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }
}

/// Graded radial grid with dimension-weighted quadrature.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    stiffness: Vec<f64>,
}

/// Builds the grid with `node_count` nodes `0 = r_0 < … < r_n = radius`.
pub fn build_grid(dim: usize, radius: f64, node_count: usize) -> Result<RadialGrid> {
    let omega = sphere_area(dim)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if node_count < MIN_NODES {
        return Err(Error::InvalidParameter(format!(
            "node_count must be at least {MIN_NODES}, got {node_count}"
        )));
    }
    let n = node_count - 1;
    let nf = dim as f64;
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| radius * (i as f64 / n as f64).powf(GRADING))
        .collect();
    nodes[n] = radius;

    let mut shell = Vec::with_capacity(n);
    let mut flux = Vec::with_capacity(n);
    let mut stiffness = Vec::with_capacity(n);
    for j in 0..n {
        let (a, b) = (nodes[j], nodes[j + 1]);
        let h = b - a;
        let c = (b.powi(dim as i32) - a.powi(dim as i32)) / nf;
        shell.push(c);
        flux.push(c * (a + b) / h);
        stiffness.push(omega * c / (h * h));
    }
    let mut weights = vec![0.0; n + 1];
    weights[0] = flux[0] / (2.0 * nf);
    for i in 1..n {
        weights[i] = (flux[i] - flux[i - 1]) / (2.0 * nf);
    }
    let interior: f64 = weights[..n].iter().sum();
    weights[n] = radius.powi(dim as i32) / nf - interior;
    for w in &mut weights {
        *w *= omega;
    }
    Ok(RadialGrid {
        dim,
        radius,
        nodes,
        weights,
        stiffness,
    })
}

/// Eigenvalue with its eigenvector, normalised to unit weighted `L²` norm.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: RadialField,
    pub iterations: usize,
}

impl RadialGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights, already multiplied by the sphere area.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of unknowns (all nodes except `r = R`).
    pub fn unknowns(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Width of the cell containing `r`.
    pub fn spacing_at(&self, r: f64) -> f64 {
        let j = self.cell(r);
        self.nodes[j + 1] - self.nodes[j]
    }

    fn cell(&self, r: f64) -> usize {
        let n = self.nodes.len() - 1;
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&r).expect("finite radius"))
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Piecewise-linear interpolant of `u` and its derivative at `r`.
    pub fn interpolate(&self, u: &RadialField, r: f64) -> (f64, f64) {
        if r >= self.radius {
            return (0.0, 0.0);
        }
        let j = self.cell(r);
        let (a, b) = (self.nodes[j], self.nodes[j + 1]);
        let (ua, ub) = (u.values[j], u.values[j + 1]);
        let slope = (ub - ua) / (b - a);
        (ua + slope * (r - a), slope)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                got,
            });
        }
        Ok(())
    }

    /// `Σ_i w_i f(r_i)`, i.e. `ω_N ∫_0^R f(r) r^{N-1} dr` for radial `f`.
    pub fn quad(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f.len())?;
        Ok(self.weights.iter().zip(f).map(|(w, v)| w * v).sum())
    }

    /// Weighted inner product on the unknowns.
    pub fn mass_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.unknowns();
        (0..n).map(|i| self.weights[i] * a[i] * b[i]).sum()
    }

    /// `K u` on the unknowns; `u` may have `n` or `n + 1` entries (the last is
    /// treated as zero).
    pub fn stiffness_apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.unknowns();
        let at = |i: usize| if i < n { u[i] } else { 0.0 };
        let mut out = vec![0.0; n];
        for (j, &a) in self.stiffness.iter().enumerate() {
            let d = a * (at(j) - at(j + 1));
            out[j] += d;
            if j + 1 < n {
                out[j + 1] -= d;
            }
        }
        out
    }

    /// The stiffness matrix restricted to the unknowns.
    pub fn stiffness_matrix(&self) -> SymTridiag {
        let n = self.unknowns();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for (j, &a) in self.stiffness.iter().enumerate() {
            diag[j] += a;
            if j + 1 < n {
                diag[j + 1] += a;
                off[j] = -a;
            }
        }
        SymTridiag { diag, off }
    }

    /// `K - diag(w ⊙ shift)`, the Hessian shape of the energy.
    pub fn shifted_stiffness(&self, shift: &[f64]) -> SymTridiag {
        let mut m = self.stiffness_matrix();
        for (i, d) in m.diag.iter_mut().enumerate() {
            *d -= self.weights[i] * shift[i];
        }
        m
    }

    /// Discrete `-Δu`; zero at the Dirichlet node.
    pub fn laplacian_apply(&self, u: &RadialField) -> Result<RadialField> {
        self.check_len(u.len())?;
        let ku = self.stiffness_apply(&u.values);
        let interior: Vec<f64> = ku
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| k / w)
            .collect();
        Ok(RadialField::from_interior(&interior))
    }

    /// `ω_N ∫ u'(r)² r^{N-1} dr` for the piecewise-linear `u`.
    pub fn dirichlet_energy(&self, u: &RadialField) -> Result<f64> {
        self.check_len(u.len())?;
        Ok(self.energy_of(&u.values))
    }

    pub(crate) fn energy_of(&self, u: &[f64]) -> f64 {
        let n = self.unknowns();
        let at = |i: usize| if i < n { u[i] } else { 0.0 };
        self.stiffness
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let d = at(j) - at(j + 1);
                a * d * d
            })
            .sum()
    }

    /// Solves `K v = b` on the unknowns.
    pub fn solve_stiffness(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.stiffness_matrix().solve(b)
    }

    /// Riesz representative `v = K^{-1} M r` of a strong-form residual `r`.
    pub fn riesz(&self, residual: &RadialField) -> Result<Vec<f64>> {
        self.check_len(residual.len())?;
        let n = self.unknowns();
        let load: Vec<f64> = (0..n).map(|i| self.weights[i] * residual.values[i]).collect();
        self.solve_stiffness(&load)
    }

    /// `sqrt(∫|∇v|²)` where `-Δv = residual`, `v(R) = 0`.
    pub fn dual_norm(&self, residual: &RadialField) -> Result<f64> {
        let v = self.riesz(residual)?;
        Ok(self.energy_of(&v).max(0.0).sqrt())
    }

    /// Smallest Dirichlet eigenvalue of the discrete radial Laplacian.
    pub fn smallest_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenpairs(1)?.remove(0).value)
    }

    /// First eigenpair, with the eigenvector positive at the origin.
    pub fn first_eigenpair(&self) -> Result<Eigenpair> {
        Ok(self.eigenpairs(1)?.remove(0))
    }

    /// Lowest `count` eigenpairs by inverse iteration with weighted deflation.
    pub fn eigenpairs(&self, count: usize) -> Result<Vec<Eigenpair>> {
        const TOL: f64 = 1e-10;
        const MAX_ITER: usize = 5000;
        let n = self.unknowns();
        let k = self.stiffness_matrix();
        let mut found: Vec<Eigenpair> = Vec::with_capacity(count);
        for idx in 0..count {
            let mut v: Vec<f64> = self
                .nodes
                .iter()
                .take(n)
                .map(|&r| {
                    let x = r / self.radius;
                    (1.0 - x * x) * (1.0 + (idx as f64 + 1.0) * x).cos().abs().max(0.1)
                })
                .collect();
            let mut value = f64::NAN;
            let mut converged = None;
            for it in 0..MAX_ITER {
                for p in &found {
                    let pv = &p.vector.values;
                    let c = self.mass_dot(&v, pv);
                    for i in 0..n {
                        v[i] -= c * pv[i];
                    }
                }
                let norm = self.mass_dot(&v, &v).sqrt();
                for x in &mut v {
                    *x /= norm;
                }
                let rq = self.energy_of(&v);
                if (rq - value).abs() <= TOL * rq.abs() {
                    value = rq;
                    converged = Some(it);
                    break;
                }
                value = rq;
                let load: Vec<f64> = (0..n).map(|i| self.weights[i] * v[i]).collect();
                v = k.solve(&load)?;
            }
            let iterations = converged.ok_or(Error::NoConvergence {
                what: "inverse iteration",
                iterations: MAX_ITER,
            })?;
            if v[0] < 0.0 {
                for x in &mut v {
                    *x = -*x;
                }
            }
            found.push(Eigenpair {
                value,
                vector: RadialField::from_interior(&v),
                iterations,
            });
        }
        Ok(found)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_paraboloid_is_exact() {
        for dim in 3..=5 {
            let g = build_grid(dim, 1.0, 257).unwrap();
            let u = RadialField::from_fn(&g, |r| 1.0 - r * r);
            let lap = g.laplacian_apply(&u).unwrap();
            for v in lap.interior() {
                assert!((v - 2.0 * dim as f64).abs() < 1e-9 * 2.0 * dim as f64);
            }
        }
    }

    #[test]
    fn weights_positive() {
        let g = build_grid(5, 2.0, 64).unwrap();
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(build_grid(6, 1.0, 64), Err(Error::UnsupportedDimension(6))));
        assert!(build_grid(4, 1.0, 8).is_err());
        assert!(build_grid(4, -1.0, 64).is_err());
    }

    #[test]
    fn boundary_value_enforced() {
        let g = build_grid(4, 1.0, 16).unwrap();
        let mut v = vec![1.0; 16];
        assert!(RadialField::new(&g, v.clone()).is_err());
        v[15] = 0.0;
        assert!(RadialField::new(&g, v).is_ok());
    }
}

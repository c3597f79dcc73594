//! Closed forms computed independently of the library (Γ function, Bessel
//! zeros, Beta integrals) against the library's numerical values.

use bnlog::bubbles::{
    default_eps_sweep, rate_regression, run_sweep, unit_mass_integral, whole_space_bubble_identity, BubbleSpec,
    Quantity, DEFAULT_CUTOFF_RADIUS,
};
use bnlog::constants::{bubble_normalization, classify, energy_gap_threshold, rho, sobolev_constant, Region};
use bnlog::functional::g_max;
use bnlog::radial::sphere_area;
use bnlog::{build_grid, ProblemParams};
use statrs::function::beta::beta;
use statrs::function::gamma::gamma;
use std::f64::consts::{E, PI};

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn omega(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma(dim as f64 / 2.0)
}

fn sobolev(dim: usize) -> f64 {
    let n = dim as f64;
    PI * n * (n - 2.0) * (gamma(n / 2.0) / gamma(n)).powf(2.0 / n)
}

#[test]
fn sphere_area_matches_gamma_formula() {
    for dim in 3..=5 {
        assert!(rel(sphere_area(dim).unwrap(), omega(dim)) < 1e-14);
    }
}

#[test]
fn sobolev_constant_matches_gamma_formula() {
    for dim in 3..=5 {
        assert!(rel(sobolev_constant(dim).unwrap(), sobolev(dim)) < 1e-8, "N={dim}");
    }
}

#[test]
fn bubble_energies_equal_s_to_the_half_dimension() {
    for dim in 3..=5 {
        let (g, c) = whole_space_bubble_identity(dim, 1.0).unwrap();
        let target = sobolev(dim).powf(dim as f64 / 2.0);
        assert!(rel(g, target) < 1e-8 && rel(c, target) < 1e-8, "N={dim}: {g} {c} {target}");
    }
}

#[test]
fn bubble_solves_critical_equation() {
    // −U'' − (N−1)U'/r = U^{2*−1}, by central differences.
    for dim in 3..=5 {
        let n = dim as f64;
        let spec = BubbleSpec::new(dim, 0.3, 10.0).unwrap();
        let p = (n + 2.0) / (n - 2.0);
        for r in [0.05, 0.3, 1.0, 2.5] {
            let h = 1e-4;
            let (a, b, c) = (spec.profile(r - h), spec.profile(r), spec.profile(r + h));
            let lap = (a - 2.0 * b + c) / (h * h) + (n - 1.0) / r * (c - a) / (2.0 * h);
            assert!(rel(-lap, b.powf(p)) < 1e-5, "N={dim} r={r}");
        }
        assert!((bubble_normalization(dim) - (n * (n - 2.0)).powf((n - 2.0) / 4.0)).abs() < 1e-14);
    }
}

#[test]
fn unit_mass_integral_is_area_over_dimension() {
    // ∫_0^∞ r^{N−1}(1+r²)^{−(N+2)/2} dr = B(N/2, 1)/2 = 1/N.
    for dim in 3..=5 {
        let n = dim as f64;
        let oracle = omega(dim) * 0.5 * beta(n / 2.0, 1.0);
        assert!(rel(unit_mass_integral(dim).unwrap(), oracle) < 1e-6);
    }
    assert!(rel(unit_mass_integral(4).unwrap(), PI * PI / 2.0) < 1e-6);
}

#[test]
fn eigenvalues_approach_bessel_zeros() {
    let zeros = [(3, PI), (4, 3.831_705_970_207_512_3), (5, 4.493_409_457_909_064)];
    for (dim, j) in zeros {
        let l = build_grid(dim, 1.0, 4097).unwrap().smallest_eigenvalue().unwrap();
        assert!(rel(l, j * j) < 1e-5, "N={dim}: {l}");
        // Radius scaling λ₁(B_R) = λ₁(B_1)/R².
        let l2 = build_grid(dim, 2.0, 4097).unwrap().smallest_eigenvalue().unwrap();
        assert!(rel(4.0 * l2, l) < 1e-12);
    }
}

#[test]
fn four_dimensional_logarithmic_coefficient() {
    // N = 4: ∫_{B_ϱ} ψ_ε² = ω₄ C₄² ε² |log ε| + O(ε²), so d = 16π².
    let grid = build_grid(4, 1.0, 4097).unwrap();
    let sweep = run_sweep(&grid, DEFAULT_CUTOFF_RADIUS, &default_eps_sweep(DEFAULT_CUTOFF_RADIUS), None).unwrap();
    let fit = rate_regression(&sweep).unwrap();
    let d = fit.get(Quantity::L2).unwrap().coefficient.unwrap();
    assert!(rel(d, 16.0 * PI * PI) < 1e-3, "{d}");
}

#[test]
fn five_dimensional_square_coefficient() {
    // N = 5: ∫ψ_ε² → ε² ω₅ C₅² ∫_0^∞ r⁴(1+r²)^{−3} dr = ε² ω₅ C₅² B(5/2, 1/2)/2.
    let grid = build_grid(5, 1.0, 4097).unwrap();
    let sweep = run_sweep(&grid, DEFAULT_CUTOFF_RADIUS, &default_eps_sweep(DEFAULT_CUTOFF_RADIUS), Some(0.1)).unwrap();
    let fit = rate_regression(&sweep).unwrap();
    let d = fit.get(Quantity::L2).unwrap().coefficient.unwrap();
    let oracle = omega(5) * 15f64.powf(1.5) * 0.5 * beta(2.5, 0.5);
    assert!(rel(d, oracle) < 1e-3, "{d} vs {oracle}");
}

#[test]
fn default_region_margin_and_radius() {
    // A2 at N = 4: S²/μ + θ e^{1−λ/θ}|Ω| with |Ω| = π²/2.
    let p = ProblemParams::new(4, 0.0, 1.0, -0.5).unwrap();
    let grid = build_grid(4, 1.0, 4097).unwrap();
    let s = sobolev(4);
    let l1 = grid.smallest_eigenvalue().unwrap();
    let v = classify(&p, s, l1, grid.volume()).unwrap();
    let oracle = s * s - 0.5 * E * PI * PI / 2.0;
    assert!(rel(v.margin_a2.unwrap(), oracle) < 1e-10);
    assert!((oracle - 98.57).abs() < 0.01);
    assert_eq!(v.region(), Some(Region::A2));
    assert!(rel(rho(&p, s, l1, &v).unwrap(), s) < 1e-14);
    assert!(rel(grid.volume(), PI * PI / 2.0) < 1e-14);
}

#[test]
fn energy_gap_thresholds() {
    for (dim, mu) in [(3, 1.0), (4, 1.0), (4, 2.5), (5, 0.7)] {
        let n = dim as f64;
        let p = ProblemParams::new(dim, 0.0, mu, -1.0).unwrap();
        let oracle = sobolev(dim).powf(n / 2.0) / (n * mu.powf((n - 2.0) / 2.0));
        assert!(rel(energy_gap_threshold(&p, sobolev(dim)), oracle) < 1e-14);
    }
    let p = ProblemParams::new(4, 0.0, 1.0, -0.5).unwrap();
    assert!((energy_gap_threshold(&p, sobolev(4)) - 26.3189).abs() < 1e-4);
}

#[test]
fn quartic_profile_maximum() {
    for mu in [0.25, 1.0, 9.0] {
        let (t, g) = g_max(mu).unwrap();
        assert!(rel(t, 1.0 / mu.sqrt()) < 1e-15);
        assert!(rel(g, 1.0 / (4.0 * mu)) < 1e-14);
    }
}

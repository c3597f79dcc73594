//! Randomised invariants across the modules.

use bnlog::bubbles::{
    check_log_decomposition, cutoff, delta_window, DEFAULT_CUTOFF_RADIUS, power_integral, whole_space_bubble_identity, BubbleSpec,
};
use bnlog::constants::{bubble_normalization, classify, rho, sobolev_constant};
use bnlog::functional::{energy, g_max, g_profile, gradient, xlogsq};
use bnlog::radial::{sphere_area, RadialField};
use bnlog::report::RunManifest;
use bnlog::solvers::{choose_endpoint, find_local_min, mountain_pass, MountainPassConfig, SolveKind, SolveOutcome};
use bnlog::{build_grid, ProblemParams, RadialGrid};
use proptest::prelude::*;
use statrs::function::beta::beta;
use std::f64::consts::E;

fn smooth(grid: &RadialGrid, a: f64, b: f64, c: f64) -> RadialField {
    let r2 = grid.radius() * grid.radius();
    RadialField::from_fn(grid, |r| {
        let s = 1.0 - r * r / r2;
        a * s + b * s * s + c * s * (r * r / r2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_exact_on_quadratic(dim in 3usize..=5, nodes in 16usize..400, radius in 0.5f64..3.0) {
        let g = build_grid(dim, radius, nodes).unwrap();
        let u = RadialField::from_fn(&g, |r| radius * radius - r * r);
        let lap = g.laplacian_apply(&u).unwrap();
        // Cancellation in Ku/w grows like R²/h² near the centre.
        let h = g.nodes()[1];
        let tol = 1e-13 * radius * radius / (h * h);
        for v in lap.interior() {
            prop_assert!((v - 2.0 * dim as f64).abs() <= tol);
        }
    }

    #[test]
    fn weights_sum_to_volume(dim in 3usize..=5, nodes in 16usize..400, radius in 0.5f64..3.0) {
        let g = build_grid(dim, radius, nodes).unwrap();
        let vol = sphere_area(dim).unwrap() * radius.powi(dim as i32) / dim as f64;
        let sum: f64 = g.weights().iter().sum();
        prop_assert!((sum / vol - 1.0).abs() < 1e-12);
        prop_assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn summation_by_parts_and_dual_norm(
        dim in 3usize..=5, nodes in 16usize..400, a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
    ) {
        let g = build_grid(dim, 1.0, nodes).unwrap();
        let u = smooth(&g, a, b, c);
        let lap = g.laplacian_apply(&u).unwrap();
        let prod: Vec<f64> = lap.values().iter().zip(u.values()).map(|(x, y)| x * y).collect();
        let d = g.dirichlet_energy(&u).unwrap();
        prop_assert!((g.quad(&prod).unwrap() - d).abs() <= 1e-10 * d.max(1e-12));
        let dual = g.dual_norm(&lap).unwrap();
        prop_assert!((dual - d.sqrt()).abs() <= 1e-9 * d.sqrt().max(1e-12));
    }

    #[test]
    fn gradient_matches_central_differences(
        dim in 3usize..=5, a in 0.2f64..2.0, b in 0.0f64..1.0, pa in -1.0f64..1.0, pb in -1.0f64..1.0,
        lambda in -5.0f64..5.0, theta in -3.0f64..-0.01,
    ) {
        let g = build_grid(dim, 1.0, 200).unwrap();
        let p = ProblemParams::new(dim, lambda, 1.0, theta).unwrap();
        let u = RadialField::from_fn(&g, |r| {
            let s = 1.0 - r * r;
            if r < 1.0 { a * s + b * s * s + 1e-3 } else { 0.0 }
        });
        let phi = smooth(&g, pa, 0.0, pb);
        let grad = gradient(&g, &p, &u).unwrap();
        let prod: Vec<f64> = grad.values().iter().zip(phi.values()).map(|(x, y)| x * y).collect();
        let exact = g.quad(&prod).unwrap();
        let j = |t: f64| energy(&g, &p, &u.axpy(t, &phi)).unwrap().total;
        let err = |h: f64| ((j(h) - j(-h)) / (2.0 * h) - exact).abs();
        let (e1, e2) = (err(1e-2), err(1e-3));
        let scale = exact.abs().max(1.0);
        prop_assert!(e2 <= 1e-9 * scale || (e1 / e2).log10() >= 1.8, "e1={e1} e2={e2}");
    }

    #[test]
    fn only_positive_part_enters_nonlinearity(
        dim in 3usize..=5, shift in 0.0f64..3.0, seed_a in 0.1f64..1.0, seed_b in 0.1f64..1.0,
    ) {
        let g = build_grid(dim, 1.0, 120).unwrap();
        let p = ProblemParams::new(dim, 1.0, 1.0, -1.0).unwrap();
        let base = RadialField::from_fn(&g, |r| (seed_a - r) * (1.0 - r));
        let moved = RadialField::from_fn(&g, |r| {
            let v = (seed_a - r) * (1.0 - r);
            if v < 0.0 { v * (1.0 + shift) - seed_b * (1.0 - r) } else { v }
        });
        let e1 = energy(&g, &p, &base).unwrap();
        let e2 = energy(&g, &p, &moved).unwrap();
        let n1 = e1.total - 0.5 * e1.dirichlet;
        let n2 = e2.total - 0.5 * e2.dirichlet;
        prop_assert!((n1 - n2).abs() <= 1e-13 * n1.abs().max(1.0));
    }

    #[test]
    fn xlogsq_is_bounded(t in 0.0f64..=1.0) {
        prop_assert!(xlogsq(t).unwrap().abs() <= 2.0 / E * t * (1.0 + 1e-12));
    }

    #[test]
    fn potential_derivatives(dim in 3usize..=5, s in 0.05f64..3.0, lambda in -5.0f64..5.0, mu in 0.1f64..5.0, theta in -5.0f64..-0.01) {
        let p = ProblemParams::new(dim, lambda, mu, theta).unwrap();
        let h = 1e-5 * s;
        let df = (p.potential(s + h) - p.potential(s - h)) / (2.0 * h);
        prop_assert!((df - p.source(s)).abs() <= 1e-6 * p.source(s).abs().max(1.0));
        let dg = (p.source(s + h) - p.source(s - h)) / (2.0 * h);
        prop_assert!((dg - p.source_prime(s)).abs() <= 1e-5 * p.source_prime(s).abs().max(1.0));
    }

    #[test]
    fn g_max_is_a_maximum(mu in 1e-3f64..1e3) {
        let (t, g) = g_max(mu).unwrap();
        prop_assert!(g_profile(mu, t + 1e-6) < g);
        prop_assert!(g_profile(mu, t - 1e-6) < g);
    }

    #[test]
    fn region_margins_monotone(
        lambda in -20.0f64..14.0, mu in 0.1f64..5.0, theta in -50.0f64..-0.01, dt in 1e-3f64..1.0, ds in 1e-3f64..1.0,
    ) {
        let (s, l1, vol) = (10.26, 14.68, 4.93);
        let p = ProblemParams::new(4, lambda, mu, theta).unwrap();
        let v = classify(&p, s, l1, vol).unwrap();
        let th2 = (theta + dt).min(-1e-6);
        let up = classify(&ProblemParams::new(4, lambda, mu, th2).unwrap(), s, l1, vol).unwrap();
        let big = classify(&p, s + ds, l1, vol).unwrap();
        // d/dθ of θe^{1−λ/θ} is e^{1−λ/θ}(1 + λ/θ), positive while λ < |θ|.
        if lambda < th2.abs() {
            prop_assert!(up.margin_a2.unwrap() > v.margin_a2.unwrap());
        }
        if let (Some(a), Some(b)) = (up.margin_a1, v.margin_a1) {
            prop_assert!(a > b);
        }
        prop_assert!(big.margin_a2.unwrap() > v.margin_a2.unwrap());
        prop_assert_eq!(v, classify(&p, s, l1, vol).unwrap());
        let at_zero = classify(&ProblemParams::new(4, 0.0, mu, theta).unwrap(), s, l1, vol).unwrap();
        let (a1, a2) = (at_zero.margin_a1.unwrap(), at_zero.margin_a2.unwrap());
        prop_assert!((a1 - a2).abs() <= 1e-12 * a2.abs().max(1.0));
    }

    #[test]
    fn regions_lie_inside_sigma(
        dim in 3usize..=5, lambda in -20.0f64..20.0, mu in 0.1f64..5.0, theta in -50.0f64..-0.01,
    ) {
        let s = sobolev_constant(dim).unwrap();
        let g = build_grid(dim, 1.0, 64).unwrap();
        let l1 = g.smallest_eigenvalue().unwrap();
        let v = classify(&ProblemParams::new(dim, lambda, mu, theta).unwrap(), s, l1, g.volume()).unwrap();
        prop_assert!(!(v.in_a1 || v.in_a3) || v.in_sigma1);
        prop_assert!(!(v.in_a2 || v.in_a4) || v.in_sigma2);
    }

    #[test]
    fn cutoff_shape(rho in 0.01f64..1.0, x in 0.0f64..3.0) {
        let r = x * rho;
        let c = cutoff(rho, r);
        prop_assert!((0.0..=1.0).contains(&c));
        if r <= rho { prop_assert_eq!(c, 1.0); }
        if r >= 2.0 * rho { prop_assert_eq!(c, 0.0); }
        prop_assert!(cutoff(rho, r + 1e-3 * rho) <= c);
    }

    #[test]
    fn truncation_lowers_power_integrals(dim in 3usize..=5, eps in 1e-4f64..0.05, extra in 0.05f64..2.0) {
        let n = dim as f64;
        // ∫_{R^N} U_ε^p is finite once p(N−2) > N.
        let p = n / (n - 2.0) + extra;
        let spec = BubbleSpec::new(dim, eps, 0.2).unwrap();
        let k = p * (n - 2.0) / 2.0;
        let whole = sphere_area(dim).unwrap() * bubble_normalization(dim).powf(p)
            * eps.powf(n - k) * 0.5 * beta(n / 2.0, k - n / 2.0);
        prop_assert!(power_integral(&spec, p) <= whole * (1.0 + 1e-9));
    }

    #[test]
    fn decomposition_margins_nonnegative(
        dim in 3usize..=5, eps in 1e-4f64..0.02, beta_ in 0.05f64..5.0, c0 in 0.1f64..3.0, c1 in 0.0f64..1.0, frac in 0.05f64..0.95,
    ) {
        let (lo, hi) = delta_window(dim);
        let delta = (dim != 4).then(|| lo + frac * (hi - lo));
        let spec = BubbleSpec::new(dim, eps, 0.2).unwrap();
        let w = move |r: f64| c0 * (1.0 - c1 * r * r);
        let m = check_log_decomposition(&spec, &w, beta_, delta).unwrap();
        prop_assert!(m.margin >= 0.0, "{m:?}");
    }

    #[test]
    fn manifest_round_trip(seed in any::<u64>(), theta in -10.0f64..-1e-3, nodes in 16usize..10_000) {
        let m = RunManifest { rng_seed: seed, theta, node_count: nodes, ..RunManifest::default() };
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.hash(), m.hash());
        let other = RunManifest { rng_seed: seed.wrapping_add(1), ..m.clone() };
        prop_assert_ne!(other.hash(), m.hash());
    }

    #[test]
    fn outcome_json_is_bit_exact(vals in proptest::collection::vec(-1e6f64..1e6, 16..40), e in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let g = build_grid(3, 1.0, vals.len() + 1).unwrap();
        let mut v = vals.clone();
        v.push(0.0);
        let out = SolveOutcome {
            kind: SolveKind::LocalMin,
            field: RadialField::new(&g, v).unwrap(),
            energy: e,
            residual: e.abs() * 1e-17,
            iterations: 3,
            norm: e.abs().sqrt(),
            morse_index: 0,
            history: vals,
        };
        let back: SolveOutcome = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
        prop_assert_eq!(back.energy.to_bits(), out.energy.to_bits());
        prop_assert_eq!(back.norm.to_bits(), out.norm.to_bits());
        prop_assert_eq!(back, out);
    }
}

#[test]
fn whole_space_integrals_are_scale_free() {
    for dim in 3..=5 {
        let (g0, c0) = whole_space_bubble_identity(dim, 1.0).unwrap();
        for eps in [0.1, 0.5, 2.0, 10.0] {
            let (g, c) = whole_space_bubble_identity(dim, eps).unwrap();
            assert!((g / g0 - 1.0).abs() <= 1e-6 && (c / c0 - 1.0).abs() <= 1e-6, "N={dim} eps={eps}");
        }
    }
}

#[test]
fn constant_weight_quadrature_is_exact() {
    for dim in 3..=5 {
        let g = build_grid(dim, 1.0, 257).unwrap();
        let one = vec![1.0; g.node_count()];
        assert!((g.quad(&one).unwrap() / g.volume() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn morse_count_brackets_first_eigenvalue() {
    let g = build_grid(4, 1.0, 513).unwrap();
    let l = g.eigenpairs(2).unwrap();
    let n = g.unknowns();
    for (c, expected) in [(0.99 * l[0].value, 0), (0.5 * (l[0].value + l[1].value), 1), (1.01 * l[1].value, 2)] {
        assert_eq!(g.shifted_stiffness(&vec![c; n]).negative_count().unwrap(), expected);
    }
}

#[test]
fn local_minimisation_descends_monotonically() {
    for (dim, theta) in [(3, -1.5), (4, -5.0), (5, -10.0)] {
        let g = build_grid(dim, 1.0, 1025).unwrap();
        let p = ProblemParams::new(dim, 0.0, 1.0, theta).unwrap();
        let (s, l1) = (sobolev_constant(dim).unwrap(), g.smallest_eigenvalue().unwrap());
        let v = classify(&p, s, l1, g.volume()).unwrap();
        let out = find_local_min(&g, &p, rho(&p, s, l1, &v).unwrap(), None, 1e-8).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] < w[0]), "N={dim}");
        assert!(out.energy < 0.0 && out.morse_index == 0);
    }
}

#[test]
fn path_maximum_never_rises() {
    let g = build_grid(3, 1.0, 2049).unwrap();
    let p = ProblemParams::new(3, 0.0, 1.0, -1.5).unwrap();
    let (s, l1) = (sobolev_constant(3).unwrap(), g.smallest_eigenvalue().unwrap());
    let r = rho(&p, s, l1, &classify(&p, s, l1, g.volume()).unwrap()).unwrap();
    let u0 = find_local_min(&g, &p, r, None, 1e-8).unwrap();
    let spec = BubbleSpec::new(3, DEFAULT_CUTOFF_RADIUS / 16.0, DEFAULT_CUTOFF_RADIUS).unwrap();
    let (_, end) = choose_endpoint(&g, &p, &u0, &spec, r).unwrap();
    let run = mountain_pass(&g, &p, &u0, &end, &MountainPassConfig::default()).unwrap();
    assert!(run.max_history.len() > 1);
    assert!(run.max_history.windows(2).all(|w| w[1] <= w[0]));
}

use std::f64::consts::PI;

use proptest::prelude::*;
use trigzeros::zeros::{
    count_zeros, count_zeros_with, h_bar_delta_eps, h_delta_eps, kac_phi_delta, kac_phi_delta_eps,
    min_gap_a, psi_bar, CountOptions, Explicit, QuadSpec, Scaled, DEFAULT_TOL,
};
use trigzeros::{CoefficientLaw, Differentiable, Error, KacParams, SeedSpec, TrigPolynomial};

fn affine(slope: f64, offset: f64) -> Explicit<impl Fn(f64, usize) -> f64 + Sync> {
    Explicit::new(
        move |t: f64, k: usize| match k {
            0 => slope * t + offset,
            1 => slope,
            _ => 0.0,
        },
        [slope.abs(), 0.0, 0.0],
    )
}

fn cosine() -> Explicit<impl Fn(f64, usize) -> f64 + Sync> {
    let w = 2.0 * PI;
    Explicit::new(
        move |t: f64, k: usize| match k {
            0 => (w * t).cos(),
            1 => -w * (w * t).sin(),
            2 => -w * w * (w * t).cos(),
            _ => w * w * w * (w * t).sin(),
        },
        [w, w * w, w * w * w],
    )
}

/// Sign changes on a grid fine enough to separate the zeros of a certified count.
fn grid_count<F: Differentiable>(f: &F, n: usize) -> usize {
    let mut prev = f.value(0.0);
    let mut count = 0;
    for i in 1..=n {
        let v = f.value(i as f64 / n as f64);
        if v * prev < 0.0 {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}

#[test]
fn closed_form_examples() {
    let c = count_zeros(&cosine(), 0.0, 1.0, DEFAULT_TOL).unwrap();
    assert_eq!((c.count, c.certified), (2, true));
    assert!((c.min_abs_at_roots_gap - 0.5).abs() < 1e-9);

    let line = affine(1.0, -2.0);
    assert_eq!(count_zeros(&line, 0.0, 1.0, DEFAULT_TOL).unwrap().count, 0);
    assert!((min_gap_a(&line, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-9);
    assert!((min_gap_a(&affine(0.0, 1.0), 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);

    let half = affine(1.0, -0.5);
    assert!(
        (kac_phi_delta(&half, 0.0, 1.0, 0.1, QuadSpec::default()).unwrap() - 1.0).abs() < 1e-12
    );
    let p = KacParams::new(0.1, 0.05).unwrap();
    assert!(
        (kac_phi_delta_eps(&half, 0.0, 1.0, p, QuadSpec::default()).unwrap() - 1.25).abs() < 1e-12
    );
    assert_eq!(
        kac_phi_delta(&affine(0.0, 1.0), 0.0, 1.0, 0.5, QuadSpec::default()).unwrap(),
        0.0
    );

    let a = min_gap_a(&cosine(), 0.0, 1.0).unwrap();
    let phi = kac_phi_delta(&cosine(), 0.0, 1.0, 0.9 * a, QuadSpec::default()).unwrap();
    assert!((phi - 2.0).abs() < 1e-8, "{phi}");

    assert!(
        (psi_bar(&cosine(), 0.0, 1.0, KacParams::new(0.45, 0.1).unwrap()).unwrap() - 0.5).abs()
            < 1e-6
    );
    assert_eq!(
        psi_bar(&cosine(), 0.0, 1.0, KacParams::new(0.6, 0.1).unwrap()).unwrap(),
        1.0
    );
    assert_eq!(
        psi_bar(
            &affine(0.0, 1.0),
            0.0,
            1.0,
            KacParams::new(0.1, 0.1).unwrap()
        )
        .unwrap(),
        0.0
    );
}

#[test]
fn mollifier_examples() {
    let p = KacParams::new(1.0, 1.0).unwrap();
    assert_eq!(
        [
            h_delta_eps(0.0, p),
            h_delta_eps(1.5, p),
            h_delta_eps(-2.5, p)
        ],
        [1.0, 0.5, 0.0]
    );
    let p = KacParams::new(0.1, 0.1).unwrap();
    assert_eq!(h_bar_delta_eps(0.0, p), 1.0);
    assert!((h_bar_delta_eps(0.15, p) - 0.5).abs() < 1e-12);
    assert_eq!(h_bar_delta_eps(1.0, p), 0.0);
}

#[test]
fn endpoint_zero_is_rejected() {
    assert!(matches!(
        count_zeros(&affine(1.0, -0.5), 0.5, 1.0, DEFAULT_TOL),
        Err(Error::HypothesisViolation { .. })
    ));
}

#[test]
fn kac_formula_on_many_polynomials() {
    for j in 0..100u64 {
        let m = 1 + (j as usize % 20);
        let p = TrigPolynomial::random(CoefficientLaw::Gaussian, m, SeedSpec::new(77, j)).unwrap();
        let r = count_zeros(&p, 0.0, 1.0, DEFAULT_TOL).unwrap();
        assert!(r.certified);
        let phi = kac_phi_delta(
            &p,
            0.0,
            1.0,
            0.9 * r.min_abs_at_roots_gap,
            QuadSpec::default(),
        )
        .unwrap();
        assert!(
            (phi - r.count as f64).abs() <= 1e-6,
            "j={j} m={m}: {phi} vs {}",
            r.count
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn count_matches_dense_grid(m in 1usize..40, seed in any::<u64>()) {
        let p = TrigPolynomial::random(CoefficientLaw::UniformScaled, m, SeedSpec::new(seed, 0)).unwrap();
        let r = count_zeros(&p, 0.0, 1.0, DEFAULT_TOL).unwrap();
        prop_assume!(r.certified && r.min_abs_at_roots_gap > 1e-3);
        // with A_f > 1e-3 neighbouring zeros are far apart compared with the grid step
        prop_assert_eq!(r.count, grid_count(&p, 200_000));
    }

    #[test]
    fn refinement_is_monotone(m in 1usize..60, seed in any::<u64>(), law in prop::sample::select(CoefficientLaw::ALL.to_vec())) {
        let p = TrigPolynomial::random(law, m, SeedSpec::new(seed, 0)).unwrap();
        prop_assume!(p.value(0.0) != 0.0 && p.value(1.0) != 0.0);
        let coarse = count_zeros_with(&p, 0.0, 1.0, CountOptions { tol: 1e-6, compute_gap: false, ..CountOptions::default() }).unwrap();
        let fine = count_zeros_with(&p, 0.0, 1.0, CountOptions { tol: 1e-7, compute_gap: false, ..CountOptions::default() }).unwrap();
        if coarse.certified && fine.certified {
            prop_assert_eq!(coarse.count, fine.count);
        }
    }

    #[test]
    fn scale_equivariance(m in 2usize..20, seed in any::<u64>(), c in prop::sample::select(vec![2.0, -3.0, 0.25])) {
        let p = TrigPolynomial::random(CoefficientLaw::Gaussian, m, SeedSpec::new(seed, 0)).unwrap();
        let scaled = Scaled { f: &p, c };
        let r = count_zeros(&p, 0.0, 1.0, DEFAULT_TOL).unwrap();
        prop_assert_eq!(r.count, count_zeros(&scaled, 0.0, 1.0, DEFAULT_TOL).unwrap().count);
        let q = QuadSpec::default();
        let delta = 0.3;
        let phi = kac_phi_delta(&p, 0.0, 1.0, delta, q).unwrap();
        let phi_c = kac_phi_delta(&scaled, 0.0, 1.0, c.abs() * delta, q).unwrap();
        prop_assert!((phi - phi_c).abs() < 1e-9 * (1.0 + phi), "{phi} vs {phi_c}");
    }

    #[test]
    fn sandwich(m in 2usize..20, seed in any::<u64>(), delta in 0.02f64..0.8, eps in 0.001f64..0.5) {
        let p = TrigPolynomial::random(CoefficientLaw::LaplaceScaled, m, SeedSpec::new(seed, 0)).unwrap();
        let q = QuadSpec::default();
        let kp = KacParams::new(delta, eps).unwrap();
        let lo = kac_phi_delta(&p, 0.0, 1.0, delta, q).unwrap();
        let mid = kac_phi_delta_eps(&p, 0.0, 1.0, kp, q).unwrap();
        // Φ_{δ+ε} carries the prefactor 1/(2(δ+ε)), so rescale it to 1/(2δ)
        let hi = kac_phi_delta(&p, 0.0, 1.0, delta + eps, q).unwrap() * (delta + eps) / delta;
        let slack = 1e-10 * (1.0 + hi);
        prop_assert!(lo <= mid + slack && mid <= hi + slack, "{lo} {mid} {hi}");
    }

    #[test]
    fn counts_add_over_subintervals(m in 1usize..30, seed in any::<u64>(), split in 0.05f64..0.95) {
        let p = TrigPolynomial::random(CoefficientLaw::Gaussian, m, SeedSpec::new(seed, 0)).unwrap();
        prop_assume!(p.value(split).abs() > 1e-9);
        let whole = count_zeros(&p, 0.0, 1.0, DEFAULT_TOL).unwrap();
        let left = count_zeros(&p, 0.0, split, DEFAULT_TOL).unwrap();
        let right = count_zeros(&p, split, 1.0, DEFAULT_TOL).unwrap();
        prop_assume!(whole.certified && left.certified && right.certified);
        prop_assert_eq!(whole.count, left.count + right.count);
    }
}

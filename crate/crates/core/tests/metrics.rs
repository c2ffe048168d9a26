use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use trigzeros::metrics::{bootstrap_ci, fm_counts, w1_counts, Metric, ZeroCountSample};
use trigzeros::SeedSpec;

/// `∫ |F_a − F_b|` over the integers.
fn w1_cdf_oracle(a: &[u32], b: &[u32]) -> f64 {
    let top = *a.iter().chain(b).max().unwrap();
    let mut total = 0.0;
    for k in 0..top {
        let fa = a.iter().filter(|&&x| x <= k).count() as f64 / a.len() as f64;
        let fb = b.iter().filter(|&&x| x <= k).count() as f64 / b.len() as f64;
        total += (fa - fb).abs();
    }
    total
}

/// Maximizes `Σ w_i f_i` over the vertices of the bounded-Lipschitz polytope.
fn fm_vertex_oracle(a: &[u32], b: &[u32]) -> f64 {
    let support: Vec<u32> = a
        .iter()
        .chain(b)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let k = support.len();
    let w: Vec<f64> = support
        .iter()
        .map(|&u| {
            a.iter().filter(|&&x| x == u).count() as f64 / a.len() as f64
                - b.iter().filter(|&&x| x == u).count() as f64 / b.len() as f64
        })
        .collect();
    // constraints c·f ≤ d
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        cons.push((e.clone(), 1.0));
        e[i] = -1.0;
        cons.push((e, 1.0));
    }
    for i in 0..k.saturating_sub(1) {
        let d = (support[i + 1] - support[i]) as f64;
        let mut e = vec![0.0; k];
        e[i + 1] = 1.0;
        e[i] = -1.0;
        cons.push((e.clone(), d));
        cons.push((e.iter().map(|v| -v).collect(), d));
    }
    let mut best = f64::NEG_INFINITY;
    let n = cons.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let m = DMatrix::from_fn(k, k, |r, c| cons[idx[r]].0[c]);
        let rhs = DVector::from_fn(k, |r, _| cons[idx[r]].1);
        if let Some(f) = m.lu().solve(&rhs) {
            if cons
                .iter()
                .all(|(c, d)| c.iter().zip(f.iter()).map(|(x, y)| x * y).sum::<f64>() <= d + 1e-9)
            {
                best = best.max(w.iter().zip(f.iter()).map(|(x, y)| x * y).sum());
            }
        }
        // next k-subset of 0..n
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best
}

fn random_sample<R: Rng>(rng: &mut R, max_len: usize, max_val: u32) -> Vec<u32> {
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| rng.random_range(0..=max_val)).collect()
}

#[test]
fn w1_matches_cdf_integral() {
    let mut rng = SeedSpec::new(1, 0).rng();
    for _ in 0..500 {
        let a = random_sample(&mut rng, 40, 12);
        let b = random_sample(&mut rng, 40, 12);
        let got = w1_counts(&a, &b).unwrap();
        assert!((got - w1_cdf_oracle(&a, &b)).abs() < 1e-12, "{a:?} {b:?}");
    }
}

#[test]
fn fm_matches_vertex_enumeration() {
    let mut rng = SeedSpec::new(2, 0).rng();
    for _ in 0..400 {
        // support of at most four points
        let pool: Vec<u32> = (0..4).map(|_| rng.random_range(0..7)).collect();
        let a: Vec<u32> = (0..rng.random_range(1..9))
            .map(|_| pool[rng.random_range(0..4)])
            .collect();
        let b: Vec<u32> = (0..rng.random_range(1..9))
            .map(|_| pool[rng.random_range(0..4)])
            .collect();
        let got = fm_counts(&a, &b).unwrap();
        let want = fm_vertex_oracle(&a, &b);
        assert!((got - want).abs() < 1e-9, "{a:?} {b:?}: {got} vs {want}");
    }
}

#[test]
fn fm_below_w1_and_two() {
    let mut rng = SeedSpec::new(3, 0).rng();
    for _ in 0..100 {
        let a = random_sample(&mut rng, 200, 30);
        let b = random_sample(&mut rng, 200, 30);
        let fm = fm_counts(&a, &b).unwrap();
        let w1 = w1_counts(&a, &b).unwrap();
        assert!(fm <= w1.min(2.0) + 1e-9, "{fm} {w1}");
    }
}

#[test]
fn triangle_inequality() {
    let mut rng = SeedSpec::new(4, 0).rng();
    for _ in 0..100 {
        let a = random_sample(&mut rng, 60, 10);
        let b = random_sample(&mut rng, 60, 10);
        let c = random_sample(&mut rng, 60, 10);
        for m in [Metric::W1, Metric::FM] {
            let ab = m.distance(&a, &b).unwrap();
            let bc = m.distance(&b, &c).unwrap();
            let ac = m.distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9, "{m}");
        }
    }
}

proptest! {
    #[test]
    fn symmetry_and_identity(a in prop::collection::vec(0u32..15, 1..50), b in prop::collection::vec(0u32..15, 1..50)) {
        for m in [Metric::W1, Metric::FM] {
            prop_assert_eq!(m.distance(&a, &b).unwrap(), m.distance(&b, &a).unwrap());
            prop_assert!(m.distance(&a, &a).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn w1_zero_iff_same_multiset((a, b) in (1usize..8).prop_flat_map(|n| (prop::collection::vec(0u32..4, n), prop::collection::vec(0u32..4, n)))) {
        let mut sa = a.clone();
        let mut sb = b.clone();
        sa.sort();
        sb.sort();
        prop_assert_eq!(w1_counts(&a, &b).unwrap() == 0.0, sa == sb);
    }
}

#[test]
fn poisson_shift_coverage() {
    let mut covered = 0;
    for trial in 0..50u64 {
        let mut rng = SeedSpec::new(77, trial).rng();
        let p1 = Poisson::new(1.0).unwrap();
        let p2 = Poisson::new(1.5).unwrap();
        let a: Vec<u32> = (0..2000).map(|_| p1.sample(&mut rng) as u32).collect();
        let b: Vec<u32> = (0..2000).map(|_| p2.sample(&mut rng) as u32).collect();
        let est = bootstrap_ci(
            &ZeroCountSample::from_counts(a).unwrap(),
            &ZeroCountSample::from_counts(b).unwrap(),
            Metric::W1,
            200,
            0.95,
            SeedSpec::new(78, trial),
        )
        .unwrap();
        if est.ci_low <= 0.5 && 0.5 <= est.ci_high {
            covered += 1;
        }
    }
    assert!(covered >= 45, "covered {covered}/50");
}

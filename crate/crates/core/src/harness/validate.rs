use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::theta_sup_error;
use crate::coefficients::{mix_seed, moment_report, CoefficientLaw, SeedSpec};
use crate::error::Result;
use crate::gaussian::{
    cov_derivatives, gamma_m, kac_rice_mean, sinc_cov, CovDerivatives, GpSampler,
};
use crate::metrics::{fm_counts, w1_counts};
use crate::rtp::{theta_m, FnPath, TrigPolynomial};
use crate::zeros::{
    count_zeros, count_zeros_with, h_bar_delta_eps, h_delta_eps, kac_phi_delta, kac_phi_delta_eps,
    min_gap_a, CountOptions, Differentiable, KacParams, QuadSpec, DEFAULT_TOL,
};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    /// Fixed-width table, one line per suite.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<20} {:<6} detail", "suite", "status");
        for s in &self.suites {
            let _ = writeln!(
                out,
                "{:<20} {:<6} {}",
                s.name,
                if s.passed { "PASS" } else { "FAIL" },
                s.detail
            );
        }
        let passed = self.suites.iter().filter(|s| s.passed).count();
        let _ = writeln!(out, "{passed}/{} suites passed", self.suites.len());
        out
    }
}

fn suite(name: &str, checks: Vec<(bool, String)>) -> SuiteResult {
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.0)
        .map(|c| c.1.as_str())
        .collect();
    let detail = if failed.is_empty() {
        format!("{} checks", checks.len())
    } else {
        format!(
            "{} of {} checks failed: {}",
            failed.len(),
            checks.len(),
            failed.join("; ")
        )
    };
    SuiteResult {
        name: name.into(),
        passed: failed.is_empty(),
        detail,
    }
}

/// Covariance kernel of the limit process, or a deliberately wrong one
/// (twice the bandwidth) when the `"sinc"` fault is injected.
fn kernel(faulty: bool) -> impl Fn(f64, f64) -> CovDerivatives {
    move |s, t| {
        if faulty {
            let d = cov_derivatives(2.0 * s, 2.0 * t);
            CovDerivatives {
                r: d.r,
                dr_dt: 2.0 * d.dr_dt,
                dr_ds: 2.0 * d.dr_ds,
                d2r_dsdt: 4.0 * d.d2r_dsdt,
            }
        } else {
            cov_derivatives(s, t)
        }
    }
}

fn coefficients(seed: u64) -> Result<SuiteResult> {
    let n = 100_000;
    let mut checks = Vec::new();
    for (i, law) in CoefficientLaw::ALL.into_iter().enumerate() {
        let r = moment_report(law, n, SeedSpec::new(seed, i as u64))?;
        let count = (2 * n) as f64;
        let se_var = ((law.abs_moment(4) - 1.0) / count).sqrt();
        checks.push((
            r.mean.abs() < 5.0 / count.sqrt(),
            format!("{law} mean {:.5}", r.mean),
        ));
        checks.push((
            (r.variance - 1.0).abs() < 5.0 * se_var + 1e-12,
            format!("{law} variance {:.5}", r.variance),
        ));
    }
    Ok(suite("coefficients", checks))
}

fn theta_identity(seed: u64) -> Result<SuiteResult> {
    let mut checks = Vec::new();
    let mut rng = SeedSpec::new(seed, 0).rng();
    for (i, m) in [2usize, 8, 64, 512].into_iter().enumerate() {
        for k in 0..10u64 {
            let p = TrigPolynomial::random(
                CoefficientLaw::Gaussian,
                m,
                SeedSpec::new(seed, 1 + 10 * i as u64 + k),
            )?;
            let s = p.partial_sum();
            let scale = p.deriv_sup_bound(0);
            let mut worst = 0.0f64;
            for _ in 0..20 {
                let t: f64 = rng.random();
                worst = worst.max((theta_m(&s, m, t)? - p.value(t)).abs() / (1.0 + scale));
            }
            checks.push((worst <= 1e-10, format!("m={m} set {k}: {worst:.3e}")));
        }
    }
    Ok(suite("theta-identity", checks))
}

fn theta_convergence() -> Result<SuiteResult> {
    let smooth = FnPath(|u: f64| C64::new(u, u * u));
    let ms = [8usize, 16, 32, 64, 128, 256];
    let errs: Vec<f64> = ms
        .iter()
        .map(|&m| theta_sup_error(&smooth, m, 64))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for (w, m) in errs.windows(2).zip(&ms[1..]) {
        checks.push((
            w[1] <= 1.1 * w[0],
            format!("m={m}: {:.3e} after {:.3e}", w[1], w[0]),
        ));
    }
    checks.push((
        errs[5] < errs[0] / 4.0,
        format!("final {:.3e} vs initial {:.3e}", errs[5], errs[0]),
    ));
    let constant = FnPath(|_: f64| C64::new(-0.3, 2.0));
    for m in [8, 64] {
        let e = theta_sup_error(&constant, m, 1)?;
        checks.push((e <= 1e-12, format!("constant m={m}: {e:.3e}")));
    }
    Ok(suite("theta-convergence", checks))
}

fn covariance(seed: u64, faulty: bool) -> Result<SuiteResult> {
    let n = 20_000u64;
    let sampler = GpSampler::with_kernel(&[0.0, 0.3, 0.5], 0.0, kernel(faulty))?;
    let draws: Vec<(f64, f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let s = sampler.draw(SeedSpec::new(seed, j));
            (
                s.g_values[1] * s.g_values[1],
                s.g_derivs[1] * s.g_derivs[1],
                s.g_values[0] * s.g_values[2],
                0.0,
            )
        })
        .collect();
    let nf = n as f64;
    let var_g = draws.iter().map(|d| d.0).sum::<f64>() / nf;
    let var_dg = draws.iter().map(|d| d.1).sum::<f64>() / nf;
    let cov = draws.iter().map(|d| d.2).sum::<f64>() / nf;
    let rel = 4.0 * (2.0 / nf).sqrt();
    let mut checks = vec![
        (
            (var_g - 1.0).abs() < rel,
            format!("Var G(0.3) = {var_g:.4}"),
        ),
        (
            (var_dg / (PI * PI / 3.0) - 1.0).abs() < rel,
            format!("Var G'(0.3) = {var_dg:.4}"),
        ),
        (
            (cov - sinc_cov(0.0, 0.5)).abs() < 4.0 / nf.sqrt(),
            format!("Cov(G(0), G(0.5)) = {cov:.4}"),
        ),
    ];
    let k = kernel(faulty);
    let mut rng = SeedSpec::new(seed, n).rng();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        let fd = (k(s, t + h).r - k(s, t - h).r) / (2.0 * h);
        worst = worst.max((k(s, t).dr_dt - fd).abs());
    }
    checks.push((worst < 1e-6, format!("finite-difference gap {worst:.2e}")));
    Ok(suite("covariance", checks))
}

fn zero_count(seed: u64) -> Result<SuiteResult> {
    let mut checks = Vec::new();
    let c = crate::zeros::Explicit::new(
        |t: f64, k: usize| {
            let w = 2.0 * PI;
            match k {
                0 => (w * t).cos(),
                1 => -w * (w * t).sin(),
                2 => -w * w * (w * t).cos(),
                _ => w * w * w * (w * t).sin(),
            }
        },
        [2.0 * PI, 4.0 * PI * PI, 8.0 * PI * PI * PI],
    );
    let r = count_zeros(&c, 0.0, 1.0, DEFAULT_TOL)?;
    checks.push((
        r.count == 2 && r.certified,
        format!("cos(2πt) count {}", r.count),
    ));
    checks.push((
        (r.min_abs_at_roots_gap - 0.5).abs() < 1e-6,
        format!("cos(2πt) A = {:.6}", r.min_abs_at_roots_gap),
    ));
    let gaps: Vec<(usize, f64)> = (0..50u64)
        .into_par_iter()
        .map(|j| {
            let p = TrigPolynomial::random(
                CoefficientLaw::Gaussian,
                2 + (j as usize % 19),
                SeedSpec::new(seed, j),
            )?;
            let r = count_zeros(&p, 0.0, 1.0, DEFAULT_TOL)?;
            let phi = kac_phi_delta(
                &p,
                0.0,
                1.0,
                0.9 * r.min_abs_at_roots_gap,
                QuadSpec::default(),
            )?;
            Ok((r.count, (phi - r.count as f64).abs()))
        })
        .collect::<Result<_>>()?;
    let worst = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    checks.push((
        worst <= 1e-6,
        format!("Kac formula gap {worst:.2e} over 50 polynomials"),
    ));
    Ok(suite("zero-count", checks))
}

fn kac_sandwich(seed: u64) -> Result<SuiteResult> {
    let mut rng = SeedSpec::new(seed, 0).rng();
    let mut violations = 0;
    for _ in 0..20_000 {
        let p = KacParams::new(rng.random_range(0.01..1.0), rng.random_range(0.001..1.0))?;
        let (u, v): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let slack = 1e-12 * (1.0 + 1.0 / p.eps);
        if (h_delta_eps(u, p) - h_delta_eps(v, p)).abs() > (u - v).abs() / p.eps + slack
            || (h_bar_delta_eps(u, p) - h_bar_delta_eps(v, p)).abs() > (u - v).abs() / p.eps + slack
        {
            violations += 1;
        }
    }
    let mut functional = 0;
    for j in 0..20u64 {
        let f = TrigPolynomial::random(
            CoefficientLaw::Rademacher,
            5 + j as usize,
            SeedSpec::new(seed, 1 + j),
        )?;
        let p = KacParams::new(rng.random_range(0.05..0.8), rng.random_range(0.01..0.5))?;
        let q = QuadSpec::default();
        let lo = kac_phi_delta(&f, 0.0, 1.0, p.delta, q)?;
        let mid = kac_phi_delta_eps(&f, 0.0, 1.0, p, q)?;
        let hi = kac_phi_delta(&f, 0.0, 1.0, p.delta + p.eps, q)? * (p.delta + p.eps) / p.delta;
        let slack = 1e-10 * (1.0 + hi);
        if !(lo <= mid + slack && mid <= hi + slack) {
            functional += 1;
        }
    }
    Ok(suite(
        "kac-sandwich",
        vec![
            (
                violations == 0,
                format!("{violations} Lipschitz violations in 20000 pairs"),
            ),
            (
                functional == 0,
                format!("{functional} sandwich violations in 20 polynomials"),
            ),
        ],
    ))
}

fn metrics(seed: u64) -> Result<SuiteResult> {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let mut checks = vec![
        (
            close(w1_counts(&[0, 0], &[1, 1])?, 1.0),
            "W1 {0,0} vs {1,1}".to_string(),
        ),
        (
            close(w1_counts(&[0, 2], &[1, 1])?, 1.0),
            "W1 {0,2} vs {1,1}".to_string(),
        ),
        (
            close(w1_counts(&[4, 1, 3], &[3, 4, 1])?, 0.0),
            "W1 a = b".to_string(),
        ),
        (
            close(fm_counts(&[0], &[1])?, 1.0),
            "FM δ0 vs δ1".to_string(),
        ),
        (
            close(fm_counts(&[0], &[3])?, 2.0),
            "FM δ0 vs δ3".to_string(),
        ),
    ];
    let mut rng = SeedSpec::new(seed, 0).rng();
    let mut bad = 0;
    for _ in 0..100 {
        let a: Vec<u32> = (0..rng.random_range(1..100))
            .map(|_| rng.random_range(0..20))
            .collect();
        let b: Vec<u32> = (0..rng.random_range(1..100))
            .map(|_| rng.random_range(0..20))
            .collect();
        if fm_counts(&a, &b)? > w1_counts(&a, &b)?.min(2.0) + 1e-9 {
            bad += 1;
        }
    }
    checks.push((bad == 0, format!("FM > min(2, W1) in {bad} of 100 pairs")));
    Ok(suite("metrics", checks))
}

fn kac_rice(seed: u64) -> Result<SuiteResult> {
    let (m, n) = (50usize, 2000u64);
    let opts = CountOptions {
        compute_gap: false,
        ..CountOptions::default()
    };
    let counts: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let p = TrigPolynomial::random(CoefficientLaw::Gaussian, m, SeedSpec::new(seed, j))?;
            Ok(count_zeros_with(&p, 0.0, 1.0, opts)?.count as f64)
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let mean = counts.iter().sum::<f64>() / nf;
    let se = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (nf - 1.0) / nf).sqrt();
    let want = kac_rice_mean(gamma_m(m)?, 1.0)?;
    Ok(suite(
        "kac-rice-mean",
        vec![(
            (mean - want).abs() < 3.0 * se,
            format!("mean {mean:.4} ± {se:.4}, expected {want:.4}"),
        )],
    ))
}

fn gap_oracle(seed: u64) -> Result<SuiteResult> {
    let mut checks = Vec::new();
    for j in 0..5u64 {
        let p = TrigPolynomial::random(CoefficientLaw::UniformScaled, 12, SeedSpec::new(seed, j))?;
        let a = min_gap_a(&p, 0.0, 1.0)?;
        let grid = (0..=100_000).map(|i| {
            let t = i as f64 / 100_000.0;
            let jet = p.jet(t, 1);
            0.5 * (jet[0].abs() + jet[1].abs())
        });
        let dense = grid.fold(p.value(0.0).abs().min(p.value(1.0).abs()), f64::min);
        let lip = 0.5 * (p.sup_bound(1) + p.sup_bound(2)) * 1e-5;
        checks.push((
            a <= dense + 1e-12 && a >= dense - lip - 1e-6,
            format!("set {j}: A = {a:.6}, grid {dense:.6}"),
        ));
    }
    Ok(suite("min-gap", checks))
}

/// Runs every suite. The report depends only on `cfg.master_seed` and `cfg.inject_fault`.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let seed = |k: u64| mix_seed(cfg.master_seed, 100 + k);
    let faulty = cfg.inject_fault.as_deref() == Some("sinc");
    Ok(ValidationReport {
        suites: vec![
            coefficients(seed(0))?,
            theta_identity(seed(1))?,
            theta_convergence()?,
            covariance(seed(2), faulty)?,
            zero_count(seed(3))?,
            gap_oracle(seed(4))?,
            kac_sandwich(seed(5))?,
            metrics(seed(6))?,
            kac_rice(seed(7))?,
        ],
    })
}

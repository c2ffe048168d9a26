//! The stationary Gaussian limit `G` with covariance `sinc(π(t−s))`.
//!
//! Two samplers are provided. [`GpSampler`] draws `(G(t_i), G'(t_i))` exactly
//! on a finite grid from the joint covariance. [`sample_gp_surrogate`] returns a
//! Gaussian-coefficient polynomial `X_M`, which can be evaluated and have its
//! zeros counted anywhere in `[0, 1]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientLaw, SeedSpec};
use crate::error::{invalid, Error, Result};
use crate::rtp::TrigPolynomial;

/// Largest joint covariance dimension `2n` accepted by [`GpSampler`].
pub const MAX_FACTOR_DIM: usize = 4096;

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// Below this `|x|` the sinc family is evaluated by its Taylor series.
const SERIES_SWITCH: f64 = 2.0;

/// `sinc(x)`, `sinc'(x)`, `sinc''(x)`.
fn sinc_jet(x: f64) -> [f64; 3] {
    if x.abs() < SERIES_SWITCH {
        // sinc(x) = Σ (−1)^k x^{2k} / (2k+1)!
        let x2 = x * x;
        let (mut s0, mut s1, mut s2) = (1.0, 0.0, 0.0);
        let mut c = 1.0; // (−1)^k / (2k+1)!
        let mut pow = 1.0; // x^{2k−2}
        for k in 1..=14 {
            let kk = k as f64;
            c /= -(2.0 * kk) * (2.0 * kk + 1.0);
            s2 += c * 2.0 * kk * (2.0 * kk - 1.0) * pow;
            s1 += c * 2.0 * kk * pow * x;
            pow *= x2;
            s0 += c * pow;
        }
        [s0, s1, s2]
    } else {
        let (s, c) = x.sin_cos();
        [
            s / x,
            (x * c - s) / (x * x),
            ((2.0 - x * x) * s - 2.0 * x * c) / (x * x * x),
        ]
    }
}

/// `r_G(s, t) = sin(π(t−s)) / (π(t−s))`, with value 1 on the diagonal.
pub fn sinc_cov(s: f64, t: f64) -> f64 {
    sinc_jet(PI * (t - s))[0]
}

/// The covariance and its partial derivatives at `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovDerivatives {
    pub r: f64,
    pub dr_dt: f64,
    pub dr_ds: f64,
    pub d2r_dsdt: f64,
}

pub fn cov_derivatives(s: f64, t: f64) -> CovDerivatives {
    let [r, d1, d2] = sinc_jet(PI * (t - s));
    CovDerivatives {
        r,
        dr_dt: PI * d1,
        dr_ds: -PI * d1,
        d2r_dsdt: -PI * PI * d2,
    }
}

/// Variances of `(f(t), f'(t))`; the cross-covariance is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovPair {
    pub var_value: f64,
    pub var_deriv: f64,
}

impl CovPair {
    /// The limit process: `(1, π²/3)`.
    pub fn limit() -> Self {
        CovPair {
            var_value: 1.0,
            var_deriv: PI * PI / 3.0,
        }
    }
}

/// Covariance of `(X_m(t), X_m'(t))` for unit-variance coefficients.
pub fn gamma_m(m: usize) -> Result<CovPair> {
    if m < 2 {
        return invalid(format!("gamma_m needs m >= 2 (X_1 is constant), got {m}"));
    }
    let mf = m as f64;
    Ok(CovPair {
        var_value: 1.0,
        var_deriv: PI * PI * (2.0 * mf - 1.0) * (mf - 1.0) / (6.0 * mf * mf),
    })
}

/// Expected number of zeros on an interval of the given length for a
/// stationary Gaussian process with value/derivative variances `cov`.
pub fn kac_rice_mean(cov: CovPair, interval_length: f64) -> Result<f64> {
    if cov.var_value.is_nan()
        || cov.var_deriv.is_nan()
        || cov.var_value <= 0.0
        || cov.var_deriv < 0.0
    {
        return invalid(format!(
            "kac_rice_mean needs var_value > 0 and var_deriv >= 0, got {cov:?}"
        ));
    }
    if interval_length.is_nan() || interval_length < 0.0 {
        return invalid(format!(
            "interval length {interval_length} must be nonnegative"
        ));
    }
    Ok(interval_length / PI * (cov.var_deriv / cov.var_value).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpMethod {
    CholeskyExact,
    Surrogate { m: usize },
}

/// Values and derivatives of one path on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GPGridSample {
    pub grid: Vec<f64>,
    pub g_values: Vec<f64>,
    pub g_derivs: Vec<f64>,
    pub method: GpMethod,
    /// Diagonal jitter that made the factorization succeed (0 for none).
    pub jitter_used: f64,
}

/// Exact joint sampler of `(G(t_i), G'(t_i))`, factorized once.
///
/// The vector is ordered `[G(t_1), …, G(t_n), G'(t_1), …, G'(t_n)]`.
#[derive(Debug, Clone)]
pub struct GpSampler {
    grid: Vec<f64>,
    factor: DMatrix<f64>,
    jitter_used: f64,
}

impl GpSampler {
    pub fn new(grid: &[f64], jitter: f64) -> Result<Self> {
        Self::with_kernel(grid, jitter, cov_derivatives)
    }

    /// Like [`GpSampler::new`] with a caller-supplied covariance kernel.
    pub fn with_kernel<K: Fn(f64, f64) -> CovDerivatives>(
        grid: &[f64],
        jitter: f64,
        kernel: K,
    ) -> Result<Self> {
        check_grid(grid)?;
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return invalid(format!("jitter = {jitter} must be finite and >= 0"));
        }
        let n = grid.len();
        let cov = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let d = kernel(grid[i % n], grid[j % n]);
            match (i < n, j < n) {
                (true, true) => d.r,
                (true, false) => d.dr_dt,
                (false, true) => d.dr_ds,
                (false, false) => d.d2r_dsdt,
            }
        });

        let mut eps = jitter;
        loop {
            let mut a = cov.clone();
            for i in 0..2 * n {
                a[(i, i)] += eps;
            }
            if let Some(ch) = a.cholesky() {
                if eps > jitter {
                    log::info!("covariance of {} grid points needed jitter {eps:e}", n);
                }
                return Ok(GpSampler {
                    grid: grid.to_vec(),
                    factor: ch.unpack(),
                    jitter_used: eps,
                });
            }
            eps = if eps < JITTER_START {
                JITTER_START
            } else {
                eps * 10.0
            };
            if eps > JITTER_MAX * (1.0 + 1e-9) {
                let eig = SymmetricEigen::new(cov).eigenvalues;
                let (lo, hi) = eig
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                return Err(Error::NumericalFailure(format!(
                    "covariance factorization failed with jitter up to {JITTER_MAX:e}: eigenvalues in [{lo:e}, {hi:e}]"
                )));
            }
        }
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn draw(&self, seed: SeedSpec) -> GPGridSample {
        let n = self.grid.len();
        let mut rng = seed.rng();
        let z = DVector::from_fn(2 * n, |_, _| StandardNormal.sample(&mut rng));
        let v = &self.factor * z;
        GPGridSample {
            grid: self.grid.clone(),
            g_values: v.rows(0, n).iter().copied().collect(),
            g_derivs: v.rows(n, n).iter().copied().collect(),
            method: GpMethod::CholeskyExact,
            jitter_used: self.jitter_used,
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("grid is empty");
    }
    if 2 * grid.len() > MAX_FACTOR_DIM {
        return invalid(format!(
            "grid of {} points exceeds the factorization cap {MAX_FACTOR_DIM}/2",
            grid.len()
        ));
    }
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("grid must be strictly increasing inside [0, 1]");
    }
    Ok(())
}

/// One exact draw of `(G, G')` on `grid`.
pub fn sample_gp_cholesky(grid: &[f64], seed: SeedSpec, jitter: f64) -> Result<GPGridSample> {
    Ok(GpSampler::new(grid, jitter)?.draw(seed))
}

/// `X_M` with standard Gaussian coefficients, an approximate draw of `G`.
pub fn sample_gp_surrogate(m: usize, seed: SeedSpec) -> Result<TrigPolynomial> {
    if m < 2 {
        return invalid(format!("surrogate order M = {m} must be >= 2"));
    }
    TrigPolynomial::random(CoefficientLaw::Gaussian, m, seed)
}

/// The surrogate evaluated on a grid, in the same shape as the exact sampler.
pub fn surrogate_grid_sample(m: usize, grid: &[f64], seed: SeedSpec) -> Result<GPGridSample> {
    check_grid(grid)?;
    let p = sample_gp_surrogate(m, seed)?;
    let (g_values, g_derivs) = grid
        .iter()
        .map(|&t| {
            let j = p.jet(t, 1);
            (j[0], j[1])
        })
        .unzip();
    Ok(GPGridSample {
        grid: grid.to_vec(),
        g_values,
        g_derivs,
        method: GpMethod::Surrogate { m },
        jitter_used: 0.0,
    })
}

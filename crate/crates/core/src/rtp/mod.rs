//! The random trigonometric polynomial `X_m`, its partial-sum path and the
//! maps `Θ`, `Θ_m` that send paths to smooth functions.

mod path;
mod theta;

pub use path::{
    holder_seminorm, lip11_battery, uniform_grid, C1Path, ComplexPath, FnPath, PathPL, DEFAULT_GRID,
};
pub use theta::{theta, theta_m};

use serde::{Deserialize, Serialize};

use crate::coefficients::{sample_pairs, CoefficientLaw, SeedSpec};
use crate::error::{invalid, Result};

/// Number of rotation steps between direct `sin_cos` re-anchors in [`TrigPolynomial::jet`].
const ANCHOR_EVERY: usize = 32;

/// `X_m(t) = m^{-1/2} Σ_{r<m} [x_r cos(πrt/m) + y_r sin(πrt/m)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    coeffs: Vec<(f64, f64)>,
}

impl TrigPolynomial {
    /// The degree parameter is `coeffs.len()`.
    pub fn new(coeffs: Vec<(f64, f64)>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("a trigonometric polynomial needs at least one coefficient pair");
        }
        if coeffs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return invalid("coefficients must be finite");
        }
        Ok(TrigPolynomial { coeffs })
    }

    /// Samples the coefficients from `law`.
    pub fn random(law: CoefficientLaw, m: usize, seed: SeedSpec) -> Result<Self> {
        Self::new(sample_pairs(law, m, seed)?)
    }

    pub fn m(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    /// The `order`-th derivative at `t ∈ [0, 1]`, `order ≤ 3`.
    pub fn eval(&self, t: f64, order: usize) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return invalid(format!("t = {t} outside [0, 1]"));
        }
        if order > 3 {
            return invalid(format!("derivative order {order} not supported (max 3)"));
        }
        Ok(self.jet(t, order)[order])
    }

    /// `[X, X', X'', X''']` at `t`, computed up to `max_order`; higher entries are 0.
    ///
    /// No domain check; the formula is valid for every real `t`.
    pub fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        let m = self.m();
        let step = std::f64::consts::PI / m as f64;
        let theta = step * t;
        let (sw, cw) = theta.sin_cos();
        let (mut c, mut s) = (1.0_f64, 0.0_f64);
        let mut acc = [0.0_f64; 4];
        for (r, &(x, y)) in self.coeffs.iter().enumerate() {
            if r % ANCHOR_EVERY == 0 && r > 0 {
                let (sr, cr) = (r as f64 * theta).sin_cos();
                s = sr;
                c = cr;
            }
            let even = x * c + y * s;
            acc[0] += even;
            if max_order >= 1 {
                let w = step * r as f64;
                let odd = y * c - x * s;
                acc[1] += w * odd;
                if max_order >= 2 {
                    let w2 = w * w;
                    acc[2] -= w2 * even;
                    if max_order >= 3 {
                        acc[3] -= w2 * w * odd;
                    }
                }
            }
            let next_c = c * cw - s * sw;
            s = s * cw + c * sw;
            c = next_c;
        }
        let norm = 1.0 / (m as f64).sqrt();
        acc.map(|v| v * norm)
    }

    /// `m^{-1/2} Σ_r (πr/m)^order (|x_r| + |y_r|)`, a uniform bound on `|X^(order)|`.
    ///
    /// Order 0 gives the plain bound on `|X|`.
    pub fn deriv_sup_bound(&self, order: u32) -> f64 {
        let m = self.m() as f64;
        let step = std::f64::consts::PI / m;
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(r, (x, y))| (step * r as f64).powi(order as i32) * (x.abs() + y.abs()))
            .sum();
        sum / m.sqrt()
    }

    /// The partial-sum path `S^m` built from the same coefficients.
    pub fn partial_sum(&self) -> PathPL {
        PathPL::partial_sum(&self.coeffs).expect("coefficients are nonempty")
    }

    /// Returns `c · X`.
    pub fn scaled(&self, c: f64) -> TrigPolynomial {
        TrigPolynomial {
            coeffs: self.coeffs.iter().map(|&(x, y)| (c * x, c * y)).collect(),
        }
    }
}

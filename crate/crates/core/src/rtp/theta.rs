use std::f64::consts::PI;

use super::path::ComplexPath;
use crate::error::{invalid, Result};
use crate::C64;

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        invalid(format!("t = {t} outside [0, 1]"))
    }
}

/// `Θ(f)(t) = Re[e^{-iπt} f(1) − f(0) + iπt ∫_0^1 e^{-iπtu} f(u) du]`.
///
/// The integral is exact for [`PathPL`](super::PathPL) and uses `quad_n`
/// Gauss-Legendre panels otherwise.
pub fn theta<P: ComplexPath + ?Sized>(path: &P, t: f64, quad_n: usize) -> Result<f64> {
    check_t(t)?;
    let a = PI * t;
    let integral = path.fourier_integral(a, quad_n);
    let z = C64::cis(-a) * path.at(1.0) - path.at(0.0) + C64::new(0.0, a) * integral;
    Ok(z.re)
}

/// Discrete counterpart of [`theta`], in summation-by-parts form:
///
/// `Θ_m(f)(t) = Re[a_{m−1} f(1) − f(0) − Σ_{k=1}^{m−1} (a_k − a_{k−1}) f(k/m)]`,
/// with `a_k = e^{-iπkt/m}`. Only the values `f(k/m)` enter, and
/// `Θ_m(S^m) = X_m` holds exactly.
pub fn theta_m<P: ComplexPath + ?Sized>(path: &P, m: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    if m == 0 {
        return invalid("theta_m needs m >= 1");
    }
    path.check_knots(m)?;
    let phase = PI * t / m as f64;
    // e^{-iφ} − 1 without cancellation
    let half = (0.5 * phase).sin();
    let step = C64::new(-2.0 * half * half, -phase.sin());
    let mut sum = C64::new(0.0, 0.0);
    for k in 1..m {
        let prev = C64::cis(-phase * (k - 1) as f64);
        sum += prev * step * path.at(k as f64 / m as f64);
    }
    let lead = C64::cis(-phase * (m - 1) as f64);
    Ok((lead * path.at(1.0) - path.at(0.0) - sum).re)
}

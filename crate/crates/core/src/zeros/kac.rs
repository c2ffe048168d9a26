use serde::{Deserialize, Serialize};

use super::count::{min_gap_a, refine_root, scan, DEFAULT_TOL, MAX_DEPTH};
use super::{h_bar_delta_eps, h_delta_eps, Derivative, Differentiable, Offset};
use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;

/// Level `δ` and mollifier width `ε` of the smoothed Kac functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KacParams {
    pub delta: f64,
    pub eps: f64,
}

impl KacParams {
    pub fn new(delta: f64, eps: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0 && eps.is_finite() && eps > 0.0) {
            return invalid(format!(
                "KacParams need finite positive delta and eps, got ({delta}, {eps})"
            ));
        }
        Ok(KacParams { delta, eps })
    }
}

/// Piecewise Gauss-Legendre rule used on each smooth piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub nodes: usize,
    pub max_panel: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            nodes: 16,
            max_panel: 1.0 / 256.0,
        }
    }
}

impl QuadSpec {
    fn integrate<G: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, g: G) -> f64 {
        if self.nodes == 16 {
            GaussLegendre::sixteen().composite(lo, hi, self.max_panel, g)
        } else {
            GaussLegendre::new(self.nodes).composite(lo, hi, self.max_panel, g)
        }
    }
}

fn check(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return invalid(format!(
            "interval [{a}, {b}] is not a nondegenerate subinterval of [0, 1]"
        ));
    }
    Ok(())
}

/// Sorted breakpoints of `[a, b]`: the endpoints, every crossing of `f` with
/// `±level` for each level, and every sign change of `f'`.
///
/// Between consecutive breakpoints `f` is monotone and `|f|` stays on one
/// side of every level, so the integrands below are smooth per piece.
fn breakpoints<F: Differentiable + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    levels: &[f64],
) -> Result<Vec<f64>> {
    let mut pts = vec![a, b];
    for &level in levels {
        for signed in [level, -level] {
            let shifted = Offset { f, level: signed };
            let s = scan(&shifted, a, b, DEFAULT_TOL, MAX_DEPTH)?;
            if !s.certified {
                log::debug!("crossing scan of level {signed} not certified");
            }
            pts.extend(s.brackets.iter().map(|br| refine_root(&shifted, br)));
        }
    }
    // a constant f' has no sign changes
    if f.sup_bound(2) > 0.0 {
        let deriv = Derivative(f);
        let s = scan(&deriv, a, b, DEFAULT_TOL, MAX_DEPTH)?;
        pts.extend(s.brackets.iter().map(|br| refine_root(&deriv, br)));
    }
    pts.retain(|t| (a..=b).contains(t));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// `Φ_δ(f) = (1/2δ) ∫_a^b |f'(u)| 1{|f(u)| ≤ δ} du`.
pub fn kac_phi_delta<F: Differentiable + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    delta: f64,
    quad: QuadSpec,
) -> Result<f64> {
    check(a, b)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("delta = {delta} must be positive"));
    }
    let pts = breakpoints(f, a, b, &[delta])?;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        // the indicator is constant on a piece
        if f.value(0.5 * (lo + hi)).abs() <= delta {
            total += quad.integrate(lo, hi, |u| f.jet(u, 1)[1].abs());
        }
    }
    Ok(total / (2.0 * delta))
}

/// `Φ_{δ,ε}(f) = (1/2δ) ∫_a^b |f'(u)| H_{δ,ε}(f(u)) du`.
pub fn kac_phi_delta_eps<F: Differentiable + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    p: KacParams,
    quad: QuadSpec,
) -> Result<f64> {
    check(a, b)?;
    let outer = p.delta + p.eps;
    let pts = breakpoints(f, a, b, &[p.delta, outer])?;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo || f.value(0.5 * (lo + hi)).abs() >= outer {
            continue;
        }
        total += quad.integrate(lo, hi, |u| {
            let j = f.jet(u, 1);
            j[1].abs() * h_delta_eps(j[0], p)
        });
    }
    Ok(total / (2.0 * p.delta))
}

/// `Ψ̄_{δ,ε}(f) = H̄_{δ,ε}(A_f)`.
pub fn psi_bar<F: Differentiable + ?Sized>(f: &F, a: f64, b: f64, p: KacParams) -> Result<f64> {
    Ok(h_bar_delta_eps(min_gap_a(f, a, b)?, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{CoefficientLaw, SeedSpec};
    use crate::rtp::TrigPolynomial;
    use crate::zeros::{count_zeros, Explicit, Scaled};
    use std::f64::consts::PI;

    fn affine(slope: f64, intercept: f64) -> Explicit<impl Fn(f64, usize) -> f64 + Sync> {
        Explicit::new(
            move |t: f64, k: usize| match k {
                0 => slope * t + intercept,
                1 => slope,
                _ => 0.0,
            },
            [slope.abs(), 0.0, 0.0],
        )
    }

    fn cos2pi() -> Explicit<impl Fn(f64, usize) -> f64 + Sync> {
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

    /// Riemann-Stieltjes oracle: `(1/2δ) Σ |f(t_{i+1}) − f(t_i)| 1{|f(midpoint)| ≤ δ}` on a dense grid.
    fn phi_oracle<F: Differentiable>(f: &F, delta: f64, n: usize) -> f64 {
        let mut total = 0.0;
        let mut prev = f.value(0.0);
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let v = f.value(t);
            let mid = f.value(t - 0.5 / n as f64);
            if mid.abs() <= delta {
                total += (v - prev).abs();
            }
            prev = v;
        }
        total / (2.0 * delta)
    }

    #[test]
    fn phi_delta_examples() {
        let q = QuadSpec::default();
        let got = kac_phi_delta(&affine(1.0, -0.5), 0.0, 1.0, 0.1, q).unwrap();
        assert!((got - 1.0).abs() < 1e-12, "{got}");
        assert_eq!(
            kac_phi_delta(&affine(0.0, 1.0), 0.0, 1.0, 0.5, q).unwrap(),
            0.0
        );

        let f = cos2pi();
        let a = min_gap_a(&f, 0.0, 1.0).unwrap();
        let got = kac_phi_delta(&f, 0.0, 1.0, 0.9 * a, q).unwrap();
        assert!((got - 2.0).abs() < 1e-8, "{got}");
    }

    #[test]
    fn phi_delta_eps_examples() {
        let q = QuadSpec::default();
        let p = KacParams::new(0.1, 0.05).unwrap();
        let got = kac_phi_delta_eps(&affine(1.0, -0.5), 0.0, 1.0, p, q).unwrap();
        assert!((got - 1.25).abs() < 1e-12, "{got}");
        let p = KacParams::new(0.5, 0.1).unwrap();
        assert_eq!(
            kac_phi_delta_eps(&affine(0.0, 1.0), 0.0, 1.0, p, q).unwrap(),
            0.0
        );

        // ε → 0
        let f = affine(1.3, -0.6);
        let (d, e) = (0.2, 1e-6);
        let lo = kac_phi_delta(&f, 0.0, 1.0, d, q).unwrap();
        let hi = kac_phi_delta(&f, 0.0, 1.0, d + e, q).unwrap() * (d + e) / d;
        let mid = kac_phi_delta_eps(&f, 0.0, 1.0, KacParams::new(d, e).unwrap(), q).unwrap();
        assert!((mid - lo).abs() <= hi - lo + 1e-12);
    }

    #[test]
    fn invalid_params() {
        assert!(KacParams::new(0.0, 1.0).is_err());
        assert!(KacParams::new(1.0, -1.0).is_err());
        assert!(KacParams::new(f64::NAN, 1.0).is_err());
        assert!(kac_phi_delta(&affine(1.0, 0.0), 0.0, 1.0, 0.0, QuadSpec::default()).is_err());
        assert!(kac_phi_delta(&affine(1.0, 0.0), 0.5, 0.2, 0.1, QuadSpec::default()).is_err());
    }

    #[test]
    fn psi_bar_examples() {
        let p = KacParams::new(0.1, 0.1).unwrap();
        assert_eq!(psi_bar(&affine(0.0, 1.0), 0.0, 1.0, p).unwrap(), 0.0);
        let f = cos2pi();
        let got = psi_bar(&f, 0.0, 1.0, KacParams::new(0.45, 0.1).unwrap()).unwrap();
        assert!((got - 0.5).abs() < 1e-8, "{got}");
        assert_eq!(
            psi_bar(&f, 0.0, 1.0, KacParams::new(0.6, 0.1).unwrap()).unwrap(),
            1.0
        );
    }

    #[test]
    fn kac_formula_counts_zeros() {
        let q = QuadSpec::default();
        for i in 0..500u64 {
            let m = 2 + (i as usize % 19);
            let p =
                TrigPolynomial::random(CoefficientLaw::Gaussian, m, SeedSpec::new(101, i)).unwrap();
            let r = count_zeros(&p, 0.0, 1.0, DEFAULT_TOL).unwrap();
            assert!(r.certified);
            let phi = kac_phi_delta(&p, 0.0, 1.0, 0.9 * r.min_abs_at_roots_gap, q).unwrap();
            assert!(
                (phi - r.count as f64).abs() <= 1e-6,
                "i={i} m={m}: {phi} vs {}",
                r.count
            );
        }
    }

    #[test]
    fn phi_matches_riemann_stieltjes_oracle() {
        let q = QuadSpec::default();
        for i in 0..20u64 {
            let p = TrigPolynomial::random(CoefficientLaw::UniformScaled, 15, SeedSpec::new(7, i))
                .unwrap();
            for delta in [0.05, 0.3, 1.0] {
                let got = kac_phi_delta(&p, 0.0, 1.0, delta, q).unwrap();
                let want = phi_oracle(&p, delta, 200_000);
                assert!(
                    (got - want).abs() < 1e-3 * (1.0 + want),
                    "i={i} δ={delta}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn sandwich_and_scaling() {
        let q = QuadSpec::default();
        for i in 0..60u64 {
            let p = TrigPolynomial::random(
                CoefficientLaw::ALL[(i % 4) as usize],
                4 + i as usize % 25,
                SeedSpec::new(13, i),
            )
            .unwrap();
            let delta = 0.05 + 0.02 * (i % 20) as f64;
            let eps = 0.01 + 0.03 * (i % 7) as f64;
            let lo = kac_phi_delta(&p, 0.0, 1.0, delta, q).unwrap();
            let mid =
                kac_phi_delta_eps(&p, 0.0, 1.0, KacParams::new(delta, eps).unwrap(), q).unwrap();
            let hi_raw = kac_phi_delta(&p, 0.0, 1.0, delta + eps, q).unwrap();
            // Φ_{δ+ε} carries the prefactor 1/(2(δ+ε)); compare integrals
            let hi = hi_raw * (delta + eps) / delta;
            let slack = 1e-10 * (1.0 + hi);
            assert!(
                lo <= mid + slack && mid <= hi + slack,
                "i={i}: {lo} {mid} {hi}"
            );

            for c in [2.0, -3.0] {
                let scaled =
                    kac_phi_delta(&Scaled { f: &p, c }, 0.0, 1.0, delta * f64::abs(c), q).unwrap();
                assert!((scaled - lo).abs() < 1e-10 * (1.0 + lo), "i={i} c={c}");
            }
        }
    }

    #[test]
    fn subinterval() {
        let q = QuadSpec::default();
        let got = kac_phi_delta(&affine(1.0, -0.5), 0.45, 1.0, 0.1, q).unwrap();
        assert!((got - 0.75).abs() < 1e-12, "{got}");
    }
}

//! Certified zero counting and the Kac counting functionals.
//!
//! Everything here works on a [`Differentiable`]: a function on `[0, 1]`
//! that can be evaluated with up to three derivatives and carries global
//! bounds on `|f'|`, `|f''|`, `|f'''|`. Exclusion and monotonicity decisions
//! are made from those bounds only, so a certified count is never a guess.

mod count;
mod kac;

pub use count::{
    count_zeros, count_zeros_with, min_gap_a, CountOptions, CountResult, DEFAULT_TOL, MAX_DEPTH,
};
pub use kac::{kac_phi_delta, kac_phi_delta_eps, psi_bar, KacParams, QuadSpec};

use crate::rtp::TrigPolynomial;

/// A `C³` function on `[0, 1]` with certified derivative bounds.
pub trait Differentiable: Sync {
    /// `[f, f', f'', f''']` at `t`; only entries up to `max_order` are meaningful.
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4];

    /// Upper bound on `sup |f^(order)|` over `[0, 1]`, for `order ∈ {1, 2, 3}`.
    fn sup_bound(&self, order: usize) -> f64;

    /// Absolute rounding-error bound on `jet(t, _)[order]`.
    fn eval_error(&self, _order: usize) -> f64 {
        0.0
    }

    fn value(&self, t: f64) -> f64 {
        self.jet(t, 0)[0]
    }
}

impl<T: Differentiable + ?Sized> Differentiable for &T {
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        (**self).jet(t, max_order)
    }
    fn sup_bound(&self, order: usize) -> f64 {
        (**self).sup_bound(order)
    }
    fn eval_error(&self, order: usize) -> f64 {
        (**self).eval_error(order)
    }
}

impl Differentiable for TrigPolynomial {
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        TrigPolynomial::jet(self, t, max_order)
    }

    fn sup_bound(&self, order: usize) -> f64 {
        self.deriv_sup_bound(order as u32)
    }

    fn eval_error(&self, order: usize) -> f64 {
        // summation plus recurrence drift over at most ANCHOR_EVERY rotations
        let m = self.m() as f64;
        64.0 * (m + 32.0) * f64::EPSILON * self.deriv_sup_bound(order as u32)
    }
}

/// A function given by a closure `(t, order) ↦ f^(order)(t)` and explicit bounds
/// `[sup|f'|, sup|f''|, sup|f'''|]`.
pub struct Explicit<F> {
    f: F,
    bounds: [f64; 3],
}

impl<F: Fn(f64, usize) -> f64 + Sync> Explicit<F> {
    pub fn new(f: F, bounds: [f64; 3]) -> Self {
        Explicit { f, bounds }
    }
}

impl<F: Fn(f64, usize) -> f64 + Sync> Differentiable for Explicit<F> {
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate().take(max_order.min(3) + 1) {
            *slot = (self.f)(t, k);
        }
        out
    }

    fn sup_bound(&self, order: usize) -> f64 {
        self.bounds[order.clamp(1, 3) - 1]
    }

    fn eval_error(&self, order: usize) -> f64 {
        4.0 * f64::EPSILON * self.bounds[order.clamp(1, 3) - 1].max(1.0)
    }
}

/// `f − level`.
pub(crate) struct Offset<'a, F: ?Sized> {
    pub f: &'a F,
    pub level: f64,
}

impl<F: Differentiable + ?Sized> Differentiable for Offset<'_, F> {
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        let mut j = self.f.jet(t, max_order);
        j[0] -= self.level;
        j
    }
    fn sup_bound(&self, order: usize) -> f64 {
        self.f.sup_bound(order)
    }
    fn eval_error(&self, order: usize) -> f64 {
        let shift = if order == 0 {
            f64::EPSILON * self.level.abs()
        } else {
            0.0
        };
        self.f.eval_error(order) + shift
    }
}

/// `f'`; valid for `max_order ≤ 2`.
pub(crate) struct Derivative<'a, F: ?Sized>(pub &'a F);

impl<F: Differentiable + ?Sized> Differentiable for Derivative<'_, F> {
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        debug_assert!(max_order <= 2);
        let j = self.0.jet(t, (max_order + 1).min(3));
        [j[1], j[2], j[3], 0.0]
    }
    fn sup_bound(&self, order: usize) -> f64 {
        self.0.sup_bound(order + 1)
    }
    fn eval_error(&self, order: usize) -> f64 {
        self.0.eval_error(order + 1)
    }
}

/// `c · f`.
pub struct Scaled<'a, F: ?Sized> {
    pub f: &'a F,
    pub c: f64,
}

impl<F: Differentiable + ?Sized> Differentiable for Scaled<'_, F> {
    fn jet(&self, t: f64, max_order: usize) -> [f64; 4] {
        self.f.jet(t, max_order).map(|v| v * self.c)
    }
    fn sup_bound(&self, order: usize) -> f64 {
        self.c.abs() * self.f.sup_bound(order)
    }
    fn eval_error(&self, order: usize) -> f64 {
        self.c.abs() * self.f.eval_error(order)
    }
}

/// Trapezoidal mollifier: 1 on `|u| ≤ δ`, 0 on `|u| ≥ δ+ε`, linear in between.
pub fn h_delta_eps(u: f64, p: KacParams) -> f64 {
    let a = u.abs();
    if a <= p.delta {
        1.0
    } else if a >= p.delta + p.eps {
        0.0
    } else {
        1.0 - (a - p.delta) / p.eps
    }
}

/// One-sided mollifier: 1 on `x ≤ δ`, `(δ+ε−x)/ε` on `[δ, δ+ε]`, 0 beyond.
pub fn h_bar_delta_eps(x: f64, p: KacParams) -> f64 {
    if x <= p.delta {
        1.0
    } else if x <= p.delta + p.eps {
        (p.delta + p.eps - x) / p.eps
    } else {
        0.0
    }
}

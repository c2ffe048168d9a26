use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::Differentiable;
use crate::error::{invalid, Error, Result};

/// Default isolation width for [`count_zeros`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Maximum bisection depth.
pub const MAX_DEPTH: u32 = 60;
/// Width at which the branch-and-bound for the min-gap threshold stops.
const GAP_WIDTH: f64 = 1e-6;

/// Outcome of [`count_zeros`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: usize,
    /// Every subinterval was either excluded or shown monotone by the derivative bounds.
    pub certified: bool,
    /// The threshold `A_f` below which the Kac formula is exact (NaN when not computed).
    pub min_abs_at_roots_gap: f64,
    pub refinement_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    pub tol: f64,
    pub max_depth: u32,
    /// Also compute `A_f` (roughly ten times the cost of the count itself).
    pub compute_gap: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            tol: DEFAULT_TOL,
            max_depth: MAX_DEPTH,
            compute_gap: true,
        }
    }
}

/// An interval with a sign change of `f`: exactly one zero when the scan
/// certified it, an odd number otherwise.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
}

pub(crate) struct Scan {
    pub brackets: Vec<Bracket>,
    pub certified: bool,
    pub depth: u32,
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return invalid(format!(
            "interval [{a}, {b}] is not a nondegenerate subinterval of [0, 1]"
        ));
    }
    Ok(())
}

fn finite(v: f64, t: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalFailure(format!(
            "non-finite evaluation {v} at t = {t}"
        )))
    }
}

/// Branch-and-bound isolation of the sign changes of `f` on `[a, b]`.
///
/// A subinterval of width `w` centred at `c` is dropped when
/// `|f(c)| > w/2 · sup|f'|`, and resolved when `|f'(c)| > w/2 · sup|f''|`
/// (then `f` is strictly monotone and a sign change of the endpoint values
/// is exactly one zero). Anything else is bisected down to `tol`. Brackets
/// come back sorted left to right. Zero endpoint values never count as a
/// crossing.
pub(crate) fn scan<F: Differentiable + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<Scan> {
    let b1 = f.sup_bound(1);
    let b2 = f.sup_bound(2);
    let (e0, e1) = (f.eval_error(0), f.eval_error(1));
    let fa = finite(f.value(a), a)?;
    let fb = finite(f.value(b), b)?;

    let mut out = Scan {
        brackets: Vec::new(),
        certified: true,
        depth: 0,
    };
    let mut stack = vec![(a, b, fa, fb, 0u32)];
    while let Some((l, r, fl, fr, depth)) = stack.pop() {
        out.depth = out.depth.max(depth);
        let w = r - l;
        let c = l + 0.5 * w;
        let jet = f.jet(c, 1);
        let fc = finite(jet[0], c)?;
        let dc = finite(jet[1], c)?;

        if fc.abs() > 0.5 * w * b1 + e0 || fl.abs() + fr.abs() > w * b1 + 2.0 * e0 {
            continue;
        }
        let crossing = fl * fr < 0.0;
        if dc.abs() > 0.5 * w * b2 + e1 {
            if crossing {
                out.brackets.push(Bracket {
                    lo: l,
                    hi: r,
                    f_lo: fl,
                });
            }
            continue;
        }
        if w < tol || depth >= max_depth {
            out.certified = false;
            if crossing {
                out.brackets.push(Bracket {
                    lo: l,
                    hi: r,
                    f_lo: fl,
                });
            }
            continue;
        }

        let (s, fs) = split_point(f, l, w, fc)?;
        stack.push((s, r, fs, fr, depth + 1));
        stack.push((l, s, fl, fs, depth + 1));
    }
    Ok(out)
}

/// The midpoint, nudged off an exact zero of `f`.
fn split_point<F: Differentiable + ?Sized>(
    f: &F,
    l: f64,
    w: f64,
    f_mid: f64,
) -> Result<(f64, f64)> {
    if f_mid != 0.0 {
        return Ok((l + 0.5 * w, f_mid));
    }
    for k in 1..64 {
        let shift = (k as f64) / 1024.0 * if k % 2 == 0 { -1.0 } else { 1.0 };
        let s = l + w * (0.5 + shift);
        let fs = finite(f.value(s), s)?;
        if fs != 0.0 {
            return Ok((s, fs));
        }
    }
    Err(Error::NumericalFailure(format!(
        "f vanishes identically near {}",
        l + 0.5 * w
    )))
}

/// Locates the zero inside a bracket to near machine precision
/// (safeguarded Newton with bisection fallback).
pub(crate) fn refine_root<F: Differentiable + ?Sized>(f: &F, bracket: &Bracket) -> f64 {
    let (mut lo, mut hi, mut f_lo) = (bracket.lo, bracket.hi, bracket.f_lo);
    let mut x = 0.5 * (lo + hi);
    for it in 0..200 {
        let jet = f.jet(x, 1);
        let fx = jet[0];
        if fx == 0.0 || !fx.is_finite() {
            return x;
        }
        if (fx < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let newton = x - fx / jet[1];
        if (newton - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            && newton > lo
            && newton < hi
        {
            return newton;
        }
        // every third step bisects, so the bracket at least halves every three steps
        x = if it % 3 != 2 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    0.5 * (lo + hi)
}

/// Number of zeros of `f` in `[a, b]` (default options, `A_f` included).
pub fn count_zeros<F: Differentiable + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<CountResult> {
    count_zeros_with(
        f,
        a,
        b,
        CountOptions {
            tol,
            ..CountOptions::default()
        },
    )
}

pub fn count_zeros_with<F: Differentiable + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    opts: CountOptions,
) -> Result<CountResult> {
    check_interval(a, b)?;
    if !(opts.tol > 0.0 && opts.tol <= 1e-3) {
        return invalid(format!("tol = {} outside (0, 1e-3]", opts.tol));
    }
    let fa = finite(f.value(a), a)?;
    let fb = finite(f.value(b), b)?;
    if fa == 0.0 || fb == 0.0 {
        return Err(Error::HypothesisViolation { a, b, fa, fb });
    }
    let s = scan(f, a, b, opts.tol, opts.max_depth)?;
    let gap = if opts.compute_gap {
        min_gap_a(f, a, b)?
    } else {
        f64::NAN
    };
    Ok(CountResult {
        count: s.brackets.len(),
        certified: s.certified,
        min_abs_at_roots_gap: gap,
        refinement_depth: s.depth,
    })
}

#[derive(PartialEq)]
struct Candidate {
    lower: f64,
    lo: f64,
    hi: f64,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // min-heap on the lower bound
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

/// `A_f = min(|f(a)|, |f(b)|, ½ min_{(a,b)} (|f| + |f'|))`.
///
/// The interior minimum is found by best-first branch-and-bound with the
/// Lipschitz bound `sup|f'| + sup|f''|` on `|f| + |f'|`, down to width `1e-6`.
/// The returned value is the smallest sampled `|f| + |f'|`, within
/// `5e-7 · (sup|f'| + sup|f''|)` of the true minimum.
pub fn min_gap_a<F: Differentiable + ?Sized>(f: &F, a: f64, b: f64) -> Result<f64> {
    check_interval(a, b)?;
    let lip = f.sup_bound(1) + f.sup_bound(2);
    let g = |t: f64| -> Result<(f64, f64)> {
        let j = f.jet(t, 1);
        let v = finite(j[0], t)?;
        let d = finite(j[1], t)?;
        Ok((v.abs(), v.abs() + d.abs()))
    };
    let (fa, ga) = g(a)?;
    let (fb, gb) = g(b)?;
    let mut best = ga.min(gb);

    let mut heap = BinaryHeap::new();
    let push = |lo: f64, hi: f64, best: &mut f64, heap: &mut BinaryHeap<Candidate>| -> Result<()> {
        let c = 0.5 * (lo + hi);
        let (_, gc) = g(c)?;
        *best = best.min(gc);
        let lower = gc - 0.5 * (hi - lo) * lip;
        if lower < *best {
            heap.push(Candidate { lower, lo, hi });
        }
        Ok(())
    };
    push(a, b, &mut best, &mut heap)?;
    while let Some(cand) = heap.pop() {
        if cand.lower >= best || cand.hi - cand.lo <= GAP_WIDTH {
            break;
        }
        let mid = 0.5 * (cand.lo + cand.hi);
        push(cand.lo, mid, &mut best, &mut heap)?;
        push(mid, cand.hi, &mut best, &mut heap)?;
    }
    Ok(fa.min(fb).min(0.5 * best))
}

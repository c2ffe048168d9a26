use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;
use crate::zeros::Differentiable;
use crate::C64;

/// Default number of uniform grid points for sup-norm and Hölder estimates.
pub const DEFAULT_GRID: usize = 1024;

/// Relative tolerance for matching a time against a knot.
const KNOT_TOL: f64 = 1e-12;

/// `n` equally spaced points covering `[0, 1]`, endpoints included.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// A complex-valued continuous path on `[0, 1]`.
pub trait ComplexPath {
    fn at(&self, u: f64) -> C64;

    /// `∫_0^1 e^{-i·freq·u} f(u) du`, by composite 16-point Gauss-Legendre over `quad_n` panels.
    fn fourier_integral(&self, freq: f64, quad_n: usize) -> C64 {
        let rule = GaussLegendre::sixteen();
        let n = quad_n.max(1);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            let lo = k as f64 / n as f64;
            let hi = (k + 1) as f64 / n as f64;
            let re = rule.integrate(lo, hi, |u| (C64::cis(-freq * u) * self.at(u)).re);
            let im = rule.integrate(lo, hi, |u| (C64::cis(-freq * u) * self.at(u)).im);
            acc += C64::new(re, im);
        }
        acc
    }

    /// Checks that the path is known exactly at every `k/m`.
    fn check_knots(&self, _m: usize) -> Result<()> {
        Ok(())
    }
}

/// Wraps a closure `u ↦ f(u)` as a path.
pub struct FnPath<F>(pub F);

impl<F: Fn(f64) -> C64> ComplexPath for FnPath<F> {
    fn at(&self, u: f64) -> C64 {
        (self.0)(u)
    }
}

/// Piecewise-linear complex path through `(t_k, z_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPL {
    times: Vec<f64>,
    values: Vec<C64>,
}

impl PathPL {
    /// Knot times must start at 0, end at 1 and increase strictly.
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return invalid(
                "a piecewise-linear path needs at least two knots and one value per knot",
            );
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return invalid("knot times must start at 0 and end at 1");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("knot times must be strictly increasing");
        }
        Ok(PathPL { times, values })
    }

    /// `S^m`: starts at 0 and jumps by `(x_k + i y_k)/√m` across `[k/m, (k+1)/m]`.
    pub fn partial_sum(coeffs: &[(f64, f64)]) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("partial sums need at least one coefficient pair");
        }
        let m = coeffs.len();
        let norm = 1.0 / (m as f64).sqrt();
        let mut values = Vec::with_capacity(m + 1);
        let mut z = C64::new(0.0, 0.0);
        values.push(z);
        for &(x, y) in coeffs {
            z += C64::new(x, y) * norm;
            values.push(z);
        }
        let mut times: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        times[m] = 1.0;
        Ok(PathPL { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Pointwise linear combination `a·self + b·other`; both paths must share knots.
    pub fn combine(&self, a: f64, other: &PathPL, b: f64) -> Result<PathPL> {
        if self.times != other.times {
            return invalid("paths have different knots");
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(PathPL {
            times: self.times.clone(),
            values,
        })
    }

    fn segment(&self, u: f64) -> usize {
        let idx = self.times.partition_point(|&t| t <= u);
        idx.clamp(1, self.times.len() - 1) - 1
    }
}

impl ComplexPath for PathPL {
    fn at(&self, u: f64) -> C64 {
        let k = self.segment(u);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let s = ((u - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.values[k] + (self.values[k + 1] - self.values[k]) * s
    }

    /// Exact on each linear piece; `quad_n` is ignored.
    fn fourier_integral(&self, freq: f64, _quad_n: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.times.len() - 1 {
            let (u0, u1) = (self.times[k], self.times[k + 1]);
            let h = u1 - u0;
            let (f0, f1) = (self.values[k], self.values[k + 1]);
            let x = freq * h;
            acc += C64::cis(-freq * u0) * h * (f0 * exp_moment0(x) + (f1 - f0) * exp_moment1(x));
        }
        acc
    }

    fn check_knots(&self, m: usize) -> Result<()> {
        for k in 0..=m {
            let u = k as f64 / m as f64;
            let idx = self.times.partition_point(|&t| t < u - KNOT_TOL);
            if idx >= self.times.len() || (self.times[idx] - u).abs() > KNOT_TOL {
                return invalid(format!("path has no knot at {k}/{m}"));
            }
        }
        Ok(())
    }
}

/// `∫_0^1 e^{-ixs} ds`.
fn exp_moment0(x: f64) -> C64 {
    if x.abs() < 1.0 {
        // Σ (-ix)^k / (k+1)!
        let z = C64::new(0.0, -x);
        let mut term = C64::new(1.0, 0.0);
        let mut acc = term;
        for k in 1..30 {
            term = term * z / (k as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (C64::new(1.0, 0.0) - C64::cis(-x)) / C64::new(0.0, x)
    }
}

/// `∫_0^1 s e^{-ixs} ds`.
fn exp_moment1(x: f64) -> C64 {
    if x.abs() < 1.0 {
        // Σ (-ix)^k / (k! (k+2))
        let z = C64::new(0.0, -x);
        let mut pow = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.5, 0.0);
        for k in 1..30 {
            pow = pow * z / k as f64;
            acc += pow / (k as f64 + 2.0);
        }
        acc
    } else {
        (C64::cis(-x) * C64::new(1.0, x) - 1.0) / (x * x)
    }
}

/// A sampled element of `C¹([0,1])`: values and first derivatives on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct C1Path {
    grid: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl C1Path {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() || grid.len() != derivs.len() {
            return invalid("grid, values and derivatives must be nonempty and of equal length");
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("grid must be strictly increasing");
        }
        if grid[0] < 0.0 || *grid.last().unwrap() > 1.0 {
            return invalid("grid must lie in [0, 1]");
        }
        Ok(C1Path {
            grid,
            values,
            derivs,
        })
    }

    /// Samples `f` and `f'` on `grid`.
    pub fn sample<F: Differentiable + ?Sized>(f: &F, grid: Vec<f64>) -> Result<Self> {
        let (values, derivs) = grid
            .iter()
            .map(|&t| {
                let j = f.jet(t, 1);
                (j[0], j[1])
            })
            .unzip();
        C1Path::new(grid, values, derivs)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// Cubic Hermite interpolation; constant outside the grid.
    pub fn value_at(&self, u: f64) -> f64 {
        let n = self.grid.len();
        if n == 1 || u <= self.grid[0] {
            return self.values[0];
        }
        if u >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let k = self.grid.partition_point(|&t| t <= u) - 1;
        let h = self.grid[k + 1] - self.grid[k];
        let s = (u - self.grid[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[k]
            + h10 * h * self.derivs[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.derivs[k + 1]
    }

    /// Grid-restricted `‖f‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid-restricted `‖f‖_{∞,1} = ‖f'‖_∞ + |f(0)|`.
    pub fn c1_norm(&self) -> f64 {
        self.derivs.iter().fold(0.0, |m: f64, v| m.max(v.abs())) + self.value_at(0.0).abs()
    }
}

impl ComplexPath for C1Path {
    fn at(&self, u: f64) -> C64 {
        C64::new(self.value_at(u), 0.0)
    }
}

/// Grid-restricted α-Hölder seminorm `max |f(u)−f(v)| / |u−v|^α`.
///
/// This is a lower bound of the true seminorm.
pub fn holder_seminorm(times: &[f64], values: &[C64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("Hölder exponent {alpha} outside (0, 1)"));
    }
    if times.len() < 2 || times.len() != values.len() {
        return invalid("Hölder seminorm needs at least two grid points");
    }
    let mut best = 0.0_f64;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let q = (values[j] - values[i]).norm() / (times[j] - times[i]).abs().powf(alpha);
            best = best.max(q);
        }
    }
    Ok(best)
}

impl PathPL {
    pub fn holder_seminorm(&self, alpha: f64) -> Result<f64> {
        holder_seminorm(&self.times, &self.values, alpha)
    }
}

impl C1Path {
    pub fn holder_seminorm(&self, alpha: f64) -> Result<f64> {
        let values: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        holder_seminorm(&self.grid, &values, alpha)
    }
}

/// Fixed battery of path functionals:
/// `½‖f‖²_∞`, `½‖f‖²_{∞,1}`, `min(‖f‖_{∞,1}, 1)` and `f(½)·min(|f(½)|, 1)`.
///
/// The first two are linearly locally Lipschitz; the last two are bounded
/// 1-Lipschitz functionals.
pub fn lip11_battery(path: &C1Path) -> [f64; 4] {
    let sup = path.sup_norm();
    let c1 = path.c1_norm();
    let mid = path.value_at(0.5);
    [
        0.5 * sup * sup,
        0.5 * c1 * c1,
        c1.min(1.0),
        mid * mid.abs().min(1.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_path(times: Vec<f64>, values: Vec<f64>) -> PathPL {
        PathPL::new(
            times,
            values.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn partial_sum_examples() {
        let p = PathPL::partial_sum(&[(1.0, 0.0)]).unwrap();
        assert_eq!(p.times(), &[0.0, 1.0]);
        assert_eq!(p.values(), &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);

        let p = PathPL::partial_sum(&[(1.0, 0.0), (-1.0, 0.0)]).unwrap();
        assert_eq!(p.times(), &[0.0, 0.5, 1.0]);
        assert!((p.values()[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(p.values()[2].norm() < 1e-15);

        let coeffs = [(0.3, -1.2), (2.0, 0.5), (-0.7, 0.1)];
        let p = PathPL::partial_sum(&coeffs).unwrap();
        let end = C64::new(1.6, -0.6) / 3f64.sqrt();
        assert!((p.values()[3] - end).norm() < 1e-15);
        assert!((p.at(1.0) - end).norm() < 1e-15);

        assert!(PathPL::partial_sum(&[]).is_err());
    }

    #[test]
    fn path_validation() {
        assert!(PathPL::new(vec![0.0], vec![C64::new(0.0, 0.0)]).is_err());
        assert!(PathPL::new(vec![0.1, 1.0], vec![C64::new(0.0, 0.0); 2]).is_err());
        assert!(PathPL::new(vec![0.0, 0.5, 0.5, 1.0], vec![C64::new(0.0, 0.0); 4]).is_err());
        assert!(C1Path::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn interpolation() {
        let p = real_path(vec![0.0, 0.25, 1.0], vec![0.0, 1.0, -2.0]);
        assert!((p.at(0.125).re - 0.5).abs() < 1e-15);
        assert!((p.at(0.625).re + 0.5).abs() < 1e-15);
        assert_eq!(p.at(1.0).re, -2.0);
        assert!(p.check_knots(1).is_ok());
        assert!(p.check_knots(4).is_err());
        assert!(p.check_knots(3).is_err());
    }

    #[test]
    fn exp_moments_continuous_across_switch() {
        for x in [0.999_999_9, 1.0, 1.000_000_1, -0.999_999_9, -1.000_000_1] {
            let rule = GaussLegendre::new(40);
            let re0 = rule.integrate(0.0, 1.0, |s| (x * s).cos());
            let im0 = rule.integrate(0.0, 1.0, |s| -(x * s).sin());
            let re1 = rule.integrate(0.0, 1.0, |s| s * (x * s).cos());
            let im1 = rule.integrate(0.0, 1.0, |s| -s * (x * s).sin());
            assert!((exp_moment0(x) - C64::new(re0, im0)).norm() < 1e-15);
            assert!((exp_moment1(x) - C64::new(re1, im1)).norm() < 1e-15);
        }
    }

    #[test]
    fn holder_examples() {
        let c = real_path(vec![0.0, 0.5, 1.0], vec![3.0, 3.0, 3.0]);
        assert_eq!(c.holder_seminorm(0.5).unwrap(), 0.0);
        let id = real_path(vec![0.0, 1.0], vec![0.0, 1.0]);
        assert!((id.holder_seminorm(0.5).unwrap() - 1.0).abs() < 1e-15);
        // pairs: 0.25/0.5, 0.75/√0.75, 1/1
        let id = real_path(vec![0.0, 0.25, 1.0], vec![0.0, 0.25, 1.0]);
        assert!((id.holder_seminorm(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(id.holder_seminorm(1.0).is_err());
        assert!(id.holder_seminorm(0.0).is_err());
        assert!(holder_seminorm(&[0.0], &[C64::new(0.0, 0.0)], 0.5).is_err());
    }

    #[test]
    fn battery_examples() {
        let grid = uniform_grid(DEFAULT_GRID);
        let n = grid.len();
        let zero = C1Path::new(grid.clone(), vec![0.0; n], vec![0.0; n]).unwrap();
        assert_eq!(lip11_battery(&zero), [0.0; 4]);

        let two = C1Path::new(grid.clone(), vec![2.0; n], vec![0.0; n]).unwrap();
        let b = lip11_battery(&two);
        assert_eq!(b[0], 2.0);
        assert_eq!(b[2], 1.0);

        let id = C1Path::new(grid.clone(), grid.clone(), vec![1.0; n]).unwrap();
        let b = lip11_battery(&id);
        assert!((b[0] - 0.5).abs() < 1e-15);
        assert!((b[1] - 0.5).abs() < 1e-15);
        assert_eq!(b[2], 1.0);
        assert!((b[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let f = |t: f64| t * t * t - 2.0 * t + 0.5;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let grid = uniform_grid(7);
        let p = C1Path::new(
            grid.clone(),
            grid.iter().map(|&t| f(t)).collect(),
            grid.iter().map(|&t| df(t)).collect(),
        )
        .unwrap();
        for k in 0..50 {
            let u = k as f64 / 49.0;
            assert!((p.value_at(u) - f(u)).abs() < 1e-13);
        }
    }
}

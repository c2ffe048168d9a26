//! Dense tableau simplex for the bounded-Lipschitz dual on a sorted support.

/// `max Σ w_i f_i` subject to `|f_i| ≤ 1` and `|f_{i+1} − f_i| ≤ u_{i+1} − u_i`.
///
/// Solved with the substitution `g = f + 1 ∈ [0, 2]`, which makes the
/// origin a feasible vertex with all slacks basic. Bland's rule rules out
/// cycling.
pub(crate) fn bounded_lipschitz_sup(support: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(support.len(), weights.len());
    let k = support.len();
    if k == 0 {
        return 0.0;
    }
    let rows = k + 2 * (k - 1);
    let cols = k + rows + 1; // structural, slack, rhs
    let rhs = cols - 1;
    let mut t = vec![vec![0.0; cols]; rows + 1];

    for (i, row) in t.iter_mut().take(k).enumerate() {
        row[i] = 1.0;
        row[rhs] = 2.0;
    }
    for i in 0..k - 1 {
        let d = support[i + 1] - support[i];
        let (up, down) = (k + 2 * i, k + 2 * i + 1);
        t[up][i + 1] = 1.0;
        t[up][i] = -1.0;
        t[up][rhs] = d;
        t[down][i] = 1.0;
        t[down][i + 1] = -1.0;
        t[down][rhs] = d;
    }
    for (r, row) in t.iter_mut().take(rows).enumerate() {
        row[k + r] = 1.0;
    }
    // objective row holds −w so that a negative entry marks an improving column
    for i in 0..k {
        t[rows][i] = -weights[i];
    }
    let mut basis: Vec<usize> = (k..k + rows).collect();

    const EPS: f64 = 1e-12;
    while let Some(enter) = (0..cols - 1).find(|&j| t[rows][j] < -EPS) {
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = t[r][enter];
            if a > EPS {
                let ratio = t[r][rhs] / a;
                leave = match leave {
                    Some((lr, best))
                        if ratio > best + EPS || (ratio > best - EPS && basis[r] > basis[lr]) =>
                    {
                        Some((lr, best))
                    }
                    _ => Some((r, ratio)),
                };
            }
        }
        // the feasible region is bounded, so some row always limits the step
        let (pr, _) = leave.expect("bounded LP");
        let p = t[pr][enter];
        for v in t[pr].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != pr {
                let f = row[enter];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        basis[pr] = enter;
    }
    t[rows][rhs] - weights.iter().sum::<f64>()
}

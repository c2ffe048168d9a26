use serde::{Deserialize, Serialize};

use super::table::ResultTable;
use crate::error::{invalid, Error, Result};
use crate::metrics::quantile_sorted;

/// Least-squares fit of `log value = intercept + slope · log m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Percentile interval of the slope over bootstrap replicates; NaN without replicates.
    pub slope_ci: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
}

impl RateFit {
    /// The fit reported when there is nothing to fit.
    pub fn undefined(n_points: usize) -> Self {
        RateFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            slope_ci: (f64::NAN, f64::NAN),
            r_squared: f64::NAN,
            n_points,
        }
    }
}

/// `(slope, intercept, r²)`; `r² = 1` when the data are fitted exactly.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    (slope, intercept, r2)
}

fn log_points(ms: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    ms.iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(m, v)| (m.ln(), v.ln()))
        .unzip()
}

pub fn fit_rate(table: &ResultTable) -> Result<RateFit> {
    fit_rate_with_level(table, 0.95)
}

/// Fits the rows of `table` with a positive value. Rows carrying bootstrap
/// replicates give a slope interval by refitting replicate by replicate.
pub fn fit_rate_with_level(table: &ResultTable, level: f64) -> Result<RateFit> {
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("level {level} outside (0, 1)"));
    }
    let rows: Vec<_> = table
        .rows
        .iter()
        .filter(|r| r.value > 0.0 && r.value.is_finite() && r.m > 0)
        .collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} rows with a positive value, need 3",
            rows.len()
        )));
    }
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    if ms.iter().all(|&m| m == ms[0]) {
        return Err(Error::InsufficientData("all rows have the same m".into()));
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (x, y) = log_points(&ms, &values);
    let (slope, intercept, r_squared) = ols(&x, &y);

    let b = rows[0].replicates.len();
    let mut slope_ci = (f64::NAN, f64::NAN);
    if b > 0 && rows.iter().all(|r| r.replicates.len() == b) {
        let mut slopes: Vec<f64> = (0..b)
            .filter_map(|k| {
                let reps: Vec<f64> = rows.iter().map(|r| r.replicates[k]).collect();
                let (x, y) = log_points(&ms, &reps);
                let distinct = x.iter().any(|&v| v != x[0]);
                (x.len() >= 3 && distinct).then(|| ols(&x, &y).0)
            })
            .collect();
        if !slopes.is_empty() {
            slopes.sort_by(f64::total_cmp);
            let tail = 0.5 * (1.0 - level);
            slope_ci = (
                quantile_sorted(&slopes, tail),
                quantile_sorted(&slopes, 1.0 - tail),
            );
        }
    }
    Ok(RateFit {
        slope,
        intercept,
        slope_ci,
        r_squared,
        n_points: rows.len(),
    })
}

//! Distances between empirical laws of zero counts.

mod lp;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{mix_seed, SeedSpec};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    W1,
    FM,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::W1 => "W1",
            Metric::FM => "FM",
        }
    }

    pub fn distance(self, a: &[u32], b: &[u32]) -> Result<f64> {
        match self {
            Metric::W1 => w1_counts(a, b),
            Metric::FM => fm_counts(a, b),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "W1" => Ok(Metric::W1),
            "FM" => Ok(Metric::FM),
            _ => invalid(format!("unknown metric {s:?} (expected W1 or FM)")),
        }
    }
}

/// Where a count sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Polynomial {
        m: usize,
    },
    /// `X_M` with Gaussian coefficients, standing in for the limit process.
    Surrogate {
        m: usize,
    },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Polynomial { m } => write!(f, "{m}"),
            Source::Surrogate { m } => write!(f, "G-surrogate({m})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub law: String,
    pub source: Source,
    pub interval: (f64, f64),
    pub master_seed: u64,
    pub n: usize,
    /// Replications dropped because their count could not be certified.
    #[serde(default)]
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCountSample {
    pub counts: Vec<u32>,
    pub meta: SampleMeta,
}

impl ZeroCountSample {
    pub fn new(counts: Vec<u32>, mut meta: SampleMeta) -> Result<Self> {
        if counts.is_empty() {
            return invalid("zero-count sample is empty");
        }
        meta.n = counts.len();
        Ok(ZeroCountSample { counts, meta })
    }

    /// A sample without provenance, for tests and ad-hoc comparisons.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        let meta = SampleMeta {
            law: String::new(),
            source: Source::Polynomial { m: 0 },
            interval: (0.0, 1.0),
            master_seed: 0,
            n: 0,
            excluded: 0,
        };
        Self::new(counts, meta)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64).sum::<f64>() / self.len() as f64
    }

    /// Standard error of the mean (sample standard deviation over `√n`).
    pub fn std_error(&self) -> f64 {
        let n = self.len() as f64;
        if self.len() < 2 {
            return f64::NAN;
        }
        let mean = self.mean();
        let var = self
            .counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    }
}

fn nonempty(a: &[u32], b: &[u32]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return invalid("distance between empty samples");
    }
    Ok(())
}

/// Wasserstein-1 distance between the empirical laws of two count vectors.
///
/// Computed as the L1 distance between the two empirical quantile functions.
/// Both step at multiples of `1/n_a` and `1/n_b`, so the integral is exact on
/// the merged grid of multiples of `1/(n_a n_b)`; for equal sizes this is the
/// mean absolute difference of the sorted samples.
pub fn w1_counts(a: &[u32], b: &[u32]) -> Result<f64> {
    nonempty(a, b)?;
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa.len() == sb.len() {
        let total: u64 = sa
            .iter()
            .zip(&sb)
            .map(|(&x, &y)| x.abs_diff(y) as u64)
            .sum();
        return Ok(total as f64 / sa.len() as f64);
    }
    let (na, nb) = (sa.len() as u128, sb.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos: u128 = 0;
    let mut total: u128 = 0;
    while i < sa.len() && j < sb.len() {
        let next_a = (i as u128 + 1) * nb;
        let next_b = (j as u128 + 1) * na;
        let next = next_a.min(next_b);
        total += (next - pos) * sa[i].abs_diff(sb[j]) as u128;
        pos = next;
        if next == next_a {
            i += 1;
        }
        if next == next_b {
            j += 1;
        }
    }
    Ok(total as f64 / (na * nb) as f64)
}

/// Fortet-Mourier distance `sup { Σ f (μ̂ − ν̂) : |f| ≤ 1, Lip(f) ≤ 1 }`.
///
/// On the line it is enough to constrain `f` on the sorted union of the two
/// supports, with the Lipschitz condition only between neighbours; the
/// resulting linear program is solved exactly.
pub fn fm_counts(a: &[u32], b: &[u32]) -> Result<f64> {
    nonempty(a, b)?;
    let mut hist: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
    for &x in a {
        hist.entry(x).or_default().0 += 1;
    }
    for &y in b {
        hist.entry(y).or_default().1 += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let support: Vec<f64> = hist.keys().map(|&k| k as f64).collect();
    let weights: Vec<f64> = hist
        .values()
        .map(|&(ca, cb)| ca as f64 / na - cb as f64 / nb)
        .collect();
    let flipped: Vec<f64> = weights.iter().map(|w| -w).collect();
    // both programs have the same optimum (f ↦ −f); taking the max makes
    // the result bitwise symmetric in (a, b)
    let value = lp::bounded_lipschitz_sup(&support, &weights)
        .max(lp::bounded_lipschitz_sup(&support, &flipped));
    Ok(value.max(0.0))
}

pub fn wasserstein1(a: &ZeroCountSample, b: &ZeroCountSample) -> Result<f64> {
    w1_counts(&a.counts, &b.counts)
}

pub fn fortet_mourier(a: &ZeroCountSample, b: &ZeroCountSample) -> Result<f64> {
    fm_counts(&a.counts, &b.counts)
}

/// A distance with a percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bootstrap_b: usize,
    pub metric: Metric,
    /// Bootstrap replicates in replicate order.
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn resample<R: Rng>(xs: &[u32], rng: &mut R) -> Vec<u32> {
    (0..xs.len())
        .map(|_| xs[rng.random_range(0..xs.len())])
        .collect()
}

/// Percentile bootstrap for `metric(a, b)`, both samples resampled independently.
///
/// Replicate `r` draws from stream `r` of a key derived from `seed`, so the
/// result does not depend on how replicates are scheduled. The interval is
/// widened if needed to contain the point estimate.
pub fn bootstrap_ci(
    a: &ZeroCountSample,
    b: &ZeroCountSample,
    metric: Metric,
    reps: usize,
    level: f64,
    seed: SeedSpec,
) -> Result<DistanceEstimate> {
    if reps < 100 {
        return invalid(format!("bootstrap needs B >= 100, got {reps}"));
    }
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("confidence level {level} outside (0, 1)"));
    }
    let value = metric.distance(&a.counts, &b.counts)?;
    let key = mix_seed(seed.master_seed, seed.stream_index);
    let replicates: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = SeedSpec::new(key, r).rng();
            let ra = resample(&a.counts, &mut rng);
            let rb = resample(&b.counts, &mut rng);
            metric.distance(&ra, &rb)
        })
        .collect::<Result<_>>()?;
    let mut sorted = replicates.clone();
    sorted.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok(DistanceEstimate {
        value,
        ci_low: quantile_sorted(&sorted, tail).min(value),
        ci_high: quantile_sorted(&sorted, 1.0 - tail).max(value),
        bootstrap_b: reps,
        metric,
        replicates,
    })
}

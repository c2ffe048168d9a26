use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::{ExperimentConfig, Kind};
use super::fit::{fit_rate_with_level, RateFit};
use super::table::{to_json_string, ResultRow, ResultTable};
use crate::coefficients::{mix_seed, CoefficientLaw, SeedSpec};
use crate::error::{invalid, Error, Result};
use crate::metrics::{bootstrap_ci, SampleMeta, Source, ZeroCountSample};
use crate::rtp::{
    holder_seminorm, theta, theta_m, uniform_grid, ComplexPath, FnPath, PathPL, TrigPolynomial,
    DEFAULT_GRID,
};
use crate::zeros::{
    count_zeros_with, kac_phi_delta, kac_phi_delta_eps, CountOptions, Differentiable, KacParams,
    QuadSpec, MAX_DEPTH,
};
use crate::C64;

/// Inward shift of an endpoint at which the polynomial vanishes.
pub const ENDPOINT_SHIFT: f64 = 1e-9;

const TAG_POLYNOMIAL: u64 = 1;
const TAG_SURROGATE: u64 = 2;
const TAG_BOOTSTRAP: u64 = 3;
const TAG_THETA: u64 = 4;

/// Number of steps of the random walk used as a rough path.
pub const WALK_STEPS: usize = 4096;

/// Hölder exponent reported for the random walk.
pub const WALK_HOLDER_ALPHA: f64 = 1.0 / 3.0;

fn law_index(law: CoefficientLaw) -> u64 {
    CoefficientLaw::ALL
        .iter()
        .position(|&l| l == law)
        .expect("law listed in ALL") as u64
}

/// Master seed of the sample for `(source, law, m)`; replication `j` is stream `j` of it.
pub fn sample_key(master_seed: u64, source: Source, law: CoefficientLaw) -> u64 {
    let (tag, m) = match source {
        Source::Polynomial { m } => (TAG_POLYNOMIAL, m),
        Source::Surrogate { m } => (TAG_SURROGATE, m),
    };
    mix_seed(
        mix_seed(master_seed, tag),
        (law_index(law) << 40) | m as u64,
    )
}

/// Counts for one `(law, m)` cell together with bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSample {
    pub law: String,
    pub sample: ZeroCountSample,
    /// Replications whose count stayed uncertified (or unresolvable) and were dropped.
    pub flagged: usize,
    /// Replications where the polynomial vanished at an endpoint.
    pub endpoint_zeros: usize,
    /// Mean of the Kac functional over all replications, when `delta` is configured.
    pub kac_mean: Option<f64>,
    pub wall_ms: u64,
}

impl LawSample {
    pub fn m(&self) -> usize {
        match self.sample.meta.source {
            Source::Polynomial { m } | Source::Surrogate { m } => m,
        }
    }
}

enum Outcome {
    Count { count: u32, endpoint_zero: bool },
    Flagged,
}

/// Counts the zeros of `p` on `[a, b]` the way every experiment does.
///
/// An uncertified count is retried at `tol/100` and flagged if it stays
/// uncertified. If `p` vanishes at an endpoint, the endpoint is moved inward
/// and a coin from `rng` decides whether the zero is kept, so a crossing
/// zero counts one half on average. A zero of order `k ≤ 3` is located from
/// the first nonvanishing derivative: a simple zero moves the endpoint by
/// [`ENDPOINT_SHIFT`], a multiple one by a fraction of the radius where
/// `|p^(k)| t^k/k! > B_{k+1} t^{k+1}/(k+1)!` rules out other zeros. Zeros of
/// even order do not cross and are never kept. Higher orders are flagged.
fn count_replicate<R: Rng>(
    p: &TrigPolynomial,
    a: f64,
    b: f64,
    tol: f64,
    rng: &mut R,
) -> Result<Outcome> {
    let mut opts = CountOptions {
        tol,
        max_depth: MAX_DEPTH,
        compute_gap: false,
    };
    let (mut lo, mut hi) = (a, b);
    let mut extra = 0;
    let mut endpoint_zero = false;
    for (end, dir) in [(a, 1.0), (b, -1.0)] {
        if p.value(end).abs() > p.eval_error(0) {
            continue;
        }
        endpoint_zero = true;
        let jet = p.jet(end, 3);
        let keep = rng.random::<bool>();
        let order = if jet[1].abs() > ENDPOINT_SHIFT * p.sup_bound(2) + p.eval_error(1) {
            1
        } else {
            match (2..=3).find(|&k| jet[k].abs() > 1e6 * p.eval_error(k)) {
                Some(k) => k,
                None => {
                    log::warn!("zero of order four or more at endpoint {end}; replication flagged");
                    return Ok(Outcome::Flagged);
                }
            }
        };
        let shift = if order == 1 {
            ENDPOINT_SHIFT
        } else {
            let bound = p.deriv_sup_bound(order as u32 + 1);
            (0.5 * (order + 1) as f64 * jet[order].abs() / bound).min(1e-3)
        };
        if order % 2 == 1 && keep {
            extra += 1;
        }
        log::debug!("zero of order {order} at endpoint {end}; shifting inward by {shift:e}");
        if dir > 0.0 {
            lo = end + shift;
        } else {
            hi = end - shift;
        }
    }
    if lo >= hi {
        return Ok(Outcome::Flagged);
    }
    for attempt in 0..2 {
        let r = match count_zeros_with(p, lo, hi, opts) {
            Ok(r) => r,
            Err(Error::HypothesisViolation { .. }) => {
                log::warn!("zero at a shifted endpoint of [{lo}, {hi}]; replication flagged");
                return Ok(Outcome::Flagged);
            }
            Err(e) => return Err(e),
        };
        if r.certified {
            return Ok(Outcome::Count {
                count: r.count as u32 + extra,
                endpoint_zero,
            });
        }
        if attempt == 0 {
            opts.tol /= 100.0;
        }
    }
    Ok(Outcome::Flagged)
}

/// Draws `cfg.n_reps` polynomials of the given law and order and counts their zeros.
pub fn run_sample(
    cfg: &ExperimentConfig,
    law: CoefficientLaw,
    source: Source,
) -> Result<LawSample> {
    let start = Instant::now();
    let m = match source {
        Source::Polynomial { m } | Source::Surrogate { m } => m,
    };
    let key = sample_key(cfg.master_seed, source, law);
    let [a, b] = cfg.interval;
    let kac = match (cfg.delta, cfg.eps) {
        (Some(d), Some(e)) => Some((d, Some(KacParams::new(d, e)?))),
        (Some(d), None) => Some((d, None)),
        _ => None,
    };
    let results: Vec<(Outcome, Option<f64>)> = (0..cfg.n_reps as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = SeedSpec::new(key, j).rng();
            let coeffs: Vec<(f64, f64)> = (0..m)
                .map(|_| (law.sample(&mut rng), law.sample(&mut rng)))
                .collect();
            let p = TrigPolynomial::new(coeffs)?;
            let outcome = count_replicate(&p, a, b, cfg.tol, &mut rng)?;
            let phi = match kac {
                Some((_, Some(params))) => {
                    Some(kac_phi_delta_eps(&p, a, b, params, QuadSpec::default())?)
                }
                Some((d, None)) => Some(kac_phi_delta(&p, a, b, d, QuadSpec::default())?),
                None => None,
            };
            Ok((outcome, phi))
        })
        .collect::<Result<_>>()?;

    let mut counts = Vec::with_capacity(results.len());
    let (mut flagged, mut endpoint_zeros) = (0, 0);
    for (outcome, _) in &results {
        match outcome {
            Outcome::Count {
                count,
                endpoint_zero,
            } => {
                counts.push(*count);
                endpoint_zeros += *endpoint_zero as usize;
            }
            Outcome::Flagged => flagged += 1,
        }
    }
    if flagged > 0 {
        log::warn!(
            "{law} m={m}: {flagged} of {} replications flagged and excluded",
            cfg.n_reps
        );
    }
    let kac_mean =
        kac.map(|_| results.iter().filter_map(|r| r.1).sum::<f64>() / results.len() as f64);
    let meta = SampleMeta {
        law: match source {
            Source::Polynomial { .. } => law.name().to_owned(),
            Source::Surrogate { .. } => "surrogate".to_owned(),
        },
        source,
        interval: (a, b),
        master_seed: key,
        n: counts.len(),
        excluded: flagged,
    };
    if counts.is_empty() {
        return Err(Error::InsufficientData(format!(
            "every replication of {law} m={m} was flagged"
        )));
    }
    Ok(LawSample {
        law: meta.law.clone(),
        sample: ZeroCountSample::new(counts, meta)?,
        flagged,
        endpoint_zeros,
        kac_mean,
        wall_ms: if cfg.record_timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// One sample per `(law, m)` of the config, laws outermost.
pub fn run_zero_count_law(cfg: &ExperimentConfig) -> Result<Vec<LawSample>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &law in &cfg.laws {
        for &m in &cfg.m_values {
            out.push(run_sample(cfg, law, Source::Polynomial { m })?);
        }
    }
    Ok(out)
}

/// Reference sample for the limit law: Gaussian-coefficient `X_M`, `M = surrogate_M`.
pub fn sample_reference(cfg: &ExperimentConfig) -> Result<LawSample> {
    run_sample(
        cfg,
        CoefficientLaw::Gaussian,
        Source::Surrogate { m: cfg.surrogate_m },
    )
}

/// Mean-count rows with a normal-approximation interval at `level`.
pub fn zero_count_table(samples: &[LawSample], level: f64) -> ResultTable {
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * level);
    let rows = samples
        .iter()
        .map(|s| {
            let mean = s.sample.mean();
            let se = s.sample.std_error();
            ResultRow {
                m: s.m(),
                law: s.law.clone(),
                metric: "mean".into(),
                value: mean,
                ci_low: mean - z * se,
                ci_high: mean + z * se,
                n_reps: s.sample.len(),
                mean_count: mean,
                se_count: se,
                wall_ms: s.wall_ms,
                replicates: Vec::new(),
            }
        })
        .collect();
    ResultTable { rows }
}

/// Rate-curve table and one fitted slope per law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub table: ResultTable,
    pub fits: Vec<(String, RateFit)>,
    pub reference_n: usize,
    pub reference_mean: f64,
}

pub fn run_rate_curve(cfg: &ExperimentConfig) -> Result<RateCurve> {
    cfg.validate()?;
    if cfg.kind != Kind::RateCurve {
        return invalid(format!(
            "run_rate_curve needs a rate-curve config, got {:?}",
            cfg.kind
        ));
    }
    let reference = sample_reference(cfg)?;
    let samples = run_zero_count_law(cfg)?;
    rate_curve_from_samples(cfg, &samples, &reference)
}

/// Distances of every sample to `reference`, with bootstrap intervals and fits.
pub fn rate_curve_from_samples(
    cfg: &ExperimentConfig,
    samples: &[LawSample],
    reference: &LawSample,
) -> Result<RateCurve> {
    let boot_key = mix_seed(cfg.master_seed, TAG_BOOTSTRAP);
    let mut table = ResultTable::default();
    for (i, s) in samples.iter().enumerate() {
        let start = Instant::now();
        let est = bootstrap_ci(
            &s.sample,
            &reference.sample,
            cfg.metric,
            cfg.bootstrap_b,
            cfg.level,
            SeedSpec::new(boot_key, i as u64),
        )?;
        let elapsed = start.elapsed().as_millis() as u64;
        table.rows.push(ResultRow {
            m: s.m(),
            law: s.law.clone(),
            metric: cfg.metric.name().into(),
            value: est.value,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            n_reps: s.sample.len(),
            mean_count: s.sample.mean(),
            se_count: s.sample.std_error(),
            wall_ms: if cfg.record_timing {
                s.wall_ms + elapsed
            } else {
                0
            },
            replicates: est.replicates,
        });
    }
    let mut laws: Vec<String> = Vec::new();
    for s in samples {
        if !laws.contains(&s.law) {
            laws.push(s.law.clone());
        }
    }
    let mut fits = Vec::new();
    for law in laws {
        let sub = ResultTable {
            rows: table
                .rows
                .iter()
                .filter(|r| r.law == law)
                .cloned()
                .collect(),
        };
        let fit = match fit_rate_with_level(&sub, cfg.level) {
            Ok(f) => f,
            Err(Error::InsufficientData(msg)) => {
                log::warn!("slope for {law} undefined: {msg}");
                RateFit::undefined(sub.rows.iter().filter(|r| r.value > 0.0).count())
            }
            Err(e) => return Err(e),
        };
        fits.push((law, fit));
    }
    Ok(RateCurve {
        table,
        fits,
        reference_n: reference.sample.len(),
        reference_mean: reference.sample.mean(),
    })
}

/// `sup_t |Θ_m(f)(t) − Θ(f)(t)|` over the default grid.
pub fn theta_sup_error<P: ComplexPath + ?Sized>(path: &P, m: usize, quad_n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in uniform_grid(DEFAULT_GRID) {
        worst = worst.max((theta_m(path, m, t)? - theta(path, t, quad_n)?).abs());
    }
    Ok(worst)
}

/// Theta-convergence table plus the roughness of the random walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub table: ResultTable,
    pub walk_holder_alpha: f64,
    pub walk_holder_seminorm: f64,
}

/// Tabulates `‖Θ_m f − Θ f‖` for a smooth path (`u + iu²`), a constant path
/// and a random walk with [`WALK_STEPS`] steps, and `‖Θ_m S^m − X_m‖` for
/// random polynomials. Rows are labelled by path in the `law` column.
pub fn run_theta_convergence(cfg: &ExperimentConfig) -> Result<ThetaReport> {
    cfg.validate()?;
    let smooth = FnPath(|u: f64| C64::new(u, u * u));
    let constant = FnPath(|_: f64| C64::new(1.7, -0.4));
    let walk_seed = SeedSpec::new(mix_seed(cfg.master_seed, TAG_THETA), 0);
    let walk = PathPL::partial_sum(&crate::coefficients::sample_pairs(
        CoefficientLaw::Gaussian,
        WALK_STEPS,
        walk_seed,
    )?)?;
    let walk_holder = holder_seminorm(walk.times(), walk.values(), WALK_HOLDER_ALPHA)?;

    let mut table = ResultTable::default();
    let mut push = |m: usize, label: &str, value: f64, start: Instant| {
        table.rows.push(ResultRow {
            m,
            law: label.into(),
            metric: "theta_sup_err".into(),
            value,
            ci_low: value,
            ci_high: value,
            n_reps: 1,
            mean_count: f64::NAN,
            se_count: f64::NAN,
            wall_ms: if cfg.record_timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            },
            replicates: Vec::new(),
        });
    };
    for (i, &m) in cfg.m_values.iter().enumerate() {
        let start = Instant::now();
        push(m, "smooth", theta_sup_error(&smooth, m, 64)?, start);
        let start = Instant::now();
        push(m, "constant", theta_sup_error(&constant, m, 1)?, start);
        if WALK_STEPS.is_multiple_of(m) {
            let start = Instant::now();
            push(m, "random_walk", theta_sup_error(&walk, m, 1)?, start);
        } else {
            log::warn!("m = {m} does not divide {WALK_STEPS}; random-walk row skipped");
        }
        let start = Instant::now();
        let p = TrigPolynomial::random(
            CoefficientLaw::Gaussian,
            m,
            SeedSpec::new(mix_seed(cfg.master_seed, TAG_THETA), 1 + i as u64),
        )?;
        let s = p.partial_sum();
        let mut worst = 0.0f64;
        for t in uniform_grid(DEFAULT_GRID) {
            worst = worst.max((theta_m(&s, m, t)? - p.value(t)).abs());
        }
        push(m, "partial_sum", worst, start);
    }
    Ok(ThetaReport {
        table,
        walk_holder_alpha: WALK_HOLDER_ALPHA,
        walk_holder_seminorm: walk_holder,
    })
}

/// Writes `table` as CSV to `path` and a companion JSON (config echo plus
/// `extra`) next to it with extension `.json`.
pub fn write_outputs(
    path: &Path,
    cfg: &ExperimentConfig,
    table: &ResultTable,
    extra: serde_json::Value,
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    table.save(path)?;
    #[derive(Serialize)]
    struct Companion<'a> {
        config: &'a ExperimentConfig,
        rows: &'a [ResultRow],
        #[serde(flatten)]
        extra: serde_json::Value,
    }
    let extra = match extra {
        serde_json::Value::Null => serde_json::Value::Object(Default::default()),
        v => v,
    };
    let json = to_json_string(&Companion {
        config: cfg,
        rows: &table.rows,
        extra,
    })?;
    std::fs::write(path.with_extension("json"), json + "\n")?;
    Ok(())
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return invalid("thread count must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

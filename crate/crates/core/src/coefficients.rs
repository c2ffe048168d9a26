//! Coefficient laws for the pairs `(x_r, y_r)` and reproducible RNG streams.
//!
//! Every shipped law has mean 0 and variance 1 in each coordinate, and the
//! two coordinates of a pair are drawn independently.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// A named law for the i.i.d. coefficient pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientLaw {
    /// Standard normal. The only shipped law with a smooth density `e^{-Ψ}`.
    Gaussian,
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformScaled,
    /// Laplace with scale `1/√2`.
    LaplaceScaled,
}

impl CoefficientLaw {
    pub const ALL: [CoefficientLaw; 4] = [
        CoefficientLaw::Gaussian,
        CoefficientLaw::Rademacher,
        CoefficientLaw::UniformScaled,
        CoefficientLaw::LaplaceScaled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoefficientLaw::Gaussian => "gaussian",
            CoefficientLaw::Rademacher => "rademacher",
            CoefficientLaw::UniformScaled => "uniform_scaled",
            CoefficientLaw::LaplaceScaled => "laplace_scaled",
        }
    }

    /// Guaranteed finite absolute moment order (`usize::MAX` when all moments exist).
    pub fn moment_order(self) -> usize {
        // all four laws have moments of every order
        usize::MAX
    }

    /// Whether the law has a density `e^{-Ψ}` with smooth `Ψ` whose derivatives
    /// are integrable in every `L^q(e^{-Ψ})`.
    pub fn is_regular(self) -> bool {
        matches!(self, CoefficientLaw::Gaussian)
    }

    /// Exact `E|x|^k` for `k ∈ {1,…,4}`.
    pub fn abs_moment(self, k: u32) -> f64 {
        match (self, k) {
            (_, 0) => 1.0,
            (CoefficientLaw::Rademacher, _) => 1.0,
            (CoefficientLaw::Gaussian, 1) => (2.0 / std::f64::consts::PI).sqrt(),
            (CoefficientLaw::Gaussian, 2) => 1.0,
            (CoefficientLaw::Gaussian, 3) => 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            (CoefficientLaw::Gaussian, 4) => 3.0,
            // E|U|^k = (√3)^k / (k + 1)
            (CoefficientLaw::UniformScaled, k) => SQRT_3.powi(k as i32) / f64::from(k + 1),
            // E|L|^k = k! b^k, b = 1/√2
            (CoefficientLaw::LaplaceScaled, k) => {
                let fact: f64 = (1..=k).map(f64::from).product();
                fact * std::f64::consts::FRAC_1_SQRT_2.powi(k as i32)
            }
            _ => f64::NAN,
        }
    }

    /// Draws one scalar from the law.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            CoefficientLaw::Gaussian => rng.sample(StandardNormal),
            CoefficientLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            CoefficientLaw::UniformScaled => SQRT_3 * (2.0 * rng.random::<f64>() - 1.0),
            CoefficientLaw::LaplaceScaled => {
                // inverse CDF on u ∈ (-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
                -std::f64::consts::FRAC_1_SQRT_2 * u.signum() * tail.ln()
            }
        }
    }
}

impl fmt::Display for CoefficientLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoefficientLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoefficientLaw::ALL
            .into_iter()
            .find(|law| law.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown coefficient law `{s}`")))
    }
}

/// Identifies one independent random stream.
///
/// The stream generator is ChaCha20 keyed by a SplitMix64 expansion of
/// `master_seed` into 256 bits, with the ChaCha stream id set to
/// `stream_index`. Distinct stream indices select disjoint keystreams of the
/// same key. This mapping is part of the crate's stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    /// Builds the generator for this stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut state = self.master_seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Same stream index, master seed replaced by a hash of `(master_seed, label)`.
    pub fn derive(&self, label: u64) -> SeedSpec {
        SeedSpec {
            master_seed: mix_seed(self.master_seed, label),
            stream_index: self.stream_index,
        }
    }
}

/// One step of SplitMix64.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a master seed and a label into a new master seed.
pub fn mix_seed(master: u64, label: u64) -> u64 {
    let mut state = master ^ splitmix64(&mut label.clone());
    splitmix64(&mut state)
}

/// Draws `m` i.i.d. pairs. Within a stream the draws alternate `x_0, y_0, x_1, y_1, …`.
pub fn sample_pairs(law: CoefficientLaw, m: usize, seed: SeedSpec) -> Result<Vec<(f64, f64)>> {
    if m == 0 {
        return invalid("sample_pairs needs m >= 1");
    }
    let mut rng = seed.rng();
    Ok((0..m)
        .map(|_| {
            let x = law.sample(&mut rng);
            let y = law.sample(&mut rng);
            (x, y)
        })
        .collect())
}

/// Empirical moments of a coefficient law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: f64,
    /// Second moment about the law's known mean 0.
    pub variance: f64,
    pub abs_moment_3: f64,
    pub abs_moment_4: f64,
}

/// Moments pooled over both coordinates of `n` pairs (`2n` scalars).
pub fn moment_report(law: CoefficientLaw, n: usize, seed: SeedSpec) -> Result<MomentReport> {
    if n < 100 {
        return invalid("moment_report needs n >= 100");
    }
    let pairs = sample_pairs(law, n, seed)?;
    let count = (2 * n) as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for v in pairs.iter().flat_map(|&(x, y)| [x, y]) {
        let a = v.abs();
        let sq = v * v;
        s1 += v;
        s2 += sq;
        s3 += sq * a;
        s4 += sq * sq;
    }
    Ok(MomentReport {
        mean: s1 / count,
        variance: s2 / count,
        abs_moment_3: s3 / count,
        abs_moment_4: s4 / count,
    })
}

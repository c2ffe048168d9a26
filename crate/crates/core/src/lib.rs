//! Random trigonometric polynomials and the zeros of their Gaussian limit.
//!
//! The crate covers five layers, each in its own module:
//!
//! * [`coefficients`]: centered, unit-variance coefficient laws and
//!   reproducible RNG streams.
//! * [`rtp`]: the polynomial `X_m(t) = m^{-1/2} Σ_{r<m} [x_r cos(πrt/m) + y_r sin(πrt/m)]`,
//!   the partial-sum path `S^m` and the linear maps `Θ`, `Θ_m`.
//! * [`gaussian`]: the stationary limit process with covariance `sinc(π(t−s))`.
//! * [`zeros`]: certified zero counting and the Kac counting functionals.
//! * [`metrics`]: Wasserstein-1 and Fortet-Mourier distances between
//!   empirical zero-count laws.
//!
//! [`harness`] ties them together into reproducible Monte Carlo experiments.

pub mod coefficients;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod metrics;
pub mod quadrature;
pub mod rtp;
pub mod zeros;

pub use coefficients::{CoefficientLaw, SeedSpec};
pub use error::{Error, Result};
pub use rtp::TrigPolynomial;
pub use zeros::{CountResult, Differentiable, KacParams};

/// Complex scalar used for paths.
pub type C64 = num_complex::Complex64;

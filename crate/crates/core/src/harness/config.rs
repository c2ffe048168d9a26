use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientLaw;
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::zeros::DEFAULT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ZeroCountLaw,
    RateCurve,
    Validate,
    ThetaConvergence,
}

/// One experiment, as read from a JSON file.
///
/// Keys mirror the field names; `surrogate_M` and `bootstrap_B` keep their
/// capitalisation. Everything except `kind` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default = "default_laws")]
    pub laws: Vec<CoefficientLaw>,
    #[serde(default)]
    pub m_values: Vec<usize>,
    #[serde(rename = "surrogate_M", default = "default_surrogate")]
    pub surrogate_m: usize,
    #[serde(default = "default_reps")]
    pub n_reps: usize,
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(rename = "bootstrap_B", default = "default_bootstrap")]
    pub bootstrap_b: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_path: String,
    /// Confidence level of every bootstrap interval.
    #[serde(default = "default_level")]
    pub level: f64,
    /// Width at which zero isolation gives up and reports an uncertified count.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Write measured wall times; with `false` the column is 0 and output is byte-reproducible.
    #[serde(default = "default_true")]
    pub record_timing: bool,
    /// Validation only: name of a deliberately broken component (`"sinc"`).
    #[serde(default)]
    pub inject_fault: Option<String>,
}

fn default_laws() -> Vec<CoefficientLaw> {
    vec![CoefficientLaw::Gaussian]
}
fn default_surrogate() -> usize {
    2000
}
fn default_reps() -> usize {
    1000
}
fn default_interval() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_metric() -> Metric {
    Metric::W1
}
fn default_bootstrap() -> usize {
    1000
}
fn default_level() -> f64 {
    0.95
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_true() -> bool {
    true
}

fn bad(msg: String) -> Result<()> {
    Err(Error::Config(msg))
}

impl ExperimentConfig {
    /// A config of the given kind with every other field at its default.
    pub fn new(kind: Kind) -> Self {
        ExperimentConfig {
            kind,
            laws: default_laws(),
            m_values: Vec::new(),
            surrogate_m: default_surrogate(),
            n_reps: default_reps(),
            interval: default_interval(),
            delta: None,
            eps: None,
            metric: default_metric(),
            bootstrap_b: default_bootstrap(),
            master_seed: 0,
            output_path: String::new(),
            level: default_level(),
            tol: default_tol(),
            record_timing: true,
            inject_fault: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.interval;
        if !(0.0 <= a && a < b && b <= 1.0) {
            return bad(format!(
                "interval [{a}, {b}] is not a nondegenerate subinterval of [0, 1]"
            ));
        }
        if self.n_reps < 1 {
            return bad("n_reps must be at least 1".into());
        }
        if self.surrogate_m < 2 {
            return bad(format!(
                "surrogate_M = {} must be at least 2",
                self.surrogate_m
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level = {} outside (0, 1)", self.level));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return bad(format!("tol = {} outside (0, 1e-3]", self.tol));
        }
        for (name, v) in [("delta", self.delta), ("eps", self.eps)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("{name} = {v} must be finite and positive"));
                }
            }
        }
        if self.eps.is_some() && self.delta.is_none() {
            return bad("eps given without delta".into());
        }
        if let Some(f) = &self.inject_fault {
            if f != "sinc" {
                return bad(format!("unknown fault {f:?} (only \"sinc\" is supported)"));
            }
        }
        if self.m_values.contains(&0) {
            return bad("m_values must be positive".into());
        }
        match self.kind {
            Kind::ZeroCountLaw | Kind::RateCurve => {
                if self.laws.is_empty() {
                    return bad("laws must not be empty".into());
                }
                if self.m_values.is_empty() {
                    return bad("m_values must not be empty".into());
                }
            }
            Kind::ThetaConvergence if self.m_values.is_empty() => {
                return bad("m_values must not be empty".into())
            }
            _ => {}
        }
        if self.kind == Kind::RateCurve {
            if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
                return bad("m_values must be strictly increasing for a rate curve".into());
            }
            if self.bootstrap_b < 100 {
                return bad(format!(
                    "bootstrap_B = {} must be at least 100",
                    self.bootstrap_b
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full() {
        let cfg = ExperimentConfig::from_json_str(r#"{"kind": "validate"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new(Kind::Validate));

        let cfg = ExperimentConfig::from_json_str(
            r#"{"kind": "rate-curve", "laws": ["rademacher", "gaussian"], "m_values": [8, 16, 32],
                "surrogate_M": 500, "n_reps": 50, "interval": [0.0, 0.5], "delta": 0.1, "eps": 0.05,
                "metric": "FM", "bootstrap_B": 200, "master_seed": 7, "output_path": "out.csv"}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.laws,
            vec![CoefficientLaw::Rademacher, CoefficientLaw::Gaussian]
        );
        assert_eq!(cfg.surrogate_m, 500);
        assert_eq!(cfg.bootstrap_b, 200);
        assert_eq!(cfg.metric, Metric::FM);
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for bad in [
            r#"{"kind": "rate-curve", "m_values": [16, 8]}"#,
            r#"{"kind": "rate-curve", "m_values": [8, 16], "bootstrap_B": 10}"#,
            r#"{"kind": "zero-count-law", "m_values": []}"#,
            r#"{"kind": "zero-count-law", "m_values": [4], "n_reps": 0}"#,
            r#"{"kind": "zero-count-law", "m_values": [4], "interval": [0.5, 0.5]}"#,
            r#"{"kind": "zero-count-law", "m_values": [4], "laws": ["cauchy"]}"#,
            r#"{"kind": "zero-count-law", "m_values": [4], "unknown": 1}"#,
            r#"{"kind": "validate", "inject_fault": "everything"}"#,
            r#"{"kind": "validate", "eps": 0.1}"#,
            r#"{"kind": "sweep"}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json_str(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }
}

//! Solver configuration and the flat `key = value` config format.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Solver keys (all optional, defaults in parentheses):
//!
//! | key                | meaning                                          |
//! |--------------------|--------------------------------------------------|
//! | `dim`              | spatial dimension, 2 or 3 (2)                    |
//! | `resolution`       | grid points per axis, power of two (32)          |
//! | `s`, `p`, `q`, `r` | monitor exponents (0, 2, 2, 2)                   |
//! | `eta`              | time integrability η (4)                         |
//! | `dt`               | time step (1e-3)                                 |
//! | `t_max`            | final time (1)                                   |
//! | `scheme`           | `etd` or `imex2` (etd)                           |
//! | `nonlinear_form`   | `divergence` or `convective` (divergence)        |
//! | `dealias`          | `two-thirds`, the only rule (two-thirds)         |
//! | `family`           | `standard` or `smoothed` (standard)              |
//! | `blowup_threshold` | halting level of the trace proxy (1e6)           |
//! | `sample_every`     | steps between stored samples (10)                |
//! | `checkpoint_every` | steps between checkpoints, 0 = none (0)          |
//!
//! Keys outside this table are returned to the caller untouched.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::FamilyKind;
use crate::error::{Result, TllError};
use crate::tll::{TllParams, TraceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Exponential time differencing (second order, exact linear part).
    Etd,
    /// Crank-Nicolson for the Laplacian, Adams-Bashforth 2 for the rest.
    Imex2,
}

impl FromStr for Scheme {
    type Err = TllError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "etd" | "etd2" => Ok(Scheme::Etd),
            "imex2" | "imex" => Ok(Scheme::Imex2),
            other => Err(TllError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Etd => "etd",
            Scheme::Imex2 => "imex2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearForm {
    /// `−P div(uuᵀ)`.
    Divergence,
    /// `−P (u·∇)u`.
    Convective,
}

impl FromStr for NonlinearForm {
    type Err = TllError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divergence" => Ok(NonlinearForm::Divergence),
            "convective" => Ok(NonlinearForm::Convective),
            other => Err(TllError::Config(format!("unknown nonlinear form `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dim: usize,
    pub resolution: usize,
    pub params: TllParams,
    pub eta: f64,
    pub dt: f64,
    pub t_max: f64,
    pub scheme: Scheme,
    pub nonlinear_form: NonlinearForm,
    pub family: FamilyKind,
    pub blowup_threshold: f64,
    pub sample_every: usize,
    pub checkpoint_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dim: 2,
            resolution: 32,
            params: TllParams {
                s: 0.0,
                p: 2.0,
                q: 2.0,
                r: 2.0,
            },
            eta: 4.0,
            dt: 1e-3,
            t_max: 1.0,
            scheme: Scheme::Etd,
            nonlinear_form: NonlinearForm::Divergence,
            family: FamilyKind::Standard,
            blowup_threshold: 1e6,
            sample_every: 10,
            checkpoint_every: 0,
        }
    }
}

/// `n/(2p) + 1/η` and `n/(2p) + 2/η`, both required below one for the
/// well-posedness theory; the solver only reports them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub value: f64,
    pub satisfied: bool,
    pub strict_value: f64,
    pub strict_satisfied: bool,
}

pub const SOLVER_KEYS: &[&str] = &[
    "dim",
    "resolution",
    "s",
    "p",
    "q",
    "r",
    "eta",
    "dt",
    "t_max",
    "scheme",
    "nonlinear_form",
    "dealias",
    "family",
    "blowup_threshold",
    "sample_every",
    "checkpoint_every",
];

impl SolverConfig {
    /// Rejects unusable settings; returns the parameter constraint report and
    /// logs a warning when it is violated.
    pub fn validate(&self) -> Result<ConstraintReport> {
        if !(self.dim == 2 || self.dim == 3) {
            return Err(TllError::Config(format!("dim must be 2 or 3, got {}", self.dim)));
        }
        crate::spectral::Shape::vector(self.dim, self.resolution)
            .map_err(|e| TllError::Config(e.to_string()))?;
        TllParams::new(self.params.s, self.params.p, self.params.q, self.params.r)?;
        if self.params.s <= -1.0 {
            return Err(TllError::Config(format!("s = {} must exceed −1", self.params.s)));
        }
        if self.params.r.is_infinite() {
            return Err(TllError::Config("the solver needs r < ∞".into()));
        }
        TraceParams::new(self.params, self.eta)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(TllError::Config("dt must be positive".into()));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(TllError::Config("t_max must be nonnegative".into()));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(TllError::Config("blowup_threshold must be positive".into()));
        }
        if self.sample_every == 0 {
            return Err(TllError::Config("sample_every must be at least 1".into()));
        }
        let report = self.constraints();
        if !report.satisfied {
            log::warn!(
                "n/(2p) + 1/η = {:.4} is not below 1; the solver runs but the theory gives no guarantee",
                report.value
            );
        }
        Ok(report)
    }

    pub fn constraints(&self) -> ConstraintReport {
        let base = self.dim as f64 / (2.0 * self.params.p);
        let value = base + 1.0 / self.eta;
        let strict_value = base + 2.0 / self.eta;
        ConstraintReport {
            value,
            satisfied: value < 1.0,
            strict_value,
            strict_satisfied: strict_value < 1.0,
        }
    }

    pub fn trace_params(&self) -> Result<TraceParams> {
        TraceParams::new(self.params, self.eta)
    }

    /// Number of steps to reach `t_max` (the last step may overshoot by less
    /// than one `dt`).
    pub fn total_steps(&self) -> u64 {
        (self.t_max / self.dt - 1e-9).ceil().max(0.0) as u64
    }

    /// Applies the solver keys of `kv` on top of `self`; returns the keys it
    /// did not recognise.
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
        let mut rest = BTreeMap::new();
        for (k, v) in kv {
            match k.as_str() {
                "dim" => self.dim = parse(k, v)?,
                "resolution" => self.resolution = parse(k, v)?,
                "s" => self.params.s = parse(k, v)?,
                "p" => self.params.p = parse(k, v)?,
                "q" => self.params.q = parse(k, v)?,
                "r" => self.params.r = parse(k, v)?,
                "eta" => self.eta = parse(k, v)?,
                "dt" => self.dt = parse(k, v)?,
                "t_max" => self.t_max = parse(k, v)?,
                "scheme" => self.scheme = v.parse()?,
                "nonlinear_form" => self.nonlinear_form = v.parse()?,
                "family" => self.family = v.parse().map_err(|e: TllError| TllError::Config(e.to_string()))?,
                "dealias" => {
                    if v != "two-thirds" {
                        return Err(TllError::Config(format!("unsupported dealias rule `{v}`")));
                    }
                }
                "blowup_threshold" => self.blowup_threshold = parse(k, v)?,
                "sample_every" => self.sample_every = parse(k, v)?,
                "checkpoint_every" => self.checkpoint_every = parse(k, v)?,
                _ => {
                    rest.insert(k.clone(), v.clone());
                }
            }
        }
        Ok(rest)
    }

    pub fn from_key_values(kv: &BTreeMap<String, String>) -> Result<(SolverConfig, BTreeMap<String, String>)> {
        let mut config = SolverConfig::default();
        let rest = config.apply(kv)?;
        config.validate()?;
        Ok((config, rest))
    }

    /// FNV-1a hash of the canonical JSON form; identifies runs in manifests.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| TllError::Config(format!("cannot parse `{value}` for key `{key}`")))
}

/// Parses flat `key = value` text. Duplicate keys are an error.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| TllError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(TllError::Config(format!("line {}: empty key", lineno + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(TllError::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies() {
        let text = "# run\n dim = 3\nresolution=16\nscheme = imex2 # comment\nforcing = none\n\n";
        let kv = parse_key_values(text).unwrap();
        let (cfg, rest) = SolverConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.dim, 3);
        assert_eq!(cfg.resolution, 16);
        assert_eq!(cfg.scheme, Scheme::Imex2);
        assert_eq!(rest.get("forcing").map(String::as_str), Some("none"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_key_values("novalue").is_err());
        assert!(parse_key_values("a=1\na=2").is_err());
        let kv = parse_key_values("dt = fast").unwrap();
        assert!(SolverConfig::from_key_values(&kv).is_err());
        let kv = parse_key_values("s = -1.5").unwrap();
        assert!(SolverConfig::from_key_values(&kv).is_err());
        let kv = parse_key_values("resolution = 48").unwrap();
        assert!(SolverConfig::from_key_values(&kv).is_err());
    }

    #[test]
    fn constraint_is_reported_not_enforced() {
        let cfg = SolverConfig {
            eta: 1.5,
            ..SolverConfig::default()
        };
        let report = cfg.validate().unwrap();
        assert!(!report.satisfied);
        assert!(SolverConfig::default().validate().unwrap().satisfied);
    }

    #[test]
    fn step_count_and_hash() {
        let cfg = SolverConfig {
            dt: 1e-3,
            t_max: 1.0,
            ..SolverConfig::default()
        };
        assert_eq!(cfg.total_steps(), 1000);
        assert_eq!(cfg.hash(), cfg.clone().hash());
        assert_ne!(cfg.hash(), SolverConfig::default().with_dt(2e-3).hash());
    }

    impl SolverConfig {
        fn with_dt(mut self, dt: f64) -> Self {
            self.dt = dt;
            self
        }
    }
}

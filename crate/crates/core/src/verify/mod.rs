//! Property suites that measure the constants of the norm equivalences and
//! embeddings on seeded corpora.
//!
//! A qualitative statement "the map is continuous" becomes the falsifiable
//! check: the empirical extreme ratio over the corpus stays within a fixed
//! factor (default 2) as the resolution (and, for time-direction suites, the
//! interval length) varies. Reports name a witness `(seed, index)` for every
//! extreme so each number can be reproduced in isolation.

pub mod corpus;
mod suites;

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TllError};

pub use corpus::{Corpus, CorpusItem, CorpusSpec, GeneratorClass, TimeProfile};
pub use suites::{
    suite_decomposition_independence, suite_embedding_tll, suite_mixed_derivative, suite_norm_equivalences,
    suite_product, suite_sobolev_time,
};

/// Shared knobs of every suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub count: usize,
    pub dim: usize,
    pub band: i64,
    pub resolutions: Vec<usize>,
    pub times: Vec<f64>,
    /// Samples on `[0, T]` for the space-time suites.
    pub time_samples: usize,
    /// Allowed spread of the extreme ratio across levels.
    pub limit: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20240611,
            count: 50,
            dim: 2,
            band: 4,
            resolutions: vec![32, 64, 128],
            times: vec![0.1, 0.5, 1.0],
            time_samples: 32,
            limit: 2.0,
        }
    }
}

impl VerifyConfig {
    pub fn corpus(&self, generator: GeneratorClass) -> CorpusSpec {
        CorpusSpec {
            seed: self.seed,
            count: self.count,
            generator,
            dim: self.dim,
            band: self.band,
            resolutions: self.resolutions.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: u64,
    pub index: usize,
}

/// Ratio extremes at one level (a resolution, possibly with an interval length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub resolution: usize,
    pub time: Option<f64>,
    pub count: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_witness: Option<Witness>,
    pub max_witness: Option<Witness>,
}

/// One ratio family tracked across levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// Two-sided checks track the stability of both extremes.
    pub two_sided: bool,
    pub levels: Vec<LevelStats>,
    pub stability_factor: f64,
    pub passed: bool,
    pub worst_witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub suite: String,
    pub corpus: Option<CorpusSpec>,
    pub checks: Vec<CheckReport>,
    pub stability_factor: f64,
    pub limit: f64,
    pub passed: bool,
    pub skipped: Option<String>,
}

impl BracketReport {
    pub fn skipped(suite: &str, reason: impl Into<String>, limit: f64) -> Self {
        BracketReport {
            suite: suite.into(),
            corpus: None,
            checks: Vec::new(),
            stability_factor: 1.0,
            limit,
            passed: true,
            skipped: Some(reason.into()),
        }
    }

    /// One line per check: `suite/check: factor (limit) PASS|FAIL`.
    pub fn summary(&self) -> String {
        if let Some(reason) = &self.skipped {
            return format!("{}: skipped ({reason})", self.suite);
        }
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{}/{}: stability {:.4} (limit {}) {}",
                    self.suite,
                    c.name,
                    c.stability_factor,
                    self.limit,
                    if c.passed { "PASS" } else { "FAIL" }
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// An evaluation level: grid resolution and optional interval length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Level {
    pub resolution: usize,
    pub time: Option<f64>,
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.iter().any(|v| !v.is_finite()) || lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Evaluates `f(index, level)` over the corpus at every level (in parallel,
/// merged by index) and folds the ratios of each named check. `f` returns
/// one optional ratio per check; `None` excludes the item (e.g. zero field).
pub(crate) fn evaluate<F>(
    seed: u64,
    count: usize,
    levels: &[Level],
    checks: &[(&str, bool)],
    limit: f64,
    f: F,
) -> Result<Vec<CheckReport>>
where
    F: Fn(usize, Level) -> Result<Vec<Option<f64>>> + Sync,
{
    let mut per_check: Vec<Vec<LevelStats>> = vec![Vec::new(); checks.len()];
    for &level in levels {
        let rows: Vec<Vec<Option<f64>>> = (0..count)
            .into_par_iter()
            .map(|i| f(i, level))
            .collect::<Result<_>>()?;
        for (c, stats) in per_check.iter_mut().enumerate() {
            let mut s = LevelStats {
                resolution: level.resolution,
                time: level.time,
                count: 0,
                min_ratio: f64::INFINITY,
                max_ratio: f64::NEG_INFINITY,
                min_witness: None,
                max_witness: None,
            };
            for (i, row) in rows.iter().enumerate() {
                let Some(v) = row.get(c).copied().flatten() else { continue };
                let w = Witness {
                    seed,
                    index: i,
                };
                s.count += 1;
                // NaN ratios must not hide: they become the maximum
                if v.is_nan() || v > s.max_ratio {
                    s.max_ratio = if v.is_nan() { f64::INFINITY } else { v };
                    s.max_witness = Some(w);
                }
                if v < s.min_ratio {
                    s.min_ratio = v;
                    s.min_witness = Some(w);
                }
            }
            stats.push(s);
        }
    }
    Ok(checks
        .iter()
        .zip(per_check)
        .map(|(&(name, two_sided), levels)| {
            let used: Vec<&LevelStats> = levels.iter().filter(|l| l.count > 0).collect();
            let maxes: Vec<f64> = used.iter().map(|l| l.max_ratio).collect();
            let mins: Vec<f64> = used.iter().map(|l| l.min_ratio).collect();
            let mut factor = if used.is_empty() { 1.0 } else { spread(&maxes) };
            if two_sided && !used.is_empty() {
                factor = factor.max(spread(&mins));
            }
            let passed = factor <= limit;
            let worst_witness = if passed {
                None
            } else {
                used.iter()
                    .max_by(|a, b| a.max_ratio.total_cmp(&b.max_ratio))
                    .and_then(|l| l.max_witness)
            };
            CheckReport {
                name: name.to_string(),
                two_sided,
                levels,
                stability_factor: factor,
                passed,
                worst_witness,
            }
        })
        .collect())
}

pub(crate) fn assemble(suite: &str, corpus: Option<CorpusSpec>, checks: Vec<CheckReport>, limit: f64) -> BracketReport {
    let stability_factor = checks.iter().map(|c| c.stability_factor).fold(1.0, f64::max);
    let passed = checks.iter().all(|c| c.passed);
    BracketReport {
        suite: suite.into(),
        corpus,
        checks,
        stability_factor,
        limit,
        passed,
        skipped: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    NormEquivalences,
    DecompositionIndependence,
    EmbeddingTll,
    Product,
    MixedDerivative,
    SobolevTime,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        SuiteName::NormEquivalences,
        SuiteName::DecompositionIndependence,
        SuiteName::EmbeddingTll,
        SuiteName::Product,
        SuiteName::MixedDerivative,
        SuiteName::SobolevTime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::NormEquivalences => "norm-equivalences",
            SuiteName::DecompositionIndependence => "decomposition-independence",
            SuiteName::EmbeddingTll => "embedding-tll",
            SuiteName::Product => "product",
            SuiteName::MixedDerivative => "mixed-derivative",
            SuiteName::SobolevTime => "sobolev-time",
        }
    }

    /// Runs the suite with its default exponents.
    pub fn run(self, config: &VerifyConfig) -> Result<BracketReport> {
        use crate::tll::TllParams;
        let tp = |s, p, q, r| TllParams::new(s, p, q, r);
        match self {
            SuiteName::NormEquivalences => suite_norm_equivalences(config, &tp(0.5, 3.0, 2.0, 2.0)?),
            SuiteName::DecompositionIndependence => {
                suite_decomposition_independence(config, &tp(0.5, 2.5, 2.0, 2.0)?)
            }
            SuiteName::EmbeddingTll => suite_embedding_tll(config, &tp(0.0, 3.0, 2.0, 2.0)?, 0.5),
            SuiteName::Product => suite_product(config, &tp(0.5, 2.0, 2.0, 2.0)?),
            SuiteName::MixedDerivative => suite_mixed_derivative(config, &tp(0.0, 2.0, 2.0, 2.0)?, 2.0),
            SuiteName::SobolevTime => suite_sobolev_time(config, 0.3, 2.0),
        }
    }
}

impl FromStr for SuiteName {
    type Err = TllError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s || n.as_str().replace('-', "_") == s)
            .ok_or_else(|| TllError::param(format!("unknown suite `{s}`")))
    }
}

/// Runs every suite in a fixed order.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<BracketReport>> {
    SuiteName::ALL.iter().map(|s| s.run(config)).collect()
}

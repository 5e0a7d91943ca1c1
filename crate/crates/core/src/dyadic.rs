//! Littlewood-Paley block families `{φ̂_k}_{k=0..K}`.
//!
//! Blocks are evaluated analytically at arbitrary `ξ ∈ ℝⁿ`, so one family
//! serves every grid resolution.
//!
//! The standard family is built from the smooth radial cutoff
//! `φ(x) = h(2(1 − |x|))` with `h(t) = g(t)/(g(t) + g(1 − t))` and
//! `g(t) = e^{−1/t}` for `t > 0`: `φ = 1` on `|x| ≤ 1/2`, `φ = 0` on `|x| ≥ 1`.
//! Its blocks are `φ̂_0(ξ) = φ(ξ/2)` and `φ̂_k(ξ) = φ(2^{−k−1}ξ) − φ(2^{−k}ξ)`,
//! which telescope to `Σ_{k≤K} φ̂_k(ξ) = φ(2^{−K−1}ξ) = 1` for `|ξ| ≤ 2^K`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TllError};
use crate::spectral::symbol::{binary_multi_indices, mixed_partial, sphere_directions};

/// Plug-in evaluator for a block family.
pub trait BlockSymbol: Send + Sync {
    /// `φ̂_k(ξ) ≥ 0`.
    fn eval(&self, k: usize, xi: &[f64]) -> f64;
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between. `sharpness`
/// scales the exponents of `e^{−s/t}`; `1.0` is the classical transition.
pub fn smooth_step(t: f64, sharpness: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-sharpness / t).exp();
    let b = (-sharpness / (1.0 - t)).exp();
    a / (a + b)
}

/// Radial cutoff equal to 1 on `|x| ≤ inner`, 0 on `|x| ≥ 1`.
fn cutoff(radius: f64, inner: f64, sharpness: f64) -> f64 {
    smooth_step((1.0 - radius) / (1.0 - inner), sharpness)
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Telescoping radial blocks from a cutoff with plateau radius `inner`,
/// optionally multiplied by per-block weights.
#[derive(Debug, Clone)]
struct TelescopingBlocks {
    inner: f64,
    sharpness: f64,
    weights: Option<(f64, f64)>,
}

impl TelescopingBlocks {
    fn radial(&self, k: usize, r: f64) -> f64 {
        let phi = |x: f64| cutoff(x, self.inner, self.sharpness);
        let v = if k == 0 {
            phi(r / 2.0)
        } else {
            let scale = 2f64.powi(-(k as i32));
            (phi(r * scale / 2.0) - phi(r * scale)).max(0.0)
        };
        match self.weights {
            Some((even, odd)) => v * if k % 2 == 0 { even } else { odd },
            None => v,
        }
    }
}

impl BlockSymbol for TelescopingBlocks {
    fn eval(&self, k: usize, xi: &[f64]) -> f64 {
        self.radial(k, norm(xi))
    }
}

/// A finite Littlewood-Paley family.
#[derive(Clone)]
pub struct DyadicFamily {
    id: String,
    dim: usize,
    max_block: usize,
    width: u32,
    partition_of_unity: bool,
    blocks: Arc<dyn BlockSymbol>,
    grid_cache: Arc<Mutex<HashMap<(usize, usize), Arc<GridWeights>>>>,
}

/// `weights[k][flat] = φ̂_k(ξ_flat)` on one grid, blocks `0..=blocks_for_resolution`.
pub type GridWeights = Vec<Vec<f64>>;

impl fmt::Debug for DyadicFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DyadicFamily")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("max_block", &self.max_block)
            .field("width", &self.width)
            .field("partition_of_unity", &self.partition_of_unity)
            .finish()
    }
}

/// Largest useful block index on an `M`-point grid, `⌈log₂(M/2)⌉ + 1`.
pub fn block_cap(resolution: usize) -> usize {
    ((resolution as f64 / 2.0).log2().ceil() as usize) + 1
}

impl DyadicFamily {
    /// Wraps a plug-in evaluator. `width` is the support parameter `N`.
    pub fn custom(
        id: impl Into<String>,
        dim: usize,
        max_block: usize,
        width: u32,
        partition_of_unity: bool,
        blocks: Arc<dyn BlockSymbol>,
    ) -> Result<Self> {
        if dim == 0 || max_block == 0 || width == 0 {
            return Err(TllError::param("dim, K and N must be positive"));
        }
        Ok(DyadicFamily {
            id: id.into(),
            dim,
            max_block,
            width,
            partition_of_unity,
            blocks,
            grid_cache: Arc::default(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `K`, the largest block index.
    pub fn max_block(&self) -> usize {
        self.max_block
    }

    /// `N`: block `k ≥ 1` lives on `2^{k−N} ≤ |ξ| ≤ 2^{k+N}`.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn is_partition_of_unity(&self) -> bool {
        self.partition_of_unity
    }

    /// Radius below which the partition sum is meaningful, `2^{K−1}`.
    pub fn resolved_radius(&self) -> f64 {
        2f64.powi(self.max_block as i32 - 1)
    }

    #[inline]
    pub fn eval(&self, k: usize, xi: &[f64]) -> f64 {
        if k > self.max_block {
            return 0.0;
        }
        self.blocks.eval(k, xi)
    }

    pub fn partition_sum(&self, xi: &[f64]) -> f64 {
        (0..=self.max_block).map(|k| self.eval(k, xi)).sum()
    }

    /// Blocks that can be nonzero on an `M`-point grid.
    pub fn blocks_for_resolution(&self, resolution: usize) -> usize {
        self.max_block.min(block_cap(resolution))
    }

    /// Block values at every frequency of the `dim`-dimensional `M`-point
    /// grid, memoised per resolution.
    pub fn grid_weights(&self, resolution: usize) -> Result<Arc<GridWeights>> {
        let key = (resolution, self.max_block);
        if let Some(w) = self.grid_cache.lock().expect("cache lock").get(&key) {
            return Ok(w.clone());
        }
        let shape = crate::spectral::Shape::scalar(self.dim, resolution)?;
        let mut xi = vec![0.0; self.dim];
        let weights: GridWeights = (0..=self.blocks_for_resolution(resolution))
            .map(|k| {
                (0..shape.points())
                    .map(|flat| {
                        shape.wavevector(flat, &mut xi);
                        self.eval(k, &xi)
                    })
                    .collect()
            })
            .collect();
        let weights = Arc::new(weights);
        self.grid_cache.lock().expect("cache lock").insert(key, weights.clone());
        Ok(weights)
    }

    /// Same family with a different block count.
    pub fn with_max_block(&self, max_block: usize) -> DyadicFamily {
        DyadicFamily {
            max_block: max_block.max(1),
            ..self.clone()
        }
    }
}

/// The smooth partition of unity (`N = 1`).
pub fn build_standard_family(dim: usize, max_block: usize) -> Result<DyadicFamily> {
    if max_block < 1 {
        return Err(TllError::param("K must be at least 1"));
    }
    DyadicFamily::custom(
        "standard",
        dim,
        max_block,
        1,
        true,
        Arc::new(TelescopingBlocks {
            inner: 0.5,
            sharpness: 1.0,
            weights: None,
        }),
    )
}

/// An overlapping `N = 2` family: the cutoff plateau shrinks to `|x| ≤ 1/4`,
/// the transition uses `e^{−s/t}` with `s = transition_sharpness`, and blocks
/// carry alternating weights `1.25` (even `k`) and `0.75` (odd `k`), so the
/// partition sum stays within `[0.75, 1.25]` without being identically one.
pub fn build_smoothed_variant(
    dim: usize,
    max_block: usize,
    transition_sharpness: f64,
) -> Result<DyadicFamily> {
    if max_block < 1 {
        return Err(TllError::param("K must be at least 1"));
    }
    if !(transition_sharpness > 0.0 && transition_sharpness.is_finite()) {
        return Err(TllError::param("transition sharpness must be positive"));
    }
    DyadicFamily::custom(
        format!("smoothed(s={transition_sharpness})"),
        dim,
        max_block,
        2,
        false,
        Arc::new(TelescopingBlocks {
            inner: 0.25,
            sharpness: transition_sharpness,
            weights: Some((1.25, 0.75)),
        }),
    )
}

/// Which family constructor to use, by name (CLI and reports).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Standard,
    Smoothed,
}

impl FamilyKind {
    pub fn build(self, dim: usize, max_block: usize) -> Result<DyadicFamily> {
        match self {
            FamilyKind::Standard => build_standard_family(dim, max_block),
            FamilyKind::Smoothed => build_smoothed_variant(dim, max_block, 1.0),
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = TllError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(FamilyKind::Standard),
            "smoothed" => Ok(FamilyKind::Smoothed),
            other => Err(TllError::param(format!("unknown family `{other}`"))),
        }
    }
}

/// Sampling plan for [`validate_family`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySampling {
    /// Radii per octave.
    pub per_octave: usize,
    /// Directions per sphere.
    pub directions: usize,
}

impl Default for FamilySampling {
    fn default() -> Self {
        FamilySampling {
            per_octave: 16,
            directions: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEstimate {
    pub alpha: Vec<u8>,
    pub estimate: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportViolation {
    pub block: usize,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub family_id: String,
    pub constants: Vec<FamilyEstimate>,
    /// Measured `[D₁, D₂]` over the resolved band.
    pub partition_bounds: (f64, f64),
    pub negative_values: usize,
    pub violations: Vec<SupportViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
            && self.negative_values == 0
            && self.partition_bounds.0 > 0.0
            && self.constants.iter().all(|c| c.estimate.is_finite())
    }
}

/// Samples a family: per-`α` estimates of `sup_{k,ξ} |ξ|^{|α|} |∂^α φ̂_k(ξ)|`
/// for `α ∈ {0,1}ⁿ` (central differences), the partition bounds on
/// `|ξ| ≤ 2^{K−1}`, and every sample where a block is nonzero outside its
/// annulus. Never fails; problems are reported.
pub fn validate_family(family: &DyadicFamily, sampling: &FamilySampling) -> ValidationReport {
    let dim = family.dim();
    let big_k = family.max_block();
    let n = family.width() as i32;
    let dirs = sphere_directions(dim, sampling.directions);
    let lo_exp = -4;
    let hi_exp = big_k as i32 + n + 3;
    let steps = ((hi_exp - lo_exp) as usize) * sampling.per_octave;
    let radii: Vec<f64> = (0..=steps)
        .map(|i| 2f64.powf(lo_exp as f64 + i as f64 / sampling.per_octave as f64))
        .collect();

    let alphas = binary_multi_indices(dim);
    let mut sups = vec![0.0f64; alphas.len()];
    let mut counts = vec![0usize; alphas.len()];
    let mut violations = Vec::new();
    let mut negative_values = 0;
    let mut d1 = f64::INFINITY;
    let mut d2: f64 = 0.0;
    let mut xi = vec![0.0; dim];

    for k in 0..=big_k {
        let f = |x: &[f64]| Complex64::new(family.eval(k, x), 0.0);
        let lo = if k == 0 { 0.0 } else { 2f64.powi(k as i32 - n) };
        let hi = 2f64.powi(k as i32 + n);
        for &r in &radii {
            for d in &dirs {
                for (x, dv) in xi.iter_mut().zip(d) {
                    *x = r * dv;
                }
                let v = family.eval(k, &xi);
                if v < 0.0 {
                    negative_values += 1;
                }
                if v != 0.0 && (r < lo || r > hi) {
                    violations.push(SupportViolation {
                        block: k,
                        radius: r,
                        value: v,
                    });
                }
                for (ai, alpha) in alphas.iter().enumerate() {
                    let order = alpha.iter().filter(|&&a| a).count() as i32;
                    let deriv = mixed_partial(&f, &xi, alpha).norm();
                    let est = r.powi(order) * deriv;
                    counts[ai] += 1;
                    sups[ai] = sups[ai].max(if est.is_nan() { f64::INFINITY } else { est });
                }
            }
        }
    }

    let resolved = family.resolved_radius();
    let origin = vec![0.0; dim];
    for r in std::iter::once(0.0).chain(radii.iter().copied().filter(|&r| r <= resolved)) {
        let candidates: Vec<&Vec<f64>> = if r == 0.0 { vec![&origin] } else { dirs.iter().collect() };
        for d in candidates {
            for (x, dv) in xi.iter_mut().zip(d.iter()) {
                *x = r * dv;
            }
            let s = family.partition_sum(&xi);
            d1 = d1.min(s);
            d2 = d2.max(s);
        }
    }

    ValidationReport {
        family_id: family.id().to_string(),
        constants: alphas
            .iter()
            .zip(sups.iter().zip(&counts))
            .map(|(a, (&estimate, &sample_count))| FamilyEstimate {
                alpha: a.iter().map(|&b| b as u8).collect(),
                estimate,
                sample_count,
            })
            .collect(),
        partition_bounds: (d1, d2),
        negative_values,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-0.1, 1.0), 0.0);
        assert_eq!(smooth_step(1.2, 1.0), 1.0);
        assert!((smooth_step(0.5, 1.0) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3, 2.0) + smooth_step(0.7, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn origin_belongs_to_block_zero() {
        let fam = build_standard_family(2, 5).unwrap();
        assert_eq!(fam.eval(0, &[0.0, 0.0]), 1.0);
        for k in 1..=5 {
            assert_eq!(fam.eval(k, &[0.0, 0.0]), 0.0);
        }
    }

    #[test]
    fn powers_of_two_sit_on_one_plateau() {
        let fam = build_standard_family(1, 6).unwrap();
        for k in 1..=5usize {
            let xi = [2f64.powi(k as i32)];
            for j in 0..=6 {
                let want = if j == k { 1.0 } else { 0.0 };
                assert_eq!(fam.eval(j, &xi), want, "block {j} at 2^{k}");
            }
        }
    }

    #[test]
    fn rejects_zero_k() {
        assert!(build_standard_family(2, 0).is_err());
        assert!(build_smoothed_variant(2, 0, 1.0).is_err());
        assert!(build_smoothed_variant(2, 3, 0.0).is_err());
    }

    #[test]
    fn block_cap_matches_resolution() {
        assert_eq!(block_cap(64), 6);
        assert_eq!(block_cap(32), 5);
        assert_eq!(block_cap(2), 1);
    }

    #[test]
    fn standard_family_validates() {
        let fam = build_standard_family(2, 5).unwrap();
        let report = validate_family(&fam, &FamilySampling::default());
        assert!(report.violations.is_empty(), "{:?}", &report.violations[..3.min(report.violations.len())]);
        assert!(report.constants[0].estimate <= 1.0 + 1e-9);
        assert!((report.partition_bounds.0 - 1.0).abs() < 1e-12);
        assert!((report.partition_bounds.1 - 1.0).abs() < 1e-12);
        assert!(report.is_valid());
    }

    #[test]
    fn smoothed_family_validates() {
        let fam = build_smoothed_variant(2, 5, 1.0).unwrap();
        let report = validate_family(&fam, &FamilySampling::default());
        assert!(report.violations.is_empty());
        let (d1, d2) = report.partition_bounds;
        assert!(d1 >= 0.5 && d2 <= 2.0, "{d1} {d2}");
        assert!(report.constants.iter().all(|c| c.estimate.is_finite()));
    }

    struct Shifted(DyadicFamily);

    impl BlockSymbol for Shifted {
        fn eval(&self, k: usize, xi: &[f64]) -> f64 {
            let n = self.0.width() as i32;
            let shift = 2f64.powi(k as i32 + n + 1);
            let r = norm(xi) - shift;
            if r < 0.0 {
                return 0.0;
            }
            let mut probe = vec![0.0; xi.len()];
            probe[0] = r;
            self.0.eval(k, &probe)
        }
    }

    #[test]
    fn corrupted_family_reports_violations() {
        let base = build_standard_family(2, 4).unwrap();
        let bad = DyadicFamily::custom("shifted", 2, 4, 1, false, Arc::new(Shifted(base))).unwrap();
        let report = validate_family(&bad, &FamilySampling::default());
        assert!(!report.violations.is_empty());
        assert!(!report.is_valid());
    }

    #[test]
    fn report_serializes_with_expected_fields() {
        let fam = build_standard_family(1, 3).unwrap();
        let report = validate_family(&fam, &FamilySampling::default());
        let json = serde_json::to_value(&report).unwrap();
        let first = &json["constants"][0];
        assert!(first.get("alpha").is_some());
        assert!(first.get("estimate").is_some());
        assert!(first.get("sample_count").is_some());
        assert!(json["violations"].is_array());
    }
}

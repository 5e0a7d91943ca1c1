//! Triebel-Lizorkin-Lorentz norms `‖u‖_{F^{s,r}_{p,q}}`.
//!
//! For each block `k` the convolution `φ_k ∗ u` is computed spectrally; at
//! every grid point the sequence `(|φ_k ∗ u|(x))_k` is reduced with the
//! weighted `l^s_q` norm `(Σ_k [2^{ks} a_k]^q)^{1/q}`, and the resulting scalar
//! field is measured in `L_{p,r}`.
//!
//! The weight is `2^{+ks}`, the convention under which
//! `F^{s+τ,r}_{p,q} ⊂ F^{s,r}_{p,q}` holds for `τ ≥ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicFamily;
use crate::error::{Result, TllError};
use crate::operators;
use crate::rearrangement::{lorentz_of_samples, LorentzParams};
use crate::spectral::{forward_transform, inverse_transform, GridField, Shape, SpectralField};

/// Exponents `(s, p, q, r)` of `F^{s,r}_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TllParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl TllParams {
    pub fn new(s: f64, p: f64, q: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(TllError::param("s must be finite"));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(TllError::param(format!("p = {p} must lie in (1, ∞)")));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(TllError::param(format!("q = {q} must lie in (1, ∞)")));
        }
        if !(r >= 1.0) {
            return Err(TllError::param(format!("r = {r} must lie in [1, ∞]")));
        }
        Ok(TllParams { s, p, q, r })
    }

    pub fn with_s(self, s: f64) -> Self {
        TllParams { s, ..self }
    }

    pub fn with_p(self, p: f64) -> Self {
        TllParams { p, ..self }
    }

    pub fn lorentz(&self) -> LorentzParams {
        LorentzParams { p: self.p, r: self.r }
    }
}

/// Trace-space parameters: base exponents plus the time integrability `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub base: TllParams,
    pub eta: f64,
}

impl TraceParams {
    pub fn new(base: TllParams, eta: f64) -> Result<Self> {
        if !(eta > 1.0 && eta.is_finite()) {
            return Err(TllError::param(format!("eta = {eta} must lie in (1, ∞)")));
        }
        Ok(TraceParams { base, eta })
    }

    /// `θ = 1 − 1/η`.
    pub fn theta(&self) -> f64 {
        1.0 - 1.0 / self.eta
    }
}

/// `(Σ_k [2^{ks}·a_k]^q)^{1/q}`.
pub fn sequence_norm_lsq(seq: &[f64], s: f64, q: f64) -> f64 {
    seq.iter()
        .enumerate()
        .map(|(k, a)| (2f64.powf(k as f64 * s) * a).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Grid representatives `φ_k ∗ u` of the nonzero blocks of a field. Linear
/// in `u`, so combinations of decomposed fields need no further transforms.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    shape: Shape,
    blocks: Vec<(usize, GridField)>,
}

impl BlockDecomposition {
    pub fn new(spec: &SpectralField, family: &DyadicFamily) -> Result<Self> {
        let shape = spec.shape();
        if family.dim() != shape.dim {
            return Err(TllError::ShapeMismatch(format!(
                "family dimension {} vs field dimension {}",
                family.dim(),
                shape.dim
            )));
        }
        let table = family.grid_weights(shape.resolution)?;
        let mut blocks = Vec::new();
        for (k, weights) in table.iter().enumerate() {
            if weights.iter().all(|w| *w == 0.0) {
                continue;
            }
            let mut block = spec.clone();
            for c in 0..shape.components {
                for (v, &w) in block.component_mut(c).iter_mut().zip(weights.iter()) {
                    *v *= w;
                }
            }
            if block.data().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            blocks.push((k, inverse_transform(&block)));
        }
        Ok(BlockDecomposition { shape, blocks })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `Σ_j c_j u_j` block by block; all parts must share one family and shape.
    pub fn combine(parts: &[(Complex64, &BlockDecomposition)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| TllError::param("empty combination"))?.1;
        let mut blocks: Vec<(usize, GridField)> = Vec::new();
        for (c, part) in parts {
            first.shape.check_same(&part.shape)?;
            for (k, g) in &part.blocks {
                match blocks.iter_mut().find(|(j, _)| j == k) {
                    Some((_, acc)) => acc.axpy(*c, g)?,
                    None => blocks.push((*k, g.scale(*c))),
                }
            }
        }
        Ok(BlockDecomposition {
            shape: first.shape,
            blocks,
        })
    }

    /// Pointwise `l^s_q` profile `x ↦ ‖(|φ_k ∗ u|(x))_k‖_{l^s_q}`.
    pub fn profile(&self, params: &TllParams) -> Result<Vec<f64>> {
        let n = self.shape.points();
        let mut acc = vec![0.0f64; n];
        for (k, grid) in &self.blocks {
            let scale = 2f64.powf(*k as f64 * params.s);
            for (a, m) in acc.iter_mut().zip(grid.magnitudes()) {
                *a += (scale * m).powf(params.q);
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(TllError::NonFinite("block profile".into()));
        }
        Ok(acc.into_iter().map(|v| v.powf(1.0 / params.q)).collect())
    }

    pub fn norm(&self, params: &TllParams) -> Result<f64> {
        Ok(lorentz_of_samples(self.profile(params)?, self.shape.cell_measure(), params.lorentz()))
    }
}

/// Pointwise `l^s_q` profile over blocks, `x ↦ ‖(|φ_k ∗ u|(x))_k‖_{l^s_q}`.
pub fn block_profile(spec: &SpectralField, params: &TllParams, family: &DyadicFamily) -> Result<Vec<f64>> {
    BlockDecomposition::new(spec, family)?.profile(params)
}

/// `‖u‖_{F^{s,r}_{p,q}}` of a coefficient field.
pub fn tll_norm_spectral(spec: &SpectralField, params: &TllParams, family: &DyadicFamily) -> Result<f64> {
    let profile = block_profile(spec, params, family)?;
    Ok(lorentz_of_samples(profile, spec.shape().cell_measure(), params.lorentz()))
}

/// `‖u‖_{F^{s,r}_{p,q}} = ‖(φ_k ∗ u)_k‖_{L_{p,r}(l^s_q)}`.
pub fn tll_norm(field: &GridField, params: &TllParams, family: &DyadicFamily) -> Result<f64> {
    tll_norm_spectral(&forward_transform(field), params, family)
}

/// All multi-indices with `|α| ≤ k` in `n` dimensions.
pub fn multi_indices_up_to(dim: usize, order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u32 = prefix.iter().sum();
            for a in 0..=(order - used) {
                let mut v = prefix.clone();
                v.push(a);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// `Σ_{|α|≤k} ‖∂^α u‖_{F^{s,r}_{p,q}}` with spectral derivatives `(iξ)^α`.
pub fn derivative_equiv_norm(
    field: &GridField,
    params: &TllParams,
    order: u32,
    family: &DyadicFamily,
) -> Result<f64> {
    let spec = forward_transform(field);
    let mut total = 0.0;
    for alpha in multi_indices_up_to(field.dim(), order) {
        let d = operators::spectral_derivative(&spec, &alpha);
        total += tll_norm_spectral(&d, params, family)?;
    }
    Ok(total)
}

/// `Σ_{j≤m} ‖Δʲu‖_{F^{s,r}_{p,q}}`.
pub fn laplacian_power_norm(
    field: &GridField,
    params: &TllParams,
    m: u32,
    family: &DyadicFamily,
) -> Result<f64> {
    let mut spec = forward_transform(field);
    let mut total = tll_norm_spectral(&spec, params, family)?;
    for _ in 0..m {
        spec = spec.map_modes(|xi, _, v| v * -xi.iter().map(|x| x * x).sum::<f64>());
        total += tll_norm_spectral(&spec, params, family)?;
    }
    Ok(total)
}

/// `‖B^σ u‖_{F^{s−σ,r}_{p,q}}` with `B^σ = F⁻¹(1+|ξ|²)^{σ/2}F`.
pub fn bessel_shift_norm(
    field: &GridField,
    params: &TllParams,
    sigma: f64,
    family: &DyadicFamily,
) -> Result<f64> {
    let spec = operators::bessel_potential_spectral(&forward_transform(field), sigma);
    tll_norm_spectral(&spec, &params.with_s(params.s - sigma), family)
}

/// Sharp-cutoff splits `u = a_R + b_R` (high/low pass at `|ξ| ≤ R`) with the
/// pair of norms `(‖a_R‖_{F^s}, ‖b_R‖_{F^{s+2}})`, including the degenerate
/// splits `(u, 0)` and `(0, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitNorms {
    pub pairs: Vec<(f64, f64)>,
}

impl SplitNorms {
    pub fn compute(spec: &SpectralField, params: &TllParams, family: &DyadicFamily) -> Result<Self> {
        let top = spec.max_active_frequency();
        let high_params = *params;
        let low_params = params.with_s(params.s + 2.0);
        let mut pairs = vec![
            (tll_norm_spectral(spec, &high_params, family)?, 0.0),
            (0.0, tll_norm_spectral(spec, &low_params, family)?),
        ];
        let mut cutoffs = vec![0.0];
        let mut r = 1.0;
        while r < top {
            cutoffs.push(r);
            r *= 2.0;
        }
        for cut in cutoffs {
            let low = spec.filter(|xi| xi.iter().map(|x| x * x).sum::<f64>() <= cut * cut);
            let high = spec.sub(&low)?;
            pairs.push((
                tll_norm_spectral(&high, &high_params, family)?,
                tll_norm_spectral(&low, &low_params, family)?,
            ));
        }
        Ok(SplitNorms { pairs })
    }

    /// `K(t) = min_R [‖a_R‖ + t‖b_R‖]`.
    pub fn k_functional(&self, t: f64) -> f64 {
        self.pairs
            .iter()
            .map(|(a, b)| a + t * b)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Discrete K-functional `K(t, u)` between `F^{s}` and `F^{s+2}`.
pub fn k_functional(field: &GridField, params: &TllParams, t: f64, family: &DyadicFamily) -> Result<f64> {
    if !(t > 0.0) {
        return Err(TllError::param("K-functional needs t > 0"));
    }
    Ok(SplitNorms::compute(&forward_transform(field), params, family)?.k_functional(t))
}

/// Samples per octave of the `t` grid in [`trace_norm`].
pub const TRACE_SAMPLES_PER_OCTAVE: usize = 4;

/// `(Σ_j [t_j^{−θ} K(t_j,u)]^η Δlog t_j)^{1/η}` over log-spaced
/// `t_j ∈ [2^{−2K}, 2²]`, `K` the number of blocks used at this resolution.
pub fn trace_norm_spectral(spec: &SpectralField, trace: &TraceParams, family: &DyadicFamily) -> Result<f64> {
    let splits = SplitNorms::compute(spec, &trace.base, family)?;
    let blocks = family.blocks_for_resolution(spec.resolution()) as i32;
    let theta = trace.theta();
    let eta = trace.eta;
    let lo = -2 * blocks;
    let hi = 2;
    let per = TRACE_SAMPLES_PER_OCTAVE;
    let steps = (hi - lo) as usize * per;
    let dlog = std::f64::consts::LN_2 / per as f64;
    let mut sum = 0.0;
    for j in 0..=steps {
        let t = 2f64.powf(lo as f64 + j as f64 / per as f64);
        let k = splits.k_functional(t);
        sum += (t.powf(-theta) * k).powf(eta) * dlog;
    }
    Ok(sum.powf(1.0 / eta))
}

pub fn trace_norm(field: &GridField, trace: &TraceParams, family: &DyadicFamily) -> Result<f64> {
    trace_norm_spectral(&forward_transform(field), trace, family)
}

/// JSON norm report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub params: TllParams,
    pub family_id: String,
    pub value: f64,
    pub blocks_used: usize,
    pub resolution: usize,
}

pub fn norm_report(field: &GridField, params: &TllParams, family: &DyadicFamily) -> Result<NormReport> {
    Ok(NormReport {
        params: *params,
        family_id: family.id().to_string(),
        value: tll_norm(field, params, family)?,
        blocks_used: family.blocks_for_resolution(field.resolution()) + 1,
        resolution: field.resolution(),
    })
}

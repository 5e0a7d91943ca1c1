//! Fourier multiplier symbols and the sampled Mikhlin-constant estimator.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use crate::error::{Result, TllError};

type SymbolFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;
type DerivativeFn = dyn Fn(&[f64], &[bool]) -> Complex64 + Send + Sync;

/// Value assigned to the mean mode `ξ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroPolicy {
    /// The evaluator is smooth at the origin; call it there.
    Evaluate,
    /// The evaluator is undefined at the origin; use this value instead.
    Fixed(Complex64),
}

/// A symbol `ξ ↦ m(ξ)` acting coefficient-wise on spectral fields.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    eval: Arc<SymbolFn>,
    zero: ZeroPolicy,
    derivative: Option<Arc<DerivativeFn>>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("name", &self.name)
            .field("zero", &self.zero)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

fn norm_sq(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum()
}

/// Principal-branch complex power `z^α = exp(α·Log z)`.
pub fn principal_pow(z: Complex64, alpha: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return if alpha == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    (z.ln() * alpha).exp()
}

impl MultiplierSymbol {
    pub fn new(
        name: impl Into<String>,
        zero: ZeroPolicy,
        eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        MultiplierSymbol {
            name: name.into(),
            eval: Arc::new(eval),
            zero,
            derivative: None,
        }
    }

    /// Attaches analytic mixed partials `∂^α m` for `α ∈ {0,1}ⁿ` (mask form).
    pub fn with_derivative(
        mut self,
        d: impl Fn(&[f64], &[bool]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Radial symbol `m(ξ) = f(|ξ|²)`, smooth at the origin.
    pub fn radial(
        name: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        MultiplierSymbol::new(name, ZeroPolicy::Evaluate, move |xi| f(norm_sq(xi)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero_policy(&self) -> ZeroPolicy {
        self.zero
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Symbol value at `ξ`, honouring the zero-frequency policy.
    #[inline]
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        if let ZeroPolicy::Fixed(v) = self.zero {
            if xi.iter().all(|&x| x == 0.0) {
                return v;
            }
        }
        (self.eval)(xi)
    }

    /// Analytic mixed partial if one was attached.
    pub fn analytic_partial(&self, xi: &[f64], alpha: &[bool]) -> Option<Complex64> {
        self.derivative.as_ref().map(|d| d(xi, alpha))
    }

    /// Pointwise product `m₁·m₂`.
    pub fn product(&self, other: &MultiplierSymbol) -> MultiplierSymbol {
        let (a, b) = (self.clone(), other.clone());
        // each factor applies its own zero policy inside `eval`
        let name = format!("({})*({})", self.name, other.name);
        MultiplierSymbol::new(name, ZeroPolicy::Evaluate, move |xi| a.eval(xi) * b.eval(xi))
    }

    pub fn identity() -> Self {
        MultiplierSymbol::radial("identity", |_| Complex64::new(1.0, 0.0))
            .with_derivative(|_, alpha| {
                if alpha.iter().any(|&a| a) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
    }

    /// Laplace resolvent symbol `1/(λ + |ξ|²)`.
    pub fn resolvent(lambda: Complex64) -> Self {
        MultiplierSymbol::radial(format!("resolvent({lambda})"), move |r2| {
            (lambda + r2).inv()
        })
    }

    /// `λ/(λ + |ξ|²)`, the symbol of `λ(λ + A_L)⁻¹`.
    pub fn scaled_resolvent(lambda: Complex64) -> Self {
        MultiplierSymbol::radial(format!("scaled_resolvent({lambda})"), move |r2| {
            lambda / (lambda + r2)
        })
        .with_derivative(move |xi, alpha| {
            // ∂^α of λ(λ+ρ)⁻¹ with ρ = |ξ|² and distinct axes in α:
            // (−1)^j j! λ (λ+ρ)^{−1−j} ∏ 2ξᵢ
            let j = alpha.iter().filter(|&&a| a).count() as i32;
            let base = lambda + norm_sq(xi);
            let mut fact = 1.0;
            for i in 1..=j {
                fact *= i as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let chain: f64 = xi
                .iter()
                .zip(alpha)
                .filter(|(_, &a)| a)
                .map(|(x, _)| 2.0 * x)
                .product();
            lambda * base.powi(-1 - j) * (sign * fact * chain)
        })
    }

    /// Bessel potential symbol `(1 + |ξ|²)^{σ/2}`.
    pub fn bessel(sigma: f64) -> Self {
        MultiplierSymbol::radial(format!("bessel({sigma})"), move |r2| {
            Complex64::new((1.0 + r2).powf(sigma / 2.0), 0.0)
        })
    }

    /// `(1 + |ξ|²)^α` with the principal branch.
    pub fn shifted_power(alpha: f64) -> Self {
        MultiplierSymbol::radial(format!("shifted_power({alpha})"), move |r2| {
            principal_pow(Complex64::new(1.0 + r2, 0.0), alpha)
        })
    }

    /// Heat symbol `e^{−t|ξ|²}`.
    pub fn heat(t: f64) -> Self {
        MultiplierSymbol::radial(format!("heat({t})"), move |r2| {
            Complex64::new((-t * r2).exp(), 0.0)
        })
    }

    /// `−|ξ|²`, the Laplacian.
    pub fn laplacian() -> Self {
        MultiplierSymbol::radial("laplacian", |r2| Complex64::new(-r2, 0.0))
    }

    /// Spectral derivative `(iξ)^α` for a general multi-index.
    pub fn derivative(alpha: Vec<u32>) -> Self {
        let name = format!("derivative({alpha:?})");
        MultiplierSymbol::new(name, ZeroPolicy::Evaluate, move |xi| {
            alpha
                .iter()
                .zip(xi)
                .fold(Complex64::new(1.0, 0.0), |acc, (&a, &x)| {
                    acc * Complex64::new(0.0, x).powu(a)
                })
        })
    }

    /// Coordinate symbol `ξᵢ` (unbounded; fails the Mikhlin condition).
    pub fn coordinate(axis: usize) -> Self {
        MultiplierSymbol::new(format!("coordinate({axis})"), ZeroPolicy::Evaluate, move |xi| {
            Complex64::new(xi[axis], 0.0)
        })
    }

    /// Helmholtz matrix entry `ξᵢξⱼ/|ξ|²`, zero at the origin.
    pub fn helmholtz_entry(i: usize, j: usize) -> Self {
        MultiplierSymbol::new(
            format!("helmholtz_entry({i},{j})"),
            ZeroPolicy::Fixed(Complex64::new(0.0, 0.0)),
            move |xi| Complex64::new(xi[i] * xi[j] / norm_sq(xi), 0.0),
        )
    }
}

/// Coefficient-wise product `m(ξ)·û(ξ)`, applied to every component.
pub fn apply_multiplier(spec: &SpectralField, m: &MultiplierSymbol) -> Result<SpectralField> {
    let shape = spec.shape();
    let n = shape.points();
    let mut xi = vec![0.0; shape.dim];
    let mut out = spec.clone();
    for flat in 0..n {
        shape.wavevector(flat, &mut xi);
        let v = m.eval(&xi);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(TllError::NonFiniteSymbol {
                symbol: m.name().to_string(),
                xi: shape.wavevector_int(flat),
            });
        }
        for c in 0..shape.components {
            out.data_mut()[c * n + flat] *= v;
        }
    }
    Ok(out)
}

/// The open sector `Σ_φ = {z ≠ 0 : |arg z| < φ}` with a sampling rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub angle: f64,
}

impl Sector {
    pub fn new(angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle < PI) {
            return Err(TllError::param(format!("sector angle {angle} outside (0, π)")));
        }
        Ok(Sector { angle })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z != Complex64::new(0.0, 0.0) && z.arg().abs() < self.angle
    }

    /// Samples on the rays `arg λ ∈ {0, ±φ/2, ±0.95φ}` with moduli `2^j`,
    /// `j ∈ [min_exp, max_exp]`.
    pub fn samples(&self, min_exp: i32, max_exp: i32) -> Vec<Complex64> {
        let rays = [0.0, 0.5, -0.5, 0.95, -0.95];
        let mut out = Vec::new();
        for j in min_exp..=max_exp {
            let modulus = 2f64.powi(j);
            for frac in rays {
                out.push(Complex64::from_polar(modulus, frac * self.angle));
            }
        }
        out
    }
}

/// Sampling plan for the Mikhlin estimator: `|ξ| = 2^{j/per_octave}` on the
/// log range `[2^{min_exp}, 2^{max_exp}]`, times a set of directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MikhlinSampling {
    pub min_exp: i32,
    pub max_exp: i32,
    pub per_octave: usize,
    pub directions: usize,
}

impl Default for MikhlinSampling {
    fn default() -> Self {
        MikhlinSampling {
            min_exp: -10,
            max_exp: 10,
            per_octave: 4,
            directions: 64,
        }
    }
}

impl MikhlinSampling {
    pub fn doubled(&self) -> Self {
        MikhlinSampling {
            min_exp: 2 * self.min_exp,
            max_exp: 2 * self.max_exp,
            ..*self
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let steps = (self.max_exp - self.min_exp) as usize * self.per_octave;
        (0..=steps)
            .map(|i| 2f64.powf(self.min_exp as f64 + i as f64 / self.per_octave as f64))
            .collect()
    }
}

/// Unit directions in `ℝⁿ`: `±1` in 1D, equally spaced angles in 2D, a
/// Fibonacci lattice in 3D and deterministic pseudo-random points beyond.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|i| {
                // offset avoids sampling exactly on the axes only
                let t = 2.0 * PI * (i as f64 + 0.25) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![rho * phi.cos(), rho * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut state = 0x9e37_79b9_7f4a_7c15u64;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            };
            (0..count)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| next()).collect();
                    let n = norm_sq(&v).sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// All multi-indices `α ∈ {0,1}ⁿ`, as boolean masks, in binary order.
pub fn binary_multi_indices(dim: usize) -> Vec<Vec<bool>> {
    (0..1usize << dim)
        .map(|bits| (0..dim).map(|i| bits >> i & 1 == 1).collect())
        .collect()
}

/// Central-difference mixed partial `∂^α f(ξ)` for a mask `α ∈ {0,1}ⁿ`.
///
/// The step is relative to `|ξ|`: `1e−5·|ξ|` for first derivatives, growing a
/// decade per additional order so that roundoff does not swamp higher
/// mixed partials.
pub fn mixed_partial(f: &dyn Fn(&[f64]) -> Complex64, xi: &[f64], alpha: &[bool]) -> Complex64 {
    let axes: Vec<usize> = alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a)
        .map(|(i, _)| i)
        .collect();
    if axes.is_empty() {
        return f(xi);
    }
    let order = axes.len() as i32;
    let h = 1e-5 * 10f64.powi(order - 1) * norm_sq(xi).sqrt();
    let mut point = xi.to_vec();
    let mut acc = Complex64::new(0.0, 0.0);
    for signs in 0..1usize << axes.len() {
        let mut weight = 1.0;
        for (bit, &axis) in axes.iter().enumerate() {
            if signs >> bit & 1 == 1 {
                point[axis] = xi[axis] + h;
            } else {
                point[axis] = xi[axis] - h;
                weight = -weight;
            }
        }
        acc += f(&point) * weight;
    }
    acc / (2.0 * h).powi(order)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: Vec<u8>,
    pub estimate: f64,
    /// Estimate on the doubled log range.
    pub estimate_doubled: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MikhlinReport {
    pub symbol: String,
    pub dim: usize,
    pub sampling: MikhlinSampling,
    pub parameter_samples: usize,
    pub entries: Vec<AlphaEstimate>,
    /// `max_α C_α` on the base range.
    pub max_constant: f64,
    /// Ratio of the doubled-range maximum to the base-range maximum.
    pub growth_ratio: f64,
    pub divergent: bool,
}

/// Divergence threshold on the range-doubling growth ratio.
pub const MIKHLIN_GROWTH_LIMIT: f64 = 1.5;

fn sup_over(
    symbols: &[MultiplierSymbol],
    dim: usize,
    sampling: &MikhlinSampling,
    alpha: &[bool],
) -> (f64, usize) {
    let radii = sampling.radii();
    let dirs = sphere_directions(dim, sampling.directions);
    let mut sup: f64 = 0.0;
    let mut count = 0;
    let mut xi = vec![0.0; dim];
    for m in symbols {
        let f = |x: &[f64]| m.eval(x);
        for r in &radii {
            for d in &dirs {
                for (x, dv) in xi.iter_mut().zip(d) {
                    *x = r * dv;
                }
                let deriv = m
                    .analytic_partial(&xi, alpha)
                    .unwrap_or_else(|| mixed_partial(&f, &xi, alpha));
                let weight: f64 = xi
                    .iter()
                    .zip(alpha)
                    .filter(|(_, &a)| a)
                    .map(|(x, _)| x.abs())
                    .product();
                let v = weight * deriv.norm();
                count += 1;
                if v.is_finite() {
                    sup = sup.max(v);
                } else {
                    sup = f64::INFINITY;
                }
            }
        }
    }
    (sup, count)
}

/// Estimates `C_α = sup |ξ^α ∂^α m(ξ)|` for every `α ∈ {0,1}ⁿ`, taking the
/// supremum over all supplied symbols (one per parameter sample, e.g. `λ` in
/// a sector). The estimate is repeated on the doubled log range; growth above
/// [`MIKHLIN_GROWTH_LIMIT`] marks the symbol as failing the condition.
pub fn mikhlin_constants(
    symbols: &[MultiplierSymbol],
    dim: usize,
    sampling: &MikhlinSampling,
) -> Result<MikhlinReport> {
    if symbols.is_empty() {
        return Err(TllError::param("no symbols to sample"));
    }
    if dim == 0 {
        return Err(TllError::param("dimension must be positive"));
    }
    let doubled = sampling.doubled();
    let mut entries = Vec::new();
    for alpha in binary_multi_indices(dim) {
        let (est, count) = sup_over(symbols, dim, sampling, &alpha);
        let (est2, _) = sup_over(symbols, dim, &doubled, &alpha);
        entries.push(AlphaEstimate {
            alpha: alpha.iter().map(|&a| a as u8).collect(),
            estimate: est,
            estimate_doubled: est2,
            sample_count: count,
        });
    }
    let max_constant = entries.iter().map(|e| e.estimate).fold(0.0, f64::max);
    let max_doubled = entries.iter().map(|e| e.estimate_doubled).fold(0.0, f64::max);
    let growth_ratio = if max_constant > 0.0 {
        max_doubled / max_constant
    } else if max_doubled > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(MikhlinReport {
        symbol: symbols[0].name().to_string(),
        dim,
        sampling: *sampling,
        parameter_samples: symbols.len(),
        entries,
        max_constant,
        growth_ratio,
        divergent: !max_constant.is_finite() || !(growth_ratio <= MIKHLIN_GROWTH_LIMIT),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, inverse_transform, GridField, Shape};

    #[test]
    fn fixed_zero_policy_is_used_at_origin() {
        let m = MultiplierSymbol::helmholtz_entry(0, 0);
        assert_eq!(m.eval(&[0.0, 0.0]), Complex64::new(0.0, 0.0));
        assert!((m.eval(&[3.0, 4.0]).re - 9.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_symbol_names_frequency() {
        let shape = Shape::scalar(2, 8).unwrap();
        let spec = forward_transform(&GridField::constant(shape, 1.0));
        let bad = MultiplierSymbol::new("bad", ZeroPolicy::Evaluate, |xi| {
            Complex64::new(1.0 / (xi[0] - 2.0), 0.0)
        });
        match apply_multiplier(&spec, &bad) {
            Err(TllError::NonFiniteSymbol { xi, .. }) => assert_eq!(xi[0], 2),
            other => panic!("expected NonFiniteSymbol, got {other:?}"),
        }
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let shape = Shape::scalar(2, 16).unwrap();
        let u = GridField::from_fn(shape, |x, _| Complex64::new(x[0].sin() * x[1].cos(), 0.0));
        let v = inverse_transform(
            &apply_multiplier(&forward_transform(&u), &MultiplierSymbol::identity()).unwrap(),
        );
        assert!(u.max_abs_diff(&v).unwrap() < 1e-14);
    }

    #[test]
    fn analytic_and_numeric_partials_agree() {
        let lam = Complex64::from_polar(2.0, 1.0);
        let m = MultiplierSymbol::scaled_resolvent(lam);
        let f = |x: &[f64]| m.eval(x);
        let xi = [0.7, -1.3];
        for alpha in binary_multi_indices(2) {
            let a = m.analytic_partial(&xi, &alpha).unwrap();
            let n = mixed_partial(&f, &xi, &alpha);
            assert!((a - n).norm() < 1e-5 * (1.0 + a.norm()), "{alpha:?}: {a} vs {n}");
        }
    }

    #[test]
    fn sector_samples_lie_inside() {
        let s = Sector::new(3.0 * PI / 4.0).unwrap();
        assert!(s.samples(-4, 4).into_iter().all(|z| s.contains(z)));
        assert!(Sector::new(PI).is_err());
    }

    #[test]
    fn resolvent_symbol_is_mikhlin_uniformly_in_sector() {
        let sector = Sector::new(3.0 * PI / 4.0).unwrap();
        let symbols: Vec<_> = sector
            .samples(-6, 6)
            .into_iter()
            .map(MultiplierSymbol::scaled_resolvent)
            .collect();
        let report = mikhlin_constants(&symbols, 2, &MikhlinSampling::default()).unwrap();
        assert!(!report.divergent, "{report:?}");
        assert!(report.max_constant.is_finite());
    }

    #[test]
    fn coordinate_symbol_diverges() {
        let report =
            mikhlin_constants(&[MultiplierSymbol::coordinate(0)], 2, &MikhlinSampling::default())
                .unwrap();
        assert!(report.divergent);
        // α = 0 bound grows with the range: 2^10 versus 2^20
        let zero = &report.entries[0];
        assert!(zero.estimate_doubled > 100.0 * zero.estimate);
    }

    #[test]
    fn helmholtz_entry_is_bounded_by_one() {
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let report = mikhlin_constants(
                &[MultiplierSymbol::helmholtz_entry(i, j)],
                2,
                &MikhlinSampling::default(),
            )
            .unwrap();
            assert!(report.entries[0].estimate <= 1.0 + 1e-12);
            assert!(!report.divergent);
        }
    }
}

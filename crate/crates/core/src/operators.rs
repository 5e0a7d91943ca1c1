//! Functions of the Laplacian realised as explicit Fourier symbols, plus the
//! time-direction operators `(1 + d/dt)^α` and the even-reflection extension.
//!
//! With `A_L = −Δ` every operator here is `F⁻¹ f(|ξ|²) F` for some scalar
//! `f`; they all commute.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, TllError};
use crate::spectral::symbol::principal_pow;
use crate::spectral::{forward_transform, inverse_transform, wavenumber, GridField, Sector, SpectralField};

fn radial_map(spec: &SpectralField, f: impl Fn(f64) -> Complex64) -> SpectralField {
    spec.map_modes(|xi, _, v| v * f(xi.iter().map(|x| x * x).sum()))
}

/// `(iξ)^α û`.
pub fn spectral_derivative(spec: &SpectralField, alpha: &[u32]) -> SpectralField {
    spec.map_modes(|xi, _, v| {
        alpha
            .iter()
            .zip(xi)
            .fold(v, |acc, (&a, &x)| acc * Complex64::new(0.0, x).powu(a))
    })
}

pub fn bessel_potential_spectral(spec: &SpectralField, sigma: f64) -> SpectralField {
    radial_map(spec, |r2| Complex64::new((1.0 + r2).powf(sigma / 2.0), 0.0))
}

/// `B^σ u = F⁻¹(1+|ξ|²)^{σ/2} F u`.
pub fn bessel_potential(field: &GridField, sigma: f64) -> GridField {
    inverse_transform(&bessel_potential_spectral(&forward_transform(field), sigma))
}

fn check_resolvent_lambda(lambda: Complex64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(TllError::param("λ must be finite"));
    }
    if lambda.im == 0.0 && lambda.re <= 0.0 {
        return Err(TllError::param(format!("λ = {lambda} lies on the cut (−∞, 0]")));
    }
    Ok(())
}

pub fn laplace_resolvent_spectral(spec: &SpectralField, lambda: Complex64) -> Result<SpectralField> {
    check_resolvent_lambda(lambda)?;
    Ok(radial_map(spec, |r2| (lambda + r2).inv()))
}

/// `(λ + A_L)⁻¹ u = F⁻¹ (λ + |ξ|²)⁻¹ F u` for `λ ∉ (−∞, 0]`.
pub fn laplace_resolvent(field: &GridField, lambda: Complex64) -> Result<GridField> {
    Ok(inverse_transform(&laplace_resolvent_spectral(&forward_transform(field), lambda)?))
}

/// Relative residual `‖(λ + A_L) v − u‖ / ‖u‖`.
pub fn resolvent_residual(u: &GridField, v: &GridField, lambda: Complex64) -> Result<f64> {
    let forward = inverse_transform(&radial_map(&forward_transform(v), |r2| lambda + r2));
    let denom = u.l2_norm();
    let diff = forward.sub(u)?.l2_norm();
    Ok(if denom == 0.0 { diff } else { diff / denom })
}

pub fn heat_semigroup_spectral(spec: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(TllError::param(format!("heat semigroup needs t >= 0, got {t}")));
    }
    Ok(radial_map(spec, |r2| Complex64::new((-t * r2).exp(), 0.0)))
}

/// `e^{tΔ} u = F⁻¹ e^{−t|ξ|²} F u`.
pub fn heat_semigroup(field: &GridField, t: f64) -> Result<GridField> {
    Ok(inverse_transform(&heat_semigroup_spectral(&forward_transform(field), t)?))
}

pub fn fractional_power_spectral(spec: &SpectralField, alpha: f64) -> Result<SpectralField> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TllError::param(format!("fractional power α = {alpha} outside [0, 1]")));
    }
    Ok(radial_map(spec, |r2| principal_pow(Complex64::new(1.0 + r2, 0.0), alpha)))
}

/// `(1 + A_L)^α u = F⁻¹(1+|ξ|²)^α F u` for `α ∈ [0, 1]`.
pub fn fractional_power_resolved(field: &GridField, alpha: f64) -> Result<GridField> {
    Ok(inverse_transform(&fractional_power_spectral(&forward_transform(field), alpha)?))
}

/// Membership class of a holomorphic symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    /// Decays polynomially at 0 and ∞ (the Dunford-integral class).
    Decaying,
    /// Merely bounded and holomorphic on the sector.
    Bounded,
}

type HoloFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// `z ↦ f(z)` on a sector, applied to `A_L` via `f(|ξ|²)`.
#[derive(Clone)]
pub struct HolomorphicSymbol {
    name: String,
    eval: Arc<HoloFn>,
    sup_bound: f64,
    class: SymbolClass,
}

impl fmt::Debug for HolomorphicSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolomorphicSymbol")
            .field("name", &self.name)
            .field("sup_bound", &self.sup_bound)
            .field("class", &self.class)
            .finish()
    }
}

impl HolomorphicSymbol {
    pub fn new(
        name: impl Into<String>,
        sup_bound: f64,
        class: SymbolClass,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        HolomorphicSymbol {
            name: name.into(),
            eval: Arc::new(eval),
            sup_bound,
            class,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// Declared `‖f‖_{L_∞(Σ_φ)}`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn class(&self) -> SymbolClass {
        self.class
    }

    /// Sampled `sup |f|` on the sector (moduli `2^{−20..20}`).
    pub fn sampled_sup(&self, sector: &Sector) -> f64 {
        sector
            .samples(-20, 20)
            .into_iter()
            .map(|z| self.eval(z).norm())
            .fold(0.0, f64::max)
    }

    pub fn constant_one() -> Self {
        HolomorphicSymbol::new("one", 1.0, SymbolClass::Bounded, |_| Complex64::new(1.0, 0.0))
    }

    /// `g(z) = z/(1+z)²`. Its sup on `Σ_φ` is `1/(2(1+cos φ))`; the declared
    /// bound uses `φ → π` conservatively only through the caller's sector.
    pub fn g(sector: &Sector) -> Self {
        let bound = 1.0 / (2.0 * (1.0 + sector.angle.cos()));
        HolomorphicSymbol::new("z/(1+z)^2", bound, SymbolClass::Decaying, |z| {
            z / ((Complex64::new(1.0, 0.0) + z) * (Complex64::new(1.0, 0.0) + z))
        })
    }

    /// `z/(1+z)`.
    pub fn z_over_one_plus_z(sector: &Sector) -> Self {
        let bound = 1.0 / (sector.angle / 2.0).cos();
        HolomorphicSymbol::new("z/(1+z)", bound, SymbolClass::Bounded, |z| {
            z / (Complex64::new(1.0, 0.0) + z)
        })
    }

    /// `e^{−tz}`; bounded on sectors of angle `≤ π/2`.
    pub fn exp_decay(t: f64) -> Self {
        HolomorphicSymbol::new(format!("exp(-{t}z)"), 1.0, SymbolClass::Bounded, move |z| {
            (-z * t).exp()
        })
    }

    /// `λ/(λ+z)` for `λ > 0`.
    pub fn scaled_resolvent(lambda: f64, sector: &Sector) -> Self {
        let bound = 1.0 / (sector.angle / 2.0).cos();
        HolomorphicSymbol::new(format!("{lambda}/({lambda}+z)"), bound, SymbolClass::Bounded, move |z| {
            Complex64::new(lambda, 0.0) / (Complex64::new(lambda, 0.0) + z)
        })
    }
}

pub fn hinfty_apply_spectral(spec: &SpectralField, f: &HolomorphicSymbol) -> Result<SpectralField> {
    let shape = spec.shape();
    let n = shape.points();
    let r2 = shape.wavenumber_squares();
    let mut out = spec.clone();
    for (flat, &rho) in r2.iter().enumerate() {
        let v = f.eval(Complex64::new(rho, 0.0));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(TllError::NonFiniteSymbol {
                symbol: f.name().to_string(),
                xi: shape.wavevector_int(flat),
            });
        }
        for c in 0..shape.components {
            out.data_mut()[c * n + flat] *= v;
        }
    }
    Ok(out)
}

/// `f(A_L) u = F⁻¹ f(|ξ|²) F u`.
pub fn hinfty_apply(field: &GridField, f: &HolomorphicSymbol) -> Result<GridField> {
    Ok(inverse_transform(&hinfty_apply_spectral(&forward_transform(field), f)?))
}

/// Uniformly sampled signal `t_i = i·dt` whose values are flat vectors (one
/// entry per spatial sample; a scalar signal has length-one frames).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    dt: f64,
    frames: Vec<Vec<Complex64>>,
}

impl TimeSignal {
    pub fn new(dt: f64, frames: Vec<Vec<Complex64>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TllError::param("time step must be positive"));
        }
        if frames.len() < 2 {
            return Err(TllError::param("a time signal needs at least two samples"));
        }
        let width = frames[0].len();
        if width == 0 || frames.iter().any(|f| f.len() != width) {
            return Err(TllError::ShapeMismatch("time frames differ in length".into()));
        }
        Ok(TimeSignal { dt, frames })
    }

    pub fn from_scalars(dt: f64, values: &[f64]) -> Result<Self> {
        TimeSignal::new(dt, values.iter().map(|&v| vec![Complex64::new(v, 0.0)]).collect())
    }

    pub fn from_fields(dt: f64, fields: &[GridField]) -> Result<Self> {
        TimeSignal::new(dt, fields.iter().map(|f| f.data().to_vec()).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Vec<Complex64>] {
        &self.frames
    }

    pub fn width(&self) -> usize {
        self.frames[0].len()
    }

    /// Period when the samples are treated as one period.
    pub fn period(&self) -> f64 {
        self.dt * self.frames.len() as f64
    }

    pub fn scalars(&self) -> Vec<Complex64> {
        self.frames.iter().map(|f| f[0]).collect()
    }

    /// Rebuilds grid fields from the frames.
    pub fn to_fields(&self, shape: crate::spectral::Shape) -> Result<Vec<GridField>> {
        self.frames
            .iter()
            .map(|f| GridField::from_data(shape, f.clone()))
            .collect()
    }

    /// `(Σ_{i∈range} ‖u(t_i)‖^η dt)^{1/η}` for a caller-supplied frame norm.
    pub fn lebesgue_norm(&self, eta: f64, range: Range<usize>, frame_norm: impl Fn(&[Complex64]) -> f64) -> f64 {
        let sum: f64 = self.frames[range]
            .iter()
            .map(|f| frame_norm(f).powf(eta) * self.dt)
            .sum();
        sum.powf(1.0 / eta)
    }

    /// Applies a time-frequency symbol `m(ω)` per spatial sample, treating the
    /// samples as one period.
    pub fn apply_time_symbol(&self, m: impl Fn(f64) -> Complex64) -> TimeSignal {
        let n = self.frames.len();
        let width = self.width();
        let period = self.period();
        let symbols: Vec<Complex64> = (0..n)
            .map(|j| m(2.0 * PI * wavenumber(j, n) as f64 / period))
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut out = vec![vec![Complex64::new(0.0, 0.0); width]; n];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let scale = 1.0 / n as f64;
        for p in 0..width {
            for (i, v) in line.iter_mut().enumerate() {
                *v = self.frames[i][p];
            }
            fwd.process(&mut line);
            for (v, s) in line.iter_mut().zip(&symbols) {
                *v *= s * scale;
            }
            inv.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                out[i][p] = *v;
            }
        }
        TimeSignal {
            dt: self.dt,
            frames: out,
        }
    }

    pub fn sub(&self, other: &TimeSignal) -> Result<TimeSignal> {
        if self.frames.len() != other.frames.len() || self.width() != other.width() {
            return Err(TllError::ShapeMismatch("time signals differ in shape".into()));
        }
        Ok(TimeSignal {
            dt: self.dt,
            frames: self
                .frames
                .iter()
                .zip(&other.frames)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        })
    }
}

/// `B^α u = F⁻¹(1 + iω)^α F u` along time (principal branch), the signal
/// being one period.
pub fn time_fractional_power(signal: &TimeSignal, alpha: f64) -> Result<TimeSignal> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TllError::param(format!("time power α = {alpha} outside [0, 1]")));
    }
    Ok(signal.apply_time_symbol(|w| principal_pow(Complex64::new(1.0, w), alpha)))
}

/// Spectral `d/dt` along time.
pub fn time_derivative(signal: &TimeSignal) -> TimeSignal {
    signal.apply_time_symbol(|w| Complex64::new(0.0, w))
}

/// Relative size of `u(0)` above which the extension warns.
pub const ZERO_TRACE_TOLERANCE: f64 = 1e-8;

/// Even reflection `E_T`: for samples `u(t_0..t_N)` on `[0, T]` (both ends
/// included), returns `4N` samples of one period `[0, 4T)`:
/// `u(τ)` on `[0, T]`, `u(2T − τ)` on `(T, 2T)`, zero on `[2T, 4T)`.
pub fn extend_even_reflection(signal: &TimeSignal) -> TimeSignal {
    let n = signal.len() - 1;
    let width = signal.width();
    let head = signal.frames[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = signal
        .frames
        .iter()
        .flat_map(|f| f.iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    if head > ZERO_TRACE_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        log::warn!("even-reflection extension of a signal with nonzero initial value {head:e}");
    }
    let zero = vec![Complex64::new(0.0, 0.0); width];
    let frames = (0..4 * n)
        .map(|i| {
            if i <= n {
                signal.frames[i].clone()
            } else if i < 2 * n {
                signal.frames[2 * n - i].clone()
            } else {
                zero.clone()
            }
        })
        .collect();
    TimeSignal {
        dt: signal.dt,
        frames,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Shape;

    fn sample_field() -> GridField {
        let shape = Shape::scalar(2, 16).unwrap();
        GridField::from_fn(shape, |x, _| {
            Complex64::new((x[0] + x[1]).sin() + 0.3 * (3.0 * x[0]).cos(), 0.1 * (2.0 * x[1]).sin())
        })
    }

    fn mode(xi: &[i64]) -> GridField {
        let shape = Shape::scalar(xi.len(), 16).unwrap();
        inverse_transform(&SpectralField::pure_mode(shape, xi, 0, Complex64::new(1.0, 0.0)).unwrap())
    }

    #[test]
    fn identities_at_zero_parameter() {
        let u = sample_field();
        assert!(bessel_potential(&u, 0.0).max_abs_diff(&u).unwrap() < 1e-14);
        assert!(heat_semigroup(&u, 0.0).unwrap().max_abs_diff(&u).unwrap() < 1e-14);
        assert!(fractional_power_resolved(&u, 0.0).unwrap().max_abs_diff(&u).unwrap() < 1e-14);
        let one = HolomorphicSymbol::constant_one();
        assert!(hinfty_apply(&u, &one).unwrap().max_abs_diff(&u).unwrap() < 1e-14);
    }

    #[test]
    fn eigenfunction_scalings() {
        let u = mode(&[3, -1]);
        let r2: f64 = 10.0;
        let b = bessel_potential(&u, 0.7);
        assert!(b.max_abs_diff(&u.scale((1.0 + r2).powf(0.35))).unwrap() < 1e-13);
        let r = laplace_resolvent(&u, Complex64::new(1.0, 0.0)).unwrap();
        assert!(r.max_abs_diff(&u.scale(1.0 / (1.0 + r2))).unwrap() < 1e-15);
        let h = heat_semigroup(&u, 0.05).unwrap();
        assert!(h.max_abs_diff(&u.scale((-0.05 * r2).exp())).unwrap() < 1e-15);
        let f = fractional_power_resolved(&u, 0.5).unwrap();
        assert!(f.max_abs_diff(&u.scale((1.0 + r2).sqrt())).unwrap() < 1e-13);
    }

    #[test]
    fn resolvent_rejects_cut_and_inverts() {
        let u = sample_field();
        assert!(laplace_resolvent(&u, Complex64::new(-1.0, 0.0)).is_err());
        assert!(laplace_resolvent(&u, Complex64::new(0.0, 0.0)).is_err());
        let lam = Complex64::from_polar(2.0, 2.0);
        let v = laplace_resolvent(&u, lam).unwrap();
        assert!(resolvent_residual(&u, &v, lam).unwrap() < 1e-10);
    }

    #[test]
    fn g_matches_resolvent_composition() {
        // A(1+A)^{-2} = (1+A)^{-1} − (1+A)^{-2}
        let u = sample_field();
        let sector = Sector::new(3.0 * PI / 4.0).unwrap();
        let direct = hinfty_apply(&u, &HolomorphicSymbol::g(&sector)).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let r1 = laplace_resolvent(&u, one).unwrap();
        let r2 = laplace_resolvent(&r1, one).unwrap();
        let composed = r1.sub(&r2).unwrap();
        assert!(direct.max_abs_diff(&composed).unwrap() < 1e-10 * u.max_abs());
    }

    #[test]
    fn exp_symbol_matches_heat() {
        let u = sample_field();
        let a = hinfty_apply(&u, &HolomorphicSymbol::exp_decay(0.2)).unwrap();
        let b = heat_semigroup(&u, 0.2).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
    }

    #[test]
    fn non_finite_holomorphic_symbol_is_an_error() {
        let u = sample_field();
        let bad = HolomorphicSymbol::new("pole", 1.0, SymbolClass::Bounded, |z| (z - 2.0).inv());
        assert!(matches!(hinfty_apply(&u, &bad), Err(TllError::NonFiniteSymbol { .. })));
    }

    #[test]
    fn sampled_sup_respects_declared_bound() {
        let sector = Sector::new(3.0 * PI / 4.0).unwrap();
        for f in [
            HolomorphicSymbol::g(&sector),
            HolomorphicSymbol::z_over_one_plus_z(&sector),
            HolomorphicSymbol::scaled_resolvent(2.0, &sector),
        ] {
            assert!(f.sampled_sup(&sector) <= f.sup_bound() * (1.0 + 1e-12), "{}", f.name());
        }
    }

    #[test]
    fn time_power_identities() {
        let values: Vec<f64> = (0..64).map(|i| (2.0 * PI * i as f64 / 64.0).sin().powi(3) + 0.5).collect();
        let s = TimeSignal::from_scalars(0.01, &values).unwrap();
        let id = time_fractional_power(&s, 0.0).unwrap();
        for (a, b) in id.scalars().iter().zip(s.scalars()) {
            assert!((a - b).norm() < 1e-14);
        }
        let constant = TimeSignal::from_scalars(0.1, &[2.0; 16]).unwrap();
        let c = time_fractional_power(&constant, 0.37).unwrap();
        assert!(c.scalars().iter().all(|v| (v - 2.0).norm() < 1e-14));
        let half = time_fractional_power(&time_fractional_power(&s, 0.5).unwrap(), 0.5).unwrap();
        let full = time_fractional_power(&s, 1.0).unwrap();
        let deriv = time_derivative(&s);
        for ((h, f), (d, u)) in half.scalars().iter().zip(full.scalars()).zip(deriv.scalars().iter().zip(s.scalars())) {
            assert!((h - f).norm() < 1e-10);
            assert!((f - (u + d)).norm() < 1e-10);
        }
        assert!(time_fractional_power(&s, 1.5).is_err());
    }

    #[test]
    fn tent_extension() {
        let n = 8;
        let values: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let s = TimeSignal::from_scalars(1.0 / n as f64, &values).unwrap();
        let e = extend_even_reflection(&s);
        assert_eq!(e.len(), 4 * n);
        for (i, v) in e.scalars().iter().enumerate() {
            let tau = i as f64 / n as f64;
            let want = if tau <= 1.0 { tau } else if tau < 2.0 { 2.0 - tau } else { 0.0 };
            assert!((v.re - want).abs() < 1e-15, "τ = {tau}");
        }
        let zero = TimeSignal::from_scalars(0.1, &[0.0; 5]).unwrap();
        assert!(extend_even_reflection(&zero).scalars().iter().all(|v| v.norm() == 0.0));
    }
}

//! Helmholtz projection `P = 1 − ξξᵀ/|ξ|²`, the solenoidal/gradient split,
//! and the Stokes resolvent and semigroup on solenoidal fields.
//!
//! The mean mode is left untouched by `P`: constants are divergence-free
//! and are not gradients of periodic potentials.

use num_complex::Complex64;

use crate::error::{Result, TllError};
use crate::operators::{heat_semigroup_spectral, laplace_resolvent_spectral};
use crate::spectral::{forward_transform, inverse_transform, GridField, SpectralField};

/// Admission threshold of the relative divergence measure for Stokes inputs.
pub const SOLENOIDAL_TOLERANCE: f64 = 1e-10;

fn check_vector(shape: crate::spectral::Shape) -> Result<()> {
    if shape.dim < 2 {
        return Err(TllError::param("Helmholtz projection needs dim >= 2"));
    }
    if shape.components != shape.dim {
        return Err(TllError::ShapeMismatch(format!(
            "vector field needs {} components, got {}",
            shape.dim, shape.components
        )));
    }
    Ok(())
}

/// Spectral divergence `Σ_j iξ_j û_j` as a scalar field.
pub fn divergence_spectral(spec: &SpectralField) -> Result<SpectralField> {
    let shape = spec.shape();
    check_vector(shape)?;
    let n = shape.points();
    let mut out = SpectralField::zeros(shape.with_components(1));
    let mut xi = vec![0.0; shape.dim];
    for flat in 0..n {
        shape.wavevector(flat, &mut xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, x) in xi.iter().enumerate() {
            acc += Complex64::new(0.0, *x) * spec.data()[j * n + flat];
        }
        out.data_mut()[flat] = acc;
    }
    Ok(out)
}

/// `‖ξ·û‖ / ‖|ξ| û‖`: zero for solenoidal fields, at most one otherwise.
pub fn divergence_measure(spec: &SpectralField) -> Result<f64> {
    let shape = spec.shape();
    check_vector(shape)?;
    let n = shape.points();
    let mut xi = vec![0.0; shape.dim];
    let (mut num, mut den) = (0.0, 0.0);
    for flat in 0..n {
        shape.wavevector(flat, &mut xi);
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, x) in xi.iter().enumerate() {
            let v = spec.data()[j * n + flat];
            dot += v * x;
            den += r2 * v.norm_sqr();
        }
        num += dot.norm_sqr();
    }
    Ok(if den == 0.0 { 0.0 } else { (num / den).sqrt() })
}

/// Relative divergence of a grid vector field.
pub fn relative_divergence(u: &GridField) -> Result<f64> {
    divergence_measure(&forward_transform(u))
}

/// Largest pointwise magnitude of the spectral divergence on the grid.
pub fn divergence_max(u: &GridField) -> Result<f64> {
    Ok(inverse_transform(&divergence_spectral(&forward_transform(u))?).max_abs())
}

/// `iξ p̂` for a scalar spectrum.
pub fn gradient_spectral(potential: &SpectralField) -> Result<SpectralField> {
    let shape = potential.shape();
    if shape.components != 1 {
        return Err(TllError::ShapeMismatch("gradient needs a scalar field".into()));
    }
    let vshape = shape.with_components(shape.dim);
    let n = shape.points();
    let mut out = SpectralField::zeros(vshape);
    let mut xi = vec![0.0; shape.dim];
    for flat in 0..n {
        shape.wavevector(flat, &mut xi);
        let p = potential.data()[flat];
        for (j, x) in xi.iter().enumerate() {
            out.data_mut()[j * n + flat] = Complex64::new(0.0, *x) * p;
        }
    }
    Ok(out)
}

pub fn gradient(potential: &GridField) -> Result<GridField> {
    Ok(inverse_transform(&gradient_spectral(&forward_transform(potential))?))
}

pub fn helmholtz_project_spectral(spec: &SpectralField) -> Result<SpectralField> {
    Ok(helmholtz_split_spectral(spec)?.0)
}

/// `Pu = F⁻¹[1 − ξξᵀ/|ξ|²] F u`.
pub fn helmholtz_project(u: &GridField) -> Result<GridField> {
    Ok(inverse_transform(&helmholtz_project_spectral(&forward_transform(u))?))
}

/// Returns `(Pû, (1−P)û, p̂)` with `p̂(ξ) = ξᵀû/(i|ξ|²)` and `p̂(0) = 0`.
fn helmholtz_split_spectral(spec: &SpectralField) -> Result<(SpectralField, SpectralField, SpectralField)> {
    let shape = spec.shape();
    check_vector(shape)?;
    let n = shape.points();
    let mut sol = spec.clone();
    let mut grad = SpectralField::zeros(shape);
    let mut pot = SpectralField::zeros(shape.with_components(1));
    let mut xi = vec![0.0; shape.dim];
    for flat in 0..n {
        shape.wavevector(flat, &mut xi);
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        if r2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, x) in xi.iter().enumerate() {
            dot += spec.data()[j * n + flat] * x;
        }
        let coef = dot / r2;
        pot.data_mut()[flat] = coef / Complex64::new(0.0, 1.0);
        for (j, x) in xi.iter().enumerate() {
            let g = coef * x;
            grad.data_mut()[j * n + flat] = g;
            sol.data_mut()[j * n + flat] -= g;
        }
    }
    Ok((sol, grad, pot))
}

/// `u = Pu + ∇p` with the potential kept as a spectrum.
#[derive(Debug, Clone)]
pub struct HelmholtzSplit {
    pub solenoidal: GridField,
    pub gradient: GridField,
    pub potential_spectrum: SpectralField,
}

pub fn helmholtz_split(u: &GridField) -> Result<HelmholtzSplit> {
    let (sol, grad, pot) = helmholtz_split_spectral(&forward_transform(u))?;
    Ok(HelmholtzSplit {
        solenoidal: inverse_transform(&sol),
        gradient: inverse_transform(&grad),
        potential_spectrum: pot,
    })
}

fn admit_solenoidal(spec: &SpectralField) -> Result<()> {
    let divergence = divergence_measure(spec)?;
    if divergence > SOLENOIDAL_TOLERANCE {
        return Err(TllError::NotSolenoidal {
            divergence,
            tolerance: SOLENOIDAL_TOLERANCE,
        });
    }
    Ok(())
}

pub fn stokes_resolvent_spectral(spec: &SpectralField, lambda: Complex64) -> Result<SpectralField> {
    admit_solenoidal(spec)?;
    laplace_resolvent_spectral(spec, lambda)
}

/// `(λ + A_S)⁻¹ u`, the Laplace resolvent restricted to solenoidal fields.
pub fn stokes_resolvent(u: &GridField, lambda: Complex64) -> Result<GridField> {
    Ok(inverse_transform(&stokes_resolvent_spectral(&forward_transform(u), lambda)?))
}

pub fn stokes_semigroup_spectral(spec: &SpectralField, t: f64) -> Result<SpectralField> {
    admit_solenoidal(spec)?;
    heat_semigroup_spectral(spec, t)
}

/// `e^{−tA_S} u`, componentwise heat flow of a solenoidal field.
pub fn stokes_semigroup(u: &GridField, t: f64) -> Result<GridField> {
    Ok(inverse_transform(&stokes_semigroup_spectral(&forward_transform(u), t)?))
}

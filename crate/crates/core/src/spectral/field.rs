use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TllError};

/// Signed integer frequency of FFT bin `j` on an `m`-point axis, in `(−m/2, m/2]`.
#[inline]
pub fn wavenumber(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// Grid metadata shared by physical and spectral fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub dim: usize,
    pub resolution: usize,
    pub components: usize,
}

impl Shape {
    pub fn new(dim: usize, resolution: usize, components: usize) -> Result<Self> {
        if dim == 0 {
            return Err(TllError::param("dimension must be positive"));
        }
        if resolution < 2 || !resolution.is_power_of_two() {
            return Err(TllError::param(format!(
                "resolution {resolution} is not a power of two >= 2"
            )));
        }
        if components == 0 {
            return Err(TllError::param("component count must be positive"));
        }
        Ok(Shape {
            dim,
            resolution,
            components,
        })
    }

    pub fn scalar(dim: usize, resolution: usize) -> Result<Self> {
        Shape::new(dim, resolution, 1)
    }

    pub fn vector(dim: usize, resolution: usize) -> Result<Self> {
        Shape::new(dim, resolution, dim)
    }

    /// Grid points per component, `Mⁿ`.
    pub fn points(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.points() * self.components
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn with_components(&self, components: usize) -> Shape {
        Shape { components, ..*self }
    }

    /// Measure of one grid cell, `(2π/M)ⁿ`.
    pub fn cell_measure(&self) -> f64 {
        (2.0 * PI / self.resolution as f64).powi(self.dim as i32)
    }

    /// Measure of the torus, `(2π)ⁿ`.
    pub fn total_measure(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Multi-index of a flat point index (axis 0 slowest).
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        let m = self.resolution;
        for axis in (0..self.dim).rev() {
            out[axis] = flat % m;
            flat /= m;
        }
    }

    /// Integer frequency vector of a flat spectral index.
    pub fn wavevector_int(&self, flat: usize) -> Vec<i64> {
        let mut idx = vec![0; self.dim];
        self.multi_index(flat, &mut idx);
        idx.iter().map(|&j| wavenumber(j, self.resolution)).collect()
    }

    /// Frequency vector of a flat spectral index written into `out`.
    #[inline]
    pub fn wavevector(&self, mut flat: usize, out: &mut [f64]) {
        let m = self.resolution;
        for axis in (0..self.dim).rev() {
            out[axis] = wavenumber(flat % m, m) as f64;
            flat /= m;
        }
    }

    /// Physical coordinates of a flat point index written into `out`.
    pub fn point(&self, mut flat: usize, out: &mut [f64]) {
        let m = self.resolution;
        let h = 2.0 * PI / m as f64;
        for axis in (0..self.dim).rev() {
            out[axis] = (flat % m) as f64 * h;
            flat /= m;
        }
    }

    /// Squared norms `|ξ|²` for every spectral index of one component.
    pub fn wavenumber_squares(&self) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim];
        (0..self.points())
            .map(|flat| {
                self.wavevector(flat, &mut xi);
                xi.iter().map(|v| v * v).sum()
            })
            .collect()
    }

    pub(crate) fn check_same(&self, other: &Shape) -> Result<()> {
        if self != other {
            return Err(TllError::ShapeMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

macro_rules! field_common {
    ($ty:ident) => {
        impl $ty {
            pub fn zeros(shape: Shape) -> Self {
                $ty {
                    shape,
                    data: vec![Complex64::new(0.0, 0.0); shape.len()],
                }
            }

            pub fn from_data(shape: Shape, data: Vec<Complex64>) -> Result<Self> {
                if data.len() != shape.len() {
                    return Err(TllError::ShapeMismatch(format!(
                        "expected {} samples for {:?}, got {}",
                        shape.len(),
                        shape,
                        data.len()
                    )));
                }
                Ok($ty { shape, data })
            }

            pub fn shape(&self) -> Shape {
                self.shape
            }

            pub fn dim(&self) -> usize {
                self.shape.dim
            }

            pub fn resolution(&self) -> usize {
                self.shape.resolution
            }

            pub fn components(&self) -> usize {
                self.shape.components
            }

            pub fn data(&self) -> &[Complex64] {
                &self.data
            }

            pub fn data_mut(&mut self) -> &mut [Complex64] {
                &mut self.data
            }

            pub fn into_data(self) -> Vec<Complex64> {
                self.data
            }

            pub fn component(&self, c: usize) -> &[Complex64] {
                let n = self.shape.points();
                &self.data[c * n..(c + 1) * n]
            }

            pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
                let n = self.shape.points();
                &mut self.data[c * n..(c + 1) * n]
            }

            /// Extracts component `c` as a scalar field.
            pub fn extract_component(&self, c: usize) -> Self {
                $ty {
                    shape: self.shape.with_components(1),
                    data: self.component(c).to_vec(),
                }
            }

            /// Stacks scalar fields of identical shape into one multi-component field.
            pub fn stack(parts: &[Self]) -> Result<Self> {
                let first = parts
                    .first()
                    .ok_or_else(|| TllError::param("cannot stack zero fields"))?;
                let base = first.shape;
                let mut data = Vec::with_capacity(base.len() * parts.len());
                for p in parts {
                    if p.shape.dim != base.dim || p.shape.resolution != base.resolution {
                        return Err(TllError::ShapeMismatch(format!("{:?} vs {:?}", p.shape, base)));
                    }
                    data.extend_from_slice(&p.data);
                }
                let comps = data.len() / base.points();
                Ok($ty {
                    shape: base.with_components(comps),
                    data,
                })
            }

            pub fn scale(&self, c: impl Into<Complex64>) -> Self {
                let c = c.into();
                $ty {
                    shape: self.shape,
                    data: self.data.iter().map(|v| v * c).collect(),
                }
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.shape.check_same(&other.shape)?;
                Ok($ty {
                    shape: self.shape,
                    data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
                })
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.shape.check_same(&other.shape)?;
                Ok($ty {
                    shape: self.shape,
                    data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
                })
            }

            /// `self += a · other`.
            pub fn axpy(&mut self, a: impl Into<Complex64>, other: &Self) -> Result<()> {
                self.shape.check_same(&other.shape)?;
                let a = a.into();
                for (x, y) in self.data.iter_mut().zip(&other.data) {
                    *x += a * y;
                }
                Ok(())
            }

            pub fn max_abs(&self) -> f64 {
                self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
            }

            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
            }

            /// Largest absolute entrywise difference.
            pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
                self.shape.check_same(&other.shape)?;
                Ok(self
                    .data
                    .iter()
                    .zip(&other.data)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max))
            }
        }
    };
}

/// Samples of an `ℂ^c`-valued function on the uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    shape: Shape,
    data: Vec<Complex64>,
}

/// Fourier series coefficients of a [`GridField`], in FFT index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    shape: Shape,
    data: Vec<Complex64>,
}

field_common!(GridField);
field_common!(SpectralField);

impl GridField {
    /// Samples `f(x, c)` at every grid point and component.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[f64], usize) -> Complex64) -> Self {
        let n = shape.points();
        let mut x = vec![0.0; shape.dim];
        let mut data = Vec::with_capacity(shape.len());
        for c in 0..shape.components {
            for flat in 0..n {
                shape.point(flat, &mut x);
                data.push(f(&x, c));
            }
        }
        GridField { shape, data }
    }

    pub fn from_real(shape: Shape, values: &[f64]) -> Result<Self> {
        GridField::from_data(shape, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(shape: Shape, value: f64) -> Self {
        GridField {
            shape,
            data: vec![Complex64::new(value, 0.0); shape.len()],
        }
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitudes(&self) -> Vec<f64> {
        let n = self.shape.points();
        let mut out = vec![0.0; n];
        for c in 0..self.shape.components {
            for (o, v) in out.iter_mut().zip(self.component(c)) {
                *o += v.norm_sqr();
            }
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }

    /// `L_p` norm of the pointwise magnitude with cell measure weighting.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mags = self.magnitudes();
        let cell = self.shape.cell_measure();
        if p.is_infinite() {
            return mags.iter().copied().fold(0.0, f64::max);
        }
        (mags.iter().map(|v| v.powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let cell = self.shape.cell_measure();
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// `L₂` inner product `∫ Σ_c u_c · conj(v_c)`.
    pub fn inner(&self, other: &GridField) -> Result<Complex64> {
        self.shape.check_same(&other.shape)?;
        let cell = self.shape.cell_measure();
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * cell)
    }

    /// Largest imaginary part relative to the largest magnitude.
    pub fn imag_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        self.data.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / max
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.re).collect()
    }
}

impl SpectralField {
    /// Weighted coefficient norm `((2π)ⁿ Σ |û|²)^{1/2}`, equal to the grid `L₂` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.shape.total_measure()).sqrt()
    }

    /// Applies `f(ξ, c, û) → û'` to every coefficient.
    pub fn map_modes(&self, mut f: impl FnMut(&[f64], usize, Complex64) -> Complex64) -> Self {
        let n = self.shape.points();
        let mut xi = vec![0.0; self.shape.dim];
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.shape.components {
            for flat in 0..n {
                self.shape.wavevector(flat, &mut xi);
                data.push(f(&xi, c, self.data[c * n + flat]));
            }
        }
        SpectralField {
            shape: self.shape,
            data,
        }
    }

    /// A single mode `amplitude · e^{i⟨ξ,x⟩}` in component `c`.
    pub fn pure_mode(shape: Shape, xi: &[i64], c: usize, amplitude: Complex64) -> Result<Self> {
        if xi.len() != shape.dim {
            return Err(TllError::ShapeMismatch("frequency dimension".into()));
        }
        let m = shape.resolution as i64;
        let mut flat = 0usize;
        for &k in xi {
            if k <= -m / 2 || k > m / 2 {
                return Err(TllError::param(format!("frequency {k} not resolved at M = {m}")));
            }
            flat = flat * shape.resolution + k.rem_euclid(m) as usize;
        }
        let mut out = SpectralField::zeros(shape);
        out.data[c * shape.points() + flat] = amplitude;
        Ok(out)
    }

    /// Flat index of an integer frequency vector, if resolved.
    pub fn index_of(&self, xi: &[i64]) -> Option<usize> {
        let m = self.shape.resolution as i64;
        let mut flat = 0usize;
        for &k in xi {
            if k <= -m / 2 || k > m / 2 {
                return None;
            }
            flat = flat * self.shape.resolution + k.rem_euclid(m) as usize;
        }
        Some(flat)
    }

    /// Keeps only the modes selected by `keep(ξ)`.
    pub fn filter(&self, mut keep: impl FnMut(&[f64]) -> bool) -> Self {
        self.map_modes(|xi, _, v| if keep(xi) { v } else { Complex64::new(0.0, 0.0) })
    }

    /// Largest `|ξ|` with a nonzero coefficient (0 for the zero field).
    pub fn max_active_frequency(&self) -> f64 {
        let n = self.shape.points();
        let mut xi = vec![0.0; self.shape.dim];
        let mut best: f64 = 0.0;
        for flat in 0..n {
            let active = (0..self.shape.components).any(|c| self.data[c * n + flat].norm_sqr() > 0.0);
            if active {
                self.shape.wavevector(flat, &mut xi);
                best = best.max(xi.iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
        best
    }
}

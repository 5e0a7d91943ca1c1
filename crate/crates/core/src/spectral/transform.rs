use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::field::{wavenumber, GridField, Shape, SpectralField};
use crate::error::Result;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// In-place n-dimensional transform of one component (unnormalised).
fn fft_nd(shape: &Shape, data: &mut [Complex64], direction: FftDirection) {
    let m = shape.resolution;
    let fft = plan(m, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = data.len();
    for axis in 0..shape.dim {
        // stride of `axis` in row-major order, axis 0 slowest
        let stride = m.pow((shape.dim - 1 - axis) as u32);
        let block = stride * m;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[base..base + m], &mut scratch);
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Grid samples to Fourier series coefficients, `û(ξ) = M⁻ⁿ Σ_j u(x_j) e^{−i⟨ξ,x_j⟩}`.
pub fn forward_transform(field: &GridField) -> SpectralField {
    let shape = field.shape();
    let mut data = field.data().to_vec();
    let scale = 1.0 / shape.points() as f64;
    for chunk in data.chunks_mut(shape.points()) {
        fft_nd(&shape, chunk, FftDirection::Forward);
        chunk.iter_mut().for_each(|v| *v *= scale);
    }
    SpectralField::from_data(shape, data).expect("shape preserved")
}

/// Fourier series coefficients back to grid samples.
pub fn inverse_transform(spec: &SpectralField) -> GridField {
    let shape = spec.shape();
    let mut data = spec.data().to_vec();
    for chunk in data.chunks_mut(shape.points()) {
        fft_nd(&shape, chunk, FftDirection::Inverse);
    }
    GridField::from_data(shape, data).expect("shape preserved")
}

/// Largest retained wavenumber per axis under the two-thirds rule.
///
/// Keeping `|ξᵢ| ≤ K` with `3K < M` guarantees that aliases of a quadratic
/// product land strictly outside the retained band.
pub fn two_thirds_cutoff(resolution: usize) -> i64 {
    ((resolution - 1) / 3) as i64
}

/// Zeroes every coefficient with some `|ξᵢ|` above the two-thirds cutoff.
pub fn dealias_two_thirds(spec: &SpectralField) -> SpectralField {
    let shape = spec.shape();
    let m = shape.resolution;
    let cutoff = two_thirds_cutoff(m);
    let n = shape.points();
    let mut idx = vec![0usize; shape.dim];
    let mut out = spec.clone();
    for flat in 0..n {
        shape.multi_index(flat, &mut idx);
        if idx.iter().any(|&j| wavenumber(j, m).abs() > cutoff) {
            for c in 0..shape.components {
                out.data_mut()[c * n + flat] = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Pointwise product of two scalar fields with both factors and the result
/// truncated to the two-thirds band. Exact for inputs already inside the band.
pub fn dealiased_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.shape().check_same(&v.shape())?;
    let a = inverse_transform(&dealias_two_thirds(u));
    let b = inverse_transform(&dealias_two_thirds(v));
    let prod: Vec<Complex64> = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    let grid = GridField::from_data(u.shape(), prod)?;
    Ok(dealias_two_thirds(&forward_transform(&grid)))
}

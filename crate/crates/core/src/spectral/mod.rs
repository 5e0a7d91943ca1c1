//! Discrete Fourier analysis on the torus `[0, 2π)ⁿ`.
//!
//! A [`GridField`] holds samples at `x_j = 2πj/M` on a uniform grid with `M`
//! points per axis (a power of two). A [`SpectralField`] holds Fourier series
//! coefficients `û(ξ)` for integer frequencies `−M/2 < ξᵢ ≤ M/2`, normalised so
//! that
//!
//! ```text
//! u(x) = Σ_ξ û(ξ) e^{i⟨ξ,x⟩},    û(ξ) = M⁻ⁿ Σ_j u(x_j) e^{−i⟨ξ,x_j⟩}.
//! ```
//!
//! With this convention a pure mode `e^{i⟨ξ₀,x⟩}` has the single coefficient
//! `1` at `ξ₀`, and Parseval reads `‖u‖²_{L₂} = (2π)ⁿ Σ |û(ξ)|²`.
//!
//! Storage is component-major: component `c` occupies
//! `data[c·Mⁿ .. (c+1)·Mⁿ]`, and within a component the index is row-major with
//! axis 0 varying slowest.

mod field;
pub mod io;
pub mod symbol;
mod transform;

pub use field::{wavenumber, GridField, Shape, SpectralField};
pub use symbol::{
    apply_multiplier, mikhlin_constants, AlphaEstimate, MikhlinReport, MikhlinSampling,
    MultiplierSymbol, Sector, ZeroPolicy,
};
pub use transform::{
    dealias_two_thirds, dealiased_product, forward_transform, inverse_transform, two_thirds_cutoff,
};

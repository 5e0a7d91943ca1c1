//! Numerical harmonic analysis on the periodic torus `[0, 2π)ⁿ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`rearrangement`]: distribution functions, decreasing rearrangements and
//!   Lorentz quasinorms of grid-sampled functions.
//! * [`dyadic`]: Littlewood-Paley block families (the smooth partition of
//!   unity and an overlapping variant) plus a sampling validator.
//! * [`spectral`]: grid and spectral fields, FFT transforms, Fourier
//!   multipliers, Mikhlin constant estimation and the binary field format.
//! * [`tll`]: Triebel-Lizorkin-Lorentz norms, equivalent-norm variants and the
//!   K-functional trace norm.
//! * [`operators`]: Bessel potentials, resolvents, heat semigroup, fractional
//!   powers, holomorphic symbol calculus and time-direction operators.
//! * [`helmholtz`]: Helmholtz projection/decomposition and the Stokes
//!   resolvent and semigroup.
//! * [`nse`]: the projected Navier-Stokes time stepper with blow-up monitor
//!   and checkpoint/restart.
//! * [`verify`]: seeded corpora and bracket-stability property suites.

pub mod dyadic;
pub mod error;
pub mod helmholtz;
pub mod nse;
pub mod operators;
pub mod rearrangement;
pub mod spectral;
pub mod tll;
pub mod verify;

pub use error::{Result, TllError};
pub use spectral::{GridField, SpectralField};

//! Pseudospectral solver for the projected Navier-Stokes system
//!
//! ```text
//! u' − Δu = G(u) + P f,    G(u) = −P div(uuᵀ),    u(0) = u₀,
//! ```
//!
//! on the torus with unit viscosity. The Laplacian is diagonal in Fourier
//! space, so the linear part is integrated exactly (ETD, the default) or by
//! Crank-Nicolson (IMEX2). Products are dealiased with the two-thirds rule,
//! which makes the discrete nonlinearity an exact Galerkin truncation and
//! keeps it `L₂`-antisymmetric. The state is re-projected after every step.

pub mod checkpoint;
pub mod config;
pub mod monitor;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::dyadic::{block_cap, DyadicFamily};
use crate::error::{Result, TllError};
use crate::helmholtz::{divergence_max, divergence_measure, helmholtz_project_spectral, SOLENOIDAL_TOLERANCE};
use crate::spectral::{dealias_two_thirds, forward_transform, inverse_transform, GridField, Shape, SpectralField};
use crate::tll::{trace_norm_spectral, TraceParams};

pub use config::{parse_key_values, ConstraintReport, NonlinearForm, Scheme, SolverConfig};
pub use monitor::{blowup_monitor, BlowupReport, ProxySample, Verdict};

fn check_vector(shape: Shape) -> Result<()> {
    if shape.components != shape.dim || shape.dim < 2 {
        return Err(TllError::ShapeMismatch(format!(
            "expected a vector field in dim >= 2, got {} components in dim {}",
            shape.components, shape.dim
        )));
    }
    Ok(())
}

fn ensure_finite(grid: &GridField, what: &str) -> Result<()> {
    if grid.is_finite() {
        Ok(())
    } else {
        Err(TllError::NonFinite(what.to_string()))
    }
}

/// `G(u)` for a spectrum, without the solenoidality admission check.
pub fn nonlinear_term_spectral(spec: &SpectralField, form: NonlinearForm) -> Result<SpectralField> {
    let shape = spec.shape();
    check_vector(shape)?;
    let n = shape.dim;
    let points = shape.points();
    let u = inverse_transform(&dealias_two_thirds(spec));
    let mut xi = vec![0.0; n];

    let advection = match form {
        NonlinearForm::Divergence => {
            // products u_i u_j for i ≤ j
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
            let mut prod = Vec::with_capacity(pairs.len() * points);
            for &(i, j) in &pairs {
                let (a, b) = (u.component(i), u.component(j));
                prod.extend(a.iter().zip(b).map(|(x, y)| x * y));
            }
            let grid = GridField::from_data(shape.with_components(pairs.len()), prod)?;
            ensure_finite(&grid, "nonlinear product")?;
            let t = dealias_two_thirds(&forward_transform(&grid));
            let pair_index = |i: usize, j: usize| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                pairs.iter().position(|&p| p == (a, b)).expect("pair present")
            };
            let mut out = SpectralField::zeros(shape);
            for flat in 0..points {
                shape.wavevector(flat, &mut xi);
                for i in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, x) in xi.iter().enumerate() {
                        acc += Complex64::new(0.0, *x) * t.data()[pair_index(i, j) * points + flat];
                    }
                    out.data_mut()[i * points + flat] = acc;
                }
            }
            out
        }
        NonlinearForm::Convective => convective_spectral(spec, &u)?,
    };
    let projected = helmholtz_project_spectral(&advection)?;
    Ok(projected.scale(-1.0))
}

/// Dealiased `(u·∇)u` (unprojected); `u` is the grid form of the truncated spectrum.
fn convective_spectral(spec: &SpectralField, u: &GridField) -> Result<SpectralField> {
    let shape = spec.shape();
    let n = shape.dim;
    let points = shape.points();
    let truncated = dealias_two_thirds(spec);
    let mut grads = Vec::with_capacity(n * n * points);
    let mut xi = vec![0.0; n];
    // component i*n + j holds ∂_j u_i
    for i in 0..n {
        for j in 0..n {
            for flat in 0..points {
                shape.wavevector(flat, &mut xi);
                grads.push(Complex64::new(0.0, xi[j]) * truncated.data()[i * points + flat]);
            }
        }
    }
    let g = inverse_transform(&SpectralField::from_data(shape.with_components(n * n), grads)?);
    let mut conv = vec![Complex64::new(0.0, 0.0); n * points];
    for i in 0..n {
        for j in 0..n {
            let uj = u.component(j);
            let d = g.component(i * n + j);
            for p in 0..points {
                conv[i * points + p] += uj[p] * d[p];
            }
        }
    }
    let grid = GridField::from_data(shape, conv)?;
    ensure_finite(&grid, "nonlinear product")?;
    Ok(dealias_two_thirds(&forward_transform(&grid)))
}

/// `G(u) = −P div(uuᵀ)` for a solenoidal grid field (divergence form).
pub fn nonlinear_term(u: &GridField) -> Result<GridField> {
    nonlinear_term_with(u, NonlinearForm::Divergence)
}

pub fn nonlinear_term_with(u: &GridField, form: NonlinearForm) -> Result<GridField> {
    let spec = forward_transform(u);
    let divergence = divergence_measure(&spec)?;
    if divergence > SOLENOIDAL_TOLERANCE {
        return Err(TllError::NotSolenoidal {
            divergence,
            tolerance: SOLENOIDAL_TOLERANCE,
        });
    }
    Ok(inverse_transform(&nonlinear_term_spectral(&spec, form)?))
}

type ForcingFn = dyn Fn(f64) -> GridField + Send + Sync;

/// Body force. Every variant is Helmholtz-projected before use.
#[derive(Clone)]
pub enum Forcing {
    None,
    Steady(SpectralField),
    TimeDependent(Arc<ForcingFn>),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Forcing {
    pub fn steady(field: &GridField) -> Result<Forcing> {
        Ok(Forcing::Steady(helmholtz_project_spectral(&forward_transform(field))?))
    }

    pub fn time_dependent(f: impl Fn(f64) -> GridField + Send + Sync + 'static) -> Forcing {
        Forcing::TimeDependent(Arc::new(f))
    }

    pub fn label(&self) -> String {
        match self {
            Forcing::None => "none".into(),
            Forcing::Steady(_) => "steady".into(),
            Forcing::TimeDependent(_) => "time-dependent".into(),
        }
    }

    /// Projected spectrum at time `t`, `None` for zero forcing.
    pub fn spectrum(&self, t: f64, shape: Shape) -> Result<Option<SpectralField>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::Steady(s) => {
                shape.check_same(&s.shape())?;
                Ok(Some(s.clone()))
            }
            Forcing::TimeDependent(f) => {
                let g = f(t);
                shape.check_same(&g.shape())?;
                ensure_finite(&g, "forcing")?;
                Ok(Some(helmholtz_project_spectral(&forward_transform(&g))?))
            }
        }
    }
}

/// Solver state after `step` steps of size `dt`; `t = step·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub step: u64,
    pub dt: f64,
    pub spectrum: SpectralField,
    /// Previous explicit term, carried by the two-step IMEX scheme.
    pub prev_explicit: Option<SpectralField>,
}

impl SolverState {
    pub fn t(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn grid(&self) -> GridField {
        inverse_transform(&self.spectrum)
    }
}

/// Per-mode linear factors, depending on `|ξ|²` only.
#[derive(Debug, Clone)]
struct LinearFactors {
    scheme: Scheme,
    dt: f64,
    // ETD: e^{−h|ξ|²}, h φ₁, h φ₂; IMEX: (1 − h|ξ|²/2)/(1 + h|ξ|²/2), h/(1 + h|ξ|²/2), unused
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

/// `φ₁(z) = (e^z − 1)/z`, `φ₂(z) = (e^z − 1 − z)/z²`, by series near zero.
fn phi12(z: f64) -> (f64, f64) {
    if z.abs() < 0.1 {
        let (mut p1, mut p2) = (0.0, 0.0);
        let mut term1 = 1.0; // z^k/(k+1)!
        let mut term2 = 0.5; // z^k/(k+2)!
        for k in 0..16 {
            p1 += term1;
            p2 += term2;
            term1 *= z / (k as f64 + 2.0);
            term2 *= z / (k as f64 + 3.0);
        }
        (p1, p2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

impl LinearFactors {
    fn new(shape: Shape, dt: f64, scheme: Scheme) -> Self {
        let r2 = shape.wavenumber_squares();
        let mut a = Vec::with_capacity(r2.len());
        let mut b = Vec::with_capacity(r2.len());
        let mut c = Vec::with_capacity(r2.len());
        for &k2 in &r2 {
            match scheme {
                Scheme::Etd => {
                    let z = -dt * k2;
                    let (p1, p2) = phi12(z);
                    a.push(z.exp());
                    b.push(dt * p1);
                    c.push(dt * p2);
                }
                Scheme::Imex2 => {
                    let half = 0.5 * dt * k2;
                    a.push((1.0 - half) / (1.0 + half));
                    b.push(dt / (1.0 + half));
                    c.push(0.0);
                }
            }
        }
        LinearFactors { scheme, dt, a, b, c }
    }
}

fn explicit_term(spec: &SpectralField, t: f64, forcing: &Forcing, form: NonlinearForm) -> Result<SpectralField> {
    let mut n = nonlinear_term_spectral(spec, form)?;
    if let Some(f) = forcing.spectrum(t, spec.shape())? {
        n = n.add(&f)?;
    }
    Ok(n)
}

fn step_with(factors: &LinearFactors, state: &SolverState, forcing: &Forcing, form: NonlinearForm) -> Result<SolverState> {
    let shape = state.spectrum.shape();
    let points = shape.points();
    let comps = shape.components;
    let t = state.t();
    let dt = factors.dt;
    let u = state.spectrum.data();
    let n0 = explicit_term(&state.spectrum, t, forcing, form)?;
    let mut next = vec![Complex64::new(0.0, 0.0); u.len()];
    let prev_explicit = match factors.scheme {
        Scheme::Etd => {
            for c in 0..comps {
                for p in 0..points {
                    let i = c * points + p;
                    next[i] = u[i] * factors.a[p] + n0.data()[i] * factors.b[p];
                }
            }
            let stage = SpectralField::from_data(shape, next.clone())?;
            let n1 = explicit_term(&stage, t + dt, forcing, form)?;
            for c in 0..comps {
                for p in 0..points {
                    let i = c * points + p;
                    next[i] += (n1.data()[i] - n0.data()[i]) * factors.c[p];
                }
            }
            None
        }
        Scheme::Imex2 => {
            let prev = state.prev_explicit.as_ref().unwrap_or(&n0);
            shape.check_same(&prev.shape())?;
            for c in 0..comps {
                for p in 0..points {
                    let i = c * points + p;
                    let ab = n0.data()[i] * 1.5 - prev.data()[i] * 0.5;
                    next[i] = u[i] * factors.a[p] + ab * factors.b[p];
                }
            }
            Some(n0)
        }
    };
    let spectrum = helmholtz_project_spectral(&SpectralField::from_data(shape, next)?)?;
    if !spectrum.is_finite() {
        return Err(TllError::NonFinite(format!("state after step {}", state.step + 1)));
    }
    Ok(SolverState {
        step: state.step + 1,
        dt,
        spectrum,
        prev_explicit,
    })
}

/// One step of size `dt` with the given scheme (divergence-form nonlinearity).
pub fn step(state: &SolverState, forcing: &Forcing, dt: f64, scheme: Scheme) -> Result<SolverState> {
    if dt != state.dt {
        return Err(TllError::param("state and step size disagree; time is tracked as step·dt"));
    }
    let factors = LinearFactors::new(state.spectrum.shape(), dt, scheme);
    step_with(&factors, state, forcing, NonlinearForm::Divergence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub l2: f64,
    pub trace_proxy: f64,
    pub divergence_max: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub step: u64,
    pub t: f64,
    pub state: GridField,
}

/// Stored samples of a run with their diagnostics (same length and order).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub forcing: String,
    pub config_hash: String,
    pub samples: Vec<TrajectorySample>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn new(dt: f64, forcing: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Trajectory {
            dt,
            forcing: forcing.into(),
            config_hash: config_hash.into(),
            samples: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn last_state(&self) -> Option<&GridField> {
        self.samples.last().map(|s| &s.state)
    }

    /// CSV with header `t,L2,trace_proxy,divergence_max`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,L2,trace_proxy,divergence_max")?;
        for d in &self.diagnostics {
            writeln!(w, "{:e},{:e},{:e},{:e}", d.t, d.l2, d.trace_proxy, d.divergence_max)?;
        }
        Ok(())
    }
}

/// Result of [`Solver::run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub report: BlowupReport,
    pub final_state: SolverState,
}

/// A configured solver with cached linear factors and monitor family.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    shape: Shape,
    factors: LinearFactors,
    family: DyadicFamily,
    trace: TraceParams,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let shape = Shape::vector(config.dim, config.resolution)?;
        let family = config.family.build(config.dim, block_cap(config.resolution))?;
        let trace = config.trace_params()?;
        let factors = LinearFactors::new(shape, config.dt, config.scheme);
        Ok(Solver {
            config,
            shape,
            factors,
            family,
            trace,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn family(&self) -> &DyadicFamily {
        &self.family
    }

    /// Initial state at `t = 0`; non-solenoidal data is projected with a warning.
    pub fn initial_state(&self, u0: &GridField) -> Result<SolverState> {
        self.shape.check_same(&u0.shape())?;
        ensure_finite(u0, "initial data")?;
        let spec = forward_transform(u0);
        let divergence = divergence_measure(&spec)?;
        if divergence > SOLENOIDAL_TOLERANCE {
            log::warn!("initial data has relative divergence {divergence:e}; projecting");
        }
        Ok(SolverState {
            step: 0,
            dt: self.config.dt,
            spectrum: helmholtz_project_spectral(&spec)?,
            prev_explicit: None,
        })
    }

    pub fn step(&self, state: &SolverState, forcing: &Forcing) -> Result<SolverState> {
        if state.dt != self.config.dt {
            return Err(TllError::param("state step size differs from the configured dt"));
        }
        step_with(&self.factors, state, forcing, self.config.nonlinear_form)
    }

    pub fn trace_proxy(&self, spec: &SpectralField) -> Result<f64> {
        trace_norm_spectral(spec, &self.trace, &self.family)
    }

    fn diagnostics(&self, state: &SolverState, grid: &GridField) -> Result<Diagnostics> {
        Ok(Diagnostics {
            t: state.t(),
            l2: grid.l2_norm(),
            trace_proxy: self.trace_proxy(&state.spectrum)?,
            divergence_max: divergence_max(grid)?,
        })
    }

    /// Advances `state` until step `end_step`, a threshold crossing, or a
    /// rejected step. With `checkpoints` set and `checkpoint_every > 0`,
    /// writes `step_XXXXXXXX` checkpoint directories below it.
    pub fn run(
        &self,
        mut state: SolverState,
        forcing: &Forcing,
        end_step: u64,
        checkpoints: Option<&Path>,
    ) -> Result<RunOutcome> {
        let mut trajectory = Trajectory::new(self.config.dt, forcing.label(), self.config.hash());
        let mut report = BlowupReport::new(self.config.blowup_threshold);
        let every = self.config.sample_every as u64;
        let sample = |state: &SolverState, trajectory: &mut Trajectory, report: &mut BlowupReport| -> Result<bool> {
            let grid = state.grid();
            let d = self.diagnostics(state, &grid)?;
            trajectory.samples.push(TrajectorySample {
                step: state.step,
                t: d.t,
                state: grid,
            });
            trajectory.diagnostics.push(d);
            Ok(report.record(d.t, d.trace_proxy))
        };
        let mut halted = sample(&state, &mut trajectory, &mut report)?;
        while !halted && state.step < end_step {
            match self.step(&state, forcing) {
                Ok(next) => state = next,
                Err(TllError::NonFinite(what)) => {
                    log::warn!("step rejected at t = {}: non-finite {what}", state.t());
                    report.reject_step(state.t());
                    break;
                }
                Err(e) => return Err(e),
            }
            if let Some(dir) = checkpoints {
                let ce = self.config.checkpoint_every as u64;
                if ce > 0 && state.step % ce == 0 {
                    checkpoint::save_checkpoint(&dir.join(format!("step_{:08}", state.step)), &state, &self.config)?;
                }
            }
            if state.step % every == 0 || state.step == end_step {
                halted = sample(&state, &mut trajectory, &mut report)?;
            }
        }
        Ok(RunOutcome {
            trajectory,
            report,
            final_state: state,
        })
    }
}

/// Integrates from `u0` at `t = 0` to `t_max`.
pub fn solve(config: &SolverConfig, u0: &GridField, forcing: &Forcing) -> Result<(Trajectory, BlowupReport)> {
    let solver = Solver::new(config.clone())?;
    let state = solver.initial_state(u0)?;
    let out = solver.run(state, forcing, config.total_steps(), None)?;
    Ok((out.trajectory, out.report))
}

/// Continues a stored state to `t_max`.
pub fn resume(config: &SolverConfig, state: SolverState, forcing: &Forcing) -> Result<RunOutcome> {
    let solver = Solver::new(config.clone())?;
    solver.run(state, forcing, config.total_steps(), None)
}

/// 2D Taylor-Green vortex `(sin x cos y, −cos x sin y)` (the third component
/// is zero in dim 3).
pub fn taylor_green(dim: usize, resolution: usize) -> Result<GridField> {
    let shape = Shape::vector(dim, resolution)?;
    Ok(GridField::from_fn(shape, |x, c| {
        let v = match c {
            0 => x[0].sin() * x[1].cos(),
            1 => -x[0].cos() * x[1].sin(),
            _ => 0.0,
        };
        Complex64::new(v, 0.0)
    }))
}

/// Relative momentum residual at the middle of three consecutive states,
/// `‖u' − Δu + (u·∇)u + ∇p − f‖ / (‖u'‖ + ‖Δu‖ + ‖(u·∇)u‖)`, with `u'` by
/// central difference and `∇p = (1 − P)(f − (u·∇)u)` reconstructed.
pub fn momentum_residual(
    prev: &GridField,
    mid: &GridField,
    next: &GridField,
    dt: f64,
    forcing: Option<&GridField>,
) -> Result<f64> {
    let shape = mid.shape();
    check_vector(shape)?;
    let spec = forward_transform(mid);
    let u = inverse_transform(&dealias_two_thirds(&spec));
    let conv = convective_spectral(&spec, &u)?;
    let f = match forcing {
        Some(f) => forward_transform(f),
        None => SpectralField::zeros(shape),
    };
    let rhs = f.sub(&conv)?;
    let grad_p = rhs.sub(&helmholtz_project_spectral(&rhs)?)?;
    let dudt = forward_transform(&next.sub(prev)?).scale(1.0 / (2.0 * dt));
    let lap = spec.map_modes(|xi, _, v| -v * xi.iter().map(|x| x * x).sum::<f64>());
    let residual = dudt.sub(&lap)?.add(&conv)?.add(&grad_p)?.sub(&f)?;
    let scale = dudt.l2_norm() + lap.l2_norm() + conv.l2_norm();
    Ok(if scale == 0.0 { residual.l2_norm() } else { residual.l2_norm() / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode_field(resolution: usize) -> GridField {
        // amplitude (2, −1) ⊥ ξ₀ = (1, 2)
        let shape = Shape::vector(2, resolution).unwrap();
        GridField::from_fn(shape, |x, c| {
            let amp = if c == 0 { 2.0 } else { -1.0 };
            Complex64::new(amp * (x[0] + 2.0 * x[1]).sin(), 0.0)
        })
    }

    #[test]
    fn phi_functions_are_continuous_at_series_switch() {
        for z in [-0.0999999, -0.1000001, 0.0999999, -1e-8] {
            let (a, b) = phi12(z);
            let em1 = (z as f64).exp_m1();
            assert!((a - em1 / z).abs() < 1e-12);
            if z.abs() > 1e-3 {
                assert!((b - (em1 - z) / (z * z)).abs() < 1e-9);
            }
        }
        assert_eq!(phi12(0.0), (1.0, 0.5));
    }

    #[test]
    fn zero_and_single_mode_nonlinearity() {
        let z = GridField::zeros(Shape::vector(2, 16).unwrap());
        assert_eq!(nonlinear_term(&z).unwrap().max_abs(), 0.0);
        assert!(nonlinear_term(&mode_field(16)).unwrap().max_abs() < 1e-13);
        assert!(nonlinear_term(&taylor_green(2, 16).unwrap()).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn nonlinearity_rejects_divergent_input() {
        let shape = Shape::vector(2, 16).unwrap();
        let u = GridField::from_fn(shape, |x, c| Complex64::new(if c == 0 { x[0].sin() } else { 0.0 }, 0.0));
        assert!(matches!(nonlinear_term(&u), Err(TllError::NotSolenoidal { .. })));
    }

    #[test]
    fn one_etd_step_on_eigenmode() {
        let dt = 0.01;
        let u0 = mode_field(16);
        let state = SolverState {
            step: 0,
            dt,
            spectrum: forward_transform(&u0),
            prev_explicit: None,
        };
        let next = step(&state, &Forcing::None, dt, Scheme::Etd).unwrap();
        let want = u0.scale((-5.0 * dt).exp());
        assert!(next.grid().max_abs_diff(&want).unwrap() < 1e-14);
        assert!(step(&state, &Forcing::None, 0.02, Scheme::Etd).is_err());
    }

    #[test]
    fn constant_forcing_duhamel() {
        // a single solenoidal mode and a pure mean are each free of self-advection
        let dt = 0.05;
        let shape = Shape::vector(2, 16).unwrap();
        let mean = GridField::from_fn(shape, |_, c| Complex64::new(0.5 * (c + 1) as f64, 0.0));
        for g in [mode_field(16), mean] {
            let forcing = Forcing::steady(&g).unwrap();
            let state = SolverState {
                step: 0,
                dt,
                spectrum: SpectralField::zeros(shape),
                prev_explicit: None,
            };
            let next = step(&state, &forcing, dt, Scheme::Etd).unwrap();
            let want = forward_transform(&g).map_modes(|xi, _, v| {
                let k2: f64 = xi.iter().map(|x| x * x).sum();
                if k2 == 0.0 {
                    v * dt
                } else {
                    v * (-(-dt * k2).exp_m1() / k2)
                }
            });
            assert!(next.spectrum.max_abs_diff(&want).unwrap() < 1e-15);
        }
    }

    #[test]
    fn forms_agree_on_random_solenoidal_data() {
        let shape = Shape::vector(2, 16).unwrap();
        let u = GridField::from_fn(shape, |x, c| {
            let v = if c == 0 {
                (x[0] + 2.0 * x[1]).sin() + 0.3 * (x[1] - x[0]).cos()
            } else {
                0.7 * (2.0 * x[0] - x[1]).cos() + 0.2 * x[0].sin()
            };
            Complex64::new(v, 0.0)
        });
        let u = inverse_transform(&helmholtz_project_spectral(&forward_transform(&u)).unwrap());
        let a = nonlinear_term_with(&u, NonlinearForm::Divergence).unwrap();
        let b = nonlinear_term_with(&u, NonlinearForm::Convective).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!(a.max_abs() > 1e-3);
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = SolverConfig {
            resolution: 16,
            dt: 0.01,
            t_max: 0.1,
            sample_every: 2,
            ..SolverConfig::default()
        };
        let (traj, report) = solve(&cfg, &GridField::zeros(Shape::vector(2, 16).unwrap()), &Forcing::None).unwrap();
        assert_eq!(report.verdict, Verdict::Completed);
        assert!(traj.samples.iter().all(|s| s.state.max_abs() == 0.0));
        assert_eq!(traj.samples.last().unwrap().step, 10);
        assert_eq!(traj.samples.len(), 6);
    }

    #[test]
    fn momentum_residual_of_taylor_green() {
        let dt = 1e-3;
        let u0 = taylor_green(2, 16).unwrap();
        let s = |t: f64| u0.scale((-2.0 * t).exp());
        let r = momentum_residual(&s(0.5 - dt), &s(0.5), &s(0.5 + dt), dt, None).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn non_finite_state_is_a_rejected_step() {
        let cfg = SolverConfig {
            resolution: 16,
            dt: 0.01,
            t_max: 0.05,
            ..SolverConfig::default()
        };
        let solver = Solver::new(cfg).unwrap();
        let shape = solver.shape();
        let bad = Forcing::time_dependent(move |t| {
            let v = if t > 0.015 { f64::NAN } else { 0.0 };
            GridField::constant(shape, v)
        });
        let state = solver.initial_state(&GridField::zeros(shape)).unwrap();
        let out = solver.run(state, &bad, 5, None).unwrap();
        assert_eq!(out.report.verdict, Verdict::StepRejected);
        assert!(out.report.halted);
    }
}

//! Distribution functions, decreasing rearrangements and Lorentz quasinorms
//! on the torus with cell measure `(2π/M)ⁿ`.
//!
//! Grid functions are step functions, so `f*` is a finite descending step
//! function and the `dt/t` integral of the Lorentz quasinorm is evaluated in
//! closed form, step by step, with no quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TllError};
use crate::spectral::GridField;

/// Exponents `(p, r)` of `L_{p,r}`; `r = f64::INFINITY` selects the weak-type
/// endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    pub p: f64,
    pub r: f64,
}

impl LorentzParams {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(TllError::param(format!("Lorentz p = {p} must lie in (1, ∞)")));
        }
        if !(r >= 1.0) {
            return Err(TllError::param(format!("Lorentz r = {r} must lie in [1, ∞]")));
        }
        Ok(LorentzParams { p, r })
    }
}

/// Decreasing rearrangement `f*` of a grid function: `f*(t) = values[k]` on
/// `[k·cell, (k+1)·cell)` and zero beyond the total measure.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRearrangement {
    values: Vec<f64>,
    cell_measure: f64,
}

impl StepRearrangement {
    /// Rearranges nonnegative magnitudes. Panics on negative or NaN input.
    pub fn from_magnitudes(mut values: Vec<f64>, cell_measure: f64) -> Self {
        assert!(cell_measure > 0.0, "cell measure must be positive");
        assert!(
            values.iter().all(|v| *v >= 0.0),
            "magnitudes must be nonnegative and not NaN"
        );
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        StepRearrangement { values, cell_measure }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    pub fn total_measure(&self) -> f64 {
        self.values.len() as f64 * self.cell_measure
    }

    /// `f*(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "rearrangement evaluated at negative t");
        let k = (t / self.cell_measure).floor();
        if k >= self.values.len() as f64 {
            0.0
        } else {
            self.values[k as usize]
        }
    }

    /// `d(α) = μ{|f| > α}`.
    pub fn distribution(&self, alpha: f64) -> f64 {
        assert!(alpha >= 0.0, "distribution function needs alpha >= 0");
        let count = self.values.partition_point(|&v| v > alpha);
        count as f64 * self.cell_measure
    }

    /// Steps `(t_start, t_end, height)` with equal heights merged.
    pub fn steps(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            let end = (k + 1) as f64 * self.cell_measure;
            match out.last_mut() {
                Some(last) if last.2 == v => last.1 = end,
                _ => out.push((k as f64 * self.cell_measure, end, v)),
            }
        }
        out
    }

    /// Lorentz quasinorm of the rearranged function (see [`lorentz_quasinorm`]).
    pub fn lorentz(&self, params: LorentzParams) -> f64 {
        let LorentzParams { p, r } = params;
        if r.is_infinite() {
            // the supremum over each half-open step is approached at its right end
            return self
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| v * ((k + 1) as f64 * self.cell_measure).powf(1.0 / p))
                .fold(0.0, f64::max);
        }
        let a = r / p;
        let cell = self.cell_measure;
        let cell_pow = cell.powf(a);
        let mut sum = 0.0;
        let mut k = 0usize;
        let n = self.values.len();
        while k < n {
            let v = self.values[k];
            let mut j = k + 1;
            while j < n && self.values[j] == v {
                j += 1;
            }
            if v > 0.0 {
                // (j·c)^a − (k·c)^a, written to avoid cancellation for large k
                let diff = if k == 0 {
                    (j as f64).powf(a)
                } else {
                    (k as f64).powf(a) * (a * ((j - k) as f64 / k as f64).ln_1p()).exp_m1()
                };
                sum += v.powf(r) * diff;
            } else {
                break;
            }
            k = j;
        }
        (sum * cell_pow * (p / r)).powf(1.0 / r)
    }
}

/// `d_f(α) = cell_measure · #{grid points with |f| > α}`.
pub fn distribution_function(field: &GridField, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "distribution function needs alpha >= 0");
    let count = field.magnitudes().iter().filter(|&&v| v > alpha).count();
    count as f64 * field.shape().cell_measure()
}

pub fn decreasing_rearrangement(field: &GridField) -> StepRearrangement {
    StepRearrangement::from_magnitudes(field.magnitudes(), field.shape().cell_measure())
}

/// `(∫₀^∞ [t^{1/p} f*(t)]^r dt/t)^{1/r}`, or `sup_t t^{1/p} f*(t)` for
/// `r = ∞`, of the pointwise magnitude of `field`.
pub fn lorentz_quasinorm(field: &GridField, params: LorentzParams) -> f64 {
    decreasing_rearrangement(field).lorentz(params)
}

/// Lorentz quasinorm of raw nonnegative samples with a given cell measure.
pub fn lorentz_of_samples(values: Vec<f64>, cell_measure: f64, params: LorentzParams) -> f64 {
    StepRearrangement::from_magnitudes(values, cell_measure).lorentz(params)
}

/// Closed form `c·m^{1/p}·(p/r)^{1/r}` of `‖c·1_E‖_{L_{p,r}}` with `μ(E) = m`.
pub fn indicator_lorentz(c: f64, measure: f64, params: LorentzParams) -> f64 {
    let LorentzParams { p, r } = params;
    if r.is_infinite() {
        c.abs() * measure.powf(1.0 / p)
    } else {
        c.abs() * measure.powf(1.0 / p) * (p / r).powf(1.0 / r)
    }
}

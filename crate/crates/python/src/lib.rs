//! Python bindings: fields, norms, the Helmholtz/Stokes operators, the
//! Navier-Stokes solver and the verification suites.
//!
//! Structured results (reports, diagnostics) come back as plain dicts and
//! lists.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use tll_core::dyadic::{block_cap, FamilyKind};
use tll_core::nse::{Forcing, Solver, SolverConfig};
use tll_core::spectral::io::{load_field, save_field, Dtype};
use tll_core::spectral::{GridField, Shape};
use tll_core::tll::{TllParams, TraceParams};
use tll_core::verify::{SuiteName, VerifyConfig};
use tll_core::TllError;

fn to_py(e: TllError) -> PyErr {
    match e {
        TllError::Io(io) => PyOSError::new_err(io.to_string()),
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for tll_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Real or complex samples on the periodic grid `[0, 2π)^dim`.
#[pyclass(name = "Field", module = "tll", skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: GridField,
}

#[pymethods]
impl PyField {
    /// `values` real samples, component-major and row-major within a component.
    #[new]
    #[pyo3(signature = (dim, resolution, components, values))]
    fn new(dim: usize, resolution: usize, components: usize, values: Vec<f64>) -> PyResult<Self> {
        let shape = Shape::new(dim, resolution, components).py()?;
        Ok(PyField {
            inner: GridField::from_real(shape, &values).py()?,
        })
    }

    #[staticmethod]
    fn zeros(dim: usize, resolution: usize, components: usize) -> PyResult<Self> {
        Ok(PyField {
            inner: GridField::zeros(Shape::new(dim, resolution, components).py()?),
        })
    }

    #[staticmethod]
    fn taylor_green(dim: usize, resolution: usize) -> PyResult<Self> {
        Ok(PyField {
            inner: tll_core::nse::taylor_green(dim, resolution).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (seed, index, dim, resolution, band = 4))]
    fn solenoidal(seed: u64, index: usize, dim: usize, resolution: usize, band: i64) -> PyResult<Self> {
        Ok(PyField {
            inner: tll_core::verify::corpus::solenoidal_field(seed, index, dim, band, resolution).py()?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyField {
            inner: load_field(path).py()?.0,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_field(path, &self.inner, Dtype::infer(&self.inner)).py()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn resolution(&self) -> usize {
        self.inner.resolution()
    }

    #[getter]
    fn components(&self) -> usize {
        self.inner.components()
    }

    /// Real parts of the samples.
    fn values(&self) -> Vec<f64> {
        self.inner.data().iter().map(|v| v.re).collect()
    }

    fn imag_values(&self) -> Vec<f64> {
        self.inner.data().iter().map(|v| v.im).collect()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn lp_norm(&self, p: f64) -> f64 {
        self.inner.lp_norm(p)
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn scale(&self, c: f64) -> Self {
        PyField {
            inner: self.inner.scale(c),
        }
    }

    fn __add__(&self, other: &PyField) -> PyResult<Self> {
        Ok(PyField {
            inner: self.inner.add(&other.inner).py()?,
        })
    }

    fn __sub__(&self, other: &PyField) -> PyResult<Self> {
        Ok(PyField {
            inner: self.inner.sub(&other.inner).py()?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.data().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(dim={}, resolution={}, components={})",
            self.inner.dim(),
            self.inner.resolution(),
            self.inner.components()
        )
    }
}

fn params(s: f64, p: f64, q: f64, r: f64) -> PyResult<TllParams> {
    TllParams::new(s, p, q, r).py()
}

#[pyfunction]
fn lorentz_quasinorm(field: &PyField, p: f64, r: f64) -> PyResult<f64> {
    let lp = tll_core::rearrangement::LorentzParams::new(p, r).py()?;
    Ok(tll_core::rearrangement::lorentz_quasinorm(&field.inner, lp))
}

/// `‖u‖_{F^{s,r}_{p,q}}` with the `standard` or `smoothed` block family.
#[pyfunction]
#[pyo3(signature = (field, s = 0.0, p = 2.0, q = 2.0, r = 2.0, family = "standard"))]
fn tll_norm(field: &PyField, s: f64, p: f64, q: f64, r: f64, family: &str) -> PyResult<f64> {
    let u = &field.inner;
    let fam = FamilyKind::from_str(family).py()?.build(u.dim(), block_cap(u.resolution())).py()?;
    tll_core::tll::tll_norm(u, &params(s, p, q, r)?, &fam).py()
}

#[pyfunction]
#[pyo3(signature = (field, eta, s = 0.0, p = 2.0, q = 2.0, r = 2.0))]
fn trace_norm(field: &PyField, eta: f64, s: f64, p: f64, q: f64, r: f64) -> PyResult<f64> {
    let u = &field.inner;
    let fam = FamilyKind::Standard.build(u.dim(), block_cap(u.resolution())).py()?;
    let trace = TraceParams::new(params(s, p, q, r)?, eta).py()?;
    tll_core::tll::trace_norm(u, &trace, &fam).py()
}

#[pyfunction]
fn helmholtz_project(field: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: tll_core::helmholtz::helmholtz_project(&field.inner).py()?,
    })
}

#[pyfunction]
fn relative_divergence(field: &PyField) -> PyResult<f64> {
    tll_core::helmholtz::relative_divergence(&field.inner).py()
}

#[pyfunction]
fn heat_semigroup(field: &PyField, t: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: tll_core::operators::heat_semigroup(&field.inner, t).py()?,
    })
}

#[pyfunction]
fn bessel_potential(field: &PyField, sigma: f64) -> PyField {
    PyField {
        inner: tll_core::operators::bessel_potential(&field.inner, sigma),
    }
}

#[pyfunction]
fn stokes_semigroup(field: &PyField, t: f64) -> PyResult<PyField> {
    Ok(PyField {
        inner: tll_core::helmholtz::stokes_semigroup(&field.inner, t).py()?,
    })
}

#[pyfunction]
#[pyo3(signature = (field, lambda_re, lambda_im = 0.0))]
fn stokes_resolvent(field: &PyField, lambda_re: f64, lambda_im: f64) -> PyResult<PyField> {
    let lambda = Complex64::new(lambda_re, lambda_im);
    Ok(PyField {
        inner: tll_core::helmholtz::stokes_resolvent(&field.inner, lambda).py()?,
    })
}

/// Projected nonlinearity `−P((u·∇)u)` of a solenoidal field.
#[pyfunction]
fn nonlinear_term(field: &PyField) -> PyResult<PyField> {
    Ok(PyField {
        inner: tll_core::nse::nonlinear_term(&field.inner).py()?,
    })
}

/// Runs the solver from `u0`; `config` takes the solver's key-value keys
/// (values are converted with `str`). Returns the blow-up report, the
/// per-sample diagnostics and the final field.
#[pyfunction]
#[pyo3(signature = (u0, config = None))]
fn solve<'py>(
    py: Python<'py>,
    u0: &PyField,
    config: Option<HashMap<String, Bound<'py, PyAny>>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut kv = BTreeMap::new();
    for (k, v) in config.unwrap_or_default() {
        kv.insert(k, v.str()?.to_string());
    }
    let (cfg, unknown) = SolverConfig::from_key_values(&kv).py()?;
    if !unknown.is_empty() {
        let keys: Vec<&String> = unknown.keys().collect();
        return Err(PyValueError::new_err(format!("unknown solver keys: {keys:?}")));
    }
    let solver = Solver::new(cfg.clone()).py()?;
    let state = solver.initial_state(&u0.inner).py()?;
    let out = solver.run(state, &Forcing::None, cfg.total_steps(), None).py()?;
    let result = PyDict::new(py);
    result.set_item("report", serialize(py, &out.report)?)?;
    result.set_item("diagnostics", serialize(py, &out.trajectory.diagnostics)?)?;
    result.set_item("final", PyField { inner: out.final_state.grid() })?;
    result.set_item("final_t", out.final_state.t())?;
    Ok(result)
}

/// Runs one bracket suite (or `"all"`) and returns its report(s).
#[pyfunction]
#[pyo3(signature = (name, count = 50, resolutions = None, times = None, seed = None))]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    count: usize,
    resolutions: Option<Vec<usize>>,
    times: Option<Vec<f64>>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = VerifyConfig {
        count,
        ..VerifyConfig::default()
    };
    if let Some(r) = resolutions {
        config.resolutions = r;
    }
    if let Some(t) = times {
        config.times = t;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let reports = py.detach(|| {
        if name == "all" {
            tll_core::verify::run_all(&config)
        } else {
            SuiteName::from_str(name).and_then(|s| s.run(&config)).map(|r| vec![r])
        }
    });
    serialize(py, &reports.py()?)
}

#[pymodule]
fn tll(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(lorentz_quasinorm, m)?)?;
    m.add_function(wrap_pyfunction!(tll_norm, m)?)?;
    m.add_function(wrap_pyfunction!(trace_norm, m)?)?;
    m.add_function(wrap_pyfunction!(helmholtz_project, m)?)?;
    m.add_function(wrap_pyfunction!(relative_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(heat_semigroup, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_potential, m)?)?;
    m.add_function(wrap_pyfunction!(stokes_semigroup, m)?)?;
    m.add_function(wrap_pyfunction!(stokes_resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(nonlinear_term, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use ::fsi_split::config::{parse_config, parse_config_str, SimConfig};
use ::fsi_split::diagnostics::{self, Norms, ShiftField};
use ::fsi_split::driver::{self, run_simulation};
use ::fsi_split::mms::{self, MmsCase};
use ::fsi_split::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. }
        | Error::Validation { .. }
        | Error::InvalidArgument(_)
        | Error::IncompatibleInitialData { .. }
        | Error::ClampViolatedInput(_)
        | Error::InvalidPolygon(_)
        | Error::ShiftTooLarge { .. }
        | Error::DegenerateFit(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(json_to_py(py, x)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn to_py<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// Simulation configuration (TOML sections domain, structure, fluid,
/// boundary, time, guards, output).
#[pyclass(name = "Config")]
#[derive(Clone)]
struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        Self {
            inner: SimConfig::default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_config_str(text).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_config(std::path::Path::new(path)).map_err(py_err)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.time.dt
    }

    #[setter]
    fn set_dt(&mut self, dt: f64) {
        self.inner.time.dt = dt;
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.time.t_end
    }

    #[setter]
    fn set_t_end(&mut self, t: f64) {
        self.inner.time.t_end = t;
    }

    #[getter]
    fn resolution(&self) -> (usize, usize) {
        (self.inner.domain.nx, self.inner.domain.ny)
    }

    #[setter]
    fn set_resolution(&mut self, n: (usize, usize)) {
        self.inner.domain.nx = n.0;
        self.inner.domain.ny = n.1;
    }

    fn num_steps(&self) -> usize {
        self.inner.num_steps()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(nx={}, ny={}, dt={}, t_end={})",
            self.inner.domain.nx, self.inner.domain.ny, self.inner.time.dt, self.inner.time.t_end
        )
    }
}

/// Stepwise access to a running simulation.
#[pyclass(name = "Simulation", unsendable)]
struct PySimulation {
    sim: driver::Simulation,
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(config: &PyConfig) -> PyResult<Self> {
        Ok(Self {
            sim: driver::initialize(&config.inner).map_err(py_err)?,
        })
    }

    /// Advances one step; returns False once the run has stopped or the
    /// configured horizon is reached.
    fn step(&mut self) -> PyResult<bool> {
        if self.sim.step >= self.sim.config.num_steps() {
            return Ok(false);
        }
        self.sim.advance().map_err(py_err)
    }

    /// Runs up to `steps` more steps (default: to the configured horizon)
    /// and returns the run summary.
    #[pyo3(signature = (steps=None))]
    fn run(&mut self, py: Python<'_>, steps: Option<usize>) -> PyResult<Py<PyAny>> {
        let target = match steps {
            Some(s) => self.sim.step + s,
            None => self.sim.config.num_steps(),
        };
        let summary = run_simulation(&mut self.sim, target, |_| {});
        to_py(py, &summary)
    }

    #[getter]
    fn step_index(&self) -> usize {
        self.sim.step
    }

    #[getter]
    fn time(&self) -> f64 {
        self.sim.time()
    }

    #[getter]
    fn stop_reason(&self) -> Option<String> {
        self.sim.stop_reason().map(|r| format!("{r:?}"))
    }

    fn energy(&self) -> f64 {
        self.sim.energy()
    }

    /// Interface displacement DOFs (Hermite: value and slope per component).
    fn displacement(&self) -> Vec<f64> {
        self.sim.structure.eta.clone()
    }

    /// Nodal fluid velocity on the Q2 lattice.
    fn velocity(&self) -> Vec<(f64, f64)> {
        self.sim.fluid.u.iter().map(|u| (u[0], u[1])).collect()
    }

    fn pressure(&self) -> Vec<f64> {
        self.sim.fluid.p.clone()
    }

    fn domain_status(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.sim.status)
    }

    fn ledger(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.sim.ledger.rows)
    }

    fn ledger_csv(&self) -> String {
        self.sim.ledger.to_csv()
    }

    fn failures(&self) -> Vec<String> {
        self.sim.ledger.failures.clone()
    }
}

/// Runs a configuration to its horizon and returns the summary dict.
#[pyfunction]
fn run(py: Python<'_>, config: &PyConfig) -> PyResult<Py<PyAny>> {
    let out = driver::run(&config.inner).map_err(py_err)?;
    to_py(py, &out.summary)
}

/// Fits `value = C h^beta`; returns `(C, beta)`.
#[pyfunction]
fn sqrt_fit(hs: Vec<f64>, values: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = diagnostics::sqrt_fit(&hs, &values).map_err(py_err)?;
    Ok((f.c, f.beta))
}

/// Time-shift norms of a fresh trajectory: list of `(field, h, value)`.
#[pyfunction]
fn time_shifts(config: &PyConfig, hs: Vec<f64>) -> PyResult<Vec<(String, f64, f64)>> {
    let out = driver::run(&config.inner).map_err(py_err)?;
    let norms = Norms::for_config(&config.inner).map_err(py_err)?;
    let rep = diagnostics::shift_report(&out.trajectory, &norms, &ShiftField::ALL, &hs).map_err(py_err)?;
    Ok(rep
        .values
        .iter()
        .map(|v| (v.field.name().to_string(), v.h, v.value))
        .collect())
}

/// Cauchy study over decreasing time steps: list of `(dt, diff_u, diff_eta)`.
#[pyfunction]
fn refinement_study(config: &PyConfig, dts: Vec<f64>) -> PyResult<Vec<(f64, f64, f64)>> {
    let t = diagnostics::refinement_study(&config.inner, &dts).map_err(py_err)?;
    Ok(t.rows.iter().map(|r| (r.dt, r.diff_u, r.diff_eta)).collect())
}

/// Manufactured-solution spatial study; returns `(rows, order_u, order_p)`.
#[pyfunction]
#[pyo3(signature = (ns, mu=1.0, alpha=1.0))]
fn mms_spatial(py: Python<'_>, ns: Vec<usize>, mu: f64, alpha: f64) -> PyResult<Py<PyAny>> {
    let case = MmsCase {
        mu,
        alpha,
        ..Default::default()
    };
    let s = mms::mms_spatial(&case, &ns).map_err(py_err)?;
    to_py(py, &s)
}

#[pymodule]
#[pyo3(name = "fsi_split")]
fn fsi_split_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_fit, m)?)?;
    m.add_function(wrap_pyfunction!(time_shifts, m)?)?;
    m.add_function(wrap_pyfunction!(refinement_study, m)?)?;
    m.add_function(wrap_pyfunction!(mms_spatial, m)?)?;
    Ok(())
}

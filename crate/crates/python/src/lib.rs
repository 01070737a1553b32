//! Python module `optoblock`: parameter sets, the fast tiers, sweeps and
//! figure reproduction.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use optoblock::analytic;
use optoblock::model::SystemParams;
use optoblock::sweep::{self, presets, SolverSettings, Tier, Truncations};
use optoblock::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_) | Error::Config(_) | Error::Pole(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Model rates in rad/s; defaults are the shared figure baseline.
#[pyclass(name = "SystemParams", module = "optoblock", skip_from_py_object)]
#[derive(Clone)]
pub struct PySystemParams {
    inner: SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// Keyword arguments override baseline fields by config name, e.g. `J=2e5`.
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = SystemParams::baseline();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let name: String = k.extract()?;
                inner.set(&name, v.extract()?).map_err(py_err)?;
            }
        }
        Ok(Self { inner })
    }

    fn get(&self, name: &str) -> PyResult<f64> {
        self.inner.get(name).ok_or_else(|| PyValueError::new_err(format!("unknown parameter {name:?}")))
    }

    fn set(&mut self, name: &str, value: f64) -> PyResult<()> {
        self.inner.set(name, value).map_err(py_err)
    }

    /// Copy with both detunings set to `delta`.
    fn with_detuning(&self, delta: f64) -> Self {
        Self { inner: self.inner.clone().with_detuning(delta) }
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for name in SystemParams::FIELDS {
            if let Some(v) = self.inner.get(name) {
                d.set_item(*name, v)?;
            }
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let fields: Vec<String> =
            SystemParams::FIELDS.iter().filter_map(|n| self.inner.get(n).map(|v| format!("{n}={v:?}"))).collect();
        format!("SystemParams({})", fields.join(", "))
    }
}

/// Closed-form g²(0) of both cavities; infinite at poles.
#[pyfunction]
fn g2_analytic<'py>(py: Python<'py>, params: &PySystemParams) -> PyResult<Bound<'py, PyDict>> {
    let r = analytic::g2_analytic(&params.inner);
    let d = PyDict::new(py);
    d.set_item("g2_c", r.g2_c)?;
    d.set_item("g2_e", r.g2_e)?;
    d.set_item("poles", r.poles.iter().map(|p| p.to_string()).collect::<Vec<_>>())?;
    Ok(d)
}

/// Effective thermal noise seen by the cavity for `n_bar` photons and a bath at `t_b` kelvin.
#[pyfunction]
fn effective_noise<'py>(py: Python<'py>, params: &PySystemParams, n_bar: f64, t_b: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = analytic::effective_noise(&params.inner, n_bar, t_b).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("n_eff", r.n_eff)?;
    d.set_item("xi_amp", r.xi_amp)?;
    d.set_item("t_eff", r.t_eff)?;
    d.set_item("n_th", r.n_th)?;
    d.set_item("clamped", r.clamped)?;
    d.set_item("term1_complex", r.term1_complex)?;
    Ok(d)
}

/// One tier at one point, as the CSV row fields. Missing values are `None`.
#[pyfunction]
#[pyo3(signature = (params, tier, levels = 6, full_cavity = 4, full_mechanics = 8))]
fn evaluate<'py>(
    py: Python<'py>,
    params: &PySystemParams,
    tier: &str,
    levels: usize,
    full_cavity: usize,
    full_mechanics: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let tier = Tier::from_name(tier).ok_or_else(|| {
        let names: Vec<&str> = Tier::ALL.iter().map(|t| t.name()).collect();
        PyValueError::new_err(format!("unknown tier {tier:?}; expected one of {names:?}"))
    })?;
    let t = Truncations { effective: levels, full_cavity, full_mechanics };
    let p = params.inner.clone();
    let row = py.detach(|| sweep::evaluate_params(&p, &[], tier, &t, &SolverSettings::default()));
    let d = PyDict::new(py);
    d.set_item("tier", row.tier.name())?;
    d.set_item("g2_c", row.g2_c)?;
    d.set_item("g2_e", row.g2_e)?;
    d.set_item("n_c", row.n_c)?;
    d.set_item("n_e", row.n_e)?;
    d.set_item("status", row.status_text())?;
    d.set_item("residual", row.residual)?;
    d.set_item("hard_error", row.hard_error)?;
    Ok(d)
}

/// Canonical TOML of a sweep config, with every default written out.
#[pyfunction]
fn normalize_config(text: &str) -> PyResult<String> {
    Ok(sweep::serialize_config(&sweep::parse_config(text).map_err(py_err)?))
}

/// Runs a TOML sweep config and returns the CSV text.
#[pyfunction]
#[pyo3(signature = (config, threads = None))]
fn run_sweep(py: Python<'_>, config: &str, threads: Option<usize>) -> PyResult<String> {
    let spec = sweep::parse_config(config).map_err(py_err)?;
    let res = py.detach(|| sweep::run_sweep(&spec, threads)).map_err(py_err)?;
    Ok(res.to_csv())
}

/// Writes the data and plot script of one figure; returns the written paths.
#[pyfunction]
#[pyo3(signature = (figure, out_dir, threads = None))]
fn reproduce(py: Python<'_>, figure: &str, out_dir: PathBuf, threads: Option<usize>) -> PyResult<Vec<PathBuf>> {
    if !presets::FIGURES.contains(&figure) {
        return Err(PyValueError::new_err(format!("unknown figure {figure:?}; expected one of {:?}", presets::FIGURES)));
    }
    let r = py.detach(|| presets::reproduce(figure, &out_dir, threads)).map_err(py_err)?;
    if r.hard_errors > 0 {
        return Err(PyRuntimeError::new_err(format!("{} rows with hard errors", r.hard_errors)));
    }
    Ok(r.files)
}

#[pymodule(name = "optoblock")]
pub fn optoblock_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add("TIERS", Tier::ALL.iter().map(|t| t.name()).collect::<Vec<_>>())?;
    m.add("FIGURES", presets::FIGURES.to_vec())?;
    m.add_function(wrap_pyfunction!(g2_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(effective_noise, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}

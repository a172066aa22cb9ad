//! Python bindings: stability analysis, single episodes, experiment grids and
//! replay.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use ::swarmseek as core;
use core::config::{config_digest, parse_config, LoadedConfig};
use core::metrics::ExperimentRow;
use core::replay::RunArchive;
use core::stability::{self, RecurrenceInput};
use core::{Error, ScenarioConfig};

create_exception!(swarmseek, SwarmseekError, PyException);
create_exception!(swarmseek, ConfigError, SwarmseekError);
create_exception!(swarmseek, UnstableError, SwarmseekError);
create_exception!(swarmseek, ReplayMismatch, SwarmseekError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Unstable { .. } => UnstableError::new_err(msg),
        Error::Invalid { .. }
        | Error::Parse { .. }
        | Error::UnknownKey(_)
        | Error::OutOfRange { .. } => ConfigError::new_err(msg),
        Error::DigestMismatch { .. } | Error::TrajectoryMismatch { .. } => {
            ReplayMismatch::new_err(msg)
        }
        _ => SwarmseekError::new_err(msg),
    }
}

/// Turns a Python value into the right-hand side of a `key=value` override.
fn override_value(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(b) = v.extract::<bool>() {
        return Ok(b.to_string());
    }
    if let Ok(i) = v.extract::<i64>() {
        return Ok(i.to_string());
    }
    if let Ok(f) = v.extract::<f64>() {
        return Ok(format!("{f:?}"));
    }
    if let Ok(s) = v.extract::<String>() {
        return Ok(format!("{s:?}"));
    }
    if let Ok(items) = v.cast::<PyList>() {
        let parts: PyResult<Vec<String>> = items.iter().map(|x| override_value(&x)).collect();
        return Ok(format!("[{}]", parts?.join(", ")));
    }
    Err(ConfigError::new_err(format!("unsupported value {v}")))
}

fn overrides(values: Option<&Bound<'_, PyDict>>) -> PyResult<Vec<String>> {
    let Some(d) = values else {
        return Ok(Vec::new());
    };
    d.iter()
        .map(|(k, v)| {
            Ok(format!(
                "{}={}",
                k.extract::<String>()?,
                override_value(&v)?
            ))
        })
        .collect()
}

#[pyclass(name = "StabilityVerdict", module = "swarmseek", frozen)]
struct PyVerdict {
    inner: stability::StabilityVerdict,
}

#[pymethods]
impl PyVerdict {
    #[getter]
    fn stable(&self) -> bool {
        self.inner.stable
    }

    #[getter]
    fn failed_conditions(&self) -> Vec<String> {
        self.inner
            .failed_conditions
            .iter()
            .map(|c| format!("{c:?}"))
            .collect()
    }

    /// `{name: (lhs, rhs, satisfied)}` for the four closed-form conditions.
    #[getter]
    fn conditions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for c in &self.inner.conditions {
            d.set_item(format!("{:?}", c.condition), (c.lhs, c.rhs, c.satisfied))?;
        }
        Ok(d)
    }

    #[getter]
    fn lower_roots(&self) -> Vec<f64> {
        self.inner.lower_roots.clone()
    }

    #[getter]
    fn upper_roots(&self) -> Vec<f64> {
        self.inner.upper_roots.clone()
    }

    #[getter]
    fn oracle_stable(&self) -> bool {
        self.inner.oracle_stable
    }

    #[getter]
    fn boundary_distance(&self) -> f64 {
        self.inner.boundary_distance
    }

    fn __repr__(&self) -> String {
        format!(
            "StabilityVerdict(stable={}, failed={:?})",
            self.inner.stable, self.inner.failed_conditions
        )
    }
}

/// Closed-form stability verdict plus the root oracle. `t` is the loop gain.
#[pyfunction]
fn jury_check(w1: f64, w2: f64, c1: f64, c2: f64, t: f64) -> PyVerdict {
    PyVerdict {
        inner: stability::jury_check(w1, w2, c1, c2, t),
    }
}

#[pyfunction]
fn steady_state(r1: f64, r2: f64, x_ib: f64, x_gb: f64) -> PyResult<f64> {
    stability::steady_state(r1, r2, x_ib, x_gb).map_err(to_py)
}

/// Iterates the scalar position recurrence with constant gains and bests.
#[pyfunction]
#[pyo3(signature = (w1, w2, t, start, steps, r1, r2, x_ib, x_gb))]
#[allow(clippy::too_many_arguments)]
fn simulate_recurrence(
    w1: f64,
    w2: f64,
    t: f64,
    start: [f64; 3],
    steps: usize,
    r1: f64,
    r2: f64,
    x_ib: f64,
    x_gb: f64,
) -> Vec<f64> {
    stability::simulate_recurrence_constant(
        w1,
        w2,
        t,
        start,
        steps,
        RecurrenceInput { r1, r2, x_ib, x_gb },
    )
}

#[pyclass(name = "RunRecord", module = "swarmseek", frozen)]
struct PyRunRecord {
    inner: core::RunRecord,
}

#[pymethods]
impl PyRunRecord {
    #[getter]
    fn success(&self) -> bool {
        self.inner.success
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn seeking_time(&self) -> f64 {
        self.inner.seeking_time
    }

    #[getter]
    fn swarm_distance(&self) -> f64 {
        self.inner.swarm_distance()
    }

    #[getter]
    fn per_agent_distance(&self) -> Vec<f64> {
        self.inner.per_agent_distance.clone()
    }

    #[getter]
    fn diverged(&self) -> bool {
        self.inner.diverged
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Per agent, a list of `(iter, x, y, measured)`; `None` if not recorded.
    #[getter]
    fn trajectories(&self) -> Option<Vec<Vec<(usize, f64, f64, Option<f64>)>>> {
        self.inner.trajectories.as_ref().map(|t| {
            t.iter()
                .map(|agent| {
                    agent
                        .iter()
                        .map(|w| (w.iter, w.position.x, w.position.y, w.measured))
                        .collect()
                })
                .collect()
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| to_py(e.into()))
    }

    fn __repr__(&self) -> String {
        let r = &self.inner;
        format!(
            "RunRecord(success={}, iterations={}, seeking_time={:.3}, swarm_distance={:.3}, seed={})",
            r.success,
            r.iterations,
            r.seeking_time,
            r.swarm_distance(),
            r.seed
        )
    }
}

/// A validated scenario plus experiment axes.
///
/// `Scenario(text="", overrides={"algorithm": "spso", "grid.n": [5, 10]})`
#[pyclass(name = "Scenario", module = "swarmseek")]
struct PyScenario {
    inner: LoadedConfig,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (text = "", overrides = None))]
    fn new(text: &str, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let ov = self::overrides(overrides)?;
        Ok(Self {
            inner: parse_config(text, &ov).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, overrides = None))]
    fn load(path: PathBuf, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let ov = self::overrides(overrides)?;
        Ok(Self {
            inner: core::load_config(Some(&path), &ov).map_err(to_py)?,
        })
    }

    #[getter]
    fn algorithm(&self) -> String {
        self.inner.scenario.algorithm.variant.to_string()
    }

    #[getter]
    fn topology(&self) -> String {
        self.inner.scenario.topology.to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.scenario.n
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.scenario.seed
    }

    #[getter]
    fn runs(&self) -> usize {
        self.inner.runs
    }

    /// Number of cells in the experiment grid.
    fn cell_count(&self) -> usize {
        self.inner.grid.cells(&self.inner.scenario).len()
    }

    /// Flat config text that loads back to an equal scenario.
    fn echo(&self) -> String {
        self.inner.echo()
    }

    fn digest(&self) -> String {
        config_digest(&self.inner.scenario)
    }

    /// Runs one episode of the base scenario.
    #[pyo3(signature = (seed = None, record_trajectories = false))]
    fn run(
        &self,
        py: Python<'_>,
        seed: Option<u64>,
        record_trajectories: bool,
    ) -> PyResult<PyRunRecord> {
        let cfg = ScenarioConfig {
            seed: seed.unwrap_or(self.inner.scenario.seed),
            record_trajectories,
            ..self.inner.scenario.clone()
        };
        let rec = py.detach(|| core::run_episode(&cfg)).map_err(to_py)?;
        Ok(PyRunRecord { inner: rec })
    }

    /// Runs the experiment grid; one dict per cell.
    #[pyo3(signature = (runs = None, seed = None))]
    fn experiment<'py>(
        &self,
        py: Python<'py>,
        runs: Option<usize>,
        seed: Option<u64>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let cells = self.inner.grid.cells(&self.inner.scenario);
        let runs = runs.unwrap_or(self.inner.runs);
        let master = seed.unwrap_or(self.inner.scenario.seed);
        let rows = py.detach(|| core::run_experiment(&cells, runs, master));
        rows.iter().map(|r| row_dict(py, r)).collect()
    }

    /// Runs one episode with trajectories and writes a replayable archive.
    #[pyo3(signature = (path, seed = None))]
    fn archive(&self, py: Python<'_>, path: PathBuf, seed: Option<u64>) -> PyResult<PyRunRecord> {
        let cfg = ScenarioConfig {
            seed: seed.unwrap_or(self.inner.scenario.seed),
            record_trajectories: true,
            ..self.inner.scenario.clone()
        };
        let rec = py.detach(|| core::run_episode(&cfg)).map_err(to_py)?;
        RunArchive::new(&cfg, rec.clone())
            .save(&path)
            .map_err(to_py)?;
        Ok(PyRunRecord { inner: rec })
    }

    fn __repr__(&self) -> String {
        let s = &self.inner.scenario;
        format!(
            "Scenario(algorithm={}, topology={}, n={}, side={})",
            s.algorithm.variant, s.topology, s.n, s.space.side_length
        )
    }
}

fn row_dict<'py>(py: Python<'py>, row: &ExperimentRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let l = &row.label;
    d.set_item("algorithm", l.algorithm.to_string())?;
    d.set_item("topology", l.topology.to_string())?;
    d.set_item("area_side", l.area_side)?;
    d.set_item("n", l.n)?;
    d.set_item("source_speed", l.source_speed)?;
    d.set_item("noise", l.noise)?;
    d.set_item("error", row.error.clone())?;
    if let Some(s) = &row.summary {
        d.set_item("N", s.n_runs)?;
        d.set_item("n_failures", s.n_failures)?;
        if let Some(st) = s.stats {
            d.set_item("mu_I", st.mean_iterations)?;
            d.set_item("mu_Ts", st.mean_seeking_time)?;
            d.set_item("mu_SD", st.mean_swarm_distance)?;
            d.set_item("sd_I", st.sd_iterations)?;
            d.set_item("sd_Ts", st.sd_seeking_time)?;
            d.set_item("sd_SD", st.sd_swarm_distance)?;
        }
    }
    Ok(d)
}

/// Re-runs an archived episode; raises `ReplayMismatch` if it differs.
#[pyfunction]
#[pyo3(signature = (path, scenario = None))]
fn replay(py: Python<'_>, path: PathBuf, scenario: Option<&PyScenario>) -> PyResult<PyRunRecord> {
    let archive = RunArchive::load(&path).map_err(to_py)?;
    let current = scenario.map(|s| s.inner.scenario.clone());
    let rec = py
        .detach(|| core::replay(&archive, current.as_ref()))
        .map_err(to_py)?;
    Ok(PyRunRecord { inner: rec })
}

#[pymodule(name = "swarmseek")]
fn swarmseek_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class, function and exception to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SwarmseekError", py.get_type::<SwarmseekError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("UnstableError", py.get_type::<UnstableError>())?;
    m.add("ReplayMismatch", py.get_type::<ReplayMismatch>())?;
    m.add_class::<PyVerdict>()?;
    m.add_class::<PyRunRecord>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(jury_check, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_recurrence, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    Ok(())
}

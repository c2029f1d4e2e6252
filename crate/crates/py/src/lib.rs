//! Python bindings.
//!
//! Configurations cross the boundary as JSON-compatible dicts; results come
//! back as plain dicts and lists.
//!
//! ```python
//! import forage
//! cfg = forage.Config(total_ticks=500, heuristic="immediate_invite")
//! rec = forage.run_simulation(cfg, seed=7)
//! print(rec["percent_removed"], rec["nu"])
//! ```

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use forage_core::{
    self as core, Error, ExperimentPlan, HeuristicKind, RunSeeds, SimConfig, SpawnCase,
};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config { .. } | Error::Contract(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Serialize through JSON into native Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_heuristic(s: &str) -> PyResult<HeuristicKind> {
    HeuristicKind::from_label(s).ok_or_else(|| PyValueError::new_err(format!("unknown heuristic `{s}`")))
}

fn parse_case(s: &str) -> PyResult<SpawnCase> {
    SpawnCase::from_label(s).ok_or_else(|| PyValueError::new_err(format!("unknown case `{s}`")))
}

/// Simulation configuration. Keyword arguments override the defaults.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(py: Python<'_>, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let Some(overrides) = overrides else {
            return Ok(PyConfig {
                inner: SimConfig::default(),
            });
        };
        let text: String = py
            .import("json")?
            .call_method1("dumps", (overrides,))?
            .extract()?;
        let patch: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let mut doc = serde_json::to_value(SimConfig::default()).expect("config serializes");
        if let (Some(doc), Some(patch)) = (doc.as_object_mut(), patch.as_object()) {
            for (k, v) in patch {
                doc.insert(k.clone(), v.clone());
            }
        }
        let inner = SimConfig::from_json(&doc.to_string()).map_err(to_py_err)?;
        Ok(PyConfig { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: SimConfig::from_json(text).map_err(to_py_err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_pretty()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    /// Raise ValueError naming the first invalid key.
    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py_err)
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(heuristic={:?}, spawn_case={:?}, robots={}, ticks={})",
            self.inner.heuristic, self.inner.spawn_case, self.inner.robot_count, self.inner.total_ticks
        )
    }
}

/// A live world that can be stepped tick by tick.
#[pyclass(name = "World")]
struct PyWorld {
    inner: core::World,
    seed: u64,
}

#[pymethods]
impl PyWorld {
    #[new]
    #[pyo3(signature = (config, seed=1))]
    fn new(config: &PyConfig, seed: u64) -> PyResult<Self> {
        let seeds = RunSeeds::from_seed(seed, config.inner.heuristic);
        Ok(PyWorld {
            inner: core::World::new(&config.inner, seeds).map_err(to_py_err)?,
            seed,
        })
    }

    /// Advance one tick; returns the list of mode transitions that happened.
    fn step<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let report = self.inner.step().map_err(to_py_err)?;
        to_py(py, &report.transitions)
    }

    /// Step until the run ends; returns the run record.
    fn run<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        self.inner.run_with(|_, _| Ok(())).map_err(to_py_err)?;
        to_py(py, &self.inner.record(self.seed))
    }

    #[getter]
    fn tick(&self) -> u32 {
        self.inner.tick()
    }

    #[getter]
    fn invite_ticks(&self) -> u64 {
        self.inner.invite_ticks()
    }

    #[getter]
    fn collected(&self) -> u64 {
        self.inner.collected()
    }

    #[getter]
    fn remaining_prey(&self) -> u64 {
        self.inner.remaining_prey()
    }

    fn is_finished(&self) -> bool {
        self.inner.is_finished()
    }

    /// Per-robot state at the current tick boundary.
    fn robots<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let recs: Vec<_> = self.inner.trace_records().collect();
        to_py(py, &recs)
    }

    fn prey<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.prey())
    }

    fn signals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.signals())
    }

    fn record<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.record(self.seed))
    }
}

#[pyfunction]
#[pyo3(signature = (config, seed=1))]
fn run_simulation<'py>(py: Python<'py>, config: &PyConfig, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let rec = py
        .detach(|| core::run_simulation(&config.inner, seed))
        .map_err(to_py_err)?;
    to_py(py, &rec)
}

/// Run the heuristic x case grid. Returns one dict per cell with its runs and stats.
#[pyfunction]
#[pyo3(signature = (config, heuristics=None, cases=None, runs=10, seed=1, workers=0))]
fn monte_carlo<'py>(
    py: Python<'py>,
    config: &PyConfig,
    heuristics: Option<Vec<String>>,
    cases: Option<Vec<String>>,
    runs: u32,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let heuristics = match heuristics {
        Some(v) => v.iter().map(|s| parse_heuristic(s)).collect::<PyResult<_>>()?,
        None => HeuristicKind::ALL.to_vec(),
    };
    let spawn_cases = match cases {
        Some(v) => v.iter().map(|s| parse_case(s)).collect::<PyResult<_>>()?,
        None => SpawnCase::ALL.to_vec(),
    };
    let plan = ExperimentPlan {
        base_config: config.inner.clone(),
        heuristics,
        spawn_cases,
        runs_per_cell: runs,
        base_seed: seed,
        parallelism: workers,
    };
    let result = py.detach(|| core::monte_carlo(&plan)).map_err(to_py_err)?;
    to_py(py, &result.cells)
}

/// Efficiency; None when no invites were sent.
#[pyfunction]
fn compute_nu(content_removed: f64, invite_power: f64, invite_ticks: u64) -> PyResult<Option<f64>> {
    Ok(core::compute_nu(content_removed, invite_power, invite_ticks)
        .map_err(to_py_err)?
        .value())
}

#[pyfunction]
fn percent_removed(content_removed: u64, initial_total: u64) -> PyResult<f64> {
    core::percent_removed(content_removed, initial_total).map_err(to_py_err)
}

#[pyfunction]
fn clamp_emotion(v: f64) -> f64 {
    core::clamp_emotion(v).get()
}

/// `(hunger level, loneliness level)` under the given (or default) thresholds.
#[pyfunction]
#[pyo3(signature = (hunger, loneliness, config=None))]
fn classify_emotion(hunger: f64, loneliness: f64, config: Option<&PyConfig>) -> (String, String) {
    let default = SimConfig::default();
    let cfg = config.map_or(&default, |c| &c.inner);
    let s = core::classify_emotion(
        core::EmotionValue::new(hunger),
        core::EmotionValue::new(loneliness),
        cfg,
    );
    (format!("{:?}", s.hunger), format!("{:?}", s.loneliness))
}

#[pyfunction]
fn derive_run_seed(base_seed: u64, heuristic: u64, case: u64, run: u64) -> u64 {
    core::derive_run_seed(base_seed, heuristic, case, run)
}

#[pymodule]
fn forage(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyWorld>()?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(compute_nu, m)?)?;
    m.add_function(wrap_pyfunction!(percent_removed, m)?)?;
    m.add_function(wrap_pyfunction!(clamp_emotion, m)?)?;
    m.add_function(wrap_pyfunction!(classify_emotion, m)?)?;
    m.add_function(wrap_pyfunction!(derive_run_seed, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

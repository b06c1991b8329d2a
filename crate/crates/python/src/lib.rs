//! Python bindings. Configs cross the boundary as JSON strings; results come
//! back as dicts.

use std::path::PathBuf;

use chainball_core::agent::AgentConfig;
use chainball_core::harness::{extract_dataset, verify_weights as verify};
use chainball_core::passnet::{mlp_forward, load_weights};
use chainball_core::world::{run_match as play, DEFAULT_MATCH_CYCLES};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: chainball_core::Error) -> PyErr {
    match e {
        chainball_core::Error::Io { .. } => PyOSError::new_err(format!("{}: {e}", e.kind())),
        _ => PyValueError::new_err(format!("{}: {e}", e.kind())),
    }
}

fn parse_config(json: &str) -> PyResult<AgentConfig> {
    let cfg: AgentConfig = serde_json::from_str(json).map_err(|e| PyValueError::new_err(format!("json: {e}")))?;
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// Plays one match between two JSON configs.
#[pyfunction]
#[pyo3(signature = (left, right, seed, cycles = DEFAULT_MATCH_CYCLES))]
fn run_match<'py>(py: Python<'py>, left: &str, right: &str, seed: u64, cycles: u64) -> PyResult<Bound<'py, PyDict>> {
    let (a, b) = (parse_config(left)?, parse_config(right)?);
    let r = py.detach(|| play(&a, &b, seed, cycles)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("goals_left", r.goals_left)?;
    d.set_item("goals_right", r.goals_right)?;
    d.set_item("cycles_played", r.cycles_played)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// Probe checksum of a weights file.
#[pyfunction]
fn verify_weights<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let report = verify(&path).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("probes", report.probes)?;
    d.set_item("checksum", report.checksum)?;
    d.set_item("max_sum_error", report.max_sum_error)?;
    Ok(d)
}

/// Receiver probabilities for one feature vector.
#[pyfunction]
fn predict(path: PathBuf, features: Vec<f64>) -> PyResult<Vec<f64>> {
    let weights = load_weights(&path).map_err(to_py)?;
    let want = weights.dims.first().copied().unwrap_or(0);
    if features.len() != want {
        return Err(PyValueError::new_err(format!("expected {want} features, got {}", features.len())));
    }
    Ok(mlp_forward(&weights, &features))
}

/// Records pass decisions of `config` against `opponent` into train/test CSVs.
#[pyfunction]
#[pyo3(signature = (config, opponent, matches, out_dir, seed = 0, cycles = DEFAULT_MATCH_CYCLES))]
fn extract<'py>(
    py: Python<'py>,
    config: &str,
    opponent: &str,
    matches: usize,
    out_dir: PathBuf,
    seed: u64,
    cycles: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let (a, b) = (parse_config(config)?, parse_config(opponent)?);
    let report = py.detach(|| extract_dataset(&a, &[b], matches, cycles, seed, &out_dir)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("rows", report.rows)?;
    d.set_item("train_rows", report.train_rows)?;
    d.set_item("test_rows", report.test_rows)?;
    d.set_item("train_path", report.train_path)?;
    d.set_item("test_path", report.test_path)?;
    Ok(d)
}

#[pymodule]
pub fn chainball(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_match, m)?)?;
    m.add_function(wrap_pyfunction!(verify_weights, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add("FEATURE_LEN", chainball_core::passnet::FEATURE_LEN)?;
    Ok(())
}

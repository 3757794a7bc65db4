//! Python module `qwalk_py`. Matrices cross the boundary as nested lists of
//! complex numbers; schedules and sweep configs as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qwalk::compiler::{
    compile as compile_target, schedule_from_json, schedule_to_json, verify as verify_target,
};
use qwalk::linalg::{haar_random_unitary, ComplexMatrix, UnitaryMatrix};
use qwalk::metrics::compare;
use qwalk::noise::{sample_imperfections, NoiseParams, Regime};
use qwalk::sweep::{
    csv_string, realize_compiled, run_sweep, threads_from_env, SweepConfig, SweepKind,
};

type Rows = Vec<Vec<Complex64>>;

fn to_py_err(e: qwalk::Error) -> PyErr {
    if e.is_internal() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn matrix(rows: &Rows) -> qwalk::Result<ComplexMatrix> {
    ComplexMatrix::from_rows(rows)
}

fn unitary(rows: &Rows) -> qwalk::Result<UnitaryMatrix> {
    UnitaryMatrix::new(matrix(rows)?)
}

fn rows_of(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn sweep_kind(kind: &str) -> qwalk::Result<SweepKind> {
    match kind {
        "loss" => Ok(SweepKind::Loss),
        "phase" => Ok(SweepKind::Phase),
        other => Err(qwalk::Error::InvalidArgument(format!(
            "sweep kind {other:?} is not loss or phase"
        ))),
    }
}

pub fn sweep_csv(kind: &str, config_json: Option<&str>) -> qwalk::Result<String> {
    let kind = sweep_kind(kind)?;
    let config = match config_json {
        Some(text) => SweepConfig::from_json(text)?,
        None => SweepConfig::default_for(kind),
    };
    Ok(csv_string(
        &run_sweep(&config, kind, threads_from_env()?)?.records,
    ))
}

pub fn simulate_rows(schedule_json: &str, params: NoiseParams, seed: u64) -> qwalk::Result<Rows> {
    let result = schedule_from_json(schedule_json)?;
    let draw = sample_imperfections(&params, Regime::TimeMultiplexed, 1, seed)?[0];
    Ok(rows_of(&realize_compiled(&result, &draw)?))
}

/// Seeded Haar-random unitary.
#[pyfunction]
fn haar_unitary(dim: usize, seed: u64) -> PyResult<Rows> {
    Ok(rows_of(
        haar_random_unitary(dim, seed).map_err(to_py_err)?.matrix(),
    ))
}

/// Schedule JSON for a unitary target.
#[pyfunction]
#[pyo3(signature = (target, tolerance = 1e-9))]
fn compile(target: Rows, tolerance: f64) -> PyResult<String> {
    let u = unitary(&target).map_err(to_py_err)?;
    Ok(schedule_to_json(
        &compile_target(&u, tolerance).map_err(to_py_err)?,
    ))
}

/// Max-entry residual of a schedule against a target.
#[pyfunction]
fn verify(schedule_json: &str, target: Rows) -> PyResult<f64> {
    let result = schedule_from_json(schedule_json).map_err(to_py_err)?;
    verify_target(&result, &unitary(&target).map_err(to_py_err)?).map_err(to_py_err)
}

/// Realized K x K block under one time-multiplexed imperfection draw.
#[pyfunction]
#[pyo3(signature = (schedule_json, mean_amplitude = 1.0, sigma_loss = 0.0, sigma_phase = 0.0, seed = 1))]
fn simulate(
    schedule_json: &str,
    mean_amplitude: f64,
    sigma_loss: f64,
    sigma_phase: f64,
    seed: u64,
) -> PyResult<Rows> {
    let params = NoiseParams {
        mean_amplitude,
        sigma_loss,
        sigma_phase,
    };
    simulate_rows(schedule_json, params, seed).map_err(to_py_err)
}

/// `(fidelity, similarity)` of a realized matrix against a target.
#[pyfunction]
fn scores(realized: Rows, target: Rows) -> PyResult<(f64, f64)> {
    let s = compare(
        &matrix(&realized).map_err(to_py_err)?,
        &unitary(&target).map_err(to_py_err)?,
    )
    .map_err(to_py_err)?;
    Ok((s.fidelity, s.similarity))
}

/// Sweep CSV; `kind` is "loss" or "phase".
#[pyfunction]
#[pyo3(signature = (kind, config_json = None))]
fn sweep(py: Python<'_>, kind: &str, config_json: Option<&str>) -> PyResult<String> {
    py.detach(|| sweep_csv(kind, config_json))
        .map_err(to_py_err)
}

/// One line per invariant suite; raises if any fails.
#[pyfunction]
#[pyo3(signature = (seed = 1))]
fn selftest(seed: u64) -> PyResult<Vec<String>> {
    let report = qwalk::selftest::run_selftest(seed);
    let lines: Vec<String> = report.suites.iter().map(|s| s.to_string()).collect();
    if report.passed() {
        Ok(lines)
    } else {
        Err(PyRuntimeError::new_err(lines.join("\n")))
    }
}

#[pymodule]
fn qwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(scores, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

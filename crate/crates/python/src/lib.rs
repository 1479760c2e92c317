use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mkdv_shock::modulation::ModulationState;
use mkdv_shock::oracle::{compare_slice, solve_mkdv, CompareConfig, FieldSlice, GridSpec};
use mkdv_shock::scattering::ShockParams;
use mkdv_shock::specfun::{complete_elliptic_k, jacobi_dn, theta, ThetaParams};
use mkdv_shock::wavefield::{WaveConfig, Wavefield};
use mkdv_shock::Error;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn wavefield(c: f64) -> PyResult<Wavefield> {
    let params = ShockParams::new(c).map_err(to_py)?;
    Wavefield::new(params, WaveConfig::default()).map_err(to_py)
}

/// Parse a serde value into Python objects through the json module.
fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Asymptotic value of q at (x, t).
#[pyfunction]
fn q(c: f64, x: f64, t: f64) -> PyResult<f64> {
    Ok(wavefield(c)?.sample(x, t).map_err(to_py)?.q)
}

/// Full sample at (x, t) as a dict: region, q, envelope, wavelength.
#[pyfunction]
fn sample<'py>(py: Python<'py>, c: f64, x: f64, t: f64) -> PyResult<Bound<'py, PyAny>> {
    let s = wavefield(c)?.sample(x, t).map_err(to_py)?;
    json_to_py(py, &s)
}

/// `(x, q)` lists on `n` uniform points of `[xmin, xmax]`.
#[pyfunction]
fn profile(c: f64, t: f64, xmin: f64, xmax: f64, n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let samples = wavefield(c)?.profile(t, xmin, xmax, n).map_err(to_py)?;
    Ok(samples.iter().map(|s| (s.x, s.q)).unzip())
}

/// Modulation parameters d, mu, m, tau, e0, B_g, B_Omega, Delta at x/12t = xi.
#[pyfunction]
fn modulation<'py>(py: Python<'py>, c: f64, xi: f64) -> PyResult<Bound<'py, PyDict>> {
    let params = ShockParams::new(c).map_err(to_py)?;
    let s = ModulationState::resolve(xi, &params).map_err(to_py)?;
    let out = PyDict::new(py);
    for (k, v) in [
        ("xi", s.xi),
        ("d", s.d),
        ("mu", s.mu),
        ("m", s.m),
        ("tau", s.tau),
        ("e0", s.e0),
        ("b_g", s.b_g),
        ("b_omega", s.b_omega),
        ("delta", s.delta),
    ] {
        out.set_item(k, v)?;
    }
    Ok(out)
}

/// Theta function sum over m of exp(tau m^2 / 2 + z m), tau < 0.
#[pyfunction]
fn theta_function(z: Complex64, tau: f64) -> PyResult<Complex64> {
    let p = ThetaParams::new(tau).map_err(to_py)?;
    theta(z, &p).map_err(to_py)
}

#[pyfunction]
fn elliptic_k(m: f64) -> PyResult<f64> {
    complete_elliptic_k(m).map_err(to_py)
}

#[pyfunction]
fn dn(u: f64, m: f64) -> PyResult<f64> {
    jacobi_dn(u, m).map_err(to_py)
}

/// Direct solver run. Returns a dict with the snapshot slices and the
/// conservation drift.
#[pyfunction]
#[pyo3(signature = (c, snapshots, half_length=512.0, n_points=8192, t_end=None, eps=0.5, dt=None))]
fn simulate<'py>(
    py: Python<'py>,
    c: f64,
    snapshots: Vec<f64>,
    half_length: f64,
    n_points: usize,
    t_end: Option<f64>,
    eps: f64,
    dt: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let last = snapshots.iter().cloned().fold(0.0, f64::max);
    let mut grid = GridSpec { half_length, n_points, t_end: t_end.unwrap_or(last), ..GridSpec::default() };
    grid.dt = dt.unwrap_or(0.25 * grid.max_dt());
    let params = ShockParams { c, quad: Default::default() };
    let run = py.detach(|| solve_mkdv(&params, grid, eps, &snapshots)).map_err(to_py)?;
    let run = run.into_result().map_err(to_py)?;
    json_to_py(py, &run)
}

/// Envelope and wavelength comparison of one slice against the asymptotics.
#[pyfunction]
fn compare<'py>(py: Python<'py>, c: f64, t: f64, x: Vec<f64>, q: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let field = wavefield(c)?;
    let slice = FieldSlice { t, x, q };
    let report = compare_slice(&slice, &field, &CompareConfig::default()).map_err(to_py)?;
    json_to_py(py, &report)
}

#[pymodule]
fn mkdv_shock_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(q, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(modulation, m)?)?;
    m.add_function(wrap_pyfunction!(theta_function, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_k, m)?)?;
    m.add_function(wrap_pyfunction!(dn, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}

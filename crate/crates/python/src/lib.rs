//! Python bindings: grids, measurement synthesis, the back-and-forth
//! inversion and the scalar diagnostics.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use waveobs_core::diagnostics;
use waveobs_core::spectral::{self, ModeVector};
use waveobs_core::{
    BackAndForth, Gains, Grid1D, MeasurementRecord, OscillatorState, ScalarField, ScenarioConfig, SourceProfile,
    TimeSeries,
};

fn py_err(e: waveobs_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Uniform grid on `[0, 1]` and time grid on `[0, T]`.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid1D,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (nx=20, cfl=0.005, horizon=3.0))]
    fn new(nx: usize, cfl: f64, horizon: f64) -> PyResult<Self> {
        Ok(Self {
            inner: Grid1D::new(nx, cfl, horizon).map_err(py_err)?,
        })
    }

    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn cfl(&self) -> f64 {
        self.inner.cfl()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    #[getter]
    fn n_steps_per_pass(&self) -> usize {
        self.inner.n_steps_per_pass()
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(nx={}, cfl={}, horizon={})",
            self.inner.nx(),
            self.inner.cfl(),
            self.inner.horizon()
        )
    }
}

fn field(values: Vec<f64>, grid: &Grid1D) -> PyResult<ScalarField> {
    let f = ScalarField::from_values(values);
    if f.len() != grid.n_nodes() {
        return Err(PyValueError::new_err(format!(
            "expected {} nodal values, got {}",
            grid.n_nodes(),
            f.len()
        )));
    }
    Ok(f)
}

/// Nodal samples of a named source profile (`poly_paper`, `sine_k`, `modes`).
#[pyfunction]
#[pyo3(signature = (name, grid, k=None, coeffs=None))]
fn source_profile(name: &str, grid: &PyGrid, k: Option<usize>, coeffs: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    let p = SourceProfile::from_name(name, k, coeffs.as_deref()).map_err(py_err)?;
    Ok(p.sample(&grid.inner).into_values())
}

/// Boundary measurement `y(t_n) = u_x(t_n, 0)`, `n = 0..=n_steps_per_pass`.
#[pyfunction]
fn simulate_forward(q: Vec<f64>, omega: f64, grid: &PyGrid) -> PyResult<Vec<f64>> {
    let q = field(q, &grid.inner)?;
    let m = waveobs_core::simulate_forward(&q, omega, &grid.inner).map_err(py_err)?;
    Ok(m.y.values().to_vec())
}

/// Output `Y = z1` of the source-free cascade started from `q`.
#[pyfunction]
fn simulate_cascade(q: Vec<f64>, omega: f64, grid: &PyGrid) -> PyResult<Vec<f64>> {
    let q = field(q, &grid.inner)?;
    let c = waveobs_core::simulate_cascade(&q, omega, &grid.inner).map_err(py_err)?;
    Ok(c.output.values().to_vec())
}

/// Adds seeded white noise of standard deviation `level * rms(y)`.
#[pyfunction]
fn add_noise(y: Vec<f64>, grid: &PyGrid, level: f64, seed: u64) -> PyResult<Vec<f64>> {
    let m = MeasurementRecord::from_series(TimeSeries::new(y, grid.inner.dt()), 0.0, grid.inner.horizon());
    let noisy = waveobs_core::add_noise(&m, level, seed).map_err(py_err)?;
    Ok(noisy.y.values().to_vec())
}

/// Outcome of [`invert`]: estimates at every iteration plus monitoring data.
#[pyclass(name = "Inversion", frozen, get_all)]
struct PyInversion {
    /// `estimates[k]` is the estimate after `k` iterations (`k = 0` is zero).
    estimates: Vec<Vec<f64>>,
    /// Relative `L^2` errors per iteration (empty without `q_true`).
    l2_errors: Vec<f64>,
    /// Lyapunov values at every half-pass boundary (empty without `q_true`).
    lyapunov: Vec<f64>,
    hidden_regularity: Vec<f64>,
    warnings: Vec<String>,
}

#[pymethods]
impl PyInversion {
    #[getter]
    fn final_estimate(&self) -> Vec<f64> {
        self.estimates.last().cloned().unwrap_or_default()
    }
}

/// Back-and-forth inversion of the measurement `y`.
#[pyfunction]
#[pyo3(signature = (y, grid, omega=1.0, gamma1=1.0, gamma2=0.5, iterations=50, q_true=None))]
#[allow(clippy::too_many_arguments)]
fn invert(
    py: Python<'_>,
    y: Vec<f64>,
    grid: &PyGrid,
    omega: f64,
    gamma1: f64,
    gamma2: f64,
    iterations: usize,
    q_true: Option<Vec<f64>>,
) -> PyResult<PyInversion> {
    let g = grid.inner;
    let gains = Gains::new(gamma1, gamma2).map_err(py_err)?;
    let m = MeasurementRecord::from_series(TimeSeries::new(y, g.dt()), omega, g.horizon());
    let truth = q_true.map(|q| field(q, &g)).transpose()?;
    let run = py
        .detach(|| {
            let mut driver = BackAndForth::new(&m, gains, omega, &g).iterations(iterations);
            driver.truth = truth.as_ref();
            driver.run()
        })
        .map_err(py_err)?;
    let norm = match &truth {
        Some(q) => waveobs_core::grid::l2_norm(q, &g).map_err(py_err)?,
        None => 1.0,
    };
    Ok(PyInversion {
        l2_errors: run.reports.iter().filter_map(|r| r.l2_err.map(|e| e / norm)).collect(),
        estimates: run.estimates.into_iter().map(ScalarField::into_values).collect(),
        lyapunov: run.lyapunov,
        hidden_regularity: run.hidden_regularity,
        warnings: run.warnings,
    })
}

/// Runs the scenario described by a JSON configuration with truth
/// monitoring and returns the inversion.
#[pyfunction]
fn run_scenario(py: Python<'_>, config_json: &str) -> PyResult<PyInversion> {
    let config: ScenarioConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (g, gains, source) = config.validate().map_err(py_err)?;
    let q = source.sample(&g);
    let mut m = waveobs_core::simulate_forward(&q, config.omega, &g).map_err(py_err)?;
    if config.noise > 0.0 {
        m = waveobs_core::add_noise(&m, config.noise, config.seed).map_err(py_err)?;
    }
    let inversion = invert(
        py,
        m.y.values().to_vec(),
        &PyGrid { inner: g },
        config.omega,
        gains.gamma1,
        gains.gamma2,
        config.iterations,
        Some(q.into_values()),
    )?;
    Ok(inversion)
}

/// Sine-series measurement `y(t_n)` for source coefficients `coeffs`.
#[pyfunction]
fn oracle_measurement(coeffs: Vec<f64>, omega: f64, n_samples: usize, dt: f64) -> PyResult<Vec<f64>> {
    let y = spectral::oracle_measurement(&ModeVector::new(coeffs), omega, n_samples, dt).map_err(py_err)?;
    Ok(y.values().to_vec())
}

/// Sine coefficients `c_k`, `k = 1..=n_modes`, of nodal values `f`.
#[pyfunction]
fn sine_coefficients(f: Vec<f64>, grid: &PyGrid, n_modes: usize) -> PyResult<Vec<f64>> {
    let f = field(f, &grid.inner)?;
    Ok(spectral::sine_coefficients(&f, &grid.inner, n_modes)
        .map_err(py_err)?
        .coefficients)
}

/// Lyapunov function of an error state.
#[pyfunction]
#[pyo3(signature = (w1_err, w2_err, z_err, grid, omega=1.0, gamma1=1.0, gamma2=0.5))]
fn lyapunov_value(
    w1_err: Vec<f64>,
    w2_err: Vec<f64>,
    z_err: (f64, f64, f64),
    grid: &PyGrid,
    omega: f64,
    gamma1: f64,
    gamma2: f64,
) -> PyResult<f64> {
    let g = &grid.inner;
    diagnostics::lyapunov_value(
        &field(w1_err, g)?,
        &field(w2_err, g)?,
        OscillatorState::new(z_err.0, z_err.1, z_err.2),
        Gains::new(gamma1, gamma2).map_err(py_err)?,
        omega,
        g,
    )
    .map_err(py_err)
}

/// Trace-bound ratio for Dirichlet data `f`, initial data `(q0, q1)` and the
/// recorded boundary trace; at most 1 for any wave solution.
#[pyfunction]
fn hidden_regularity_ratio(f: Vec<f64>, q0: Vec<f64>, q1: Vec<f64>, trace: Vec<f64>, grid: &PyGrid) -> PyResult<f64> {
    let g = &grid.inner;
    diagnostics::hidden_regularity_ratio(
        &TimeSeries::new(f, g.dt()),
        &field(q0, g)?,
        &field(q1, g)?,
        &TimeSeries::new(trace, g.dt()),
        g.horizon(),
        g,
    )
    .map_err(py_err)
}

#[pymodule]
fn waveobs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyInversion>()?;
    m.add_function(wrap_pyfunction!(source_profile, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_forward, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cascade, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_measurement, m)?)?;
    m.add_function(wrap_pyfunction!(sine_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_value, m)?)?;
    m.add_function(wrap_pyfunction!(hidden_regularity_ratio, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

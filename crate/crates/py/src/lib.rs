//! Python bindings for the feedback-capacity toolkit. The module imports as
//! `fbcap`; all rates are in nats.

use fbcap::{capacity, noise, oracle, recursion, sim};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: fbcap::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn model_kind(name: &str) -> PyResult<recursion::ModelKind> {
    match name {
        "ma1" => Ok(recursion::ModelKind::Ma1),
        "ar1" => Ok(recursion::ModelKind::Ar1),
        other => Err(PyValueError::new_err(format!(
            "model must be 'ma1' or 'ar1', got '{other}'"
        ))),
    }
}

/// Rate `-ln x0` with the root diagnostics.
#[pyclass(name = "CapacityResult", get_all, frozen)]
struct PyCapacity {
    rate_nats: f64,
    rate_bits: f64,
    x0: f64,
    residual: f64,
    iterations: u32,
}

#[pymethods]
impl PyCapacity {
    fn __repr__(&self) -> String {
        format!("CapacityResult(rate_nats={:?}, x0={:?})", self.rate_nats, self.x0)
    }
}

impl From<capacity::CapacityResult> for PyCapacity {
    fn from(r: capacity::CapacityResult) -> Self {
        Self {
            rate_nats: r.rate_nats,
            rate_bits: r.rate_bits(),
            x0: r.x0,
            residual: r.polynomial_residual,
            iterations: r.iterations,
        }
    }
}

#[pyfunction]
fn ma1_feedback_capacity(alpha: f64, snr: f64) -> PyResult<PyCapacity> {
    capacity::ma1_feedback_capacity(alpha, snr).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn ar1_achievable_rate(alpha: f64, snr: f64) -> PyResult<PyCapacity> {
    capacity::ar1_achievable_rate(alpha, snr).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn arma11_conjectured_rate(alpha: f64, beta: f64, snr: f64) -> PyResult<PyCapacity> {
    capacity::arma11_conjectured_rate(alpha, beta, snr)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn interleaved_ma2_greedy_rate(alpha: f64, snr: f64) -> PyResult<PyCapacity> {
    capacity::interleaved_ma2_greedy_rate(alpha, snr)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn white_capacity(snr: f64) -> PyResult<f64> {
    capacity::white_capacity(snr).map_err(to_py)
}

/// Limit of the scalar recursion at constant power for `model` in
/// `{"ma1", "ar1"}`.
#[pyfunction]
#[pyo3(signature = (alpha, snr, model = "ma1"))]
fn fixed_point(alpha: f64, snr: f64, model: &str) -> PyResult<f64> {
    let fp = match model_kind(model)? {
        recursion::ModelKind::Ma1 => recursion::ma1_fixed_point(alpha, snr),
        recursion::ModelKind::Ar1 => recursion::ar1_fixed_point(alpha, snr),
    };
    fp.map(|f| f.value).map_err(to_py)
}

#[pyclass(name = "RecursionTrace", get_all, frozen)]
struct PyTrace {
    j: Vec<f64>,
    xi: Vec<f64>,
    per_symbol_rate: f64,
}

impl From<recursion::RecursionTrace> for PyTrace {
    fn from(t: recursion::RecursionTrace) -> Self {
        Self {
            j: t.j,
            xi: t.xi,
            per_symbol_rate: t.per_symbol_rate,
        }
    }
}

/// `J_0..J_n` for the given per-symbol powers with average budget `snr`.
#[pyfunction]
#[pyo3(signature = (alpha, powers, snr, model = "ma1"))]
fn run_recursion(alpha: f64, powers: Vec<f64>, snr: f64, model: &str) -> PyResult<PyTrace> {
    let alloc = recursion::PowerAllocation::new(powers, snr).map_err(to_py)?;
    model_kind(model)?
        .trace(alpha, &alloc)
        .map(Into::into)
        .map_err(to_py)
}

/// Best power allocation for block length `n`; returns `(powers, trace)`.
#[pyfunction]
#[pyo3(signature = (alpha, n, snr, model = "ma1"))]
fn optimize_allocation(alpha: f64, n: usize, snr: f64, model: &str) -> PyResult<(Vec<f64>, PyTrace)> {
    let opt = recursion::optimize_allocation(model_kind(model)?, alpha, n, snr).map_err(to_py)?;
    Ok((opt.allocation.powers().to_vec(), opt.trace.into()))
}

#[pyfunction]
fn ma1_covariance(alpha: f64, n: usize) -> PyResult<Vec<Vec<f64>>> {
    noise::covariance(&noise::NoiseModel::ma1(alpha), n)
        .map(|c| rows(c.matrix()))
        .map_err(to_py)
}

#[pyfunction]
fn modified_covariance(alpha: f64, n: usize) -> PyResult<Vec<Vec<f64>>> {
    noise::covariance_modified(alpha, n)
        .map(|c| rows(c.matrix()))
        .map_err(to_py)
}

#[pyfunction]
fn ma1_spectral_density(alpha: f64, omega: f64) -> PyResult<f64> {
    noise::spectral_density(&noise::NoiseModel::ma1(alpha), omega).map_err(to_py)
}

/// Optimal n-block strategy: feedback matrix `b`, innovation covariance `kv`.
#[pyclass(name = "BlockStrategy", get_all, frozen)]
struct PyStrategy {
    n: usize,
    rate_nats: f64,
    method: String,
    b: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
    power_used: f64,
}

impl PyStrategy {
    fn new(s: &oracle::StrategyMatrices, rate_nats: f64, method: &str) -> Self {
        Self {
            n: s.n,
            rate_nats,
            method: method.to_string(),
            b: rows(&s.b),
            kv: rows(&s.kv),
            power_used: s.power_used,
        }
    }
}

/// Block capacity by the sequential projection construction.
#[pyfunction]
fn greedy_block_capacity(alpha: f64, n: usize, snr: f64) -> PyResult<PyStrategy> {
    let (g, est) = oracle::greedy_block_capacity(alpha, n, snr).map_err(to_py)?;
    Ok(PyStrategy::new(&g.strategy, est.rate_nats, "greedy"))
}

/// Block capacity by the generic optimizer (`n <= 8`), on the modified
/// covariance when `modified` is true and the stationary one otherwise.
#[pyfunction]
#[pyo3(signature = (alpha, n, snr, modified = true, seed = 0))]
fn generic_optimize(alpha: f64, n: usize, snr: f64, modified: bool, seed: u64) -> PyResult<PyStrategy> {
    let opts = oracle::GenericOptions {
        seed,
        ..oracle::GenericOptions::default()
    };
    let (s, est) = oracle::generic_optimize_with(alpha, n, snr, modified, &opts).map_err(to_py)?;
    Ok(PyStrategy::new(&s, est.rate_nats, "generic"))
}

/// Parameters of the feedback coding scheme at rate `rate_fraction * C`.
#[pyclass(name = "SchemeParams", frozen)]
struct PyScheme {
    inner: sim::SchemeParams,
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (alpha, snr, n, rate_fraction, u0_known = true))]
    fn new(alpha: f64, snr: f64, n: usize, rate_fraction: f64, u0_known: bool) -> PyResult<Self> {
        let c = capacity::ma1_feedback_capacity(alpha, snr).map_err(to_py)?;
        let inner = sim::SchemeParams::new(alpha, snr, n, rate_fraction * c.rate_nats)
            .map_err(to_py)?
            .with_u0_known(u0_known);
        Ok(Self { inner })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn grid_size(&self) -> u64 {
        self.inner.grid_size
    }

    #[getter]
    fn rate_nats(&self) -> f64 {
        self.inner.rate_nats
    }

    #[getter]
    fn capacity_nats(&self) -> f64 {
        self.inner.capacity_nats
    }

    /// `var(X_1 | Y^k)` for `k = 1..n`.
    fn mmse_by_time(&self) -> Vec<f64> {
        sim::DecoderModel::new(&self.inner).mmse_by_time()
    }

    /// Output entropy rate minus noise entropy rate, in nats.
    fn entropy_gap(&self) -> PyResult<f64> {
        sim::entropy_gap(&self.inner).map(|g| g.gap()).map_err(to_py)
    }
}

#[pyclass(name = "SimReport", frozen)]
struct PyReport {
    inner: sim::SimReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn trials(&self) -> u64 {
        self.inner.trials
    }

    #[getter]
    fn errors(&self) -> u64 {
        self.inner.errors
    }

    #[getter]
    fn error_rate(&self) -> f64 {
        self.inner.error_rate
    }

    #[getter]
    fn error_ci(&self) -> (f64, f64) {
        (self.inner.error_ci.low, self.inner.error_ci.high)
    }

    #[getter]
    fn mse_analytic(&self) -> Vec<f64> {
        self.inner.mse_analytic.clone()
    }

    #[getter]
    fn mse_empirical(&self) -> Vec<f64> {
        self.inner.mse_empirical.clone()
    }

    #[getter]
    fn decay_slope_nats(&self) -> f64 {
        self.inner.decay_slope_nats
    }

    /// `(omega, theoretical, empirical)` triples.
    #[getter]
    fn spectrum(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .spectrum
            .iter()
            .map(|p| (p.omega, p.theoretical, p.empirical))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Monte Carlo run; deterministic in `seed`. Releases the GIL while running.
#[pyfunction]
#[pyo3(signature = (params, trials, seed = 0))]
fn run_montecarlo(py: Python<'_>, params: &PyScheme, trials: u64, seed: u64) -> PyResult<PyReport> {
    let p = params.inner;
    let inner = py
        .detach(|| sim::run_montecarlo(&p, trials, seed))
        .map_err(to_py)?;
    Ok(PyReport { inner })
}

#[pymodule]
#[pyo3(name = "fbcap")]
fn fbcap_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCapacity>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyStrategy>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(ma1_feedback_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(ar1_achievable_rate, m)?)?;
    m.add_function(wrap_pyfunction!(arma11_conjectured_rate, m)?)?;
    m.add_function(wrap_pyfunction!(interleaved_ma2_greedy_rate, m)?)?;
    m.add_function(wrap_pyfunction!(white_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(run_recursion, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(ma1_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(modified_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(ma1_spectral_density, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_block_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(generic_optimize, m)?)?;
    m.add_function(wrap_pyfunction!(run_montecarlo, m)?)?;
    Ok(())
}

//! Python bindings for the risk library.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use qpea_risk as core;

fn to_py(err: core::Error) -> PyErr {
    match err {
        core::Error::Numeric(_) | core::Error::DegenerateEvidence { .. } => {
            PyArithmeticError::new_err(err.to_string())
        }
        core::Error::Io(_) => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn loss_spec(name: &str, epsilon: Option<f64>) -> PyResult<core::LossSpec> {
    core::LossSpec::from_name(name, epsilon).py()
}

fn noise(lam: f64) -> PyResult<core::NoiseModel> {
    core::NoiseModel::new(lam).py()
}

/// Fourier coefficients L_0..L_K of a loss.
#[pyclass(name = "FourierLoss", module = "qpea", frozen)]
struct PyFourierLoss(core::FourierLoss);

#[pymethods]
impl PyFourierLoss {
    #[new]
    #[pyo3(signature = (loss, kmax, epsilon = None))]
    fn new(loss: &str, kmax: usize, epsilon: Option<f64>) -> PyResult<Self> {
        Ok(Self(
            core::fourier_coefficients(&loss_spec(loss, epsilon)?, kmax).py()?,
        ))
    }

    #[staticmethod]
    fn constant(value: f64, kmax: usize) -> PyResult<Self> {
        Ok(Self(core::FourierLoss::constant(value, kmax).py()?))
    }

    #[getter]
    fn l0(&self) -> f64 {
        self.0.l0()
    }

    /// L_1..L_K.
    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn kmax(&self) -> usize {
        self.0.kmax()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    fn coefficient(&self, k: i64) -> f64 {
        self.0.coefficient(k)
    }

    /// Truncated Fourier series evaluated at `delta`.
    fn reconstruct(&self, delta: f64) -> f64 {
        core::reconstruct_loss(&self.0, delta)
    }

    fn __repr__(&self) -> String {
        format!("FourierLoss('{}', kmax={})", self.0.label(), self.0.kmax())
    }
}

#[pyclass(name = "RegisterState", module = "qpea", frozen)]
struct PyRegisterState(core::RegisterState);

#[pymethods]
impl PyRegisterState {
    /// A state from 2^m real amplitudes of unit norm.
    #[new]
    fn new(amplitudes: Vec<f64>) -> PyResult<Self> {
        Ok(Self(core::RegisterState::custom(amplitudes).py()?))
    }

    #[staticmethod]
    fn uniform(m: u32) -> PyResult<Self> {
        Ok(Self(core::uniform_state(m).py()?))
    }

    #[staticmethod]
    fn cosine(m: u32, omega: f64) -> PyResult<Self> {
        Ok(Self(core::cosine_state(m, omega).py()?))
    }

    /// Minimum eigenvector of the risk matrix.
    #[staticmethod]
    fn optimal(m: u32, loss: &PyFourierLoss) -> PyResult<Self> {
        Ok(Self(core::optimal_state(m, &loss.0).py()?))
    }

    #[staticmethod]
    fn from_csv(path: std::path::PathBuf) -> PyResult<Self> {
        let file = std::fs::File::open(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(Self(
            core::read_state_csv(std::io::BufReader::new(file)).py()?,
        ))
    }

    fn to_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        core::write_state_csv(&self.0, file).py()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.0.m()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<f64> {
        self.0.amplitudes().to_vec()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    #[getter]
    fn omega(&self) -> Option<f64> {
        self.0.omega()
    }

    fn autocorrelation(&self) -> Vec<f64> {
        self.0.autocorrelation()
    }

    fn __len__(&self) -> usize {
        self.0.amplitudes().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RegisterState(m={}, label='{}')",
            self.0.m(),
            self.0.label()
        )
    }
}

#[pyclass(name = "RiskReport", module = "qpea", frozen, get_all)]
struct PyRiskReport {
    risk: f64,
    method: String,
    m: u32,
    lam: f64,
    loss: String,
    state: String,
    omega: Option<f64>,
    measurements: usize,
    stderr: Option<f64>,
    estimator_gap: Option<f64>,
}

impl From<core::RiskReport> for PyRiskReport {
    fn from(r: core::RiskReport) -> Self {
        Self {
            risk: r.risk,
            method: r.method.to_string(),
            m: r.m,
            lam: r.lambda,
            loss: r.loss,
            state: r.state,
            omega: r.omega,
            measurements: r.measurements,
            stderr: r.stderr,
            estimator_gap: r.estimator_gap,
        }
    }
}

#[pymethods]
impl PyRiskReport {
    fn __float__(&self) -> f64 {
        self.risk
    }

    fn __repr__(&self) -> String {
        format!(
            "RiskReport(risk={}, method='{}', m={}, loss='{}', state='{}')",
            self.risk, self.method, self.m, self.loss, self.state
        )
    }
}

/// Single-shot risk. `path` is "direct" (autocorrelation sum) or "matrix".
#[pyfunction]
#[pyo3(signature = (state, loss, lam = 0.0, path = "direct"))]
fn risk_of_state(
    state: &PyRegisterState,
    loss: &PyFourierLoss,
    lam: f64,
    path: &str,
) -> PyResult<PyRiskReport> {
    let path = match path {
        "direct" => core::EvalPath::DirectSum,
        "matrix" => core::EvalPath::Matrix,
        other => return Err(PyValueError::new_err(format!("unknown path '{other}'"))),
    };
    Ok(
        core::risk_of_state_with(&state.0, &loss.0, noise(lam)?, path)
            .py()?
            .into(),
    )
}

#[pyfunction]
#[pyo3(signature = (m, loss, lam = 0.0))]
fn risk_uniform(m: u32, loss: &PyFourierLoss, lam: f64) -> PyResult<PyRiskReport> {
    Ok(core::risk_uniform_closed(m, &loss.0, noise(lam)?)
        .py()?
        .into())
}

#[pyfunction]
#[pyo3(signature = (m, omega, loss, lam = 0.0))]
fn risk_cosine(m: u32, omega: f64, loss: &PyFourierLoss, lam: f64) -> PyResult<PyRiskReport> {
    Ok(core::risk_cosine_closed(m, omega, &loss.0, noise(lam)?)
        .py()?
        .into())
}

/// Uniform-state risk through special functions, for a named loss.
#[pyfunction]
#[pyo3(signature = (m, loss, epsilon = None, lam = 0.0))]
fn uniform_named_risk(
    m: u32,
    loss: &str,
    epsilon: Option<f64>,
    lam: f64,
) -> PyResult<PyRiskReport> {
    Ok(
        core::uniform_named_risk(m, &loss_spec(loss, epsilon)?, noise(lam)?)
            .py()?
            .into(),
    )
}

/// Risk by direct numerical integration over θ.
#[pyfunction]
#[pyo3(signature = (state, loss, epsilon = None, lam = 0.0, grid = None))]
fn risk_bruteforce_oracle(
    state: &PyRegisterState,
    loss: &str,
    epsilon: Option<f64>,
    lam: f64,
    grid: Option<usize>,
) -> PyResult<PyRiskReport> {
    let grid = grid.unwrap_or(1 << (state.0.m() + 6));
    let spec = loss_spec(loss, epsilon)?;
    Ok(
        core::risk_bruteforce_oracle(&state.0, &spec, noise(lam)?, grid)
            .py()?
            .into(),
    )
}

/// Returns (omega', noiseless risk at omega').
#[pyfunction]
fn optimize_omega(m: u32, loss: &PyFourierLoss) -> PyResult<(f64, f64)> {
    let opt = core::optimize_omega(m, &loss.0).py()?;
    Ok((opt.omega, opt.risk0))
}

/// Smallest eigenvalue and eigenvector of the m-qubit risk matrix.
#[pyfunction]
fn min_eigenpair(loss: &PyFourierLoss, m: u32) -> PyResult<(f64, Vec<f64>)> {
    let rm = core::build_risk_matrix(&loss.0, m).py()?;
    let pair = core::min_eigenpair(&rm).py()?;
    Ok((pair.value, pair.vector))
}

/// Gaussian reference risk; `kind` is "shot_noise", "heisenberg" or "custom".
#[pyfunction]
#[pyo3(signature = (kind, value, loss, epsilon = None))]
fn baseline_risk(kind: &str, value: f64, loss: &str, epsilon: Option<f64>) -> PyResult<f64> {
    let resources = || {
        if value >= 1.0 && value.fract() == 0.0 {
            Ok(value as usize)
        } else {
            Err(PyValueError::new_err(
                "resource count must be a positive integer",
            ))
        }
    };
    let sigma = match kind {
        "shot_noise" => core::SigmaModel::shot_noise(resources()?).py()?,
        "heisenberg" => core::SigmaModel::heisenberg(resources()?).py()?,
        "custom" => core::SigmaModel::custom(value).py()?,
        other => return Err(PyValueError::new_err(format!("unknown baseline '{other}'"))),
    };
    core::baseline_risk(sigma, &loss_spec(loss, epsilon)?).py()
}

/// Bayes risk of `measurements` repetitions by exhaustive enumeration.
#[pyfunction]
#[pyo3(signature = (state, measurements, loss, lam = 0.0))]
fn exact_multi_risk(
    py: Python<'_>,
    state: &PyRegisterState,
    measurements: usize,
    loss: &PyFourierLoss,
    lam: f64,
) -> PyResult<PyRiskReport> {
    let noise = noise(lam)?;
    let (s, fl) = (state.0.clone(), loss.0.clone());
    let r = py.detach(move || core::exact_multi_risk(&s, measurements, &fl, noise));
    Ok(r.py()?.into())
}

#[pyfunction]
#[pyo3(signature = (state, measurements, loss, lam = 0.0, samples = 100_000, seed = 0))]
fn mc_multi_risk(
    py: Python<'_>,
    state: &PyRegisterState,
    measurements: usize,
    loss: &PyFourierLoss,
    lam: f64,
    samples: usize,
    seed: u64,
) -> PyResult<PyRiskReport> {
    let noise = noise(lam)?;
    let (s, fl) = (state.0.clone(), loss.0.clone());
    let r = py.detach(move || core::mc_multi_risk(&s, measurements, &fl, noise, samples, seed));
    Ok(r.py()?.into())
}

/// Bayes estimate of θ after observing `outcomes`.
#[pyfunction]
#[pyo3(signature = (state, outcomes, loss, lam = 0.0))]
fn bayes_estimate(
    state: &PyRegisterState,
    outcomes: Vec<usize>,
    loss: &PyFourierLoss,
    lam: f64,
) -> PyResult<f64> {
    let rec = core::MeasurementRecord::new(outcomes, state.0.clone(), noise(lam)?).py()?;
    let post = core::posterior_spectrum(&rec).py()?;
    core::bayes_estimate(&post, &loss.0).py()
}

/// Posterior density p(θ | outcomes) at each of `thetas`.
#[pyfunction]
#[pyo3(signature = (state, outcomes, thetas, lam = 0.0))]
fn posterior_density(
    state: &PyRegisterState,
    outcomes: Vec<usize>,
    thetas: Vec<f64>,
    lam: f64,
) -> PyResult<Vec<f64>> {
    let rec = core::MeasurementRecord::new(outcomes, state.0.clone(), noise(lam)?).py()?;
    let post = core::posterior_spectrum(&rec).py()?;
    Ok(thetas.iter().map(|&t| post.eval(t)).collect())
}

#[pymodule]
fn qpea(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", core::VERSION)?;
    m.add("MAX_QUBITS", core::MAX_QUBITS)?;
    m.add_class::<PyFourierLoss>()?;
    m.add_class::<PyRegisterState>()?;
    m.add_class::<PyRiskReport>()?;
    m.add_function(wrap_pyfunction!(risk_of_state, m)?)?;
    m.add_function(wrap_pyfunction!(risk_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(risk_cosine, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_named_risk, m)?)?;
    m.add_function(wrap_pyfunction!(risk_bruteforce_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_omega, m)?)?;
    m.add_function(wrap_pyfunction!(min_eigenpair, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_risk, m)?)?;
    m.add_function(wrap_pyfunction!(exact_multi_risk, m)?)?;
    m.add_function(wrap_pyfunction!(mc_multi_risk, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_density, m)?)?;
    Ok(())
}

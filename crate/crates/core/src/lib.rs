//! Bayes-optimal register states and risks for single-register quantum
//! phase estimation under periodic loss functions.

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bayes;
pub mod error;
pub mod loss;
pub mod optimize;
pub mod quadrature;
pub mod risk;
pub mod special;
pub mod states;
pub mod toeplitz;

pub use bayes::{
    bayes_estimate, exact_multi_risk, exact_multi_risk_with, expected_posterior_loss,
    likelihood_spectrum, mc_multi_risk, outcome_distribution, posterior_spectrum, Enumeration,
    MeasurementRecord, TrigSpectrum,
};
pub use error::{Error, Result};
pub use loss::{
    fourier_coefficients, fourier_coefficients_with, periodize_loss, reconstruct_loss, wrap_phase,
    FourierLoss, LossSpec, QuadratureConfig,
};
pub use risk::{
    baseline_risk, baseline_risk_hermite, cosine_autocorrelation, grid_estimator_gap, linear_fit,
    optimize_omega, risk_bruteforce_oracle, risk_cosine_closed, risk_of_state, risk_of_state_with,
    risk_uniform_closed, uniform_named_risk, EvalPath, LinearFit, NoiseModel, OmegaOptimum,
    RiskMethod, RiskReport, SigmaKind, SigmaModel,
};
pub use states::{
    cosine_state, fmt_f64, omega_max, optimal_state, read_state_csv, resources, uniform_state,
    write_state_csv, RegisterState, StateLabel, MAX_QUBITS,
};
pub use toeplitz::{
    build_risk_matrix, min_eigenpair, min_eigenpair_with, residual, EigenSolver, Eigenpair,
    RiskMatrix,
};

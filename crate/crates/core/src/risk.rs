//! Bayes risks of single-shot phase estimation.
//!
//! With a uniform prior and the grid estimator θ̂ = 2πy/2^m, the risk of a
//! register state c under depolarizing strength λ is
//!
//! ```text
//! R(c) = L_0 + (1−λ)^N cᵀ R c = L_0 + 2 (1−λ)^N Σ_{k=1..N} L_k a_k,
//! a_k = Σ_{j=k..N} c_j c_{j−k}.
//! ```
//!
//! Besides the general form this module carries the cosine-state and
//! uniform-state closed forms, the cosine-frequency optimizer, Gaussian
//! baselines and a brute-force integration of the risk that uses none of
//! the above.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::loss::{periodize_loss, FourierLoss, LossSpec};
use crate::optimize::scan_then_refine;
use crate::quadrature::{composite_gl, gauss_hermite, gauss_legendre};
use crate::special::{alternating_harmonic, digamma, trigamma, EULER_GAMMA};
use crate::states::{check_qubits, omega_max, resources, RegisterState, StateLabel};
use crate::toeplitz::build_risk_matrix;

/// Depolarizing strength λ applied to the register after every U(θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    lambda: f64,
}

impl NoiseModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
            return arg(format!(
                "depolarizing strength must satisfy 0 <= lambda < 1, got {lambda}"
            ));
        }
        Ok(Self { lambda })
    }

    pub fn noiseless() -> Self {
        Self { lambda: 0.0 }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// (1−λ)^N, the weight of the coherent part after N gates.
    pub fn attenuation(&self, n: usize) -> f64 {
        (1.0 - self.lambda).powf(n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    ClosedForm,
    MatrixForm,
    Bruteforce,
    ExactMulti,
    MonteCarlo,
}

impl fmt::Display for RiskMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskMethod::ClosedForm => "closed_form",
            RiskMethod::MatrixForm => "matrix_form",
            RiskMethod::Bruteforce => "bruteforce",
            RiskMethod::ExactMulti => "exact_multi",
            RiskMethod::MonteCarlo => "monte_carlo",
        })
    }
}

/// A risk value together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub risk: f64,
    pub method: RiskMethod,
    pub m: u32,
    pub lambda: f64,
    pub loss: String,
    pub state: String,
    pub omega: Option<f64>,
    /// Number of repeated measurements of the circuit.
    pub measurements: usize,
    /// Standard error, Monte Carlo only.
    pub stderr: Option<f64>,
    /// For custom states: how much lower the expected posterior loss gets
    /// when the estimate moves off the grid point 2πy/2^m. Zero means the
    /// grid estimator is the Bayes estimator.
    pub estimator_gap: Option<f64>,
}

impl RiskReport {
    pub(crate) fn new(
        risk: f64,
        method: RiskMethod,
        m: u32,
        noise: NoiseModel,
        loss: &str,
        state: StateLabel,
    ) -> Self {
        let omega = match state {
            StateLabel::Cosine { omega } => Some(omega),
            StateLabel::Uniform => Some(0.0),
            _ => None,
        };
        Self {
            risk,
            method,
            m,
            lambda: noise.lambda(),
            loss: loss.to_string(),
            state: state.to_string(),
            omega,
            measurements: 1,
            stderr: None,
            estimator_gap: None,
        }
    }
}

/// How [`risk_of_state_with`] evaluates the quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPath {
    /// 2 Σ_k L_k a_k over the state's autocorrelation
    #[default]
    DirectSum,
    /// cᵀ R c with the Toeplitz risk matrix
    Matrix,
}

pub fn risk_of_state(
    state: &RegisterState,
    fl: &FourierLoss,
    noise: NoiseModel,
) -> Result<RiskReport> {
    risk_of_state_with(state, fl, noise, EvalPath::DirectSum)
}

pub fn risk_of_state_with(
    state: &RegisterState,
    fl: &FourierLoss,
    noise: NoiseModel,
    path: EvalPath,
) -> Result<RiskReport> {
    let n = state.resources();
    fl.require_kmax(n)?;
    let (form, method) = match path {
        EvalPath::DirectSum => {
            let ac = state.autocorrelation();
            let s: f64 = (1..=n).map(|k| fl.coeffs()[k - 1] * ac[k]).sum();
            (2.0 * s, RiskMethod::ClosedForm)
        }
        EvalPath::Matrix => {
            let rm = build_risk_matrix(fl, state.m())?;
            (
                rm.quadratic_form(state.amplitudes()),
                RiskMethod::MatrixForm,
            )
        }
    };
    let risk = fl.l0() + noise.attenuation(n) * form;
    let mut report = RiskReport::new(risk, method, state.m(), noise, fl.label(), state.label());
    if state.label() == StateLabel::Custom {
        report.estimator_gap = Some(grid_estimator_gap(state, fl, noise));
    }
    Ok(report)
}

/// Expected posterior loss at offset ϑ = θ̂ − 2πy/2^m minus its value at
/// ϑ = 0, minimized over ϑ; returns the (non-negative) improvement.
pub fn grid_estimator_gap(state: &RegisterState, fl: &FourierLoss, noise: NoiseModel) -> f64 {
    let n = state.resources();
    let ac = state.autocorrelation();
    let att = noise.attenuation(n);
    let g = |t: f64| -> f64 {
        2.0 * att
            * (1..=n.min(fl.kmax()))
                .map(|k| fl.coeffs()[k - 1] * ac[k] * (k as f64 * t).cos())
                .sum::<f64>()
    };
    let (_, best) = scan_then_refine(g, -PI, PI, 8 * (n + 1), 1e-12);
    (g(0.0) - best).max(0.0)
}

fn check_omega(m: u32, omega: f64) -> Result<()> {
    if !(omega.is_finite() && (0.0..=omega_max(m)).contains(&omega)) {
        return arg(format!(
            "cosine frequency must lie in [0, {}] for m = {m}, got {omega}",
            omega_max(m)
        ));
    }
    Ok(())
}

/// f_k of the cosine state (its autocorrelation a_k), k = 0..=N.
pub fn cosine_autocorrelation(m: u32, omega: f64) -> Vec<f64> {
    let two_m = (1usize << m) as f64;
    let n = resources(m);
    if omega == 0.0 {
        return (0..=n).map(|k| 1.0 - k as f64 / two_m).collect();
    }
    let s = omega.sin();
    let denom = two_m * s + (two_m * omega).sin();
    (0..=n)
        .map(|k| {
            let kf = k as f64;
            ((two_m - kf) * (kf * omega).cos() * s + ((two_m - kf) * omega).sin()) / denom
        })
        .collect()
}

/// Risk of the cosine state with frequency ω from its closed-form
/// autocorrelation.
pub fn risk_cosine_closed(
    m: u32,
    omega: f64,
    fl: &FourierLoss,
    noise: NoiseModel,
) -> Result<RiskReport> {
    check_qubits(m)?;
    check_omega(m, omega)?;
    let n = resources(m);
    fl.require_kmax(n)?;
    let risk = cosine_risk_value(m, omega, fl, noise.attenuation(n));
    Ok(RiskReport::new(
        risk,
        RiskMethod::ClosedForm,
        m,
        noise,
        fl.label(),
        StateLabel::Cosine { omega },
    ))
}

fn cosine_risk_value(m: u32, omega: f64, fl: &FourierLoss, attenuation: f64) -> f64 {
    let f = cosine_autocorrelation(m, omega);
    let s: f64 = fl.coeffs()[..f.len() - 1]
        .iter()
        .zip(&f[1..])
        .map(|(l, f)| l * f)
        .sum();
    fl.l0() + 2.0 * attenuation * s
}

/// L_0 + 2(1−λ)^N Σ_k L_k (1 − k/2^m).
pub fn risk_uniform_closed(m: u32, fl: &FourierLoss, noise: NoiseModel) -> Result<RiskReport> {
    check_qubits(m)?;
    let n = resources(m);
    fl.require_kmax(n)?;
    let risk = cosine_risk_value(m, 0.0, fl, noise.attenuation(n));
    Ok(RiskReport::new(
        risk,
        RiskMethod::ClosedForm,
        m,
        noise,
        fl.label(),
        StateLabel::Uniform,
    ))
}

/// Uniform-state risk of a named loss through its special-function form.
pub fn uniform_named_risk(m: u32, loss: &LossSpec, noise: NoiseModel) -> Result<RiskReport> {
    check_qubits(m)?;
    loss.validate()?;
    let two_m = (1u64 << m) as f64;
    let half = two_m / 2.0;
    let n = resources(m);
    let nf = n as f64;
    let (noiseless, l0) = match loss {
        LossSpec::Absolute => {
            let z = (nf + 2.0) / 2.0;
            let r = (4f64.ln() + digamma(z) + EULER_GAMMA) / (PI * half) + trigamma(z) / PI;
            (r, PI / 2.0)
        }
        LossSpec::Squared => {
            let r = (2f64.ln() + alternating_harmonic(two_m)) / (two_m / 4.0)
                + trigamma((two_m + 1.0) / 2.0)
                - trigamma(half);
            (r, PI * PI / 3.0)
        }
        LossSpec::Holevo => (2.0 / two_m, 2.0),
        LossSpec::OneZero { epsilon } => {
            let eps = *epsilon;
            let head =
                (nf * eps / 2.0).sin() * (half * eps).sin() / (PI * half * (eps / 2.0).sin());
            // Σ_{k≥0} sin((k+2^m)ε)/(k+2^m) = (π−ε)/2 − Σ_{j=1..2^m−1} sin(jε)/j
            let partial: f64 = (1..=n).map(|j| (j as f64 * eps).sin() / j as f64).sum();
            let tail = 0.5 * (PI - eps) - partial;
            (head + 2.0 * tail / PI, 1.0 - eps / PI)
        }
        LossSpec::Custom { .. } => {
            return arg("special-function uniform risks exist only for the named losses")
        }
    };
    let risk = l0 + noise.attenuation(n) * (noiseless - l0);
    Ok(RiskReport::new(
        risk,
        RiskMethod::ClosedForm,
        m,
        noise,
        &loss.descriptor(),
        StateLabel::Uniform,
    ))
}

/// Points in the coarse ω scan.
pub const OMEGA_SCAN_POINTS: usize = 512;
/// Final bracket width of the golden-section refinement.
pub const OMEGA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaOptimum {
    pub omega: f64,
    /// Noiseless risk at the optimum. For λ > 0 the risk is
    /// L_0 + (1−λ)^N (risk0 − L_0) at the same ω.
    pub risk0: f64,
}

/// Cosine frequency minimizing the noiseless risk over [0, 2π/(N+2)].
/// Since λ only rescales the ω-dependent term, the argmin holds for all λ.
pub fn optimize_omega(m: u32, fl: &FourierLoss) -> Result<OmegaOptimum> {
    check_qubits(m)?;
    fl.require_kmax(resources(m))?;
    let f = |w: f64| cosine_risk_value(m, w, fl, 1.0);
    let (omega, risk0) = scan_then_refine(f, 0.0, omega_max(m), OMEGA_SCAN_POINTS, OMEGA_TOLERANCE);
    Ok(OmegaOptimum { omega, risk0 })
}

/// Variance model of a Gaussian reference estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaKind {
    ShotNoise,
    Heisenberg,
    Custom,
}

/// σ² of a normal reference estimator. For ν repetitions of n coherent
/// gate applications the variance is σ^{−2} = (1−λ)^{2n} n² ν; the named
/// limits take the noiseless resource scalings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaModel {
    pub kind: SigmaKind,
    pub sigma2: f64,
}

impl SigmaModel {
    /// σ² = 1/N
    pub fn shot_noise(resources: usize) -> Result<Self> {
        if resources == 0 {
            return arg("resource count must be positive");
        }
        Ok(Self {
            kind: SigmaKind::ShotNoise,
            sigma2: 1.0 / resources as f64,
        })
    }

    /// σ² = 1/N²
    pub fn heisenberg(resources: usize) -> Result<Self> {
        if resources == 0 {
            return arg("resource count must be positive");
        }
        let n = resources as f64;
        Ok(Self {
            kind: SigmaKind::Heisenberg,
            sigma2: 1.0 / (n * n),
        })
    }

    pub fn custom(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return arg(format!("variance must be positive, got {sigma2}"));
        }
        Ok(Self {
            kind: SigmaKind::Custom,
            sigma2,
        })
    }
}

/// Expected loss over δ ~ N(0, σ²) on the whole real line, using the
/// non-periodic loss.
pub fn baseline_risk(sig: SigmaModel, loss: &LossSpec) -> Result<f64> {
    let s2 = sig.sigma2;
    if !(s2.is_finite() && s2 > 0.0) {
        return arg(format!("variance must be positive, got {s2}"));
    }
    loss.validate()?;
    let sigma = s2.sqrt();
    Ok(match loss {
        LossSpec::Squared => s2,
        LossSpec::Absolute => sigma * (2.0 / PI).sqrt(),
        LossSpec::Holevo => 2.0 * (1.0 - (-s2 / 2.0).exp()),
        LossSpec::OneZero { epsilon } => libm::erfc(epsilon / (sigma * 2f64.sqrt())),
        LossSpec::Custom { .. } => baseline_risk_hermite(s2, loss, 64)?,
    })
}

/// Gauss–Hermite evaluation of the Gaussian expected loss.
pub fn baseline_risk_hermite(sigma2: f64, loss: &LossSpec, nodes: usize) -> Result<f64> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return arg(format!("variance must be positive, got {sigma2}"));
    }
    let (x, w) = gauss_hermite(nodes);
    let scale = (2.0 * sigma2).sqrt();
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        acc += wi * loss_raw(loss, scale * xi)?;
    }
    Ok(acc / PI.sqrt())
}

fn loss_raw(loss: &LossSpec, delta: f64) -> Result<f64> {
    Ok(match loss {
        LossSpec::Absolute => delta.abs(),
        LossSpec::Squared => delta * delta,
        LossSpec::Holevo => 4.0 * (0.5 * delta).sin().powi(2),
        LossSpec::OneZero { epsilon } => f64::from(u8::from(delta.abs() > *epsilon)),
        LossSpec::Custom { eval: Some(f), .. } => f(delta),
        LossSpec::Custom { name, eval: None } => {
            return Err(Error::Config(format!(
                "custom loss '{name}' has no evaluator"
            )))
        }
    })
}

/// Brute-force risk: Σ_y ∫ π(θ) p(y|θ) L(θ̂_y − θ) dθ with θ̂_y = 2πy/2^m,
/// p(y|θ) from the register amplitudes directly, and the integral split at
/// the loss's break points and done by composite Gauss–Legendre with about
/// `grid` nodes per period.
pub fn risk_bruteforce_oracle(
    state: &RegisterState,
    loss: &LossSpec,
    noise: NoiseModel,
    grid: usize,
) -> Result<RiskReport> {
    loss.validate()?;
    let m = state.m();
    let dim = 1usize << m;
    if grid < dim << 4 {
        return arg(format!(
            "grid must be at least 2^(m+4) = {}, got {grid}",
            dim << 4
        ));
    }
    let n = state.resources();
    let att = noise.attenuation(n);
    let c = state.amplitudes();

    let mut breaks = vec![-PI, 0.0, PI];
    if let LossSpec::OneZero { epsilon } = loss {
        if *epsilon < PI {
            breaks.extend([-epsilon, *epsilon]);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    const ORDER: usize = 16;
    let rule = gauss_legendre(ORDER);
    let panels_per_radian = (grid / ORDER) as f64 / (2.0 * PI);

    let likelihood = |y: usize, theta: f64| -> f64 {
        let phase = theta - 2.0 * PI * y as f64 / dim as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, ck) in c.iter().enumerate() {
            let (s, co) = (k as f64 * phase).sin_cos();
            re += ck * co;
            im += ck * s;
        }
        att * (re * re + im * im) / dim as f64 + (1.0 - att) / dim as f64
    };

    let mut total = 0.0;
    let mut failure = None;
    for y in 0..dim {
        let estimate = 2.0 * PI * y as f64 / dim as f64;
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let panels = (((b - a) * panels_per_radian).ceil() as usize).max(1);
            total += composite_gl(a, b, panels, &rule, |delta| {
                let l = match periodize_loss(loss, delta) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                };
                likelihood(y, estimate + delta) * l
            }) / (2.0 * PI);
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RiskReport::new(
        total,
        RiskMethod::Bruteforce,
        m,
        noise,
        &loss.descriptor(),
        state.label(),
    ))
}

/// Least-squares line y = slope·x + intercept with its R².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

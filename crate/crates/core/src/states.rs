//! Register states |Ψ⟩ = Σ_j c_j |j⟩ with real amplitudes.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::loss::FourierLoss;
use crate::toeplitz::{build_risk_matrix, min_eigenpair};

pub const MAX_QUBITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateLabel {
    Uniform,
    Cosine { omega: f64 },
    Optimal,
    Custom,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Uniform => f.write_str("uniform"),
            StateLabel::Cosine { .. } => f.write_str("cosine"),
            StateLabel::Optimal => f.write_str("optimal"),
            StateLabel::Custom => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegisterState {
    m: u32,
    amplitudes: Vec<f64>,
    label: StateLabel,
}

pub(crate) fn check_qubits(m: u32) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&m) {
        return arg(format!(
            "register size m must be in 1..={MAX_QUBITS}, got {m}"
        ));
    }
    Ok(())
}

/// N = 2^m − 1, the number of U(θ) applications.
pub fn resources(m: u32) -> usize {
    (1usize << m) - 1
}

/// Upper end of the admissible cosine frequency window, 2π/(N+2).
pub fn omega_max(m: u32) -> f64 {
    2.0 * PI / (resources(m) as f64 + 2.0)
}

impl RegisterState {
    /// A custom state; amplitudes must already be unit-norm within 1e-12.
    pub fn custom(amplitudes: Vec<f64>) -> Result<Self> {
        let m = qubits_for_len(amplitudes.len())?;
        if amplitudes.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric("non-finite amplitude".into()));
        }
        let norm2: f64 = amplitudes.iter().map(|c| c * c).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return arg(format!("amplitudes must be unit norm, got |c|^2 = {norm2}"));
        }
        Ok(Self {
            m,
            amplitudes,
            label: StateLabel::Custom,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// N = 2^m − 1.
    pub fn resources(&self) -> usize {
        resources(self.m)
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn label(&self) -> StateLabel {
        self.label
    }

    pub fn omega(&self) -> Option<f64> {
        match self.label {
            StateLabel::Cosine { omega } => Some(omega),
            StateLabel::Uniform => Some(0.0),
            _ => None,
        }
    }

    /// a_k = Σ_{j=k..N} c_j c_{j−k} for k = 0..N.
    pub fn autocorrelation(&self) -> Vec<f64> {
        let c = &self.amplitudes;
        (0..c.len())
            .map(|k| c[k..].iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let c = &self.amplitudes;
        c.iter()
            .zip(c.iter().rev())
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

fn qubits_for_len(len: usize) -> Result<u32> {
    if len < 2 || !len.is_power_of_two() {
        return arg(format!("state length must be 2^m with m >= 1, got {len}"));
    }
    let m = len.trailing_zeros();
    check_qubits(m)?;
    Ok(m)
}

/// c_i = 2^{−m/2}
pub fn uniform_state(m: u32) -> Result<RegisterState> {
    check_qubits(m)?;
    let n = 1usize << m;
    Ok(RegisterState {
        m,
        amplitudes: vec![(n as f64).sqrt().recip(); n],
        label: StateLabel::Uniform,
    })
}

/// c_i = √(2 sin ω / (2^m sin ω + sin 2^m ω)) · cos((N/2 − i) ω),
/// for 0 ≤ ω ≤ 2π/(N+2). ω = 0 is the uniform state.
pub fn cosine_state(m: u32, omega: f64) -> Result<RegisterState> {
    check_qubits(m)?;
    if !(omega.is_finite() && (0.0..=omega_max(m)).contains(&omega)) {
        return arg(format!(
            "cosine frequency must lie in [0, {}] for m = {m}, got {omega}",
            omega_max(m)
        ));
    }
    if omega == 0.0 {
        let mut s = uniform_state(m)?;
        s.label = StateLabel::Cosine { omega: 0.0 };
        return Ok(s);
    }
    let n = 1usize << m;
    let half = (n - 1) as f64 / 2.0;
    let denom = n as f64 * omega.sin() + (n as f64 * omega).sin();
    if denom <= 0.0 {
        return arg(format!(
            "cosine normalization is not positive at omega = {omega}"
        ));
    }
    let scale = (2.0 * omega.sin() / denom).sqrt();
    let amplitudes = (0..n)
        .map(|i| scale * ((half - i as f64) * omega).cos())
        .collect();
    Ok(RegisterState {
        m,
        amplitudes,
        label: StateLabel::Cosine { omega },
    })
}

/// The risk-minimizing state: the smallest eigenvector of the risk matrix.
/// It does not depend on the noise strength.
pub fn optimal_state(m: u32, fl: &FourierLoss) -> Result<RegisterState> {
    check_qubits(m)?;
    let rm = build_risk_matrix(fl, m)?;
    let pair = min_eigenpair(&rm)?;
    Ok(RegisterState {
        m,
        amplitudes: pair.vector,
        label: StateLabel::Optimal,
    })
}

/// Largest norm deviation |‖c‖ − 1| the state loader renormalizes silently.
pub const LOAD_RENORM_TOLERANCE: f64 = 1e-6;

/// Reads a state file: header line `c_i`, then one real amplitude per line.
/// Only normalization is validated, not mirror symmetry.
pub fn read_state_csv<R: BufRead>(reader: R) -> Result<RegisterState> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::StateFile("empty file".into()))?;
    if header.trim() != "c_i" {
        return Err(Error::StateFile(format!(
            "expected header 'c_i', found '{}'",
            header.trim()
        )));
    }
    let mut amps = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text.parse().map_err(|_| {
            Error::StateFile(format!(
                "line {}: '{text}' is not a real number",
                lineno + 2
            ))
        })?;
        if !v.is_finite() {
            return Err(Error::StateFile(format!(
                "line {}: non-finite value",
                lineno + 2
            )));
        }
        amps.push(v);
    }
    qubits_for_len(amps.len()).map_err(|e| Error::StateFile(e.to_string()))?;
    let norm = amps.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > LOAD_RENORM_TOLERANCE {
        return Err(Error::StateFile(format!(
            "state norm {norm} deviates from 1 by more than {LOAD_RENORM_TOLERANCE}"
        )));
    }
    amps.iter_mut().for_each(|c| *c /= norm);
    RegisterState::custom(amps)
}

/// Writes the state in the `c_i` file format with 17 significant digits.
pub fn write_state_csv<W: Write>(state: &RegisterState, mut out: W) -> Result<()> {
    writeln!(out, "c_i")?;
    for c in state.amplitudes() {
        writeln!(out, "{}", fmt_f64(*c))?;
    }
    Ok(())
}

/// Formats a float with 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{fourier_coefficients, LossSpec};
    use approx::assert_abs_diff_eq;

    fn norm2(s: &RegisterState) -> f64 {
        s.amplitudes().iter().map(|c| c * c).sum()
    }

    #[test]
    fn uniform_examples() {
        let s = uniform_state(1).unwrap();
        for c in s.amplitudes() {
            assert_abs_diff_eq!(*c, 0.5f64.sqrt(), epsilon = 1e-15);
        }
        assert_eq!(uniform_state(2).unwrap().amplitudes(), &[0.5; 4]);
        assert!(uniform_state(0).is_err());
        assert!(uniform_state(17).is_err());
    }

    #[test]
    fn cosine_zero_is_uniform_and_small_omega_approaches_it() {
        for m in 1..=6 {
            let u = uniform_state(m).unwrap();
            let c0 = cosine_state(m, 0.0).unwrap();
            assert_eq!(u.amplitudes(), c0.amplitudes());
            let c = cosine_state(m, 1e-7).unwrap();
            for (a, b) in u.amplitudes().iter().zip(c.amplitudes()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cosine_at_holevo_frequency_matches_closed_form() {
        for m in 1..=8 {
            let n = resources(m) as f64;
            let s = cosine_state(m, PI / (n + 2.0)).unwrap();
            for (i, c) in s.amplitudes().iter().enumerate() {
                let expect =
                    (2.0 / (n + 2.0)).sqrt() * ((n / 2.0 - i as f64) * PI / (n + 2.0)).cos();
                assert_abs_diff_eq!(*c, expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn cosine_m2_invariants() {
        let s = cosine_state(2, PI / 5.0).unwrap();
        assert_abs_diff_eq!(norm2(&s), 1.0, epsilon = 1e-14);
        let c = s.amplitudes();
        assert_abs_diff_eq!(c[0], c[3], epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], c[2], epsilon = 1e-15);
    }

    #[test]
    fn cosine_window_enforced() {
        assert!(cosine_state(3, -0.01).is_err());
        assert!(cosine_state(3, omega_max(3) * 1.0001).is_err());
        assert!(cosine_state(3, omega_max(3)).is_ok());
        assert!(cosine_state(3, f64::NAN).is_err());
    }

    #[test]
    fn constructors_keep_invariants() {
        for m in 1..=12 {
            for j in 0..64 {
                let omega = omega_max(m) * j as f64 / 63.0;
                let s = cosine_state(m, omega).unwrap();
                assert!((norm2(&s) - 1.0).abs() < 1e-12, "m={m} omega={omega}");
                assert!(s.is_mirror_symmetric(1e-10));
            }
            let u = uniform_state(m).unwrap();
            assert!((norm2(&u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_holevo_is_cosine() {
        let fl = fourier_coefficients(&LossSpec::Holevo, 255).unwrap();
        for m in 1..=8 {
            let n = resources(m) as f64;
            let opt = optimal_state(m, &fl).unwrap();
            let cos = cosine_state(m, PI / (n + 2.0)).unwrap();
            for (a, b) in opt.amplitudes().iter().zip(cos.amplitudes()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn optimal_single_qubit_is_uniform() {
        for loss in [
            LossSpec::Absolute,
            LossSpec::Squared,
            LossSpec::one_zero(0.3).unwrap(),
        ] {
            let fl = fourier_coefficients(&loss, 1).unwrap();
            assert!(fl.coeffs()[0] <= 0.0);
            let opt = optimal_state(1, &fl).unwrap();
            for c in opt.amplitudes() {
                assert_abs_diff_eq!(*c, 0.5f64.sqrt(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn optimal_amplitudes_increase_to_the_centre() {
        for m in 2..=8 {
            let eps = PI / (1u32 << m) as f64;
            for loss in [
                LossSpec::Absolute,
                LossSpec::Squared,
                LossSpec::Holevo,
                LossSpec::one_zero(eps).unwrap(),
            ] {
                let fl = fourier_coefficients(&loss, resources(m)).unwrap();
                let s = optimal_state(m, &fl).unwrap();
                let c = s.amplitudes();
                let half = (c.len() - 1) / 2;
                for i in 0..half {
                    assert!(c[i] < c[i + 1], "{loss:?} m={m} i={i}");
                }
                assert!(s.is_mirror_symmetric(1e-10));
            }
        }
    }

    #[test]
    fn optimal_invariant_under_band_scaling() {
        let fl = fourier_coefficients(&LossSpec::Absolute, 31).unwrap();
        let a = optimal_state(5, &fl).unwrap();
        let b = optimal_state(5, &fl.scale_band(3.7)).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn state_file_roundtrip_and_renormalization() {
        let s = cosine_state(3, 0.2).unwrap();
        let mut buf = Vec::new();
        write_state_csv(&s, &mut buf).unwrap();
        let back = read_state_csv(buf.as_slice()).unwrap();
        assert_eq!(back.amplitudes(), s.amplitudes());
        assert_eq!(back.label(), StateLabel::Custom);

        let slightly_off = "c_i\n0.5000001\n0.5\n0.5\n0.5\n";
        let st = read_state_csv(slightly_off.as_bytes()).unwrap();
        assert_abs_diff_eq!(norm2(&st), 1.0, epsilon = 1e-14);

        let bad_norm = "c_i\n0.6\n0.5\n0.5\n0.5\n";
        assert!(matches!(
            read_state_csv(bad_norm.as_bytes()),
            Err(Error::StateFile(_))
        ));
        let bad_header = "amp\n1\n0\n";
        assert!(read_state_csv(bad_header.as_bytes()).is_err());
        let bad_len = "c_i\n0.6\n0.8\n0\n";
        assert!(read_state_csv(bad_len.as_bytes()).is_err());
        let complex = "c_i\n0.5+0.1i\n0.5\n0.5\n0.5\n";
        assert!(read_state_csv(complex.as_bytes()).is_err());
    }

    #[test]
    fn asymmetric_custom_states_load() {
        let text = "c_i\n0.8\n0.6\n";
        let s = read_state_csv(text.as_bytes()).unwrap();
        assert!(!s.is_mirror_symmetric(1e-3));
    }
}

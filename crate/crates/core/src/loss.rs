//! Loss functions of the phase error δ = θ − θ̂, their 2π-periodization and
//! their Fourier coefficients.
//!
//! Every supported loss is real and even, so its Fourier coefficients are
//! real and satisfy `L_{-k} = L_k`. [`FourierLoss`] therefore stores only
//! `k >= 0`; [`FourierLoss::coefficient`] accepts negative indices and
//! mirrors them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{arg, Error, Result};
use crate::quadrature::{composite_gl, gauss_legendre};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A loss function L(δ), even in δ and non-decreasing in |δ| on [0, π].
#[derive(Clone)]
pub enum LossSpec {
    /// |δ|
    Absolute,
    /// δ²
    Squared,
    /// 4 sin²(δ/2), the Holevo variance
    Holevo,
    /// 1 when |δ| > ε, otherwise 0; requires 0 < ε ≤ π.
    OneZero { epsilon: f64 },
    /// A user-supplied non-periodic loss. Coefficients come from quadrature.
    Custom {
        name: String,
        eval: Option<Evaluator>,
    },
}

impl fmt::Debug for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl LossSpec {
    pub fn one_zero(epsilon: f64) -> Result<Self> {
        let loss = LossSpec::OneZero { epsilon };
        loss.validate()?;
        Ok(loss)
    }

    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        LossSpec::Custom {
            name: name.into(),
            eval: Some(Arc::new(eval)),
        }
    }

    /// The constant loss L(δ) = c.
    pub fn constant(c: f64) -> Self {
        Self::custom(format!("constant({c})"), move |_| c)
    }

    /// Parses `absolute`, `squared`, `holevo` or `one_zero`; the 1-0 loss
    /// takes its tolerance from `epsilon`.
    pub fn from_name(name: &str, epsilon: Option<f64>) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "absolute" | "abs" => Ok(LossSpec::Absolute),
            "squared" | "sq" => Ok(LossSpec::Squared),
            "holevo" => Ok(LossSpec::Holevo),
            "one_zero" | "1_0" | "onezero" => match epsilon {
                Some(eps) => LossSpec::one_zero(eps),
                None => Err(Error::Config("the 1-0 loss needs an epsilon".into())),
            },
            other => Err(Error::Config(format!("unknown loss '{other}'"))),
        }
    }

    pub fn is_named(&self) -> bool {
        !matches!(self, LossSpec::Custom { .. })
    }

    /// Short machine-readable name, e.g. `one_zero(eps=0.39269908169872414)`.
    pub fn descriptor(&self) -> String {
        match self {
            LossSpec::Absolute => "absolute".into(),
            LossSpec::Squared => "squared".into(),
            LossSpec::Holevo => "holevo".into(),
            LossSpec::OneZero { epsilon } => format!("one_zero(eps={epsilon:.17})"),
            LossSpec::Custom { name, .. } => format!("custom({name})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossSpec::OneZero { epsilon } => {
                if !(epsilon.is_finite() && *epsilon > 0.0 && *epsilon <= PI) {
                    return Err(Error::Config(format!(
                        "1-0 loss tolerance must satisfy 0 < eps <= pi, got {epsilon}"
                    )));
                }
                Ok(())
            }
            LossSpec::Custom { name, eval: None } => Err(Error::Config(format!(
                "custom loss '{name}' has no evaluator"
            ))),
            _ => Ok(()),
        }
    }

    /// The non-periodic loss L_NP(δ).
    fn eval_raw(&self, delta: f64) -> Result<f64> {
        Ok(match self {
            LossSpec::Absolute => delta.abs(),
            LossSpec::Squared => delta * delta,
            LossSpec::Holevo => {
                let s = (0.5 * delta).sin();
                4.0 * s * s
            }
            LossSpec::OneZero { epsilon } => {
                if delta.abs() > *epsilon {
                    1.0
                } else {
                    0.0
                }
            }
            LossSpec::Custom { eval: Some(f), .. } => f(delta),
            LossSpec::Custom { name, eval: None } => {
                return Err(Error::Config(format!(
                    "custom loss '{name}' has no evaluator"
                )))
            }
        })
    }
}

/// Maps δ into [−π, π]; the tie at ±π goes to +π.
pub fn wrap_phase(delta: f64) -> f64 {
    let w = (delta + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        PI
    } else {
        w
    }
}

/// The 2π-periodic loss min_l L_NP(δ + 2πl).
pub fn periodize_loss(loss: &LossSpec, delta: f64) -> Result<f64> {
    loss.validate()?;
    let w = wrap_phase(delta);
    if loss.is_named() {
        return loss.eval_raw(w);
    }
    // A custom evaluator need not be monotone; check the neighbouring images.
    let mut best = loss.eval_raw(w)?;
    for shift in [-2.0 * PI, 2.0 * PI] {
        best = best.min(loss.eval_raw(w + shift)?);
    }
    Ok(best)
}

/// Knob for the quadrature used on custom losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    /// Total node budget on the half period [0, π].
    pub nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { nodes: 1 << 13 }
    }
}

const PANEL_ORDER: usize = 16;

/// Truncated Fourier series L_0, L_1..L_K of an even periodic loss.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLoss {
    l0: f64,
    coeffs: Vec<f64>,
    label: String,
}

impl FourierLoss {
    pub fn new(label: impl Into<String>, l0: f64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return arg("a Fourier loss needs kmax >= 1");
        }
        if !l0.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric("non-finite Fourier coefficient".into()));
        }
        Ok(Self {
            l0,
            coeffs,
            label: label.into(),
        })
    }

    /// The constant loss c: L_0 = c, every other coefficient exactly zero.
    pub fn constant(c: f64, kmax: usize) -> Result<Self> {
        Self::new(format!("constant({c})"), c, vec![0.0; kmax.max(1)])
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    /// L_1..L_K.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn kmax(&self) -> usize {
        self.coeffs.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// L_k for any integer k; zero beyond the truncation order.
    pub fn coefficient(&self, k: i64) -> f64 {
        let k = k.unsigned_abs() as usize;
        match k {
            0 => self.l0,
            k if k <= self.coeffs.len() => self.coeffs[k - 1],
            _ => 0.0,
        }
    }

    pub(crate) fn require_kmax(&self, needed: usize) -> Result<()> {
        if self.kmax() < needed {
            return arg(format!(
                "loss '{}' has kmax = {} but {} coefficients are needed",
                self.label,
                self.kmax(),
                needed
            ));
        }
        Ok(())
    }

    /// Every off-diagonal coefficient multiplied by `factor`.
    pub fn scale_band(&self, factor: f64) -> Self {
        Self {
            l0: self.l0,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            label: format!("{}*{}", self.label, factor),
        }
    }
}

/// Fourier coefficients of `loss` up to order `kmax`, using the default
/// quadrature for custom losses.
pub fn fourier_coefficients(loss: &LossSpec, kmax: usize) -> Result<FourierLoss> {
    fourier_coefficients_with(loss, kmax, QuadratureConfig::default())
}

pub fn fourier_coefficients_with(
    loss: &LossSpec,
    kmax: usize,
    quad: QuadratureConfig,
) -> Result<FourierLoss> {
    if kmax < 1 {
        return arg("kmax must be at least 1");
    }
    loss.validate()?;
    let label = loss.descriptor();
    let ks = 1..=kmax;
    let (l0, coeffs): (f64, Vec<f64>) = match loss {
        LossSpec::Absolute => (
            PI / 2.0,
            ks.map(|k| {
                if k % 2 == 1 {
                    -2.0 / (PI * (k * k) as f64)
                } else {
                    0.0
                }
            })
            .collect(),
        ),
        LossSpec::Squared => (
            PI * PI / 3.0,
            ks.map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * sign / (k * k) as f64
            })
            .collect(),
        ),
        LossSpec::Holevo => (2.0, ks.map(|k| if k == 1 { -1.0 } else { 0.0 }).collect()),
        LossSpec::OneZero { epsilon } => {
            let eps = *epsilon;
            (
                1.0 - eps / PI,
                ks.map(|k| {
                    let kf = k as f64;
                    -(kf * eps).sin() / (PI * kf)
                })
                .collect(),
            )
        }
        LossSpec::Custom { .. } => custom_coefficients(loss, kmax, quad)?,
    };
    FourierLoss::new(label, l0, coeffs)
}

/// L_k = (1/π) ∫_0^π L(δ) cos(kδ) dδ by composite Gauss–Legendre on the
/// half period. Kinks of an even periodic loss sit at 0 and π, which are
/// panel edges, so smooth-by-pieces losses converge spectrally. A jump
/// strictly inside a panel degrades this to first order.
fn custom_coefficients(
    loss: &LossSpec,
    kmax: usize,
    quad: QuadratureConfig,
) -> Result<(f64, Vec<f64>)> {
    if quad.nodes < PANEL_ORDER {
        return arg(format!(
            "quadrature needs at least {PANEL_ORDER} nodes, got {}",
            quad.nodes
        ));
    }
    // Keep at most half a period of cos(kmax δ) inside each panel.
    let panels = (quad.nodes / PANEL_ORDER).max(kmax);
    let rule = gauss_legendre(PANEL_ORDER);

    let mut values = Vec::with_capacity(panels * PANEL_ORDER);
    let mut failure = None;
    let l0 = composite_gl(0.0, PI, panels, &rule, |d| {
        let v = match periodize_loss(loss, d) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        values.push((d, v));
        v
    }) / PI;
    if let Some(e) = failure {
        return Err(e);
    }
    if values.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::Numeric(
            "custom loss evaluated to a non-finite value".into(),
        ));
    }

    let h = PI / panels as f64;
    let mut coeffs = vec![0.0; kmax];
    for (idx, (d, v)) in values.iter().enumerate() {
        let weight = 0.5 * h * rule.1[idx % PANEL_ORDER] * v / PI;
        // cos(kδ) by the Chebyshev recurrence
        let c1 = d.cos();
        let (mut prev, mut cur) = (1.0, c1);
        for c in coeffs.iter_mut() {
            *c += weight * cur;
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    Ok((l0, coeffs))
}

/// Partial Fourier sum L_0 + 2 Σ_{k=1..K} L_k cos(kδ).
pub fn reconstruct_loss(fl: &FourierLoss, delta: f64) -> f64 {
    let c1 = delta.cos();
    let (mut prev, mut cur) = (1.0, c1);
    let mut acc = 0.0;
    for &lk in &fl.coeffs {
        acc += lk * cur;
        let next = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = next;
    }
    fl.l0 + 2.0 * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn named() -> Vec<LossSpec> {
        vec![
            LossSpec::Absolute,
            LossSpec::Squared,
            LossSpec::Holevo,
            LossSpec::one_zero(PI / 8.0).unwrap(),
        ]
    }

    #[test]
    fn periodize_examples() {
        assert_abs_diff_eq!(
            periodize_loss(&LossSpec::Absolute, 1.5 * PI).unwrap(),
            PI / 2.0,
            epsilon = 1e-15
        );
        for loss in named() {
            assert_eq!(periodize_loss(&loss, 0.0).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(periodize_loss(&LossSpec::Holevo, PI).unwrap(), 4.0);
    }

    #[test]
    fn wrap_resolves_tie_to_plus_pi() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(-0.5), -0.5);
    }

    #[test]
    fn custom_without_evaluator_is_config_error() {
        let loss = LossSpec::Custom {
            name: "x".into(),
            eval: None,
        };
        assert!(matches!(periodize_loss(&loss, 0.3), Err(Error::Config(_))));
        assert!(matches!(
            fourier_coefficients(&loss, 4),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn one_zero_epsilon_range() {
        assert!(LossSpec::one_zero(0.0).is_err());
        assert!(LossSpec::one_zero(PI + 1e-9).is_err());
        assert!(LossSpec::one_zero(PI).is_ok());
    }

    #[test]
    fn table_coefficients() {
        let h = fourier_coefficients(&LossSpec::Holevo, 4).unwrap();
        assert_eq!(h.l0(), 2.0);
        assert_eq!(h.coeffs(), &[-1.0, 0.0, 0.0, 0.0]);

        let s = fourier_coefficients(&LossSpec::Squared, 2).unwrap();
        assert_abs_diff_eq!(s.l0(), PI * PI / 3.0);
        assert_eq!(s.coeffs(), &[-2.0, 0.5]);

        let z = fourier_coefficients(&LossSpec::one_zero(PI).unwrap(), 8).unwrap();
        assert_abs_diff_eq!(z.l0(), 0.0);
        for c in z.coeffs() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-15);
        }

        let a = fourier_coefficients(&LossSpec::Absolute, 2).unwrap();
        assert_abs_diff_eq!(a.l0(), PI / 2.0);
        assert_abs_diff_eq!(a.coeffs()[0], -2.0 / PI);
        assert_eq!(a.coeffs()[1], 0.0);
    }

    #[test]
    fn kmax_zero_rejected() {
        assert!(matches!(
            fourier_coefficients(&LossSpec::Holevo, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn negative_index_mirrors() {
        let s = fourier_coefficients(&LossSpec::Squared, 5).unwrap();
        for k in 1..=5 {
            assert_eq!(s.coefficient(k), s.coefficient(-k));
        }
        assert_eq!(s.coefficient(6), 0.0);
    }

    #[test]
    fn reconstruction_examples() {
        let h = fourier_coefficients(&LossSpec::Holevo, 3).unwrap();
        for i in 0..50 {
            let d = -4.0 + 0.17 * i as f64;
            let s = (0.5 * d).sin();
            assert_abs_diff_eq!(reconstruct_loss(&h, d), 4.0 * s * s, epsilon = 1e-14);
        }
        let c = FourierLoss::constant(1.25, 7).unwrap();
        assert_eq!(reconstruct_loss(&c, 0.9), 1.25);

        let s = fourier_coefficients(&LossSpec::Squared, 200).unwrap();
        assert_abs_diff_eq!(
            reconstruct_loss(&s, PI / 2.0),
            PI * PI / 4.0,
            epsilon = 1e-3
        );
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let cases: Vec<(LossSpec, LossSpec)> = vec![
            (
                LossSpec::Absolute,
                LossSpec::custom("abs", |d: f64| d.abs()),
            ),
            (LossSpec::Squared, LossSpec::custom("sq", |d: f64| d * d)),
            (
                LossSpec::Holevo,
                LossSpec::custom("hol", |d: f64| 4.0 * (0.5 * d).sin().powi(2)),
            ),
            (
                LossSpec::one_zero(PI / 8.0).unwrap(),
                LossSpec::custom("oz", |d: f64| if d.abs() > PI / 8.0 { 1.0 } else { 0.0 }),
            ),
        ];
        for (closed, custom) in cases {
            let a = fourier_coefficients(&closed, 64).unwrap();
            let b = fourier_coefficients(&custom, 64).unwrap();
            assert_abs_diff_eq!(a.l0(), b.l0(), epsilon = 1e-10);
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn constant_custom_loss_has_only_l0() {
        let c = fourier_coefficients(&LossSpec::constant(0.7), 16).unwrap();
        assert_abs_diff_eq!(c.l0(), 0.7, epsilon = 1e-14);
        for x in c.coeffs() {
            assert_abs_diff_eq!(*x, 0.0, epsilon = 1e-14);
        }
    }
}

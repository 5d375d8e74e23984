//! Bayesian estimation from M repeated measurements of one circuit.
//!
//! Likelihoods p(y|θ) are trigonometric polynomials of degree N, so the
//! posterior after M outcomes is one of degree M·N. Everything here works on
//! Fourier coefficients; products of likelihoods are exact convolutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{arg, Error, Result};
use crate::loss::{reconstruct_loss, FourierLoss};
use crate::optimize::golden_section;
use crate::risk::{NoiseModel, RiskMethod, RiskReport};
use crate::states::RegisterState;

/// Evidence below this is treated as an impossible outcome record.
pub const EVIDENCE_FLOOR: f64 = 1e-300;

/// Largest m·M for exact enumeration (2^16 outcome records).
pub const ENUMERATION_LIMIT: u32 = 16;

/// A real function Σ_{k=−B..B} a_k e^{ikθ} stored as a_0..a_B, with
/// a_{−k} = conj(a_k).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSpectrum {
    coeffs: Vec<Complex64>,
}

impl TrigSpectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return arg("a spectrum needs at least a_0");
        }
        Ok(Self { coeffs })
    }

    /// The uniform prior density 1/2π.
    pub fn flat_prior() -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0 / (2.0 * PI), 0.0)],
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// a_k for k = 0..=bandwidth.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// a_k for any integer k.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(&a) if k >= 0 => a,
            Some(&a) => a.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.coeffs[0].re;
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let (s, c) = (k as f64 * theta).sin_cos();
            acc += 2.0 * (a.re * c - a.im * s);
        }
        acc
    }

    /// ∫_0^{2π} f(θ) dθ = 2π a_0.
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.coeffs[0].re
    }

    /// Spectrum of the pointwise product.
    pub fn multiply(&self, other: &TrigSpectrum) -> TrigSpectrum {
        let (b1, b2) = (self.bandwidth() as i64, other.bandwidth() as i64);
        let b = b1 + b2;
        let coeffs = (0..=b)
            .map(|k| {
                let lo = (k - b2).max(-b1);
                let hi = (k + b2).min(b1);
                (lo..=hi)
                    .map(|j| self.coefficient(j) * other.coefficient(k - j))
                    .sum()
            })
            .collect();
        TrigSpectrum { coeffs }
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.coeffs.iter_mut().for_each(|a| *a *= factor);
        self
    }
}

fn check_outcome(state: &RegisterState, y: usize) -> Result<()> {
    let dim = 1usize << state.m();
    if y >= dim {
        return arg(format!("outcome {y} out of range 0..{dim}"));
    }
    Ok(())
}

/// p(y|θ) = 1/2^m + (1−λ)^N/2^m Σ_{k≠0} a_{|k|} e^{ik(θ − 2πy/2^m)}.
pub fn likelihood_spectrum(
    state: &RegisterState,
    noise: NoiseModel,
    y: usize,
) -> Result<TrigSpectrum> {
    check_outcome(state, y)?;
    let dim = (1usize << state.m()) as f64;
    let att = noise.attenuation(state.resources());
    let ac = state.autocorrelation();
    let phase = 2.0 * PI * y as f64 / dim;
    let coeffs = ac
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            if k == 0 {
                Complex64::new(1.0 / dim, 0.0)
            } else {
                Complex64::from_polar(att * a / dim, -(k as f64) * phase)
            }
        })
        .collect();
    Ok(TrigSpectrum { coeffs })
}

/// p(y|θ) for every outcome y, from the register amplitudes.
pub fn outcome_distribution(state: &RegisterState, noise: NoiseModel, theta: f64) -> Vec<f64> {
    let dim = 1usize << state.m();
    let att = noise.attenuation(state.resources());
    let c = state.amplitudes();
    (0..dim)
        .map(|y| {
            let phase = theta - 2.0 * PI * y as f64 / dim as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                let (s, co) = (k as f64 * phase).sin_cos();
                re += ck * co;
                im += ck * s;
            }
            (att * (re * re + im * im) + (1.0 - att)) / dim as f64
        })
        .collect()
}

/// Outcomes y_1..y_M of M runs of the same circuit.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcomes: Vec<usize>,
    pub state: RegisterState,
    pub noise: NoiseModel,
}

impl MeasurementRecord {
    pub fn new(outcomes: Vec<usize>, state: RegisterState, noise: NoiseModel) -> Result<Self> {
        for &y in &outcomes {
            check_outcome(&state, y)?;
        }
        Ok(Self {
            outcomes,
            state,
            noise,
        })
    }
}

/// Posterior density under the uniform prior, normalized to 2π a_0 = 1.
pub fn posterior_spectrum(rec: &MeasurementRecord) -> Result<TrigSpectrum> {
    let likelihoods = (0..1usize << rec.state.m())
        .map(|y| likelihood_spectrum(&rec.state, rec.noise, y))
        .collect::<Result<Vec<_>>>()?;
    let product = rec.outcomes.iter().fold(None::<TrigSpectrum>, |acc, &y| {
        Some(match acc {
            None => likelihoods[y].clone(),
            Some(p) => p.multiply(&likelihoods[y]),
        })
    });
    match product {
        None => Ok(TrigSpectrum::flat_prior()),
        Some(p) => normalize_product(p, &rec.outcomes).map(|(post, _)| post),
    }
}

// Product of likelihoods → (posterior, evidence p(y) = a_0 of the product).
fn normalize_product(product: TrigSpectrum, outcomes: &[usize]) -> Result<(TrigSpectrum, f64)> {
    let evidence = product.coeffs[0].re;
    if evidence.partial_cmp(&EVIDENCE_FLOOR) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateEvidence {
            evidence,
            outcomes: outcomes.to_vec(),
        });
    }
    Ok((product.scaled(1.0 / (2.0 * PI * evidence)), evidence))
}

/// ∫ p(θ) L(θ̂ − θ) dθ = Σ_k L_k 2π a_k e^{ikθ̂}.
pub fn expected_posterior_loss(
    post: &TrigSpectrum,
    fl: &FourierLoss,
    thetahat: f64,
) -> Result<f64> {
    fl.require_kmax(post.bandwidth())?;
    Ok(posterior_loss_unchecked(post, fl, thetahat))
}

fn posterior_loss_unchecked(post: &TrigSpectrum, fl: &FourierLoss, thetahat: f64) -> f64 {
    let mut acc = 0.0;
    for (k, a) in post.coeffs.iter().enumerate().skip(1) {
        let lk = fl.coeffs()[k - 1];
        if lk == 0.0 {
            continue;
        }
        let (s, c) = (k as f64 * thetahat).sin_cos();
        acc += lk * (a.re * c - a.im * s);
    }
    fl.l0() * post.integral() + 4.0 * PI * acc
}

/// Bayes estimate argmin_θ̂ of the expected posterior loss on [0, 2π):
/// a scan over 4·bandwidth points refined by golden-section search to 1e-10.
/// Exact ties resolve to the smallest θ̂; a flat posterior gives 0.
pub fn bayes_estimate(post: &TrigSpectrum, fl: &FourierLoss) -> Result<f64> {
    fl.require_kmax(post.bandwidth())?;
    Ok(estimate_unchecked(post, fl))
}

fn estimate_unchecked(post: &TrigSpectrum, fl: &FourierLoss) -> f64 {
    let b = post.bandwidth();
    let informative = post.coeffs[1..]
        .iter()
        .zip(fl.coeffs())
        .any(|(a, l)| *l != 0.0 && a.norm() > 0.0);
    if b == 0 || !informative {
        return 0.0;
    }
    let points = 4 * b;
    let step = 2.0 * PI / points as f64;
    let f = |t: f64| posterior_loss_unchecked(post, fl, t);
    let mut best_i = 0;
    let mut best = f(0.0);
    for i in 1..points {
        let v = f(step * i as f64);
        if v < best - 1e-14 * best.abs().max(1.0) {
            best = v;
            best_i = i;
        }
    }
    let centre = step * best_i as f64;
    let (x, fx) = golden_section(f, centre - step, centre + step, 1e-10);
    let theta = if fx < best { x } else { centre };
    let wrapped = theta.rem_euclid(2.0 * PI);
    if wrapped >= 2.0 * PI - 1e-12 {
        0.0
    } else {
        wrapped
    }
}

/// Outcome enumeration strategy for [`exact_multi_risk_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Enumeration {
    /// Every ordered tuple (y_1..y_M), lexicographic.
    Full,
    /// Sorted tuples weighted by their multinomial count; the likelihood
    /// product does not depend on the order of identical-circuit outcomes.
    #[default]
    Multiset,
}

fn check_multi(state: &RegisterState, measurements: usize, fl: &FourierLoss) -> Result<()> {
    let needed = measurements * state.resources();
    if measurements > 0 {
        fl.require_kmax(needed)?;
    }
    Ok(())
}

/// Risk of M measurements with the Bayes estimator, summed over every
/// outcome record.
pub fn exact_multi_risk(
    state: &RegisterState,
    measurements: usize,
    fl: &FourierLoss,
    noise: NoiseModel,
) -> Result<RiskReport> {
    exact_multi_risk_with(state, measurements, fl, noise, Enumeration::Multiset)
}

pub fn exact_multi_risk_with(
    state: &RegisterState,
    measurements: usize,
    fl: &FourierLoss,
    noise: NoiseModel,
    mode: Enumeration,
) -> Result<RiskReport> {
    let m = state.m();
    if (m as usize).saturating_mul(measurements) > ENUMERATION_LIMIT as usize {
        return Err(Error::EnumerationBound { m, measurements });
    }
    check_multi(state, measurements, fl)?;
    let mut report = RiskReport::new(
        0.0,
        RiskMethod::ExactMulti,
        m,
        noise,
        fl.label(),
        state.label(),
    );
    report.measurements = measurements;
    if measurements == 0 {
        report.risk = posterior_loss_unchecked(&TrigSpectrum::flat_prior(), fl, 0.0);
        return Ok(report);
    }

    let dim = 1usize << m;
    let likelihoods = (0..dim)
        .map(|y| likelihood_spectrum(state, noise, y))
        .collect::<Result<Vec<_>>>()?;
    let factorials: Vec<f64> = (0..=measurements)
        .scan(1.0, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();

    let ctx = Enumerator {
        likelihoods: &likelihoods,
        fl,
        measurements,
        mode,
        factorials: &factorials,
    };
    let partials: Vec<Result<f64>> = (0..dim)
        .into_par_iter()
        .map(|y| {
            let mut path = vec![y];
            ctx.descend(&likelihoods[y], &mut path)
        })
        .collect();
    let mut risk = 0.0;
    for p in partials {
        risk += p?;
    }
    report.risk = risk;
    Ok(report)
}

struct Enumerator<'a> {
    likelihoods: &'a [TrigSpectrum],
    fl: &'a FourierLoss,
    measurements: usize,
    mode: Enumeration,
    factorials: &'a [f64],
}

impl Enumerator<'_> {
    fn descend(&self, product: &TrigSpectrum, path: &mut Vec<usize>) -> Result<f64> {
        if path.len() == self.measurements {
            return self.leaf(product, path);
        }
        let start = match self.mode {
            Enumeration::Full => 0,
            Enumeration::Multiset => *path.last().unwrap_or(&0),
        };
        let mut total = 0.0;
        for y in start..self.likelihoods.len() {
            let next = product.multiply(&self.likelihoods[y]);
            path.push(y);
            total += self.descend(&next, path)?;
            path.pop();
        }
        Ok(total)
    }

    fn leaf(&self, product: &TrigSpectrum, path: &[usize]) -> Result<f64> {
        let (post, evidence) = normalize_product(product.clone(), path)?;
        let estimate = estimate_unchecked(&post, self.fl);
        let loss = posterior_loss_unchecked(&post, self.fl, estimate);
        let weight = match self.mode {
            Enumeration::Full => 1.0,
            Enumeration::Multiset => {
                let mut w = self.factorials[self.measurements];
                let mut run = 1;
                for i in 1..=path.len() {
                    if i < path.len() && path[i] == path[i - 1] {
                        run += 1;
                    } else {
                        w /= self.factorials[run];
                        run = 1;
                    }
                }
                w
            }
        };
        Ok(weight * evidence * loss)
    }
}

/// Independent sample streams used by [`mc_multi_risk`].
pub const MC_SHARDS: u64 = 16;

/// Monte Carlo risk of M measurements: θ from the uniform prior, outcomes
/// from p(y|θ), loss of the Bayes estimate against the true θ. Sample
/// streams are ChaCha20 keyed by `seed`, one stream per shard, so results
/// are reproducible regardless of thread count.
pub fn mc_multi_risk(
    state: &RegisterState,
    measurements: usize,
    fl: &FourierLoss,
    noise: NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<RiskReport> {
    if samples < 100 {
        return arg(format!(
            "Monte Carlo needs at least 100 samples, got {samples}"
        ));
    }
    check_multi(state, measurements, fl)?;
    let dim = 1usize << state.m();
    let likelihoods = (0..dim)
        .map(|y| likelihood_spectrum(state, noise, y))
        .collect::<Result<Vec<_>>>()?;

    let per_shard = samples as u64 / MC_SHARDS;
    let extra = samples as u64 % MC_SHARDS;
    let shards: Vec<Result<(f64, f64)>> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = per_shard + u64::from(shard < extra);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut outcomes = Vec::with_capacity(measurements);
            for _ in 0..count {
                let theta = 2.0 * PI * rng.random::<f64>();
                let probs = outcome_distribution(state, noise, theta);
                outcomes.clear();
                for _ in 0..measurements {
                    outcomes.push(sample_index(&probs, rng.random::<f64>()));
                }
                let estimate = match outcomes.split_first() {
                    None => 0.0,
                    Some((&first, rest)) => {
                        let product = rest.iter().fold(likelihoods[first].clone(), |p, &y| {
                            p.multiply(&likelihoods[y])
                        });
                        let (post, _) = normalize_product(product, &outcomes)?;
                        estimate_unchecked(&post, fl)
                    }
                };
                let loss = reconstruct_loss(fl, estimate - theta);
                sum += loss;
                sum_sq += loss * loss;
            }
            Ok((sum, sum_sq))
        })
        .collect();

    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for s in shards {
        let (a, b) = s?;
        sum += a;
        sum_sq += b;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let mut report = RiskReport::new(
        mean,
        RiskMethod::MonteCarlo,
        state.m(),
        noise,
        fl.label(),
        state.label(),
    );
    report.measurements = measurements;
    report.stderr = Some((var / n).sqrt());
    Ok(report)
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    probs.len() - 1
}

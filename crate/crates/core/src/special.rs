//! Digamma, trigamma and the alternating-harmonic integral Φ(a).

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SHIFT: f64 = 12.0;

// B_{2k} / (2k) for k = 1..6
const DIGAMMA_ASYMPTOTIC: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
];

// B_{2k} for k = 1..6
const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// ψ(x) for x > 0.
pub fn digamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "digamma is only implemented for x > 0");
    let mut acc = 0.0;
    while x < SHIFT {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

/// ψ'(x) for x > 0.
pub fn trigamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "trigamma is only implemented for x > 0");
    let mut acc = 0.0;
    while x < SHIFT {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}
    let mut series = 0.0;
    let mut pow = inv * inv2;
    for b in BERNOULLI_EVEN {
        series += b * pow;
        pow *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

/// Φ(a) = ∫_0^∞ e^{−at}/(1+e^{−t}) dt = Σ_{k≥0} (−1)^k/(a+k), a > 0,
/// summed with the Euler transform
/// Σ_n n! / (2^{n+1} a(a+1)…(a+n)).
pub fn alternating_harmonic(a: f64) -> f64 {
    assert!(a > 0.0);
    let mut term = 1.0 / (2.0 * a);
    let mut sum = term;
    let mut n = 0.0;
    while term > 1e-17 * sum {
        n += 1.0;
        term *= n / (2.0 * (a + n));
        sum += term;
        if n > 10_000.0 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn digamma_reference_values() {
        assert_abs_diff_eq!(digamma(1.0), -EULER_GAMMA, epsilon = 1e-14);
        assert_abs_diff_eq!(
            digamma(0.5),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            epsilon = 1e-14
        );
        // ψ(n+1) = H_n − γ
        let h10: f64 = (1..=10).map(|k| 1.0 / k as f64).sum();
        assert_abs_diff_eq!(digamma(11.0), h10 - EULER_GAMMA, epsilon = 1e-14);
    }

    #[test]
    fn trigamma_reference_values() {
        assert_abs_diff_eq!(trigamma(1.0), PI * PI / 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trigamma(0.5), PI * PI / 2.0, epsilon = 1e-13);
        // ψ'(n+1) = π²/6 − Σ_{k≤n} 1/k²
        let s: f64 = (1..=20).map(|k| 1.0 / (k * k) as f64).sum();
        assert_abs_diff_eq!(trigamma(21.0), PI * PI / 6.0 - s, epsilon = 1e-14);
    }

    #[test]
    fn recurrences_hold() {
        for &x in &[0.3, 1.7, 11.9, 12.1, 30.0, 1000.5] {
            assert_abs_diff_eq!(digamma(x + 1.0) - digamma(x), 1.0 / x, epsilon = 1e-12);
            assert_abs_diff_eq!(
                trigamma(x) - trigamma(x + 1.0),
                1.0 / (x * x),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn alternating_harmonic_matches_digamma_identity() {
        // Φ(a) = (ψ((a+1)/2) − ψ(a/2)) / 2
        for &a in &[0.5, 1.0, 2.0, 4.0, 37.0, 4096.0] {
            let oracle = 0.5 * (digamma(0.5 * (a + 1.0)) - digamma(0.5 * a));
            assert_abs_diff_eq!(alternating_harmonic(a), oracle, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(alternating_harmonic(1.0), 2f64.ln(), epsilon = 1e-15);
    }
}

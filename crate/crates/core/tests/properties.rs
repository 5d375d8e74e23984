use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use qpea_risk::*;

fn named_losses(m: u32) -> Vec<LossSpec> {
    vec![
        LossSpec::Absolute,
        LossSpec::Squared,
        LossSpec::Holevo,
        LossSpec::one_zero(PI / (1u32 << m) as f64).unwrap(),
    ]
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

// Mirror-symmetric unit vector of length 2^m from its first half.
fn symmetric_state(m: u32, half: &[f64]) -> RegisterState {
    let dim = 1usize << m;
    let amps: Vec<f64> = (0..dim).map(|i| half[i.min(dim - 1 - i)]).collect();
    RegisterState::custom(unit(amps)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn min_eigenpair_matches_dense_oracle(band in prop::collection::vec(-1.0f64..1.0, 1..64)) {
        let rm = RiskMatrix::from_band(band);
        let pair = min_eigenpair(&rm).unwrap();
        let eig = SymmetricEigen::new(rm.to_dense());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((pair.value - min).abs() <= 1e-10);
        prop_assert!(residual(&rm, &pair) <= 1e-8);

        let dim = rm.dim() as f64;
        let uniform = vec![1.0 / dim.sqrt(); rm.dim()];
        prop_assert!(rm.quadratic_form(&pair.vector) <= rm.quadratic_form(&uniform) + 1e-12);

        let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((min_eigenpair(&rm.negated()).unwrap().value + max).abs() <= 1e-10);
    }

    #[test]
    fn toeplitz_solver_matches_dense(band in prop::collection::vec(-1.0f64..1.0, 8..200)) {
        let rm = RiskMatrix::from_band(band);
        let dense = min_eigenpair_with(&rm, EigenSolver::Dense).unwrap();
        let fast = min_eigenpair_with(&rm, EigenSolver::Toeplitz).unwrap();
        prop_assert!((dense.value - fast.value).abs() <= 1e-10);
        prop_assert!(residual(&rm, &fast) <= 1e-8);
    }

    #[test]
    fn noise_factorizes(
        m in 1u32..7,
        lambda in 0.0f64..0.5,
        half in prop::collection::vec(0.01f64..1.0, 32),
        which in 0usize..4,
    ) {
        let loss = &named_losses(m)[which];
        let fl = fourier_coefficients(loss, resources(m)).unwrap();
        let state = symmetric_state(m, &half);
        let noise = NoiseModel::new(lambda).unwrap();
        let r0 = risk_of_state(&state, &fl, NoiseModel::noiseless()).unwrap().risk;
        let r = risk_of_state(&state, &fl, noise).unwrap().risk;
        let att = noise.attenuation(resources(m));
        prop_assert!(((r - fl.l0()) - att * (r0 - fl.l0())).abs() <= 1e-13);
        let bound = fl.l0() + 2.0 * fl.coeffs().iter().map(|l| l.abs()).sum::<f64>();
        prop_assert!(r.is_finite() && r <= bound);
    }

    #[test]
    fn optimal_state_beats_random_symmetric_states(
        m in 1u32..7,
        half in prop::collection::vec(-1.0f64..1.0, 32),
        which in 0usize..4,
    ) {
        prop_assume!(half.iter().take(1 << (m - 1)).any(|x| x.abs() > 1e-3));
        let loss = &named_losses(m)[which];
        let fl = fourier_coefficients(loss, resources(m)).unwrap();
        let opt = optimal_state(m, &fl).unwrap();
        let s = symmetric_state(m, &half);
        let noise = NoiseModel::noiseless();
        let r_opt = risk_of_state(&opt, &fl, noise).unwrap().risk;
        let r = risk_of_state(&s, &fl, noise).unwrap().risk;
        prop_assert!(r_opt <= r + 1e-12, "{} > {}", r_opt, r);
    }

    #[test]
    fn matrix_and_direct_paths_agree(
        m in 1u32..7,
        half in prop::collection::vec(-1.0f64..1.0, 32),
        which in 0usize..4,
    ) {
        prop_assume!(half.iter().take(1 << (m - 1)).any(|x| x.abs() > 1e-3));
        let fl = fourier_coefficients(&named_losses(m)[which], resources(m)).unwrap();
        let s = symmetric_state(m, &half);
        let a = risk_of_state_with(&s, &fl, NoiseModel::noiseless(), EvalPath::DirectSum).unwrap();
        let b = risk_of_state_with(&s, &fl, NoiseModel::noiseless(), EvalPath::Matrix).unwrap();
        prop_assert!((a.risk - b.risk).abs() <= 1e-12);
    }

    #[test]
    fn posteriors_are_normalized_densities(
        m in 1u32..4,
        frac in 0.0f64..1.0,
        raw in prop::collection::vec(0usize..1000, 0..4),
        lambda in 0.0f64..0.2,
    ) {
        let state = cosine_state(m, frac * omega_max(m)).unwrap();
        let dim = 1usize << m;
        let outcomes: Vec<usize> = raw.iter().map(|y| y % dim).collect();
        let rec = MeasurementRecord::new(outcomes, state, NoiseModel::new(lambda).unwrap()).unwrap();
        let post = posterior_spectrum(&rec).unwrap();
        prop_assert!((post.integral() - 1.0).abs() <= 1e-12);
        for i in 0..4096 {
            prop_assert!(post.eval(2.0 * PI * i as f64 / 4096.0) >= -1e-10);
        }
    }

    #[test]
    fn posterior_ignores_outcome_order(
        m in 1u32..4,
        raw in prop::collection::vec(0usize..1000, 2..5),
        seed in any::<u64>(),
    ) {
        let state = cosine_state(m, 0.5 * omega_max(m)).unwrap();
        let dim = 1usize << m;
        let outcomes: Vec<usize> = raw.iter().map(|y| y % dim).collect();
        let mut shuffled = outcomes.clone();
        shuffled.rotate_left((seed % outcomes.len() as u64) as usize);
        shuffled.reverse();
        let noise = NoiseModel::noiseless();
        let a = posterior_spectrum(&MeasurementRecord::new(outcomes, state.clone(), noise).unwrap()).unwrap();
        let b = posterior_spectrum(&MeasurementRecord::new(shuffled, state, noise).unwrap()).unwrap();
        // low-evidence records lose a few digits to the normalization
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x - y).norm() <= 1e-9, "{} vs {}", x, y);
        }
    }
}

// max_δ |reconstruct − periodize| · K over 1024 points, per loss.
fn fourier_error_times_k(loss: &LossSpec, k: usize, exclude: Option<(f64, f64)>) -> f64 {
    let fl = fourier_coefficients(loss, k).unwrap();
    (0..1024)
        .map(|i| -PI + 2.0 * PI * i as f64 / 1024.0)
        .filter(|d| exclude.is_none_or(|(eps, gap)| (d.abs() - eps).abs() > gap))
        .map(|d| (reconstruct_loss(&fl, d) - periodize_loss(loss, d).unwrap()).abs())
        .fold(0.0, f64::max)
        * k as f64
}

#[test]
fn fourier_series_converge_like_one_over_k() {
    // constants fitted once over K ∈ {8, 32, 128, 512}: 2/π for |δ|, 4 for δ²,
    // and 1/(π·0.1) for 1-0 at distance ≥ 0.1 from the jumps, each padded
    for k in [8, 32, 128, 512] {
        assert!(fourier_error_times_k(&LossSpec::Absolute, k, None) <= 0.64);
        assert!(fourier_error_times_k(&LossSpec::Squared, k, None) <= 4.0);
        assert!(fourier_error_times_k(&LossSpec::Holevo, k, None) <= 1e-12);
        for eps in [0.5, PI / 8.0] {
            let oz = LossSpec::one_zero(eps).unwrap();
            assert!(fourier_error_times_k(&oz, k, Some((eps, 0.1))) <= 4.0);
        }
    }
}

#[test]
fn quadrature_reproduces_closed_forms() {
    for (name, loss) in [
        ("abs", LossSpec::Absolute),
        ("sq", LossSpec::Squared),
        ("holevo", LossSpec::Holevo),
        ("oz", LossSpec::one_zero(PI / 8.0).unwrap()),
    ] {
        let closed = fourier_coefficients(&loss, 64).unwrap();
        let inner = loss.clone();
        let custom = LossSpec::custom(name, move |d| periodize_loss(&inner, d).unwrap());
        let quad = fourier_coefficients(&custom, 64).unwrap();
        assert!((closed.l0() - quad.l0()).abs() <= 1e-10, "{name}");
        for (a, b) in closed.coeffs().iter().zip(quad.coeffs()) {
            assert!((a - b).abs() <= 1e-10, "{name}");
        }
    }
}

#[test]
fn holevo_optimum_is_cosine_state() {
    for m in 1..=10u32 {
        let n = resources(m);
        let fl = fourier_coefficients(&LossSpec::Holevo, n).unwrap();
        let opt = optimal_state(m, &fl).unwrap();
        let cos = cosine_state(m, PI / (n as f64 + 2.0)).unwrap();
        for (a, b) in opt.amplitudes().iter().zip(cos.amplitudes()) {
            assert!((a - b).abs() <= 1e-8, "m={m}");
        }
        let r = risk_of_state(&opt, &fl, NoiseModel::noiseless())
            .unwrap()
            .risk;
        assert!((r - (2.0 - 2.0 * (PI / (n as f64 + 2.0)).cos())).abs() <= 1e-10);
    }
}

#[test]
fn optimal_cosine_dominates_uniform() {
    for m in 1..=12u32 {
        let n = resources(m);
        for loss in named_losses(m) {
            let fl = fourier_coefficients(&loss, n).unwrap();
            let best = optimize_omega(m, &fl).unwrap();
            let u = risk_uniform_closed(m, &fl, NoiseModel::noiseless())
                .unwrap()
                .risk;
            assert!(best.risk0 <= u + 1e-14, "{} m={m}", loss.descriptor());
            if m >= 2 {
                assert!(best.risk0 < u, "{} m={m}", loss.descriptor());
            }
        }
    }
}

#[test]
fn uniform_state_is_suboptimal() {
    for m in 2..=8u32 {
        let n = resources(m);
        for loss in named_losses(m) {
            let fl = fourier_coefficients(&loss, n).unwrap();
            let noise = NoiseModel::noiseless();
            let u = risk_of_state(&uniform_state(m).unwrap(), &fl, noise)
                .unwrap()
                .risk;
            let o = risk_of_state(&optimal_state(m, &fl).unwrap(), &fl, noise)
                .unwrap()
                .risk;
            assert!(u - o > 1e-9, "{} m={m}: {u} vs {o}", loss.descriptor());
        }
    }
}

#[test]
fn uniform_holevo_risk_is_two_over_dim() {
    for m in 1..=12u32 {
        let fl = fourier_coefficients(&LossSpec::Holevo, resources(m)).unwrap();
        let r = risk_of_state(&uniform_state(m).unwrap(), &fl, NoiseModel::noiseless()).unwrap();
        assert!((r.risk - 2.0 / (1u64 << m) as f64).abs() <= 4.0 * f64::EPSILON);
    }
}

#[test]
fn constant_loss_gives_l0_for_every_state() {
    let c = FourierLoss::constant(0.7, 63).unwrap();
    for m in 1..=6u32 {
        let states = [
            uniform_state(m).unwrap(),
            cosine_state(m, 0.3 * omega_max(m)).unwrap(),
            optimal_state(m, &c).unwrap(),
        ];
        for s in states {
            let r = risk_of_state(&s, &c, NoiseModel::new(0.05).unwrap()).unwrap();
            assert_eq!(r.risk, 0.7);
        }
    }
}

#[test]
fn closed_form_matches_bruteforce_oracle() {
    for m in 1..=4u32 {
        let n = resources(m);
        for loss in named_losses(m) {
            let fl = fourier_coefficients(&loss, n).unwrap();
            let mut states = vec![uniform_state(m).unwrap(), optimal_state(m, &fl).unwrap()];
            for frac in [0.25, 0.5, 0.9] {
                states.push(cosine_state(m, frac * omega_max(m)).unwrap());
            }
            for lambda in [0.0, 0.01, 0.1] {
                let noise = NoiseModel::new(lambda).unwrap();
                for s in &states {
                    let closed = risk_of_state(s, &fl, noise).unwrap().risk;
                    let oracle = risk_bruteforce_oracle(s, &loss, noise, 1 << (m + 6))
                        .unwrap()
                        .risk;
                    assert!(
                        (closed - oracle).abs() <= 1e-7,
                        "{} m={m}",
                        loss.descriptor()
                    );
                }
            }
        }
    }
}

#[test]
fn one_zero_risk_falls_as_inverse_cube_for_fixed_window() {
    let eps = 0.1;
    let (mut x, mut y) = (vec![], vec![]);
    for m in 6..=12u32 {
        let n = resources(m);
        let fl = fourier_coefficients(&LossSpec::one_zero(eps).unwrap(), n).unwrap();
        let best = optimize_omega(m, &fl).unwrap();
        x.push((n as f64).ln());
        y.push(best.risk0.ln());
    }
    let fit = linear_fit(&x, &y);
    assert!((fit.slope + 3.0).abs() <= 0.2, "slope {}", fit.slope);
}

#[test]
fn multi_risk_monotone_in_noise_and_tends_to_l0() {
    for m in 1..=2u32 {
        for meas in 1..=3usize {
            let n = resources(m) * meas;
            for loss in named_losses(m) {
                let fl = fourier_coefficients(&loss, n).unwrap();
                let s = cosine_state(m, 0.7 * omega_max(m)).unwrap();
                let mut prev = f64::NEG_INFINITY;
                for lambda in [0.0, 0.005, 0.01, 0.05] {
                    let r = exact_multi_risk(&s, meas, &fl, NoiseModel::new(lambda).unwrap())
                        .unwrap()
                        .risk;
                    assert!(r >= prev - 1e-12, "{} m={m} M={meas}", loss.descriptor());
                    prev = r;
                }
                let r = exact_multi_risk(&s, meas, &fl, NoiseModel::new(1.0 - 1e-12).unwrap())
                    .unwrap()
                    .risk;
                assert!((r - fl.l0()).abs() <= 1e-8);
            }
        }
    }
}

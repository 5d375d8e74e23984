use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;

use qpea_risk::{
    baseline_risk, cosine_state, exact_multi_risk, fourier_coefficients_with, linear_fit,
    mc_multi_risk, optimal_state, optimize_omega, read_state_csv, resources,
    risk_bruteforce_oracle, risk_cosine_closed, risk_of_state, risk_of_state_with,
    risk_uniform_closed, uniform_named_risk, uniform_state, EvalPath, FourierLoss, LossSpec,
    NoiseModel, QuadratureConfig, RegisterState, RiskReport, SigmaModel,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{
    BaselinesArgs, Command, FourierArgs, LossArgs, MultiArgs, MultiMethod, PrepBinaryArgs,
    RiskArgs, RiskPath, StateArgs, StateKind, SweepMArgs, SweepOmegaArgs,
};
use crate::output::{Cell, Table};
use crate::CliError;

/// Header of `sweep-m` and, with an extra column, of `risk`.
pub const SWEEP_M_COLUMNS: [&str; 8] = [
    "m", "N", "loss", "lambda", "state", "omega", "risk", "method",
];

/// A finished command: the result table plus diagnostics for stderr.
pub struct Outcome {
    pub table: Table,
    pub notes: Vec<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self {
            table,
            notes: Vec::new(),
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Fourier(a) => fourier(a).map(Into::into),
        Command::State(a) => state(a).map(Into::into),
        Command::Risk(a) => risk(a).map(Into::into),
        Command::SweepOmega(a) => sweep_omega(a),
        Command::SweepM(a) => sweep_m(a).map(Into::into),
        Command::Baselines(a) => baselines(a).map(Into::into),
        Command::Multi(a) => multi(a).map(Into::into),
        Command::PrepBinary(a) => prep_binary(a).map(Into::into),
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

impl LossArgs {
    /// The loss for register size `m`; the 1-0 tolerance defaults to π/2^m.
    pub fn spec(&self, m: Option<u32>) -> Result<LossSpec, CliError> {
        let name = self.loss.to_ascii_lowercase();
        if name == "constant" {
            return match self.constant {
                Some(c) if c.is_finite() => Ok(LossSpec::constant(c)),
                _ => usage("--loss constant needs a finite --constant"),
            };
        }
        let epsilon = self.epsilon.or_else(|| m.map(|m| PI / (1u64 << m) as f64));
        Ok(LossSpec::from_name(&name, epsilon)?)
    }

    pub fn fourier(&self, m: Option<u32>, kmax: usize) -> Result<FourierLoss, CliError> {
        if let ("constant", Some(c)) = (self.loss.to_ascii_lowercase().as_str(), self.constant) {
            return Ok(FourierLoss::constant(c, kmax)?);
        }
        let spec = self.spec(m)?;
        let quad = QuadratureConfig { nodes: self.nodes };
        Ok(fourier_coefficients_with(&spec, kmax, quad)?)
    }
}

fn noise(lambda: f64) -> Result<NoiseModel, CliError> {
    Ok(NoiseModel::new(lambda)?)
}

fn fourier(a: &FourierArgs) -> Result<Table, CliError> {
    if a.kmax == 0 {
        return usage("--kmax must be at least 1");
    }
    let fl = a.loss.fourier(None, a.kmax)?;
    let mut t = Table::new(&["k", "loss", "coefficient"]);
    for k in 0..=a.kmax {
        t.push(vec![
            k.into(),
            fl.label().into(),
            fl.coefficient(k as i64).into(),
        ]);
    }
    Ok(t)
}

fn state_table(state: &RegisterState) -> Table {
    let mut t = Table::new(&["c_i"]);
    for &c in state.amplitudes() {
        t.push(vec![c.into()]);
    }
    t
}

// Builds one of the loss-independent or loss-derived register states.
fn build_state(
    kind: StateKind,
    m: u32,
    omega: Option<f64>,
    fl: &FourierLoss,
) -> Result<RegisterState, CliError> {
    Ok(match kind {
        StateKind::Uniform => uniform_state(m)?,
        StateKind::Cosine => match omega {
            Some(w) => cosine_state(m, w)?,
            None => return usage("a cosine state needs a frequency"),
        },
        StateKind::OmegaOpt => cosine_state(m, optimize_omega(m, fl)?.omega)?,
        StateKind::Optimal => optimal_state(m, fl)?,
        StateKind::File => return usage("a state file is only accepted by `risk`"),
    })
}

fn state(a: &StateArgs) -> Result<Table, CliError> {
    let chosen: Vec<StateKind> = [
        (a.optimal, StateKind::Optimal),
        (a.uniform, StateKind::Uniform),
        (a.cosine.is_some(), StateKind::Cosine),
        (a.omega_opt, StateKind::OmegaOpt),
    ]
    .into_iter()
    .filter_map(|(on, k)| on.then_some(k))
    .collect();
    let kind = match chosen.as_slice() {
        [] => StateKind::Optimal,
        [k] => *k,
        _ => return usage("choose one of --optimal, --uniform, --cosine, --omega-opt"),
    };
    let fl = match kind {
        StateKind::Optimal | StateKind::OmegaOpt => {
            a.loss.fourier(Some(a.m), resources_checked(a.m)?)?
        }
        _ => FourierLoss::constant(0.0, 1)?,
    };
    Ok(state_table(&build_state(kind, a.m, a.cosine, &fl)?))
}

fn prep_binary(a: &PrepBinaryArgs) -> Result<Table, CliError> {
    let n = resources_checked(a.m)?;
    let loss = LossSpec::one_zero(PI / (1u64 << a.m) as f64)?;
    let fl = fourier_coefficients_with(&loss, n, QuadratureConfig::default())?;
    Ok(state_table(&optimal_state(a.m, &fl)?))
}

fn resources_checked(m: u32) -> Result<usize, CliError> {
    if !(1..=qpea_risk::MAX_QUBITS).contains(&m) {
        return usage(format!(
            "m must lie in 1..={}, got {m}",
            qpea_risk::MAX_QUBITS
        ));
    }
    Ok(resources(m))
}

fn report_row(r: &RiskReport, state: &str) -> Vec<Cell> {
    vec![
        r.m.into(),
        resources(r.m).into(),
        r.loss.as_str().into(),
        r.lambda.into(),
        state.into(),
        r.omega.into(),
        r.risk.into(),
        r.method.to_string().into(),
    ]
}

fn risk(a: &RiskArgs) -> Result<Table, CliError> {
    let noise = noise(a.lambda)?;
    let (state, m) = if a.state == StateKind::File {
        let Some(path) = &a.state_file else {
            return usage("--state file needs --state-file");
        };
        let file = File::open(path).map_err(|e| CliError::Input(path.clone(), e))?;
        let s = read_state_csv(BufReader::new(file))?;
        if a.m.is_some_and(|m| m != s.m()) {
            return usage(format!("--m disagrees with the {}-qubit state file", s.m()));
        }
        let m = s.m();
        (Some(s), m)
    } else {
        match a.m {
            Some(m) => (None, m),
            None => return usage("--m is required"),
        }
    };
    let n = resources_checked(m)?;
    let fl = a.loss.fourier(Some(m), n)?;
    let state = match state {
        Some(s) => s,
        None => build_state(a.state, m, a.omega, &fl)?,
    };

    let report = match a.method {
        RiskPath::Auto => match (a.state, state.omega()) {
            (StateKind::Uniform, _) => risk_uniform_closed(m, &fl, noise)?,
            (StateKind::Cosine | StateKind::OmegaOpt, Some(w)) => {
                risk_cosine_closed(m, w, &fl, noise)?
            }
            _ => risk_of_state(&state, &fl, noise)?,
        },
        RiskPath::Matrix => risk_of_state_with(&state, &fl, noise, EvalPath::Matrix)?,
        RiskPath::Special => {
            if a.state != StateKind::Uniform {
                return usage("--method special applies to the uniform state only");
            }
            uniform_named_risk(m, &a.loss.spec(Some(m))?, noise)?
        }
        RiskPath::Oracle => {
            let grid = a.grid.unwrap_or(1 << (m + 6));
            risk_bruteforce_oracle(&state, &a.loss.spec(Some(m))?, noise, grid)?
        }
    };
    let mut columns = SWEEP_M_COLUMNS.to_vec();
    columns.push("estimator_gap");
    let mut t = Table::new(&columns);
    let mut row = report_row(&report, &a.state.to_string());
    row.push(report.estimator_gap.into());
    t.push(row);
    Ok(t)
}

fn sweep_omega(a: &SweepOmegaArgs) -> Result<Outcome, CliError> {
    let rows: Vec<(u32, usize, String, f64, f64)> =
        a.m.iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|m| {
                let n = resources_checked(m)?;
                let fl = a.loss.fourier(Some(m), n)?;
                let opt = optimize_omega(m, &fl)?;
                Ok((m, n, fl.label().to_string(), opt.omega, opt.risk0))
            })
            .collect::<Result<_, CliError>>()?;

    let mut t = Table::new(&["m", "N", "loss", "omega", "pi_over_omega", "risk"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (m, n, loss, omega, risk) in rows {
        let ratio = (omega > 0.0).then(|| PI / omega);
        if let (true, Some(r)) = (a.fit.contains(m), ratio) {
            xs.push(n as f64);
            ys.push(r);
        }
        t.push(vec![
            m.into(),
            n.into(),
            loss.into(),
            omega.into(),
            ratio.into(),
            risk.into(),
        ]);
    }
    let mut notes = Vec::new();
    if xs.len() >= 2 {
        let fit = linear_fit(&xs, &ys);
        notes.push(
            json!({"fit": {
                "x": "N", "y": "pi/omega",
                "m": format!("{}..{}", a.fit.lo, a.fit.hi),
                "slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
            }})
            .to_string(),
        );
    }
    Ok(Outcome { table: t, notes })
}

fn sweep_m(a: &SweepMArgs) -> Result<Table, CliError> {
    if a.states.is_empty() {
        return usage("--states is empty");
    }
    if let Some(k) = a
        .states
        .iter()
        .find(|k| matches!(k, StateKind::Cosine | StateKind::File))
    {
        return usage(format!(
            "state '{k}' cannot be swept; use uniform, omega-opt or optimal"
        ));
    }
    let noise = noise(a.lambda)?;
    let blocks: Vec<Vec<Vec<Cell>>> =
        a.m.iter()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|m| {
                let n = resources_checked(m)?;
                let fl = a.loss.fourier(Some(m), n)?;
                a.states
                    .iter()
                    .map(|&kind| {
                        let report = match kind {
                            StateKind::Uniform => risk_uniform_closed(m, &fl, noise)?,
                            StateKind::OmegaOpt => {
                                risk_cosine_closed(m, optimize_omega(m, &fl)?.omega, &fl, noise)?
                            }
                            _ => risk_of_state(&optimal_state(m, &fl)?, &fl, noise)?,
                        };
                        Ok(report_row(&report, &kind.to_string()))
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })
            .collect::<Result<_, CliError>>()?;
    let mut t = Table::new(&SWEEP_M_COLUMNS);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

fn baselines(a: &BaselinesArgs) -> Result<Table, CliError> {
    let mut t = Table::new(&["m", "N", "loss", "kind", "sigma2", "risk"]);
    for m in a.m.iter() {
        let n = resources_checked(m)?;
        let spec = a.loss.spec(Some(m))?;
        for (kind, sig) in [
            ("shot_noise", SigmaModel::shot_noise(n)?),
            ("heisenberg", SigmaModel::heisenberg(n)?),
        ] {
            let r = baseline_risk(sig, &spec)?;
            t.push(vec![
                m.into(),
                n.into(),
                spec.descriptor().into(),
                kind.into(),
                sig.sigma2.into(),
                r.into(),
            ]);
        }
    }
    Ok(t)
}

fn multi(a: &MultiArgs) -> Result<Table, CliError> {
    if matches!(a.state, StateKind::Cosine | StateKind::File) {
        return usage("multi supports uniform, omega-opt and optimal states");
    }
    let noise = noise(a.lambda)?;
    let mut t = Table::new(&[
        "m",
        "N",
        "M",
        "resources",
        "loss",
        "lambda",
        "state",
        "risk",
        "stderr",
        "method",
    ]);
    for m in a.m.iter() {
        let n = resources_checked(m)?;
        for meas in a.measurements.iter() {
            let meas = meas as usize;
            let fl = a.loss.fourier(Some(m), n * meas.max(1))?;
            let state = build_state(a.state, m, None, &fl)?;
            let r = match a.method {
                MultiMethod::Exact => exact_multi_risk(&state, meas, &fl, noise)?,
                MultiMethod::MonteCarlo => {
                    mc_multi_risk(&state, meas, &fl, noise, a.samples, a.seed)?
                }
            };
            t.push(vec![
                m.into(),
                n.into(),
                meas.into(),
                (meas * n).into(),
                r.loss.as_str().into(),
                r.lambda.into(),
                a.state.to_string().into(),
                r.risk.into(),
                r.stderr.into(),
                r.method.to_string().into(),
            ]);
        }
    }
    Ok(t)
}

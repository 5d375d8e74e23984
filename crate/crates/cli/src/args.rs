//! Command-line surface. Every long flag can also be set from a config file
//! as `flag-name = value`; flags given on the command line win.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "qpea",
    version,
    about = "Bayes risks and optimal register states for phase estimation"
)]
#[command(args_override_self = true)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Fourier coefficients L_0..L_K of a loss
    Fourier(FourierArgs),
    /// Write a register state file
    State(StateArgs),
    /// Risk of one register state
    Risk(RiskArgs),
    /// Optimal cosine frequency per register size, with a linear fit of π/ω vs N
    SweepOmega(SweepOmegaArgs),
    /// Risk of several states across register sizes
    SweepM(SweepMArgs),
    /// Gaussian shot-noise and Heisenberg reference risks
    Baselines(BaselinesArgs),
    /// Risk of M repeated measurements with the Bayes estimator
    Multi(MultiArgs),
    /// Optimal state for preparing an m-bit binary phase (1-0 loss, ε = π/2^m)
    PrepBinary(PrepBinaryArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fourier(_) => "fourier",
            Command::State(_) => "state",
            Command::Risk(_) => "risk",
            Command::SweepOmega(_) => "sweep-omega",
            Command::SweepM(_) => "sweep-m",
            Command::Baselines(_) => "baselines",
            Command::Multi(_) => "multi",
            Command::PrepBinary(_) => "prep-binary",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Fourier(a) => &a.out,
            Command::State(a) => &a.out,
            Command::Risk(a) => &a.out,
            Command::SweepOmega(a) => &a.out,
            Command::SweepM(a) => &a.out,
            Command::Baselines(a) => &a.out,
            Command::Multi(a) => &a.out,
            Command::PrepBinary(a) => &a.out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; defaults to $QPEA_OUTPUT_DIR/<command>.<ext>, else stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// key = value file with defaults for any long flag
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LossArgs {
    /// absolute, squared, holevo, one_zero or constant
    #[arg(long, default_value = "holevo")]
    pub loss: String,
    /// 1-0 tolerance; register-size-aware commands default to π/2^m
    #[arg(long, value_parser = parse_angle)]
    pub epsilon: Option<f64>,
    /// value of the constant loss
    #[arg(long)]
    pub constant: Option<f64>,
    /// quadrature node budget for losses without closed-form coefficients
    #[arg(long, default_value_t = 8192)]
    pub nodes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FourierArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long)]
    pub kmax: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StateArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long)]
    pub m: u32,
    /// eigenvector of the risk matrix (the default)
    #[arg(long)]
    pub optimal: bool,
    #[arg(long)]
    pub uniform: bool,
    /// cosine state with the given frequency
    #[arg(long, value_parser = parse_angle)]
    pub cosine: Option<f64>,
    /// cosine state at the risk-minimizing frequency
    #[arg(long)]
    pub omega_opt: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Uniform,
    Cosine,
    OmegaOpt,
    Optimal,
    File,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateKind::Uniform => "uniform",
            StateKind::Cosine => "cosine",
            StateKind::OmegaOpt => "omega-opt",
            StateKind::Optimal => "optimal",
            StateKind::File => "file",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskPath {
    /// closed forms where available, else the autocorrelation sum
    Auto,
    /// quadratic form with the Toeplitz risk matrix
    Matrix,
    /// special-function forms for the uniform state
    Special,
    /// direct numerical integration
    Oracle,
}

#[derive(Debug, Args, Serialize)]
pub struct RiskArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_enum, default_value_t = StateKind::Optimal)]
    pub state: StateKind,
    /// frequency for --state cosine
    #[arg(long, value_parser = parse_angle)]
    pub omega: Option<f64>,
    /// state file for --state file
    #[arg(long)]
    pub state_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = RiskPath::Auto)]
    pub method: RiskPath,
    /// integration nodes per period for --method oracle; default 2^(m+6)
    #[arg(long)]
    pub grid: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepOmegaArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    /// register sizes, `a` or `a..b`
    #[arg(long, default_value = "1..12")]
    pub m: IntRange,
    /// register sizes entering the fit of π/ω against N
    #[arg(long, default_value = "6..12")]
    pub fit: IntRange,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepMArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long, default_value = "1..12")]
    pub m: IntRange,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "uniform,omega-opt,optimal"
    )]
    pub states: Vec<StateKind>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselinesArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long, default_value = "1..12")]
    pub m: IntRange,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Args, Serialize)]
pub struct MultiArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    #[arg(long, default_value = "1..4")]
    pub m: IntRange,
    /// number of repeated measurements, `a` or `a..b`
    #[arg(long, default_value = "1..3")]
    pub measurements: IntRange,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = StateKind::Optimal)]
    pub state: StateKind,
    #[arg(long, value_enum, default_value_t = MultiMethod::Exact)]
    pub method: MultiMethod,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PrepBinaryArgs {
    #[arg(long)]
    pub m: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Inclusive integer range written `a` or `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

impl IntRange {
    pub fn iter(self) -> impl Iterator<Item = u32> {
        self.lo..=self.hi
    }

    pub fn contains(self, v: u32) -> bool {
        (self.lo..=self.hi).contains(&v)
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("'{t}' is not a non-negative integer"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        Ok(Self { lo, hi })
    }
}

/// Parses `pi`, `pi/<int>` or plain radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let value = if t == "pi" {
        PI
    } else if let Some(den) = t.strip_prefix("pi/") {
        let d: u64 = den
            .trim()
            .parse()
            .map_err(|_| format!("'{s}': expected pi/<positive integer>"))?;
        if d == 0 {
            return Err(format!("'{s}': division by zero"));
        }
        PI / d as f64
    } else {
        t.parse::<f64>()
            .map_err(|_| format!("'{s}' is not an angle"))?
    };
    if !value.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(value)
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qst", version, about = "Quantum-state transfer across XX spin chains with barrier fields")]
pub struct Cli {
    /// Worker threads for parameter sweeps (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory (default: $QST_OUTPUT_DIR, else ./results).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print the JSON summary to stdout instead of the list of written files.
    #[arg(long, global = true)]
    pub summary: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-excitation spectrum against the barrier field, both sign conventions.
    Spectrum(SpectrumArgs),
    /// Inverse participation ratio of every eigenstate against the barrier field.
    Ipr(IprArgs),
    /// Time series of |f_N1|, average fidelity and concurrence.
    Transfer(TransferArgs),
    /// Maximum average fidelity over a time window on an (N, ω) grid.
    Maxfid(MaxfidArgs),
    /// Transfer time against ω for several chain lengths, with log-log slopes.
    Scaling(ScalingArgs),
    /// Disorder-averaged transfer against bulk disorder strength.
    Disorder(DisorderArgs),
    /// Disorder-averaged transfer with fields leaking next to the barriers.
    Leakage(LeakageArgs),
    /// Transfer of an entangled pair from sites (1, 2) to (N−1, N).
    Ebit(EbitArgs),
    /// Three-stage time-dependent switching protocol.
    Protocol(ProtocolArgs),
    /// Exact against effective-model gaps.
    Effective(EffectiveArgs),
    /// Cross-checks against the full 2^N Hamiltonian.
    OracleCheck(OracleArgs),
    /// Run an experiment described by a TOML file whose keys mirror the flags.
    Run(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Ipr(_) => "ipr",
            Command::Transfer(_) => "transfer",
            Command::Maxfid(_) => "maxfid",
            Command::Scaling(_) => "scaling",
            Command::Disorder(_) => "disorder",
            Command::Leakage(_) => "leakage",
            Command::Ebit(_) => "ebit",
            Command::Protocol(_) => "protocol",
            Command::Effective(_) => "effective",
            Command::OracleCheck(_) => "oracle-check",
            Command::Run(_) => "run",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Chain lengths, comma separated; one dataset each.
    #[arg(long, value_delimiter = ',', default_values_t = [17, 18])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_max: f64,
    /// Number of ω intervals.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IprArgs {
    /// Chain lengths, comma separated; one dataset each.
    #[arg(long, value_delimiter = ',', default_values_t = [17, 18])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 50.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransferArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Barrier fields, comma separated; one dataset each.
    #[arg(long, value_delimiter = ',', default_values_t = [100.0])]
    pub omega: Vec<f64>,
    /// Time window [0, T].
    #[arg(long = "T", default_value_t = 4000.0)]
    #[serde(rename = "T")]
    pub window: f64,
    /// Sampling interval.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Chain and field profile from a TOML block (`n_sites`, `omega`,
    /// `barrier_sites` or `fields`); replaces --n and --omega.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MaxfidArgs {
    #[arg(long, default_value_t = 10)]
    pub n_min: usize,
    #[arg(long, default_value_t = 100)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1)]
    pub n_step: usize,
    #[arg(long, default_value_t = 0.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub omega_max: f64,
    /// Number of ω intervals.
    #[arg(long, default_value_t = 40)]
    pub omega_steps: usize,
    #[arg(long = "T", default_value_t = 4000.0)]
    #[serde(rename = "T")]
    pub window: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalingArgs {
    /// Chain lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [22, 23])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 5.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 80.0)]
    pub omega_max: f64,
    /// Logarithmically spaced ω values.
    #[arg(long, default_value_t = 17)]
    pub points: usize,
    /// Window [0, T] for the attained maximum fidelity.
    #[arg(long = "T", default_value_t = 4000.0)]
    #[serde(rename = "T")]
    pub window: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Concurrence,
    Fidelity,
}

/// 10⁵ realizations, the count used for the published averages.
pub const FULL_SCALE_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Args, Serialize)]
pub struct DisorderArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Barrier fields, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [20.0])]
    pub omega: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub b_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b_max: f64,
    /// Number of b intervals.
    #[arg(long, default_value_t = 10)]
    pub b_steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Use 10⁵ samples per point (overrides --samples).
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "T", default_value_t = 4000.0)]
    #[serde(rename = "T")]
    pub window: f64,
    #[arg(long, value_enum, default_value_t = Metric::Concurrence)]
    pub metric: Metric,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LeakageArgs {
    /// Chain lengths, comma separated (each at least 8).
    #[arg(long, value_delimiter = ',', default_values_t = [10, 14, 18, 22])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 5.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 60.0)]
    pub omega_max: f64,
    /// Number of ω intervals.
    #[arg(long, default_value_t = 11)]
    pub omega_steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Use 10⁵ samples per point (overrides --samples).
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "T", default_value_t = 4000.0)]
    #[serde(rename = "T")]
    pub window: f64,
    #[arg(long, value_enum, default_value_t = Metric::Fidelity)]
    pub metric: Metric,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EbitArgs {
    #[arg(long, default_value_t = 33)]
    pub n: usize,
    /// Barrier fields, comma separated; one dataset each.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 15.0, 45.0])]
    pub omega: Vec<f64>,
    /// Time window; defaults to three single-qubit transfer times of the e-bit profile.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub window: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Sender barrier before t1 and receiver barrier after t2.
    #[arg(long, default_value_t = 60.0)]
    pub k1: f64,
    /// Both barriers during the transfer stage.
    #[arg(long, default_value_t = 30.0)]
    pub k2: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t1: f64,
    /// Transfer stage length t2 − t1; default is the numeric optimum seeded
    /// with the closed-form estimate.
    #[arg(long)]
    pub interval: Option<f64>,
    /// Logistic switching times τ, comma separated; each adds a smoothed run
    /// next to the sharp-step one.
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Storage window after t2 over which the plateau is reported.
    #[arg(long, default_value_t = 500.0)]
    pub storage: f64,
    #[arg(long, default_value_t = 0.02)]
    pub sample_step: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EffectiveArgs {
    /// Chain lengths, comma separated (each at least 6).
    #[arg(long, value_delimiter = ',', default_values_t = [20, 21])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 50.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 48)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

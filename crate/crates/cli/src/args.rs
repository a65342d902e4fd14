use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use ecd_core::bounds::BoundKind;
use ecd_core::experiments::DEFAULT_THETAS;
use serde::{Serialize, Serializer};

#[derive(Debug, Parser)]
#[command(
    name = "ecd",
    version,
    about = "Energy-constrained diamond norms, entropic quantities and continuity bounds"
)]
pub struct Cli {
    /// Seed for every randomized search; echoed in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output format (default: json for single results, csv for sweeps).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for multi-start searches. Results do not depend on it.
    #[arg(long, global = true, env = "ECD_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy-constrained diamond norm bracket of a map.
    EcdNorm(EcdArgs),
    /// Unconstrained diamond norm bracket.
    Diamond(DiamondArgs),
    /// Subspace seminorm q_n, and the truncation bound when --E is given.
    Qn(QnArgs),
    /// Gibbs state at a given mean energy.
    Gibbs(GibbsArgs),
    /// Evaluate an F̂ selector.
    Fbound(FboundArgs),
    /// Holevo quantity of an ensemble, optionally after a channel.
    Chi(ChiArgs),
    /// Quantum mutual information of a bipartite state.
    Qmi(QmiArgs),
    /// Lower estimate of the energy-constrained Holevo capacity.
    CapEst(CapArgs),
    /// Energy amplification factor of a channel.
    EnergyGain(GainArgs),
    /// Evaluate a continuity bound at a fixed t, at the optimal t, or on a t sweep.
    Bound(BoundArgs),
    /// Minimize a continuity bound over t.
    OptimizeT(OptimizeArgs),
    /// Emit a channel or Hamiltonian file.
    #[command(subcommand)]
    Zoo(ZooCommand),
    /// Named experiment recipes; CSV tables.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EcdNorm(_) => "ecd-norm",
            Command::Diamond(_) => "diamond",
            Command::Qn(_) => "qn",
            Command::Gibbs(_) => "gibbs",
            Command::Fbound(_) => "fbound",
            Command::Chi(_) => "chi",
            Command::Qmi(_) => "qmi",
            Command::CapEst(_) => "cap-est",
            Command::EnergyGain(_) => "energy-gain",
            Command::Bound(_) => "bound",
            Command::OptimizeT(_) => "optimize-t",
            Command::Zoo(_) => "zoo",
            Command::Experiment(e) => e.name(),
        }
    }
}

fn as_name<S: Serializer>(kind: &BoundKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

/// The map Θ: a Choi file, or Φ - Ψ from two channel files, or Φ alone.
#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("theta").required(true).args(["map", "phi"])))]
pub struct MapSource {
    #[arg(long, conflicts_with_all = ["phi", "psi"])]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub phi: Option<PathBuf>,
    #[arg(long, requires = "phi")]
    pub psi: Option<PathBuf>,
}

/// A Hamiltonian file, or a truncated oscillator with the given spacing.
#[derive(Debug, Clone, Args, Serialize)]
pub struct HamiltonianSource {
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Oscillator level count when no file is given (default: the input dimension).
    #[arg(long, conflicts_with = "hamiltonian")]
    pub levels: Option<usize>,
    /// Oscillator level spacing when no file is given.
    #[arg(long, default_value_t = 1.0, conflicts_with = "hamiltonian")]
    pub hbar_omega: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EcdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: MapSource,
    #[command(flatten)]
    #[serde(flatten)]
    pub hamiltonian: HamiltonianSource,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: f64,
    #[arg(long)]
    pub r_dim: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    /// Include the witness vector in the output.
    #[arg(long)]
    pub witness: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiamondArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: MapSource,
    #[arg(long)]
    pub r_dim: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QnArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub theta: MapSource,
    #[command(flatten)]
    #[serde(flatten)]
    pub hamiltonian: HamiltonianSource,
    #[arg(long)]
    pub n: usize,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GibbsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub hamiltonian: HamiltonianSource,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FboundArgs {
    /// osc:ℓ:ω[:ω…] | shifted:<hamiltonian file> | table:<table file>
    #[arg(long)]
    pub fhat: String,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChiArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Apply this channel to every member first.
    #[arg(long)]
    pub channel: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QmiArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Subsystem dimensions, e.g. `2,3`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CapArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub hamiltonian: HamiltonianSource,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: f64,
    /// Number of ensemble members (default: the squared input dimension).
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GainArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// Input Hamiltonian (default: oscillator on the input dimension).
    #[arg(long)]
    pub h_in: Option<PathBuf>,
    /// Output Hamiltonian (default: oscillator on the output dimension).
    #[arg(long)]
    pub h_out: Option<PathBuf>,
    /// Spacing of the default oscillators.
    #[arg(long, default_value_t = 1.0)]
    pub hbar_omega: f64,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundCommon {
    #[arg(value_parser = clap::value_parser!(BoundKind))]
    #[serde(serialize_with = "as_name")]
    pub kind: BoundKind,
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub energy: f64,
    /// Energy amplification factor (cchi, ccap, eacap-out).
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Channel uses (qmi).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// osc:ℓ:ω[:ω…] | shifted:<hamiltonian file> | table:<table file>
    #[arg(long)]
    pub fhat: String,
    /// Oscillator-specific form F̂(E') - ℓ ln(εt).
    #[arg(long)]
    pub specialized: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["t", "optimize_t", "sweep"])))]
pub struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: BoundCommon,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub optimize_t: bool,
    /// Number of log-spaced t values up to 1/(2ε); CSV of (t, total, main, g, h2).
    #[arg(long)]
    pub sweep: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: BoundCommon,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "constructor")]
pub enum ZooCommand {
    /// Identity channel.
    Identity {
        #[arg(long)]
        d: usize,
    },
    /// ρ ↦ (1-p)ρ + p|0⟩⟨0|.
    Depolarize {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Damps off-diagonal entries by 1-p.
    Dephasing {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
    },
    /// Unitary diag(e^{iθk}).
    PhaseRotation {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        theta: f64,
    },
    /// Pure-loss channel with transmissivity eta, truncated to d levels.
    Attenuator {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eta: f64,
    },
    /// Truncated oscillator Hamiltonian (a Hamiltonian file, not a channel).
    Oscillator {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        hbar_omega: f64,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum ExperimentCommand {
    /// Phase rotations against the identity as θ shrinks.
    StrongConvergence(StrongArgs),
    /// Two close attenuators: diamond estimate across d and the ECD bracket.
    AttenuatorPair(PairArgs),
    /// Identity vs vacuum depolarizer: C_χ difference against F_H and the bound.
    TightnessCchi(TightCchiArgs),
    /// Identity vs vacuum depolarizer: entanglement-assisted capacities.
    TightnessEa(TightEaArgs),
    /// q_n plus tail against the ECD estimate for an attenuator pair.
    TruncationLadder(LadderArgs),
}

impl ExperimentCommand {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentCommand::StrongConvergence(_) => "experiment strong-convergence",
            ExperimentCommand::AttenuatorPair(_) => "experiment attenuator-pair",
            ExperimentCommand::TightnessCchi(_) => "experiment tightness-cchi",
            ExperimentCommand::TightnessEa(_) => "experiment tightness-ea",
            ExperimentCommand::TruncationLadder(_) => "experiment truncation-ladder",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StrongArgs {
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long = "E", default_value_t = 2.0)]
    #[serde(rename = "E")]
    pub energy: f64,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THETAS)]
    pub thetas: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PairArgs {
    #[arg(long, default_value_t = 0.70)]
    pub eta1: f64,
    #[arg(long, default_value_t = 0.69)]
    pub eta2: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 24])]
    pub dims: Vec<usize>,
    #[arg(long = "E", default_value_t = 2.0)]
    #[serde(rename = "E")]
    pub energy: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TightCchiArgs {
    #[arg(long, default_value_t = 12)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hbar_omega: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub energies: Vec<f64>,
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TightEaArgs {
    #[arg(long, default_value_t = 12)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hbar_omega: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LadderArgs {
    #[arg(long, default_value_t = 0.70)]
    pub eta1: f64,
    #[arg(long, default_value_t = 0.69)]
    pub eta2: f64,
    #[arg(long, default_value_t = 16)]
    pub d: usize,
    #[arg(long = "E", default_value_t = 2.0)]
    #[serde(rename = "E")]
    pub energy: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8, 16])]
    pub ns: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

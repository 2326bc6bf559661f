use clap::{Args, Parser, Subcommand, ValueEnum};
use permspec_core::experiments::Model;

#[derive(Debug, Parser)]
#[command(
    name = "permspec",
    version,
    about = "Eigenvalue statistics of Ewens permutation matrices and their modified variants"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample cycle structures and, optionally, arc counts.
    Sample(SampleArgs),
    /// Exact finite-n mean and variance of an arc count.
    ExactMoments(MomentsArgs),
    /// Limiting variance constants for an arc, closed form and numeric.
    Constants(ConstantsArgs),
    /// Fixed-arc central limit experiment.
    Clt(CltArgs),
    /// Shrinking-arc variance ratios and normality.
    Mesoscopic(MesoArgs),
    /// Quantiles of normalized extremal spacings.
    Spacings(SpacingsArgs),
    /// Mean L1 distance between cycle counts and their Poisson coupling.
    CouplingCheck(CouplingArgs),
    /// Cesàro identities for the weights Ψ_n(j).
    Identities(IdentitiesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Perm,
    Mod,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Perm => Model::Perm,
            ModelArg::Mod => Model::Mod,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    BothIrrationalIndependent,
    RationalAlpha,
    RationalBeta,
    BothRational,
    AffineRelated,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Ewens parameter.
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Seeded {
    /// Master seed; every trial draws from its own stream derived from it.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct ArcArgs {
    /// Left endpoint: a float or rat:p/q, irr:NAME.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Right endpoint: a float or rat:p/q, irr:NAME, affine:p/q+r/s*alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Several arcs as `alpha,beta;alpha,beta`.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    pub arcs: Option<String>,
}

#[derive(Debug, Args)]
pub struct Sizes {
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "n")]
    pub n_list: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub arcs: ArcArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Perm)]
    pub model: ModelArg,
    #[command(flatten)]
    pub seeded: Seeded,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[command(flatten)]
    pub arcs: ArcArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Perm)]
    pub model: ModelArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Arithmetic case; default endpoints are used when none are given.
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    #[command(flatten)]
    pub arcs: ArcArgs,
    /// Size of the numeric partial averages.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub arcs: ArcArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Perm)]
    pub model: ModelArg,
    #[command(flatten)]
    pub seeded: Seeded,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MesoArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    /// Left endpoint of the shrinking arc.
    #[arg(long, default_value = "rat:0", allow_hyphen_values = true)]
    pub alpha: String,
    /// Exponent γ in δ_N = N^{-γ}.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ModelArg::Perm)]
    pub model: ModelArg,
    #[command(flatten)]
    pub seeded: Seeded,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpacingsArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[command(flatten)]
    pub seeded: Seeded,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Target for the expected number of spacings missed by the horizon.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon_tail: f64,
    #[command(flatten)]
    pub seeded: Seeded,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long)]
    pub n: usize,
    /// Relative gap below which an identity passes.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[command(flatten)]
    pub common: Common,
}

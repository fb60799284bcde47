use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "capfrac",
    version,
    about = "Fractional integrals on spheres and ball layers, and Riesz inversion on caps"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Print convergence warnings to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a one-sided operator to a density.
    Apply(ApplyArgs),
    /// Invert a one-sided operator (Marchaud-type inverse).
    Invert(InvertArgs),
    /// Evaluate a Riesz potential on the sphere or on a cap.
    Riesz(RieszArgs),
    /// Recover φ from f = I^α_Ω φ on a cap.
    InvertRiesz(InvertRieszArgs),
    /// Run a verification suite; exit 3 when a tolerance is missed.
    Verify(VerifyArgs),
    /// Run oracle sweeps and print their reports.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpName {
    /// S^α_{a+} on the sphere (integrates over lower heights).
    #[value(name = "S-plus")]
    SPlus,
    /// S^α_{b−} on the sphere (integrates over higher heights).
    #[value(name = "S-minus")]
    SMinus,
    /// B^α_{a+} on a ball layer.
    #[value(name = "B-plus")]
    BPlus,
    /// B^α_{b−} on a ball layer.
    #[value(name = "B-minus")]
    BMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApplyRoute {
    Direct,
    Conjugated,
    Zonal,
    Modes,
    /// Mode-by-mode tabulation on the input grid.
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InvertRoute {
    Conjugated,
    /// Finite differences of the spherical ray kernel.
    Fd,
    /// The first-derivative form (order below 1, full domain only).
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RieszRoute {
    Direct,
    Transport,
    MinusFirst,
    PlusFirst,
    /// Half-order factorization on a cap.
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InvertRieszRoute {
    Pipeline,
    Modes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Manufactured {
    /// (1+u)^{α+n/2} e^{−u} on the sphere; S^α_− of it is 2^α(1+u)^{n/2−α}e^{−u}.
    ZonalClosedForm,
    /// e^{−|ξ|²} on ℝⁿ, a fixed point of B^α_−.
    Gaussian,
    /// 1 on the sphere.
    Constant,
    /// 10 (h − a)²(1 − h)² on the north cap ⟨a, 1⟩ (a from --cap-a), zero elsewhere.
    CapBump,
    /// A smooth non-zonal density on the sphere, e^{−u}(1 + ½ ξ₁/√(1+u)).
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// ψ and Λ identities.
    Appendix,
    /// Fast operators against brute-force quadrature.
    Operators,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Psi,
    Lambda,
    Brute,
}

/// Where the input density comes from and the grid used to sample it.
#[derive(Debug, Args)]
pub struct Source {
    /// Density CSV; its manifest is the sibling `.json` file.
    #[arg(
        long,
        conflicts_with = "manufactured",
        required_unless_present = "manufactured"
    )]
    pub input: Option<PathBuf>,
    /// Sample a built-in density instead of reading one.
    #[arg(long, value_enum)]
    pub manufactured: Option<Manufactured>,
    /// Radial nodes used for manufactured densities.
    #[arg(long, default_value_t = 64)]
    pub radial_nodes: usize,
    /// Harmonic degree resolved by the angular grid of non-zonal
    /// manufactured densities.
    #[arg(long, default_value_t = 4)]
    pub jmax: usize,
}

#[derive(Debug, Args)]
pub struct Order {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct Bounds {
    /// Lower height (sphere) or inner radius (ball).
    #[arg(long, allow_negative_numbers = true)]
    pub cap_a: Option<f64>,
    /// Upper height (sphere) or outer radius (ball).
    #[arg(long, allow_negative_numbers = true)]
    pub cap_b: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Schedule {
    /// Order of the finite difference; defaults to ⌊α⌋ + 1.
    #[arg(long)]
    pub ell: Option<usize>,
    /// First truncation level, relative to the target's scale.
    #[arg(long, default_value_t = 0.1)]
    pub eps0: f64,
    /// Number of halvings of ε.
    #[arg(long, default_value_t = 8)]
    pub eps_terms: usize,
    /// Disable Richardson extrapolation over the schedule.
    #[arg(long)]
    pub no_extrapolation: bool,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long, value_enum)]
    pub op: OpName,
    #[command(flatten)]
    pub order: Order,
    #[arg(long, value_enum, default_value = "conjugated")]
    pub route: ApplyRoute,
    #[command(flatten)]
    pub bounds: Bounds,
    #[command(flatten)]
    pub source: Source,
    /// Output CSV; the manifest goes next to it.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Operator whose inverse is applied.
    #[arg(long, value_enum)]
    pub op: OpName,
    #[command(flatten)]
    pub order: Order,
    #[arg(long, value_enum, default_value = "conjugated")]
    pub route: InvertRoute,
    #[command(flatten)]
    pub bounds: Bounds,
    #[command(flatten)]
    pub schedule: Schedule,
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct RieszArgs {
    #[command(flatten)]
    pub order: Order,
    #[arg(long, value_enum, default_value = "direct")]
    pub route: RieszRoute,
    #[command(flatten)]
    pub bounds: Bounds,
    /// Radial nodes of intermediate tables in factorized routes.
    #[arg(long, default_value_t = 64)]
    pub stage_nodes: usize,
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct InvertRieszArgs {
    #[command(flatten)]
    pub order: Order,
    #[arg(long, value_enum, default_value = "pipeline")]
    pub route: InvertRieszRoute,
    #[command(flatten)]
    pub bounds: Bounds,
    #[command(flatten)]
    pub schedule: Schedule,
    #[arg(long, default_value_t = 64)]
    pub stage_nodes: usize,
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "appendix")]
    pub suite: Suite,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value = "psi")]
    pub sweep: Sweep,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

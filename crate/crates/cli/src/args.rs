use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use consonance_core::harness::MeasureKind;
use consonance_core::region::RegionKind;

#[derive(Debug, Clone, Parser)]
#[command(name = "consonance", version, about = "Conformal plausibility contours, credal sets and prediction regions")]
pub struct Cli {
    /// Print machine-readable JSON on stdout instead of tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Arithmetic for contour values. Defaults to rational on label spaces
    /// and float on grids.
    #[arg(long, global = true, value_enum)]
    pub numeric: Option<NumericMode>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NumericMode {
    Rational,
    Float,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Build a plausibility contour from observed data.
    Transduce(TransduceArgs),
    /// Upper and lower probabilities, mass functions and capacity checks.
    Possibility(PossibilityArgs),
    /// Prediction regions at a significance level.
    Region(RegionArgs),
    /// The credal set of a consonant contour.
    Credal(CredalArgs),
    /// Imprecise highest density region of a Gamma-Poisson predictive set.
    Bsa(BsaArgs),
    /// Monte-Carlo coverage of conformal prediction regions.
    Coverage(CoverageArgs),
    /// The 20 A / 30 B / 50 C worked example, checked against its fixture.
    Table1(Table1Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Transduce(_) => "transduce",
            Command::Possibility(_) => "possibility",
            Command::Region(_) => "region",
            Command::Credal(_) => "credal",
            Command::Bsa(_) => "bsa",
            Command::Coverage(_) => "coverage",
            Command::Table1(_) => "table1",
        }
    }
}

fn parse_measure(s: &str) -> Result<MeasureKind, String> {
    s.parse().map_err(|e: consonance_core::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Adjust {
    /// Apply the argmax lift only when the raw contour is not consonant.
    Auto,
    None,
    Prime,
    DoublePrime,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct TransduceArgs {
    /// Space file: `{"labels": [...]}` or `{"grid": {"lo", "hi", "num_points"}}`.
    #[arg(long)]
    pub space: PathBuf,
    /// CSV with a `y` column.
    #[arg(long)]
    pub data: PathBuf,
    /// `one-minus-emp`, `mean-abs` or `constant`.
    #[arg(long, value_parser = parse_measure)]
    pub psi: Option<MeasureKind>,
    #[arg(long, value_enum, default_value_t = Adjust::Auto)]
    pub adjust: Adjust,
    /// Write the contour JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct PossibilityArgs {
    #[arg(long)]
    pub contour: PathBuf,
    #[command(subcommand)]
    pub op: PossibilityOp,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum PossibilityOp {
    /// Upper probability of one event, or of every event.
    Upper {
        /// Comma-separated labels.
        #[arg(long)]
        event: Option<String>,
    },
    /// Lower probability of one event, or of every event.
    Lower {
        #[arg(long)]
        event: Option<String>,
    },
    /// Möbius inverse of the lower probability.
    Mass,
    /// Focal elements and whether they are nested.
    Focal,
    /// Brute-force k-alternating check of the upper probability.
    CheckAlt { k: usize },
    /// Brute-force k-monotone check of the lower probability.
    CheckMon { k: usize },
    /// The cloud `(γ, π)` equivalent to the contour.
    Cloud,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Cpr,
    Cut,
    Intersection,
}

impl From<KindArg> for RegionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Cpr => RegionKind::Cpr,
            KindArg::Cut => RegionKind::IhdrCut,
            KindArg::Intersection => RegionKind::IhdrIntersection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct RegionArgs {
    #[command(subcommand)]
    pub check: Option<RegionCheck>,
    #[arg(long)]
    pub contour: Option<PathBuf>,
    /// Significance level in `[0, 1]`, as a decimal or `num/den`.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, value_enum, default_value_t = KindArg::Cpr)]
    pub kind: KindArg,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum RegionCheck {
    /// Check that the conformal region and both IHDR constructions agree at
    /// every breakpoint, midpoint and extra level.
    Prop1 {
        #[arg(long)]
        contour: PathBuf,
        /// Extra comma-separated levels.
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Conformal regions of two nonconformity measures on the same data.
    Compare {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_measure)]
        psi1: MeasureKind,
        #[arg(long, value_parser = parse_measure)]
        psi2: MeasureKind,
        #[arg(long)]
        alpha: String,
    },
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CredalArgs {
    #[arg(long)]
    pub contour: PathBuf,
    #[command(subcommand)]
    pub op: CredalOp,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum CredalOp {
    /// Membership of a probability vector, exhaustively and through the
    /// alpha-cut criterion.
    Check {
        /// Comma-separated probabilities in label order.
        #[arg(long)]
        p: String,
    },
    /// Vertices of the credal set.
    Extremes,
    /// Lower entropy, in nats.
    Entropy,
    /// Random members of the credal set.
    Sample {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Barycentric plot coordinates for a three-outcome space.
    Ternary {
        /// CSV destination with columns x, y, label.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampled members to include alongside the vertices.
        #[arg(long, default_value_t = 0)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Extra point, labelled `p`.
        #[arg(long)]
        p: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct BsaArgs {
    /// JSON list of `{"a": shape, "b": rate}`, or `@path` to a file holding one.
    #[arg(long)]
    pub priors: String,
    /// CSV of counts with a `y` column.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub alpha: String,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CoverageArgs {
    /// A process description or a list of them.
    #[arg(long)]
    pub spec: PathBuf,
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub n: String,
    /// Comma-separated significance levels.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, value_parser = parse_measure)]
    pub psi: Option<MeasureKind>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct Table1Args {
    /// Seed for sampled credal members in the ternary export; without it
    /// only the vertices and the empirical pmf are exported.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// CSV destination for the ternary coordinates.
    #[arg(long)]
    pub ternary_out: Option<PathBuf>,
}

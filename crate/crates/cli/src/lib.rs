//! Command-line front end: argument parsing, file formats and reports.
//!
//! Every subcommand produces a [`Report`] carrying a JSON document, a human
//! table and a verdict. The binary prints one of the first two and turns the
//! verdict into the exit code.

pub mod args;
mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use consonance_core::value::parse_rational;
use consonance_core::Rational;
use num_traits::{One, Zero};
use serde_json::Value as Json;

pub use args::{Cli, Command, NumericMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Help or version text; not a failure.
    #[error("{0}")]
    Help(String),

    #[error("{0}")]
    UnknownFlag(String),

    #[error("{0}")]
    MissingInput(String),

    #[error("alpha = {0} is outside the admissible range")]
    AlphaOutOfRange(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] consonance_core::Error),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => EXIT_OK,
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::Io { path: path.into(), message: message.to_string() }
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        let text = e.render().to_string();
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(text),
            ErrorKind::UnknownArgument | ErrorKind::InvalidSubcommand => CliError::UnknownFlag(text),
            ErrorKind::MissingRequiredArgument
            | ErrorKind::MissingSubcommand
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => CliError::MissingInput(text),
            _ => CliError::Usage(text),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub json: bool,
    /// `None` defers to the space: rational for labels, float for grids.
    pub numeric: Option<NumericMode>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn subcommand(&self) -> &'static str {
        self.command.name()
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Json,
    pub text: String,
    /// `false` when a requested check failed.
    pub passed: bool,
}

/// Parses `argv` (including the program name) and checks the values clap
/// cannot: significance levels, seeds for randomized commands and the
/// numeric mode of fixed-label commands.
pub fn parse_args<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let mut inputs = Vec::new();
    let mut output = None;
    let mut seed = None;
    let mut numeric = cli.numeric;

    match &cli.command {
        Command::Transduce(a) => {
            inputs = vec![a.space.clone(), a.data.clone()];
            output = a.out.clone();
        }
        Command::Possibility(a) => inputs.push(a.contour.clone()),
        Command::Region(a) => match &a.check {
            Some(args::RegionCheck::Prop1 { contour, alphas }) => {
                if let Some(list) = alphas {
                    for alpha in list.split(',') {
                        unit_alpha(alpha)?;
                    }
                }
                inputs.push(contour.clone());
            }
            Some(args::RegionCheck::Compare { space, data, alpha, .. }) => {
                unit_alpha(alpha)?;
                inputs = vec![space.clone(), data.clone()];
            }
            None => {
                let alpha = a.alpha.as_deref().ok_or_else(|| missing("--alpha"))?;
                unit_alpha(alpha)?;
                inputs.push(a.contour.clone().ok_or_else(|| missing("--contour"))?);
            }
        },
        Command::Credal(a) => {
            inputs.push(a.contour.clone());
            match &a.op {
                args::CredalOp::Sample { seed: s, .. } => seed = Some(s.ok_or_else(|| missing("--seed"))?),
                args::CredalOp::Ternary { out, count, seed: s, .. } => {
                    output = Some(out.clone().ok_or_else(|| missing("--out"))?);
                    if *count > 0 {
                        seed = Some(s.ok_or_else(|| missing("--seed"))?);
                    }
                }
                _ => {}
            }
        }
        Command::Bsa(a) => {
            let alpha = unit_alpha(&a.alpha)?;
            if alpha.is_zero() || alpha.is_one() {
                return Err(CliError::AlphaOutOfRange(a.alpha.clone()));
            }
            inputs.extend(a.data.clone());
            if let Some(path) = a.priors.strip_prefix('@') {
                inputs.push(path.into());
            }
        }
        Command::Coverage(a) => {
            for alpha in a.alpha.split(',') {
                unit_alpha(alpha)?;
            }
            seed = Some(a.seed.ok_or_else(|| missing("--seed"))?);
            inputs.push(a.spec.clone());
            output = a.out.clone();
        }
        Command::Table1(a) => {
            if numeric == Some(NumericMode::Float) {
                return Err(CliError::Usage("table1 is computed in exact arithmetic only".into()));
            }
            numeric = Some(NumericMode::Rational);
            seed = a.seed;
            output = a.ternary_out.clone();
        }
    }

    Ok(RunConfig { json: cli.json, numeric, seed, inputs, output, command: cli.command })
}

fn missing(flag: &str) -> CliError {
    CliError::MissingInput(format!("missing required argument {flag}"))
}

/// Parses a level in `[0, 1]`.
pub(crate) fn unit_alpha(text: &str) -> CliResult<Rational> {
    let alpha = parse_rational(text).ok_or_else(|| CliError::Usage(format!("cannot read {text:?} as a number")))?;
    if alpha < Rational::zero() || alpha > Rational::one() {
        return Err(CliError::AlphaOutOfRange(text.trim().to_string()));
    }
    Ok(alpha)
}

/// Executes a parsed invocation and writes JSON or the human table to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<Report> {
    let report = commands::execute(cfg)?;
    let rendered = if cfg.json {
        serde_json::to_string_pretty(&report.json).expect("JSON values serialize") + "\n"
    } else {
        report.text.clone()
    };
    out.write_all(rendered.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
    Ok(report)
}

/// Full process behaviour minus the exit: returns the exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_args(argv).and_then(|cfg| run(&cfg, stdout));
    match result {
        Ok(report) if report.passed => EXIT_OK,
        Ok(_) => EXIT_CHECK_FAILED,
        Err(CliError::Help(text)) => {
            let _ = write!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let text = e.to_string();
            if text.starts_with("error:") {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = writeln!(stderr, "error: {text}");
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_takes_no_arguments() {
        let cfg = parse_args(["consonance", "table1"]).unwrap();
        assert_eq!(cfg.subcommand(), "table1");
        assert_eq!(cfg.numeric, Some(NumericMode::Rational));
        assert_eq!(cfg.seed, None);
        assert!(cfg.inputs.is_empty());
        assert!(!cfg.json);
    }

    #[test]
    fn alpha_outside_the_unit_interval_is_a_usage_error() {
        let err = parse_args(["consonance", "region", "--alpha", "1.5"]).unwrap_err();
        assert!(matches!(err, CliError::AlphaOutOfRange(ref a) if a == "1.5"), "{err:?}");
        assert_eq!(err.exit_code(), EXIT_USAGE);
        let err = parse_args(["consonance", "region", "--contour", "c.json", "--alpha=-1/10"]).unwrap_err();
        assert!(matches!(err, CliError::AlphaOutOfRange(_)));
    }

    #[test]
    fn coverage_needs_a_spec() {
        let err = parse_args(["consonance", "coverage", "--n", "10", "--alpha", "0.1", "--seed", "1"]).unwrap_err();
        assert!(matches!(err, CliError::MissingInput(_)), "{err:?}");
        assert_eq!(err.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn randomized_commands_need_a_seed() {
        let err =
            parse_args(["consonance", "coverage", "--spec", "s.json", "--n", "10", "--alpha", "0.1"]).unwrap_err();
        assert!(matches!(err, CliError::MissingInput(ref m) if m.contains("--seed")));
        let err = parse_args(["consonance", "credal", "--contour", "c.json", "sample", "--count", "3"]).unwrap_err();
        assert!(matches!(err, CliError::MissingInput(_)));
        let ok = parse_args(["consonance", "credal", "--contour", "c.json", "sample", "--count", "3", "--seed", "9"]);
        assert_eq!(ok.unwrap().seed, Some(9));
    }

    #[test]
    fn unknown_flags_are_reported() {
        let err = parse_args(["consonance", "table1", "--bogus"]).unwrap_err();
        assert!(matches!(err, CliError::UnknownFlag(_)), "{err:?}");
    }

    #[test]
    fn bsa_alpha_is_open_interval() {
        for alpha in ["0", "1"] {
            let err = parse_args(["consonance", "bsa", "--priors", "[]", "--alpha", alpha]).unwrap_err();
            assert!(matches!(err, CliError::AlphaOutOfRange(_)));
        }
    }

    #[test]
    fn worked_example_rejects_float_mode() {
        let err = parse_args(["consonance", "--numeric", "float", "table1"]).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn help_is_not_an_error() {
        let err = parse_args(["consonance", "--help"]).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_OK);
    }
}

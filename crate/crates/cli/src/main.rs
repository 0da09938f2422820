//! Command-line surface for the Cantor-measure frequency toolkit.
//!
//! Subcommands: `analyze` a system, generate a `tree` labeling, list its
//! `spectrum`, `verify` a frequency list, export `muhat` transform values,
//! and run the exact-versus-numeric `oracle` sweeps.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input, 3
//! unsupported system.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use cantor_spectra::orthogonality::OrthogonalityError;
use cantor_spectra::trees::TreesError;
use cantor_spectra::{CantorSystem, SystemError};

pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_UNSUPPORTED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cantor-spectra",
    version,
    about = "Orthogonal frequency sets of self-similar Cantor measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SystemArgs {
    /// Prime p of the contraction base N = p^alpha
    #[arg(short = 'p', long)]
    p: Option<u64>,

    /// Exponent alpha of the contraction base N = p^alpha
    #[arg(short = 'a', long)]
    alpha: Option<u32>,

    /// Comma-separated digit set, e.g. -D 0,2,4,6
    #[arg(
        short = 'D',
        long = "digits",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    digits: Option<Vec<i64>>,

    /// JSON file with fields "p", "alpha", "D"; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
struct ConfigFile {
    p: Option<u64>,
    alpha: Option<u32>,
    #[serde(rename = "D")]
    digits: Option<Vec<i64>>,
}

impl SystemArgs {
    fn is_empty(&self) -> bool {
        self.p.is_none() && self.alpha.is_none() && self.digits.is_none() && self.config.is_none()
    }

    fn resolve(&self) -> Result<CantorSystem, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::validation(format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str::<ConfigFile>(&text).map_err(|e| {
                    CliError::validation(format!("cannot parse {}: {e}", path.display()))
                })?
            }
            None => ConfigFile::default(),
        };
        let p = self
            .p
            .or(file.p)
            .ok_or_else(|| CliError::validation("missing prime: pass -p or a config file"))?;
        let alpha = self
            .alpha
            .or(file.alpha)
            .ok_or_else(|| CliError::validation("missing exponent: pass -a or a config file"))?;
        let digits =
            self.digits.clone().or(file.digits).ok_or_else(|| {
                CliError::validation("missing digit set: pass -D or a config file")
            })?;
        Ok(CantorSystem::new(p, alpha, &digits)?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Dot,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Report a system: base, digit set, exponent set T, hypothesis flags,
    /// and the number of admissible child-label sets
    Analyze {
        #[command(flatten)]
        system: SystemArgs,
        /// Stop counting admissible label sets past this many
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        limit: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a spectral labeling of the digit tree (canonical, or picked from
    /// the enumeration order with --index)
    Tree {
        #[command(flatten)]
        system: SystemArgs,
        /// Number of explicitly labeled levels
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        /// 0-based position in the enumeration order (0 is canonical)
        #[arg(long)]
        index: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the integers encoded by a labeling, with their digit expansions
    Spectrum {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        #[arg(long)]
        index: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a frequency list for orthogonality and the branching bound
    Verify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integer frequencies to test
        #[arg(required = true, allow_hyphen_values = true)]
        frequencies: Vec<String>,
    },
    /// Evaluate the truncated transform on a grid and export CSV
    Muhat {
        #[command(flatten)]
        system: SystemArgs,
        /// Grid specification lo:hi:step
        #[arg(long)]
        grid: String,
        /// Number of product factors to evaluate
        #[arg(short = 'J', long = "truncation", default_value_t = 40, value_parser = clap::value_parser!(u32).range(1..))]
        truncation: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact-versus-numeric consistency sweeps and the ratio-closed
    /// root-set brute force
    Oracle {
        #[command(flatten)]
        system: SystemArgs,
        /// Sweep the transform zero test over |k| <= bound
        #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
        bound: u64,
        /// Comma-separated beta exponents for the root-set check
        /// (default: all subsets of {1,2,3} of size at most 2)
        #[arg(long)]
        betas: Option<String>,
        /// Worker threads for the transform sweep
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_UNSUPPORTED,
            message: message.into(),
        }
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<TreesError> for CliError {
    fn from(e: TreesError) -> Self {
        match e {
            TreesError::UnsupportedSystem => CliError::unsupported(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<OrthogonalityError> for CliError {
    fn from(e: OrthogonalityError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<cantor_spectra::numeric::NumericError> for CliError {
    fn from(e: cantor_spectra::numeric::NumericError) -> Self {
        CliError::validation(e.to_string())
    }
}

/// Write to --out when given, otherwise to stdout.
pub fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze {
            system,
            limit,
            format,
            out,
        } => commands::analyze(&system.resolve()?, limit as usize, format, &out),
        Command::Tree {
            system,
            depth,
            index,
            format,
            out,
        } => commands::tree(&system.resolve()?, depth, index, format, &out),
        Command::Spectrum {
            system,
            depth,
            index,
            format,
            out,
        } => commands::spectrum(&system.resolve()?, depth, index, format, &out),
        Command::Verify {
            system,
            depth,
            format,
            out,
            frequencies,
        } => commands::verify(&system.resolve()?, depth, &frequencies, format, &out),
        Command::Muhat {
            system,
            grid,
            truncation,
            format,
            out,
        } => commands::muhat(&system.resolve()?, &grid, truncation, format, &out),
        Command::Oracle {
            system,
            bound,
            betas,
            jobs,
            out,
        } => {
            let resolved = if system.is_empty() {
                None
            } else {
                Some(system.resolve()?)
            };
            commands::oracle(resolved, bound, betas.as_deref(), jobs as usize, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

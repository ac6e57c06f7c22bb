//! `bfree`: batch reports on B-free sequences from a family spec.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Parser)]
#[command(name = "bfree", version, about = "Sets of multiples, B-free sequences and their Toeplitz subsystems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Family spec (TOML, or JSON when the extension is .json)
    #[arg(long)]
    pub family: PathBuf,

    /// Output format; `text` only applies to `eta`
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Seed for sampled checks
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockMode {
    Eta,
    Phi,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the indicator of F_B on an integer range
    Eta {
        #[command(flatten)]
        common: Common,
        /// Inclusive range `lo..hi`
        #[arg(long, allow_hyphen_values = true)]
        range: String,
    },
    /// Run the structure pipeline: A_∞, B*, E, regularity, diagnostics
    Structure {
        #[command(flatten)]
        common: Common,
        /// Filtration thresholds t_j for S_j = B ∩ [1, t_j]
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<u64>>,
        /// Regularity tolerance, e.g. `0`, `1/1000`, `0.001`
        #[arg(long, default_value = "0")]
        tolerance: String,
        /// Truncation K for tautness and tail bounds
        #[arg(long, default_value_t = 1000)]
        truncation: u64,
    },
    /// Toeplitz certificates for 1_E on a range of positions
    Toeplitz {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        positions: String,
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<u64>>,
    },
    /// Boundary-measure filtration and, optionally, Mirsky bounds of a block
    Measure {
        #[command(flatten)]
        common: Common,
        /// Filtration thresholds t_j for S_j = B ∩ [1, t_j]
        #[arg(long, value_delimiter = ',')]
        filtration: Option<Vec<u64>>,
        #[arg(long, default_value = "0")]
        tolerance: String,
        /// 0/1 word whose Mirsky measure is bracketed (uses the last S_j)
        #[arg(long)]
        block: Option<String>,
        /// Position of the first letter of `--block`
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        offset: i64,
    },
    /// Realize φ(Δ(anchor)) with flipped positions inside U_S(Δ(anchor))
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        anchor: i64,
        #[arg(long)]
        radius: u64,
        /// Positions in [−N, N] to turn to 0
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        flips: Vec<i64>,
        /// Protected members S
        #[arg(long, value_delimiter = ',')]
        support: Vec<u64>,
        #[arg(long, default_value_t = bfree::heredity::WITNESS_SCAN_LIMIT)]
        scan_limit: u64,
        #[arg(long, default_value_t = bfree::heredity::DEFAULT_TAIL_AUDIT)]
        tail_audit: u64,
    },
    /// Block languages of X_η (empirical) and X_φ (cylinder bound)
    Blocks {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        radius: u64,
        #[arg(long, value_enum, default_value = "both")]
        mode: BlockMode,
        /// Empirical range R: factors of η on [−R, R]
        #[arg(long, default_value_t = 10_000)]
        range: u64,
        /// Cylinder support S (default: the last standard filtration set)
        #[arg(long, value_delimiter = ',')]
        support: Vec<u64>,
    },
    /// Finite-data diagnostics: primitivity, certificates, tautness, tails, heredity
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        truncation: u64,
        /// Random subsets S on which A_∞ spot checks run
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Also run the hereditary audit at this radius
        #[arg(long)]
        audit_radius: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        audit_range: u64,
        #[arg(long, default_value_t = 1_000_000)]
        audit_max_range: u64,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or spec: exit code 2.
    Usage(String),
    Compute(bfree::Error),
}

impl From<bfree::Error> for CliError {
    fn from(e: bfree::Error) -> Self {
        CliError::Compute(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use bfree::Error::*;
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(e) => match e {
                CeilingExceeded { .. } | SearchExhausted { .. } | EnumerationCeiling { .. } | TermExplosion { .. } => 1,
                _ => 2,
            },
        }
    }

    fn kind(&self) -> &'static str {
        use bfree::Error::*;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Compute(e) => match e {
                Incompatible { .. } => "incompatible",
                CeilingExceeded { .. } => "ceiling_exceeded",
                SearchExhausted { .. } => "search_exhausted",
                EnumerationCeiling { .. } => "enumeration_ceiling",
                TermExplosion { .. } => "term_explosion",
                CertificateAuditFailure { .. } => "certificate_audit_failure",
                CertificateMissing { .. } => "certificate_missing",
                FlipNotAllowed { .. } => "flip_not_allowed",
                Precondition(_) => "precondition",
                InvalidFamily(_) => "invalid_family",
                Parse(_) => "parse",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Compute(e) => e.to_string(),
        }
    }
}

/// What a command produced, and the exit code it asks for.
pub struct Output {
    pub body: String,
    pub code: u8,
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Eta { common, range } => commands::eta(&common, &range),
        Command::Structure {
            common,
            thresholds,
            tolerance,
            truncation,
        } => commands::structure(&common, thresholds, &tolerance, truncation),
        Command::Toeplitz {
            common,
            positions,
            thresholds,
        } => commands::toeplitz(&common, &positions, thresholds),
        Command::Measure {
            common,
            filtration,
            tolerance,
            block,
            offset,
        } => commands::measure(&common, filtration, &tolerance, block.as_deref(), offset),
        Command::Witness {
            common,
            anchor,
            radius,
            flips,
            support,
            scan_limit,
            tail_audit,
        } => commands::witness(&common, anchor, radius, &flips, &support, scan_limit, tail_audit),
        Command::Blocks {
            common,
            radius,
            mode,
            range,
            support,
        } => commands::blocks(&common, radius, mode, range, &support),
        Command::Diagnose {
            common,
            truncation,
            samples,
            audit_radius,
            audit_range,
            audit_max_range,
        } => commands::diagnose(&common, truncation, samples, audit_radius, audit_range, audit_max_range),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.body);
            ExitCode::from(out.code)
        }
        Err(e) => {
            let diag = json!({
                "error": e.kind(),
                "message": e.message(),
                "exit_code": e.exit_code(),
            });
            println!("{}", serde_json::to_string_pretty(&diag).unwrap());
            eprintln!("bfree: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

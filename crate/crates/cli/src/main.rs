//! `halphen`: evaluation, integration and verification commands for the
//! Darboux–Halphen system. Every command writes a JSON (default) or CSV
//! report and exits with 0 when all residuals are within tolerance, 1 when
//! some residual exceeds it, 2 on usage errors and 3 on numeric failure.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use report::{render_json, Outcome, RunConfig};

const EXIT_RESIDUAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "halphen", version, about = "Darboux–Halphen system toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Series truncation order.
    #[arg(long, global = true)]
    pub order: Option<u32>,
    /// Tolerance; each command has its own default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Modular argument `RE,IM`; may be repeated.
    #[arg(long, global = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub tau: Vec<Complex64>,
    /// Start of a real parameter range.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// End of a real parameter range.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = halphen::checks::DEFAULT_SEED)]
    pub seed: u64,
    /// Number of random samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Darboux–Halphen system.
    #[command(subcommand)]
    Dh(DhCmd),
    /// Exact q-series.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Exact and numeric identity checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Self-dual Bianchi IX reductions.
    #[command(subcommand)]
    Bianchi(BianchiCmd),
    /// Three-dimensional Frobenius manifolds and the Chazy equation.
    #[command(subcommand)]
    Frobenius(FrobeniusCmd),
}

#[derive(Subcommand, Debug)]
pub enum DhCmd {
    /// Integrate from the theta solution at `--tau0` to `--tau1` and compare
    /// with the theta solution there.
    Integrate {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,1.2")]
        tau0: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,2")]
        tau1: Complex64,
    },
    /// Theta-function solution at each `--tau`.
    Theta,
}

#[derive(Subcommand, Debug)]
pub enum SeriesCmd {
    /// Normalized Eisenstein series `E_k`, k ∈ {2, 4, 6}.
    Eisenstein {
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Jacobi theta series in `w = q^{1/8}`.
    Theta {
        #[arg(long, default_value_t = 3)]
        which: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Ramanujan's relations for E2, E4, E6, exactly.
    Ramanujan,
    /// Chazy equation for (πi/3)E2: exact series and numeric jets.
    Chazy,
    /// Gauss–Manin contraction with the Darboux–Halphen field at random
    /// rational points.
    GaussManin,
    /// The Darboux orthogonality condition at random rational points.
    Darboux,
    /// Conjugacy of the Darboux–Halphen and Ramanujan fields, exactly at
    /// random rational points and numerically along the theta solution.
    Conjugacy,
    /// Coupled Ω–A field with A = Ω against the classical Ω field.
    BianchiReduction,
}

#[derive(Subcommand, Debug)]
pub enum BianchiCmd {
    /// Integrate the theta-coefficient Ω system on `[t0, t1]`.
    Flow {
        /// Initial Ω as `a,b,c`; defaults to the flat family at `t0`.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        omega: Option<[f64; 3]>,
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        q0: f64,
    },
    /// Profile of the Ricci-flat family with substitution residuals.
    FlatFamily {
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        q0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// The Λ-constraint on the flat family, plus the Tod–Hitchin family at
    /// the given characteristics.
    VerifyConstraint {
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        q0: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.2,0")]
        p: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.5,0.1")]
        q: Complex64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        lambda: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum FrobeniusCmd {
    /// WDVV residual of the Chazy potential built from (πi/3)E2.
    Wdvv {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x: f64,
    },
    /// Same as `verify chazy`.
    Chazy,
    /// Roots of the Chazy cubic against the theta solution.
    Cubic,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    match parse_floats(s)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err("expected RE,IM".into()),
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    match parse_floats(s)?.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err("expected A,B,C".into()),
    }
}

fn emit(common: &Common, config: &RunConfig, outcome: &Outcome) -> std::io::Result<()> {
    let text = match common.format {
        Format::Json => render_json(config, outcome),
        Format::Csv => outcome.csv.clone(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok((config, outcome)) => {
            if let Err(e) = emit(&cli.common, &config, &outcome) {
                eprintln!("error: writing report: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RESIDUAL)
            }
        }
        Err(e @ commands::CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mopuc::{Backend, MultiIndex, TolerancePolicy};

mod commands;
mod output;

use commands::CliError;

/// Multiple orthogonal polynomials on the unit circle: moments, recurrence
/// coefficients, identity checks and Christoffel–Darboux evaluation.
#[derive(Debug, Parser)]
#[command(name = "mopuc", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Measure system JSON file.
    #[arg(long, global = true)]
    pub system: Option<PathBuf>,
    #[arg(long, global = true, default_value = "exact")]
    pub backend: Backend,
    /// Residual tolerance for identity checks on the float backend.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Absolute threshold below which a float is treated as zero.
    #[arg(long, global = true)]
    pub zero_eps: Option<f64>,
    /// Reciprocal condition threshold for float normality.
    #[arg(long, global = true)]
    pub rcond_min: Option<f64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl Global {
    pub fn policy(&self) -> Result<TolerancePolicy, CliError> {
        let d = TolerancePolicy::default();
        let p = TolerancePolicy::new(
            self.zero_eps.unwrap_or(d.zero_eps),
            self.tol.unwrap_or(d.residual_tol),
            self.rcond_min.unwrap_or(d.rcond_min),
        )?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trigonometric moments of one measure.
    Moments {
        /// Measure number, starting at 1.
        #[arg(long, default_value_t = 1)]
        measure: usize,
        /// Inclusive range `a..b`.
        #[arg(long, allow_hyphen_values = true, default_value = "0..4")]
        range: String,
    },
    /// Recurrence coefficients over the box `0 <= n <= max`.
    Coeffs {
        #[arg(long)]
        max: MultiIndex,
    },
    /// Every identity check over a box or an index list.
    Verify {
        #[arg(long, conflicts_with = "index", required_unless_present = "index")]
        max: Option<MultiIndex>,
        /// Repeatable; e.g. `--index 1,1 --index 2,0`.
        #[arg(long)]
        index: Vec<MultiIndex>,
    },
    /// Christoffel–Darboux evaluation along a lattice path.
    Cd {
        /// `round-robin`, `stepline`, `random`, `admissible` (seeded walk through
        /// indices meeting the formula's normality hypothesis), or explicit
        /// 1-based steps such as `1,2,2`.
        #[arg(long, default_value = "round-robin")]
        path: String,
        /// Path length.
        #[arg(long = "N", visible_alias = "len")]
        len: Option<usize>,
        /// Endpoint for `stepline`.
        #[arg(long)]
        target: Option<MultiIndex>,
        /// `random:K` for K seeded point pairs, or `circle` for z = zeta on the unit circle.
        #[arg(long, default_value = "random:8")]
        points: String,
        /// Also compare both sides as coefficient arrays (exact backend).
        #[arg(long)]
        bivariate: bool,
    },
    /// Normality verdicts and determinants over a box.
    NormalityMap {
        #[arg(long)]
        max: MultiIndex,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

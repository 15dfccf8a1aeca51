//! `supersample` command-line front end.

mod density;
mod error;
mod model;
mod output;
mod sample;
mod sparsify;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use supersample::gaussian::Measurement;

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "supersample",
    version,
    about = "Sample measurement outcomes of superposition states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the outcome density on a grid.
    Density(DensityArgs),
    /// Draw samples by rejection and write samples, histogram and summary.
    Sample(SampleArgs),
    /// Run verification sweeps and write a JSON report.
    Verify(VerifyArgs),
    /// Replace a Gaussian decomposition by a sparse one.
    Sparsify(SparsifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasurementArg {
    Het,
    Hom,
}

impl From<MeasurementArg> for Measurement {
    fn from(m: MeasurementArg) -> Self {
        match m {
            MeasurementArg::Het => Measurement::Heterodyne,
            MeasurementArg::Hom => Measurement::Homodyne,
        }
    }
}

/// `MIN:MAX:STEP`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts.as_slice() else {
            return Err(format!("expected MIN:MAX:STEP, got `{s}`"));
        };
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        let g = Grid {
            min: parse(min)?,
            max: parse(max)?,
            step: parse(step)?,
        };
        if !(g.step > 0.0) || !(g.max >= g.min) || !g.min.is_finite() || !g.max.is_finite() {
            return Err(format!("grid `{s}` needs MIN <= MAX and STEP > 0"));
        }
        if (g.max - g.min) / g.step > 1e7 {
            return Err(format!("grid `{s}` has too many points"));
        }
        Ok(g)
    }
}

#[derive(clap::Args)]
pub struct DensityArgs {
    /// Model document (JSON).
    #[arg(long)]
    pub model: PathBuf,
    /// Measurement for Gaussian models; defaults to het, or hom for GKP.
    #[arg(long, value_enum)]
    pub measurement: Option<MeasurementArg>,
    /// Grid per axis as MIN:MAX:STEP; heterodyne grids are in Re β × Im β.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub measurement: Option<MeasurementArg>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Failure probability of the whole run.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Trials allowed per sample; overrides the budget derived from --delta.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub bin_width: f64,
    /// Output directory for samples.csv, histogram.csv and summary.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Pinching,
    Mixture,
    Reduction,
    Gaussian,
    Discrete,
}

#[derive(clap::Args)]
pub struct VerifyArgs {
    /// Which sweeps to run. Defaults to all, or to none when --model is given.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Also check this model: POVM validity and the pointwise bound.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per instance in the reduction check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Output JSON report; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the sparsified model document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Density(a) => density::run(&a),
        Command::Sample(a) => sample::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Sparsify(a) => sparsify::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

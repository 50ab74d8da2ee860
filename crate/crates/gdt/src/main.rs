use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};

use gdt::cli::{cmd_bench, cmd_cluster, cmd_segment, Mode, RunConfig};
use gdt::data::ColumnSpec;

/// Density-topology clustering over CSV data and images.
#[derive(Debug, Parser)]
#[command(name = "gdt", version, about)]
struct Cli {
    /// What to run: cluster a CSV, segment an image, or benchmark scaling.
    #[arg(long, value_enum, default_value_t = ModeArg::Cluster)]
    mode: ModeArg,

    /// Input file: a CSV for cluster mode, a PNG for segment mode.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Directory for output artifacts (created if missing).
    #[arg(long, default_value = "gdt-out")]
    output_dir: PathBuf,

    /// Neighborhood size for density estimation.
    #[arg(long, default_value_t = 15)]
    kd: usize,

    /// Neighborhood size for cluster growing.
    #[arg(long, default_value_t = 15)]
    ks: usize,

    /// Edge pruning threshold in [0, 1]; larger keeps fewer edges.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,

    /// Relative-density noise threshold in [0, 1]; 0 drops nothing.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,

    /// Ground-truth column (header name or 0-based index); enables metrics.
    #[arg(long)]
    label_column: Option<ColumnSpec>,

    /// Seed for generated benchmark data.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Z-score feature columns before clustering.
    #[arg(long, default_value_t = false)]
    standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cluster,
    Segment,
    Bench,
}

impl From<ModeArg> for Mode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Cluster => Mode::Cluster,
            ModeArg::Segment => Mode::Segment,
            ModeArg::Bench => Mode::Bench,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    if matches!(cli.mode, ModeArg::Cluster | ModeArg::Segment) && cli.input.is_none() {
        eprintln!("error: --input is required for {:?} mode", cli.mode);
        return ExitCode::from(1);
    }

    let config = RunConfig {
        mode: cli.mode.into(),
        input: cli.input,
        output_dir: cli.output_dir,
        k_d: cli.kd,
        k_s: cli.ks,
        alpha: cli.alpha,
        epsilon: cli.epsilon,
        seed: cli.seed,
        label_column: cli.label_column,
        standardize: cli.standardize,
    };

    let outcome = match config.mode {
        Mode::Cluster => cmd_cluster(&config).map(|_| ()),
        Mode::Segment => cmd_segment(&config).map(|_| ()),
        Mode::Bench => cmd_bench(&config).map(|_| ()),
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

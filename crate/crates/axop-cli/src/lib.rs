//! Command-line workflows for approximate-operator synthesis,
//! characterization, and design-space exploration.
//!
//! The binary wires YAML run configurations to the `axop` library: operator
//! generation, batch characterization with CSV results, sampling, operator-
//! and application-level exploration, RTL emission, external PPA import,
//! surrogate fitting, and plot-data export. Exit codes: 0 success, 1 usage
//! error, 2 data error, 3 internal invariant violation.

pub mod commands;
pub mod config;
pub mod library;
pub mod report;
pub mod serial;
pub mod surrogate_io;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "axop", version, about = "Approximate operator synthesis and DSE toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate an accurate operator netlist and report its config length
    Generate {
        /// Operator kind: uadd or smul-bw
        kind: String,
        /// First operand width in bits
        width_a: usize,
        /// Second operand width (defaults to width_a)
        width_b: Option<usize>,
        /// Output netlist path (defaults to <name>.netlist)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Characterize a batch of configs into a results CSV
    Characterize {
        /// YAML run configuration
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Print a batch of sampled configs
    Sample {
        /// Sampling kind: random, patterned, or special
        #[arg(long)]
        kind: String,
        /// Config length L
        #[arg(short = 'L', long)]
        length: usize,
        /// Number of configs
        #[arg(short = 'n', long)]
        count: usize,
        /// Window length for patterned sampling
        #[arg(long)]
        window: Option<usize>,
        /// Master seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run design-space exploration and write front, log, and hypervolume
    Dse {
        /// YAML run configuration
        #[arg(short, long)]
        config: PathBuf,
        /// Additional result CSVs to compare hypervolumes against
        #[arg(long)]
        compare: Vec<PathBuf>,
    },
    /// Re-characterize predicted points and report drift
    Validate {
        /// YAML run configuration
        #[arg(short, long)]
        config: PathBuf,
        /// Results CSV with the points to validate
        #[arg(long)]
        points: PathBuf,
    },
    /// Application-level evaluation and exploration
    AppEval {
        /// YAML run configuration (with a task section)
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Emit structural Verilog for a serialized netlist
    EmitRtl {
        /// Netlist file written by generate
        #[arg(long)]
        netlist: PathBuf,
        /// Emission mode: generic or vendor
        #[arg(long, default_value = "generic")]
        mode: String,
        /// Output path (defaults to the netlist path with .v)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Parse and summarize an external PPA measurement CSV
    ImportPpa {
        /// Measurement CSV (config,lut,carry,cpd_ns,power_mw,pdp)
        #[arg(long)]
        file: PathBuf,
    },
    /// Export tidy plot data (and an optional SVG scatter) from result CSVs
    Plotdata {
        /// Result CSVs sharing one schema
        results: Vec<PathBuf>,
        /// Tidy CSV output path
        #[arg(short, long)]
        out: PathBuf,
        /// Optional SVG scatter output path
        #[arg(long)]
        svg: Option<PathBuf>,
        /// X-axis metric for the scatter
        #[arg(long, default_value = "pdp_proxy")]
        x: String,
        /// Y-axis metric for the scatter
        #[arg(long, default_value = "avg_abs_err")]
        y: String,
    },
    /// Fit a config-to-metric surrogate from a results CSV
    FitSurrogate {
        /// Results CSV with the training data
        #[arg(long)]
        results: PathBuf,
        /// Target metric column
        #[arg(long)]
        target: String,
        /// Feature mode: bits_linear or bits_pairwise
        #[arg(long, default_value = "bits_linear")]
        features: String,
        /// Ridge regularization strength
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Split seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Model CSV output path
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Runs one parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Generate {
            kind,
            width_a,
            width_b,
            out,
        } => commands::cmd_generate(&kind, width_a, width_b, out.as_deref()),
        Command::Characterize { config } => commands::cmd_characterize(&config).map(|_| ()),
        Command::Sample {
            kind,
            length,
            count,
            window,
            seed,
        } => commands::cmd_sample(&kind, length, count, window, seed).map(|_| ()),
        Command::Dse { config, compare } => commands::cmd_dse(&config, &compare).map(|_| ()),
        Command::Validate { config, points } => {
            commands::cmd_validate(&config, &points).map(|_| ())
        }
        Command::AppEval { config } => commands::cmd_app_eval(&config).map(|_| ()),
        Command::EmitRtl { netlist, mode, out } => {
            commands::cmd_emit_rtl(&netlist, &mode, out.as_deref()).map(|_| ())
        }
        Command::ImportPpa { file } => commands::cmd_import_ppa(&file).map(|_| ()),
        Command::Plotdata {
            results,
            out,
            svg,
            x,
            y,
        } => commands::cmd_plotdata(&results, &out, svg.as_deref(), &x, &y),
        Command::FitSurrogate {
            results,
            target,
            features,
            lambda,
            seed,
            out,
        } => commands::cmd_fit_surrogate(&results, &target, &features, lambda, seed, &out)
            .map(|_| ()),
    };
    match result {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
    }
}

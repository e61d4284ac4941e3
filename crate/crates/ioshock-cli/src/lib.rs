//! Command-line front end: ingest IO tables, compute statistics, run shock
//! simulations, and export plot-ready reports.
//!
//! # Subcommands
//!
//! * `validate <INPUTS>...`: parse each table, report the production
//!   identity residuals, exit nonzero on any failure.
//! * `stats <INPUTS>... --out DIR`: topology statistics and centrality.
//! * `simulate <INPUTS>... --model {1|2|3} --out DIR`: shock sweeps.
//! * `report --out DIR`: rebuild aggregate exports from stored
//!   `report.json` files.
//!
//! Every flag can also come from a TOML config file (`--config FILE`);
//! command-line flags win over config values.
//!
//! # Output tree
//!
//! ```text
//! <out>/
//!   stats/
//!     countries.csv                country-level statistics, one row each
//!     <country>/nodes.csv          per-sector statistics
//!     <country>/nodes.json         same, nested (format json/both)
//!   <country>/model<M>/<params>/   params = f<f>_c<c> or shock_<size>
//!     report.json                  nested per-country report (schema v1)
//!     seeds.csv                    seed,label,size,status
//!     ccdf.csv                     size,fraction  (P(size >= k))
//!     delta_x.csv                  model 1 only: production changes
//!   summary.csv                    one row per country and parameter point
//!   triggers/model<M>_<params>.csv largest/smallest avalanche triggers
//!   cross_country/model<M>_<params>.csv         per-sector aggregation
//!   cross_country/model<M>_<params>.correlation.json
//! ```
//!
//! # Stable column orders
//!
//! * `countries.csv`: country, year, sectors, isolated, density,
//!   bilateral_density, diameter, average_path_length, path_mode,
//!   degree_assortativity, strength_assortativity, annd_degree_correlation,
//!   anns_strength_correlation. Undefined statistics are written as `NA`.
//! * `nodes.csv`: sector, label, isolated, self_loop, in_degree, out_degree,
//!   in_strength, out_strength, annd, anns, hub, authority.
//! * `summary.csv`: country, model, f, c, alpha, shock_size, mean_size, cov,
//!   max_size, max_triggers, min_size, min_triggers, failed_seeds, then any
//!   metadata passthrough columns in their file order.
//! * `cross_country/*.csv`: label, mean_size, stderr_size, mean_log_hub,
//!   hub_zero_countries, mean_log_authority, authority_zero_countries,
//!   countries.
//!
//! Outputs contain no timestamps unless `--timestamp` is given, so identical
//! configurations and inputs produce byte-identical output trees.
//!
//! # Exit codes
//!
//! 0 success; 2 configuration or usage errors; 3 data errors (malformed or
//! inconsistent tables, mismatched classifications); 4 numerical failures
//! (singular systems, non-convergence); 5 I/O errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod config;

pub use commands::{cmd_report, cmd_simulate, cmd_stats, cmd_validate};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Table {
        path: PathBuf,
        source: ioshock::iotable::TableError,
    },
    #[error("{0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Table { .. } | CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ioshock",
    version,
    about = "Input-output network statistics and shock-diffusion simulations"
)]
pub struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate input tables and report consistency residuals.
    Validate(ValidateArgs),
    /// Compute topology statistics and centrality exports.
    Stats(StatsArgs),
    /// Run shock-diffusion sweeps and export avalanche reports.
    Simulate(SimulateArgs),
    /// Rebuild aggregate exports from stored report files.
    Report(ReportArgs),
}

#[derive(Debug, Args, Default)]
pub struct ValidateArgs {
    /// Table CSV files to check.
    #[arg(value_name = "INPUTS")]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct StatsArgs {
    /// Table CSV files, one per country.
    #[arg(value_name = "INPUTS")]
    pub inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Export format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Compute diameter and average path length on the undirected skeleton.
    #[arg(long)]
    pub undirected_paths: bool,
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    /// Table CSV files, one per country.
    #[arg(value_name = "INPUTS")]
    pub inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Export format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Diffusion model: 1 demand shock, 2 link cascade, 3 production cascade.
    #[arg(long)]
    pub model: Option<u8>,
    /// Link-reduction fraction; repeat to build a parameter grid paired
    /// with --c by position.
    #[arg(long = "f", value_name = "F")]
    pub f: Vec<f64>,
    /// Capacity-threshold share; repeat to build a parameter grid paired
    /// with --f by position.
    #[arg(long = "c", value_name = "C")]
    pub c: Vec<f64>,
    /// Final-demand shock size (model 1).
    #[arg(long, value_name = "SIZE")]
    pub shock_size: Option<f64>,
    /// Only simulate these seed sectors (by label); repeatable.
    #[arg(long = "seed", value_name = "LABEL")]
    pub seeds: Vec<String>,
    /// Per-country metadata CSV whose columns are passed through to
    /// summary.csv.
    #[arg(long, value_name = "FILE")]
    pub metadata: Option<PathBuf>,
    /// Record a generation timestamp in JSON reports (off by default so
    /// reruns are byte-identical).
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Args, Default)]
pub struct ReportArgs {
    /// Directory holding simulate outputs (report.json files).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Per-country metadata CSV passed through to summary.csv.
    #[arg(long, value_name = "FILE")]
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(&self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(&self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

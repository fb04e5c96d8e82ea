//! `era`: ingest rollup risk data and incident records, simulate failure
//! scenarios, and assemble the analysis report.
//!
//! Exit codes: 0 success, 2 input error, 3 schema error, 4 scenario error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{builder::BoolishValueParser, Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "era", version, about = "Ethical risk analysis for Layer-2 rollups")]
struct Cli {
    /// Count `indirect` roles as held when placing stakeholders in fields.
    #[arg(long, global = true, env = "ERA_STRICT_ROLES", value_parser = BoolishValueParser::new(), default_value = "0")]
    strict_roles: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flag per-project risks in a snapshot and aggregate prevalence.
    IngestSnapshot(SnapshotArgs),
    /// Print every leaf path of a snapshot with counts and samples.
    ExploreSchema {
        #[arg(long)]
        snapshot: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parse, deduplicate and classify incident records.
    IngestIncidents {
        #[arg(long)]
        incidents: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare hazard prevalence with incident history.
    CrossValidate(CrossArgs),
    /// Run a simulation scenario and write its trace and metrics.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Assemble the full report from any available inputs.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Directory for output files; created if missing.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
struct SnapshotArgs {
    #[arg(long)]
    snapshot: PathBuf,
    /// Flagging ruleset; the bundled one is used when absent.
    #[arg(long)]
    ruleset: Option<PathBuf>,
    /// Layout of the project collection.
    #[arg(long, default_value = "normalized")]
    schema: String,
    /// Dot path of the project collection.
    #[arg(long, default_value = "projects")]
    root: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct CrossArgs {
    /// Prevalence JSON written by `ingest-snapshot`.
    #[arg(long, required_unless_present = "snapshot")]
    prevalence: Option<PathBuf>,
    /// Distribution JSON written by `ingest-incidents`.
    #[arg(long)]
    distribution: Option<PathBuf>,
    #[arg(long, conflicts_with = "prevalence")]
    snapshot: Option<PathBuf>,
    #[arg(long, conflicts_with = "distribution")]
    incidents: Option<PathBuf>,
    #[arg(long)]
    ruleset: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct ReportArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    incidents: Option<PathBuf>,
    #[arg(long)]
    ruleset: Option<PathBuf>,
    #[arg(long, default_value = "normalized")]
    schema: String,
    /// Rollup configuration for role classification; defaults to a fully
    /// centralized optimistic rollup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario files to simulate and summarize; repeatable.
    #[arg(long)]
    scenario: Vec<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Prevalence share a hazard must exceed to enter the structural bucket.
    #[arg(long, default_value_t = 20.0)]
    prevalence_threshold: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use era_core::engine::{EngineOptions, PriorityOptions};
use era_core::incidents::{distribution, parse_incidents, IncidentDistribution};
use era_core::model::{RollupConfig, Share, Warning};
use era_core::report::{assemble, cross_validate, metrics_line, sha256_hex, InputDigest, ReportInput, SimSummary};
use era_core::sim::{Scenario, SimTrace};
use era_core::snapshot::{
    aggregate_prevalence, explore_schema, extract_projects, ExtractOptions, PrevalenceTable, Ruleset, SnapshotDocument,
    SnapshotError,
};

use crate::{Cli, Command, CrossArgs, Format, OutputArgs, ReportArgs, SnapshotArgs};

pub const INPUT_ERROR: u8 = 2;
pub const SCHEMA_ERROR: u8 = 3;
pub const SCENARIO_ERROR: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

trait OrExit<T> {
    fn exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let engine = if cli.strict_roles {
        EngineOptions::strict()
    } else {
        EngineOptions::default()
    };
    match cli.command {
        Command::IngestSnapshot(args) => ingest_snapshot(&args),
        Command::ExploreSchema { snapshot, output } => {
            let doc = read_snapshot(&snapshot)?;
            let report = explore_schema(&doc);
            emit(&output, "schema-report", &report, &report.render_text())
        }
        Command::IngestIncidents { incidents, output } => {
            let (dist, _) = load_incidents(&incidents)?;
            emit(&output, "distribution", &dist, &dist.render_text())
        }
        Command::CrossValidate(args) => cross(&args),
        Command::Simulate { scenario, seed, output } => simulate(&scenario, seed, &output),
        Command::Report(args) => report(&args, engine),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .exit(INPUT_ERROR)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?)
        .with_context(|| format!("{} is not UTF-8", path.display()))
        .exit(INPUT_ERROR)
}

/// Writes `name.json` and `name.txt` under `--out` when given, and prints
/// the requested format.
fn emit<T: serde::Serialize>(out: &OutputArgs, name: &str, value: &T, text: &str) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(value).expect("outputs serialize");
    if let Some(dir) = &out.out {
        write_file(dir, &format!("{name}.json"), &format!("{json}\n"))?;
        write_file(dir, &format!("{name}.txt"), text)?;
    }
    match out.format {
        Format::Json => println!("{json}"),
        Format::Text => print!("{text}"),
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .exit(INPUT_ERROR)?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .exit(INPUT_ERROR)?;
    Ok(path)
}

fn print_warnings(warnings: &[Warning]) {
    // Warnings are logged when created; this adds a count for quiet log levels.
    if !warnings.is_empty() && !log::log_enabled!(log::Level::Warn) {
        eprintln!("{} warning(s)", warnings.len());
    }
}

fn read_snapshot(path: &Path) -> Result<SnapshotDocument, Failure> {
    let text = read_text(path)?;
    SnapshotDocument::parse(&text)
        .with_context(|| format!("in {}", path.display()))
        .exit(INPUT_ERROR)
}

fn load_ruleset(path: Option<&Path>) -> Result<Ruleset, Failure> {
    match path {
        None => Ok(Ruleset::default()),
        Some(p) => serde_json::from_str(&read_text(p)?)
            .with_context(|| format!("invalid ruleset {}", p.display()))
            .exit(INPUT_ERROR),
    }
}

fn load_prevalence(
    snapshot: &Path,
    ruleset: Option<&Path>,
    schema: &str,
    root: &str,
) -> Result<(PrevalenceTable, Vec<Warning>), Failure> {
    let doc = read_snapshot(snapshot)?;
    let opts = ExtractOptions {
        root: root.to_string(),
        schema: schema.parse().map_err(|e| anyhow!("{e}")).exit(INPUT_ERROR)?,
        ruleset: load_ruleset(ruleset)?,
    };
    match extract_projects(&doc, &opts) {
        Ok(ex) => {
            print_warnings(&ex.warnings);
            Ok((aggregate_prevalence(&ex.profiles), ex.warnings))
        }
        Err(e @ SnapshotError::SchemaMismatch { .. }) => {
            eprint!("{}", explore_schema(&doc).render_text());
            Err(e).exit(SCHEMA_ERROR)
        }
        Err(e) => Err(e).exit(INPUT_ERROR),
    }
}

fn load_incidents(path: &Path) -> Result<(IncidentDistribution, Vec<Warning>), Failure> {
    let text = read_text(path)?;
    let parsed = parse_incidents(&text)
        .with_context(|| format!("in {}", path.display()))
        .exit(INPUT_ERROR)?;
    print_warnings(&parsed.warnings);
    Ok((distribution(&parsed.records), parsed.warnings))
}

fn ingest_snapshot(args: &SnapshotArgs) -> Result<(), Failure> {
    let (table, _) = load_prevalence(&args.snapshot, args.ruleset.as_deref(), &args.schema, &args.root)?;
    emit(&args.output, "prevalence", &table, &table.render_text())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("invalid JSON in {}", path.display()))
        .exit(INPUT_ERROR)
}

fn cross(args: &CrossArgs) -> Result<(), Failure> {
    let prevalence: PrevalenceTable = match (&args.prevalence, &args.snapshot) {
        (Some(p), _) => read_json(p)?,
        (None, Some(s)) => load_prevalence(s, args.ruleset.as_deref(), "normalized", "projects")?.0,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let dist: Option<IncidentDistribution> = match (&args.distribution, &args.incidents) {
        (Some(d), _) => Some(read_json(d)?),
        (None, Some(i)) => Some(load_incidents(i)?.0),
        (None, None) => None,
    };
    let notes = cross_validate(&prevalence, dist.as_ref());
    let text: String = notes.iter().map(|n| format!("{}. [{}] {}\n", n.id, n.key, n.text)).collect();
    emit(&args.output, "cross-validation", &notes, &text)
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, Failure> {
    let text = read_text(path)?;
    let mut s = Scenario::from_json(&text)
        .with_context(|| format!("in {}", path.display()))
        .exit(SCENARIO_ERROR)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if s.name.is_empty() {
        s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(s)
}

fn run_scenario(s: &Scenario) -> Result<SimTrace, Failure> {
    s.run().with_context(|| format!("scenario {}", s.name)).exit(SCENARIO_ERROR)
}

fn simulate(path: &Path, seed: Option<u64>, out: &OutputArgs) -> Result<(), Failure> {
    let scenario = load_scenario(path, seed)?;
    let trace = run_scenario(&scenario)?;
    let ndjson = trace.to_ndjson();
    let metrics = serde_json::to_string_pretty(&trace.metrics).expect("metrics serialize");
    if let Some(dir) = &out.out {
        write_file(dir, "trace.ndjson", &ndjson)?;
        write_file(dir, "metrics.json", &format!("{metrics}\n"))?;
    }
    match out.format {
        Format::Json => println!("{metrics}"),
        Format::Text => println!(
            "{} seed={} events={} trace_sha256={} {}",
            scenario.name,
            scenario.seed,
            trace.events.len(),
            sha256_hex(ndjson.as_bytes()),
            metrics_line(&trace.metrics)
        ),
    }
    Ok(())
}

fn digest(role: &str, path: &Path) -> Result<InputDigest, Failure> {
    Ok(InputDigest {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(&read(path)?),
    })
}

fn report(args: &ReportArgs, engine: EngineOptions) -> Result<(), Failure> {
    let mut input = ReportInput {
        engine,
        version: env!("CARGO_PKG_VERSION").to_string(),
        ..Default::default()
    };
    let tenths = (args.prevalence_threshold * 10.0).round();
    if !(0.0..=1000.0).contains(&tenths) {
        return Err(anyhow!("prevalence threshold must lie in [0, 100]")).exit(INPUT_ERROR);
    }
    input.priority = PriorityOptions {
        prevalence_threshold: Share::from_tenths(tenths as u16),
    };
    if let Some(p) = &args.snapshot {
        input.inputs.push(digest("snapshot", p)?);
        let (table, warnings) = load_prevalence(p, args.ruleset.as_deref(), &args.schema, "projects")?;
        input.prevalence = Some(table);
        input.warnings.extend(warnings);
    }
    if let Some(p) = &args.ruleset {
        input.inputs.push(digest("ruleset", p)?);
    }
    if let Some(p) = &args.incidents {
        input.inputs.push(digest("incidents", p)?);
        let (dist, warnings) = load_incidents(p)?;
        input.incidents = Some(dist);
        input.warnings.extend(warnings);
    }
    if let Some(p) = &args.config {
        input.inputs.push(digest("config", p)?);
        input.config = serde_json::from_str::<RollupConfig>(&read_text(p)?)
            .with_context(|| format!("invalid rollup configuration {}", p.display()))
            .exit(INPUT_ERROR)?;
    }
    for p in &args.scenario {
        input.inputs.push(digest("scenario", p)?);
        let s = load_scenario(p, args.seed)?;
        let trace = run_scenario(&s)?;
        input.simulations.push(SimSummary {
            scenario: s.name.clone(),
            seed: s.seed,
            events: trace.events.len(),
            trace_sha256: sha256_hex(trace.to_ndjson().as_bytes()),
            metrics: trace.metrics,
        });
    }
    let report = assemble(input, chrono::Utc::now());
    emit(&args.output, "report", &report, &report.render_text())
}

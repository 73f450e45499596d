//! Command-line front end: `bubblekit <steady|determinacy|path|sweep|verify> --config scenario.toml`.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;
use thiserror::Error;

pub use config::{RunKind, ScenarioConfig};
pub use output::Format;
pub use run::{run_scenario, run_sweep, RunReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config invalid: {0}")]
    ConfigInvalid(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bubblekit", version, about = "Steady states, determinacy, saddle paths and verification for rational-bubble models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady states and their local verdicts
    Steady(CommonArgs),
    /// Local determinacy at the bubbly steady state
    Determinacy(CommonArgs),
    /// Equilibrium path from the configured initial condition
    Path(CommonArgs),
    /// One row per grid point of the `[sweep]` table
    Sweep(CommonArgs),
    /// Path plus residual checks and elimination certificate; exit 4 on failure
    Verify(CommonArgs),
}

impl Command {
    pub fn kind_and_args(&self) -> (RunKind, &CommonArgs) {
        match self {
            Command::Steady(a) => (RunKind::Steady, a),
            Command::Determinacy(a) => (RunKind::Determinacy, a),
            Command::Path(a) => (RunKind::Path, a),
            Command::Sweep(a) => (RunKind::Sweep, a),
            Command::Verify(a) => (RunKind::Verify, a),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Scenario file (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Residual tolerance for verification (overrides tolerances.verify)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Path length (overrides horizon)
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Also write a gnuplot script reading the CSV output (needs --format csv and --out)
    #[arg(long)]
    pub plot_script: Option<PathBuf>,
    /// Record wall-clock time in the report
    #[arg(long)]
    pub timing: bool,
}

/// Loads the config and applies command-line overrides.
pub fn prepare(kind: RunKind, args: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let mut config = ScenarioConfig::load(&args.config)?;
    config.run = Some(kind);
    if let Some(tol) = args.tol {
        config.tolerances.verify = tol;
    }
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    config.check()?;
    Ok(config)
}

/// Output text for `report` in `format`, plus the CSV header (used by plot
/// scripts).
pub fn render(report: &RunReport, format: Format) -> Result<(String, Vec<String>), CliError> {
    match format {
        Format::Json => Ok((output::to_json_string(&report.to_value()), vec![])),
        Format::Csv => {
            let (header, rows) = csv_table(report);
            Ok((output::write_csv(&header, &rows)?, header))
        }
    }
}

fn csv_table(report: &RunReport) -> (Vec<String>, Vec<Vec<String>>) {
    if let Some(sweep) = &report.sweep {
        let rows: Vec<Value> = sweep.rows.iter().map(|r| serde_json::to_value(r).expect("row serializes")).collect();
        return output::table_from_rows(&["value", "index", "error", "passed"], &rows);
    }
    let result = report.result.clone().unwrap_or(Value::Null);
    if let Some(path) = result.get("path") {
        return path_table(path);
    }
    if let Some(prices) = result.get("prices").and_then(Value::as_array) {
        let rows: Vec<Value> = prices.iter().enumerate().map(|(t, p)| serde_json::json!({ "t": t, "P": p })).collect();
        return output::table_from_rows(&["t", "P"], &rows);
    }
    output::key_value_table(&report.to_value())
}

/// Columns `t, x0, x1, ...` then each named series, aligned on `t`.
fn path_table(path: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let states = path.get("states").and_then(Value::as_array).cloned().unwrap_or_default();
    let series = path.get("series").and_then(Value::as_object).cloned().unwrap_or_default();
    let rows: Vec<Value> = states
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let mut row = serde_json::Map::new();
            row.insert("t".into(), Value::from(t));
            for (i, x) in s.as_array().into_iter().flatten().enumerate() {
                row.insert(format!("x{i}"), x.clone());
            }
            for (name, values) in &series {
                row.insert(name.clone(), values.get(t).cloned().unwrap_or(Value::Null));
            }
            Value::Object(row)
        })
        .collect();
    let dims = states.first().and_then(Value::as_array).map_or(0, Vec::len);
    let leading: Vec<String> = std::iter::once("t".to_string()).chain((0..dims).map(|i| format!("x{i}"))).collect();
    let leading: Vec<&str> = leading.iter().map(String::as_str).collect();
    output::table_from_rows(&leading, &rows)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let (kind, args) = cli.command.kind_and_args();
    match execute(kind, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bubblekit: {e}");
            e.exit_code()
        }
    }
}

fn execute(kind: RunKind, args: &CommonArgs) -> Result<i32, CliError> {
    let config = prepare(kind, args)?;
    if args.plot_script.is_some() && (args.format != Format::Csv || args.out.is_none()) {
        return Err(CliError::ConfigInvalid("--plot-script needs --format csv and --out".into()));
    }
    let started = Instant::now();
    let mut report = run_scenario(&config)?;
    if args.timing {
        report.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    let (text, header) = render(&report, args.format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if let (Some(script), Some(out)) = (&args.plot_script, &args.out) {
        let title = format!("{} {}", config.model, kind);
        let phase = report.result.as_ref().is_some_and(|r| r.get("path").is_some());
        let body = output::gnuplot_script(&out.display().to_string(), &header, &title, phase);
        std::fs::write(script, body).map_err(|e| CliError::Io(format!("{}: {e}", script.display())))?;
    }
    if let Some(s) = &report.sweep {
        for r in s.rows.iter().filter(|r| r.error.is_some()) {
            eprintln!("bubblekit: row {} ({} = {}): {}", r.index, s.parameter, r.value, r.error.as_deref().unwrap_or(""));
        }
    }
    if let Some(v) = &report.verification {
        for f in &v.failures {
            eprintln!("bubblekit: verification failed: {f}");
        }
    }
    Ok(report.exit_code())
}

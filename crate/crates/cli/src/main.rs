use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use curvnorm::experiment::{run, Command, ConfigError, ExperimentConfig, ExperimentReport};
use serde_json::Value;

/// Deterministic curvature experiments with JSON and CSV reports.
#[derive(Parser, Debug)]
#[command(name = "curvnorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid nodes for conformal and flow commands.
    #[arg(long, global = true)]
    grid: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Print wall time to stderr (never written into the report).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Sub {
    Identities,
    GaussBonnet,
    Pinching,
    RicciOde,
    YamabeFlow,
    Bubble,
    Quotient,
    SobolevReport,
    /// Run the command named in the config file.
    Run,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
enum Failure {
    Io(anyhow::Error),
    Usage(String),
    Config(String),
    Invariant(Vec<String>),
    Compute(curvnorm::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Config(_) => 3,
            Failure::Invariant(_) => 4,
            Failure::Compute(_) => 5,
        }
    }
}

fn sub_command(sub: Sub) -> Option<Command> {
    Some(match sub {
        Sub::Identities => Command::Identities,
        Sub::GaussBonnet => Command::GaussBonnet,
        Sub::Pinching => Command::Pinching,
        Sub::RicciOde => Command::RicciOde,
        Sub::YamabeFlow => Command::YamabeFlow,
        Sub::Bubble => Command::Bubble,
        Sub::Quotient => Command::Quotient,
        Sub::SobolevReport => Command::SobolevReport,
        Sub::Run => return None,
    })
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut value = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Io)?;
            serde_json::from_str::<Value>(&text).map_err(|e| Failure::Config(e.to_string()))?
        }
        None => Value::Object(Default::default()),
    };
    let Some(obj) = value.as_object_mut() else {
        return Err(Failure::Config("config must be a JSON object".into()));
    };
    match (sub_command(cli.command), obj.get("command")) {
        (Some(cmd), Some(Value::String(named))) if named != cmd.name() => {
            return Err(Failure::Usage(format!(
                "subcommand `{cmd}` conflicts with config command `{named}`"
            )))
        }
        (Some(cmd), _) => {
            obj.insert("command".into(), cmd.name().into());
        }
        (None, None) => {
            return Err(Failure::Usage(
                "`run` needs a config naming a command".into(),
            ))
        }
        (None, Some(_)) => {}
    }
    if let Some(seed) = cli.seed {
        obj.insert("seed".into(), seed.into());
    }
    if let Some(grid) = cli.grid {
        obj.insert("grid".into(), grid.into());
    }
    ExperimentConfig::from_value(value).map_err(|e| match e {
        ConfigError::UnknownCommand(_) => Failure::Usage(e.to_string()),
        ConfigError::Malformed(_) => Failure::Config(e.to_string()),
    })
}

fn render(report: &ExperimentReport, format: Format) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_vec_pretty(report)?;
            text.push(b'\n');
            Ok(text)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            w.write_record(&report.table.header)?;
            for row in &report.table.rows {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
            Ok(w.into_inner()?)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?;
    let start = Instant::now();
    let report = run(&config).map_err(Failure::Compute)?;
    if cli.timing {
        eprintln!("{}: {:.3} s", config.command, start.elapsed().as_secs_f64());
    }
    let bytes = render(&report, cli.format).map_err(Failure::Io)?;
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from));
    match out {
        Some(path) => fs::write(&path, bytes)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Io)?,
        None => io::stdout()
            .write_all(&bytes)
            .map_err(|e| Failure::Io(e.into()))?,
    }
    if report.passed {
        Ok(())
    } else {
        let failed = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {} (threshold {})", c.name, c.value, c.threshold))
            .collect();
        Err(Failure::Invariant(failed))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(e) => eprintln!("error: {e:#}"),
                Failure::Usage(m) | Failure::Config(m) => eprintln!("error: {m}"),
                Failure::Invariant(names) => {
                    for n in names {
                        eprintln!("invariant failed: {n}");
                    }
                }
                Failure::Compute(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

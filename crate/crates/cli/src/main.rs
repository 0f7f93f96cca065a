mod config;
mod emit;
mod error;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ScenarioConfig, ScenarioKind};
use error::CliError;

/// Run an imaging-resolution scenario and write CSV and SVG artifacts.
#[derive(Debug, Parser)]
#[command(name = "qsuperres", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; overrides the config. Without either, CSV goes to stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// SVG output path; overrides the config.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Worker threads. QSUPERRES_THREADS takes precedence when set.
    #[arg(long)]
    threads: Option<usize>,
    /// Validate the config, print it with defaults filled in, and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coincidence signals of one object on its sampling grid.
    Signal(Common),
    /// Tr F⁻¹ against slit width, with resolution thresholds.
    FisherScan(Common),
    /// Detection-rate ratio of the hybrid and G^(n) measurements.
    RateRatio(Common),
    /// Two-pinhole NOON interference profiles.
    NoonDemo(Common),
}

fn threads(requested: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("QSUPERRES_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!(
                "QSUPERRES_THREADS must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => match requested {
            Some(0) => Err(CliError::Invalid("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn execute(kind: ScenarioKind, args: &Common) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let cfg = ScenarioConfig::parse(&text)?;
    scenario::validate(&cfg, kind)?;
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    if let Some(n) = threads(args.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Output(e.to_string()))?;
    }

    let artifact = scenario::run(&cfg, kind)?;
    let csv_path = args.csv.as_ref().or(cfg.output.csv.as_ref());
    let svg_path = args.svg.as_ref().or(cfg.output.svg.as_ref());
    match csv_path {
        Some(path) => emit::emit_csv(path, &artifact.header, &artifact.rows)?,
        None => emit::write_csv(std::io::stdout().lock(), &artifact.header, &artifact.rows)?,
    }
    if let Some(path) = svg_path {
        emit::emit_svg(path, &artifact.curves, &artifact.axes)?;
    }
    // Keep stdout clean when it carries the CSV.
    let mut notes: Box<dyn Write> = if csv_path.is_some() {
        Box::new(std::io::stdout().lock())
    } else {
        Box::new(std::io::stderr().lock())
    };
    for note in &artifact.notes {
        let _ = writeln!(notes, "{note}");
    }
    for (what, path) in [("csv", csv_path), ("svg", svg_path)] {
        if let Some(p) = path {
            let _ = writeln!(notes, "wrote {what}: {}", display(p));
        }
    }
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Signal(a) => (ScenarioKind::Signal, a),
        Command::FisherScan(a) => (ScenarioKind::FisherScan, a),
        Command::RateRatio(a) => (ScenarioKind::RateRatio, a),
        Command::NoonDemo(a) => (ScenarioKind::NoonDemo, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsuperres {}: {e}", kind.name());
            ExitCode::from(e.exit_code())
        }
    }
}

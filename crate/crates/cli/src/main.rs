use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qle_core::qle::Observer;

mod commands;
mod config;
mod error;
mod input;
mod report;

use commands::Context;
use config::{Config, CONFIG_ENV};
use error::CliResult;
use report::ReportDocument;

#[derive(Parser)]
#[command(name = "qle")]
#[command(about = "Quasilocal energy at null infinity from Bondi–Sachs data")]
#[command(version)]
struct Cli {
    /// Override the grid resolution (n_theta; n_phi = 2·n_theta)
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Tolerance for route agreement and limit checks
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Configuration file (TOML)
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Commands {
    /// Bondi energy-momentum by both evaluation routes
    Momentum {
        input: PathBuf,
    },
    /// Quasilocal energy limit and finite-radius ladder for one or more observers
    Energy {
        input: PathBuf,

        /// Spatial part a1,a2,a3 of the observer; repeatable
        #[arg(long, value_parser = parse_observer)]
        observer: Vec<Observer>,
    },
    /// Optimal embedding solved order by order
    Optimal {
        input: PathBuf,

        /// Number of induction steps after the leading solve
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Full invariant table
    Verify {
        input: PathBuf,
    },
}

fn parse_observer(s: &str) -> Result<Observer, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut a = [0.0; 3];
    for (slot, p) in a.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(Observer::new(a))
}

fn input_path(cmd: &Commands) -> &Path {
    match cmd {
        Commands::Momentum { input } | Commands::Energy { input, .. } | Commands::Optimal { input, .. } | Commands::Verify { input } => input,
    }
}

fn context(cli: &Cli) -> CliResult<Context> {
    let loaded = input::load(input_path(&cli.command))?;
    let mut layers = Vec::new();
    if let Some(path) = &cli.config {
        layers.push(config::read_table(path)?);
    }
    if let Some(t) = &loaded.doc.config {
        layers.push(t.clone());
    }
    let mut cfg = Config::layered(layers)?;
    if let Some(tol) = cli.tol {
        cfg.set_tol(tol)?;
    }
    if let Commands::Optimal { depth: Some(k), .. } = cli.command {
        cfg.optimal.depth = k;
    }
    let grid = loaded.doc.grid(cli.grid, cfg.n_theta)?;
    cfg.n_theta = grid.n_theta();
    let data = loaded.doc.bondi_data(&grid, cfg.verify.det_tol)?;
    let mut observers = match &cli.command {
        Commands::Energy { observer, .. } => observer.clone(),
        _ => Vec::new(),
    };
    if observers.is_empty() {
        observers.push(loaded.doc.observer.map_or_else(Observer::rest, Observer::new));
    }
    Ok(Context { data, config: cfg, input_sha256: loaded.sha256, observers })
}

fn run(cli: &Cli) -> CliResult<ReportDocument> {
    let ctx = context(cli)?;
    match &cli.command {
        Commands::Momentum { .. } => commands::momentum(&ctx),
        Commands::Energy { .. } => commands::energy(&ctx),
        Commands::Optimal { .. } => commands::optimal(&ctx, ctx.config.optimal.depth),
        Commands::Verify { .. } => commands::verify(&ctx),
    }
}

fn emit(cli: &Cli, report: &ReportDocument) -> CliResult<()> {
    let text = match cli.format {
        Format::Text => report.to_text(),
        Format::Structured => report.to_json(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("qle: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("qle: {e}");
        return e.exit_code();
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        eprintln!("qle: {} check(s) failed: {}", failed.len(), failed.join(", "));
        ExitCode::from(1)
    }
}

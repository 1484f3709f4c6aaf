//! `morphgrip` scenario runner.
//!
//! Exit codes: 0 on success, 2 on invalid input or configuration, 3 when a
//! matrix differs from its reference table, 1 on I/O failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morphgrip::config::RunConfig;
use morphgrip::kinematics::TemplateKind;
use morphgrip::Error;

use commands::{Report, Table};

#[derive(Parser)]
#[command(
    name = "morphgrip",
    version,
    about = "Simulate a shape-morphing soft pneumatic gripper"
)]
struct Cli {
    /// TOML configuration; the built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pressure sweeps of the palm and finger actuators.
    Characterize,
    /// Minimum-internal-angle heatmap over a template's parameters.
    Manifold {
        /// rectangle, trapezoid or kite; all three when omitted.
        #[arg(long, value_parser = parse_template)]
        template: Option<TemplateKind>,
    },
    /// Contact detection on a four-channel bend-sensor trace.
    Detect { trace: PathBuf },
    /// One grasp attempt in simulation.
    Grasp {
        /// Catalog id or name, e.g. `rect-l` or "Cup Noodles".
        object: String,
        /// `adaptive`, `fixed:<configuration>` or `template:<kind>`.
        #[arg(long, default_value = "adaptive")]
        mode: String,
    },
    /// Success matrix and comparison with the reference table.
    Matrix {
        #[arg(value_parser = parse_table)]
        which: Table,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn parse_template(s: &str) -> Result<TemplateKind, String> {
    TemplateKind::parse(s).ok_or_else(|| format!("unknown template `{s}`"))
}

fn parse_table(s: &str) -> Result<Table, String> {
    Table::parse(s).ok_or_else(|| format!("unknown table `{s}`; expected table2 or table3"))
}

fn load(cli: &Cli) -> morphgrip::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> morphgrip::Result<Report> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Characterize => commands::characterize(&cfg),
        Command::Manifold { template } => commands::manifold(&cfg, *template),
        Command::Detect { trace } => commands::detect(&cfg, trace),
        Command::Grasp { object, mode } => {
            let mode = commands::parse_mode(&cfg, mode)?;
            commands::grasp(&cfg, object, &mode)
        }
        Command::Matrix { which } => commands::matrix(&cfg, *which),
        Command::Config => Ok(Report {
            summary: cfg.to_toml_string()?,
            mismatch: false,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.summary);
            if report.mismatch {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

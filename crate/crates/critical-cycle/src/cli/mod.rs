//! Command-line front end.
//!
//! Subcommands: `cycle`, `workdist`, `coherence`, `ising`, `scaling`, and a
//! hidden `oracle` for debugging. Each reads an optional key-value config
//! file; command-line flags override file entries. Exit codes: 0 success,
//! 2 configuration error, 3 numerical failure.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, RunConfig};
use output::Table;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(crate::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            // Bad physical parameters are configuration mistakes even when
            // they surface from the library; true numerical breakdowns are 3.
            CliError::Numerical(crate::Error::InvalidParameter(_)) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "critical-cycle",
    version,
    about = "Finite-time cyclic driving of a critical bosonic mode: squeezing, \
             work statistics, coherence, and scaling analyses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (0 = rayon default). Output bytes do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Relative integration tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Squeezing and irreversible work over a (r, N_beta, 2wt) grid.
    Cycle(CommonArgs),
    /// Two-point-measurement work distributions and cumulants.
    Workdist(CommonArgs),
    /// Coherence vs population split of the entropy production.
    Coherence(CommonArgs),
    /// Transverse-field Ising chain sweep with mean-field contrast.
    Ising(CommonArgs),
    /// Finite-time scaling exponents of the work deficit.
    Scaling(CommonArgs),
    /// Gaussian-vs-truncated-basis consistency report.
    #[command(hide = true)]
    Oracle(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Cycle(a)
            | Command::Workdist(a)
            | Command::Coherence(a)
            | Command::Ising(a)
            | Command::Scaling(a)
            | Command::Oracle(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Cycle(_) => "cycle",
            Command::Workdist(_) => "workdist",
            Command::Coherence(_) => "coherence",
            Command::Ising(_) => "ising",
            Command::Scaling(_) => "scaling",
            Command::Oracle(_) => "oracle",
        }
    }

    fn defaults(&self) -> Vec<(&'static str, &'static str)> {
        let mut keys: Vec<(&'static str, &'static str)> = vec![
            ("out", ""),
            ("format", "csv"),
            ("workers", "0"),
            ("tol", "1e-9"),
            ("seed", "0"),
        ];
        keys.extend(match self {
            Command::Cycle(_) => vec![
                ("r", "1,2,4"),
                ("n_beta", "1"),
                ("two_omega_tau", "logspace(0.1,100,25)"),
                ("g_f", "1"),
            ],
            Command::Workdist(_) => vec![
                ("n_beta", "0"),
                ("r", "1"),
                ("eps_tail", "1e-12"),
                ("cumulant_order", "3"),
                ("squeeze", "auto"),
            ],
            Command::Coherence(_) => vec![
                ("n_beta", "0.25,0.5,1,2"),
                ("r", "0.5,1,2,4"),
                ("eps_tail", "1e-9"),
            ],
            Command::Ising(_) => vec![
                ("n_spins", "200"),
                ("r", "1"),
                ("g_f", "1"),
                ("tau", "logspace(10,1000,9)"),
            ],
            Command::Scaling(_) => vec![
                ("r", "0.5,1,2,4"),
                ("tau", "logspace(100,1000,12)"),
            ],
            Command::Oracle(_) => vec![
                ("n_beta", "1"),
                ("r", "1"),
                ("two_omega_tau", "40"),
                ("dim", "160"),
            ],
        });
        keys
    }

    fn run(&self, cfg: &RunConfig) -> Result<Table, CliError> {
        match self {
            Command::Cycle(_) => commands::cmd_cycle(cfg),
            Command::Workdist(_) => commands::cmd_workdist(cfg),
            Command::Coherence(_) => commands::cmd_coherence(cfg),
            Command::Ising(_) => commands::cmd_ising(cfg),
            Command::Scaling(_) => commands::cmd_scaling(cfg),
            Command::Oracle(_) => commands::cmd_oracle(cfg),
        }
    }
}

fn resolve_config(cmd: &Command) -> Result<RunConfig, CliError> {
    let common = cmd.common();
    let mut overrides: Vec<(&str, String)> = Vec::new();
    if let Some(out) = &common.out {
        overrides.push(("out", out.display().to_string()));
    }
    if let Some(format) = &common.format {
        overrides.push(("format", format.clone()));
    }
    if let Some(workers) = common.workers {
        overrides.push(("workers", workers.to_string()));
    }
    if let Some(tol) = common.tol {
        overrides.push(("tol", format!("{tol:e}")));
    }
    let defaults = cmd.defaults();
    Ok(RunConfig::new(
        cmd.name(),
        &defaults,
        common.config.as_deref(),
        &overrides,
    )?)
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    let cfg = resolve_config(cmd)?;
    let format = cfg.format()?;
    let workers = cfg.usize("workers")?;

    let mut table = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| cmd.run(&cfg))?
    } else {
        cmd.run(&cfg)?
    };

    let mut metadata = vec![
        ("tool".to_string(), "critical-cycle".to_string()),
        (
            "version".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        ),
        ("subcommand".to_string(), cfg.subcommand.to_string()),
        ("config_hash".to_string(), cfg.hash()),
        ("tol".to_string(), cfg.get("tol").to_string()),
        ("seed".to_string(), cfg.get("seed").to_string()),
    ];
    metadata.append(&mut table.metadata);
    table.metadata = metadata;

    let text = table.render(format);
    match cfg.get("out") {
        "" => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(CliError::Io)?;
        }
        path => std::fs::write(path, text).map_err(CliError::Io)?,
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("critical-cycle: {e}");
            e.exit_code()
        }
    }
}

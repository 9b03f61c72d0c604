use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use repeater_cli::{
    cmd_channel, cmd_mc_reencode, cmd_optimize, cmd_sweep_eta, cmd_tables, cmd_validate_recursion,
    write_manifest, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "repeater",
    about = "Simulate and optimize a one-way repeater chain of tree-encoded qubits with an outer 5-qubit code",
    version
)]
struct Cli {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (CSV or text); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the cost function over a (L_tot, eps_r, kappa) grid.
    Optimize,
    /// Evaluate per-node channel summaries (alpha1, alpha2, eps_loss).
    Channel {
        /// Links between consecutive syndrome-extracting nodes.
        #[arg(long, value_delimiter = ',', default_value = "8")]
        n: Vec<u32>,
    },
    /// Compare exact, recursion and naive effective errors over an eps_r sweep.
    ValidateRecursion {
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[arg(long, default_value_t = 125)]
        m_ii: u32,
        /// Number of log-spaced eps_r points in [1e-4, 1e-2].
        #[arg(long, default_value_t = 7)]
        points: u32,
    },
    /// Monte Carlo tree re-encoding estimates.
    McReencode,
    /// Print all syndrome correction tables.
    Tables,
    /// Transmission-probability series at fixed eta_e over n.
    SweepEta {
        #[arg(long, default_value_t = 0.998)]
        eta_e: f64,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
    },
    /// Print the effective run configuration as TOML.
    ShowConfig,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing output {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match &cli.command {
        Command::Optimize => {
            let (main_csv, hom_csv) = cmd_optimize(&config)?;
            emit(cli.out.as_deref(), &main_csv)?;
            if let Some(out) = &cli.out {
                std::fs::write(with_suffix(out, "_homogeneous"), hom_csv)?;
                write_manifest(&with_suffix(out, "_manifest").with_extension("json"), "optimize", &config)?;
            } else {
                print!("{hom_csv}");
            }
        }
        Command::Channel { n } => emit(cli.out.as_deref(), &cmd_channel(&config, n)?)?,
        Command::ValidateRecursion { n, m_ii, points } => {
            let points = (*points).max(2);
            let eps: Vec<f64> = (0..points)
                .map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / (points - 1) as f64))
                .collect();
            emit(cli.out.as_deref(), &cmd_validate_recursion(&eps, *n, *m_ii)?)?;
        }
        Command::McReencode => {
            let csv = cmd_mc_reencode(&config)?;
            emit(cli.out.as_deref(), &csv)?;
            if let Some(out) = &cli.out {
                write_manifest(&with_suffix(out, "_manifest").with_extension("json"), "mc-reencode", &config)?;
            }
        }
        Command::Tables => emit(cli.out.as_deref(), &cmd_tables()?)?,
        Command::SweepEta { eta_e, n_max } => {
            emit(cli.out.as_deref(), &cmd_sweep_eta(*eta_e, *n_max)?)?
        }
        Command::ShowConfig => emit(cli.out.as_deref(), &config.to_toml()?)?,
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

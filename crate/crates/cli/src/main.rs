//! `sixquanta` command-line experiment runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sixquanta_core::config::{default_config, load_config, ExperimentConfig};
use sixquanta_core::experiments::{
    effective_report, run_calibrate, run_chevron, run_rates, run_timetrace, run_wigner,
};
use sixquanta_core::table::ResultTable;
use sixquanta_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "sixquanta",
    version,
    about = "Raman-assisted six-quanta exchange simulator"
)]
struct Cli {
    /// JSON config; the shipped defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides `run.out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Reserved. Nothing in the simulation is stochastic.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// P0 over pump-1 detuning and pump duration.
    Chevron,
    /// Populations from |f0> with resonant pumps.
    Timetrace,
    /// Conditional Wigner maps at the half-transfer point.
    Wigner,
    /// Stark shift -> xi -> g table.
    Calibrate,
    /// Six-wave vs. Raman rate sweep and crossover.
    Rates,
    /// Effective coupling, pump shift, diagonal shifts and leakage ratios.
    Effective,
}

fn load(cli: &Cli) -> sixquanta_core::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => default_config(),
    };
    if let Some(out) = &cli.out {
        cfg.run.out_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_tables(tables: &[ResultTable], dir: &Path) -> sixquanta_core::Result<()> {
    for t in tables {
        let path = t.write(dir)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> sixquanta_core::Result<()> {
    let cfg = load(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    if let Some(seed) = cli.seed {
        log::debug!("seed {seed} accepted; no stochastic component uses it");
    }
    let dir = PathBuf::from(&cfg.run.out_dir);
    match cli.command {
        Command::Chevron => write_tables(&[run_chevron(&cfg)?], &dir),
        Command::Timetrace => write_tables(&[run_timetrace(&cfg)?], &dir),
        Command::Wigner => write_tables(&run_wigner(&cfg)?.tables, &dir),
        Command::Calibrate => write_tables(&[run_calibrate(&cfg)?], &dir),
        Command::Rates => write_tables(&[run_rates(&cfg)?], &dir),
        Command::Effective => {
            let report = effective_report(&cfg)?;
            for w in &report.warnings {
                log::warn!("{w}");
            }
            let text = serde_json::to_string_pretty(&report)?;
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("effective.json"), &text)?;
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // an unwritable output directory is an invalid config
            if e.is_config_error() || matches!(e, Error::Io(_)) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}

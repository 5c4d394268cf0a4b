use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use soler::runner::commands;

/// Massless nonlinear Dirac simulator.
///
/// SOLER_THREADS caps the number of worker threads.
#[derive(Parser)]
#[command(name = "soler", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configuration into a run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized Clifford and null-decomposition identities.
    CheckAlgebra {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        dim: Option<u8>,
    },
    /// Weighted-norm audit of the configured initial datum.
    AuditData {
        #[arg(long)]
        config: PathBuf,
    },
    /// Log-log fit of a CSV series.
    FitDecay {
        csv: PathBuf,
        /// `t_lo,t_hi`; defaults to the last three quarters of the series.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        /// Observable to fit in `t,observable,value` files.
        #[arg(long)]
        observable: Option<String>,
    },
    /// Free pull-back and Cauchy-rate analysis of a run directory.
    Scatter {
        dir: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
        sobolev: u8,
    },
    /// Continue an interrupted run.
    Resume { dir: PathBuf },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected t_lo,t_hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if !(hi > lo) {
        return Err("t_hi must exceed t_lo".into());
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SOLER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let mut out = std::io::stdout().lock();
    let result = match cli.command {
        Command::Run { config, out: dir } => commands::run_config(&config, &dir, &mut out),
        Command::CheckAlgebra { dim } => commands::check_algebra(dim.map(usize::from), &mut out),
        Command::AuditData { config } => commands::audit_data(&config, &mut out),
        Command::FitDecay { csv, window, observable } => {
            commands::fit_decay_file(&csv, window, observable.as_deref(), &mut out)
        }
        Command::Scatter { dir, sobolev } => commands::scatter(&dir, f64::from(sobolev), &mut out),
        Command::Resume { dir } => commands::resume_dir(&dir, &mut out),
    };
    out.flush().ok();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

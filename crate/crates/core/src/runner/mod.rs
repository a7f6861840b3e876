//! Command-line orchestration: ingestion, solver runs, oracle comparison,
//! noise sweeps and report emission. Every command writes CSV tables and a
//! `manifest.json` into the output directory.

mod commands;
mod output;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use commands::{cmd_electronic, cmd_noise_sweep, cmd_oracle, cmd_report, cmd_vibrational, parse_rows, report_table, DEFAULT_REPORT_ROWS};
pub use output::{format_sig, CsvTable, FileDigest, RunManifest, StateSummary};
pub use solve::{
    electronic_problem, pair_levels, solve_electronic, solve_vibrational, BackendKind, CircuitFile, ElectronicProblem,
    LevelRow, SolveOutput, DEFAULT_ELECTRONIC_CUTOFF, ELECTRONIC_MERGE_TOL, VIBRATIONAL_MERGE_TOL,
};

#[derive(Debug, Parser)]
#[command(name = "qumvqd", version, about = "Qumode variational quantum deflation")]
pub struct Cli {
    /// JSON configuration for the chosen command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, global = true, env = "QUMVQD_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deflation on a fermionic Hamiltonian file or a directory of them.
    Electronic {
        #[arg(long)]
        hamiltonian: PathBuf,
        /// Electron count selecting the particle-number sector.
        #[arg(long)]
        n_e: usize,
    },
    /// Deflation on a vibrational fragment set.
    Vibrational {
        #[arg(long)]
        fragments: PathBuf,
        #[arg(long, value_enum, default_value = "fragment")]
        backend: BackendKind,
    },
    /// Noisy energies over a grid of loss rates or gate error probabilities.
    NoiseSweep {
        /// Fermionic Hamiltonian measured by the damping model.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        n_e: Option<usize>,
        /// Circuit to run; without it a ground state is optimized first.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Solver configuration used when no circuit is given.
        #[arg(long)]
        vqd_config: Option<PathBuf>,
    },
    /// Hilbert-space compression table.
    Report {
        /// Comma-separated `M:n_e` pairs.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<String>,
        #[arg(long, default_value_t = 16)]
        cutoff: u64,
    },
    /// Exact spectrum of a Hamiltonian or fragment set.
    Oracle {
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[arg(long)]
        n_e: Option<usize>,
        #[arg(long)]
        fragments: Option<PathBuf>,
        /// Number of eigenvalues to print.
        #[arg(short, long, default_value_t = 10)]
        k: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Electronic { .. } => "electronic",
            Command::Vibrational { .. } => "vibrational",
            Command::NoiseSweep { .. } => "noise-sweep",
            Command::Report { .. } => "report",
            Command::Oracle { .. } => "oracle",
        }
    }
}

/// Run one command. Exit status 0 when every state converged and every
/// error is within its threshold, 1 when the run finished but missed, 2 on
/// errors.
pub fn run(cli: &Cli) -> ExitCode {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let start = Instant::now();
    let mut manifest = RunManifest::new(cli.command.name());
    manifest.seed = cli.seed;
    let result = match &cli.command {
        Command::Electronic { hamiltonian, n_e } => cmd_electronic(cli, &mut manifest, hamiltonian, *n_e),
        Command::Vibrational { fragments, backend } => cmd_vibrational(cli, &mut manifest, fragments, *backend),
        Command::NoiseSweep {
            hamiltonian,
            n_e,
            circuit,
            vqd_config,
        } => cmd_noise_sweep(cli, &mut manifest, hamiltonian.as_deref(), *n_e, circuit.as_deref(), vqd_config.as_deref()),
        Command::Report { rows, cutoff } => cmd_report(cli, &mut manifest, rows, *cutoff),
        Command::Oracle {
            hamiltonian,
            n_e,
            fragments,
            k,
        } => cmd_oracle(cli, &mut manifest, hamiltonian.as_deref(), *n_e, fragments.as_deref(), *k),
    };
    let code = match result {
        Ok(()) if manifest.success => ExitCode::SUCCESS,
        Ok(()) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            manifest.fail(e.to_string());
            ExitCode::from(2)
        }
    };
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&cli.out) {
        eprintln!("error: could not write manifest: {e}");
        return ExitCode::from(2);
    }
    for msg in &manifest.errors {
        log::warn!("{msg}");
    }
    code
}

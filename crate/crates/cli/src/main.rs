//! `almostlocal`: runs locality diagnostics from JSON configurations.

mod config;
mod presets;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{prepare, RunConfig};
use runner::{execute, Report, Sections, Table};

#[derive(Parser)]
#[command(name = "almostlocal", version, about = "Locality diagnostics for quantum spin lattice automorphisms")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random witnesses and observables; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV grids; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every section of a configuration.
    Run { config: PathBuf },
    /// Run a named preset.
    Preset {
        /// One of flip-2j, flip-signed-square, shift-j, heisenberg-chain.
        name: String,
        /// Print the preset configuration instead of running it.
        #[arg(long)]
        print: bool,
    },
    /// Seminorm profile `p_r`, `f_r` and `k`-norms of the configured observables.
    SeminormProfile { config: PathBuf },
    /// Certified brackets for `H(s, r)`.
    HScan { config: PathBuf },
    /// Lieb-Robinson check on sampled pairs.
    LrCheck { config: PathBuf },
    /// Measured ALP tail.
    Tail { config: PathBuf },
    /// (k)-ALP verdicts for the measured tail.
    Verdict { config: PathBuf },
    /// Reproducing-function sum bound on ball pairs.
    SumBound { config: PathBuf },
}

enum Source<'a> {
    Preset(RunConfig),
    File(&'a Path),
}

const EXIT_CERTIFIED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn load(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_outputs(dir: &Path, report: &Report, tables: &[Table], csv: bool) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    fs::write(dir.join("report.json"), json + "\n").map_err(|e| e.to_string())?;
    if csv {
        for t in tables {
            let path = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            w.write_record(&t.header).map_err(|e| e.to_string())?;
            for row in &t.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, source) = match &cli.command {
        Command::Preset { name, print } => match presets::preset(name) {
            Some(c) if *print => {
                println!("{}", serde_json::to_string_pretty(&c).expect("serializable"));
                return ExitCode::SUCCESS;
            }
            Some(c) => ("preset", Source::Preset(c)),
            None => {
                eprintln!("unknown preset {name:?}; known: {}", presets::NAMES.join(", "));
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        Command::Run { config } => ("run", Source::File(config)),
        Command::SeminormProfile { config } => ("seminorm-profile", Source::File(config)),
        Command::HScan { config } => ("h-scan", Source::File(config)),
        Command::LrCheck { config } => ("lr-check", Source::File(config)),
        Command::Tail { config } => ("tail", Source::File(config)),
        Command::Verdict { config } => ("verdict", Source::File(config)),
        Command::SumBound { config } => ("sum-bound", Source::File(config)),
    };
    let mut cfg = match source {
        Source::Preset(c) => c,
        Source::File(path) => match load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("invalid configuration: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
    };

    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    let out = cli.out.clone().or_else(|| cfg.output.dir.clone().map(PathBuf::from));
    let csv = cfg.output.csv;
    let cfg = Sections::for_command(name).restrict(cfg);
    let prepared = match prepare(cfg) {
        Ok(p) => p,
        Err(errors) => {
            eprintln!("invalid configuration:");
            for e in errors {
                eprintln!("  {e}");
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(n) = prepared.config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let (report, tables) = match execute(&prepared, name) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    for a in &report.assertions {
        eprintln!(
            "{} [{}] {}: {}",
            if a.passed { "PASS" } else { "FAIL" },
            if a.certified { "certified" } else { "evidence" },
            a.name,
            a.detail
        );
    }
    match &out {
        Some(dir) => {
            if let Err(e) = write_outputs(dir, &report, &tables, csv) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_RUNTIME);
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("serializable")),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CERTIFIED)
    }
}

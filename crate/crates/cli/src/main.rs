use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pfspace::check::{replay, Verdict};
use pfspace_cli::config::{ExperimentConfig, SuiteName};
use pfspace_cli::report::read_records;
use pfspace_cli::run_with_threads;
use pfspace_cli::suites::RunError;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "pfspace", version, about = "Run and replay p-operator space check suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a config file and write the reports.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute stored records from their witnesses.
    Replay { record: PathBuf },
    /// List the registered suites.
    ListSuites,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(match cli.command {
        Command::Run { config, seed, threads, out } => run(config, seed, threads, out),
        Command::Replay { record } => replay_file(record),
        Command::ListSuites => {
            for s in SuiteName::ALL {
                println!("{:<20} {}", s.as_str(), s.description());
            }
            EXIT_OK
        }
    })
}

fn run(path: PathBuf, seed: Option<u64>, threads: Option<usize>, out: Option<PathBuf>) -> u8 {
    let mut config = match ExperimentConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = out {
        config.output.dir = o;
    }
    let report = match run_with_threads(&config, threads) {
        Ok(r) => r,
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    match report.write(&config.output.dir) {
        Ok(json) => {
            for s in &report.summary {
                println!("{:<20} {:>6} records  {:>6} PASS  {:>4} FAIL  {:>4} INCONCLUSIVE", s.suite, s.records, s.pass, s.fail, s.inconclusive);
            }
            println!("report written to {}", json.display());
        }
        Err(e) => {
            eprintln!("error: cannot write reports to {}: {e}", config.output.dir.display());
            return EXIT_CONFIG;
        }
    }
    if report.has_failures() {
        EXIT_FAIL
    } else {
        EXIT_OK
    }
}

fn replay_file(path: PathBuf) -> u8 {
    let records = match std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| read_records(&t).map_err(|e| e.to_string())) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let mut status = EXIT_OK;
    for r in &records {
        match replay(r) {
            Ok(v) => {
                println!("{:<20} {:<18} {} {}", r.suite, r.check, r.instance, v);
                if v == Verdict::Fail {
                    status = status.max(EXIT_FAIL);
                }
            }
            Err(e) => {
                println!("{:<20} {:<18} {} {e}", r.suite, r.check, r.instance);
                status = EXIT_FAIL;
            }
        }
    }
    status
}

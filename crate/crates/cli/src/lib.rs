//! Configuration-driven runner for the check suites: builds groups,
//! representations and families from a TOML config, runs the named suites
//! on a work pool and emits deterministic reports.

pub mod config;
pub mod report;
pub mod suites;

use config::{ExperimentConfig, SuiteName};
use report::{Report, SuiteSummary};
use suites::{Context, RunError};

/// Runs every configured suite (each once, in config order) on the current
/// rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    let ctx = Context::new(config)?;
    let mut seen: Vec<SuiteName> = Vec::new();
    let mut summary = Vec::new();
    let mut records = Vec::new();
    for &suite in &config.suites {
        if seen.contains(&suite) {
            continue;
        }
        seen.push(suite);
        let recs = ctx.run_suite(suite)?;
        summary.push(SuiteSummary::of(suite.as_str(), &recs));
        records.extend(recs);
    }
    Ok(Report { seed: config.seed, p: config.p, group_order: ctx.group.order(), summary, records })
}

/// Runs on a dedicated pool of `threads` workers (all cores when `None`).
pub fn run_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<Report, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| run(config))
}

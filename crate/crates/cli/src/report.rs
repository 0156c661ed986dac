use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pfspace::check::{CheckRecord, Verdict};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub records: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

impl SuiteSummary {
    pub fn of(suite: &str, records: &[CheckRecord]) -> Self {
        let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
        Self {
            suite: suite.into(),
            records: records.len(),
            pass: count(Verdict::Pass),
            fail: count(Verdict::Fail),
            inconclusive: count(Verdict::Inconclusive),
        }
    }

    pub fn inconclusive_fraction(&self) -> f64 {
        if self.records == 0 {
            0.0
        } else {
            self.inconclusive as f64 / self.records as f64
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub p: f64,
    pub group_order: usize,
    pub summary: Vec<SuiteSummary>,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn has_failures(&self) -> bool {
        self.summary.iter().any(|s| s.fail > 0)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteSummary> {
        self.summary.iter().find(|s| s.suite == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {}  p {}  |G| {}", self.seed, self.p, self.group_order);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<20} {:>8} {:>8} {:>8} {:>13}", "suite", "records", "PASS", "FAIL", "INCONCLUSIVE");
        for s in &self.summary {
            let _ = writeln!(out, "{:<20} {:>8} {:>8} {:>8} {:>13}", s.suite, s.records, s.pass, s.fail, s.inconclusive);
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<20} {:<18} {:<24} {:<16} {:>24} {:>24} {:>9} {:<12}",
            "suite", "check", "instance", "hash", "lhs", "rhs", "tol", "verdict"
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:<20} {:<18} {:<24} {:<16} {:>24} {:>24} {:>9.1e} {:<12}",
                r.suite,
                r.check,
                r.label,
                r.instance,
                interval(r.lhs_value.lo, r.lhs_value.hi),
                interval(r.rhs_value.lo, r.rhs_value.hi),
                r.tolerance,
                r.verdict
            );
        }
        out
    }

    /// Writes `report.json`, `report.txt` and one file per FAIL record under
    /// `failures/`. Returns the path of the JSON report.
    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let json = dir.join("report.json");
        std::fs::write(&json, self.to_json())?;
        std::fs::write(dir.join("report.txt"), self.table())?;
        let failures: Vec<&CheckRecord> = self.records.iter().filter(|r| r.verdict == Verdict::Fail).collect();
        if !failures.is_empty() {
            let fdir = dir.join("failures");
            std::fs::create_dir_all(&fdir)?;
            for r in failures {
                let body = serde_json::to_string_pretty(r).expect("records serialize");
                std::fs::write(fdir.join(format!("{}-{}-{}.json", r.suite, r.check, r.instance)), body)?;
            }
        }
        Ok(json)
    }
}

fn interval(lo: f64, hi: f64) -> String {
    if lo == hi {
        format!("{lo:.8}")
    } else {
        format!("[{lo:.8}, {hi:.8}]")
    }
}

/// Records stored in a file: a whole report, a list of records or a single one.
pub fn read_records(text: &str) -> Result<Vec<CheckRecord>, serde_json::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Stored {
        Report(Report),
        Many(Vec<CheckRecord>),
        One(Box<CheckRecord>),
    }
    Ok(match serde_json::from_str::<Stored>(text)? {
        Stored::Report(r) => r.records,
        Stored::Many(v) => v,
        Stored::One(r) => vec![*r],
    })
}

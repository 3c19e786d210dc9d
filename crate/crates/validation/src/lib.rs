//! Shared plumbing for the acceptance checks: a tiny result ledger and the
//! lookup for the public NASA 93 dataset.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nfseer::dataset::{load_projects, Format, LoadOptions};
use nfseer::ProjectRecord;

/// Environment variable naming the NASA 93 file (PROMISE ARFF or cocomo-csv).
pub const NASA93_ENV: &str = "NASA93_PATH";

/// Outcome of one criterion.
#[derive(Debug)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn pass(detail: impl Into<String>) -> Self {
        Verdict {
            passed: true,
            detail: detail.into(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Verdict {
            passed: false,
            detail: detail.into(),
        }
    }

    pub fn check(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

/// Runs criteria in order, printing one line each, and remembers failures.
#[derive(Default)]
pub struct Ledger {
    failed: Vec<usize>,
}

impl Ledger {
    pub fn run(&mut self, number: usize, title: &str, budget: Duration, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Verdict::fail(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = verdict.passed && in_time;
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s, over the {}s budget", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!(
            "criterion {number:>2} {} {title}: {} ({timing})",
            if passed { "PASS" } else { "FAIL" },
            verdict.detail
        );
        if !passed {
            self.failed.push(number);
        }
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }
}

/// Candidate locations for the NASA 93 data, in lookup order.
pub fn nasa93_candidates() -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Some(p) = std::env::var_os(NASA93_ENV) {
        out.push(PathBuf::from(p));
    }
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data");
    out.push(data.join("nasa93.arff"));
    out.push(data.join("nasa93.csv"));
    out
}

/// Loads and converts NASA 93 to SEER ratings, or explains why it could not.
pub fn load_nasa93() -> Result<Vec<ProjectRecord>, String> {
    let candidates = nasa93_candidates();
    let Some(path) = candidates.iter().find(|p| p.is_file()) else {
        let tried: Vec<String> = candidates.iter().map(|p| p.display().to_string()).collect();
        return Err(format!(
            "NASA 93 data not found (set {NASA93_ENV}; tried {})",
            tried.join(", ")
        ));
    };
    let format = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff")) {
        Format::PromiseArff
    } else {
        Format::CocomoCsv
    };
    let outcome = load_projects(path, format, &LoadOptions::default()).map_err(|e| e.to_string())?;
    if outcome.records.is_empty() {
        return Err(format!("{} holds no usable records", path.display()));
    }
    Ok(outcome.records)
}

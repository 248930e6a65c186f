//! The JSON report written by `verify` and combined by `report merge`.

use anyhow::{Context, Result};
use kslab::operators::Ellipticity;
use kslab::CheckReport;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Everything except `generated_at` is a function of the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    /// RFC 3339 wall-clock time; the only non-deterministic field
    pub generated_at: String,
    pub suite: SuiteMeta,
    pub environment: Environment,
    pub constants: BTreeMap<String, f64>,
    pub summary: Summary,
    pub reports: Vec<CheckReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteMeta {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub checks: Vec<CheckSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub reports: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    /// `None` when every check used its own default spacing
    pub h: Option<f64>,
    pub dim: Option<usize>,
    pub ellipticity: Ellipticity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(reports: &[CheckReport]) -> Summary {
        let passed = reports.iter().filter(|r| r.pass).count();
        Summary { total: reports.len(), passed, failed: reports.len() - passed }
    }
}

pub fn now() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_else(|_| "unknown".into())
}

impl ReportDocument {
    pub fn new(
        suite: &str,
        params: BTreeMap<String, f64>,
        results: Vec<(&str, Vec<CheckReport>)>,
        environment: Environment,
        constants: BTreeMap<String, f64>,
    ) -> ReportDocument {
        let checks = results
            .iter()
            .map(|(name, reps)| CheckSummary {
                name: name.to_string(),
                reports: reps.len(),
                failed: reps.iter().filter(|r| !r.pass).count(),
            })
            .collect();
        let reports: Vec<CheckReport> = results
            .into_iter()
            .flat_map(|(name, reps)| {
                reps.into_iter().map(move |mut r| {
                    r.name = format!("{name}: {}", r.name);
                    r
                })
            })
            .collect();
        ReportDocument {
            generated_at: now(),
            suite: SuiteMeta { name: suite.to_string(), params, checks },
            environment,
            constants,
            summary: Summary::of(&reports),
            reports,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<ReportDocument> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Concatenates reports in argument order. Suite names are joined with `+`;
/// parameters and constants are unioned, the first document winning on
/// conflicting keys, and the environment is taken from the first document.
pub fn merge(docs: Vec<ReportDocument>) -> Option<ReportDocument> {
    let mut it = docs.into_iter();
    let mut out = it.next()?;
    for d in it {
        out.suite.name = format!("{}+{}", out.suite.name, d.suite.name);
        for (k, v) in d.suite.params {
            out.suite.params.entry(k).or_insert(v);
        }
        for (k, v) in d.constants {
            out.constants.entry(k).or_insert(v);
        }
        out.suite.checks.extend(d.suite.checks);
        out.reports.extend(d.reports);
    }
    out.summary = Summary::of(&out.reports);
    out.generated_at = now();
    Some(out)
}

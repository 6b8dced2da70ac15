//! Runs a suite file: one experiment per section, report in section order.

use std::collections::BTreeMap;

use qlab_core::par::{self, Execution};
use serde::Serialize;

use crate::error::CliError;
use crate::experiments::{self, Check, Note};
use crate::ini::{self, Params};

/// The acceptance suite shipped with the binary.
pub const BUNDLED: &str = include_str!("../suites/acceptance.suite");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub experiment: String,
    pub criterion: u32,
    pub title: String,
    pub passed: bool,
    /// Set when the experiment could not run; it then counts as failed.
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub notes: Vec<Note>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub failed: Vec<String>,
    pub experiments: Vec<ExperimentReport>,
}

struct Job {
    name: String,
    def: &'static experiments::Experiment,
    entries: BTreeMap<String, String>,
}

/// Unknown experiments are rejected before anything runs. Unknown keys are
/// found once each experiment has read its parameters; both are
/// configuration errors rather than failed experiments.
fn plan(text: &str) -> Result<Vec<Job>, CliError> {
    let mut jobs = Vec::new();
    for s in ini::parse(text)? {
        let mut entries = s.entries;
        let id = entries
            .remove("experiment")
            .ok_or_else(|| CliError::Config(format!("[{}] (line {}) has no `experiment` key", s.name, s.line)))?;
        let def = experiments::find(&id)
            .ok_or_else(|| CliError::Config(format!("[{}] unknown experiment `{id}`", s.name)))?;
        jobs.push(Job { name: s.name, def, entries });
    }
    Ok(jobs)
}

pub fn run_suite(text: &str, seed: u64, exec: Execution) -> Result<SuiteReport, CliError> {
    let jobs = plan(text)?;
    let results = par::map(exec, &jobs, |job| {
        let mut params = Params::new(&job.name, job.entries.clone());
        let outcome = (job.def.run)(&mut params, seed);
        (outcome, params.finish())
    });
    let mut reports = Vec::with_capacity(jobs.len());
    for (job, (outcome, leftover)) in jobs.iter().zip(results) {
        // an unknown key invalidates the configuration as a whole
        leftover?;
        let (checks, notes, error) = match outcome {
            Ok(o) => (o.checks, o.notes, None),
            Err(e @ CliError::Config(_)) => return Err(e),
            Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
        };
        let passed = error.is_none() && checks.iter().all(|c| c.passed);
        reports.push(ExperimentReport {
            name: job.name.clone(),
            experiment: job.def.id.into(),
            criterion: job.def.criterion,
            title: job.def.title.into(),
            passed,
            error,
            checks,
            notes,
        });
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    Ok(SuiteReport { passed: failed.is_empty(), failed, experiments: reports })
}

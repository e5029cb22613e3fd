//! Runs the acceptance criteria and checks that the resulting document is
//! reproducible.

use cocycle_core::acceptance::{run_all, AcceptanceOptions, CriterionOutcome};

use crate::report::{CheckRecord, CriterionRecord, ResultDocument, Status};

pub const DETERMINISM_ID: u32 = 11;
pub const DETERMINISM_NAME: &str = "determinism";

fn record(o: &CriterionOutcome) -> CriterionRecord {
    CriterionRecord {
        id: o.id,
        name: o.name.to_string(),
        passed: o.passed(),
        error: o.error.clone(),
        checks: o
            .checks
            .iter()
            .map(|c| CheckRecord::new(c.label.clone(), c.measured, c.threshold))
            .collect(),
    }
}

fn suite_document(config_hash: &str, opts: &AcceptanceOptions) -> ResultDocument {
    let mut doc = ResultDocument::new("selftest", config_hash.to_string());
    doc.criteria = run_all(opts).iter().map(record).collect();
    doc
}

/// Criteria 1-10 from the library plus the determinism criterion, which
/// reruns the suite and compares the serialized documents byte for byte.
pub fn selftest(config_hash: &str, opts: &AcceptanceOptions) -> ResultDocument {
    let mut doc = suite_document(config_hash, opts);
    let rerun = suite_document(config_hash, opts);
    let identical = doc.to_json() == rerun.to_json();
    let mut reference = if identical { 0.0 } else { 1.0 };
    if opts.corrupt_oracle == Some(DETERMINISM_ID) {
        reference += 1e-3;
    }
    doc.criteria.push(CriterionRecord {
        id: DETERMINISM_ID,
        name: DETERMINISM_NAME.to_string(),
        passed: reference == 0.0,
        error: None,
        checks: vec![CheckRecord::new("rerun differs from first run", reference, 0.0)],
    });
    let summary: Vec<CheckRecord> = doc
        .criteria
        .iter()
        .map(|c| {
            let worst = worst_check(&c.checks);
            CheckRecord {
                name: format!("criterion {} ({})", c.id, c.name),
                measured: worst.and_then(|k| k.measured),
                threshold: worst.map_or(0.0, |k| k.threshold),
                passed: c.passed,
            }
        })
        .collect();
    if summary.iter().any(|c| !c.passed) {
        doc.status = Status::Failed;
    }
    doc.checks = summary;
    doc.diagnostic(
        "criteria_passed",
        doc.criteria.iter().filter(|c| c.passed).count() as f64,
    );
    doc.diagnostic("criteria_total", doc.criteria.len() as f64);
    doc
}

/// Failing checks first, then the largest `measured / threshold`.
pub fn worst_check(checks: &[CheckRecord]) -> Option<&CheckRecord> {
    let key = |c: &CheckRecord| {
        let ratio = match c.measured {
            Some(0.0) => 0.0,
            Some(m) => m / c.threshold,
            None => f64::INFINITY,
        };
        (!c.passed, ratio)
    };
    checks
        .iter()
        .max_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal))
}

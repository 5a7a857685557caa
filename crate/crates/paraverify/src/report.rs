//! Verification results and their JSON / Markdown renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Deviation at or above which an expected failure counts as a real failure.
pub const DEFAULT_MIN_FAIL: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    /// Deviation must stay within the tolerance.
    #[default]
    Pass,
    /// Deviation must reach `min_fail`; the relation is known not to hold.
    Fail,
    /// Recorded only; never affects the outcome.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub source: String,
    pub category: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_assignment: BTreeMap<String, usize>,
    pub expect: Expectation,
    pub min_fail: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl ReportEntry {
    pub fn new(source: impl Into<String>, category: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        ReportEntry {
            source: source.into(),
            category: category.into(),
            max_deviation,
            tolerance,
            pass: max_deviation.is_finite() && max_deviation <= tolerance,
            worst_assignment: BTreeMap::new(),
            expect: Expectation::Pass,
            min_fail: DEFAULT_MIN_FAIL,
            skipped: None,
        }
    }

    pub fn operator(source: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self::new(source, "operator", max_deviation, tolerance)
    }

    pub fn vacuum(source: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self::new(source, "vacuum", max_deviation, tolerance)
    }

    pub fn skipped(source: impl Into<String>, category: impl Into<String>, tolerance: f64, reason: impl Into<String>) -> Self {
        let mut e = Self::new(source, category, 0.0, tolerance);
        e.skipped = Some(reason.into());
        e
    }

    pub fn expect_fail(mut self, min_fail: f64) -> Self {
        self.expect = Expectation::Fail;
        self.min_fail = min_fail;
        self
    }

    pub fn report_only(mut self) -> Self {
        self.expect = Expectation::Report;
        self
    }

    pub fn with_assignment(mut self, assignment: BTreeMap<String, usize>) -> Self {
        self.worst_assignment = assignment;
        self
    }

    /// Whether the entry meets its expectation.
    pub fn ok(&self) -> bool {
        if self.skipped.is_some() {
            return true;
        }
        match self.expect {
            Expectation::Pass => self.pass,
            Expectation::Fail => self.max_deviation.is_nan() || self.max_deviation >= self.min_fail,
            Expectation::Report => true,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.skipped.is_some() {
            return "skipped";
        }
        match (self.expect, self.ok()) {
            (Expectation::Pass, true) => "pass",
            (Expectation::Pass, false) => "FAIL",
            (Expectation::Fail, true) => "expected-fail",
            (Expectation::Fail, false) => "UNEXPECTED-PASS",
            (Expectation::Report, _) => {
                if self.pass {
                    "report(pass)"
                } else {
                    "report(fail)"
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub entries: Vec<ReportEntry>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ReportEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.entries.extend(other.entries);
    }

    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(ReportEntry::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.ok())
    }

    pub fn find(&self, source: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.source == source)
    }

    /// Largest deviation among entries expected to pass.
    pub fn worst_passing_deviation(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.expect == Expectation::Pass && e.skipped.is_none())
            .map(|e| e.max_deviation)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.entries).expect("report entries serialize")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| source | category | max deviation | tolerance | status | worst assignment |\n");
        s.push_str("|---|---|---|---|---|---|\n");
        for e in &self.entries {
            let assign = e
                .worst_assignment
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(", ");
            let source = e.source.replace('|', "\\|");
            let dev = match &e.skipped {
                Some(reason) => format!("skipped: {reason}"),
                None => format!("{:.3e}", e.max_deviation),
            };
            let _ = writeln!(
                s,
                "| `{source}` | {} | {dev} | {:.1e} | {} | {assign} |",
                e.category,
                e.tolerance,
                e.status()
            );
        }
        s
    }
}

/// Running maximum of deviations keyed by relation name.
pub(crate) struct Tally {
    order: Vec<(String, f64, &'static str)>,
    dev: BTreeMap<String, (f64, BTreeMap<String, usize>)>,
}

impl Tally {
    pub(crate) fn new() -> Self {
        Tally {
            order: Vec::new(),
            dev: BTreeMap::new(),
        }
    }

    pub(crate) fn rec(&mut self, name: &str, tol: f64, cat: &'static str, d: f64, assign: &[(&str, usize)]) {
        if !self.dev.contains_key(name) {
            self.order.push((name.to_string(), tol, cat));
        }
        let e = self.dev.entry(name.to_string()).or_insert((f64::NEG_INFINITY, BTreeMap::new()));
        if d > e.0 || d.is_nan() {
            e.0 = d;
            e.1 = assign.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        }
    }

    pub(crate) fn report(self) -> VerificationReport {
        let mut rep = VerificationReport::new();
        for (name, tol, cat) in self.order {
            let (d, assign) = self.dev[&name].clone();
            rep.push(ReportEntry::new(name, cat, d, tol).with_assignment(assign));
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectations() {
        assert!(ReportEntry::operator("x", 1e-12, 1e-10).ok());
        assert!(!ReportEntry::operator("x", 1e-3, 1e-10).ok());
        assert!(ReportEntry::operator("x", 0.7, 1e-10).expect_fail(0.5).ok());
        assert!(!ReportEntry::operator("x", 0.1, 1e-10).expect_fail(0.5).ok());
        assert!(ReportEntry::operator("x", 9.0, 1e-10).report_only().ok());
        assert!(!ReportEntry::operator("x", f64::NAN, 1e-10).ok());
    }

    #[test]
    fn markdown_has_one_row_per_entry() {
        let mut r = VerificationReport::new();
        r.push(ReportEntry::operator("a|b", 0.0, 1e-10));
        r.push(ReportEntry::vacuum("c", 1.0, 1e-10).expect_fail(0.5));
        let md = r.to_markdown();
        assert_eq!(md.lines().count(), 4);
        assert!(md.contains("a\\|b"));
        assert!(md.contains("expected-fail"));
    }
}

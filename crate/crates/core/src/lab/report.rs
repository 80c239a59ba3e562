use serde::{Deserialize, Serialize};

/// How a check affects the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// A finite-n inequality that must hold for every n.
    Bound,
    /// A `final <= first / factor` or sweep-end threshold.
    Trend,
    /// Reported only.
    Info,
}

/// One recorded inequality `measured <= limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, kind: CheckKind, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            measured,
            limit,
            passed: measured <= limit,
        }
    }

    /// Counts toward the exit status.
    pub fn is_hard(&self) -> bool {
        self.kind != CheckKind::Info
    }
}

/// Per-n (or per-point) metrics, one row per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl MetricTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV text with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format_cell(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn format_cell(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

/// Wall-clock data kept apart from the deterministic part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub title: String,
    /// The fully resolved configuration.
    pub config: serde_json::Value,
    pub seed: u64,
    pub tables: Vec<MetricTable>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<Timestamp>,
}

impl ExperimentReport {
    pub fn new(id: &str, title: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            id: id.to_string(),
            title: title.to_string(),
            config,
            seed,
            tables: Vec::new(),
            checks: Vec::new(),
            passed: true,
            timestamp: None,
        }
    }

    pub fn check(&mut self, check: Check) {
        if check.is_hard() && !check.passed {
            self.passed = false;
        }
        self.checks.push(check);
    }

    pub fn bound(&mut self, name: impl Into<String>, measured: f64, limit: f64) {
        self.check(Check::new(name, CheckKind::Bound, measured, limit));
    }

    pub fn trend(&mut self, name: impl Into<String>, measured: f64, limit: f64) {
        self.check(Check::new(name, CheckKind::Trend, measured, limit));
    }

    pub fn info(&mut self, name: impl Into<String>, measured: f64, limit: f64) {
        self.check(Check::new(name, CheckKind::Info, measured, limit));
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.is_hard() && !c.passed)
    }

    /// Re-derives every verdict from the stored numbers.
    pub fn recompute(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.passed == (c.measured <= c.limit) && (!c.is_hard() || c.passed))
    }

    pub fn table(&self, name: &str) -> Option<&MetricTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn info_checks_do_not_fail_a_report() {
        let mut r = ExperimentReport::new("x", "t", serde_json::Value::Null, 0);
        r.info("a", 2.0, 1.0);
        assert!(r.passed);
        r.bound("b", 2.0, 1.0);
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
        assert!(!r.recompute());
    }

    #[test]
    fn csv_has_header() {
        let mut t = MetricTable::new("m", &["n", "v"]);
        t.push(vec![10.0, 0.25]);
        assert_eq!(t.to_csv(), "n,v\n10,2.5e-1\n");
    }
}

//! The report every command produces, rendered either as aligned text or as
//! JSON. Both renderings come from the same value and carry no timestamps,
//! so identical inputs give byte-identical output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

const MAX_COLUMN: usize = 36;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    /// Measured distance from the expectation, when one is meaningful.
    pub deviation: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub artifact_version: String,
    pub command: String,
    pub checks: Vec<Check>,
    pub values: Vec<NamedValue>,
    pub notes: Vec<String>,
    overall: bool,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            checks: Vec::new(),
            values: Vec::new(),
            notes: Vec::new(),
            overall: true,
        }
    }

    /// Conjunction of all checks; true for a report without checks.
    pub fn overall(&self) -> bool {
        self.overall
    }

    /// Records a check. Non-finite deviations are stored as absent so the
    /// JSON form stays lossless.
    pub fn check(
        &mut self,
        name: impl Into<String>,
        expected: impl Into<String>,
        actual: impl Into<String>,
        deviation: Option<f64>,
        pass: bool,
    ) -> bool {
        self.checks.push(Check {
            name: name.into(),
            expected: expected.into(),
            actual: actual.into(),
            deviation: deviation.filter(|d| d.is_finite()),
            pass,
        });
        self.overall &= pass;
        pass
    }

    /// Records a check of `actual` against `expected` within `tol`.
    pub fn check_close(&mut self, name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> bool {
        let dev = (actual - expected).abs();
        self.check(
            name,
            format!("{expected:.17} ± {tol:e}"),
            format!("{actual:.17}"),
            Some(dev),
            dev < tol,
        )
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64) {
        self.values.push(NamedValue {
            name: name.into(),
            value,
        });
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn get_value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    /// True when the stored verdict matches the checks, e.g. after loading a
    /// report from elsewhere.
    pub fn is_consistent(&self) -> bool {
        self.overall == self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qpp {}: {}", self.artifact_version, self.command);

        if !self.checks.is_empty() {
            let name_w = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
            // Long entries overflow rather than widen every row.
            let width = |f: fn(&Check) -> &str| {
                self.checks
                    .iter()
                    .map(|c| f(c).chars().count())
                    .max()
                    .unwrap_or(0)
                    .min(MAX_COLUMN)
            };
            let exp_w = width(|c| &c.expected);
            let act_w = width(|c| &c.actual);
            out.push('\n');
            for c in &self.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                let dev = c.deviation.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "-".into());
                let line = format!(
                    "  {verdict}  {:<name_w$}  expected {:<exp_w$}  actual {:<act_w$}  deviation {dev}",
                    c.name, c.expected, c.actual
                );
                let _ = writeln!(out, "{}", line.trim_end());
            }
        }

        if !self.values.is_empty() {
            let w = self.values.iter().map(|v| v.name.chars().count()).max().unwrap_or(0);
            out.push('\n');
            for v in &self.values {
                let _ = writeln!(out, "  {:<w$}  {}", v.name, v.value);
            }
        }

        if !self.notes.is_empty() {
            out.push('\n');
            for n in &self.notes {
                let _ = writeln!(out, "  {n}");
            }
        }

        let _ = writeln!(out, "\noverall: {}", if self.overall { "PASS" } else { "FAIL" });
        out
    }
}

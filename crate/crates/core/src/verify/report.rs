use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pass criterion attached to a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Budget {
    /// `implied_constant <= bound`
    ConstantAtMost { bound: f64 },
    /// `lhs - rhs_kernel <= bound`
    ExcessAtMost { bound: f64 },
    /// `exponents[name] >= bound`
    ExponentAtLeast { exponent: String, bound: f64 },
    /// `lo < exponents[name] <= hi`
    ExponentIn { exponent: String, lo: f64, hi: f64 },
    /// No calibrated budget: passes whenever the implied constant is finite and non-negative.
    ReportOnly,
}

impl Budget {
    fn label(&self) -> (&'static str, String) {
        match self {
            Budget::ConstantAtMost { bound } => ("constant_at_most", bound.to_string()),
            Budget::ExcessAtMost { bound } => ("excess_at_most", bound.to_string()),
            Budget::ExponentAtLeast { exponent, bound } => ("exponent_at_least", format!("{exponent}>={bound}")),
            Budget::ExponentIn { exponent, lo, hi } => ("exponent_in", format!("{lo}<{exponent}<={hi}")),
            Budget::ReportOnly => ("report_only", String::new()),
        }
    }
}

/// One measured inequality `lhs <= C * rhs_kernel`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Checker name, e.g. `energy_estimate`.
    pub name: String,
    /// Which inequality was measured, in words.
    pub estimate: String,
    pub lhs: f64,
    /// Right-hand side with every unspecified constant set to 1.
    pub rhs_kernel: f64,
    /// `lhs / rhs_kernel` (0 when both vanish).
    pub implied_constant: f64,
    pub exponents: BTreeMap<String, f64>,
    pub parameters: BTreeMap<String, f64>,
    /// Secondary measured quantities.
    pub extras: BTreeMap<String, f64>,
    pub grid: String,
    pub budget: Budget,
    /// Set when a rate check had nothing to measure (e.g. a constant gradient).
    pub skipped: bool,
    pub pass: bool,
    pub note: String,
}

/// Column order of the CSV export.
pub const CSV_COLUMNS: [&str; 14] = [
    "name",
    "estimate",
    "lhs",
    "rhs_kernel",
    "implied_constant",
    "pass",
    "skipped",
    "budget_kind",
    "budget",
    "exponents",
    "parameters",
    "extras",
    "grid",
    "note",
];

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

impl EstimateReport {
    pub fn new(name: &str, estimate: &str, lhs: f64, rhs_kernel: f64, grid: String) -> Self {
        let mut r = EstimateReport {
            name: name.into(),
            estimate: estimate.into(),
            lhs,
            rhs_kernel,
            implied_constant: ratio(lhs, rhs_kernel),
            exponents: BTreeMap::new(),
            parameters: BTreeMap::new(),
            extras: BTreeMap::new(),
            grid,
            budget: Budget::ReportOnly,
            skipped: false,
            pass: false,
            note: String::new(),
        };
        r.evaluate();
        r
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.into(), value);
        self
    }

    pub fn exponent(mut self, key: &str, value: f64) -> Self {
        self.exponents.insert(key.into(), value);
        self.evaluate();
        self
    }

    pub fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.into(), value);
        self
    }

    pub fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Replaces the budget and recomputes the pass flag.
    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self.evaluate();
        self
    }

    /// Recomputes `pass` from the current budget and measurements.
    pub fn evaluate(&mut self) {
        let c = self.implied_constant;
        let sane = c.is_finite() && c >= 0.0;
        self.pass = match &self.budget {
            Budget::ReportOnly => sane,
            Budget::ConstantAtMost { bound } => sane && c <= *bound,
            Budget::ExcessAtMost { bound } => self.lhs - self.rhs_kernel <= *bound,
            Budget::ExponentAtLeast { exponent, bound } => match self.exponents.get(exponent) {
                Some(e) => *e >= *bound,
                None => self.skipped(),
            },
            Budget::ExponentIn { exponent, lo, hi } => match self.exponents.get(exponent) {
                Some(e) => *e > *lo && *e <= *hi,
                None => self.skipped(),
            },
        };
    }

    fn skipped(&self) -> bool {
        self.skipped
    }

    pub fn skip(mut self, note: impl Into<String>) -> Self {
        self.skipped = true;
        self.note = note.into();
        self.evaluate();
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Values in [`CSV_COLUMNS`] order.
    pub fn csv_record(&self) -> Vec<String> {
        let join = |m: &BTreeMap<String, f64>| m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        let (kind, bound) = self.budget.label();
        vec![
            self.name.clone(),
            self.estimate.clone(),
            self.lhs.to_string(),
            self.rhs_kernel.to_string(),
            self.implied_constant.to_string(),
            self.pass.to_string(),
            self.skipped.to_string(),
            kind.to_string(),
            bound,
            join(&self.exponents),
            join(&self.parameters),
            join(&self.extras),
            self.grid.clone(),
            self.note.clone(),
        ]
    }
}

/// Writes reports as CSV rows, with a header line when `header` is set.
pub fn write_csv<W: Write>(reports: &[EstimateReport], header: bool, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let fail = |e: csv::Error| Error::Format(e.to_string());
    if header {
        out.write_record(CSV_COLUMNS).map_err(fail)?;
    }
    for r in reports {
        out.write_record(r.csv_record()).map_err(fail)?;
    }
    out.flush()?;
    Ok(())
}

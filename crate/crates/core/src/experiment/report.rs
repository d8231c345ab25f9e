use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::config::{Command, ExperimentConfig};

/// Header plus string cells, written as comma-separated text with LF endings.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip decimal form of a float.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Vector cell, `;`-separated so it stays one CSV field.
pub fn vec_cell(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

pub fn flag(b: bool) -> String {
    if b { "pass".into() } else { "fail".into() }
}

/// A gated comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value < tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub command: Command,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub table: Table,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub wall_clock_seconds: f64,
    pub version: &'static str,
}

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig, table: Table) -> Self {
        Self {
            command: cfg.command,
            seed: cfg.seed,
            params: cfg.effective(),
            table,
            checks: Vec::new(),
            notes: Vec::new(),
            wall_clock_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_csv(&self) -> String {
        self.table.to_csv()
    }

    /// JSON summary without the table body.
    pub fn summary_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report is serialisable");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("table");
            obj.insert("rows".into(), self.table.rows.len().into());
            obj.insert("all_passed".into(), self.all_passed().into());
        }
        serde_json::to_string_pretty(&value).expect("report is serialisable")
    }

    /// One line per gated check.
    pub fn check_lines(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {} value={} tol={}", if c.passed { "PASS" } else { "FAIL" }, c.name, num(c.value), num(c.tolerance));
        }
        s
    }
}

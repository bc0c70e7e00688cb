//! Named Monte Carlo estimates shared by all experiments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stats::Summary;

/// Seeded Monte Carlo summary: named estimates with their standard errors.
///
/// Keys are kept sorted so the serialized form does not depend on insertion
/// order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub estimates: BTreeMap<String, f64>,
    pub stderrs: BTreeMap<String, f64>,
    pub reps: usize,
    /// Plot-ready rows, e.g. one row per grid point.
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub table: Table,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A small column-oriented table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

impl Report {
    pub fn new(reps: usize) -> Self {
        Report {
            reps,
            ..Default::default()
        }
    }

    /// Records a plain value with no standard error.
    pub fn set(&mut self, name: &str, value: f64) -> &mut Self {
        self.estimates.insert(name.to_string(), value);
        self
    }

    /// Records a value together with its standard error.
    pub fn set_with_err(&mut self, name: &str, value: f64, stderr: f64) -> &mut Self {
        self.estimates.insert(name.to_string(), value);
        self.stderrs.insert(name.to_string(), stderr);
        self
    }

    /// Records the mean of a sample under `name` and its standard error.
    pub fn set_summary(&mut self, name: &str, s: &Summary) -> &mut Self {
        self.set_with_err(name, s.mean, s.stderr)
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).copied()
    }

    pub fn stderr(&self, name: &str) -> Option<f64> {
        self.stderrs.get(name).copied()
    }

    /// Every recorded estimate is finite.
    pub fn all_finite(&self) -> bool {
        self.estimates.values().all(|v| v.is_finite())
            && self.stderrs.values().all(|v| v.is_finite())
    }
}

//! Versioned experiment reports.
//!
//! A report is a JSON document with the fixed top level
//! `{schema_version, experiment, seed, assertions, tables}` plus, on disk,
//! one CSV per table and optional two-column plot files. Tables are purely
//! numeric and every cell must be finite — the writer enforces this, so a
//! NaN produced anywhere upstream fails the run instead of silently landing
//! in an artifact. Tables live in an ordered map and contain no derived
//! state, which together with seeded generation makes reports byte-stable.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{invalid, io, Result};

/// Version stamp written into every report.
pub const SCHEMA_VERSION: u32 = 1;

/// One embedded pass/fail check with a human-readable detail line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A named numeric table: column headers plus rows of equal width.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// The report document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub assertions: Vec<Assertion>,
    pub tables: BTreeMap<String, Table>,
}

impl Report {
    /// Start an empty report for one experiment run.
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            seed,
            assertions: Vec::new(),
            tables: BTreeMap::new(),
        }
    }

    /// Record one pass/fail check.
    pub fn push_assertion(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    /// Record a check that `value` lies in `[lo, hi]`.
    pub fn assert_in_range(&mut self, name: impl Into<String>, value: f64, lo: f64, hi: f64) {
        let passed = value.is_finite() && (lo..=hi).contains(&value);
        self.push_assertion(name, passed, format!("value {value} expected in [{lo}, {hi}]"));
    }

    /// Insert a table after validating shape and finiteness.
    pub fn insert_table(
        &mut self,
        name: impl Into<String>,
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<()> {
        let name = name.into();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(invalid(format!(
                    "table `{name}` row {i} has {} cells, expected {}",
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(invalid(format!(
                    "table `{name}` row {i} contains a non-finite cell ({bad})"
                )));
            }
        }
        self.tables.insert(name, Table { columns, rows });
        Ok(())
    }

    /// Whether every embedded assertion passed.
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// The failed assertions, if any.
    pub fn failures(&self) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| !a.passed).collect()
    }

    /// Write `report.json` plus one CSV per table into `dir` (created if
    /// missing). Existing files of the same names are overwritten.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        io::write_json(dir.join("report.json"), self)?;
        for (name, table) in &self.tables {
            io::write_matrix_csv(
                dir.join(format!("{name}.csv")),
                &table.columns,
                &table.rows,
            )?;
        }
        Ok(())
    }
}

/// Write a two-column plot file `<name>.csv` with headers `(x, y)` labels.
///
/// Plot files are a convenience projection of report tables for external
/// plotting tools; they follow the same finiteness rule.
pub fn write_plot(
    dir: impl AsRef<Path>,
    name: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
) -> Result<()> {
    let rows: Vec<Vec<f64>> = points.iter().map(|(x, y)| vec![*x, *y]).collect();
    for (i, row) in rows.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("plot `{name}` point {i} is non-finite")));
        }
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    io::write_matrix_csv(
        dir.join(format!("{name}.csv")),
        &[x_label.to_string(), y_label.to_string()],
        &rows,
    )
}

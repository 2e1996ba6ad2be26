//! The universal sample container: an n×d matrix of observations.

use ndarray::{Array2, ArrayView2};
use std::path::Path;

use crate::{MetricsError, Result};

/// An empirical sample: `n` observations (rows) of `d` real features.
///
/// Invariants enforced at construction: `n ≥ 1`, `d ≥ 1`, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Array2<f64>,
}

impl Sample {
    /// Wrap an observation matrix, validating the sample invariants.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(MetricsError::InvalidParameter {
                name: "data",
                message: "sample must contain at least one observation".into(),
            });
        }
        if data.ncols() == 0 {
            return Err(MetricsError::InvalidParameter {
                name: "data",
                message: "sample must have at least one feature".into(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MetricsError::NonFinite { context: "sample" });
        }
        Ok(Self { data })
    }

    /// Build a one-dimensional sample from a slice of scalars.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        let data = Array2::from_shape_vec((values.len(), 1), values.to_vec())
            .expect("shape follows from the slice length");
        Self::new(data)
    }

    /// Build a sample from observation rows; all rows must share a length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(MetricsError::InvalidParameter {
                name: "rows",
                message: "sample must contain at least one observation".into(),
            });
        }
        let d = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(MetricsError::Csv(format!(
                    "row {} has {} fields, expected {}",
                    i,
                    row.len(),
                    d
                )));
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data =
            Array2::from_shape_vec((rows.len(), d), flat).expect("rows validated to equal length");
        Self::new(data)
    }

    /// Load a sample from a CSV file of floats, one observation per row.
    ///
    /// Both headerless files and files with a single non-numeric header row
    /// are accepted: if any field of the first record fails to parse as a
    /// float, that record is treated as a header and skipped.
    pub fn from_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())
            .map_err(|e| MetricsError::Csv(e.to_string()))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| MetricsError::Csv(e.to_string()))?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(e) if i == 0 => {
                    // A single leading header row is tolerated.
                    let _ = e;
                }
                Err(e) => {
                    return Err(MetricsError::Csv(format!(
                        "row {}: unparseable field ({})",
                        i, e
                    )))
                }
            }
        }
        Self::from_rows(&rows)
    }

    /// Number of observations.
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    /// Number of features.
    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// Borrow the underlying observation matrix.
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    /// Consume the sample and return the observation matrix.
    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }
}

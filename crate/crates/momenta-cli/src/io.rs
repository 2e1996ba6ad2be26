//! CSV and JSON input/output.
//!
//! Data files are CSV with one observation per row; both headerless files
//! and files with a single non-numeric header row load identically. Time
//! series are stored with one time step per row and one feature per column.
//! Models, configs, and reports are JSON. All writers emit platform- and
//! run-independent bytes: fields are formatted with the shortest float
//! round-trip representation and map keys are ordered.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use momenta_metrics::Sample;
use momenta_scitsm::DomainSeries;
use ndarray::{Array1, Array2, Array3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{invalid, Result};

/// Load a sample (`n×d`, one observation per row) from a CSV file.
pub fn read_sample(path: impl AsRef<Path>) -> Result<Sample> {
    Ok(Sample::from_csv(path)?)
}

/// Load a single-column CSV file as a vector.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let sample = read_sample(path)?;
    if sample.ncols() != 1 {
        return Err(invalid(format!(
            "{}: expected one column, found {}",
            path.display(),
            sample.ncols()
        )));
    }
    Ok(sample.view().column(0).to_vec())
}

/// Load a single-column CSV file of class indices.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let raw = read_vector(path)?;
    raw.iter()
        .map(|v| {
            let rounded = v.round();
            if (v - rounded).abs() > 1e-9 || rounded < 0.0 {
                Err(invalid(format!(
                    "{}: label {v} is not a nonnegative integer",
                    path.display()
                )))
            } else {
                Ok(rounded as usize)
            }
        })
        .collect()
}

/// Expand class indices to an `n×c` one-hot matrix.
pub fn labels_to_one_hot(labels: &[usize], class_count: usize) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((labels.len(), class_count));
    for (i, label) in labels.iter().enumerate() {
        if *label >= class_count {
            return Err(invalid(format!(
                "label {label} out of range for {class_count} classes"
            )));
        }
        out[[i, *label]] = 1.0;
    }
    Ok(out)
}

/// Write a numeric matrix as CSV with the given header row.
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    columns: &[String],
    rows: &[Vec<f64>],
) -> Result<()> {
    for row in rows {
        if row.len() != columns.len() {
            return Err(invalid(format!(
                "csv row has {} entries, header has {}",
                row.len(),
                columns.len()
            )));
        }
    }
    let mut text = String::new();
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path.as_ref(), text)?;
    Ok(())
}

/// Write an `n×d` sample as CSV with generated headers `x0..x{d−1}`.
pub fn write_sample_csv(path: impl AsRef<Path>, data: &ndarray::ArrayView2<'_, f64>) -> Result<()> {
    let columns: Vec<String> = (0..data.ncols()).map(|j| format!("x{j}")).collect();
    let rows: Vec<Vec<f64>> = data.rows().into_iter().map(|r| r.to_vec()).collect();
    write_matrix_csv(path, &columns, &rows)
}

/// Write class indices as a one-column CSV.
pub fn write_labels_csv(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let rows: Vec<Vec<f64>> = labels.iter().map(|l| vec![*l as f64]).collect();
    write_matrix_csv(path, &["label".to_string()], &rows)
}

/// Load one time series from CSV (rows = time steps, columns = features)
/// into the `d×t` layout used by the alignment crate.
pub fn read_series(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let sample = read_sample(path)?;
    Ok(sample.view().t().to_owned())
}

/// Write one `d×t` series as CSV with `t` rows and `d` feature columns.
pub fn write_series_csv(path: impl AsRef<Path>, series: &ndarray::ArrayView2<'_, f64>) -> Result<()> {
    let columns: Vec<String> = (0..series.nrows()).map(|c| format!("c{c}")).collect();
    let rows: Vec<Vec<f64>> = series.columns().into_iter().map(|c| c.to_vec()).collect();
    write_matrix_csv(path, &columns, &rows)
}

/// Read a JSON file into a value.
pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

/// Write a value as pretty-printed JSON with a trailing newline.
pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut file = fs::File::create(path.as_ref())?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// One domain of a multi-domain series bundle, as listed in `domains.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Directory-unique domain name; used for file naming and reporting.
    pub name: String,
    /// Descriptor vector `ρ`.
    pub rho: Vec<f64>,
    /// CSV files (relative to the bundle directory), one per series.
    pub files: Vec<String>,
}

/// Manifest of a series bundle directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleSpec {
    pub domains: Vec<DomainSpec>,
}

/// Load a bundle directory: `domains.json` plus the per-series CSV files it
/// references. Every series of a domain must share one `(d, t)` shape.
pub fn read_domain_bundle(dir: impl AsRef<Path>) -> Result<Vec<(String, DomainSeries)>> {
    let dir = dir.as_ref();
    let spec: BundleSpec = read_json(dir.join("domains.json"))?;
    if spec.domains.is_empty() {
        return Err(invalid(format!("{}: bundle lists no domains", dir.display())));
    }
    let mut out = Vec::with_capacity(spec.domains.len());
    for domain in &spec.domains {
        if domain.files.is_empty() {
            return Err(invalid(format!("domain `{}` lists no series files", domain.name)));
        }
        let mut series = Vec::with_capacity(domain.files.len());
        for file in &domain.files {
            series.push(read_series(dir.join(file))?);
        }
        let (d, t) = series[0].dim();
        let mut data = Array3::zeros((series.len(), d, t));
        for (i, s) in series.iter().enumerate() {
            if s.dim() != (d, t) {
                return Err(invalid(format!(
                    "domain `{}`: series shapes differ ({:?} vs {:?})",
                    domain.name,
                    s.dim(),
                    (d, t)
                )));
            }
            data.index_axis_mut(ndarray::Axis(0), i).assign(s);
        }
        let rho = Array1::from_vec(domain.rho.clone());
        out.push((domain.name.clone(), DomainSeries::new(data, rho)?));
    }
    Ok(out)
}

/// Write a bundle directory: one CSV per series plus `domains.json`.
pub fn write_domain_bundle(
    dir: impl AsRef<Path>,
    domains: &[(String, DomainSeries)],
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut specs = Vec::with_capacity(domains.len());
    for (name, series) in domains {
        let mut files = Vec::with_capacity(series.n_series());
        for i in 0..series.n_series() {
            let file = format!("{name}_series{i}.csv");
            let slice = series.data().index_axis(ndarray::Axis(0), i);
            write_series_csv(dir.join(&file), &slice)?;
            files.push(file);
        }
        specs.push(DomainSpec {
            name: name.clone(),
            rho: series.rho().to_vec(),
            files,
        });
    }
    write_json(dir.join("domains.json"), &BundleSpec { domains: specs })
}

//! JSON model files for the three trainable models.
//!
//! Files store parameters as flat row-major arrays next to explicit shape
//! metadata and a `kind` tag, so a file loaded by mistake into a different
//! reader fails loudly. Numbers use the shortest round-trip representation;
//! write followed by read reconstructs a model with bit-identical
//! predictions. The classifier file carries the feature scaler fitted at
//! training time, so evaluation inputs pass through the same map.

use std::path::Path;

use momenta_dipals::DiplsModel;
use momenta_mann::NetParams;
use momenta_scitsm::CorrectionModel;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::sampling::MinMaxScaler;
use crate::{invalid, io, Result};

/// Version stamp written into every model file.
pub const MODEL_SCHEMA_VERSION: u32 = 1;

fn check_header(kind_found: &str, kind_expected: &str, version: u32) -> Result<()> {
    if kind_found != kind_expected {
        return Err(invalid(format!(
            "model file holds `{kind_found}`, expected `{kind_expected}`"
        )));
    }
    if version != MODEL_SCHEMA_VERSION {
        return Err(invalid(format!(
            "unsupported model schema version {version} (supported: {MODEL_SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

fn to_matrix(flat: Vec<f64>, rows: usize, cols: usize, name: &str) -> Result<Array2<f64>> {
    if flat.len() != rows * cols {
        return Err(invalid(format!(
            "field `{name}` has {} entries, expected {rows}×{cols}",
            flat.len()
        )));
    }
    Ok(Array2::from_shape_vec((rows, cols), flat).expect("length checked"))
}

/// On-disk form of the classifier: four flat parameter blocks plus the
/// training-time feature scaler.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MannModelFile {
    pub schema_version: u32,
    pub kind: String,
    pub input_dim: usize,
    pub hidden_width: usize,
    pub class_count: usize,
    /// Row-major `hidden_width × input_dim`.
    pub w0: Vec<f64>,
    pub b0: Vec<f64>,
    /// Row-major `class_count × hidden_width`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Scaler fitted on the union of training inputs, if any.
    pub scaler: Option<MinMaxScaler>,
}

/// Write a classifier model file.
pub fn write_mann_model(
    path: impl AsRef<Path>,
    params: &NetParams,
    scaler: Option<&MinMaxScaler>,
) -> Result<()> {
    let file = MannModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        kind: "mann".to_string(),
        input_dim: params.input_dim(),
        hidden_width: params.hidden_width(),
        class_count: params.class_count(),
        w0: params.w0().iter().copied().collect(),
        b0: params.b0().to_vec(),
        w1: params.w1().iter().copied().collect(),
        b1: params.b1().to_vec(),
        scaler: scaler.cloned(),
    };
    io::write_json(path, &file)
}

/// Read a classifier model file back into parameters plus scaler.
pub fn read_mann_model(path: impl AsRef<Path>) -> Result<(NetParams, Option<MinMaxScaler>)> {
    let file: MannModelFile = io::read_json(path)?;
    check_header(&file.kind, "mann", file.schema_version)?;
    let w0 = to_matrix(file.w0, file.hidden_width, file.input_dim, "w0")?;
    let w1 = to_matrix(file.w1, file.class_count, file.hidden_width, "w1")?;
    let params = NetParams::new(w0, Array1::from_vec(file.b0), w1, Array1::from_vec(file.b1))?;
    Ok((params, file.scaler))
}

/// On-disk form of the regularized regression model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiplsModelFile {
    pub schema_version: u32,
    pub kind: String,
    pub input_dim: usize,
    pub n_components: usize,
    /// Row-major `input_dim × n_components` direction matrix.
    pub w: Vec<f64>,
    /// Row-major `input_dim × n_components` loading matrix.
    pub p: Vec<f64>,
    /// Inner regression coefficients, one per component.
    pub c: Vec<f64>,
    /// Assembled regression vector, length `input_dim`.
    pub b: Vec<f64>,
    pub x_mean_source: Vec<f64>,
    pub x_mean_target: Vec<f64>,
    pub y_mean: f64,
    pub gammas: Vec<f64>,
    pub variance_gaps: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Write a regression model file.
pub fn write_dipls_model(path: impl AsRef<Path>, model: &DiplsModel) -> Result<()> {
    let file = DiplsModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        kind: "dipals".to_string(),
        input_dim: model.input_dim(),
        n_components: model.n_components(),
        w: model.w().iter().copied().collect(),
        p: model.p().iter().copied().collect(),
        c: model.inner_coefficients().to_vec(),
        b: model.regression_vector().to_vec(),
        x_mean_source: model.x_mean_source().to_vec(),
        x_mean_target: model.x_mean_target().to_vec(),
        y_mean: model.y_mean(),
        gammas: model.gammas().to_vec(),
        variance_gaps: model.variance_gaps().to_vec(),
        warnings: model.warnings().to_vec(),
    };
    io::write_json(path, &file)
}

/// Read a regression model file.
pub fn read_dipls_model(path: impl AsRef<Path>) -> Result<DiplsModel> {
    let file: DiplsModelFile = io::read_json(path)?;
    check_header(&file.kind, "dipals", file.schema_version)?;
    let w = to_matrix(file.w, file.input_dim, file.n_components, "w")?;
    let p = to_matrix(file.p, file.input_dim, file.n_components, "p")?;
    Ok(DiplsModel::from_parts(
        w,
        p,
        Array1::from_vec(file.c),
        Array1::from_vec(file.b),
        Array1::from_vec(file.x_mean_source),
        Array1::from_vec(file.x_mean_target),
        file.y_mean,
        file.gammas,
        file.variance_gaps,
        file.warnings,
    )?)
}

/// On-disk form of the series correction model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScitsmModelFile {
    pub schema_version: u32,
    pub kind: String,
    pub descriptor_dim: usize,
    pub n_features: usize,
    /// Anchor time indices, strictly increasing.
    pub anchors: Vec<usize>,
    /// Anchor-major, row-major `descriptor_dim × n_features` blocks.
    pub thetas: Vec<f64>,
    /// Anchor-major `n_features` blocks.
    pub biases: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub u: usize,
}

/// Write a correction model file.
pub fn write_scitsm_model(path: impl AsRef<Path>, model: &CorrectionModel) -> Result<()> {
    let file = ScitsmModelFile {
        schema_version: MODEL_SCHEMA_VERSION,
        kind: "scitsm".to_string(),
        descriptor_dim: model.descriptor_dim(),
        n_features: model.n_features(),
        anchors: model.anchors().to_vec(),
        thetas: model
            .thetas()
            .iter()
            .flat_map(|t| t.iter().copied())
            .collect(),
        biases: model
            .biases()
            .iter()
            .flat_map(|b| b.iter().copied())
            .collect(),
        alpha: model.alpha(),
        beta: model.beta(),
        delta: model.delta(),
        u: model.coupling_radius(),
    };
    io::write_json(path, &file)
}

/// Read a correction model file.
pub fn read_scitsm_model(path: impl AsRef<Path>) -> Result<CorrectionModel> {
    let file: ScitsmModelFile = io::read_json(path)?;
    check_header(&file.kind, "scitsm", file.schema_version)?;
    let b = file.anchors.len();
    let (z, d) = (file.descriptor_dim, file.n_features);
    if file.thetas.len() != b * z * d || file.biases.len() != b * d {
        return Err(invalid(format!(
            "correction file block lengths ({}, {}) do not match {b} anchors of {z}×{d}",
            file.thetas.len(),
            file.biases.len()
        )));
    }
    let thetas: Vec<Array2<f64>> = (0..b)
        .map(|j| to_matrix(file.thetas[j * z * d..(j + 1) * z * d].to_vec(), z, d, "thetas"))
        .collect::<Result<_>>()?;
    let biases: Vec<Array1<f64>> = (0..b)
        .map(|j| Array1::from_vec(file.biases[j * d..(j + 1) * d].to_vec()))
        .collect();
    Ok(CorrectionModel::from_parts(
        file.anchors,
        thetas,
        biases,
        file.alpha,
        file.beta,
        file.delta,
        file.u,
    )?)
}

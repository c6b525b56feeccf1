//! JSON model and code files. Complex numbers are `[re, im]` pairs and
//! matrices are lists of rows. All quantities are dimensionless; `omega` and
//! the squared jump-operator scales share one time unit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::code::CodePair;
use crate::error::{Error, Result};
use crate::model::LindbladModel;
use crate::operators::{c64, ComplexMatrix, ComplexVector, HermitianOperator, PureState};

pub const SCHEMA_VERSION: u32 = 1;

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub dim: usize,
    #[serde(rename = "G")]
    pub g: Matrix,
    pub lindblad: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Vec<Matrix>>,
    pub omega: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Canonical,
    Optimized,
    User,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub schema_version: u32,
    #[serde(rename = "d_P")]
    pub d_p: usize,
    #[serde(rename = "d_A")]
    pub d_a: usize,
    pub c0: Vec<Complex>,
    pub c1: Vec<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigengap: Option<f64>,
    pub provenance: Provenance,
}

/// Row-major `[re, im]` pairs.
pub fn matrix_to_rows(m: &ComplexMatrix) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn rows_to_matrix(rows: &Matrix, dim: usize, field: &str) -> Result<ComplexMatrix> {
    if rows.len() != dim {
        return Err(Error::Parse(format!("{field}: expected {dim} rows, found {}", rows.len())));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Parse(format!("{field}[{i}]: expected {dim} entries, found {}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::Parse(format!("{field}[{i}][{j}]: non-finite entry")));
            }
            m[(i, j)] = c64(z[0], z[1]);
        }
    }
    Ok(m)
}

pub fn vector_to_pairs(v: &ComplexVector) -> Vec<Complex> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn pairs_to_vector(p: &[Complex], field: &str) -> Result<ComplexVector> {
    if p.iter().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(Error::Parse(format!("{field}: non-finite entry")));
    }
    Ok(ComplexVector::from_iterator(p.len(), p.iter().map(|z| c64(z[0], z[1]))))
}

impl ModelFile {
    pub fn from_model(model: &LindbladModel, metadata: BTreeMap<String, String>) -> Self {
        let perturbation = (!model.perturbation().is_empty())
            .then(|| model.perturbation().iter().map(matrix_to_rows).collect());
        Self {
            schema_version: SCHEMA_VERSION,
            dim: model.dim(),
            g: matrix_to_rows(model.generator().matrix()),
            lindblad: model.lindblad().iter().map(matrix_to_rows).collect(),
            perturbation,
            omega: model.omega(),
            metadata,
        }
    }

    pub fn to_model(&self) -> Result<LindbladModel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.dim == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        let g = rows_to_matrix(&self.g, self.dim, "G")?;
        let g = HermitianOperator::new(g).map_err(|e| Error::Parse(format!("G: {e}")))?;
        let lindblad = self
            .lindblad
            .iter()
            .enumerate()
            .map(|(k, m)| rows_to_matrix(m, self.dim, &format!("lindblad[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let perturbation = self
            .perturbation
            .iter()
            .flatten()
            .enumerate()
            .map(|(k, m)| rows_to_matrix(m, self.dim, &format!("perturbation[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        LindbladModel::new(g, lindblad, perturbation, self.omega)
    }
}

impl CodeFile {
    pub fn from_code(code: &CodePair, s_star: Option<f64>, eigengap: Option<f64>, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            d_p: code.probe_dim(),
            d_a: code.ancilla_dim(),
            c0: vector_to_pairs(code.c0().amplitudes()),
            c1: vector_to_pairs(code.c1().amplitudes()),
            s_star,
            eigengap,
            provenance,
        }
    }

    pub fn to_code(&self) -> Result<CodePair> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema_version {}", self.schema_version)));
        }
        // Amplitudes are stored with full precision but renormalized to absorb
        // rounding from other writers.
        let c0 = PureState::normalized(pairs_to_vector(&self.c0, "c0")?)?;
        let c1 = PureState::normalized(pairs_to_vector(&self.c1, "c1")?)?;
        CodePair::new(c0, c1, self.d_p, self.d_a)
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Pretty JSON with a trailing newline; field order follows the struct.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_model_str(text: &str) -> Result<LindbladModel> {
    parse_json::<ModelFile>(text, "model file")?.to_model()
}

pub fn parse_model(path: &Path) -> Result<LindbladModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model_str(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_model(path: &Path, model: &LindbladModel, metadata: BTreeMap<String, String>) -> Result<()> {
    std::fs::write(path, to_json(&ModelFile::from_model(model, metadata))?)?;
    Ok(())
}

pub fn parse_code_str(text: &str) -> Result<(CodePair, CodeFile)> {
    let file: CodeFile = parse_json(text, "code file")?;
    Ok((file.to_code()?, file))
}

pub fn parse_code(path: &Path) -> Result<(CodePair, CodeFile)> {
    let text = std::fs::read_to_string(path)?;
    parse_code_str(&text)
}

pub fn write_code(path: &Path, file: &CodeFile) -> Result<()> {
    std::fs::write(path, to_json(file)?)?;
    Ok(())
}

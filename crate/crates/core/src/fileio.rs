//! JSON file formats: Hermitian input matrices, plain spectra, and the
//! serialized decomposition (header plus block rules). Serialization is
//! deterministic: identical inputs produce byte-identical files.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blockops::{BlockRule, SpectralPresentation};
use crate::decomposer::{plan_sectors, Decomposition, OperatorPair};
use crate::error::{Error, Result};
use crate::linalg::{CMat, HermitianMatrix};

/// One matrix entry: a real number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

/// A dense square matrix file, row-major. Validated Hermitian on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub complex: bool,
    pub data: Vec<Vec<Entry>>,
}

impl MatrixFile {
    pub fn from_cmat(m: &CMat) -> Self {
        let complex = (0..m.dim())
            .any(|r| (0..m.dim()).any(|c| m.get(r, c).im != 0.0));
        let data = (0..m.dim())
            .map(|r| {
                (0..m.dim())
                    .map(|c| {
                        let v = m.get(r, c);
                        if complex {
                            Entry::Complex([v.re, v.im])
                        } else {
                            Entry::Real(v.re)
                        }
                    })
                    .collect()
            })
            .collect();
        MatrixFile {
            dim: m.dim(),
            complex,
            data,
        }
    }

    pub fn to_cmat(&self) -> Result<CMat> {
        if self.dim == 0 {
            return Err(Error::Format("matrix dimension must be positive".into()));
        }
        if self.data.len() != self.dim || self.data.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Format(format!(
                "matrix data is not {0} x {0}",
                self.dim
            )));
        }
        let mut out = CMat::zeros(self.dim);
        for (r, row) in self.data.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                let v = match entry {
                    Entry::Real(x) => Complex64::new(*x, 0.0),
                    Entry::Complex([re, im]) => {
                        if !self.complex {
                            return Err(Error::Format(format!(
                                "complex entry at ({r}, {c}) in a file marked real"
                            )));
                        }
                        Complex64::new(*re, *im)
                    }
                };
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::Format(format!(
                        "non-finite entry at ({r}, {c})"
                    )));
                }
                out.set(r, c, v);
            }
        }
        Ok(out)
    }

    /// Parses and validates the matrix as Hermitian within `1e-10 * scale`.
    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        let m = self.to_cmat()?;
        let scale = m.max_norm().max(1.0);
        HermitianMatrix::with_tolerance(m, 1e-10 * scale)
    }
}

/// A decompose input file: either a plain spectrum (JSON array) or a matrix
/// (JSON object).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DecomposeInput {
    Spectrum(Vec<f64>),
    Matrix(MatrixFile),
}

impl DecomposeInput {
    /// Turns the input into a spectral presentation; matrices are
    /// eigendecomposed with cluster tolerance `cluster_tol`.
    pub fn to_presentation(&self, cluster_tol: f64) -> Result<SpectralPresentation> {
        match self {
            DecomposeInput::Spectrum(values) => SpectralPresentation::from_spectrum(values),
            DecomposeInput::Matrix(mf) => {
                let h = mf.to_hermitian()?;
                crate::blockops::inflate(&h, cluster_tol)
            }
        }
    }
}

pub fn load_input(path: &Path) -> Result<DecomposeInput> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn rational_pair(r: num_rational::Rational64) -> [i64; 2] {
    [*r.numer(), *r.denom()]
}

/// Decomposition file header: construction parameters and the spectral
/// presentation (eigenvalues, optional eigenbasis rotation of the original
/// input with the label of each original column).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub n: u32,
    pub m: u32,
    /// Exact rational constants as `[numerator, denominator]`.
    pub a: [i64; 2],
    pub b: [i64; 2],
    pub f_labels: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_labels: Option<Vec<usize>>,
    /// Row-major unitary, entries `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_rotation: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub q: Vec<BlockRule>,
    pub p: Vec<BlockRule>,
}

/// The serialized decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub header: Header,
    pub pairs: Vec<PairRecord>,
}

fn rotation_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|r| {
            (0..m.dim())
                .map(|c| {
                    let v = m.get(r, c);
                    [v.re, v.im]
                })
                .collect()
        })
        .collect()
}

fn rotation_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Format("basis rotation is not square".into()));
    }
    let mut out = CMat::zeros(dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, &[re, im]) in row.iter().enumerate() {
            out.set(r, c, Complex64::new(re, im));
        }
    }
    Ok(out)
}

impl DecompositionFile {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        let header = Header {
            n: d.n(),
            m: d.m(),
            a: rational_pair(d.a()),
            b: rational_pair(d.b()),
            f_labels: d.plan.f_labels.iter().copied().collect(),
            eigenvalues: d.spec.lambdas.clone(),
            column_labels: d.spec.column_labels.clone(),
            basis_rotation: d.spec.basis_rotation.as_ref().map(rotation_to_rows),
        };
        let pairs = d
            .pairs
            .iter()
            .map(|p| PairRecord {
                q: p.q.rules.clone(),
                p: p.p.rules.clone(),
            })
            .collect();
        DecompositionFile { header, pairs }
    }

    /// Rebuilds the decomposition, recomputing the sector plan and checking
    /// it against the stored header.
    pub fn to_decomposition(&self) -> Result<Decomposition> {
        let spec = SpectralPresentation {
            lambdas: self.header.eigenvalues.clone(),
            basis_rotation: match &self.header.basis_rotation {
                Some(rows) => Some(rotation_from_rows(rows)?),
                None => None,
            },
            column_labels: self.header.column_labels.clone(),
        };
        if spec.lambdas.is_empty() {
            return Err(Error::Format("header lists no eigenvalues".into()));
        }
        if spec.lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(
                "header eigenvalues are not strictly increasing".into(),
            ));
        }
        let plan = plan_sectors(&spec, self.header.n)?;
        if self.header.m != plan.m
            || self.header.a != rational_pair(plan.a)
            || self.header.b != rational_pair(plan.b)
            || self.header.f_labels != plan.f_labels.iter().copied().collect::<Vec<_>>()
        {
            return Err(Error::Format(
                "header constants disagree with the recomputed sector plan".into(),
            ));
        }
        if self.pairs.len() != self.header.n as usize {
            return Err(Error::Format(format!(
                "expected {} operator pairs, found {}",
                self.header.n,
                self.pairs.len()
            )));
        }
        let pairs = self
            .pairs
            .iter()
            .map(|rec| OperatorPair {
                q: crate::blockops::RuleOperator::new(rec.q.clone()),
                p: crate::blockops::RuleOperator::new(rec.p.clone()),
            })
            .collect();
        Ok(Decomposition { spec, plan, pairs })
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn save_decomposition(path: &Path, d: &Decomposition) -> Result<()> {
    let file = DecompositionFile::from_decomposition(d);
    std::fs::write(path, to_json_string(&file)?)?;
    Ok(())
}

pub fn load_decomposition(path: &Path) -> Result<Decomposition> {
    let text = std::fs::read_to_string(path)?;
    let file: DecompositionFile = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    file.to_decomposition()
}

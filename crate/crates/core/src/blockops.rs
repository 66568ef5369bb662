//! Finitely-described operators on the countable basis
//! `{(label k, copy t) : t in N}`: spectral presentations of the inflated
//! model `x0 (x) 1`, arithmetic-progression index families, the
//! infinite-to-infinite matchings between them, and an exact entry oracle
//! for operators assembled from 2x2 blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMat, HermitianMatrix};
use crate::matfactory::Mat2;

/// One basis vector of the inflated space: eigenvalue label and copy index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    pub label: usize,
    pub copy: u64,
}

/// The index set `{(label, t) : t = residue (mod modulus)}`, enumerated as
/// `s -> (label, residue + s * modulus)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFamily {
    pub label: usize,
    pub residue: u64,
    pub modulus: u64,
}

impl IndexFamily {
    pub fn new(label: usize, residue: u64, modulus: u64) -> Self {
        debug_assert!(modulus >= 1 && residue < modulus);
        IndexFamily {
            label,
            residue,
            modulus,
        }
    }

    /// The `s`-th element of the family.
    pub fn element(&self, s: u64) -> BasisIndex {
        BasisIndex {
            label: self.label,
            copy: self.residue + s * self.modulus,
        }
    }

    /// If `idx` belongs to the family, its enumeration position.
    pub fn position_of(&self, idx: BasisIndex) -> Option<u64> {
        if idx.label == self.label
            && idx.copy % self.modulus == self.residue
        {
            Some((idx.copy - self.residue) / self.modulus)
        } else {
            None
        }
    }
}

/// Partitions `f` into `c` infinite sub-progressions
/// `(label, residue + j * modulus, c * modulus)`, `j = 0..c-1`.
pub fn split_family(f: IndexFamily, parts: u64) -> Vec<IndexFamily> {
    debug_assert!(parts >= 1);
    (0..parts)
        .map(|j| IndexFamily::new(f.label, f.residue + j * f.modulus, parts * f.modulus))
        .collect()
}

/// Aligns two lists of pairwise disjoint families into `|sources| * |targets|`
/// sub-family pairs: every source is split into `|targets|` parts, every
/// target into `|sources|` parts, and part `ti` of source `si` is paired with
/// part `si` of target `ti`. The induced element-by-element map is a
/// bijection between the two unions.
pub fn match_families(
    sources: &[IndexFamily],
    targets: &[IndexFamily],
) -> Result<Vec<(IndexFamily, IndexFamily)>> {
    match (sources.is_empty(), targets.is_empty()) {
        (true, true) => return Ok(Vec::new()),
        (true, false) | (false, true) => {
            return Err(Error::DimensionMismatch(
                "match_families: one side is empty, the other is not".into(),
            ))
        }
        (false, false) => {}
    }
    let s_count = sources.len() as u64;
    let t_count = targets.len() as u64;
    let mut out = Vec::with_capacity((s_count * t_count) as usize);
    for (si, src) in sources.iter().enumerate() {
        let src_parts = split_family(*src, t_count);
        for (ti, tgt) in targets.iter().enumerate() {
            let tgt_parts = split_family(*tgt, s_count);
            out.push((src_parts[ti], tgt_parts[si]));
        }
    }
    Ok(out)
}

/// One fixed 2x2 matrix placed on every aligned index pair
/// `(source(s), target(s))` of two disjoint families. Row/column 0 of `mat`
/// corresponds to the source element, row/column 1 to the target element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRule {
    pub source: IndexFamily,
    pub target: IndexFamily,
    pub mat: Mat2,
}

/// A finitely-described operator: a list of block rules. For the
/// decomposer's projections the rule positions cover every basis index
/// exactly once.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RuleOperator {
    pub rules: Vec<BlockRule>,
}

impl RuleOperator {
    pub fn new(rules: Vec<BlockRule>) -> Self {
        RuleOperator { rules }
    }
}

/// Exact matrix entry of a rule operator at `(u, v)`. Errors if `u` is
/// covered by more than one rule position.
pub fn entry(op: &RuleOperator, u: BasisIndex, v: BasisIndex) -> Result<f64> {
    let mut found: Option<f64> = None;
    for rule in &op.rules {
        for (row, fam, other) in [
            (0usize, &rule.source, &rule.target),
            (1usize, &rule.target, &rule.source),
        ] {
            if let Some(s) = fam.position_of(u) {
                if found.is_some() {
                    return Err(Error::DoubleCoverage {
                        label: u.label,
                        copy: u.copy,
                    });
                }
                let partner = other.element(s);
                let val = if v == u {
                    rule.mat[row][row]
                } else if v == partner {
                    rule.mat[row][1 - row]
                } else {
                    0.0
                };
                found = Some(val);
            }
        }
    }
    Ok(found.unwrap_or(0.0))
}

/// A spectral presentation of the inflated operator `x0 (x) 1`: strictly
/// increasing distinct eigenvalues (label `k` is the position), each with
/// countably infinite multiplicity. When built from a finite matrix the
/// eigenvector rotation and the label of each original column are kept so
/// the input can be reconstructed.
#[derive(Debug, Clone)]
pub struct SpectralPresentation {
    pub lambdas: Vec<f64>,
    pub basis_rotation: Option<CMat>,
    pub column_labels: Option<Vec<usize>>,
}

impl SpectralPresentation {
    /// Builds a presentation from a plain list of eigenvalues (sorted,
    /// exact duplicates merged).
    pub fn from_spectrum(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("spectrum must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("spectrum values must be finite"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        Ok(SpectralPresentation {
            lambdas: sorted,
            basis_rotation: None,
            column_labels: None,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().unwrap()
    }

    /// Reassembles the original finite matrix from the rotation and column
    /// labels, when present.
    pub fn reconstruct(&self) -> Option<CMat> {
        let rotation = self.basis_rotation.as_ref()?;
        let labels = self.column_labels.as_ref()?;
        let diag: Vec<f64> = labels.iter().map(|&k| self.lambdas[k]).collect();
        Some(
            rotation
                .mul(&CMat::from_real_diag(&diag))
                .mul(&rotation.adjoint()),
        )
    }
}

/// Eigendecomposes `x0`, merges eigenvalues within `cluster_tol * ||x0||`
/// into one label, and presents the result as `x0 (x) 1` with every label at
/// countably infinite multiplicity.
pub fn inflate(x0: &HermitianMatrix, cluster_tol: f64) -> Result<SpectralPresentation> {
    let eig = hermitian_eig(x0)?;
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let gap_tol = cluster_tol * scale;
    let mut lambdas: Vec<f64> = Vec::new();
    let mut column_labels: Vec<usize> = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for (i, &v) in eig.values.iter().enumerate() {
        if i > 0 && v - *cluster.last().unwrap() > gap_tol {
            lambdas.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            cluster.clear();
        }
        cluster.push(v);
        column_labels.push(lambdas.len());
    }
    lambdas.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    Ok(SpectralPresentation {
        lambdas,
        basis_rotation: Some(eig.basis),
        column_labels: Some(column_labels),
    })
}

/// Compression of `op` to the window `{(k, t) : t < window}`, all labels.
/// Basis order is `(t, k)` lexicographic: index `t * L + k`. Entries are
/// exact; blocks straddling the window edge contribute only their in-window
/// corners, so the compression of a projection need not be a projection.
pub fn window_matrix(op: &RuleOperator, spec: &SpectralPresentation, window: u64) -> Vec<Vec<f64>> {
    debug_assert!(window >= 1);
    let labels = spec.num_labels();
    let dim = labels * window as usize;
    let mut out = vec![vec![0.0; dim]; dim];
    let flat = |idx: BasisIndex| idx.copy as usize * labels + idx.label;
    for rule in &op.rules {
        let mut s = 0u64;
        loop {
            let u = rule.source.element(s);
            let v = rule.target.element(s);
            if u.copy >= window && v.copy >= window {
                break;
            }
            if u.copy < window {
                out[flat(u)][flat(u)] += rule.mat[0][0];
            }
            if v.copy < window {
                out[flat(v)][flat(v)] += rule.mat[1][1];
            }
            if u.copy < window && v.copy < window {
                out[flat(u)][flat(v)] += rule.mat[0][1];
                out[flat(v)][flat(u)] += rule.mat[1][0];
            }
            s += 1;
        }
    }
    out
}

/// Checks that every index `(k, t)` with `t < window` is covered by exactly
/// one rule position of `op`.
pub fn coverage_exactly_once(
    op: &RuleOperator,
    labels: usize,
    window: u64,
) -> std::result::Result<(), String> {
    let mut counts = vec![0u32; labels * window as usize];
    for rule in &op.rules {
        for fam in [&rule.source, &rule.target] {
            if fam.label >= labels {
                return Err(format!("rule references unknown label {}", fam.label));
            }
            let mut t = fam.residue;
            while t < window {
                counts[t as usize * labels + fam.label] += 1;
                t += fam.modulus;
            }
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        if c != 1 {
            let (t, k) = (i / labels, i % labels);
            return Err(format!("index (label {k}, copy {t}) covered {c} times"));
        }
    }
    Ok(())
}

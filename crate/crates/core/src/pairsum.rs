//! Finite-dimensional pair-sum builder: from a commuting Hermitian pair
//! `(z1, z2)` whose joint spectrum lies in `A`, four projections on the
//! doubled space `K (+) K` with `QP + Q'P' = 2 (z1 (+) z2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{joint_diag, CMat, HermitianMatrix};
use crate::matfactory::make_pq;
use crate::region::RegionPoint;

/// Default eigenvalue cluster tolerance for the joint diagonalization.
pub const CLUSTER_TOL: f64 = 1e-8;

/// The four projections, the joint eigenbasis they were assembled in, and
/// the joint eigenvalue pairs used per block.
#[derive(Debug, Clone)]
pub struct PairSumResult {
    pub p: CMat,
    pub q: CMat,
    pub p_prime: CMat,
    pub q_prime: CMat,
    pub basis: CMat,
    pub joint_values: Vec<(f64, f64)>,
}

/// Flips the sign of the off-diagonal blocks of a `2k x 2k` matrix:
/// conjugation by `diag(1_k, -1_k)`.
fn block_sign_flip(m: &CMat, k: usize) -> CMat {
    let n = m.dim();
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            if (i < k) != (j < k) {
                out.set(i, j, -m.get(i, j));
            }
        }
    }
    out
}

/// Builds the four projections. The `j`-th joint eigenvector of the first
/// `K`-copy couples with the `j`-th of the second, in ascending joint
/// eigenvalue order, and each coupled plane carries the factory pair at
/// `(x_j, y_j)`.
pub fn build_pair_sum(z1: &HermitianMatrix, z2: &HermitianMatrix) -> Result<PairSumResult> {
    let k = z1.dim();
    if z2.dim() != k {
        return Err(Error::DimensionMismatch(format!(
            "build_pair_sum: {k} vs {}",
            z2.dim()
        )));
    }
    let (basis, joint_values) = joint_diag(z1, z2, CLUSTER_TOL)?;

    let mut p_block = CMat::zeros(2 * k);
    let mut q_block = CMat::zeros(2 * k);
    for (j, &(x, y)) in joint_values.iter().enumerate() {
        let pair = make_pq(RegionPoint::new(x, y)).map_err(|e| match e {
            Error::OutsideRegion { x, y, tol, .. } => Error::OutsideRegion {
                x,
                y,
                tol,
                context: format!(" (joint eigenvalue pair #{j})"),
            },
            other => other,
        })?;
        let idx = [j, k + j];
        for r in 0..2 {
            for c in 0..2 {
                p_block.set(idx[r], idx[c], Complex64::new(pair.p[r][c], 0.0));
                q_block.set(idx[r], idx[c], Complex64::new(pair.q[r][c], 0.0));
            }
        }
    }

    // Rotate back to the original basis with U (+) U.
    let v = basis.direct_sum(&basis);
    let p = v.mul(&p_block).mul(&v.adjoint());
    let q = v.mul(&q_block).mul(&v.adjoint());
    let p_prime = block_sign_flip_in_basis(&p_block, &v, k);
    let q_prime = block_sign_flip_in_basis(&q_block, &v, k);
    Ok(PairSumResult {
        p,
        q,
        p_prime,
        q_prime,
        basis,
        joint_values,
    })
}

// The sign conjugation diag(1, -1) acts blockwise in the joint eigenbasis
// and commutes with U (+) U, so it can be applied before rotating back.
fn block_sign_flip_in_basis(block: &CMat, v: &CMat, k: usize) -> CMat {
    let flipped = block_sign_flip(block, k);
    v.mul(&flipped).mul(&v.adjoint())
}

/// Defect report for a pair-sum result: four projection defects (max of
/// idempotency and hermiticity per projection) plus the sum identity defect
/// `||QP + Q'P' - 2 (z1 (+) z2)||_max`.
#[derive(Debug, Clone)]
pub struct PairSumReport {
    pub projection_defects: [f64; 4],
    pub sum_defect: f64,
    pub tol: f64,
}

impl PairSumReport {
    pub fn pass(&self) -> bool {
        self.sum_defect <= self.tol && self.projection_defects.iter().all(|&d| d <= self.tol)
    }
}

pub fn verify_pair_sum(
    r: &PairSumResult,
    z1: &HermitianMatrix,
    z2: &HermitianMatrix,
    tol: f64,
) -> PairSumReport {
    let k = z1.dim();
    assert_eq!(z2.dim(), k, "verify_pair_sum: mismatched z2 dimension");
    assert_eq!(r.p.dim(), 2 * k, "verify_pair_sum: mismatched result dimension");
    let proj_defect = |m: &CMat| {
        let (idem, herm) = crate::linalg::defect_norms(m);
        idem.max(herm)
    };
    let projection_defects = [
        proj_defect(&r.p),
        proj_defect(&r.q),
        proj_defect(&r.p_prime),
        proj_defect(&r.q_prime),
    ];
    let target = z1.mat().direct_sum(z2.mat()).scale(2.0);
    let sum = r.q.mul(&r.p).add(&r.q_prime.mul(&r.p_prime));
    PairSumReport {
        projection_defects,
        sum_defect: sum.sub(&target).max_norm(),
        tol,
    }
}

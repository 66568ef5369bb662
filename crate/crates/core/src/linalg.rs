//! Small dense Hermitian linear algebra at desk scale (dim <= 64): a cyclic
//! Jacobi eigensolver, joint diagonalization of commuting Hermitian pairs,
//! and projection defect checks. The solver is in-repo to keep results
//! deterministic across platforms at the tolerances used elsewhere.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_entries(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(CMat { dim, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch("matrix rows must be square".into()));
            }
            data.extend(row.iter().map(|&v| Complex64::new(v, 0.0)));
        }
        Ok(CMat { dim, data })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = CMat::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim, "dimension mismatch in mul");
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMat {
            dim: self.dim,
            data,
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMat {
            dim: self.dim,
            data,
        }
    }

    pub fn scale(&self, factor: f64) -> CMat {
        CMat {
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        defect
    }

    pub fn commutator_defect(&self, other: &CMat) -> f64 {
        self.mul(other).sub(&other.mul(self)).max_norm()
    }

    /// Direct sum `self (+) other` on the doubled space.
    pub fn direct_sum(&self, other: &CMat) -> CMat {
        let (n, m) = (self.dim, other.dim);
        let mut out = CMat::zeros(n + m);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(i, j));
            }
        }
        for i in 0..m {
            for j in 0..m {
                out.set(n + i, n + j, other.get(i, j));
            }
        }
        out
    }
}

/// A validated Hermitian matrix. Construction checks the hermiticity defect
/// against `1e-12 * scale` (`scale` = max entry magnitude, at least 1) and
/// stores the Hermitian part, so downstream code can rely on exact symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: CMat,
}

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        Self::with_tolerance(m, 1e-12)
    }

    pub fn with_tolerance(m: CMat, rel_tol: f64) -> Result<Self> {
        let scale = m.max_norm().max(1.0);
        let defect = m.hermiticity_defect();
        if defect > rel_tol * scale {
            return Err(Error::NotHermitian { defect });
        }
        // Store the Hermitian part.
        let sym = m.add(&m.adjoint()).scale(0.5);
        Ok(HermitianMatrix { mat: sym })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(CMat::from_real_rows(rows)?)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        HermitianMatrix {
            mat: CMat::from_real_diag(diag),
        }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

/// Result of diagonalizing a Hermitian matrix: ascending eigenvalues and a
/// unitary whose columns are the corresponding eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub basis: CMat,
}

const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 30;

fn off_diag_fro(m: &CMat) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi iteration for Hermitian matrices. Terminates when the
/// off-diagonal Frobenius mass drops below `1e-13 * ||a||_F`, errs out after
/// 30 sweeps.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 || n > MAX_DIM {
        return Err(Error::domain(format!(
            "hermitian_eig handles 1 <= dim <= {MAX_DIM}, got {n}"
        )));
    }
    let mut b = a.mat().clone();
    let mut v = CMat::identity(n);
    let target = 1e-13 * a.mat().fro_norm();

    let mut converged = off_diag_fro(&b) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let gamma = b.get(p, q);
                let g = gamma.norm();
                if g == 0.0 {
                    continue;
                }
                // Unitary 2x2 eliminating the (p, q) entry: a phase pulling
                // the off-diagonal onto the real axis followed by a real
                // rotation with angle theta = atan2(2g, b_pp - b_qq) / 2.
                let w = gamma / g;
                let alpha = b.get(p, p).re;
                let beta = b.get(q, q).re;
                let theta = 0.5 * (2.0 * g).atan2(alpha - beta);
                let (s, c) = theta.sin_cos();
                let j00 = Complex64::new(c, 0.0);
                let j01 = Complex64::new(-s, 0.0);
                let j10 = w.conj() * s;
                let j11 = w.conj() * c;
                // B <- J* B J, V <- V J, touching only rows/cols p and q.
                for k in 0..n {
                    let bkp = b.get(k, p);
                    let bkq = b.get(k, q);
                    b.set(k, p, bkp * j00 + bkq * j10);
                    b.set(k, q, bkp * j01 + bkq * j11);
                }
                for k in 0..n {
                    let bpk = b.get(p, k);
                    let bqk = b.get(q, k);
                    b.set(p, k, j00.conj() * bpk + j10.conj() * bqk);
                    b.set(q, k, j01.conj() * bpk + j11.conj() * bqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * j00 + vkq * j10);
                    v.set(k, q, vkp * j01 + vkq * j11);
                }
            }
        }
        sweeps += 1;
        converged = off_diag_fro(&b) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence {
            off: off_diag_fro(&b),
            sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| b.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut basis = CMat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            basis.set(row, col, v.get(row, src));
        }
    }
    Ok(EigenDecomposition { values, basis })
}

/// `(||p^2 - p||_max, ||p - p*||_max)` for a square matrix: how far it is
/// from being an orthogonal projection.
pub fn defect_norms(p: &CMat) -> (f64, f64) {
    (p.mul(p).sub(p).max_norm(), p.sub(&p.adjoint()).max_norm())
}

/// Simultaneously diagonalizes a commuting Hermitian pair.
///
/// `z1` is diagonalized first; within each eigenvalue cluster (gap at most
/// `cluster_tol * ||z1||_max`) the compression of `z2` is diagonalized and
/// the basis rotated accordingly. Returns the common unitary basis and the
/// joint eigenvalue pairs `(x_k, y_k)` sorted ascending.
pub fn joint_diag(
    z1: &HermitianMatrix,
    z2: &HermitianMatrix,
    cluster_tol: f64,
) -> Result<(CMat, Vec<(f64, f64)>)> {
    let n = z1.dim();
    if z2.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "joint_diag: {n} vs {}",
            z2.dim()
        )));
    }
    let scale = (z1.mat().max_norm() * z2.mat().max_norm()).max(1.0);
    let comm_tol = 1e-10 * scale;
    let defect = z1.mat().commutator_defect(z2.mat());
    if defect > comm_tol {
        return Err(Error::NotCommuting {
            defect,
            tol: comm_tol,
        });
    }

    let eig1 = hermitian_eig(z1)?;
    let mut basis = eig1.basis;
    let gap_tol = cluster_tol * z1.mat().max_norm();

    // Cluster boundaries over the ascending eigenvalues of z1.
    let mut cluster_of = vec![0usize; n];
    let mut cluster_id = 0usize;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig1.values[end] - eig1.values[end - 1] <= gap_tol {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            // Compress z2 to the cluster and diagonalize.
            let mut block = CMat::zeros(size);
            for bi in 0..size {
                for bj in 0..size {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..n {
                        let mut zr = Complex64::new(0.0, 0.0);
                        for c in 0..n {
                            zr += z2.mat().get(r, c) * basis.get(c, start + bj);
                        }
                        acc += basis.get(r, start + bi).conj() * zr;
                    }
                    block.set(bi, bj, acc);
                }
            }
            let block = HermitianMatrix::with_tolerance(block, 1e-8)?;
            let sub = hermitian_eig(&block)?;
            // Rotate the cluster columns by the sub-basis.
            let mut rotated = vec![Complex64::new(0.0, 0.0); n * size];
            for row in 0..n {
                for col in 0..size {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..size {
                        acc += basis.get(row, start + k) * sub.basis.get(k, col);
                    }
                    rotated[row * size + col] = acc;
                }
            }
            for row in 0..n {
                for col in 0..size {
                    basis.set(row, start + col, rotated[row * size + col]);
                }
            }
        }
        cluster_of[start..end].fill(cluster_id);
        cluster_id += 1;
        start = end;
    }

    // Read the joint diagonals and check the basis really diagonalizes both.
    let d1 = basis.adjoint().mul(z1.mat()).mul(&basis);
    let d2 = basis.adjoint().mul(z2.mat()).mul(&basis);
    let diag_tol = 1e-9 * scale;
    if off_diag_fro(&d1) > diag_tol || off_diag_fro(&d2) > diag_tol {
        return Err(Error::NotCommuting {
            defect: off_diag_fro(&d1).max(off_diag_fro(&d2)),
            tol: diag_tol,
        });
    }
    let mut pairs: Vec<(usize, f64, f64)> = (0..n)
        .map(|i| (i, d1.get(i, i).re, d2.get(i, i).re))
        .collect();
    // Clusters ascend with x; inside a cluster x carries round-off jitter,
    // so order by (cluster, y) to keep the pairs deterministic.
    pairs.sort_by(|l, r| {
        (cluster_of[l.0], l.2, l.0)
            .partial_cmp(&(cluster_of[r.0], r.2, r.0))
            .unwrap()
    });
    let mut out_basis = CMat::zeros(n);
    for (col, &(src, _, _)) in pairs.iter().enumerate() {
        for row in 0..n {
            out_basis.set(row, col, basis.get(row, src));
        }
    }
    Ok((out_basis, pairs.into_iter().map(|(_, x, y)| (x, y)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(rng.gen_range(-2.0..2.0), 0.0));
            for j in (i + 1)..dim {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
        // Accumulated random 2x2 rotations with phases.
        let mut u = CMat::identity(dim);
        for _ in 0..(3 * dim * dim).max(8) {
            let p = rng.gen_range(0..dim);
            let mut q = rng.gen_range(0..dim);
            if dim == 1 {
                break;
            }
            while q == p {
                q = rng.gen_range(0..dim);
            }
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = theta.sin_cos();
            let w = Complex64::from_polar(1.0, phi);
            for k in 0..dim {
                let a = u.get(k, p);
                let b = u.get(k, q);
                u.set(k, p, a * c + b * (w * s));
                u.set(k, q, -a * (w.conj() * s) + b * c);
            }
        }
        u
    }

    fn reconstruct(e: &EigenDecomposition) -> CMat {
        let d = CMat::from_real_diag(&e.values);
        e.basis.mul(&d).mul(&e.basis.adjoint())
    }

    #[test]
    fn diagonal_input() {
        let a = HermitianMatrix::from_real_diag(&[3.0, 1.0, 2.0]);
        let e = hermitian_eig(&a).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // Permutation basis.
        for col in 0..3 {
            let mut mass = 0.0;
            for row in 0..3 {
                mass += e.basis.get(row, col).norm_sqr();
            }
            assert!((mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_x() {
        let a = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = hermitian_eig(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-13);
        assert!((e.values[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2, 5, 8] {
            let a = random_hermitian(dim, &mut rng);
            let e = hermitian_eig(&a).unwrap();
            assert!(reconstruct(&e).sub(a.mat()).max_norm() <= 1e-10);
            let gram = e.basis.adjoint().mul(&e.basis);
            assert!(gram.sub(&CMat::identity(dim)).max_norm() <= 1e-11);
        }
    }

    #[test]
    fn eigenvalues_invariant_under_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(6, &mut rng);
        let u = random_unitary(6, &mut rng);
        let conj = HermitianMatrix::with_tolerance(
            u.adjoint().mul(a.mat()).mul(&u),
            1e-10,
        )
        .unwrap();
        let e1 = hermitian_eig(&a).unwrap();
        let e2 = hermitian_eig(&conj).unwrap();
        for (v1, v2) in e1.values.iter().zip(&e2.values) {
            assert!((v1 - v2).abs() <= 1e-9);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMat::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn defect_norm_examples() {
        let id = CMat::identity(3);
        assert_eq!(defect_norms(&id), (0.0, 0.0));
        let half = id.scale(0.5);
        let (idem, herm) = defect_norms(&half);
        assert!((idem - 0.25).abs() < 1e-15 && herm == 0.0);
    }

    #[test]
    fn joint_diag_zero_z1() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z1 = HermitianMatrix::from_real_diag(&[0.0; 5]);
        let z2 = random_hermitian(5, &mut rng);
        let (basis, pairs) = joint_diag(&z1, &z2, 1e-8).unwrap();
        let e2 = hermitian_eig(&z2).unwrap();
        for ((x, y), mu) in pairs.iter().zip(&e2.values) {
            assert!(x.abs() < 1e-12);
            assert!((y - mu).abs() < 1e-9);
        }
        let d2 = basis.adjoint().mul(z2.mat()).mul(&basis);
        assert!(off_diag_fro(&d2) < 1e-9);
    }

    #[test]
    fn joint_diag_equal_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = random_hermitian(4, &mut rng);
        let (_, pairs) = joint_diag(&z, &z, 1e-8).unwrap();
        for (x, y) in pairs {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn joint_diag_prescribed_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let dim = 6;
        let u = random_unitary(dim, &mut rng);
        // Degenerate first diagonal forces genuine clustering.
        let d1 = [1.0, 1.0, 1.0, 2.0, 2.0, 3.0];
        let d2 = [0.5, -0.5, 0.25, 0.0, 1.0, -1.0];
        let z1 = HermitianMatrix::with_tolerance(
            u.mul(&CMat::from_real_diag(&d1)).mul(&u.adjoint()),
            1e-10,
        )
        .unwrap();
        let z2 = HermitianMatrix::with_tolerance(
            u.mul(&CMat::from_real_diag(&d2)).mul(&u.adjoint()),
            1e-10,
        )
        .unwrap();
        let (basis, pairs) = joint_diag(&z1, &z2, 1e-8).unwrap();
        let mut expected: Vec<(f64, f64)> = d1.iter().cloned().zip(d2.iter().cloned()).collect();
        expected.sort_by(|l, r| l.partial_cmp(r).unwrap());
        for ((x, y), (ex, ey)) in pairs.iter().zip(&expected) {
            assert!((x - ex).abs() < 1e-9 && (y - ey).abs() < 1e-9, "{pairs:?}");
        }
        // Recombining reproduces both inputs.
        let dx = CMat::from_real_diag(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let dy = CMat::from_real_diag(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        assert!(basis.mul(&dx).mul(&basis.adjoint()).sub(z1.mat()).max_norm() < 1e-9);
        assert!(basis.mul(&dy).mul(&basis.adjoint()).sub(z2.mat()).max_norm() < 1e-9);
    }

    #[test]
    fn joint_diag_rejects_non_commuting() {
        let z1 = HermitianMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let z2 = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            joint_diag(&z1, &z2, 1e-8),
            Err(Error::NotCommuting { .. })
        ));
    }
}

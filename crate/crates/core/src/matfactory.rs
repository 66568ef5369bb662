//! Rank-one 2x2 projection factory: for every point `(x, y)` of the region
//! `A` it produces explicit real symmetric projections `P`, `Q` whose product
//! has diagonal `(x, y)`, plus the diagonal sharpness family built from the
//! extreme point `(-1/8, 3/8)`.

use crate::error::{Error, Result};
use crate::region::{in_region_a, RegionPoint, TAU_A};

/// A dense 2x2 real matrix in row-major order.
pub type Mat2 = [[f64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_add(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][j] + b[i][j];
        }
    }
    out
}

pub fn mat2_max_norm(a: &Mat2) -> f64 {
    a.iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Conjugation by `diag(1, -1)`: flips the off-diagonal signs. An involution
/// that preserves the projection axioms.
pub fn conjugate_by_sign(m: &Mat2) -> Mat2 {
    [[m[0][0], -m[0][1]], [-m[1][0], m[1][1]]]
}

/// True iff `m` is a rank-one orthogonal projection within `tol`:
/// idempotent, symmetric, trace one, determinant zero.
pub fn verify_rank1_projection(m: &Mat2, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    let mm = mat2_mul(m, m);
    let idem = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .fold(0.0f64, |acc, (i, j)| acc.max((mm[i][j] - m[i][j]).abs()));
    let sym = (m[0][1] - m[1][0]).abs();
    let trace = (m[0][0] + m[1][1] - 1.0).abs();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    idem <= tol && sym <= tol && trace <= tol && det <= tol
}

/// The pair of rank-one projections realizing a point of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair2x2 {
    pub p: Mat2,
    pub q: Mat2,
    pub source: RegionPoint,
}

fn clamp_radicand(r: f64, pt: RegionPoint) -> Result<f64> {
    if r >= 0.0 {
        Ok(r)
    } else if r >= -TAU_A {
        Ok(0.0)
    } else {
        Err(Error::OutsideRegion {
            x: pt.x,
            y: pt.y,
            tol: TAU_A,
            context: String::new(),
        })
    }
}

/// Builds the explicit pair `(P, Q)` with `diag(QP) = (x, y)`.
///
/// At the origin the factory returns `P = diag(1, 0)`, `Q = diag(0, 1)`;
/// points with `||(x, y)|| < 1e-15` are treated as the origin since the
/// construction is discontinuous there. Radicands within `-TAU_A` of zero
/// are clamped so exact boundary points survive floating-point round-off.
pub fn make_pq(pt: RegionPoint) -> Result<ProjectionPair2x2> {
    if pt.x.hypot(pt.y) < 1e-15 {
        return Ok(ProjectionPair2x2 {
            p: [[1.0, 0.0], [0.0, 0.0]],
            q: [[0.0, 0.0], [0.0, 1.0]],
            source: RegionPoint::new(0.0, 0.0),
        });
    }
    if !in_region_a(pt, TAU_A) {
        return Err(Error::OutsideRegion {
            x: pt.x,
            y: pt.y,
            tol: TAU_A,
            context: String::new(),
        });
    }
    let s = pt.sum();
    let d = pt.diff();
    if s <= 0.0 {
        return Err(Error::OutsideRegion {
            x: pt.x,
            y: pt.y,
            tol: TAU_A,
            context: " (s = x + y must be positive away from the origin)".into(),
        });
    }
    let r1 = clamp_radicand(s - d * d, pt)?;
    let r2 = clamp_radicand(1.0 / s - 1.0, pt)?;
    let root = (r1 * r2).sqrt();
    let off_p = (r1.sqrt() - d * r2.sqrt()) / 2.0;
    let off_q = (r1.sqrt() + d * r2.sqrt()) / 2.0;
    Ok(ProjectionPair2x2 {
        p: [
            [(1.0 + d + root) / 2.0, off_p],
            [off_p, (1.0 - d - root) / 2.0],
        ],
        q: [
            [(1.0 + d - root) / 2.0, off_q],
            [off_q, (1.0 - d + root) / 2.0],
        ],
        source: pt,
    })
}

/// The diagonal sharpness family: `n` pairs (`n` even) whose products sum to
/// `diag(-n/8, 3n/8)`. Odd-indexed pairs sit at `(-1/8, 3/8)`, even-indexed
/// pairs are their sign conjugates, so off-diagonals cancel exactly.
pub fn sharpness_family(n: u32) -> Result<Vec<(Mat2, Mat2)>> {
    if !n.is_multiple_of(2) || n < 2 {
        return Err(Error::domain(format!(
            "sharpness_family requires even n >= 2, got {n}"
        )));
    }
    let base = make_pq(RegionPoint::new(-0.125, 0.375))?;
    let mut out = Vec::with_capacity(n as usize);
    for i in 0..n {
        if i % 2 == 0 {
            out.push((base.q, base.p));
        } else {
            out.push((conjugate_by_sign(&base.q), conjugate_by_sign(&base.p)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQ3: f64 = 1.7320508075688772;

    fn diag_qp(pair: &ProjectionPair2x2) -> (f64, f64) {
        let qp = mat2_mul(&pair.q, &pair.p);
        (qp[0][0], qp[1][1])
    }

    #[test]
    fn origin_special_case() {
        let pair = make_pq(RegionPoint::new(0.0, 0.0)).unwrap();
        assert_eq!(pair.p, [[1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(pair.q, [[0.0, 0.0], [0.0, 1.0]]);
        // Tiny points collapse onto the origin case.
        let pair = make_pq(RegionPoint::new(1e-16, -1e-16)).unwrap();
        assert_eq!(pair.p, [[1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn extreme_point_matrices() {
        let pair = make_pq(RegionPoint::new(-0.125, 0.375)).unwrap();
        let expect_p = [[0.25, SQ3 / 4.0], [SQ3 / 4.0, 0.75]];
        let expect_q = [[0.25, -SQ3 / 4.0], [-SQ3 / 4.0, 0.75]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((pair.p[i][j] - expect_p[i][j]).abs() < 1e-15);
                assert!((pair.q[i][j] - expect_q[i][j]).abs() < 1e-15);
            }
        }
        let qp = mat2_mul(&pair.q, &pair.p);
        assert!((qp[0][0] + 0.125).abs() < 1e-15);
        assert!((qp[0][1] + SQ3 / 8.0).abs() < 1e-15);
        assert!((qp[1][0] - SQ3 / 8.0).abs() < 1e-15);
        assert!((qp[1][1] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn degenerate_corners() {
        let pair = make_pq(RegionPoint::new(1.0, 0.0)).unwrap();
        assert_eq!(pair.p, [[1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(pair.q, [[1.0, 0.0], [0.0, 0.0]]);

        let pair = make_pq(RegionPoint::new(0.5, 0.5)).unwrap();
        assert_eq!(pair.p, [[0.5, 0.5], [0.5, 0.5]]);
        assert_eq!(pair.q, [[0.5, 0.5], [0.5, 0.5]]);
    }

    #[test]
    fn rejects_points_outside_a() {
        assert!(make_pq(RegionPoint::new(0.6, 0.6)).is_err());
        assert!(make_pq(RegionPoint::new(-0.13, 0.3)).is_err());
        assert!(make_pq(RegionPoint::new(-1e-12, -1e-12)).is_err());
    }

    #[test]
    fn sign_conjugation_examples() {
        let m = [[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(conjugate_by_sign(&m), [[1.0, -2.0], [-3.0, 4.0]]);
        assert_eq!(conjugate_by_sign(&conjugate_by_sign(&m)), m);
        let pair = make_pq(RegionPoint::new(-0.125, 0.375)).unwrap();
        let flipped = conjugate_by_sign(&pair.p);
        assert!((flipped[0][1] + SQ3 / 4.0).abs() < 1e-15);
        assert!(verify_rank1_projection(&flipped, 1e-12));
    }

    #[test]
    fn rank1_check_examples() {
        assert!(verify_rank1_projection(&[[1.0, 0.0], [0.0, 0.0]], 1e-12));
        assert!(!verify_rank1_projection(&[[1.0, 0.0], [0.0, 1.0]], 1e-12));
        let pair = make_pq(RegionPoint::new(-0.125, 0.375)).unwrap();
        assert!(verify_rank1_projection(&pair.p, 1e-12));
        assert!(verify_rank1_projection(&pair.q, 1e-12));
    }

    #[test]
    fn sharpness_sums() {
        for n in [2u32, 8] {
            let fam = sharpness_family(n).unwrap();
            assert_eq!(fam.len(), n as usize);
            let mut sum = [[0.0; 2]; 2];
            for (q, p) in &fam {
                sum = mat2_add(&sum, &mat2_mul(q, p));
                let qp = mat2_mul(q, p);
                assert!((qp[0][0] + 0.125).abs() < 1e-15);
                assert!((qp[1][1] - 0.375).abs() < 1e-15);
            }
            let nf = n as f64;
            assert!((sum[0][0] + nf / 8.0).abs() < 1e-12);
            assert!((sum[1][1] - 3.0 * nf / 8.0).abs() < 1e-12);
            assert!(sum[0][1].abs() <= 1e-12 && sum[1][0].abs() <= 1e-12);
        }
        assert!(sharpness_family(3).is_err());
    }

    #[test]
    fn factory_continuity_away_from_origin() {
        // Interior points with s >= 1e-6: a 1e-9 input perturbation moves the
        // output by at most 1e-3.
        for i in 1..100 {
            let s = 1e-6 + (i as f64 / 100.0) * 0.9;
            let d = 0.4 * s.sqrt();
            let base = RegionPoint::new((s + d) / 2.0, (s - d) / 2.0);
            let near = RegionPoint::new(base.x + 1e-9, base.y - 1e-9);
            let (p0, p1) = (make_pq(base).unwrap(), make_pq(near).unwrap());
            let mut delta = 0.0f64;
            for r in 0..2 {
                for c in 0..2 {
                    delta = delta.max((p0.p[r][c] - p1.p[r][c]).abs());
                    delta = delta.max((p0.q[r][c] - p1.q[r][c]).abs());
                }
            }
            assert!(delta <= 1e-3, "jump {delta} at s = {s}");
        }
    }

    proptest! {
        #[test]
        fn factory_round_trip(s in 1e-4f64..=1.0, frac in -1.0f64..=1.0) {
            let d = frac * s.sqrt();
            let pt = RegionPoint::new((s + d) / 2.0, (s - d) / 2.0);
            let pair = make_pq(pt).unwrap();
            prop_assert!(verify_rank1_projection(&pair.p, 1e-12));
            prop_assert!(verify_rank1_projection(&pair.q, 1e-12));
            let (x, y) = diag_qp(&pair);
            prop_assert!((x - pt.x).abs() <= 1e-12);
            prop_assert!((y - pt.y).abs() <= 1e-12);
        }
    }
}

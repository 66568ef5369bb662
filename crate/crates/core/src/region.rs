//! Geometry of the attainable set `A = {(x, y) : (x - y)^2 <= x + y <= 1}`
//! and the closed-form feasibility bounds built on it.
//!
//! All integer-derived constants are kept in rational arithmetic and only
//! converted to `f64` at the module boundary, so the exact identities between
//! them (e.g. `(b - a)^2 = a + b`) can be asserted without tolerance.

use std::fmt;

use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Membership tolerance used when exact boundary points of `A` are fed
/// through floating-point arithmetic (the decomposer produces `(b, a)` and
/// `(b, 1 - b)` exactly on the boundary).
pub const TAU_A: f64 = 1e-9;

/// A pair `(x, y)` of real diagonal values of a product `QP` of rank-one
/// projections, tested against the set `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub x: f64,
    pub y: f64,
}

impl RegionPoint {
    pub fn new(x: f64, y: f64) -> Self {
        RegionPoint { x, y }
    }

    /// `s = x + y`
    pub fn sum(&self) -> f64 {
        self.x + self.y
    }

    /// `d = x - y`
    pub fn diff(&self) -> f64 {
        self.x - self.y
    }
}

/// Membership test for `A` with an explicit slack `tol >= 0`.
pub fn in_region_a(p: RegionPoint, tol: f64) -> bool {
    debug_assert!(tol >= 0.0);
    let s = p.sum();
    let d = p.diff();
    d * d <= s + tol && s <= 1.0 + tol
}

/// The range of `x` over `A`. Both endpoints are attained: the minimum at
/// `(-1/8, 3/8)` and the maximum at `(1, 0)`.
pub fn region_x_range() -> (f64, f64) {
    (-0.125, 1.0)
}

/// `inf { y + (n-1) x : (x, y) in A } = -(n-2)^2 / (8n)` for `n >= 2`.
pub fn inf_linear_functional(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!(
            "inf_linear_functional requires n >= 2, got {n}"
        )));
    }
    let n = n as i64;
    Ok(Rational64::new(-(n - 2) * (n - 2), 8 * n).to_f64().unwrap())
}

/// Grid oracle for [`inf_linear_functional`]: minimum of `y + (n-1) x` over
/// `grid x grid` samples of the bounding box `[-1/8, 1]^2` filtered by
/// membership in `A`.
pub fn inf_linear_functional_bruteforce(n: u32, grid: usize) -> f64 {
    debug_assert!(n >= 2 && grid >= 100);
    let mut best = f64::INFINITY;
    let step = 1.125 / (grid - 1) as f64;
    for i in 0..grid {
        let x = -0.125 + i as f64 * step;
        for j in 0..grid {
            let y = -0.125 + j as f64 * step;
            if in_region_a(RegionPoint::new(x, y), 0.0) {
                let v = y + (n as f64 - 1.0) * x;
                if v < best {
                    best = v;
                }
            }
        }
    }
    best
}

/// Grid oracle for [`region_x_range`]: min/max of `x` over the sampled set.
pub fn region_x_range_bruteforce(grid: usize) -> (f64, f64) {
    debug_assert!(grid >= 100);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let step = 1.125 / (grid - 1) as f64;
    for i in 0..grid {
        let x = -0.125 + i as f64 * step;
        for j in 0..grid {
            let y = -0.125 + j as f64 * step;
            if in_region_a(RegionPoint::new(x, y), 0.0) {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo, hi)
}

/// The constants `a = -(m-2)(m+2)/(8m^2)` and `b = (m-2)(3m-2)/(8m^2)`
/// governing the tilde sector, defined for `m >= 2`.
pub fn ab_constants(m: u32) -> Result<(Rational64, Rational64)> {
    if m < 2 {
        return Err(Error::domain(format!("ab_constants requires m >= 2, got {m}")));
    }
    let m = m as i64;
    let a = Rational64::new(-(m - 2) * (m + 2), 8 * m * m);
    let b = Rational64::new((m - 2) * (3 * m - 2), 8 * m * m);
    Ok((a, b))
}

/// All closed-form bounds for a given summand count `n`, in exact rational
/// arithmetic. The fields tied to the even-`n` construction (`thm3_*`, `m`,
/// `a`, `b`) are absent when `n` is odd or `n < 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub n: u32,
    /// `-n/8`
    pub thm1_low: Rational64,
    /// `n`
    pub thm1_high: Rational64,
    /// `-(n-2)^2 / (8n)`
    pub thm2_threshold: Rational64,
    /// `-(n-4)^2 / (8n)`
    pub thm3_low: Option<Rational64>,
    /// `n - 2`
    pub thm3_high: Option<Rational64>,
    pub m: Option<u32>,
    pub a: Option<Rational64>,
    pub b: Option<Rational64>,
}

pub fn bound_table(n: u32) -> Result<BoundTable> {
    if n < 1 {
        return Err(Error::domain("bound_table requires n >= 1"));
    }
    let ni = n as i64;
    let even_ge4 = n.is_multiple_of(2) && n >= 4;
    let (m, a, b) = if even_ge4 {
        let m = n / 2;
        let (a, b) = ab_constants(m)?;
        (Some(m), Some(a), Some(b))
    } else {
        (None, None, None)
    };
    Ok(BoundTable {
        n,
        thm1_low: Rational64::new(-ni, 8),
        thm1_high: Rational64::from_integer(ni),
        thm2_threshold: Rational64::new(-(ni - 2) * (ni - 2), 8 * ni),
        thm3_low: even_ge4.then(|| Rational64::new(-(ni - 4) * (ni - 4), 8 * ni)),
        thm3_high: even_ge4.then(|| Rational64::from_integer(ni - 2)),
        m,
        a,
        b,
    })
}

/// Outcome of testing a spectrum `[lambda_min, lambda_max]` against the
/// necessary and sufficient conditions for `n` summands.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub n: u32,
    /// `lambda_min >= -n/8` and `lambda_max <= n`.
    pub necessary_thm1: bool,
    /// `lambda_max >= -(n-2)^2 / (8n)`.
    pub necessary_thm2: bool,
    /// `n` even, `n >= 4`, `lambda_min >= -(n-4)^2/(8n)`, `lambda_max <= n-2`.
    /// `None` when `n` is odd or `n < 4`.
    pub sufficient_thm3: Option<bool>,
    pub messages: Vec<String>,
}

impl FeasibilityVerdict {
    pub fn sufficient(&self) -> bool {
        self.sufficient_thm3 == Some(true)
    }
}

impl fmt::Display for FeasibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for msg in &self.messages {
            writeln!(f, "{msg}")?;
        }
        Ok(())
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap()
}

pub fn check_feasibility(lambda_min: f64, lambda_max: f64, n: u32) -> Result<FeasibilityVerdict> {
    if lambda_min > lambda_max {
        return Err(Error::domain(format!(
            "lambda_min = {lambda_min} exceeds lambda_max = {lambda_max}"
        )));
    }
    let table = bound_table(n)?;
    let t1_low = ratio_f64(table.thm1_low);
    let t1_high = ratio_f64(table.thm1_high);
    let t2 = ratio_f64(table.thm2_threshold);
    let necessary_thm1 = lambda_min >= t1_low && lambda_max <= t1_high;
    let necessary_thm2 = lambda_max >= t2;
    let mut messages = vec![
        format!(
            "Theorem 1 necessary bound [-n/8, n] = [{t1_low}, {t1_high}]: {}",
            if necessary_thm1 { "pass" } else { "fail" }
        ),
        format!(
            "Theorem 2 necessary bound lambda_max >= -(n-2)^2/(8n) = {t2}: {}",
            if necessary_thm2 { "pass" } else { "fail" }
        ),
    ];
    let sufficient_thm3 = match (table.thm3_low, table.thm3_high) {
        (Some(low), Some(high)) => {
            let low = ratio_f64(low);
            let high = ratio_f64(high);
            let ok = lambda_min >= low && lambda_max <= high;
            messages.push(format!(
                "Theorem 3 sufficient bound [-(n-4)^2/(8n), n-2] = [{low}, {high}]: {}",
                if ok { "pass" } else { "fail" }
            ));
            Some(ok)
        }
        _ => {
            messages.push(format!(
                "Theorem 3 sufficient bound: not applicable (n = {n} is odd or < 4)"
            ));
            None
        }
    };
    Ok(FeasibilityVerdict {
        n,
        necessary_thm1,
        necessary_thm2,
        sufficient_thm3,
        messages,
    })
}

/// Smallest even `n >= 4` whose sufficient condition covers
/// `[lambda_min, lambda_max]`. Both constraints relax as `n` grows, so the
/// upward search always terminates.
pub fn min_sufficient_n(lambda_min: f64, lambda_max: f64) -> Result<u32> {
    if lambda_min > lambda_max {
        return Err(Error::domain(format!(
            "lambda_min = {lambda_min} exceeds lambda_max = {lambda_max}"
        )));
    }
    let mut n = 4u32;
    loop {
        let table = bound_table(n)?;
        let low = ratio_f64(table.thm3_low.unwrap());
        let high = ratio_f64(table.thm3_high.unwrap());
        if lambda_min >= low && lambda_max <= high {
            return Ok(n);
        }
        n += 2;
    }
}

/// Closed-form estimates for the smallest summand count `n(c)` covering all
/// Hermitian `x` with `||x|| <= c`:
/// `2 + 4c + 4 sqrt(c^2 + c) <= n(c) <= 2 ceil(2 + 2c + 2 sqrt(c^2 + 2c))`.
pub fn nc_bounds(c: f64) -> Result<(f64, u64)> {
    if c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::domain(format!("nc_bounds requires c > 0, got {c}")));
    }
    let lower = 2.0 + 4.0 * c + 4.0 * (c * c + c).sqrt();
    let upper = 2.0 * (2.0 + 2.0 * c + 2.0 * (c * c + 2.0 * c).sqrt()).ceil();
    // The linear envelopes 8c + 8/3 <= ceil(lower) and upper <= 8c + 10.
    debug_assert!(lower.ceil() + 1e-9 >= 8.0 * c + 8.0 / 3.0);
    debug_assert!(upper <= 8.0 * c + 10.0 + 1e-9);
    debug_assert!(lower <= upper);
    Ok((lower, upper as u64))
}

/// Interval estimates for the optimal constants: `C(n) in [n-2, n]` and
/// `c(n) in [(n-4)^2/(8n), (n-2)^2/(8n)]`, for even `n >= 4`. The exact
/// values are not known.
pub fn cn_cn_intervals(n: u32) -> Result<((f64, f64), (f64, f64))> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::domain(format!(
            "cn_cn_intervals requires even n >= 4, got {n}"
        )));
    }
    let table = bound_table(n)?;
    let big_c = (ratio_f64(table.thm3_high.unwrap()), ratio_f64(table.thm1_high));
    let small_c = (
        -ratio_f64(table.thm3_low.unwrap()),
        -ratio_f64(table.thm2_threshold),
    );
    Ok((big_c, small_c))
}

//! Decomposition engine: given a spectral presentation with spectrum in
//! `[-(n-4)^2/(8n), n-2]` and even `n = 2m >= 4`, builds `n` rule-operator
//! pairs `(Q_i, P_i)` with `sum_i Q_i P_i = x (x) 1`, plus an exhaustive
//! window verifier.
//!
//! Layout: the copy index `t` is split into residue classes. Group
//! `i in 1..=m` owns `E_i = {t = i-1 (mod m)}`; inside `E_i` the residue
//! `i-1 (mod 2m)` is the hat pool (sum value 0) and `i-1+m (mod 2m)` the
//! tilde pool (sum value 2b). Labels with `lambda > 2b` feed the hat sector,
//! the rest the tilde sector; each sector pairs its pool with the outer
//! families of the other groups and realizes its target values through the
//! 2x2 projection factory. The paired operator `2i` carries sign-conjugated
//! blocks so each group's product sum is exactly diagonal.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::blockops::{
    coverage_exactly_once, match_families, BlockRule, IndexFamily, RuleOperator,
    SpectralPresentation,
};
use crate::error::{Error, Result};
use crate::matfactory::{conjugate_by_sign, make_pq, mat2_mul, Mat2};
use crate::region::{ab_constants, check_feasibility, in_region_a, RegionPoint, TAU_A};

/// Per-block projection tolerance; the factory emits exact rank-one
/// projections so defects are round-off only.
pub const PROJECTION_AUDIT_TOL: f64 = 1e-12;

/// How the two pools inside each `E_i` are assigned when a sector is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    /// Both sectors populated: residue `i-1` is the hat pool, `i-1+m` the
    /// tilde pool.
    Standard,
    /// Every label is above `2b`: the tilde sector is empty and all of `E_i`
    /// becomes the hat pool.
    AllHat,
    /// No label is above `2b`: the hat sector is empty and all of `E_i`
    /// becomes the tilde pool.
    AllTilde,
}

/// The residue-class sector assignment for all `m` groups.
#[derive(Debug, Clone)]
pub struct SectorPlan {
    pub n: u32,
    pub m: u32,
    pub a: Rational64,
    pub b: Rational64,
    /// Labels with `lambda > 2b` (strict).
    pub f_labels: BTreeSet<usize>,
    pub mode: PoolMode,
    pub lambdas: Vec<f64>,
}

impl SectorPlan {
    fn two_m(&self) -> u64 {
        2 * self.m as u64
    }

    fn b_f64(&self) -> f64 {
        self.b.to_f64().unwrap()
    }

    fn labels(&self) -> usize {
        self.lambdas.len()
    }

    /// Residues mod `2m` of `E_i` for group `i in 1..=m`.
    fn e_residues(&self, i: u32) -> [u64; 2] {
        let r = (i - 1) as u64;
        [r, r + self.m as u64]
    }

    /// Hat pool families of group `i` (all labels).
    pub fn hat_pool(&self, i: u32) -> Vec<IndexFamily> {
        let [hat, tilde] = self.e_residues(i);
        let residues: &[u64] = match self.mode {
            PoolMode::Standard => &[hat],
            PoolMode::AllHat => &[hat, tilde],
            PoolMode::AllTilde => &[],
        };
        self.pool_families(residues)
    }

    /// Tilde pool families of group `i` (all labels).
    pub fn tilde_pool(&self, i: u32) -> Vec<IndexFamily> {
        let [hat, tilde] = self.e_residues(i);
        let residues: &[u64] = match self.mode {
            PoolMode::Standard => &[tilde],
            PoolMode::AllHat => &[],
            PoolMode::AllTilde => &[hat, tilde],
        };
        self.pool_families(residues)
    }

    fn pool_families(&self, residues: &[u64]) -> Vec<IndexFamily> {
        let mut out = Vec::new();
        for k in 0..self.labels() {
            for &r in residues {
                out.push(IndexFamily::new(k, r, self.two_m()));
            }
        }
        out
    }

    /// Residues mod `2m` outside `E_i`.
    fn outer_residues(&self, i: u32) -> Vec<u64> {
        let e = (i - 1) as u64;
        (0..self.two_m()).filter(|r| r % self.m as u64 != e).collect()
    }

    /// Hat outer families of group `i`: labels above `2b`, residues outside
    /// `E_i`.
    pub fn hat_outer(&self, i: u32) -> Vec<IndexFamily> {
        self.outer_families(i, true)
    }

    /// Tilde outer families of group `i`: labels at or below `2b`, residues
    /// outside `E_i`.
    pub fn tilde_outer(&self, i: u32) -> Vec<IndexFamily> {
        self.outer_families(i, false)
    }

    fn outer_families(&self, i: u32, in_f: bool) -> Vec<IndexFamily> {
        let mut out = Vec::new();
        for k in 0..self.labels() {
            if self.f_labels.contains(&k) != in_f {
                continue;
            }
            for r in self.outer_residues(i) {
                out.push(IndexFamily::new(k, r, self.two_m()));
            }
        }
        out
    }

    /// Residues mod `2m` belonging to some other group's tilde pool.
    pub fn d_residues(&self, i: u32) -> BTreeSet<u64> {
        let m = self.m as u64;
        let e = (i - 1) as u64;
        match self.mode {
            PoolMode::Standard => (0..m).filter(|&j| j != e).map(|j| j + m).collect(),
            PoolMode::AllHat => BTreeSet::new(),
            PoolMode::AllTilde => (0..2 * m).filter(|&r| r % m != e).collect(),
        }
    }

    /// True when the pool cell at residue `rho` (inside `E_i`) carries value
    /// 0 rather than `2b`.
    fn pool_is_hat(&self, rho: u64) -> bool {
        match self.mode {
            PoolMode::Standard => rho < self.m as u64,
            PoolMode::AllHat => true,
            PoolMode::AllTilde => false,
        }
    }

    /// The group-`i` summand value at cell `(label, rho)`, `rho` mod `2m`.
    pub fn yi_value(&self, i: u32, label: usize, rho: u64) -> f64 {
        // Rational eigenvalues with small denominators go through the exact
        // path so corridor endpoints telescope without round-off.
        let lambda = Rational64::approximate_float(self.lambdas[label]);
        match lambda {
            Some(l)
                if l.to_f64() == Some(self.lambdas[label]) && l.denom().abs() < (1 << 20) =>
            {
                self.yi_value_exact(i, l, rho).to_f64().unwrap()
            }
            _ => self.yi_value_float(i, self.lambdas[label], rho),
        }
    }

    fn yi_value_float(&self, i: u32, lambda: f64, rho: u64) -> f64 {
        let e = (i - 1) as u64;
        if rho % self.m as u64 == e {
            if self.pool_is_hat(rho) {
                0.0
            } else {
                2.0 * self.b_f64()
            }
        } else {
            let in_d = self.d_residues(i).contains(&rho);
            let cut = if in_d { 2.0 * self.b_f64() } else { 0.0 };
            (lambda - cut) / (self.m as f64 - 1.0)
        }
    }

    /// Exact-rational version of `yi_value` for rational eigenvalues.
    pub fn yi_value_exact(&self, i: u32, lambda: Rational64, rho: u64) -> Rational64 {
        let e = (i - 1) as u64;
        let two_b = self.b * 2;
        if rho % self.m as u64 == e {
            if self.pool_is_hat(rho) {
                Rational64::from_integer(0)
            } else {
                two_b
            }
        } else {
            let in_d = self.d_residues(i).contains(&rho);
            let cut = if in_d { two_b } else { Rational64::from_integer(0) };
            (lambda - cut) / Rational64::from_integer(self.m as i64 - 1)
        }
    }

    /// All cell values of the group-`i` summand, keyed by `(label, rho)`.
    pub fn yi_values(&self, i: u32) -> BTreeMap<(usize, u64), f64> {
        let mut out = BTreeMap::new();
        for k in 0..self.labels() {
            for rho in 0..self.two_m() {
                out.insert((k, rho), self.yi_value(i, k, rho));
            }
        }
        out
    }
}

/// Builds the sector plan, rejecting spectra outside the sufficient corridor.
pub fn plan_sectors(spec: &SpectralPresentation, n: u32) -> Result<SectorPlan> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::domain(format!(
            "decomposition requires even n >= 4, got {n}"
        )));
    }
    let verdict = check_feasibility(spec.lambda_min(), spec.lambda_max(), n)?;
    if !verdict.sufficient() {
        return Err(Error::Infeasible(format!(
            "spectrum [{}, {}] not covered for n = {n}:\n{verdict}",
            spec.lambda_min(),
            spec.lambda_max()
        )));
    }
    let m = n / 2;
    let (a, b) = ab_constants(m)?;
    let two_b = 2.0 * b.to_f64().unwrap();
    let f_labels: BTreeSet<usize> = spec
        .lambdas
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > two_b)
        .map(|(k, _)| k)
        .collect();
    let mode = if f_labels.len() == spec.num_labels() {
        PoolMode::AllHat
    } else if f_labels.is_empty() {
        PoolMode::AllTilde
    } else {
        PoolMode::Standard
    };
    Ok(SectorPlan {
        n,
        m,
        a,
        b,
        f_labels,
        mode,
        lambdas: spec.lambdas.clone(),
    })
}

/// One of the `n` summands: the operator product is `q * p`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    pub q: RuleOperator,
    pub p: RuleOperator,
}

/// The full construction output: `n` rule-operator pairs in the eigenbasis
/// of the input, with `sum_i Q_i P_i = x (x) 1`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub spec: SpectralPresentation,
    pub plan: SectorPlan,
    pub pairs: Vec<OperatorPair>,
}

impl Decomposition {
    pub fn n(&self) -> u32 {
        self.plan.n
    }

    pub fn m(&self) -> u32 {
        self.plan.m
    }

    pub fn a(&self) -> Rational64 {
        self.plan.a
    }

    pub fn b(&self) -> Rational64 {
        self.plan.b
    }
}

/// Runs the whole construction for `spec` with `n` summands.
pub fn decompose(spec: &SpectralPresentation, n: u32) -> Result<Decomposition> {
    let plan = plan_sectors(spec, n)?;
    let mut pairs = Vec::with_capacity(n as usize);
    for i in 1..=plan.m {
        let mut q1 = RuleOperator::default();
        let mut p1 = RuleOperator::default();
        let mut q2 = RuleOperator::default();
        let mut p2 = RuleOperator::default();
        let sectors = [
            (0.0, plan.hat_pool(i), plan.hat_outer(i)),
            (plan.b_f64(), plan.tilde_pool(i), plan.tilde_outer(i)),
        ];
        for (x_of, pool, outer) in &sectors {
            for (src, tgt) in match_families(pool, outer)? {
                let rho = tgt.residue % plan.two_m();
                let y = plan.yi_value(i, tgt.label, rho) / 2.0;
                let pt = RegionPoint::new(*x_of, y);
                let pair = make_pq(pt).map_err(|e| match e {
                    Error::OutsideRegion { x, y, tol, .. } => Error::OutsideRegion {
                        x,
                        y,
                        tol,
                        context: format!(
                            " (group {i}, label {}, residue {rho}: construction bug)",
                            tgt.label
                        ),
                    },
                    other => other,
                })?;
                q1.rules.push(BlockRule {
                    source: src,
                    target: tgt,
                    mat: pair.q,
                });
                p1.rules.push(BlockRule {
                    source: src,
                    target: tgt,
                    mat: pair.p,
                });
                q2.rules.push(BlockRule {
                    source: src,
                    target: tgt,
                    mat: conjugate_by_sign(&pair.q),
                });
                p2.rules.push(BlockRule {
                    source: src,
                    target: tgt,
                    mat: conjugate_by_sign(&pair.p),
                });
            }
        }
        pairs.push(OperatorPair { q: q1, p: p1 });
        pairs.push(OperatorPair { q: q2, p: p2 });
    }
    Ok(Decomposition {
        spec: spec.clone(),
        plan,
        pairs,
    })
}

/// Adds the in-window entries of the blockwise product `q * p` of one
/// operator pair into `acc` (row-major, dimension `labels * window`, basis
/// order `(t, k)` lexicographic).
fn accumulate_product(acc: &mut [f64], pair: &OperatorPair, labels: usize, window: u64) {
    let dim = labels * window as usize;
    debug_assert_eq!(acc.len(), dim * dim);
    let flat = |fam: &IndexFamily, s: u64| {
        let copy = fam.residue + s * fam.modulus;
        (copy < window).then(|| copy as usize * labels + fam.label)
    };
    for (rq, rp) in pair.q.rules.iter().zip(&pair.p.rules) {
        debug_assert_eq!((rq.source, rq.target), (rp.source, rp.target));
        let prod: Mat2 = mat2_mul(&rq.mat, &rp.mat);
        let mut s = 0u64;
        loop {
            let u = flat(&rq.source, s);
            let v = flat(&rq.target, s);
            if u.is_none() && v.is_none() {
                break;
            }
            if let Some(u) = u {
                acc[u * dim + u] += prod[0][0];
            }
            if let Some(v) = v {
                acc[v * dim + v] += prod[1][1];
            }
            if let (Some(u), Some(v)) = (u, v) {
                acc[u * dim + v] += prod[0][1];
                acc[v * dim + u] += prod[1][0];
            }
            s += 1;
        }
    }
}

/// Dense window compression of `sum_i Q_i P_i`, returned row-major with its
/// dimension `labels * window`.
pub fn windowed_sum_matrix(d: &Decomposition, window: u64) -> (Vec<f64>, usize) {
    let labels = d.plan.labels();
    let dim = labels * window as usize;
    let mut acc = vec![0.0; dim * dim];
    for pair in &d.pairs {
        accumulate_product(&mut acc, pair, labels, window);
    }
    (acc, dim)
}

/// Verifier output. `pass()` is the contract: the windowed sum reproduces
/// the eigenvalue diagonal within `tol` and every structural audit holds.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub window: u64,
    pub dim: usize,
    /// Max entrywise deviation of the windowed sum from `diag(lambda_k)`.
    pub sum_defect: f64,
    /// Max per-rule rank-one projection defect across all 2n operators.
    pub max_projection_defect: f64,
    /// Max off-diagonal magnitude of any group sum
    /// `Q_{2i-1}P_{2i-1} + Q_{2i}P_{2i}` on the window.
    pub group_offdiag_defect: f64,
    pub coverage_ok: bool,
    pub sector_ok: bool,
    pub failures: Vec<String>,
    pub tol: f64,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.sum_defect <= self.tol
            && self.max_projection_defect <= PROJECTION_AUDIT_TOL
            && self.group_offdiag_defect <= PROJECTION_AUDIT_TOL
            && self.coverage_ok
            && self.sector_ok
            && self.failures.is_empty()
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "window T = {} (dimension {}), tolerance {:e}",
            self.window, self.dim, self.tol
        )?;
        writeln!(f, "sum defect:           {:e}", self.sum_defect)?;
        writeln!(f, "projection defect:    {:e}", self.max_projection_defect)?;
        writeln!(f, "group offdiag defect: {:e}", self.group_offdiag_defect)?;
        writeln!(f, "coverage audit:       {}", if self.coverage_ok { "pass" } else { "fail" })?;
        writeln!(f, "sector audit:         {}", if self.sector_ok { "pass" } else { "fail" })?;
        for msg in &self.failures {
            writeln!(f, "failure: {msg}")?;
        }
        write!(f, "verdict: {}", if self.pass() { "pass" } else { "fail" })
    }
}

fn projection_defect(m: &Mat2) -> f64 {
    let mm = mat2_mul(m, m);
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((mm[i][j] - m[i][j]).abs());
        }
    }
    d = d.max((m[0][1] - m[1][0]).abs());
    d = d.max((m[0][0] + m[1][1] - 1.0).abs());
    d.max((m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs())
}

/// Per-group audit work: dense group sum plus rule-level checks.
struct GroupAudit {
    acc: Vec<f64>,
    offdiag: f64,
    projection_defect: f64,
    failures: Vec<String>,
}

fn audit_group(d: &Decomposition, group: usize, window: u64) -> GroupAudit {
    let plan = &d.plan;
    let labels = plan.labels();
    let dim = labels * window as usize;
    let mut acc = vec![0.0; dim * dim];
    let mut max_proj: f64 = 0.0;
    let mut failures = Vec::new();
    let (a, b) = (
        plan.a.to_f64().unwrap(),
        plan.b.to_f64().unwrap(),
    );
    for half in 0..2 {
        let pair = &d.pairs[2 * group + half];
        accumulate_product(&mut acc, pair, labels, window);
        for (ri, (rq, rp)) in pair.q.rules.iter().zip(&pair.p.rules).enumerate() {
            for mat in [&rq.mat, &rp.mat] {
                let defect = projection_defect(mat);
                max_proj = max_proj.max(defect);
                if defect > PROJECTION_AUDIT_TOL {
                    failures.push(format!(
                        "pair {} rule {ri}: block projection defect {defect:e}",
                        2 * group + half
                    ));
                }
            }
            // Sector audit on the unprimed half; the primed half shares the
            // same product diagonal.
            if half == 0 {
                let prod = mat2_mul(&rq.mat, &rp.mat);
                let (x, y) = (prod[0][0], prod[1][1]);
                let rho = rq.source.residue % plan.two_m();
                let hat = plan.pool_is_hat(rho);
                let (x_ok, y_ok) = if hat {
                    (x.abs() <= TAU_A, (0.0 - TAU_A..=1.0 + TAU_A).contains(&y))
                } else {
                    ((x - b).abs() <= TAU_A, (a - TAU_A..=1.0 - b + TAU_A).contains(&y))
                };
                let member = in_region_a(RegionPoint::new(x, y), TAU_A);
                if !(x_ok && y_ok && member) {
                    failures.push(format!(
                        "pair {} rule {ri}: point ({x}, {y}) violates the {} sector bounds",
                        2 * group,
                        if hat { "hat" } else { "tilde" }
                    ));
                }
            }
        }
    }
    let mut offdiag: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            if r != c {
                offdiag = offdiag.max(acc[r * dim + c].abs());
            }
        }
    }
    GroupAudit {
        acc,
        offdiag,
        projection_defect: max_proj,
        failures,
    }
}

fn verify_impl(d: &Decomposition, window: u64, tol: f64, parallel: bool) -> Result<VerifyReport> {
    let plan = &d.plan;
    if window < plan.two_m() {
        return Err(Error::domain(format!(
            "window {window} is smaller than 2m = {} and misses residue classes",
            plan.two_m()
        )));
    }
    let labels = plan.labels();
    let dim = labels * window as usize;
    let groups: Vec<GroupAudit> = if parallel {
        (0..plan.m as usize)
            .into_par_iter()
            .map(|g| audit_group(d, g, window))
            .collect()
    } else {
        (0..plan.m as usize)
            .map(|g| audit_group(d, g, window))
            .collect()
    };
    let mut acc = vec![0.0; dim * dim];
    let mut group_offdiag: f64 = 0.0;
    let mut max_proj: f64 = 0.0;
    let mut failures = Vec::new();
    for g in groups {
        for (dst, src) in acc.iter_mut().zip(&g.acc) {
            *dst += src;
        }
        group_offdiag = group_offdiag.max(g.offdiag);
        max_proj = max_proj.max(g.projection_defect);
        failures.extend(g.failures);
    }
    let sector_ok = failures.is_empty();
    let mut sum_defect: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let expect = if r == c { plan.lambdas[r % labels] } else { 0.0 };
            sum_defect = sum_defect.max((acc[r * dim + c] - expect).abs());
        }
    }
    let mut coverage_ok = true;
    for (pi, pair) in d.pairs.iter().enumerate() {
        for (name, op) in [("Q", &pair.q), ("P", &pair.p)] {
            if let Err(msg) = coverage_exactly_once(op, labels, window) {
                coverage_ok = false;
                failures.push(format!("pair {pi} operator {name}: {msg}"));
            }
        }
    }
    Ok(VerifyReport {
        window,
        dim,
        sum_defect,
        max_projection_defect: max_proj,
        group_offdiag_defect: group_offdiag,
        coverage_ok,
        sector_ok,
        failures,
        tol,
    })
}

/// Full window audit of a decomposition; see `VerifyReport`.
pub fn verify_decomposition(d: &Decomposition, window: u64, tol: f64) -> Result<VerifyReport> {
    verify_impl(d, window, tol, false)
}

/// Same audit with the per-group work spread across threads; the report is
/// identical to the serial one (group results are folded in order).
pub fn verify_decomposition_parallel(
    d: &Decomposition,
    window: u64,
    tol: f64,
) -> Result<VerifyReport> {
    verify_impl(d, window, tol, true)
}

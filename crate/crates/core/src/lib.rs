//! Constructive decomposition of Hermitian operators into sums of
//! compositions of pairs of orthogonal projections, `x = Q_1 P_1 + ... + Q_n P_n`,
//! together with numerical verifiers for every construction and bound.
//!
//! The crate is organized around the attainable region
//! `A = {(x, y) : (x - y)^2 <= x + y <= 1}` of diagonal values of a product
//! `QP` of rank-one projections in dimension two:
//!
//! - [`region`]: geometry of `A`, feasibility bounds, and the `n(c)` calculus.
//! - [`matfactory`]: explicit rank-one 2x2 projection pairs realizing any
//!   point of `A`, plus the sharpness example family.
//! - [`linalg`]: small dense Hermitian eigensolver and joint diagonalization
//!   of commuting pairs.
//! - [`pairsum`]: finite-dimensional builder producing four projections with
//!   `QP + Q'P' = 2(z1 (+) z2)` for a commuting pair with joint spectrum in `A`.
//! - [`blockops`]: finitely-described operators on the countable basis
//!   `{(label, copy)}` via arithmetic-progression index families.
//! - [`decomposer`]: the main engine turning a spectral presentation with
//!   spectrum in `[-(n-4)^2/(8n), n-2]` into `n` rule-operator pairs, plus an
//!   exact entrywise verifier.
//! - [`fileio`]: JSON file formats for matrices, spectra, and decompositions.

pub mod blockops;
pub mod decomposer;
pub mod error;
pub mod fileio;
pub mod linalg;
pub mod matfactory;
pub mod pairsum;
pub mod region;

pub use error::{Error, Result};

//! Numerical toolkit for finite von Neumann bi-algebras: k-transforms between
//! finite-dimensional algebras with weighted traces, smooth supports and
//! entropies, and checkers for the norm, support and entropy uncertainty
//! inequalities they satisfy. A separate module handles Gaussian chirp
//! families on the real line and the `F_{p,q}` norm-ratio functional.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod corpus;
pub mod entropy;
pub mod error;
pub mod report;
pub mod schwartz;
pub mod suite;
pub mod support;
pub mod transforms;
pub mod uncertainty;

pub use algebra::{AlgebraElement, AlgebraShape, Block, SpectralData, C64};
pub use error::{QfaError, Result};
pub use report::GapReport;
pub use transforms::KTransform;

/// Absolute tolerance for Hermiticity/idempotence predicates and for the
/// pass/fail threshold of inequality checks.
pub const TAU_NUM: f64 = 1e-9;

/// Relative eigenvalue cutoff below which a singular value counts as zero.
pub const RANK_CUT: f64 = 1e-10;

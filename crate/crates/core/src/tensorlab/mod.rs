//! The min/max tensor cones of `V ⊗ V` realized as 4×4 box matrices, the
//! square-root Bell inequality, factorization witnesses for the max cone,
//! and the `S₁ ⊗ S₁` positivity pipeline.

mod boxmatrix;
mod sone;
mod trig;
mod witness;

pub use boxmatrix::{
    min_cone_member, sqrt_bell_value, BellValue, BoxMatrix, STable, BALANCE_TOL, VIOLATION_TOL,
};
pub use sone::{
    averaged_block, parabola_max, reduced_block, roots_of_unity, s1_max_split, sone_obstruction,
    sone_relaxation, split_parts, ObstructionReport,
};
pub use trig::{torus_min_eig, MatTrigPoly, TorusMin};
pub use witness::{
    max_cone_construct, max_cone_search, trace_inequality_check, FactorWitness,
    SearchOutcome, TraceInequality, SEARCH_MATCH_TOL, WITNESS_TOL,
};

use thiserror::Error;

use crate::convex::ConvexError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("entries must be finite")]
    NonFinite,
    #[error("row/column sums are unbalanced by {imbalance:e}")]
    Unbalanced { imbalance: f64 },
    #[error("inconsistent shapes")]
    Shape,
    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("witness {side}{index} is not positive semidefinite")]
    WitnessNotPsd { side: char, index: usize },
    #[error("witness sums are off by {defect:e}")]
    WitnessSums { defect: f64 },
    #[error("expected 1 or 2 variables, got {0}")]
    Vars(usize),
    #[error("exponent {0:?} is outside {{-1, 0, 1}}")]
    Exponent(Vec<i8>),
    #[error("coefficient of {0:?} is not the adjoint of its mirror")]
    NotSymmetric(Vec<i8>),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("|z| = {0} is not 1")]
    NotUnimodular(f64),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

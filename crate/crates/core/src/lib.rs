//! Exact rotated 3D-index of ideally triangulated knot complements, with
//! descendant insertions, Q-matrix extraction, q-difference operators and
//! holomorphic block factorizations.
//!
//! All series live in `Z((u))` or `Q((u))` with `u = q^(1/2)`; exponents are
//! stored in u-units and truncation is exclusive.

pub mod blocks;
pub mod indexsum;
pub mod insertion;
pub mod linalg;
pub mod matrix;
pub mod nzdata;
pub mod poly;
pub mod qdiff;
pub mod qmatrix;
pub mod qseries;
pub mod ratfun;
pub mod scalar;
pub mod suites;
pub mod tetindex;
mod text;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use blocks::{block, factorization_check, BlockId, BlockKnot};
pub use indexsum::IndexEngine;
pub use insertion::{builtin_insertion, Insertion};
pub use matrix::{RatMatrix, SeriesMatrix};
pub use nzdata::{builtin, builtin_reduced, NZReduced};
pub use qdiff::{guess, GuessBounds, QDiffOperator};
pub use qmatrix::{extract_q, verify_q, DegreeSchedule};
pub use qseries::Series;
pub use ratfun::RatFun;
pub use scalar::{Coeff, FieldCoeff};
pub use text::TextError;

/// Exact rational scalar.
pub type Rational = BigRational;
/// Series with rational coefficients.
pub type QSeries = Series<BigRational>;
/// Series with integer coefficients, the value type of the index.
pub type ZSeries = Series<BigInt>;
/// Laurent polynomial in `u` over the rationals.
pub type RatPoly = poly::UPoly<BigRational>;
/// Matrix of rational series.
pub type QSeriesMatrix = SeriesMatrix<BigRational>;

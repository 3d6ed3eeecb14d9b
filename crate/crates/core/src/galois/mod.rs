//! Finite-field arithmetic, coefficient matrices, and systematic MDS codes.

mod field;
mod matrix;
mod mds;

pub use field::{Field, Symbol};
pub use matrix::{make_coeff_matrix, solve, CoeffMatrix};
pub use mds::MdsCode;

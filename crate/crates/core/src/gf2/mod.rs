//! Linear algebra over GF(2) and small extension fields.

mod bitvec;
mod ext;
mod matrix;

pub use bitvec::BitVec;
pub use ext::{vandermonde, ExtElement, ExtField, MAX_DEGREE};
pub use matrix::{rank_and_basis, reconstruct, BasisDecomposition, Gf2Matrix};

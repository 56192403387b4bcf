//! GF(2^m) arithmetic, binary polynomials and GF(2) linear algebra.

mod field;
mod matrix;
mod poly;

pub use field::GaloisField;
pub use matrix::{gf2_eliminate, BinaryMatrix};
pub use poly::BinaryPolynomial;

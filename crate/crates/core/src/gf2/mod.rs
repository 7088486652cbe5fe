//! GF(2) linear algebra and the classical codes behind the final one-way
//! error correction and coset key extraction.

mod bitvec;
mod code;
mod css;
mod matrix;

pub use bitvec::BitVector;
pub use code::LinearCode;
pub use css::{verify_nested, CssPair, Reconciliation};
pub use matrix::{BitMatrix, Echelon};

use crate::error::Result;

/// `m · v` over GF(2).
pub fn mat_vec_mul(m: &BitMatrix, v: &BitVector) -> Result<BitVector> {
    m.mul_vec(v)
}

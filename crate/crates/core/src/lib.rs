//! Exact parameter-shift gradient rules for unitaries `exp(iτG)` whose
//! generators have an arbitrary finite spectrum.
//!
//! The crate synthesizes gradient rules along two routes: polynomial
//! expansion of the exponential over the generator's distinct eigenvalues,
//! and decomposition of the generator into few-eigenvalue pieces (projector
//! pairing, commutative and non-commutative Cartan sub-algebra forms). Every
//! rule can be evaluated on a dense statevector simulator and cross-checked
//! against the exact commutator gradient and finite differences.

pub mod decompose;
pub mod fixtures;
pub mod gradient;
pub mod io;
pub mod matrix;
pub mod operators;
pub mod psr_poly;
pub mod simulate;
pub mod spectral;

mod error;

pub use error::{Error, Result};
pub use operators::{FermionSum, PauliString, PauliSum};

//! Pauli and fermionic operator algebra plus named generator constructors.

mod dense;
mod fermion;
mod gates;
mod pauli;
mod singlet;

pub use dense::{dense_to_pauli, MAX_DENSE_QUBITS};
pub use fermion::{hermitize, jordan_wigner, FermionOp, FermionSum, HermitizeBranch};
pub use gates::{fsim, matchgate, transmon, MATCHGATE_BASIS};
pub use pauli::{commutator, pauli_multiply, PauliString, PauliSum};
pub use singlet::{build_singlet, kappa_double, kappa_single, number_op, spin_squared, spin_z, SingletKind};

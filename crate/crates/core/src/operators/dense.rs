//! Dense matrix representations of Pauli and fermionic sums.
//!
//! Basis convention: computational basis index `k` carries qubit (or
//! fermionic mode) `j` in bit `j`, so qubit 0 is the least significant bit.

use num_complex::Complex64;

use super::fermion::FermionSum;
use super::pauli::{PauliString, PauliSum};
use crate::matrix::{CMat, ZERO};
use crate::{Error, Result};

/// Guard for `to_dense`: 2^12 × 2^12 complex is the largest desk-scale size.
pub const MAX_DENSE_QUBITS: usize = 12;

fn check_size(n: usize) -> Result<usize> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { n, max: MAX_DENSE_QUBITS });
    }
    Ok(1usize << n)
}

pub(super) fn pauli_to_dense(sum: &PauliSum) -> Result<CMat> {
    let dim = check_size(sum.n_qubits())?;
    let mut m = CMat::zeros(dim, dim);
    for (p, c) in sum.terms() {
        for k in 0..dim as u64 {
            let (row, phase) = p.apply_to_basis(k);
            m[(row as usize, k as usize)] += c * phase;
        }
    }
    Ok(m)
}

pub(super) fn fermion_to_dense(sum: &FermionSum) -> Result<CMat> {
    let dim = check_size(sum.n_modes())?;
    let mut m = CMat::zeros(dim, dim);
    for (coeff, ops) in sum.terms() {
        // apply the operator string right-to-left to each basis state
        'base: for k in 0..dim as u64 {
            let mut state = k;
            let mut sign = 1.0;
            for op in ops.iter().rev() {
                let bit = 1u64 << op.mode;
                let occupied = state & bit != 0;
                if op.dagger == occupied {
                    continue 'base; // annihilated
                }
                if (state & (bit - 1)).count_ones() % 2 == 1 {
                    sign = -sign;
                }
                state ^= bit;
            }
            m[(state as usize, k as usize)] += coeff * sign;
        }
    }
    Ok(m)
}

/// Expands a dense operator over the Pauli-string basis:
/// `c_P = tr(P · M) / 2^N`.
pub fn dense_to_pauli(m: &CMat, n_qubits: usize) -> Result<PauliSum> {
    let dim = check_size(n_qubits)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimMismatch(m.nrows(), dim));
    }
    let mut sum = PauliSum::zero(n_qubits);
    for x in 0..dim as u64 {
        for z in 0..dim as u64 {
            let p = PauliString::from_masks(n_qubits, x, z)?;
            // tr(P·M) = Σ_j P[j→j^x] phase(j) · M[j, j ⊕ x]
            let mut tr = ZERO;
            for j in 0..dim as u64 {
                let (row, phase) = p.apply_to_basis(j);
                tr += phase * m[(j as usize, row as usize)];
            }
            let c = tr / Complex64::new(dim as f64, 0.0);
            if c.norm() > 1e-13 {
                sum.add_term(p, c);
            }
        }
    }
    Ok(sum)
}

impl FermionSum {
    pub fn to_dense(&self) -> Result<CMat> {
        fermion_to_dense(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{frobenius, ONE};

    #[test]
    fn identity_sum_is_identity_matrix() {
        let m = PauliSum::identity(2).to_dense().unwrap();
        assert!(frobenius(&(&m - CMat::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn z0_is_diag_1_minus1() {
        let s = PauliSum::from_terms(1, [(PauliString::z(1, 0), ONE)]).unwrap();
        let m = s.to_dense().unwrap();
        assert_eq!(m[(0, 0)], ONE);
        assert_eq!(m[(1, 1)], -ONE);
        assert_eq!(m[(0, 1)], ZERO);
    }

    #[test]
    fn dense_guard_triggers() {
        let s = PauliSum::identity(13);
        assert!(matches!(s.to_dense(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn pauli_roundtrip_through_dense() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut s = PauliSum::zero(3);
        for _ in 0..6 {
            let p = PauliString::from_masks(3, rng.gen::<u64>() & 7, rng.gen::<u64>() & 7)
                .unwrap();
            s.add_term(p, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        }
        let back = dense_to_pauli(&s.to_dense().unwrap(), 3).unwrap();
        let diff = s.sub(&back).unwrap();
        assert!(diff.max_coefficient() < 1e-12);
    }
}

//! Pauli strings in symplectic (x-mask, z-mask) form and weighted sums of
//! them. A string is the tensor product over qubits of I/X/Y/Z where qubit
//! `j` carries X if only bit `j` of `x` is set, Z if only bit `j` of `z`,
//! and Y if both. The stored operator is exactly that Hermitian product;
//! phases arising from products are returned separately.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::matrix::{CMat, ONE};
use crate::{Error, Result};

/// Coefficients with magnitude below this are dropped when sums simplify.
const PRUNE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    n_qubits: u32,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1 && n_qubits <= 64, "qubit count out of range");
        Self { n_qubits: n_qubits as u32, x: 0, z: 0 }
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 64 {
            return Err(Error::Invalid(format!("qubit count {n_qubits} out of range")));
        }
        let allowed = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        if x & !allowed != 0 || z & !allowed != 0 {
            return Err(Error::Invalid("mask exceeds qubit count".into()));
        }
        Ok(Self { n_qubits: n_qubits as u32, x, z })
    }

    pub fn x(n_qubits: usize, qubit: usize) -> Self {
        Self::from_masks(n_qubits, 1 << qubit, 0).expect("single-qubit X")
    }

    pub fn y(n_qubits: usize, qubit: usize) -> Self {
        Self::from_masks(n_qubits, 1 << qubit, 1 << qubit).expect("single-qubit Y")
    }

    pub fn z(n_qubits: usize, qubit: usize) -> Self {
        Self::from_masks(n_qubits, 0, 1 << qubit).expect("single-qubit Z")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity single-qubit factors.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Action on a computational basis state: `P|k⟩ = phase · |k ⊕ x⟩`.
    ///
    /// With `P = i^{|x∧z|} X^x Z^z` the phase is `i^{|x∧z|} (−1)^{|z∧k|}`.
    pub fn apply_to_basis(&self, k: u64) -> (u64, Complex64) {
        let y_count = (self.x & self.z).count_ones();
        let sign_pow = (self.z & k).count_ones();
        let mut phase = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if sign_pow % 2 == 1 {
            phase = -phase;
        }
        (k ^ self.x, phase)
    }

    fn label(&self) -> String {
        let mut parts = Vec::new();
        for q in 0..self.n_qubits() {
            let xb = self.x >> q & 1 == 1;
            let zb = self.z >> q & 1 == 1;
            match (xb, zb) {
                (true, false) => parts.push(format!("X{q}")),
                (true, true) => parts.push(format!("Y{q}")),
                (false, true) => parts.push(format!("Z{q}")),
                (false, false) => {}
            }
        }
        parts.join(" ")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "I")
        } else {
            write!(f, "{}", self.label())
        }
    }
}

/// Product of two strings with the phase making `a·b = phase · result` an
/// exact matrix identity.
pub fn pauli_multiply(a: &PauliString, b: &PauliString) -> Result<(PauliString, Complex64)> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch(a.n_qubits(), b.n_qubits()));
    }
    let x = a.x ^ b.x;
    let z = a.z ^ b.z;
    let ya = (a.x & a.z).count_ones() as i64;
    let yb = (b.x & b.z).count_ones() as i64;
    let yc = (x & z).count_ones() as i64;
    // a·b = i^{ya+yb} (−1)^{|za ∧ xb|} X^x Z^z = i^{ya+yb−yc+2|za∧xb|} · result
    let mut pow = ya + yb - yc + 2 * (a.z & b.x).count_ones() as i64;
    pow = pow.rem_euclid(4);
    let phase = match pow {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    Ok((PauliString { n_qubits: a.n_qubits, x, z }, phase))
}

/// Weighted sum of Pauli strings over a fixed qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(PauliString::identity(n_qubits), ONE);
        s
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch(p.n_qubits(), n_qubits));
            }
            s.add_term(p, c);
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or(crate::matrix::ZERO)
    }

    /// Adds a term, summing duplicates and dropping negligible results.
    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        debug_assert_eq!(p.n_qubits(), self.n_qubits);
        let entry = self.terms.entry(p).or_insert(crate::matrix::ZERO);
        *entry += c;
        if entry.norm() < PRUNE_EPS {
            self.terms.remove(&p);
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n_qubits);
        for (p, v) in &self.terms {
            out.add_term(*p, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        let mut out = Self::zero(self.n_qubits);
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let (p, phase) = pauli_multiply(pa, pb)?;
                out.add_term(p, ca * cb * phase);
            }
        }
        Ok(out)
    }

    /// Strings are Hermitian, so the adjoint only conjugates coefficients.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n_qubits);
        for (p, c) in &self.terms {
            out.add_term(*p, c.conj());
        }
        out
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).map(|d| d.max_coefficient() <= tol).unwrap_or(false)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.add(&self.adjoint()).map(|d| d.max_coefficient() <= tol).unwrap_or(false)
    }

    pub fn to_dense(&self) -> Result<CMat> {
        dense::pauli_to_dense(self)
    }
}

/// `[a, b] = ab − ba`, simplified.
pub fn commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    a.mul(b)?.sub(&b.mul(a)?)
}

use super::dense;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{frobenius, I};

    #[test]
    fn x_times_x_is_identity() {
        let x = PauliString::x(1, 0);
        let (p, phase) = pauli_multiply(&x, &x).unwrap();
        assert!(p.is_identity());
        assert_eq!(phase, ONE);
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        // oracle: 2x2 matrix product
        let x = PauliString::x(1, 0);
        let z = PauliString::z(1, 0);
        let (p, phase) = pauli_multiply(&x, &z).unwrap();
        assert_eq!(p, PauliString::y(1, 0));
        assert_eq!(phase, -I);
    }

    #[test]
    fn two_qubit_product_oracle() {
        // X0 Z1 · Z0 Z1 = (X0·Z0) ⊗ (Z1·Z1) = −i Y0
        let a = PauliSum::from_terms(
            2,
            [(PauliString::from_masks(2, 0b01, 0b10).unwrap(), ONE)],
        )
        .unwrap();
        let b = PauliSum::from_terms(
            2,
            [(PauliString::from_masks(2, 0, 0b11).unwrap(), ONE)],
        )
        .unwrap();
        let prod = a.mul(&b).unwrap();
        let dense = prod.to_dense().unwrap();
        let oracle = a.to_dense().unwrap() * b.to_dense().unwrap();
        assert!(frobenius(&(dense - oracle)) < 1e-14);
        let y0 = PauliString::y(2, 0);
        assert!((prod.coefficient(&y0) + I).norm() < 1e-14);
    }

    #[test]
    fn commutator_matches_dense_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 3;
            let mut a = PauliSum::zero(n);
            let mut b = PauliSum::zero(n);
            for _ in 0..4 {
                let p = PauliString::from_masks(n, rng.gen::<u64>() & 7, rng.gen::<u64>() & 7)
                    .unwrap();
                a.add_term(p, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
                let q = PauliString::from_masks(n, rng.gen::<u64>() & 7, rng.gen::<u64>() & 7)
                    .unwrap();
                b.add_term(q, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            }
            let comm = commutator(&a, &b).unwrap().to_dense().unwrap();
            let da = a.to_dense().unwrap();
            let db = b.to_dense().unwrap();
            let oracle = &da * &db - &db * &da;
            assert!(frobenius(&(comm - oracle)) < 1e-12);
        }
    }

    #[test]
    fn commuting_z_strings() {
        let a = PauliSum::from_terms(2, [(PauliString::z(2, 0), ONE)]).unwrap();
        let b = PauliSum::from_terms(2, [(PauliString::z(2, 1), ONE)]).unwrap();
        assert_eq!(commutator(&a, &b).unwrap().n_terms(), 0);
    }

    #[test]
    fn self_commutator_vanishes() {
        let g = PauliSum::from_terms(
            2,
            [
                (PauliString::x(2, 0), Complex64::new(0.3, 0.0)),
                (PauliString::y(2, 1), Complex64::new(-1.2, 0.0)),
                (PauliString::from_masks(2, 0b11, 0b10).unwrap(), Complex64::new(0.7, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(commutator(&g, &g).unwrap().n_terms(), 0);
    }
}

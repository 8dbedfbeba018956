//! Second-quantized fermionic operator sums, canonical normal ordering and
//! the Jordan–Wigner map onto Pauli sums.
//!
//! Mode `p` maps to qubit `p`; the annihilator is
//! `a_p = Z_0 … Z_{p−1} (X_p + iY_p)/2`, which makes `a_p† a_p = (1 − Z_p)/2`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::pauli::{PauliString, PauliSum};
use crate::matrix::{I, ONE};
use crate::{Error, Result};

const PRUNE_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FermionOp {
    pub mode: u32,
    pub dagger: bool,
}

impl FermionOp {
    pub fn create(mode: usize) -> Self {
        Self { mode: mode as u32, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode: mode as u32, dagger: false }
    }
}

/// Sum of products of creation/annihilation operators on `n_modes` modes.
/// Terms are stored as written; equality compares canonical normal-ordered
/// forms so that algebraically equal sums compare equal.
#[derive(Debug, Clone)]
pub struct FermionSum {
    n_modes: usize,
    terms: Vec<(Complex64, Vec<FermionOp>)>,
}

impl FermionSum {
    pub fn zero(n_modes: usize) -> Self {
        Self { n_modes, terms: Vec::new() }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self { n_modes, terms: vec![(ONE, Vec::new())] }
    }

    pub fn from_terms(
        n_modes: usize,
        terms: impl IntoIterator<Item = (Complex64, Vec<FermionOp>)>,
    ) -> Result<Self> {
        let mut s = Self::zero(n_modes);
        for (c, ops) in terms {
            s.push_term(c, ops)?;
        }
        Ok(s)
    }

    pub fn push_term(&mut self, c: Complex64, ops: Vec<FermionOp>) -> Result<()> {
        for op in &ops {
            if op.mode as usize >= self.n_modes {
                return Err(Error::Invalid(format!(
                    "mode {} out of range (n_modes {})",
                    op.mode, self.n_modes
                )));
            }
        }
        self.terms.push((c, ops));
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> impl Iterator<Item = &(Complex64, Vec<FermionOp>)> {
        self.terms.iter()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(|(v, ops)| (v * c, ops.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimMismatch(self.n_modes, other.n_modes));
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-ONE))
    }

    /// Operator product: concatenates op strings term by term.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimMismatch(self.n_modes, other.n_modes));
        }
        let mut out = Self::zero(self.n_modes);
        for (ca, opsa) in &self.terms {
            for (cb, opsb) in &other.terms {
                let mut ops = opsa.clone();
                ops.extend_from_slice(opsb);
                out.terms.push((ca * cb, ops));
            }
        }
        Ok(out)
    }

    /// Adjoint: reverse each op string, flip daggers, conjugate coefficients.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, ops)| {
                let rev: Vec<FermionOp> = ops
                    .iter()
                    .rev()
                    .map(|op| FermionOp { mode: op.mode, dagger: !op.dagger })
                    .collect();
                (c.conj(), rev)
            })
            .collect();
        Self { n_modes: self.n_modes, terms }
    }

    /// Normal-ordered canonical form: creators ascending by mode, then
    /// annihilators descending, contractions expanded via
    /// `a_p a_q† = δ_pq − a_q† a_p`.
    pub fn canonical(&self) -> BTreeMap<Vec<FermionOp>, Complex64> {
        let mut work: Vec<(Complex64, Vec<FermionOp>)> = self.terms.clone();
        let mut done: BTreeMap<Vec<FermionOp>, Complex64> = BTreeMap::new();
        while let Some((coeff, ops)) = work.pop() {
            match first_disorder(&ops) {
                None => {
                    *done.entry(ops).or_insert(crate::matrix::ZERO) += coeff;
                }
                Some((idx, Action::Contract)) => {
                    // a_p a_p† = 1 − a_p† a_p
                    let mut contracted = ops.clone();
                    contracted.drain(idx..idx + 2);
                    work.push((coeff, contracted));
                    let mut swapped = ops;
                    swapped.swap(idx, idx + 1);
                    work.push((-coeff, swapped));
                }
                Some((idx, Action::Swap)) => {
                    let mut swapped = ops;
                    swapped.swap(idx, idx + 1);
                    work.push((-coeff, swapped));
                }
                Some((_, Action::Vanish)) => {}
            }
        }
        done.retain(|_, c| c.norm() >= PRUNE_EPS);
        done
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        canonical_close(&self.sub(&self.adjoint()).unwrap().canonical(), tol)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        canonical_close(&self.add(&self.adjoint()).unwrap().canonical(), tol)
    }
}

impl PartialEq for FermionSum {
    fn eq(&self, other: &Self) -> bool {
        self.n_modes == other.n_modes && self.canonical() == other.canonical()
    }
}

fn canonical_close(map: &BTreeMap<Vec<FermionOp>, Complex64>, tol: f64) -> bool {
    map.values().all(|c| c.norm() <= tol)
}

enum Action {
    Contract,
    Swap,
    Vanish,
}

/// Finds the first adjacent pair breaking canonical order.
fn first_disorder(ops: &[FermionOp]) -> Option<(usize, Action)> {
    for i in 0..ops.len().saturating_sub(1) {
        let (a, b) = (ops[i], ops[i + 1]);
        match (a.dagger, b.dagger) {
            (false, true) => {
                return Some((i, if a.mode == b.mode { Action::Contract } else { Action::Swap }))
            }
            (true, true) => {
                if a.mode == b.mode {
                    return Some((i, Action::Vanish));
                }
                if a.mode > b.mode {
                    return Some((i, Action::Swap));
                }
            }
            (false, false) => {
                if a.mode == b.mode {
                    return Some((i, Action::Vanish));
                }
                if a.mode < b.mode {
                    return Some((i, Action::Swap));
                }
            }
            (true, false) => {}
        }
    }
    None
}

/// Standard Jordan–Wigner chain transform.
pub fn jordan_wigner(f: &FermionSum) -> Result<PauliSum> {
    let n = f.n_modes();
    let mut out = PauliSum::zero(n);
    for (coeff, ops) in f.terms() {
        let mut acc = PauliSum::identity(n).scaled(*coeff);
        for op in ops {
            let p = op.mode as usize;
            let chain = if p == 0 { 0u64 } else { (1u64 << p) - 1 };
            let x_part = PauliString::from_masks(n, 1 << p, chain)?;
            let y_part = PauliString::from_masks(n, 1 << p, chain | (1 << p))?;
            // a_p = chain · (X_p + iY_p)/2 ; a_p† flips the sign of the Y part
            let sign = if op.dagger { -I } else { I };
            let mapped = PauliSum::from_terms(
                n,
                [(x_part, ONE * 0.5), (y_part, sign * 0.5)],
            )?;
            acc = acc.mul(&mapped)?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// Which branch `hermitize` took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HermitizeBranch {
    Hermitian,
    /// Input was anti-Hermitian and was multiplied by −i.
    AntiHermitian,
}

/// Maps a Hermitian or anti-Hermitian sum onto the Hermitian convention of
/// `exp(iτG)`: Hermitian input is returned unchanged, anti-Hermitian input
/// becomes `−i·input` so that `exp(τ·input) = exp(iτ·G)`.
pub fn hermitize(p: &PauliSum) -> Result<(PauliSum, HermitizeBranch)> {
    let scale = p.max_coefficient().max(1.0);
    let herm = p.sub(&p.adjoint())?.max_coefficient();
    let anti = p.add(&p.adjoint())?.max_coefficient();
    let tol = 1e-10 * scale;
    if herm <= tol {
        Ok((p.clone(), HermitizeBranch::Hermitian))
    } else if anti <= tol {
        Ok((p.scaled(-I), HermitizeBranch::AntiHermitian))
    } else {
        Err(Error::NotNormalizable { herm, anti })
    }
}

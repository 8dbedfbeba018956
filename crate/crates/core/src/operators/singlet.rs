//! Spin-adapted singlet excitation generators built from paired
//! excitation/de-excitation operators κ̂.
//!
//! Spatial orbital `p` owns spin orbitals `2p` (α) and `2p+1` (β). The
//! κ̂ conventions are
//! `κ̂_i^a = a_a† a_i − a_i† a_a` and
//! `κ̂_{pq}^{rs} = a_r† a_s† a_q a_p − a_p† a_q† a_s a_r`.

use num_complex::Complex64;

use super::fermion::{FermionOp, FermionSum};
use crate::matrix::ONE;
use crate::{Error, Result};

pub fn alpha(spatial: usize) -> usize {
    2 * spatial
}

pub fn beta(spatial: usize) -> usize {
    2 * spatial + 1
}

/// `n̂_p = a_p† a_p` on `n_modes` modes.
pub fn number_op(n_modes: usize, p: usize) -> FermionSum {
    FermionSum::from_terms(
        n_modes,
        [(ONE, vec![FermionOp::create(p), FermionOp::annihilate(p)])],
    )
    .unwrap()
}

/// `κ̂_i^a = a_a† a_i − a_i† a_a`.
pub fn kappa_single(n_modes: usize, i: usize, a: usize) -> FermionSum {
    FermionSum::from_terms(
        n_modes,
        [
            (ONE, vec![FermionOp::create(a), FermionOp::annihilate(i)]),
            (-ONE, vec![FermionOp::create(i), FermionOp::annihilate(a)]),
        ],
    )
    .unwrap()
}

/// `κ̂_{pq}^{rs} = a_r† a_s† a_q a_p − a_p† a_q† a_s a_r`.
pub fn kappa_double(n_modes: usize, p: usize, q: usize, r: usize, s: usize) -> FermionSum {
    FermionSum::from_terms(
        n_modes,
        [
            (
                ONE,
                vec![
                    FermionOp::create(r),
                    FermionOp::create(s),
                    FermionOp::annihilate(q),
                    FermionOp::annihilate(p),
                ],
            ),
            (
                -ONE,
                vec![
                    FermionOp::create(p),
                    FermionOp::create(q),
                    FermionOp::annihilate(s),
                    FermionOp::annihilate(r),
                ],
            ),
        ],
    )
    .unwrap()
}

/// The singlet tensor operator families, keyed by seniority.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletKind {
    /// `T_{ia} = κ̂_{iα}^{aα} + κ̂_{iβ}^{aβ}`
    Single { i: usize, a: usize },
    /// Ω=0: `T_{iiaa} = κ̂_{iαiβ}^{aαaβ}`
    DoubleSen0 { i: usize, a: usize },
    /// Ω=2: `T_{iiab} = κ̂_{iαiβ}^{aαbβ} + κ̂_{iαiβ}^{bαaβ}` (second pair
    /// ordered α-first so the combination commutes with Ŝ²)
    DoubleSen2Iiab { i: usize, a: usize, b: usize },
    /// Ω=2: `T_{ijaa} = κ̂_{iαjβ}^{aαaβ} + κ̂_{jαiβ}^{aαaβ}`
    DoubleSen2Ijaa { i: usize, j: usize, a: usize },
    /// Ω=4: `T_{ijab} = Σ_{s,s̄} κ̂_{i_s j_s̄}^{a_s̄ b_s}`
    DoubleSen4 { i: usize, j: usize, a: usize, b: usize },
}

impl SingletKind {
    pub fn spatial_indices(&self) -> Vec<usize> {
        match *self {
            SingletKind::Single { i, a } | SingletKind::DoubleSen0 { i, a } => vec![i, a],
            SingletKind::DoubleSen2Iiab { i, a, b } => vec![i, a, b],
            SingletKind::DoubleSen2Ijaa { i, j, a } => vec![i, j, a],
            SingletKind::DoubleSen4 { i, j, a, b } => vec![i, j, a, b],
        }
    }

    pub fn n_modes(&self) -> usize {
        2 * (self.spatial_indices().iter().max().unwrap() + 1)
    }

    fn check_distinct(&self) -> Result<()> {
        let mut idx = self.spatial_indices();
        idx.sort_unstable();
        idx.dedup();
        if idx.len() != self.spatial_indices().len() {
            return Err(Error::Invalid(
                "singlet operator requires distinct spatial orbitals".into(),
            ));
        }
        Ok(())
    }
}

/// Builds the anti-Hermitian singlet generator of the given kind.
pub fn build_singlet(kind: SingletKind) -> Result<FermionSum> {
    kind.check_distinct()?;
    let m = kind.n_modes();
    let sum = match kind {
        SingletKind::Single { i, a } => kappa_single(m, alpha(i), alpha(a))
            .add(&kappa_single(m, beta(i), beta(a)))?,
        SingletKind::DoubleSen0 { i, a } => {
            kappa_double(m, alpha(i), beta(i), alpha(a), beta(a))
        }
        SingletKind::DoubleSen2Iiab { i, a, b } => {
            kappa_double(m, alpha(i), beta(i), alpha(a), beta(b))
                .add(&kappa_double(m, alpha(i), beta(i), alpha(b), beta(a)))?
        }
        SingletKind::DoubleSen2Ijaa { i, j, a } => {
            kappa_double(m, alpha(i), beta(j), alpha(a), beta(a))
                .add(&kappa_double(m, alpha(j), beta(i), alpha(a), beta(a)))?
        }
        SingletKind::DoubleSen4 { i, j, a, b } => {
            let spin = [alpha, beta];
            let mut acc = FermionSum::zero(m);
            for s in 0..2 {
                for sb in 0..2 {
                    let (fs, fsb): (fn(usize) -> usize, fn(usize) -> usize) =
                        (spin[s], spin[sb]);
                    acc = acc.add(&kappa_double(m, fs(i), fsb(j), fsb(a), fs(b)))?;
                }
            }
            acc
        }
    };
    Ok(sum)
}

/// Total-spin projection `Ŝ_z = ½ Σ_p (n̂_{pα} − n̂_{pβ})`.
pub fn spin_z(n_spatial: usize) -> FermionSum {
    let m = 2 * n_spatial;
    let mut acc = FermionSum::zero(m);
    for p in 0..n_spatial {
        acc = acc
            .add(&number_op(m, alpha(p)).scaled(Complex64::new(0.5, 0.0)))
            .unwrap()
            .add(&number_op(m, beta(p)).scaled(Complex64::new(-0.5, 0.0)))
            .unwrap();
    }
    acc
}

/// `Ŝ² = Ŝ₋Ŝ₊ + Ŝ_z(Ŝ_z + 1)`.
pub fn spin_squared(n_spatial: usize) -> FermionSum {
    let m = 2 * n_spatial;
    let mut s_plus = FermionSum::zero(m);
    for p in 0..n_spatial {
        s_plus
            .push_term(
                ONE,
                vec![FermionOp::create(alpha(p)), FermionOp::annihilate(beta(p))],
            )
            .unwrap();
    }
    let s_minus = s_plus.adjoint();
    let sz = spin_z(n_spatial);
    let sz_plus_one = sz.add(&FermionSum::identity(m)).unwrap();
    s_minus.mul(&s_plus).unwrap().add(&sz.mul(&sz_plus_one).unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius;
    use crate::operators::jordan_wigner;

    fn commutes_with(op: &FermionSum, sym: &FermionSum) -> f64 {
        let a = op.to_dense().unwrap();
        let b = sym.to_dense().unwrap();
        frobenius(&(&a * &b - &b * &a))
    }

    #[test]
    fn singles_commute_with_spin_operators() {
        let t = build_singlet(SingletKind::Single { i: 0, a: 1 }).unwrap();
        assert!(commutes_with(&t, &spin_z(2)) < 1e-12);
        assert!(commutes_with(&t, &spin_squared(2)) < 1e-12);
    }

    #[test]
    fn all_kinds_commute_with_spin_operators() {
        let kinds = [
            SingletKind::DoubleSen0 { i: 0, a: 1 },
            SingletKind::DoubleSen2Iiab { i: 0, a: 1, b: 2 },
            SingletKind::DoubleSen2Ijaa { i: 0, j: 1, a: 2 },
        ];
        for kind in kinds {
            let n_spatial = kind.n_modes() / 2;
            let t = build_singlet(kind).unwrap();
            assert!(commutes_with(&t, &spin_z(n_spatial)) < 1e-12, "{kind:?} vs Sz");
            assert!(
                commutes_with(&t, &spin_squared(n_spatial)) < 1e-12,
                "{kind:?} vs S²"
            );
        }
    }

    #[test]
    fn sen4_commutes_with_spin_operators() {
        let kind = SingletKind::DoubleSen4 { i: 0, j: 1, a: 2, b: 3 };
        let t = build_singlet(kind).unwrap();
        assert!(commutes_with(&t, &spin_z(4)) < 1e-11);
        assert!(commutes_with(&t, &spin_squared(4)) < 1e-11);
    }

    #[test]
    fn repeated_indices_rejected() {
        assert!(build_singlet(SingletKind::Single { i: 1, a: 1 }).is_err());
        assert!(build_singlet(SingletKind::DoubleSen4 { i: 0, j: 0, a: 2, b: 3 }).is_err());
    }

    #[test]
    fn singles_equal_two_kappa_terms() {
        let t = build_singlet(SingletKind::Single { i: 0, a: 1 }).unwrap();
        let want = kappa_single(4, alpha(0), alpha(1))
            .add(&kappa_single(4, beta(0), beta(1)))
            .unwrap();
        assert_eq!(t, want);
    }

    #[test]
    fn jw_term_counts_match_fixture_table() {
        // Pauli-product counts for the five families: 4, 8, 16, 16, 32
        let cases: Vec<(SingletKind, usize)> = vec![
            (SingletKind::Single { i: 0, a: 1 }, 4),
            (SingletKind::DoubleSen0 { i: 0, a: 1 }, 8),
            (SingletKind::DoubleSen2Ijaa { i: 0, j: 1, a: 2 }, 16),
            (SingletKind::DoubleSen2Iiab { i: 0, a: 1, b: 2 }, 16),
        ];
        for (kind, want) in cases {
            let jw = jordan_wigner(&build_singlet(kind).unwrap()).unwrap();
            assert_eq!(jw.n_terms(), want, "{kind:?}");
        }
    }
}

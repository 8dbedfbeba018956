//! Named 2-qubit generators: transmon, match-gate and fSim families.

use num_complex::Complex64;

use super::pauli::{PauliString, PauliSum};
use crate::matrix::ONE;

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn two(p: impl Fn(usize, usize) -> PauliString, q: usize) -> PauliString {
    p(2, q)
}

/// `G = x̂₀ − b ẑ₀x̂₁ + c x̂₁` with spectrum `{±√(1+b²) ± c}`.
pub fn transmon(b: f64, c: f64) -> PauliSum {
    let x0 = two(PauliString::x, 0);
    let x1 = two(PauliString::x, 1);
    let z0x1 = PauliString::from_masks(2, 0b10, 0b01).unwrap();
    PauliSum::from_terms(2, [(x0, ONE), (z0x1, real(-b)), (x1, real(c))]).unwrap()
}

/// The six operators spanning the match-gate generator algebra:
/// `{x̂₀x̂₁, ŷ₀ŷ₁, x̂₀ŷ₁, ŷ₀x̂₁, ẑ₀, ẑ₁}`.
pub fn matchgate_basis() -> [PauliString; 6] {
    [
        PauliString::from_masks(2, 0b11, 0b00).unwrap(), // XX
        PauliString::from_masks(2, 0b11, 0b11).unwrap(), // YY
        PauliString::from_masks(2, 0b11, 0b10).unwrap(), // X0 Y1
        PauliString::from_masks(2, 0b11, 0b01).unwrap(), // Y0 X1
        PauliString::z(2, 0),
        PauliString::z(2, 1),
    ]
}

pub const MATCHGATE_BASIS: usize = 6;

/// Generator spanned by the match-gate algebra with the given coefficients
/// (order as in [`matchgate_basis`]).
pub fn matchgate(coeffs: [f64; 6]) -> PauliSum {
    let basis = matchgate_basis();
    PauliSum::from_terms(2, basis.into_iter().zip(coeffs).map(|(p, c)| (p, real(c)))).unwrap()
}

/// `G = (θ/2)(x̂₀x̂₁ + ŷ₀ŷ₁) + (φ/4)(1 − ẑ₀)(1 − ẑ₁)`.
pub fn fsim(theta: f64, phi: f64) -> PauliSum {
    let xx = PauliString::from_masks(2, 0b11, 0b00).unwrap();
    let yy = PauliString::from_masks(2, 0b11, 0b11).unwrap();
    let z0 = PauliString::z(2, 0);
    let z1 = PauliString::z(2, 1);
    let zz = PauliString::from_masks(2, 0b00, 0b11).unwrap();
    let ident = PauliString::identity(2);
    PauliSum::from_terms(
        2,
        [
            (xx, real(theta / 2.0)),
            (yy, real(theta / 2.0)),
            (ident, real(phi / 4.0)),
            (z0, real(-phi / 4.0)),
            (z1, real(-phi / 4.0)),
            (zz, real(phi / 4.0)),
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius;

    fn sorted_eigs(s: &PauliSum) -> Vec<f64> {
        let m = s.to_dense().unwrap();
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn transmon_zero_params_is_x0() {
        let g = transmon(0.0, 0.0);
        let ev = sorted_eigs(&g);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transmon_spectrum_formula() {
        let (b, c) = (1.3, -0.4);
        let g = transmon(b, c);
        let r = (1.0 + b * b).sqrt();
        let mut want = vec![r + c, r - c, -r + c, -r - c];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ev = sorted_eigs(&g);
        for (got, w) in ev.iter().zip(want) {
            assert!((got - w).abs() < 1e-10, "{ev:?}");
        }
    }

    #[test]
    fn fsim_expands_correctly() {
        // (φ/4)(1−z)(1−z) = (φ/4)(1 − z0 − z1 + z0z1): check densely
        let (theta, phi) = (0.8, -1.1);
        let g = fsim(theta, phi).to_dense().unwrap();
        let mut want = crate::matrix::CMat::zeros(4, 4);
        // XX+YY acts on the middle block {|01>, |10>}
        want[(1, 2)] = Complex64::new(theta, 0.0);
        want[(2, 1)] = Complex64::new(theta, 0.0);
        want[(3, 3)] = Complex64::new(phi, 0.0);
        assert!(frobenius(&(g - want)) < 1e-12);
    }

    #[test]
    fn matchgate_closure_under_commutators() {
        // the span is a subalgebra: commutators of basis elements stay inside
        use super::super::pauli::commutator;
        let basis = matchgate_basis();
        for a in &basis {
            for b in &basis {
                let sa = PauliSum::from_terms(2, [(*a, ONE)]).unwrap();
                let sb = PauliSum::from_terms(2, [(*b, ONE)]).unwrap();
                let comm = commutator(&sa, &sb).unwrap();
                for (p, _) in comm.terms() {
                    assert!(basis.contains(p), "commutator left the algebra: {p}");
                }
            }
        }
    }
}

//! Shared fixture constructors: the worked 4×4 diagonal example, the
//! 3-qubit two-reflection generator, and seeded random gradient contexts.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{hermitian_with_spectrum, random_hermitian, CMat, ONE};
use crate::operators::{dense_to_pauli, PauliSum};
use crate::simulate::{Circuit, Gate, Generator, GradientContext, Simulator};

pub use crate::operators::{fsim, matchgate, transmon};

/// `diag(3, −3, −1, 1)` — the worked decomposition example. Equals
/// `Z₀ + 2·Z₀Z₁` in the little-endian basis convention.
pub fn eqve_matrix() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for (i, v) in [3.0, -3.0, -1.0, 1.0].iter().enumerate() {
        m[(i, i)] = Complex64::new(*v, 0.0);
    }
    m
}

pub fn eqve_paulisum() -> PauliSum {
    dense_to_pauli(&eqve_matrix(), 2).expect("4x4 expansion")
}

/// The 3-qubit generator `U†z₁U + z₂` with `U = exp(A)`,
/// `A_{ii} = 0, A_{i,j<i} = 1, A_{i,j>i} = −1`, reading `z_k` as Pauli Z on
/// the k-th tensor factor (most significant bit first).
pub fn three_qubit_generator() -> CMat {
    let dim = 8;
    let mut a = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if j < i {
                a[(i, j)] = ONE;
            } else if j > i {
                a[(i, j)] = -ONE;
            }
        }
    }
    // U = exp(A): A is anti-hermitian, so iA is hermitian and
    // exp(A) = exp(−i(iA)) follows from its eigendecomposition.
    let ia = a.map(|v| v * Complex64::new(0.0, 1.0));
    let (values, basis) = crate::matrix::hermitian_eigen(&ia).expect("iA is hermitian");
    let mut d = CMat::zeros(dim, dim);
    for (k, value) in values.iter().enumerate() {
        d[(k, k)] = Complex64::from_polar(1.0, -value);
    }
    let u = &basis * d * basis.adjoint();

    // z on tensor factor 1 (MSB) and factor 2 (middle) of three qubits
    let mut z1 = CMat::zeros(dim, dim);
    let mut z2 = CMat::zeros(dim, dim);
    for b in 0..dim {
        let s1 = if b & 0b100 == 0 { 1.0 } else { -1.0 };
        let s2 = if b & 0b010 == 0 { 1.0 } else { -1.0 };
        z1[(b, b)] = Complex64::new(s1, 0.0);
        z2[(b, b)] = Complex64::new(s2, 0.0);
    }
    u.adjoint() * z1 * &u + z2
}

pub fn three_qubit_paulisum() -> PauliSum {
    dense_to_pauli(&three_qubit_generator(), 3).expect("8x8 expansion")
}

fn random_circuit(n_qubits: usize, depth: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let dim = 1usize << n_qubits;
    let mut c = Circuit::identity(n_qubits);
    for _ in 0..depth {
        let g = random_hermitian(dim, rng);
        c.push(Gate {
            generator: Generator::from_dense(g).expect("random hermitian"),
            amplitude: rng.gen::<f64>() - 0.5,
        })
        .expect("dims match");
    }
    c
}

/// Random context: Haar-ish `U₁`, `U₂` (one random-generator gate each), a
/// random Hermitian observable and either the supplied generator or a random
/// Hermitian one.
pub fn random_context(
    n_qubits: usize,
    seed: u64,
    generator: Option<Generator>,
) -> (Simulator, GradientContext) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n_qubits;
    let h = random_hermitian(dim, &mut rng);
    let u1 = random_circuit(n_qubits, 1, &mut rng);
    let u2 = random_circuit(n_qubits, 1, &mut rng);
    let g = generator
        .unwrap_or_else(|| Generator::from_dense(random_hermitian(dim, &mut rng)).unwrap());
    let tau = rng.gen::<f64>() * 2.0 - 1.0;
    let ctx = GradientContext::new(h, u1, u2, g, tau).expect("consistent dims");
    (Simulator::new(), ctx)
}

/// Random context whose generator has exactly the given distinct spectrum
/// (values are cycled to fill the dimension).
pub fn random_context_with_spectrum(
    n_qubits: usize,
    seed: u64,
    spectrum: &[f64],
) -> (Simulator, GradientContext) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let dim = 1usize << n_qubits;
    let values: Vec<f64> = (0..dim).map(|i| spectrum[i % spectrum.len()]).collect();
    let g = hermitian_with_spectrum(&values, &mut rng);
    random_context(n_qubits, seed, Some(Generator::from_dense(g).unwrap()))
}

/// Random 2-qubit context around a transmon-generator gate.
pub fn transmon_context(b: f64, c: f64, seed: u64) -> (Simulator, GradientContext) {
    let g = Generator::from_pauli(transmon(b, c)).unwrap();
    random_context(2, seed, Some(g))
}

/// Random 2-qubit context around an fSim-generator gate (amplitude τ).
pub fn fsim_context(theta: f64, phi: f64, seed: u64) -> (Simulator, GradientContext) {
    let g = Generator::from_pauli(fsim(theta, phi)).unwrap();
    random_context(2, seed, Some(g))
}

//! Dense statevector engine for circuits of generator exponentials and the
//! shifted-expectation forms the gradient rules are built from.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex64;

use crate::matrix::{matrix_hash, CMat, CVec, ONE};
use crate::operators::PauliSum;
use crate::spectral::eigendecompose;
use crate::{Error, Result};

/// A gate `exp(i · amplitude · generator)` with the generator kept both in
/// dense form and (when available) as a Pauli sum for LCU-style methods.
#[derive(Debug, Clone)]
pub struct Gate {
    pub generator: Generator,
    pub amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct Generator {
    dense: CMat,
    pauli: Option<PauliSum>,
    hash: u64,
}

impl Generator {
    pub fn from_dense(dense: CMat) -> Result<Self> {
        crate::matrix::check_hermitian(&dense)?;
        let hash = matrix_hash(&dense);
        Ok(Self { dense, pauli: None, hash })
    }

    pub fn from_pauli(pauli: PauliSum) -> Result<Self> {
        let dense = pauli.to_dense()?;
        crate::matrix::check_hermitian(&dense)?;
        let hash = matrix_hash(&dense);
        Ok(Self { dense, pauli: Some(pauli), hash })
    }

    pub fn dense(&self) -> &CMat {
        &self.dense
    }

    pub fn pauli(&self) -> Option<&PauliSum> {
        self.pauli.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.dense.nrows()
    }

    pub fn content_hash(&self) -> u64 {
        self.hash
    }
}

#[derive(Debug, Clone)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        for gate in &gates {
            if gate.generator.dim() != dim {
                return Err(Error::DimMismatch(gate.generator.dim(), dim));
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.generator.dim() != 1usize << self.n_qubits {
            return Err(Error::DimMismatch(gate.generator.dim(), 1usize << self.n_qubits));
        }
        self.gates.push(gate);
        Ok(())
    }
}

/// Everything needed to define `E(τ)` and its derivative with respect to
/// the amplitude of one generator: `E = ⟨0|U₁† e^{−iτG} U₂† H U₂ e^{iτG} U₁|0⟩`.
#[derive(Debug, Clone)]
pub struct GradientContext {
    pub h: CMat,
    pub u1: Circuit,
    pub u2: Circuit,
    pub g: Generator,
    pub tau: f64,
}

impl GradientContext {
    pub fn new(h: CMat, u1: Circuit, u2: Circuit, g: Generator, tau: f64) -> Result<Self> {
        crate::matrix::check_hermitian(&h)?;
        let dim = g.dim();
        if h.nrows() != dim {
            return Err(Error::DimMismatch(h.nrows(), dim));
        }
        if (1usize << u1.n_qubits()) != dim || (1usize << u2.n_qubits()) != dim {
            return Err(Error::DimMismatch(1usize << u1.n_qubits(), dim));
        }
        Ok(Self { h, u1, u2, g, tau })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }
}

struct EigenPair {
    values: Vec<f64>,
    basis: CMat,
}

/// Statevector simulator with a per-generator spectral cache, so repeated
/// exponentials of the same generator cost one diagonalization.
#[derive(Default)]
pub struct Simulator {
    eigen_cache: RefCell<HashMap<u64, Rc<EigenPair>>>,
}

impl Simulator {
    pub fn new() -> Self {
        Self { eigen_cache: RefCell::new(HashMap::new()) }
    }

    pub fn zero_state(&self, n_qubits: usize) -> CVec {
        let dim = 1usize << n_qubits;
        let mut v = CVec::zeros(dim);
        v[0] = ONE;
        v
    }

    fn eigen_of(&self, m: &CMat, hash: u64) -> Result<Rc<EigenPair>> {
        if let Some(hit) = self.eigen_cache.borrow().get(&hash) {
            return Ok(hit.clone());
        }
        let rep = eigendecompose(m)?;
        // full per-column eigenvalues, not clustered means
        let values: Vec<f64> = rep
            .projector_index
            .iter()
            .map(|&c| rep.distinct_eigenvalues[c])
            .collect();
        let pair = Rc::new(EigenPair { values, basis: rep.eigenbasis });
        self.eigen_cache.borrow_mut().insert(hash, pair.clone());
        Ok(pair)
    }

    /// `state ← exp(i·amplitude·G)·state` via the cached spectral form.
    pub fn apply_exponential(&self, state: &CVec, g: &CMat, amplitude: f64) -> Result<CVec> {
        if g.nrows() != state.len() {
            return Err(Error::DimMismatch(g.nrows(), state.len()));
        }
        let eig = self.eigen_of(g, matrix_hash(g))?;
        Ok(self.apply_cached(state, &eig, amplitude))
    }

    fn apply_cached(&self, state: &CVec, eig: &EigenPair, amplitude: f64) -> CVec {
        let mut coeffs = eig.basis.adjoint() * state;
        for (i, lambda) in eig.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, amplitude * lambda);
            coeffs[i] *= phase;
        }
        &eig.basis * coeffs
    }

    pub fn apply_generator_exponential(
        &self,
        state: &CVec,
        g: &Generator,
        amplitude: f64,
    ) -> Result<CVec> {
        if g.dim() != state.len() {
            return Err(Error::DimMismatch(g.dim(), state.len()));
        }
        let eig = self.eigen_of(g.dense(), g.content_hash())?;
        Ok(self.apply_cached(state, &eig, amplitude))
    }

    pub fn apply_circuit(&self, state: &CVec, circuit: &Circuit) -> Result<CVec> {
        let mut s = state.clone();
        for gate in circuit.gates() {
            s = self.apply_generator_exponential(&s, &gate.generator, gate.amplitude)?;
        }
        Ok(s)
    }

    /// `⟨ψ|H|ψ⟩` for Hermitian `H`; the imaginary residue is asserted small.
    pub fn expectation(&self, state: &CVec, observable: &CMat) -> Result<f64> {
        if observable.nrows() != state.len() {
            return Err(Error::DimMismatch(observable.nrows(), state.len()));
        }
        let val = state.dotc(&(observable * state));
        let scale = val.norm().max(1.0);
        if val.im.abs() > 1e-10 * scale {
            return Err(Error::NotHermitian(val.im.abs()));
        }
        Ok(val.re)
    }

    /// State right before the differentiated gate: `U₁|0̄⟩`.
    pub fn prepared_state(&self, ctx: &GradientContext) -> Result<CVec> {
        let n = ctx.u1.n_qubits();
        self.apply_circuit(&self.zero_state(n), &ctx.u1)
    }

    fn finish(&self, ctx: &GradientContext, state_after_gate: CVec) -> Result<f64> {
        let s = self.apply_circuit(&state_after_gate, &ctx.u2)?;
        self.expectation(&s, &ctx.h)
    }

    /// Plain cost function `E(τ)`.
    pub fn energy(&self, ctx: &GradientContext) -> Result<f64> {
        self.energy_with_amplitude(ctx, ctx.tau)
    }

    pub fn energy_with_amplitude(&self, ctx: &GradientContext, amplitude: f64) -> Result<f64> {
        let s = self.prepared_state(ctx)?;
        let s = self.apply_generator_exponential(&s, &ctx.g, amplitude)?;
        self.finish(ctx, s)
    }

    /// Shifted expectation with one of three shift forms (see [`ShiftForm`]).
    pub fn shifted_expectation(
        &self,
        ctx: &GradientContext,
        theta: f64,
        shift: Option<&ShiftForm>,
    ) -> Result<f64> {
        match shift {
            None => self.energy_with_amplitude(ctx, ctx.tau + theta),
            Some(ShiftForm::Inserted { op }) => {
                let s = self.prepared_state(ctx)?;
                let s = self.apply_exponential(&s, op, theta)?;
                let s = self.apply_generator_exponential(&s, &ctx.g, ctx.tau)?;
                self.finish(ctx, s)
            }
            Some(ShiftForm::Joint { op, frame }) => {
                if let Some(frame) = frame {
                    self.joint_in_frame(ctx, theta, frame)
                } else {
                    // dense fallback: exponentiate τG + θO directly
                    let joint = ctx.g.dense() * Complex64::new(ctx.tau, 0.0)
                        + op * Complex64::new(theta, 0.0);
                    let s = self.prepared_state(ctx)?;
                    let s = self.apply_exponential(&s, &joint, 1.0)?;
                    self.finish(ctx, s)
                }
            }
        }
    }

    /// Commuting-frame product form: when `G = V†(Σ_m c_m Z_m)V` and the
    /// shift operator is `R_n = V†Z_nV`, then
    /// `exp(i(τG + θR_n)) = V† Π_m exp(i(c_mτ + δ_{mn}θ)Z_m) V`,
    /// a diagonal phase profile between two fixed basis changes.
    fn joint_in_frame(&self, ctx: &GradientContext, theta: f64, frame: &FrameShift) -> Result<f64> {
        let dim = ctx.dim();
        if frame.v.nrows() != dim {
            return Err(Error::DimMismatch(frame.v.nrows(), dim));
        }
        let s = self.prepared_state(ctx)?;
        let mut rotated = &frame.v * s;
        for (b, amp) in rotated.iter_mut().enumerate() {
            let mut angle = 0.0;
            for (m, &(mask, c)) in frame.entries.iter().enumerate() {
                let sign = if (mask & b as u64).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let mut coeff = c * ctx.tau;
                if m == frame.shifted_term {
                    coeff += theta;
                }
                angle += coeff * sign;
            }
            *amp *= Complex64::from_polar(1.0, angle);
        }
        let s = frame.v.adjoint() * rotated;
        self.finish(ctx, s)
    }

    /// Unnormalized LCU quadratic form
    /// `⟨φ|U₂†HU₂|φ⟩` with `|φ⟩ = (1 ± W) e^{iτG} U₁|0̄⟩` for unitary `W`.
    pub fn lcu_expectation(
        &self,
        ctx: &GradientContext,
        w: &CMat,
        plus: bool,
    ) -> Result<f64> {
        let dim = ctx.dim();
        if w.nrows() != dim {
            return Err(Error::DimMismatch(w.nrows(), dim));
        }
        let uni = (w.adjoint() * w - CMat::identity(dim, dim)).norm();
        if uni > 1e-10 * (dim as f64).sqrt() {
            return Err(Error::Invalid(format!("LCU operator is not unitary ({uni:.3e})")));
        }
        let s = self.prepared_state(ctx)?;
        let s = self.apply_generator_exponential(&s, &ctx.g, ctx.tau)?;
        let ws = w * &s;
        let phi = if plus { &s + ws } else { &s - ws };
        let s = self.apply_circuit(&phi, &ctx.u2)?;
        let val = s.dotc(&(&ctx.h * &s));
        Ok(val.re)
    }
}

/// How a shift operator enters the circuit.
#[derive(Debug, Clone)]
pub enum ShiftForm {
    /// `exp(iθO)` inserted after `U₁`, before the main gate (the main gate
    /// amplitude stays at τ). Valid for commuting and non-commuting O.
    Inserted { op: CMat },
    /// Joint exponential `exp(i(τG + θO))`, meaningful when `[O, G] = 0`;
    /// uses the shared-CSA-frame product form when a frame is attached.
    Joint { op: CMat, frame: Option<FrameShift> },
}

impl ShiftForm {
    pub fn op(&self) -> &CMat {
        match self {
            ShiftForm::Inserted { op } => op,
            ShiftForm::Joint { op, .. } => op,
        }
    }
}

/// CSA frame data for the in-frame joint exponential.
#[derive(Debug, Clone)]
pub struct FrameShift {
    /// Basis change with `G = V†(Σ c_m Z_m)V`.
    pub v: CMat,
    /// `(z-mask, coefficient)` pairs.
    pub entries: Vec<(u64, f64)>,
    /// Index into `entries` receiving the extra shift θ.
    pub shifted_term: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{frobenius, random_hermitian, random_unitary};
    use crate::operators::{PauliString, PauliSum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_gen(n: usize, terms: Vec<(PauliString, Complex64)>) -> Generator {
        Generator::from_pauli(PauliSum::from_terms(n, terms).unwrap()).unwrap()
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let sim = Simulator::new();
        let g = pauli_gen(1, vec![(PauliString::x(1, 0), ONE)]);
        let s = sim.zero_state(1);
        let out = sim.apply_generator_exponential(&s, &g, 0.0).unwrap();
        assert!((out - s).norm() < 1e-14);
    }

    #[test]
    fn z_rotation_by_pi_is_global_minus_one() {
        let sim = Simulator::new();
        let g = pauli_gen(1, vec![(PauliString::z(1, 0), ONE)]);
        let mut s = sim.zero_state(1);
        s[1] = Complex64::new(0.6, 0.3);
        let s = &s / Complex64::new(s.norm(), 0.0);
        let out = sim.apply_generator_exponential(&s, &g, std::f64::consts::PI).unwrap();
        assert!((out + s).norm() < 1e-12);
    }

    #[test]
    fn basic_expectations() {
        let sim = Simulator::new();
        let z = PauliSum::from_terms(1, [(PauliString::z(1, 0), ONE)])
            .unwrap()
            .to_dense()
            .unwrap();
        let x = PauliSum::from_terms(1, [(PauliString::x(1, 0), ONE)])
            .unwrap()
            .to_dense()
            .unwrap();
        let s = sim.zero_state(1);
        assert!((sim.expectation(&s, &z).unwrap() - 1.0).abs() < 1e-14);
        assert!(sim.expectation(&s, &x).unwrap().abs() < 1e-14);
    }

    #[test]
    fn expectation_matches_dense_oracle_on_random_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sim = Simulator::new();
        let h = random_hermitian(8, &mut rng);
        let u = random_unitary(8, &mut rng);
        let s = u.column(0).into_owned();
        let direct = s.dotc(&(&h * &s)).re;
        assert!((sim.expectation(&s, &h).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn norm_preserved_through_circuit() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let sim = Simulator::new();
        let mut circuit = Circuit::identity(2);
        for k in 0..4 {
            let g = random_hermitian(4, &mut rng);
            circuit
                .push(Gate {
                    generator: Generator::from_dense(g).unwrap(),
                    amplitude: 0.3 * (k as f64 + 1.0),
                })
                .unwrap();
        }
        let out = sim.apply_circuit(&sim.zero_state(2), &circuit).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn energy_matches_matrix_conjugation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let sim = Simulator::new();
        let h = random_hermitian(4, &mut rng);
        let g_mat = random_hermitian(4, &mut rng);
        let u1g = random_hermitian(4, &mut rng);
        let u2g = random_hermitian(4, &mut rng);
        let tau = 0.7;
        let u1 = Circuit::new(
            2,
            vec![Gate { generator: Generator::from_dense(u1g.clone()).unwrap(), amplitude: 0.4 }],
        )
        .unwrap();
        let u2 = Circuit::new(
            2,
            vec![Gate { generator: Generator::from_dense(u2g.clone()).unwrap(), amplitude: -0.9 }],
        )
        .unwrap();
        let ctx = GradientContext::new(
            h.clone(),
            u1,
            u2,
            Generator::from_dense(g_mat.clone()).unwrap(),
            tau,
        )
        .unwrap();
        let e = sim.energy(&ctx).unwrap();

        // oracle: explicit matrix exponentials from eigendecompositions
        let expm = |m: &CMat, t: f64| -> CMat {
            let (values, basis) = crate::matrix::hermitian_eigen(m).unwrap();
            let mut d = CMat::zeros(m.nrows(), m.nrows());
            for (i, value) in values.iter().enumerate() {
                d[(i, i)] = Complex64::from_polar(1.0, t * value);
            }
            &basis * d * basis.adjoint()
        };
        let full = expm(&u2g, -0.9) * expm(&g_mat, tau) * expm(&u1g, 0.4);
        let mut zero = CVec::zeros(4);
        zero[0] = ONE;
        let s = full * zero;
        let want = s.dotc(&(&h * &s)).re;
        assert!((e - want).abs() < 1e-11, "{e} vs {want}");
    }

    #[test]
    fn joint_frame_matches_dense_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let sim = Simulator::new();
        // G = V†(c₀ Z_{mask0} + c₁ Z_{mask1})V
        let v = random_unitary(4, &mut rng);
        let entries = vec![(0b01u64, 0.8), (0b11u64, -0.5)];
        let mut diag = CMat::zeros(4, 4);
        for b in 0..4u64 {
            let mut val = 0.0;
            for &(mask, c) in &entries {
                val += c * if (mask & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            }
            diag[(b as usize, b as usize)] = Complex64::new(val, 0.0);
        }
        let g = v.adjoint() * &diag * &v;
        let r0 = {
            let mut z = CMat::zeros(4, 4);
            for b in 0..4u64 {
                let sign = if (0b01 & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                z[(b as usize, b as usize)] = Complex64::new(sign, 0.0);
            }
            v.adjoint() * z * &v
        };
        let h = random_hermitian(4, &mut rng);
        let ctx = GradientContext::new(
            h,
            Circuit::identity(2),
            Circuit::identity(2),
            Generator::from_dense(g).unwrap(),
            0.63,
        )
        .unwrap();
        let theta = 0.41;
        let framed = sim
            .shifted_expectation(
                &ctx,
                theta,
                Some(&ShiftForm::Joint {
                    op: r0.clone(),
                    frame: Some(FrameShift {
                        v: v.clone(),
                        entries: entries.clone(),
                        shifted_term: 0,
                    }),
                }),
            )
            .unwrap();
        let dense = sim
            .shifted_expectation(&ctx, theta, Some(&ShiftForm::Joint { op: r0, frame: None }))
            .unwrap();
        assert!((framed - dense).abs() < 1e-10, "{framed} vs {dense}");
    }

    #[test]
    fn lcu_identity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let sim = Simulator::new();
        let h = random_hermitian(4, &mut rng);
        let g = random_hermitian(4, &mut rng);
        let ctx = GradientContext::new(
            h,
            Circuit::identity(2),
            Circuit::identity(2),
            Generator::from_dense(g).unwrap(),
            0.3,
        )
        .unwrap();
        let ident = CMat::identity(4, 4);
        let e = sim.energy(&ctx).unwrap();
        let plus = sim.lcu_expectation(&ctx, &ident, true).unwrap();
        let minus = sim.lcu_expectation(&ctx, &ident, false).unwrap();
        assert!((plus - 4.0 * e).abs() < 1e-11);
        assert!(minus.abs() < 1e-13);
    }

    #[test]
    fn frobenius_sanity() {
        let m = CMat::identity(3, 3);
        assert!((frobenius(&m) - 3f64.sqrt()).abs() < 1e-14);
    }
}

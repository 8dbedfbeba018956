//! Polynomial-expansion machinery: finite expansion of `exp(iθG)` over the
//! generator's distinct eigenvalues and synthesis of shift rules as real
//! linear combinations of shifted expectation values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::matrix::CMat;
use crate::simulate::ShiftForm;
use crate::spectral::{SpectrumClass, SpectrumReport};
use crate::{Error, Result};

/// Residual below which a synthesized linear system counts as consistent.
pub const SYNTHESIS_TOL: f64 = 1e-10;

/// Eigenvalue-spread ratio beyond which Vandermonde systems are rejected.
pub const CONDITION_GUARD: f64 = 1e6;

/// Finite polynomial expansion `exp(iθG) = Σ_{k<L} a_k(θ)(iG)^k` for a
/// generator with `L` distinct eigenvalues.
#[derive(Debug, Clone)]
pub struct PolynomialExpansion {
    spectrum: Vec<f64>,
    w_inv: DMatrix<f64>,
}

impl PolynomialExpansion {
    pub fn new(spectrum: &[f64]) -> Result<Self> {
        let mut vals = spectrum.to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if vals.len() < 2 {
            return Err(Error::Invalid("need at least two distinct eigenvalues".into()));
        }
        let mut min_gap = f64::INFINITY;
        let mut max_gap: f64 = 0.0;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                let gap = (vals[j] - vals[i]).abs();
                min_gap = min_gap.min(gap);
                max_gap = max_gap.max(gap);
            }
        }
        if min_gap == 0.0 || max_gap / min_gap > CONDITION_GUARD {
            return Err(Error::Synthesis(format!(
                "eigenvalue spread ratio {:.3e} exceeds conditioning guard",
                max_gap / min_gap
            )));
        }
        let l = vals.len();
        let w = DMatrix::from_fn(l, l, |n, k| vals[n].powi(k as i32));
        let w_inv = w
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("Vandermonde matrix is singular".into()))?;
        Ok(Self { spectrum: vals, w_inv })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `a_k(θ) = i^{−k} Σ_n W⁻¹_{kn} e^{iθλ_n}`.
    pub fn coefficients(&self, theta: f64) -> Vec<Complex64> {
        let l = self.len();
        let phases: Vec<Complex64> = self
            .spectrum
            .iter()
            .map(|lam| Complex64::from_polar(1.0, theta * lam))
            .collect();
        (0..l)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, phase) in phases.iter().enumerate() {
                    acc += self.w_inv[(k, n)] * phase;
                }
                acc * inv_i_pow(k)
            })
            .collect()
    }
}

fn inv_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

pub fn vandermonde_coefficients(spectrum: &[f64], theta: f64) -> Result<Vec<Complex64>> {
    Ok(PolynomialExpansion::new(spectrum)?.coefficients(theta))
}

/// How the synthesized rule is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleMode {
    /// Shifts of the amplitude of the differentiated generator itself.
    SameGenerator,
    /// Shift exponentials of decomposition operators.
    Decomposed,
}

#[derive(Debug, Clone)]
pub struct RuleTerm {
    pub theta: f64,
    pub weight: f64,
    /// `None` for same-generator shifts.
    pub shift: Option<ShiftForm>,
}

#[derive(Debug, Clone)]
pub struct ShiftRule {
    pub mode: RuleMode,
    pub terms: Vec<RuleTerm>,
    /// Residual of the synthesis linear system (0 for tabulated forms).
    pub residual: f64,
}

impl ShiftRule {
    pub fn same_generator(terms: Vec<(f64, f64)>, residual: f64) -> Self {
        Self {
            mode: RuleMode::SameGenerator,
            terms: terms
                .into_iter()
                .map(|(theta, weight)| RuleTerm { theta, weight, shift: None })
                .collect(),
            residual,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Strategy {
    /// Closed form for the special classes, grid otherwise.
    Auto,
    ClosedForm,
    Grid,
    Random { seed: u64 },
}

/// The flattened linear system `Σ_n A_{kk'}(θ_n) C_n = B_{kk'}` whose
/// solutions are valid shift-rule weights.
///
/// `A_{kk'}(θ)` is the coefficient of `⟨G^{k'} H̃ G^k⟩` in
/// `e^{−iθG} H̃ e^{iθG}` under the polynomial expansion, and the target
/// selects `i⟨[H̃, G]⟩`.
#[derive(Debug, Clone)]
pub struct SynthesisSystem {
    expansion: PolynomialExpansion,
}

impl SynthesisSystem {
    pub fn new(spectrum: &[f64]) -> Result<Self> {
        Ok(Self { expansion: PolynomialExpansion::new(spectrum)? })
    }

    /// One complex column of the system for a given shift.
    pub fn column(&self, theta: f64) -> Vec<Complex64> {
        let l = self.expansion.len();
        let a = self.expansion.coefficients(theta);
        let mut col = Vec::with_capacity(l * l);
        for kp in 0..l {
            for k in 0..l {
                let mut v = a[k] * a[kp].conj();
                v *= i_pow(k + kp);
                if kp % 2 == 1 {
                    v = -v;
                }
                col.push(v);
            }
        }
        col
    }

    /// Right-hand side: `B(k'=0,k=1) = i`, `B(k'=1,k=0) = −i`, zero elsewhere.
    pub fn target(&self) -> Vec<Complex64> {
        let l = self.expansion.len();
        let mut b = vec![Complex64::new(0.0, 0.0); l * l];
        b[1] = Complex64::new(0.0, 1.0); // (k'=0, k=1)
        b[l] = Complex64::new(0.0, -1.0); // (k'=1, k=0)
        b
    }

    /// Minimum-norm real least-squares solve for the given shifts.
    /// Returns `(weights, residual)`.
    pub fn solve(&self, thetas: &[f64]) -> (Vec<f64>, f64) {
        let l2 = self.expansion.len() * self.expansion.len();
        let n = thetas.len();
        let mut areal = DMatrix::zeros(2 * l2, n);
        for (j, theta) in thetas.iter().enumerate() {
            for (i, v) in self.column(*theta).iter().enumerate() {
                areal[(i, j)] = v.re;
                areal[(l2 + i, j)] = v.im;
            }
        }
        let mut b = DVector::zeros(2 * l2);
        for (i, v) in self.target().iter().enumerate() {
            b[i] = v.re;
            b[l2 + i] = v.im;
        }
        let svd = areal.clone().svd(true, true);
        match svd.solve(&b, 1e-13) {
            Ok(c) => {
                let res = (&areal * &c - &b).norm();
                (c.iter().copied().collect(), res)
            }
            Err(_) => (vec![0.0; n], f64::INFINITY),
        }
    }

    /// Residual of an explicit rule against the system.
    pub fn residual_of(&self, terms: &[(f64, f64)]) -> f64 {
        let l2 = self.expansion.len() * self.expansion.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); l2];
        for (theta, weight) in terms {
            for (i, v) in self.column(*theta).iter().enumerate() {
                acc[i] += v * *weight;
            }
        }
        let mut res = 0.0;
        for (a, b) in acc.iter().zip(self.target()) {
            res += (a - b).norm_sqr();
        }
        res.sqrt()
    }
}

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Closed-form weights for the symmetric three-eigenvalue rule.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormL3 {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// `α`, `β` of the four-expectation rule for spectrum `{0, ±1}`:
/// gradient `= β(αΔ₁ − Δ₂)` with `Δ_k = E(τ+kθ) − E(τ−kθ)`.
pub fn closed_form_l3(theta: f64) -> Result<ClosedFormL3> {
    let (s, s2) = (theta.sin(), (2.0 * theta).sin());
    let (c, c2) = (theta.cos(), (2.0 * theta).cos());
    let guards = [s2.abs(), s.abs(), (1.0 - c).abs(), (c - c2).abs()];
    if guards.iter().any(|g| *g < 1e-8) {
        return Err(Error::Synthesis(format!(
            "θ = {theta} lies in the singular set of the L=3 closed form"
        )));
    }
    let alpha = s2 * (c2 - 1.0) / (s * (c - 1.0));
    let beta = (c - 1.0) / (2.0 * s2 * (c2 - c));
    Ok(ClosedFormL3 { theta, alpha, beta })
}

impl ClosedFormL3 {
    /// Same-generator terms for a `{0, ±λ}` spectrum.
    pub fn terms_for_scale(&self, lambda: f64) -> Vec<(f64, f64)> {
        let t = self.theta / lambda;
        let (a, b) = (self.alpha, self.beta);
        vec![
            (t, lambda * a * b),
            (-t, -lambda * a * b),
            (2.0 * t, -lambda * b),
            (-2.0 * t, lambda * b),
        ]
    }
}

/// Splits a two-eigenvalue generator into a traceless part plus an identity
/// offset; the offset only contributes a global phase to the gate.
pub fn trace_shift_normalize(g: &CMat, report: &SpectrumReport) -> Result<(CMat, f64)> {
    if report.n_distinct() != 2 {
        return Err(Error::Invalid(format!(
            "trace shift requires exactly two distinct eigenvalues, got {}",
            report.n_distinct()
        )));
    }
    let offset = (report.distinct_eigenvalues[0] + report.distinct_eigenvalues[1]) / 2.0;
    let mut shifted = g.clone();
    for i in 0..g.nrows() {
        shifted[(i, i)] -= Complex64::new(offset, 0.0);
    }
    Ok((shifted, offset))
}

/// Synthesizes a same-generator shift rule for the given distinct spectrum.
pub fn synthesize_shift_rule(
    spectrum: &[f64],
    strategy: Strategy,
    max_shifts: usize,
) -> Result<ShiftRule> {
    let mut vals = spectrum.to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let l = vals.len();
    if l < 2 {
        return Err(Error::Invalid("rule synthesis needs at least 2 distinct eigenvalues".into()));
    }
    let cap = max_shifts.min(l * l).max(2);

    match strategy {
        Strategy::Auto => match closed_form_for(&vals) {
            Some(rule) => Ok(rule?),
            None => grid_synthesis(&vals, cap),
        },
        Strategy::ClosedForm => closed_form_for(&vals).unwrap_or_else(|| {
            Err(Error::Synthesis(
                "no closed form for this spectrum class; use the grid strategy".into(),
            ))
        }),
        Strategy::Grid => grid_synthesis(&vals, cap),
        Strategy::Random { seed } => random_synthesis(&vals, cap, seed),
    }
}

fn spectrum_class_of_values(vals: &[f64]) -> SpectrumClass {
    let scale = vals.iter().map(|v| v.abs()).fold(1.0_f64, f64::max);
    let tol = 1e-9 * scale;
    match vals.len() {
        2 if (vals[0] + vals[1]).abs() < tol => SpectrumClass::TwoSymmetric(vals[1]),
        2 => SpectrumClass::TwoGeneral,
        3 if vals[1].abs() < tol && (vals[0] + vals[2]).abs() < tol => {
            SpectrumClass::ThreeSymmetric(vals[2])
        }
        l => SpectrumClass::General(l),
    }
}

fn closed_form_for(vals: &[f64]) -> Option<Result<ShiftRule>> {
    match spectrum_class_of_values(vals) {
        SpectrumClass::TwoSymmetric(lambda) => Some(two_point_rule(vals, lambda)),
        SpectrumClass::TwoGeneral => {
            let lambda = (vals[1] - vals[0]) / 2.0;
            Some(two_point_rule(vals, lambda))
        }
        SpectrumClass::ThreeSymmetric(lambda) => Some((|| {
            let cf = closed_form_l3(std::f64::consts::FRAC_PI_4)?;
            let terms = cf.terms_for_scale(lambda);
            let system = SynthesisSystem::new(vals)?;
            let residual = system.residual_of(&terms);
            Ok(ShiftRule::same_generator(terms, residual))
        })()),
        SpectrumClass::General(_) => None,
    }
}

/// The two-expectation rule `λ(E(τ+s) − E(τ−s))` with `s = π/(4λ)`, valid
/// for spectra `{±λ}` (possibly after a trace shift).
fn two_point_rule(vals: &[f64], lambda: f64) -> Result<ShiftRule> {
    if lambda.abs() < 1e-12 {
        return Err(Error::Synthesis("degenerate two-point spectrum".into()));
    }
    let s = std::f64::consts::FRAC_PI_4 / lambda;
    let terms = vec![(s, lambda), (-s, -lambda)];
    let system = SynthesisSystem::new(vals)?;
    let residual = system.residual_of(&terms);
    Ok(ShiftRule::same_generator(terms, residual))
}

fn prune_and_finish(
    system: &SynthesisSystem,
    thetas: &[f64],
    weights: &[f64],
    residual: f64,
) -> ShiftRule {
    let max_w = weights.iter().map(|w| w.abs()).fold(0.0, f64::max);
    let keep: Vec<(f64, f64)> = thetas
        .iter()
        .zip(weights)
        .filter(|(_, w)| w.abs() > 1e-12 * max_w.max(1.0))
        .map(|(t, w)| (*t, *w))
        .collect();
    if keep.len() < thetas.len() {
        let res = system.residual_of(&keep);
        if res < SYNTHESIS_TOL {
            return ShiftRule::same_generator(keep, res);
        }
    }
    ShiftRule::same_generator(thetas.iter().copied().zip(weights.iter().copied()).collect(), residual)
}

/// Deterministic grid: symmetric pairs `θ_m = ±m·π/(2Λ(L−1))`, `m = 1…M`,
/// grown until the flattened system becomes consistent.
fn grid_synthesis(vals: &[f64], max_shifts: usize) -> Result<ShiftRule> {
    let system = SynthesisSystem::new(vals)?;
    let l = vals.len();
    let lam_max = vals.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let base = std::f64::consts::FRAC_PI_2 / (lam_max * (l.max(2) - 1) as f64);
    let mut best_res = f64::INFINITY;
    let mut thetas = Vec::new();
    for m in 1..=max_shifts.div_euclid(2) {
        thetas.push(m as f64 * base);
        thetas.push(-(m as f64) * base);
        let (weights, res) = system.solve(&thetas);
        best_res = best_res.min(res);
        if res < SYNTHESIS_TOL {
            return Ok(prune_and_finish(&system, &thetas, &weights, res));
        }
    }
    Err(Error::Synthesis(format!(
        "no consistent rule within {max_shifts} grid shifts (best residual {best_res:.3e})"
    )))
}

fn random_synthesis(vals: &[f64], max_shifts: usize, seed: u64) -> Result<ShiftRule> {
    use rand::{Rng, SeedableRng};
    let system = SynthesisSystem::new(vals)?;
    let lam_max = vals.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best_res = f64::INFINITY;
    for n in vals.len()..=max_shifts {
        let thetas: Vec<f64> = (0..n)
            .map(|_| {
                let mag = rng.gen_range(0.05..1.0) * std::f64::consts::PI / lam_max;
                if rng.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let (weights, res) = system.solve(&thetas);
        best_res = best_res.min(res);
        if res < SYNTHESIS_TOL {
            return Ok(prune_and_finish(&system, &thetas, &weights, res));
        }
    }
    Err(Error::Synthesis(format!(
        "random synthesis failed within {max_shifts} shifts (best residual {best_res:.3e})"
    )))
}

//! Generator decompositions `G = Σ dₙÔₙ` into few-eigenvalue pieces:
//! eigen-subspace projector pairing, commutative CSA (one conjugating
//! unitary, Z-string coefficients found by Walsh-transform sparsification),
//! non-commutative CSA (per-term reflections fit by alternating
//! optimization), and the tabulated singlet splits.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::matrix::{frobenius, random_unitary, CMat};
use crate::operators::{build_singlet, hermitize, jordan_wigner, FermionSum, SingletKind};
use crate::spectral::{eigendecompose, subspace_projector, SpectrumReport, CLUSTER_TOL};
use crate::{Error, Result};

/// Spectrum label of a decomposition operator, verified spectrally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumTag {
    /// `{±λ}`
    Pm(f64),
    /// `{0, ±λ}`
    ZeroPm(f64),
    /// `{0, λ}`
    ZeroLambda(f64),
}

impl SpectrumTag {
    pub fn scale(&self) -> f64 {
        match *self {
            SpectrumTag::Pm(l) | SpectrumTag::ZeroPm(l) | SpectrumTag::ZeroLambda(l) => l,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SpectrumTag::Pm(_) => "pm",
            SpectrumTag::ZeroPm(_) => "0pm",
            SpectrumTag::ZeroLambda(_) => "0l",
        }
    }

    /// Expectation values needed for one gradient contribution of this tag.
    pub fn shift_count(&self) -> usize {
        match self {
            SpectrumTag::Pm(_) | SpectrumTag::ZeroLambda(_) => 2,
            SpectrumTag::ZeroPm(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    Projector,
    CsaCommutative,
    CsaNonCommutative,
    /// Paper-tabulated splits (singlet operators, fSim parameter split).
    ClosedForm,
}

impl DecompositionKind {
    pub fn label(&self) -> &'static str {
        match self {
            DecompositionKind::Projector => "projector",
            DecompositionKind::CsaCommutative => "csa_commutative",
            DecompositionKind::CsaNonCommutative => "csa_noncommutative",
            DecompositionKind::ClosedForm => "closed_form",
        }
    }

    /// Whether all terms commute with the generator and each other.
    pub fn is_commuting(&self) -> bool {
        !matches!(self, DecompositionKind::CsaNonCommutative)
    }
}

/// One term `d·Ô` of a decomposition.
#[derive(Debug, Clone)]
pub struct Term {
    pub coefficient: f64,
    pub op: CMat,
    pub tag: SpectrumTag,
    /// Z-string bit-mask for CSA terms.
    pub mask: Option<u64>,
}

/// Shared conjugation frame of a commutative CSA decomposition:
/// `G = offset·1 + V†(Σ c_m Z_m)V`.
#[derive(Debug, Clone)]
pub struct CsaFrame {
    pub v: CMat,
    /// `(z-mask, coefficient)`, sorted by mask.
    pub entries: Vec<(u64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    pub terms: Vec<Term>,
    /// Identity component split off the generator.
    pub offset: f64,
    pub frame: Option<CsaFrame>,
    /// `‖G − offset·1 − Σ dₙÔₙ‖_F`
    pub residual: f64,
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn reconstruct(&self, dim: usize) -> CMat {
        let mut acc = CMat::identity(dim, dim).map(|v| v * Complex64::new(self.offset, 0.0));
        for t in &self.terms {
            acc += t.op.clone().map(|v| v * Complex64::new(t.coefficient, 0.0));
        }
        acc
    }

    /// Expectation values one gradient evaluation of this decomposition needs.
    pub fn expectation_count(&self) -> usize {
        self.terms.iter().map(|t| t.tag.shift_count()).sum()
    }

    pub fn converged(&self, g_norm: f64) -> bool {
        let bound = match self.kind {
            DecompositionKind::CsaNonCommutative => 1e-6,
            _ => 1e-10,
        };
        self.residual < bound * g_norm.max(1.0)
    }
}

fn residual_of(g: &CMat, d: &Decomposition) -> f64 {
    frobenius(&(g - d.reconstruct(g.nrows())))
}

/// Reads the spectrum tag of an operator off its eigenvalues.
pub fn tag_of(op: &CMat) -> Result<SpectrumTag> {
    let rep = eigendecompose(op)?;
    let vals = &rep.distinct_eigenvalues;
    let scale = rep.spectral_radius().max(1.0);
    let tol = CLUSTER_TOL * scale;
    match vals.len() {
        2 => {
            if (vals[0] + vals[1]).abs() < tol {
                Ok(SpectrumTag::Pm(vals[1]))
            } else if vals[0].abs() < tol {
                Ok(SpectrumTag::ZeroLambda(vals[1]))
            } else if vals[1].abs() < tol {
                Ok(SpectrumTag::ZeroLambda(vals[0]))
            } else {
                Err(Error::Invalid(format!(
                    "two-eigenvalue operator {vals:?} fits no supported tag"
                )))
            }
        }
        3 if vals[1].abs() < tol && (vals[0] + vals[2]).abs() < tol => {
            Ok(SpectrumTag::ZeroPm(vals[2]))
        }
        _ => Err(Error::Invalid(format!(
            "operator spectrum {vals:?} has no {{±λ}}/{{0,±λ}}/{{0,λ}} form"
        ))),
    }
}

/// Eigen-subspace decomposition with ±λ pairs grouped into reflections:
/// paired eigenvalues give `λ(P₊ − P₋)`, unpaired nonzero ones `λ·P`.
pub fn projector_decomposition(report: &SpectrumReport) -> Result<Decomposition> {
    let dim = report.dim();
    let vals = &report.distinct_eigenvalues;
    let scale = report.spectral_radius().max(1.0);
    let tol = CLUSTER_TOL * scale;
    let mut used = vec![false; vals.len()];
    let mut terms = Vec::new();
    for n in 0..vals.len() {
        if used[n] || vals[n].abs() < tol {
            continue;
        }
        used[n] = true;
        let partner = (0..vals.len())
            .find(|&m| !used[m] && (vals[m] + vals[n]).abs() < tol);
        let lambda = vals[n].abs();
        if let Some(m) = partner {
            used[m] = true;
            let (pos, neg) = if vals[n] > 0.0 { (n, m) } else { (m, n) };
            let op = subspace_projector(report, pos)? - subspace_projector(report, neg)?;
            let spans_all = report.multiplicities[pos] + report.multiplicities[neg] == dim;
            let tag = if spans_all { SpectrumTag::Pm(1.0) } else { SpectrumTag::ZeroPm(1.0) };
            terms.push(Term { coefficient: lambda, op, tag, mask: None });
        } else {
            let op = subspace_projector(report, n)?;
            let signed = vals[n];
            terms.push(Term {
                coefficient: signed,
                op,
                tag: SpectrumTag::ZeroLambda(1.0),
                mask: None,
            });
        }
    }
    let mut decomp = Decomposition {
        kind: DecompositionKind::Projector,
        terms,
        offset: 0.0,
        frame: None,
        residual: 0.0,
    };
    decomp.residual = frobenius(&(report.reconstruct() - decomp.reconstruct(dim)));
    Ok(decomp)
}

/// In-place Walsh (parity) transform: expands a diagonal over Z-strings.
/// After the call, `data[m]` is the coefficient of the Z-string with mask `m`.
pub fn walsh_transform(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut stride = 1;
    while stride < n {
        let mut i = 0;
        while i < n {
            for j in i..i + stride {
                let (a, b) = (data[j], data[j + stride]);
                data[j] = a + b;
                data[j + stride] = a - b;
            }
            i += stride * 2;
        }
        stride *= 2;
    }
    let scale = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Search mode for the eigenvalue-to-basis-label assignment.
#[derive(Debug, Clone, Copy)]
pub enum CsaSearch {
    /// All distinct assignments (multiset-deduplicated); N ≤ 3 only.
    Exhaustive,
    /// Simulated annealing over label swaps.
    Anneal { seed: u64, sweeps: usize },
}

const WALSH_PRUNE: f64 = 1e-9;

fn nonzero_walsh(coeffs: &[f64], scale: f64) -> Vec<(u64, f64)> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| c.abs() > WALSH_PRUNE * scale.max(1.0))
        .map(|(m, c)| (m as u64, *c))
        .collect()
}

fn assignment_cost(values: &[f64], scale: f64) -> (usize, Vec<(u64, f64)>) {
    let mut work = values.to_vec();
    walsh_transform(&mut work);
    let nz = nonzero_walsh(&work, scale);
    (nz.len(), nz)
}

/// Commutative CSA decomposition `G = offset·1 + V†(Σ cₙZₙ)V` with the
/// number of Z-strings minimized over eigenvalue-to-label assignments.
pub fn csa_commutative(g: &CMat, search: CsaSearch) -> Result<Decomposition> {
    let dim = g.nrows();
    if !dim.is_power_of_two() {
        return Err(Error::Invalid(format!("dimension {dim} is not a power of two")));
    }
    let n_qubits = dim.trailing_zeros() as usize;
    let rep = eigendecompose(g)?;

    // identity component
    let trace: f64 = (0..dim).map(|i| g[(i, i)].re).sum();
    let offset = trace / dim as f64;

    // per-column eigenvalues with the offset removed, snapped to cluster means
    let values: Vec<f64> = rep
        .projector_index
        .iter()
        .map(|&c| rep.distinct_eigenvalues[c] - offset)
        .collect();
    let scale = values.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);

    let assignment = match search {
        CsaSearch::Exhaustive => {
            if n_qubits > 3 {
                return Err(Error::Invalid(format!(
                    "exhaustive CSA search is guarded at 3 qubits, got {n_qubits}"
                )));
            }
            exhaustive_assignment(&values, scale)
        }
        CsaSearch::Anneal { seed, sweeps } => anneal_assignment(&values, scale, seed, sweeps),
    };

    // build V: label b gets eigen-column assignment[b]
    let mut v_dag = CMat::zeros(dim, dim);
    for (label, &col) in assignment.iter().enumerate() {
        v_dag.set_column(label, &rep.eigenbasis.column(col));
    }
    let v = v_dag.adjoint();

    let assigned: Vec<f64> = assignment.iter().map(|&c| values[c]).collect();
    let (_, entries) = assignment_cost(&assigned, scale);

    let mut terms = Vec::new();
    for &(mask, c) in &entries {
        let mut diag = CMat::zeros(dim, dim);
        for b in 0..dim as u64 {
            let sign = if (mask & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            diag[(b as usize, b as usize)] = Complex64::new(sign, 0.0);
        }
        let op = v.adjoint() * diag * &v;
        terms.push(Term {
            coefficient: c,
            op,
            tag: SpectrumTag::Pm(1.0),
            mask: Some(mask),
        });
    }
    let frame = CsaFrame { v, entries };
    let mut decomp = Decomposition {
        kind: DecompositionKind::CsaCommutative,
        terms,
        offset,
        frame: Some(frame),
        residual: 0.0,
    };
    decomp.residual = residual_of(g, &decomp);
    Ok(decomp)
}

/// Enumerates distinct assignments of the eigenvalue multiset to labels and
/// keeps the one with the fewest nonzero Walsh coefficients. Ties prefer the
/// lexicographically smallest mask set, then earliest enumeration order.
fn exhaustive_assignment(values: &[f64], scale: f64) -> Vec<usize> {
    let dim = values.len();
    // group equal values so permutations of equal eigenvalues are not revisited
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut best: Option<(usize, Vec<u64>, Vec<usize>)> = None;

    // iterative unique-permutation enumeration over the sorted column indices
    let mut perm = order.clone();
    loop {
        let assigned: Vec<f64> = perm.iter().map(|&c| values[c]).collect();
        let (k, nz) = assignment_cost(&assigned, scale);
        let masks: Vec<u64> = nz.iter().map(|(m, _)| *m).collect();
        let better = match &best {
            None => true,
            Some((bk, bmasks, _)) => k < *bk || (k == *bk && masks < *bmasks),
        };
        if better {
            best = Some((k, masks, perm.clone()));
        }
        if !next_distinct_permutation(&mut perm, values) {
            break;
        }
    }
    best.unwrap().2
}

/// Lexicographic next-permutation over the *values* the indices point to,
/// skipping permutations that only swap equal eigenvalues.
fn next_distinct_permutation(perm: &mut [usize], values: &[f64]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let key = |i: usize| values[perm[i]];
    let mut i = n - 1;
    while i > 0 && key(i - 1) >= key(i) {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while key(j) <= key(i - 1) {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

fn anneal_assignment(values: &[f64], scale: f64, seed: u64, sweeps: usize) -> Vec<usize> {
    let dim = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current: Vec<usize> = (0..dim).collect();
    let (mut cost, _) = {
        let assigned: Vec<f64> = current.iter().map(|&c| values[c]).collect();
        assignment_cost(&assigned, scale)
    };
    let mut best = current.clone();
    let mut best_cost = cost;
    let mut temp = 2.0;
    let cooling = 0.999_f64.powf(1.0_f64.max(10_000.0 / sweeps as f64));
    for _ in 0..sweeps {
        let a = rng.gen_range(0..dim);
        let b = rng.gen_range(0..dim);
        if a == b || values[current[a]] == values[current[b]] {
            continue;
        }
        current.swap(a, b);
        let assigned: Vec<f64> = current.iter().map(|&c| values[c]).collect();
        let (new_cost, _) = assignment_cost(&assigned, scale);
        let delta = new_cost as f64 - cost as f64;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
            cost = new_cost;
            if cost < best_cost {
                best_cost = cost;
                best = current.clone();
            }
        } else {
            current.swap(a, b);
        }
        temp *= cooling;
    }
    best
}

/// Options for the non-commutative reflection fit.
#[derive(Debug, Clone, Copy)]
pub struct NcsaOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for NcsaOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 400, seed: 0 }
    }
}

/// Non-commutative CSA fit `G ≈ Σ cₙRₙ` with each `Rₙ` a traceless
/// reflection (`Rₙ² = 1`, `tr Rₙ = 0`).
///
/// Alternating minimization: with all other terms frozen, the best
/// `cR`-approximation of the residual `T` shares its eigenbasis and takes
/// the balanced signature `s` maximizing `Σ sⱼμⱼ`, giving a globally
/// optimal per-term update. Non-convergence is returned as a result whose
/// residual exceeds the bound, not as an error.
pub fn csa_noncommutative(g: &CMat, k_prime: usize, opts: NcsaOptions) -> Result<Decomposition> {
    if k_prime == 0 {
        return Err(Error::Invalid("k_prime must be at least 1".into()));
    }
    let dim = g.nrows();
    if !dim.is_power_of_two() {
        return Err(Error::Invalid(format!("dimension {dim} is not a power of two")));
    }
    let trace: f64 = (0..dim).map(|i| g[(i, i)].re).sum();
    let offset = trace / dim as f64;
    let mut centered = g.clone();
    for i in 0..dim {
        centered[(i, i)] -= Complex64::new(offset, 0.0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<(f64, CMat)>)> = None;
    for _ in 0..opts.restarts {
        let mut terms: Vec<(f64, CMat)> = (0..k_prime)
            .map(|_| {
                let q = random_unitary(dim, &mut rng);
                let mut diag = CMat::zeros(dim, dim);
                for i in 0..dim {
                    let sign = if i < dim / 2 { 1.0 } else { -1.0 };
                    diag[(i, i)] = Complex64::new(sign, 0.0);
                }
                let r = &q * diag * q.adjoint();
                (rng.gen::<f64>() - 0.5, r)
            })
            .collect();
        let mut res = f64::INFINITY;
        for _ in 0..opts.max_iters {
            for n in 0..k_prime {
                let mut target = centered.clone();
                for (m, (c, r)) in terms.iter().enumerate() {
                    if m != n {
                        target -= r.clone().map(|v| v * Complex64::new(*c, 0.0));
                    }
                }
                terms[n] = best_reflection_fit(&target);
            }
            let mut recon = CMat::zeros(dim, dim);
            for (c, r) in &terms {
                recon += r.clone().map(|v| v * Complex64::new(*c, 0.0));
            }
            let new_res = frobenius(&(&centered - recon));
            if (res - new_res).abs() < 1e-15 * (1.0 + new_res) {
                res = new_res;
                break;
            }
            res = new_res;
            if res < 1e-13 {
                break;
            }
        }
        if best.as_ref().map_or(true, |(b, _)| res < *b) {
            best = Some((res, terms));
        }
        if best.as_ref().unwrap().0 < 1e-13 {
            break;
        }
    }

    let (residual, raw_terms) = best.unwrap();
    let terms = raw_terms
        .into_iter()
        .map(|(c, r)| Term {
            coefficient: c,
            op: r,
            tag: SpectrumTag::Pm(1.0),
            mask: None,
        })
        .collect();
    Ok(Decomposition {
        kind: DecompositionKind::CsaNonCommutative,
        terms,
        offset,
        frame: None,
        residual,
    })
}

/// `argmin_{c,R} ‖T − cR‖_F` over traceless reflections.
fn best_reflection_fit(target: &CMat) -> (f64, CMat) {
    let dim = target.nrows();
    let (values, basis) = crate::matrix::hermitian_eigen(target).expect("hermitian residual");
    // values ascending: the top half gets +1
    let mut signs = vec![-1.0; dim];
    let mut c = 0.0;
    for (idx, value) in values.iter().enumerate() {
        if idx >= dim / 2 {
            signs[idx] = 1.0;
            c += value;
        } else {
            c -= value;
        }
    }
    c /= dim as f64;
    let mut scaled = basis.clone();
    for (col, sign) in signs.iter().enumerate() {
        for r in 0..dim {
            scaled[(r, col)] *= Complex64::new(*sign, 0.0);
        }
    }
    let refl = scaled * basis.adjoint();
    (c, refl)
}

/// Splits a hermitized singlet generator into its eigenvalue-pair
/// restrictions, one term per distinct `|λ| > 0`, ordered to match the
/// tabulated sub-operator labels (descending `|λ|` for the Ω=4 head pair,
/// see [`singlet_split_order`]).
pub fn singlet_on_split(kind: SingletKind) -> Result<SingletSplit> {
    let t = build_singlet(kind)?;
    let jw = jordan_wigner(&t)?;
    let (herm, _) = hermitize(&jw)?;
    let g = herm.to_dense()?;
    let rep = eigendecompose(&g)?;

    // group distinct eigenvalues into ± pairs
    let scale = rep.spectral_radius().max(1.0);
    let tol = CLUSTER_TOL * scale;
    let mut lambdas: Vec<f64> = rep
        .distinct_eigenvalues
        .iter()
        .copied()
        .filter(|l| *l > tol)
        .collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let order = singlet_split_order(kind, &lambdas);

    let mut terms = Vec::new();
    for lambda in order {
        let pos = rep
            .distinct_eigenvalues
            .iter()
            .position(|l| (l - lambda).abs() < tol)
            .ok_or_else(|| Error::Numerical("missing +λ cluster".into()))?;
        let neg = rep
            .distinct_eigenvalues
            .iter()
            .position(|l| (l + lambda).abs() < tol)
            .ok_or_else(|| Error::Numerical("missing −λ cluster".into()))?;
        let p_pos = subspace_projector(&rep, pos)?;
        let p_neg = subspace_projector(&rep, neg)?;
        let op = p_pos.map(|v| v * Complex64::new(lambda, 0.0))
            - p_neg.map(|v| v * Complex64::new(lambda, 0.0));
        terms.push(Term {
            coefficient: 1.0,
            op,
            tag: SpectrumTag::ZeroPm(lambda),
            mask: None,
        });
    }
    let mut decomp = Decomposition {
        kind: DecompositionKind::ClosedForm,
        terms,
        offset: 0.0,
        frame: None,
        residual: 0.0,
    };
    decomp.residual = residual_of(&g, &decomp);
    Ok(SingletSplit { generator: g, fermionic: t, decomposition: decomp })
}

/// Label order of the tabulated singlet splits: the Ω=4 table lists the
/// `{0,±2}`, `{0,±2√2}`, `{0,±√2}`, `{0,±1}` pieces in that order; the
/// two-term splits list `{0,±1}` first.
fn singlet_split_order(kind: SingletKind, ascending: &[f64]) -> Vec<f64> {
    match kind {
        SingletKind::DoubleSen4 { .. } => {
            // {2, 2√2, √2, 1} when present
            let mut want = vec![2.0, 2.0 * 2f64.sqrt(), 2f64.sqrt(), 1.0];
            want.retain(|w| ascending.iter().any(|l| (l - w).abs() < 1e-6));
            want
        }
        _ => ascending.to_vec(),
    }
}

pub struct SingletSplit {
    /// Hermitized dense generator the split reconstructs.
    pub generator: CMat,
    /// The anti-Hermitian fermionic form.
    pub fermionic: FermionSum,
    pub decomposition: Decomposition,
}

/// Per-parameter generators of the fSim gate: differentiation directions
/// `∂G/∂θ = (x̂₀x̂₁ + ŷ₀ŷ₁)/2` (spectrum `{0,±1}`) and
/// `∂G/∂φ = (1−ẑ₀)(1−ẑ₁)/4` (spectrum `{0,1}`), plus the gate pieces
/// `Ô₁ = θ·∂θG`, `Ô₂ = φ·∂φG` which sum to the fSim generator.
pub struct FsimSplit {
    pub o1: crate::operators::PauliSum,
    pub o2: crate::operators::PauliSum,
    pub d_theta: crate::operators::PauliSum,
    pub d_phi: crate::operators::PauliSum,
}

pub fn fsim_parameter_split(theta: f64, phi: f64) -> FsimSplit {
    let d_theta = crate::operators::fsim(1.0, 0.0);
    let d_phi = crate::operators::fsim(0.0, 1.0);
    FsimSplit {
        o1: d_theta.scaled(Complex64::new(theta, 0.0)),
        o2: d_phi.scaled(Complex64::new(phi, 0.0)),
        d_theta,
        d_phi,
    }
}

/// Test-fixture generator: `G = V†(Σ dₙ Z_{maskₙ})V` for a random unitary
/// `V`, returning the expected eigenvalue list (all signed sums, with
/// multiplicity).
pub fn best_case_construct(
    d: &[f64],
    masks: &[u64],
    n_qubits: usize,
    seed: u64,
) -> Result<(CMat, Vec<f64>)> {
    if d.len() != masks.len() || d.is_empty() {
        return Err(Error::Invalid("coefficients and masks must pair up".into()));
    }
    let dim = 1usize << n_qubits;
    // masks linearly independent over GF(2)
    let mut basis: Vec<u64> = Vec::new();
    for &m in masks {
        let mut v = m;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v == 0 {
            return Err(Error::Invalid("z-string masks are linearly dependent".into()));
        }
        basis.push(v);
        basis.sort_unstable();
        basis.reverse();
    }
    let mut diag = vec![0.0f64; dim];
    for (slot, value) in diag.iter_mut().enumerate() {
        for (c, m) in d.iter().zip(masks) {
            let sign = if (m & slot as u64).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *value += c * sign;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_unitary(dim, &mut rng);
    let mut dm = CMat::zeros(dim, dim);
    for (i, val) in diag.iter().enumerate() {
        dm[(i, i)] = Complex64::new(*val, 0.0);
    }
    let g = v.adjoint() * dm * v;
    let mut expected = diag;
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((g, expected))
}

pub fn verify_term_tags(decomp: &Decomposition) -> Result<()> {
    for (i, term) in decomp.terms.iter().enumerate() {
        let got = tag_of(&term.op)?;
        let want = term.tag;
        let close = |a: f64, b: f64| (a - b).abs() < 1e-6 * a.abs().max(1.0);
        let ok = match (got, want) {
            (SpectrumTag::Pm(a), SpectrumTag::Pm(b)) => close(a, b),
            (SpectrumTag::ZeroPm(a), SpectrumTag::ZeroPm(b)) => close(a, b),
            (SpectrumTag::ZeroLambda(a), SpectrumTag::ZeroLambda(b)) => close(a, b.abs()),
            _ => false,
        };
        if !ok {
            return Err(Error::Numerical(format!(
                "term {i} tag mismatch: labeled {want:?}, spectrum says {got:?}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matrix::ONE;
    use approx::assert_relative_eq;

    #[test]
    fn walsh_roundtrip() {
        let mut d = vec![3.0, -3.0, -1.0, 1.0];
        walsh_transform(&mut d);
        // diag(3,−3,−1,1) = 1·Z0 + 2·Z0Z1 (masks 0b01 and 0b11)
        assert_relative_eq!(d[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(d[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(d[2], 0.0, epsilon = 1e-12);
        assert_relative_eq!(d[3], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn eqve_projector_decomposition() {
        let g = fixtures::eqve_matrix();
        let rep = eigendecompose(&g).unwrap();
        let decomp = projector_decomposition(&rep).unwrap();
        assert_eq!(decomp.k(), 2);
        assert!(decomp.residual < 1e-12);
        verify_term_tags(&decomp).unwrap();
        let mut coeffs: Vec<f64> = decomp.terms.iter().map(|t| t.coefficient).collect();
        coeffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(coeffs[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(coeffs[1], 3.0, epsilon = 1e-10);
        // terms commute with G and each other
        let t0 = &decomp.terms[0].op;
        let t1 = &decomp.terms[1].op;
        assert!(frobenius(&(t0 * t1 - t1 * t0)) < 1e-10);
        assert!(frobenius(&(t0 * &g - &g * t0)) < 1e-10);
    }

    #[test]
    fn z0_projector_is_single_term() {
        use crate::operators::{PauliString, PauliSum};
        let g = PauliSum::from_terms(1, [(PauliString::z(1, 0), ONE)])
            .unwrap()
            .to_dense()
            .unwrap();
        let rep = eigendecompose(&g).unwrap();
        let decomp = projector_decomposition(&rep).unwrap();
        assert_eq!(decomp.k(), 1);
        assert!(matches!(decomp.terms[0].tag, SpectrumTag::Pm(_)));
        assert_relative_eq!(decomp.terms[0].coefficient, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eqve_csa_finds_two_terms() {
        let g = fixtures::eqve_matrix();
        let decomp = csa_commutative(&g, CsaSearch::Exhaustive).unwrap();
        assert_eq!(decomp.k(), 2);
        assert!(decomp.residual < 1e-10, "residual {:.2e}", decomp.residual);
        let mut cs: Vec<f64> = decomp.terms.iter().map(|t| t.coefficient.abs()).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(cs[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(cs[1], 2.0, epsilon = 1e-10);
        verify_term_tags(&decomp).unwrap();
    }

    #[test]
    fn transmon_csa_recovers_paper_coefficients() {
        let (b, c) = (0.9, 0.55);
        let g = fixtures::transmon(b, c).to_dense().unwrap();
        let decomp = csa_commutative(&g, CsaSearch::Exhaustive).unwrap();
        assert_eq!(decomp.k(), 2);
        let mut cs: Vec<f64> = decomp.terms.iter().map(|t| t.coefficient.abs()).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(cs[0], c, epsilon = 1e-9);
        assert_relative_eq!(cs[1], (1.0 + b * b).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn matchgate_csa_needs_at_most_two_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let coeffs: [f64; 6] = std::array::from_fn(|_| rng.gen::<f64>() * 2.0 - 1.0);
            let g = crate::operators::matchgate(coeffs).to_dense().unwrap();
            let decomp = csa_commutative(&g, CsaSearch::Exhaustive).unwrap();
            assert!(decomp.k() <= 2, "matchgate CSA gave K = {}", decomp.k());
            assert!(decomp.residual < 1e-10);
        }
    }

    #[test]
    fn ncsa_z0_trivial() {
        use crate::operators::{PauliString, PauliSum};
        let g = PauliSum::from_terms(1, [(PauliString::z(1, 0), ONE)])
            .unwrap()
            .to_dense()
            .unwrap();
        let d = csa_noncommutative(&g, 1, NcsaOptions::default()).unwrap();
        assert!(d.residual < 1e-12);
        assert!(d.converged(frobenius(&g)));
    }

    #[test]
    fn ncsa_three_qubit_example() {
        let g = fixtures::three_qubit_generator();
        let ok = csa_noncommutative(&g, 2, NcsaOptions::default()).unwrap();
        assert!(ok.converged(frobenius(&g)), "residual {:.2e}", ok.residual);
        verify_term_tags(&ok).unwrap();
        let fail = csa_noncommutative(&g, 1, NcsaOptions::default()).unwrap();
        assert!(!fail.converged(frobenius(&g)), "k'=1 should not converge");
    }

    #[test]
    fn best_case_signed_sums() {
        let (_, spec) = best_case_construct(&[1.0, 2.0], &[0b01, 0b10], 2, 7).unwrap();
        assert_eq!(spec, vec![-3.0, -1.0, 1.0, 3.0]);
        let (_, spec) = best_case_construct(&[1.0, 1.0], &[0b01, 0b10], 2, 7).unwrap();
        assert_eq!(spec, vec![-2.0, 0.0, 0.0, 2.0]);
        assert!(best_case_construct(&[1.0, 1.0], &[0b01, 0b01], 2, 7).is_err());
    }

    #[test]
    fn best_case_recovery_via_exhaustive_csa() {
        let d = [0.8, 1.7, 0.45];
        let masks = [0b001u64, 0b010, 0b100];
        let (g, _) = best_case_construct(&d, &masks, 3, 11).unwrap();
        let decomp = csa_commutative(&g, CsaSearch::Exhaustive).unwrap();
        assert_eq!(decomp.k(), 3);
        let mut got: Vec<f64> = decomp.terms.iter().map(|t| t.coefficient.abs()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want = d.to_vec();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-8, "{got:?}");
        }
    }

    #[test]
    fn anneal_matches_exhaustive_on_small_fixture() {
        let g = fixtures::eqve_matrix();
        let ex = csa_commutative(&g, CsaSearch::Exhaustive).unwrap();
        let an = csa_commutative(&g, CsaSearch::Anneal { seed: 5, sweeps: 4000 }).unwrap();
        assert_eq!(an.k(), ex.k());
        assert!(an.residual < 1e-10);
    }

    #[test]
    fn fsim_split_spectra() {
        let split = fsim_parameter_split(1.0, 1.0);
        let o1 = split.o1.to_dense().unwrap();
        let rep = eigendecompose(&o1).unwrap();
        assert_eq!(rep.distinct_eigenvalues.len(), 3);
        assert_relative_eq!(rep.distinct_eigenvalues[2], 1.0, epsilon = 1e-12);
        let o2 = split.o2.to_dense().unwrap();
        let rep2 = eigendecompose(&o2).unwrap();
        assert_eq!(rep2.distinct_eigenvalues.len(), 2);
        assert_relative_eq!(rep2.distinct_eigenvalues[1], 1.0, epsilon = 1e-12);
        assert_eq!(rep2.multiplicities, vec![3, 1]);
        // θ=φ=0 gives zero operators
        let zero = fsim_parameter_split(0.0, 0.0);
        assert_eq!(zero.o1.n_terms(), 0);
        assert_eq!(zero.o2.n_terms(), 0);
    }
}

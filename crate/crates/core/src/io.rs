//! JSON grammars for operators, circuits and gradient problems.
//!
//! Operator format:
//! `{"kind":"pauli","n_qubits":N,"terms":[{"re":f,"im":f,"ops":"X0 Z3"}]}`
//! with `ops` a space-separated list of `<X|Y|Z><qubit>` (empty string is
//! the identity), and
//! `{"kind":"fermion","n_modes":M,"terms":[{"re":f,"im":f,"ops":"2^ 0"}]}`
//! with `<mode>["^"]` tokens in left-to-right operator order. Duplicate
//! terms are summed on parse.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::operators::{FermionOp, FermionSum, PauliString, PauliSum};
use crate::simulate::{Circuit, Gate, Generator};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub re: f64,
    pub im: f64,
    pub ops: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OperatorJson {
    #[serde(rename = "pauli")]
    Pauli { n_qubits: usize, terms: Vec<TermJson> },
    #[serde(rename = "fermion")]
    Fermion { n_modes: usize, terms: Vec<TermJson> },
}

/// Either operator algebra, as parsed from a file.
#[derive(Debug, Clone)]
pub enum OperatorSum {
    Pauli(PauliSum),
    Fermion(FermionSum),
}

impl OperatorSum {
    /// Pauli view: fermionic operators go through Jordan–Wigner.
    pub fn to_pauli(&self) -> Result<PauliSum> {
        match self {
            OperatorSum::Pauli(p) => Ok(p.clone()),
            OperatorSum::Fermion(f) => crate::operators::jordan_wigner(f),
        }
    }
}

fn parse_pauli_ops(n_qubits: usize, ops: &str) -> Result<PauliString> {
    let mut x = 0u64;
    let mut z = 0u64;
    for token in ops.split_whitespace() {
        let (letter, index) = token.split_at(1);
        let qubit: usize = index
            .parse()
            .map_err(|_| Error::Parse(format!("bad qubit index in token {token:?}")))?;
        if qubit >= n_qubits {
            return Err(Error::Parse(format!(
                "qubit {qubit} out of range (n_qubits {n_qubits})"
            )));
        }
        let bit = 1u64 << qubit;
        if x & bit != 0 || z & bit != 0 {
            return Err(Error::Parse(format!("qubit {qubit} repeated in {ops:?}")));
        }
        match letter {
            "X" => x |= bit,
            "Y" => {
                x |= bit;
                z |= bit;
            }
            "Z" => z |= bit,
            other => return Err(Error::Parse(format!("unknown Pauli letter {other:?}"))),
        }
    }
    PauliString::from_masks(n_qubits, x, z)
}

fn pauli_ops_string(p: &PauliString) -> String {
    let mut parts = Vec::new();
    for q in 0..p.n_qubits() {
        let xb = p.x_mask() >> q & 1 == 1;
        let zb = p.z_mask() >> q & 1 == 1;
        match (xb, zb) {
            (true, false) => parts.push(format!("X{q}")),
            (true, true) => parts.push(format!("Y{q}")),
            (false, true) => parts.push(format!("Z{q}")),
            (false, false) => {}
        }
    }
    parts.join(" ")
}

fn parse_fermion_ops(n_modes: usize, ops: &str) -> Result<Vec<FermionOp>> {
    let mut out = Vec::new();
    for token in ops.split_whitespace() {
        let (digits, dagger) = match token.strip_suffix('^') {
            Some(rest) => (rest, true),
            None => (token, false),
        };
        let mode: usize = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad mode index in token {token:?}")))?;
        if mode >= n_modes {
            return Err(Error::Parse(format!("mode {mode} out of range (n_modes {n_modes})")));
        }
        out.push(if dagger { FermionOp::create(mode) } else { FermionOp::annihilate(mode) });
    }
    Ok(out)
}

fn fermion_ops_string(ops: &[FermionOp]) -> String {
    ops.iter()
        .map(|op| {
            if op.dagger {
                format!("{}^", op.mode)
            } else {
                format!("{}", op.mode)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn operator_from_json(json: &OperatorJson) -> Result<OperatorSum> {
    match json {
        OperatorJson::Pauli { n_qubits, terms } => {
            let mut sum = PauliSum::zero(*n_qubits);
            for t in terms {
                let p = parse_pauli_ops(*n_qubits, &t.ops)?;
                sum.add_term(p, Complex64::new(t.re, t.im));
            }
            Ok(OperatorSum::Pauli(sum))
        }
        OperatorJson::Fermion { n_modes, terms } => {
            let mut sum = FermionSum::zero(*n_modes);
            for t in terms {
                let ops = parse_fermion_ops(*n_modes, &t.ops)?;
                sum.push_term(Complex64::new(t.re, t.im), ops)?;
            }
            Ok(OperatorSum::Fermion(sum))
        }
    }
}

pub fn operator_to_json(op: &OperatorSum) -> OperatorJson {
    match op {
        OperatorSum::Pauli(p) => OperatorJson::Pauli {
            n_qubits: p.n_qubits(),
            terms: p
                .terms()
                .map(|(string, c)| TermJson {
                    re: c.re,
                    im: c.im,
                    ops: pauli_ops_string(string),
                })
                .collect(),
        },
        OperatorSum::Fermion(f) => OperatorJson::Fermion {
            n_modes: f.n_modes(),
            terms: f
                .terms()
                .map(|(c, ops)| TermJson { re: c.re, im: c.im, ops: fermion_ops_string(ops) })
                .collect(),
        },
    }
}

pub fn parse_operator(text: &str) -> Result<OperatorSum> {
    let json: OperatorJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    operator_from_json(&json)
}

pub fn serialize_operator(op: &OperatorSum) -> String {
    serde_json::to_string_pretty(&operator_to_json(op)).expect("serializable")
}

/// Circuit format:
/// `{"n_qubits":N,"gates":[{"generator":<operator or {"file":path}>,"amplitude":f}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircuitJson {
    pub n_qubits: usize,
    pub gates: Vec<GateJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateJson {
    pub generator: OperatorRef,
    pub amplitude: f64,
}

/// Inline operator object or a `{"file": path}` reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorRef {
    File { file: String },
    Inline(OperatorJson),
}

impl OperatorRef {
    pub fn resolve(&self, base: Option<&std::path::Path>) -> Result<OperatorSum> {
        match self {
            OperatorRef::Inline(json) => operator_from_json(json),
            OperatorRef::File { file } => {
                let path = match base {
                    Some(dir) => dir.join(file),
                    None => std::path::PathBuf::from(file),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::Parse(format!("cannot read {}: {e}", path.display()))
                })?;
                parse_operator(&text)
            }
        }
    }
}

/// Builds a generator for the simulator from a parsed operator, applying
/// hermitization (with flag) to fermionic or anti-Hermitian input.
pub fn generator_from_operator(op: &OperatorSum) -> Result<Generator> {
    let pauli = op.to_pauli()?;
    let (herm, _branch) = crate::operators::hermitize(&pauli)?;
    Generator::from_pauli(herm)
}

pub fn circuit_from_json(json: &CircuitJson, base: Option<&std::path::Path>) -> Result<Circuit> {
    let mut circuit = Circuit::identity(json.n_qubits);
    for gate in &json.gates {
        let op = gate.generator.resolve(base)?;
        let generator = generator_from_operator(&op)?;
        circuit.push(Gate { generator, amplitude: gate.amplitude })?;
    }
    Ok(circuit)
}

/// Problem format: the observable, one circuit, the index of the
/// differentiated gate inside it, and (optionally) an override for τ.
/// `U₁` is everything before the target gate, `U₂` everything after.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProblemJson {
    pub h: OperatorRef,
    pub circuit: CircuitRef,
    pub gate_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircuitRef {
    File { file: String },
    Inline(CircuitJson),
}

impl CircuitRef {
    fn resolve_json(
        &self,
        base: Option<&std::path::Path>,
    ) -> Result<(CircuitJson, Option<std::path::PathBuf>)> {
        match self {
            CircuitRef::Inline(json) => Ok((json.clone(), base.map(|p| p.to_path_buf()))),
            CircuitRef::File { file } => {
                let path = match base {
                    Some(dir) => dir.join(file),
                    None => std::path::PathBuf::from(file),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::Parse(format!("cannot read {}: {e}", path.display()))
                })?;
                let json: CircuitJson =
                    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                Ok((json, path.parent().map(|p| p.to_path_buf())))
            }
        }
    }
}

/// A fully resolved gradient problem.
pub struct Problem {
    pub ctx: crate::simulate::GradientContext,
    /// Pauli form of the differentiated generator, when available.
    pub generator_pauli: Option<PauliSum>,
}

pub fn problem_from_json(
    json: &ProblemJson,
    base: Option<&std::path::Path>,
    gate_index_override: Option<usize>,
) -> Result<Problem> {
    let h_op = json.h.resolve(base)?;
    let h = h_op.to_pauli()?.to_dense()?;
    crate::matrix::check_hermitian(&h)?;

    let (circuit_json, circuit_base) = json.circuit.resolve_json(base)?;
    let cbase = circuit_base.as_deref().or(base);
    let index = gate_index_override.unwrap_or(json.gate_index);
    if index >= circuit_json.gates.len() {
        return Err(Error::Invalid(format!(
            "gate index {index} out of range ({} gates)",
            circuit_json.gates.len()
        )));
    }

    let mut u1 = Circuit::identity(circuit_json.n_qubits);
    let mut u2 = Circuit::identity(circuit_json.n_qubits);
    let mut target: Option<(Generator, Option<PauliSum>, f64)> = None;
    for (i, gate) in circuit_json.gates.iter().enumerate() {
        let op = gate.generator.resolve(cbase)?;
        let generator = generator_from_operator(&op)?;
        if i < index {
            u1.push(Gate { generator, amplitude: gate.amplitude })?;
        } else if i == index {
            let pauli = generator.pauli().cloned();
            target = Some((generator, pauli, gate.amplitude));
        } else {
            u2.push(Gate { generator, amplitude: gate.amplitude })?;
        }
    }
    let (g, generator_pauli, amplitude) = target.expect("index checked above");
    let tau = json.tau.unwrap_or(amplitude);
    let ctx = crate::simulate::GradientContext::new(h, u1, u2, g, tau)?;
    Ok(Problem { ctx, generator_pauli })
}

pub fn parse_problem(
    text: &str,
    base: Option<&std::path::Path>,
    gate_index_override: Option<usize>,
) -> Result<Problem> {
    let json: ProblemJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    problem_from_json(&json, base, gate_index_override)
}

//! Seeded random circuit families.
//!
//! * Clifford blocks: each gate picks a kind uniformly from {H, S, CNOT}, then
//!   a uniform qubit (or a uniform ordered pair of distinct qubits for CNOT).
//! * Universal blocks: the same with kinds {H, S, T, CNOT}.
//! * Doped Clifford+T: `n_T + 1` Clifford blocks separated by single T gates
//!   on uniformly random qubits.
//!
//! Circuits serialise to a line-oriented text format, one gate per line
//! (`H q`, `S q`, `T q`, `P theta q`, `CNOT c t`) with `# block` and
//! `# tlayer` marker lines.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Stream};
use crate::statevector::{Circuit, Gate, Marker, MarkerLabel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Clifford,
    DopedCliffordT,
    Universal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_t: usize,
    pub block_size: usize,
    pub family: Family,
    pub seed: u64,
}

/// `10 N²`, the heating block length.
pub fn default_block_size(n_qubits: usize) -> usize {
    10 * n_qubits * n_qubits
}

impl CircuitSpec {
    pub fn clifford(n_qubits: usize, seed: u64) -> Self {
        CircuitSpec {
            n_qubits,
            n_t: 0,
            block_size: default_block_size(n_qubits),
            family: Family::Clifford,
            seed,
        }
    }

    pub fn doped(n_qubits: usize, n_t: usize, seed: u64) -> Self {
        CircuitSpec {
            n_qubits,
            n_t,
            block_size: default_block_size(n_qubits),
            family: Family::DopedCliffordT,
            seed,
        }
    }

    pub fn universal(n_qubits: usize, seed: u64) -> Self {
        CircuitSpec {
            n_qubits,
            n_t: 0,
            block_size: default_block_size(n_qubits),
            family: Family::Universal,
            seed,
        }
    }

    pub fn with_block_size(mut self, block_size: usize) -> Self {
        self.block_size = block_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || self.n_qubits > crate::statevector::MAX_QUBITS {
            return Err(Error::Config(format!("n_qubits {} outside 2..=24", self.n_qubits)));
        }
        if self.block_size == 0 {
            return Err(Error::Config("block_size must be at least 1".into()));
        }
        if self.family == Family::Clifford && self.n_t != 0 {
            return Err(Error::Config("a Clifford circuit cannot carry T doping".into()));
        }
        Ok(())
    }

    /// Builds the circuit from the heating stream of `seed`.
    pub fn build(&self) -> Result<Circuit> {
        self.validate()?;
        let mut rng = rng::stream(self.seed, Stream::Heating);
        Ok(match self.family {
            Family::Clifford => random_clifford_block(self.n_qubits, self.block_size, &mut rng),
            Family::DopedCliffordT => doped_circuit_with(self, &mut rng),
            Family::Universal => random_universal_block(self.n_qubits, self.block_size, &mut rng),
        })
    }
}

fn random_qubit_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let c = rng.random_range(0..n);
    let mut t = rng.random_range(0..n - 1);
    if t >= c {
        t += 1;
    }
    (c, t)
}

/// One gate uniform over {H, S, CNOT}.
pub fn random_clifford_gate<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Gate {
    match rng.random_range(0..3u8) {
        0 => Gate::h(rng.random_range(0..n_qubits)),
        1 => Gate::s(rng.random_range(0..n_qubits)),
        _ => {
            let (c, t) = random_qubit_pair(n_qubits, rng);
            Gate::cnot(c, t)
        }
    }
}

/// One gate uniform over {H, S, T, CNOT}.
pub fn random_universal_gate<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Gate {
    match rng.random_range(0..4u8) {
        0 => Gate::h(rng.random_range(0..n_qubits)),
        1 => Gate::s(rng.random_range(0..n_qubits)),
        2 => Gate::t(rng.random_range(0..n_qubits)),
        _ => {
            let (c, t) = random_qubit_pair(n_qubits, rng);
            Gate::cnot(c, t)
        }
    }
}

pub fn random_clifford_block<R: Rng + ?Sized>(n_qubits: usize, n_gates: usize, rng: &mut R) -> Circuit {
    (0..n_gates).map(|_| random_clifford_gate(n_qubits, rng)).collect()
}

pub fn random_universal_block<R: Rng + ?Sized>(n_qubits: usize, n_gates: usize, rng: &mut R) -> Circuit {
    (0..n_gates).map(|_| random_universal_gate(n_qubits, rng)).collect()
}

/// `n_gates` T gates on uniformly random qubits.
pub fn random_t_layer<R: Rng + ?Sized>(n_qubits: usize, n_gates: usize, rng: &mut R) -> Circuit {
    (0..n_gates).map(|_| Gate::t(rng.random_range(0..n_qubits))).collect()
}

/// `[block, T, block, T, …, block]` with `n_t + 1` blocks of `block_size`.
pub fn doped_circuit(spec: &CircuitSpec) -> Result<Circuit> {
    if spec.family != Family::DopedCliffordT {
        return Err(Error::Usage(format!("doped_circuit called with family {:?}", spec.family)));
    }
    spec.build()
}

fn doped_circuit_with<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R) -> Circuit {
    let n = spec.n_qubits;
    let mut circuit = Circuit::with_capacity((spec.n_t + 1) * spec.block_size + spec.n_t);
    for layer in 0..=spec.n_t {
        for _ in 0..spec.block_size {
            circuit.push(random_clifford_gate(n, rng));
        }
        circuit.mark(MarkerLabel::CliffordBlockEnd);
        if layer < spec.n_t {
            circuit.push(Gate::t(rng.random_range(0..n)));
            circuit.mark(MarkerLabel::TLayer);
        }
    }
    circuit
}

fn marker_line(label: MarkerLabel) -> &'static str {
    match label {
        MarkerLabel::CliffordBlockEnd => "# block",
        MarkerLabel::TLayer => "# tlayer",
    }
}

/// Text form of `circuit`; `parse_circuit` inverts it exactly.
pub fn circuit_to_text(circuit: &Circuit) -> String {
    let mut out = String::with_capacity(circuit.len() * 8);
    let mut markers = circuit.markers().iter().peekable();
    for (i, g) in circuit.iter().enumerate() {
        while let Some(m) = markers.next_if(|m| m.position == i) {
            out.push_str(marker_line(m.label));
            out.push('\n');
        }
        writeln!(out, "{g}").expect("writing to a String");
    }
    for m in markers {
        out.push_str(marker_line(m.label));
        out.push('\n');
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut gates = Vec::new();
    let mut markers = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let label = match comment.trim() {
                "block" => MarkerLabel::CliffordBlockEnd,
                "tlayer" => MarkerLabel::TLayer,
                _ => continue,
            };
            markers.push(Marker { position: gates.len(), label });
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let qubit = |s: &str| s.parse::<usize>().map_err(|e| err(format!("bad qubit {s:?}: {e}")));
        let gate = match fields.as_slice() {
            ["H", q] => Gate::h(qubit(q)?),
            ["S", q] => Gate::s(qubit(q)?),
            ["T", q] => Gate::t(qubit(q)?),
            ["P", theta, q] => {
                let theta = theta.parse::<f64>().map_err(|e| err(format!("bad angle {theta:?}: {e}")))?;
                Gate::phase(theta, qubit(q)?)
            }
            ["CNOT", c, t] => {
                let (c, t) = (qubit(c)?, qubit(t)?);
                if c == t {
                    return Err(err(format!("CNOT with identical control and target {c}")));
                }
                Gate::cnot(c, t)
            }
            _ => return Err(err(format!("unrecognised gate line {line:?}"))),
        };
        gates.push(gate);
    }
    Ok(Circuit::from_parts(gates, markers))
}

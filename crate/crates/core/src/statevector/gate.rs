use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A gate from the simulated gate set: Hadamard, a phase shift `P(θ)` and CNOT.
///
/// `S = P(π/2)` and `T = P(π/4)` are phase shifts; see [`Gate::s`] and [`Gate::t`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Hadamard { qubit: usize },
    Phase { theta: f64, qubit: usize },
    Cnot { control: usize, target: usize },
}

/// Coarse gate classification used by samplers, counters and the text format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    S,
    T,
    /// Phase shift with an angle other than π/2 or π/4.
    P,
    Cnot,
}

impl Gate {
    pub fn h(qubit: usize) -> Self {
        Gate::Hadamard { qubit }
    }

    pub fn s(qubit: usize) -> Self {
        Gate::Phase { theta: FRAC_PI_2, qubit }
    }

    pub fn t(qubit: usize) -> Self {
        Gate::Phase { theta: FRAC_PI_4, qubit }
    }

    pub fn phase(theta: f64, qubit: usize) -> Self {
        Gate::Phase { theta, qubit }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn kind(&self) -> GateKind {
        match *self {
            Gate::Hadamard { .. } => GateKind::H,
            Gate::Phase { theta, .. } if theta == FRAC_PI_2 => GateKind::S,
            Gate::Phase { theta, .. } if theta == FRAC_PI_4 => GateKind::T,
            Gate::Phase { .. } => GateKind::P,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    /// Qubits the gate acts on; the second entry is set only for CNOT.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => (qubit, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    /// Exact inverse: H and CNOT are involutions, `P(θ)⁻¹ = P(-θ)`.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Phase { theta, qubit } => Gate::Phase { theta: -theta, qubit },
            g => g,
        }
    }

    /// True for H, CNOT and phase shifts by multiples of π/2.
    pub fn is_clifford(&self) -> bool {
        match *self {
            Gate::Phase { theta, .. } => {
                let quarter_turns = theta / FRAC_PI_2;
                quarter_turns == quarter_turns.round()
            }
            _ => true,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::Usage(format!(
                    "gate {self} addresses qubit {q} of a {n_qubits}-qubit state"
                )))
            }
        };
        match *self {
            Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => check(qubit),
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::Usage(format!(
                        "CNOT control and target coincide on qubit {control}"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (*self, self.kind()) {
            (Gate::Hadamard { qubit }, _) => write!(f, "H {qubit}"),
            (Gate::Phase { qubit, .. }, GateKind::S) => write!(f, "S {qubit}"),
            (Gate::Phase { qubit, .. }, GateKind::T) => write!(f, "T {qubit}"),
            (Gate::Phase { theta, qubit }, _) => write!(f, "P {theta:?} {qubit}"),
            (Gate::Cnot { control, target }, _) => write!(f, "CNOT {control} {target}"),
        }
    }
}

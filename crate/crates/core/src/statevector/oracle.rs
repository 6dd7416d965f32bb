//! Dense-matrix reference for the gate kernels.
//!
//! Each gate is written out as its full `2^N x 2^N` matrix from the textbook
//! definition and the circuit unitary is the ordered product. Only meant for
//! tiny registers.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Circuit, Gate};
use crate::{Error, Result};

pub const MAX_ORACLE_QUBITS: usize = 6;

/// Unitary of `circuit` as a dense matrix (first gate applied first).
pub fn circuit_unitary_oracle(circuit: &Circuit, n_qubits: usize) -> Result<DMatrix<Complex64>> {
    if n_qubits > MAX_ORACLE_QUBITS {
        return Err(Error::Usage(format!(
            "dense oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n_qubits}"
        )));
    }
    circuit.validate(n_qubits)?;
    let dim = 1usize << n_qubits;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for g in circuit {
        u = gate_matrix(g, n_qubits) * u;
    }
    Ok(u)
}

pub fn gate_matrix(gate: &Gate, n_qubits: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    let zero = Complex64::new(0.0, 0.0);
    let bit = |i: usize, q: usize| (i >> q) & 1;
    match *gate {
        Gate::Hadamard { qubit } => DMatrix::from_fn(dim, dim, |i, j| {
            if (i ^ j) & !(1 << qubit) != 0 {
                zero
            } else if bit(i, qubit) == 1 && bit(j, qubit) == 1 {
                Complex64::new(-FRAC_1_SQRT_2, 0.0)
            } else {
                Complex64::new(FRAC_1_SQRT_2, 0.0)
            }
        }),
        Gate::Phase { theta, qubit } => DMatrix::from_fn(dim, dim, |i, j| {
            if i != j {
                zero
            } else if bit(i, qubit) == 1 {
                Complex64::new(theta.cos(), theta.sin())
            } else {
                Complex64::new(1.0, 0.0)
            }
        }),
        Gate::Cnot { control, target } => DMatrix::from_fn(dim, dim, |i, j| {
            let image = if bit(j, control) == 1 { j ^ (1 << target) } else { j };
            if i == image {
                Complex64::new(1.0, 0.0)
            } else {
                zero
            }
        }),
    }
}

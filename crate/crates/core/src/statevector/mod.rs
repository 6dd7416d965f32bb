//! Dense N-qubit pure states and in-place gate kernels.
//!
//! Qubit `q` is bit `q` of the basis-state index (qubit 0 is the least
//! significant bit). Kernels walk the amplitude array in strided pairs and
//! never materialise a gate matrix.

mod circuit;
mod gate;
pub mod oracle;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use circuit::{Circuit, Marker, MarkerLabel};
pub use gate::{Gate, GateKind};

use crate::{Error, Result};

pub const MAX_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the caller is
    /// responsible for normalisation.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Config(format!("amplitude count {len} is not 2^N with N >= 1")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_size(n_qubits)?;
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Haar-random pure state (normalised complex Gaussian vector).
    pub fn haar_random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_size(n_qubits)?;
        let amplitudes = (0..1usize << n_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let mut state = StateVector { n_qubits, amplitudes };
        state.normalize();
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    /// Applies one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Hadamard { qubit } => hadamard(&mut self.amplitudes, qubit),
            Gate::Phase { theta, qubit } => phase(&mut self.amplitudes, qubit, phase_factor(theta)),
            Gate::Cnot { control, target } => cnot(&mut self.amplitudes, control, target),
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        self.apply_circuit_observed(circuit, |_, _| {})
    }

    /// Applies `circuit` gate by gate, calling `observer(index, state)` after
    /// each gate. The circuit is validated before any gate is applied.
    pub fn apply_circuit_observed<F>(&mut self, circuit: &Circuit, mut observer: F) -> Result<()>
    where
        F: FnMut(usize, &StateVector),
    {
        circuit.validate(self.n_qubits)?;
        for (i, g) in circuit.iter().enumerate() {
            self.apply_unchecked(g);
            observer(i, self);
        }
        Ok(())
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::Config(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}")))
    }
}

/// `e^{iθ}`, exact for multiples of π/2 so that S and S† stay exact.
fn phase_factor(theta: f64) -> Complex64 {
    if theta == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if theta == FRAC_PI_2 {
        Complex64::new(0.0, 1.0)
    } else if theta == -FRAC_PI_2 {
        Complex64::new(0.0, -1.0)
    } else if theta == PI || theta == -PI {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, theta)
    }
}

fn hadamard(amps: &mut [Complex64], qubit: usize) {
    let stride = 1 << qubit;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        }
    }
}

fn phase(amps: &mut [Complex64], qubit: usize, w: Complex64) {
    let stride = 1 << qubit;
    for block in amps.chunks_exact_mut(2 * stride) {
        block[stride..].iter_mut().for_each(|b| *b *= w);
    }
}

fn cnot(amps: &mut [Complex64], control: usize, target: usize) {
    let stride = 1 << target;
    let cmask = 1 << control;
    for (b, block) in amps.chunks_exact_mut(2 * stride).enumerate() {
        let base = b * 2 * stride;
        let (lo, hi) = block.split_at_mut(stride);
        if control > target {
            // control bit is constant across the block
            if base & cmask != 0 {
                lo.swap_with_slice(hi);
            }
        } else {
            for (j, (x, y)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if (base + j) & cmask != 0 {
                    std::mem::swap(x, y);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn zero_state() {
        let s = StateVector::zero(2).unwrap();
        assert_eq!(s.amplitudes(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let s = StateVector::zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1., 0.), c(0., 0.)]);
        let s = StateVector::zero(18).unwrap();
        assert_eq!(s.dim(), 262_144);
        assert_eq!(s.norm(), 1.0);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(StateVector::zero(0), Err(Error::Config(_))));
        assert!(matches!(StateVector::zero(25), Err(Error::Config(_))));
        assert!(StateVector::from_amplitudes(vec![c(1., 0.); 3]).is_err());
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        assert!(close(s.amplitudes(), &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)], 1e-15));
    }

    #[test]
    fn t_on_plus() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        s.apply(&Gate::t(0)).unwrap();
        let e = Complex64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4);
        assert!(close(s.amplitudes(), &[c(FRAC_1_SQRT_2, 0.), e], 1e-15));
    }

    #[test]
    fn cnot_truth_table() {
        // |10⟩ in ket order (q0=1, q1=0) is basis index 1.
        for (input, output) in [(0usize, 0usize), (1, 3), (2, 2), (3, 1)] {
            let mut amps = vec![c(0., 0.); 4];
            amps[input] = c(1., 0.);
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            s.apply(&Gate::cnot(0, 1)).unwrap();
            assert_eq!(s.amplitudes()[output], c(1., 0.), "input {input}");
        }
        // reversed orientation: control qubit 1
        let mut amps = vec![c(0., 0.); 4];
        amps[2] = c(1., 0.);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply(&Gate::cnot(1, 0)).unwrap();
        assert_eq!(s.amplitudes()[3], c(1., 0.));
    }

    #[test]
    fn bell_preparation_and_observer() {
        let mut s = StateVector::zero(2).unwrap();
        let circuit: Circuit = [Gate::h(0), Gate::cnot(0, 1)].into_iter().collect();
        let mut calls = Vec::new();
        s.apply_circuit_observed(&circuit, |i, _| calls.push(i)).unwrap();
        assert_eq!(calls, vec![0, 1]);
        let r = FRAC_1_SQRT_2;
        assert!(close(s.amplitudes(), &[c(r, 0.), c(0., 0.), c(0., 0.), c(r, 0.)], 1e-15));
    }

    #[test]
    fn empty_circuit_is_identity() {
        let mut rng = crate::rng::seeded(1);
        let s0 = StateVector::haar_random(3, &mut rng).unwrap();
        let mut s = s0.clone();
        s.apply_circuit(&Circuit::new()).unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn out_of_range_gate_leaves_state_untouched() {
        let mut s = StateVector::zero(2).unwrap();
        let circuit: Circuit = [Gate::h(0), Gate::h(2)].into_iter().collect();
        assert!(matches!(s.apply_circuit(&circuit), Err(Error::Usage(_))));
        assert_eq!(s, StateVector::zero(2).unwrap());
    }

    #[test]
    fn s_inverse_is_exact() {
        let mut rng = crate::rng::seeded(7);
        let s0 = StateVector::haar_random(4, &mut rng).unwrap();
        let mut s = s0.clone();
        s.apply(&Gate::s(2)).unwrap();
        s.apply(&Gate::s(2).inverse()).unwrap();
        assert_eq!(s, s0);
    }
}

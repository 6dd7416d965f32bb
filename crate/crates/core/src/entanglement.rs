//! Schmidt spectra, von Neumann entropy and the cut-averaged entropy S̄.
//!
//! A cut `k` splits the register into A = qubits `0..k` (low bits) and
//! B = qubits `k..N`. The amplitude array reshaped column-major as a
//! `d_A x d_B` matrix has the Schmidt coefficients as singular values.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::statevector::{Gate, StateVector};
use crate::{Error, Result};

const EIGEN_CLAMP: f64 = 1e-12;
const ENTROPY_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    /// Bits.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Two => "bits",
            LogBase::E => "nats",
        }
    }

    fn ln_base(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::E => 1.0,
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "bits" => Ok(LogBase::Two),
            "e" | "nats" => Ok(LogBase::E),
            other => Err(Error::Config(format!("log base must be 2 or e, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for LogBase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        })
    }
}

/// Contiguous cut: subsystem A holds qubits `0..cut`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition(usize);

impl Bipartition {
    pub fn new(cut: usize, n_qubits: usize) -> Result<Self> {
        if cut >= 1 && cut < n_qubits {
            Ok(Bipartition(cut))
        } else {
            Err(Error::Usage(format!("cut {cut} outside 1..{n_qubits}")))
        }
    }

    /// The equal (or, for odd N, nearly equal) split `N/2`.
    pub fn half(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits / 2, n_qubits)
    }

    pub fn cut(self) -> usize {
        self.0
    }

    /// All `N - 1` contiguous cuts.
    pub fn all(n_qubits: usize) -> impl Iterator<Item = Bipartition> {
        (1..n_qubits).map(Bipartition)
    }
}

/// Reduced-density-matrix eigenvalues, sorted non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSpectrum {
    probabilities: Vec<f64>,
}

impl EntanglementSpectrum {
    /// Sorts `values` descending and clamps round-off negatives to zero.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            if *v < 0.0 && *v >= -EIGEN_CLAMP {
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        EntanglementSpectrum { probabilities: values }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

pub fn schmidt_spectrum(state: &StateVector, cut: Bipartition) -> Result<EntanglementSpectrum> {
    let n = state.n_qubits();
    if cut.0 >= n {
        return Err(Error::Usage(format!("cut {} invalid for {n} qubits", cut.0)));
    }
    Ok(spectrum_unchecked(state, cut.0))
}

fn spectrum_unchecked(state: &StateVector, cut: usize) -> EntanglementSpectrum {
    let amps = state.amplitudes();
    let d_a = 1usize << cut;
    let d_b = amps.len() >> cut;
    // Keep the matrix tall; singular values are shape-symmetric.
    let m = if d_a >= d_b {
        DMatrix::from_column_slice(d_a, d_b, amps)
    } else {
        DMatrix::from_row_slice(d_b, d_a, amps)
    };
    let values = m.singular_values().iter().map(|s| s * s).collect();
    EntanglementSpectrum::from_values(values)
}

/// `-Σ p log p` over entries above 1e-15.
pub fn von_neumann_entropy(spectrum: &EntanglementSpectrum, base: LogBase) -> f64 {
    let nats: f64 = spectrum
        .probabilities
        .iter()
        .filter(|&&p| p > ENTROPY_FLOOR)
        .map(|&p| -p * p.ln())
        .sum();
    // -0.0 and tiny negatives from p slightly above 1
    (nats / base.ln_base()).max(0.0)
}

pub fn cut_entropy(state: &StateVector, cut: Bipartition, base: LogBase) -> Result<f64> {
    Ok(von_neumann_entropy(&schmidt_spectrum(state, cut)?, base))
}

/// Entropies of every contiguous cut `k = 1..N-1`, in cut order.
pub fn cut_entropies(state: &StateVector, base: LogBase) -> Vec<f64> {
    (1..state.n_qubits()).map(|k| von_neumann_entropy(&spectrum_unchecked(state, k), base)).collect()
}

/// Mean entropy over the `N - 1` contiguous cuts (S̄).
pub fn avg_bipartition_entropy(state: &StateVector, base: LogBase) -> Result<f64> {
    if state.n_qubits() < 2 {
        return Err(Error::Usage("average bipartition entropy needs at least 2 qubits".into()));
    }
    Ok(mean(&cut_entropies(state, base)))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Cuts whose entropy can change under `gate`: a gate on qubits `a < b`
/// straddles cuts `a+1..=b`; single-qubit gates straddle none.
pub fn affected_cuts(gate: &Gate) -> RangeInclusive<usize> {
    match gate.qubits() {
        (a, Some(b)) => (a.min(b) + 1)..=a.max(b),
        #[allow(clippy::reversed_empty_ranges)]
        _ => 1..=0,
    }
}

/// Per-cut entropy cache that refreshes only the cuts a gate touches.
#[derive(Clone, Debug)]
pub struct EntropyTracker {
    base: LogBase,
    cuts: Vec<f64>,
}

/// Entropies after a tentative gate, not yet committed to the tracker.
#[derive(Clone, Debug)]
pub struct Pending {
    range: RangeInclusive<usize>,
    values: Vec<f64>,
    mean: f64,
}

impl Pending {
    pub fn mean(&self) -> f64 {
        self.mean
    }
}

impl EntropyTracker {
    pub fn new(state: &StateVector, base: LogBase) -> Result<Self> {
        if state.n_qubits() < 2 {
            return Err(Error::Usage("entropy tracking needs at least 2 qubits".into()));
        }
        Ok(EntropyTracker { base, cuts: cut_entropies(state, base) })
    }

    pub fn mean(&self) -> f64 {
        mean(&self.cuts)
    }

    pub fn cut_entropies(&self) -> &[f64] {
        &self.cuts
    }

    pub fn base(&self) -> LogBase {
        self.base
    }

    /// Entropies of `state`, which must equal the tracked state with `gate`
    /// applied on top.
    pub fn evaluate(&self, state: &StateVector, gate: &Gate) -> Pending {
        let range = affected_cuts(gate);
        let values: Vec<f64> = range
            .clone()
            .map(|k| von_neumann_entropy(&spectrum_unchecked(state, k), self.base))
            .collect();
        let unchanged: f64 = self
            .cuts
            .iter()
            .enumerate()
            .filter(|(i, _)| !range.contains(&(i + 1)))
            .map(|(_, s)| s)
            .sum();
        let mean = (unchanged + values.iter().sum::<f64>()) / self.cuts.len() as f64;
        Pending { range, values, mean }
    }

    pub fn commit(&mut self, pending: Pending) {
        for (k, v) in pending.range.zip(pending.values) {
            self.cuts[k - 1] = v;
        }
    }

    /// Evaluate and commit in one step.
    pub fn update(&mut self, state: &StateVector, gate: &Gate) -> f64 {
        let p = self.evaluate(state, gate);
        let m = p.mean;
        self.commit(p);
        m
    }
}

//! Metropolis entanglement cooling.
//!
//! Starting from a scrambled state, random gates are proposed and kept with
//! the Metropolis rule on the cut-averaged entropy S̄: downhill (or flat)
//! moves are always accepted, uphill moves with probability `e^{-β ΔS}`.
//! Rejected gates are undone. The run ends when S̄ reaches the target, when
//! the accepted-gate budget is spent, or when the proposal cap binds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{EntropySeries, Phase};
use crate::circuits::{random_clifford_gate, random_universal_gate};
use crate::entanglement::{EntropyTracker, LogBase};
use crate::statevector::{Circuit, Gate, StateVector};
use crate::{Error, Result};

/// S̄ below `target_entropy + ZERO_ENTROPY_TOL` counts as disentangled.
pub const ZERO_ENTROPY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalSet {
    #[default]
    CliffordOnly,
    Universal,
}

/// How a rejected proposal is undone.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restore {
    /// Apply the gate's exact inverse.
    #[default]
    Inverse,
    /// Copy back a snapshot taken before the proposal.
    Snapshot,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingConfig {
    pub beta: f64,
    pub accepted_budget: usize,
    pub proposal_set: ProposalSet,
    pub proposal_cap: usize,
    pub target_entropy: f64,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default)]
    pub restore: Restore,
}

impl CoolingConfig {
    /// β = 10⁴, 40 N² accepted Clifford gates, at most 2000 N² proposals.
    pub fn standard(n_qubits: usize) -> Self {
        let n2 = n_qubits * n_qubits;
        CoolingConfig {
            beta: 1e4,
            accepted_budget: 40 * n2,
            proposal_set: ProposalSet::CliffordOnly,
            proposal_cap: 2000 * n2,
            target_entropy: 0.0,
            log_base: LogBase::Two,
            restore: Restore::Inverse,
        }
    }

    /// β = 0 with 10 N² gates: every proposal is accepted, i.e. a random
    /// Clifford circuit applied after heating.
    pub fn infinite_temperature(n_qubits: usize) -> Self {
        let budget = 10 * n_qubits * n_qubits;
        CoolingConfig { beta: 0.0, accepted_budget: budget, proposal_cap: budget, ..Self::standard(n_qubits) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.accepted_budget == 0 {
            return Err(Error::Config("accepted_budget must be at least 1".into()));
        }
        if self.proposal_cap < self.accepted_budget {
            return Err(Error::Config(format!(
                "proposal_cap {} below accepted_budget {}",
                self.proposal_cap, self.accepted_budget
            )));
        }
        Ok(())
    }
}

/// Probability of keeping a move that changes S̄ by `delta`.
pub fn acceptance_probability(delta: f64, beta: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-beta * delta).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub gate: Gate,
    /// S̄ after the step (the old value when rejected).
    pub entropy: f64,
    /// S̄ of the proposed state minus S̄ before it.
    pub delta: f64,
}

pub fn propose_gate<R: Rng + ?Sized>(set: ProposalSet, n_qubits: usize, rng: &mut R) -> Gate {
    match set {
        ProposalSet::CliffordOnly => random_clifford_gate(n_qubits, rng),
        ProposalSet::Universal => random_universal_gate(n_qubits, rng),
    }
}

/// One proposal. `tracker` must describe `state` on entry and does so again
/// on return.
pub fn metropolis_step<R: Rng + ?Sized>(
    state: &mut StateVector,
    tracker: &mut EntropyTracker,
    config: &CoolingConfig,
    rng: &mut R,
) -> StepOutcome {
    let gate = propose_gate(config.proposal_set, state.n_qubits(), rng);
    let old = tracker.mean();
    let snapshot = match config.restore {
        Restore::Snapshot => Some(state.clone()),
        Restore::Inverse => None,
    };
    state.apply_unchecked(&gate);
    let pending = tracker.evaluate(state, &gate);
    let delta = pending.mean() - old;
    let accepted = delta <= 0.0 || rng.random::<f64>() < acceptance_probability(delta, config.beta);
    if accepted {
        tracker.commit(pending);
        StepOutcome { accepted, gate, entropy: tracker.mean(), delta }
    } else {
        match snapshot {
            Some(s) => *state = s,
            None => state.apply_unchecked(&gate.inverse()),
        }
        StepOutcome { accepted, gate, entropy: old, delta }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingResult {
    /// Accepted gates in order.
    pub circuit: Circuit,
    /// S̄ after each accepted gate; padded with the final value up to the
    /// budget when the target was reached early.
    pub entropy_series: EntropySeries,
    pub initial_entropy: f64,
    pub final_entropy: f64,
    pub accepted: usize,
    pub proposed: usize,
    pub reached_zero: bool,
    /// The proposal cap ended the run before the budget was spent.
    pub cap_exhausted: bool,
}

/// Runs the cooling loop on `state` in place.
pub fn run_cooling<R: Rng + ?Sized>(
    state: &mut StateVector,
    config: &CoolingConfig,
    rng: &mut R,
) -> Result<CoolingResult> {
    config.validate()?;
    let mut tracker = EntropyTracker::new(state, config.log_base)?;
    let initial_entropy = tracker.mean();
    let done = |s: f64| s < config.target_entropy + ZERO_ENTROPY_TOL;

    let mut circuit = Circuit::with_capacity(config.accepted_budget);
    let mut series = Vec::with_capacity(config.accepted_budget);
    let mut current = initial_entropy;
    let mut proposed = 0;
    let mut reached_zero = done(current);
    let mut cap_exhausted = false;

    while !reached_zero && circuit.len() < config.accepted_budget {
        if proposed >= config.proposal_cap {
            cap_exhausted = true;
            break;
        }
        let step = metropolis_step(state, &mut tracker, config, rng);
        proposed += 1;
        if step.accepted {
            circuit.push(step.gate);
            current = step.entropy;
            series.push(current);
            reached_zero = done(current);
        }
    }
    let accepted = circuit.len();
    if reached_zero {
        series.resize(config.accepted_budget.max(series.len()), current);
    }
    Ok(CoolingResult {
        circuit,
        entropy_series: EntropySeries::new(Phase::Cooling, series),
        initial_entropy,
        final_entropy: current,
        accepted,
        proposed,
        reached_zero,
        cap_exhausted,
    })
}

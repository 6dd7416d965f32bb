//! One realization of each experiment, from seed to result.
//!
//! Every function here is a pure function of the configuration, the point
//! `(N, n_T)` and the realization seed, which is what lets ensembles run in
//! any order and still reproduce bit-identically.

use serde::{Deserialize, Serialize};
use tdope_core::analysis::{temporal_variance, EntropySeries, Phase};
use tdope_core::circuits::{random_clifford_block, random_t_layer};
use tdope_core::cooling::{run_cooling, CoolingConfig};
use tdope_core::entanglement::{cut_entropies, schmidt_spectrum, Bipartition, EntropyTracker};
use tdope_core::ess::{spacing_ratios, SpacingRatios, DEFAULT_RANK_CUTOFF};
use tdope_core::rng::{self, Stream};
use tdope_core::{Circuit, StateVector};

use crate::config::{DopingLevel, ExperimentConfig};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingSummary {
    pub accepted: usize,
    pub proposed: usize,
    pub reached_zero: bool,
    pub cap_exhausted: bool,
    pub final_entropy: f64,
}

/// Everything recorded for one realization. Optional parts are filled in
/// by the commands that compute them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationRun {
    pub index: usize,
    pub seed: u64,
    pub gate_count: usize,
    /// S̄ right after heating.
    pub heated_entropy: f64,
    pub heating: Option<EntropySeries>,
    /// Half-cut spacing ratios of the heated state.
    pub ratios: Option<SpacingRatios>,
    /// Schmidt rank kept by the ratio cutoff.
    pub retained_rank: Option<usize>,
    pub cooling: Option<EntropySeries>,
    pub cooling_summary: Option<CoolingSummary>,
    pub temporal_variance: Option<f64>,
}

pub struct Heated {
    pub state: StateVector,
    pub circuit: Circuit,
    pub series: Option<EntropySeries>,
    pub entropy: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Applies the heating circuit for `(n, level, seed)`, optionally recording
/// S̄ every `stride` gates (and after the last one).
pub fn heat(cfg: &ExperimentConfig, n: usize, level: DopingLevel, seed: u64, record: bool) -> Result<Heated> {
    let circuit = cfg.circuit_spec(n, level, seed).build()?;
    let mut state = StateVector::zero(n)?;
    let series = if record {
        let stride = cfg.stride;
        let last = circuit.len().saturating_sub(1);
        let mut values = Vec::with_capacity(circuit.len() / stride + 1);
        if stride == 1 {
            let mut tracker = EntropyTracker::new(&state, cfg.log_base)?;
            let gates = circuit.gates();
            state.apply_circuit_observed(&circuit, |i, s| values.push(tracker.update(s, &gates[i])))?;
        } else {
            state.apply_circuit_observed(&circuit, |i, s| {
                if (i + 1) % stride == 0 || i == last {
                    values.push(mean(&cut_entropies(s, cfg.log_base)));
                }
            })?;
        }
        Some(EntropySeries::new(Phase::Heating, values))
    } else {
        state.apply_circuit(&circuit)?;
        None
    };
    let entropy = mean(&cut_entropies(&state, cfg.log_base));
    Ok(Heated { state, circuit, series, entropy })
}

pub fn half_cut_ratios(state: &StateVector) -> Result<(SpacingRatios, usize)> {
    let n = state.n_qubits();
    let spec = schmidt_spectrum(state, Bipartition::half(n)?)?;
    let p_max = spec.probabilities().first().copied().unwrap_or(0.0);
    let rank = spec.probabilities().iter().filter(|&&p| p >= DEFAULT_RANK_CUTOFF * p_max && p > 0.0).count();
    Ok((spacing_ratios(&spec, DEFAULT_RANK_CUTOFF), rank))
}

fn base_run(index: usize, seed: u64, h: &Heated) -> RealizationRun {
    RealizationRun {
        index,
        seed,
        gate_count: h.circuit.len(),
        heated_entropy: h.entropy,
        heating: None,
        ratios: None,
        retained_rank: None,
        cooling: None,
        cooling_summary: None,
        temporal_variance: None,
    }
}

/// Heating with the per-gate series and final half-cut ratios.
pub fn heat_run(cfg: &ExperimentConfig, n: usize, level: DopingLevel, index: usize) -> Result<RealizationRun> {
    let seed = cfg.seed(index);
    let h = heat(cfg, n, level, seed, true)?;
    let (ratios, rank) = half_cut_ratios(&h.state)?;
    Ok(RealizationRun { heating: h.series.clone(), ratios: Some(ratios), retained_rank: Some(rank), ..base_run(index, seed, &h) })
}

pub fn ess_run(cfg: &ExperimentConfig, n: usize, level: DopingLevel, index: usize) -> Result<RealizationRun> {
    let seed = cfg.seed(index);
    let h = heat(cfg, n, level, seed, false)?;
    let (ratios, rank) = half_cut_ratios(&h.state)?;
    Ok(RealizationRun { ratios: Some(ratios), retained_rank: Some(rank), ..base_run(index, seed, &h) })
}

fn cool_heated(
    h: &mut Heated,
    config: &CoolingConfig,
    seed: u64,
) -> Result<(EntropySeries, CoolingSummary)> {
    let r = run_cooling(&mut h.state, config, &mut rng::stream(seed, Stream::Cooling))?;
    let summary = CoolingSummary {
        accepted: r.accepted,
        proposed: r.proposed,
        reached_zero: r.reached_zero,
        cap_exhausted: r.cap_exhausted,
        final_entropy: r.final_entropy,
    };
    Ok((r.entropy_series, summary))
}

/// Heating followed by an infinite-temperature scrambling run; the temporal
/// variance is taken over that run.
pub fn fluct_run(cfg: &ExperimentConfig, n: usize, level: DopingLevel, index: usize) -> Result<RealizationRun> {
    let seed = cfg.seed(index);
    let mut h = heat(cfg, n, level, seed, false)?;
    let (series, summary) = cool_heated(&mut h, &cfg.fluct.for_size(n, cfg.log_base), seed)?;
    let var = temporal_variance(&series)?;
    Ok(RealizationRun {
        cooling: Some(series),
        cooling_summary: Some(summary),
        temporal_variance: Some(var),
        ..base_run(index, seed, &h)
    })
}

/// Heating followed by Metropolis cooling.
pub fn cool_run(cfg: &ExperimentConfig, n: usize, level: DopingLevel, index: usize) -> Result<RealizationRun> {
    let seed = cfg.seed(index);
    let mut h = heat(cfg, n, level, seed, false)?;
    let (series, summary) = cool_heated(&mut h, &cfg.cooling.for_size(n, cfg.log_base), seed)?;
    Ok(RealizationRun { cooling: Some(series), cooling_summary: Some(summary), ..base_run(index, seed, &h) })
}

/// The three stages of the amplitude-image pipeline: a Clifford-scrambled
/// state, the same state after `n_t` T gates, and that state scrambled
/// again by a fresh Clifford block.
pub fn render_stages(cfg: &ExperimentConfig, n: usize, n_t: usize, seed: u64) -> Result<[StateVector; 3]> {
    let block = cfg.block_size_for(n);
    let mut state = StateVector::zero(n)?;
    state.apply_circuit(&random_clifford_block(n, block, &mut rng::stream(seed, Stream::Heating)))?;
    let first = state.clone();
    state.apply_circuit(&random_t_layer(n, n_t, &mut rng::stream(seed, Stream::TLayer)))?;
    let second = state.clone();
    state.apply_circuit(&random_clifford_block(n, block, &mut rng::stream(seed, Stream::Scramble)))?;
    Ok([first, second, state])
}

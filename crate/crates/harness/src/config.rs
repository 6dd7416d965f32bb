//! Experiment configuration: one JSON document, every knob defaulted.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tdope_core::circuits::{default_block_size, CircuitSpec};
use tdope_core::colormap::Scale;
use tdope_core::cooling::{CoolingConfig, ProposalSet, Restore};
use tdope_core::entanglement::LogBase;
use tdope_core::ess::Binning;
use tdope_core::statevector::MAX_QUBITS;

use crate::error::{config_err, io_err, HarnessError, Result};

/// Number of T gates, or a fully universal circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "LevelRepr", into = "LevelRepr")]
pub enum DopingLevel {
    Count(usize),
    Universal,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LevelRepr {
    Count(usize),
    Name(String),
}

impl TryFrom<LevelRepr> for DopingLevel {
    type Error = String;
    fn try_from(r: LevelRepr) -> std::result::Result<Self, String> {
        match r {
            LevelRepr::Count(k) => Ok(DopingLevel::Count(k)),
            LevelRepr::Name(s) => s.parse(),
        }
    }
}

impl From<DopingLevel> for LevelRepr {
    fn from(l: DopingLevel) -> Self {
        match l {
            DopingLevel::Count(k) => LevelRepr::Count(k),
            DopingLevel::Universal => LevelRepr::Name("universal".into()),
        }
    }
}

impl FromStr for DopingLevel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "universal" | "u" => Ok(DopingLevel::Universal),
            t => t
                .parse()
                .map(DopingLevel::Count)
                .map_err(|_| format!("expected a T-gate count or \"universal\", got {s:?}")),
        }
    }
}

impl fmt::Display for DopingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DopingLevel::Count(k) => write!(f, "{k}"),
            DopingLevel::Universal => f.write_str("universal"),
        }
    }
}

impl DopingLevel {
    pub fn count(self) -> Option<usize> {
        match self {
            DopingLevel::Count(k) => Some(k),
            DopingLevel::Universal => None,
        }
    }

    /// Short form used in file names: `nt4`, `ntU`.
    pub fn tag(self) -> String {
        match self {
            DopingLevel::Count(k) => format!("nt{k}"),
            DopingLevel::Universal => "ntU".into(),
        }
    }
}

/// Cooling parameters with budgets given per `N²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoolingSettings {
    pub beta: f64,
    pub budget_per_n2: usize,
    pub proposal_cap_per_n2: usize,
    pub proposal_set: ProposalSet,
    pub restore: Restore,
}

impl Default for CoolingSettings {
    fn default() -> Self {
        CoolingSettings {
            beta: 1e4,
            budget_per_n2: 40,
            proposal_cap_per_n2: 2000,
            proposal_set: ProposalSet::CliffordOnly,
            restore: Restore::Inverse,
        }
    }
}

impl CoolingSettings {
    pub fn for_size(&self, n_qubits: usize, log_base: LogBase) -> CoolingConfig {
        let n2 = n_qubits * n_qubits;
        CoolingConfig {
            beta: self.beta,
            accepted_budget: self.budget_per_n2 * n2,
            proposal_set: self.proposal_set,
            proposal_cap: self.proposal_cap_per_n2 * n2,
            target_entropy: 0.0,
            log_base,
            restore: self.restore,
        }
    }
}

/// The infinite-temperature scrambling run used for temporal fluctuations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctSettings {
    pub gates_per_n2: usize,
    pub proposal_set: ProposalSet,
}

impl Default for FluctSettings {
    fn default() -> Self {
        FluctSettings { gates_per_n2: 10, proposal_set: ProposalSet::CliffordOnly }
    }
}

impl FluctSettings {
    pub fn for_size(&self, n_qubits: usize, log_base: LogBase) -> CoolingConfig {
        let gates = self.gates_per_n2 * n_qubits * n_qubits;
        CoolingConfig {
            beta: 0.0,
            accepted_budget: gates,
            proposal_cap: gates,
            proposal_set: self.proposal_set,
            log_base,
            ..CoolingConfig::standard(n_qubits)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSettings {
    pub scale: Scale,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings { scale: Scale::Log }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: Vec<usize>,
    pub n_t: Vec<DopingLevel>,
    pub realizations: usize,
    /// Realization `i` uses seed `child_seed(seed_base, first_realization + i)`
    /// at every `(N, n_T)` point.
    pub seed_base: u64,
    pub first_realization: u64,
    /// Gates per Clifford block; `None` means `10 N²`.
    pub block_size: Option<usize>,
    pub cooling: CoolingSettings,
    pub fluct: FluctSettings,
    pub binning: Binning,
    pub log_base: LogBase,
    pub render: RenderSettings,
    pub out: PathBuf,
    /// Record the heating entropy every `stride` gates (1 = every gate).
    pub stride: usize,
    /// Worker threads; 0 = one per core, 1 = serial.
    pub parallelism: usize,
    /// Universal-baseline manifest for `cool`; defaults to `<out>/baselines.json`.
    pub baseline: Option<PathBuf>,
    pub plot_script: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_qubits: vec![8, 10, 12],
            n_t: vec![
                DopingLevel::Count(0),
                DopingLevel::Count(4),
                DopingLevel::Count(8),
                DopingLevel::Count(16),
                DopingLevel::Universal,
            ],
            realizations: 50,
            seed_base: 2024,
            first_realization: 0,
            block_size: None,
            cooling: CoolingSettings::default(),
            fluct: FluctSettings::default(),
            binning: Binning::default(),
            log_base: LogBase::Two,
            render: RenderSettings::default(),
            out: PathBuf::from("out"),
            stride: 1,
            parallelism: 0,
            baseline: None,
            plot_script: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.into(), source })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits.is_empty() {
            return Err(config_err("n_qubits", "list must not be empty"));
        }
        for (i, &n) in self.n_qubits.iter().enumerate() {
            if !(2..=MAX_QUBITS).contains(&n) {
                return Err(config_err(format!("n_qubits[{i}]"), format!("{n} outside 2..={MAX_QUBITS}")));
            }
        }
        if self.n_t.is_empty() {
            return Err(config_err("n_t", "list must not be empty"));
        }
        if self.realizations == 0 {
            return Err(config_err("realizations", "must be at least 1"));
        }
        if self.block_size == Some(0) {
            return Err(config_err("block_size", "must be at least 1"));
        }
        if self.stride == 0 {
            return Err(config_err("stride", "must be at least 1"));
        }
        if self.cooling.beta.is_nan() || self.cooling.beta < 0.0 {
            return Err(config_err("cooling.beta", format!("must be >= 0, got {}", self.cooling.beta)));
        }
        if self.cooling.budget_per_n2 == 0 {
            return Err(config_err("cooling.budget_per_n2", "must be at least 1"));
        }
        if self.cooling.proposal_cap_per_n2 < self.cooling.budget_per_n2 {
            return Err(config_err("cooling.proposal_cap_per_n2", "must be at least cooling.budget_per_n2"));
        }
        if self.fluct.gates_per_n2 < 1 {
            return Err(config_err("fluct.gates_per_n2", "must be at least 1"));
        }
        self.binning.validate().map_err(|e| config_err("binning", e.to_string()))?;
        Ok(())
    }

    pub fn block_size_for(&self, n_qubits: usize) -> usize {
        self.block_size.unwrap_or_else(|| default_block_size(n_qubits))
    }

    pub fn seed(&self, index: usize) -> u64 {
        tdope_core::rng::child_seed(self.seed_base, self.first_realization + index as u64)
    }

    pub fn circuit_spec(&self, n_qubits: usize, level: DopingLevel, seed: u64) -> CircuitSpec {
        let spec = match level {
            DopingLevel::Count(k) => CircuitSpec::doped(n_qubits, k, seed),
            DopingLevel::Universal => CircuitSpec::universal(n_qubits, seed),
        };
        spec.with_block_size(self.block_size_for(n_qubits))
    }

    pub fn baseline_path(&self) -> PathBuf {
        self.baseline.clone().unwrap_or_else(|| self.out.join("baselines.json"))
    }

    /// `(N, n_T)` points in configuration order.
    pub fn points(&self) -> Vec<(usize, DopingLevel)> {
        self.n_qubits.iter().flat_map(|&n| self.n_t.iter().map(move |&l| (n, l))).collect()
    }
}

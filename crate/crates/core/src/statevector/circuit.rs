use serde::{Deserialize, Serialize};

use super::gate::Gate;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerLabel {
    CliffordBlockEnd,
    TLayer,
}

/// Provenance marker placed between gates; `position` is the number of gates
/// preceding it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub position: usize,
    pub label: MarkerLabel,
}

/// Ordered gate list with block/layer markers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    gates: Vec<Gate>,
    markers: Vec<Marker>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Circuit { gates: Vec::with_capacity(n), markers: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Place a marker after the gates pushed so far.
    pub fn mark(&mut self, label: MarkerLabel) {
        self.markers.push(Marker { position: self.gates.len(), label });
    }

    /// Append `other`, shifting its markers by the current gate count.
    pub fn append(&mut self, other: &Circuit) {
        let offset = self.gates.len();
        self.gates.extend_from_slice(&other.gates);
        self.markers.extend(
            other.markers.iter().map(|m| Marker { position: m.position + offset, label: m.label }),
        );
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Gate> {
        self.gates.iter()
    }

    pub fn count_where(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    /// Checks every gate against `n_qubits` and the marker ordering invariant.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for g in &self.gates {
            g.validate(n_qubits)?;
        }
        let ordered = self.markers.windows(2).all(|w| w[0].position <= w[1].position);
        let in_range = self.markers.last().is_none_or(|m| m.position <= self.gates.len());
        if !(ordered && in_range) {
            return Err(crate::Error::Usage("circuit markers out of order or past the end".into()));
        }
        Ok(())
    }

    pub(crate) fn from_parts(gates: Vec<Gate>, markers: Vec<Marker>) -> Self {
        Circuit { gates, markers }
    }
}

impl FromIterator<Gate> for Circuit {
    fn from_iter<I: IntoIterator<Item = Gate>>(iter: I) -> Self {
        Circuit { gates: iter.into_iter().collect(), markers: Vec::new() }
    }
}

impl<'a> IntoIterator for &'a Circuit {
    type Item = &'a Gate;
    type IntoIter = std::slice::Iter<'a, Gate>;

    fn into_iter(self) -> Self::IntoIter {
        self.gates.iter()
    }
}

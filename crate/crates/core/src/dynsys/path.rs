use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{sup_norm, DynError, MapSystem, State};

/// A time-indexed sequence of states plus named derived series (prices,
/// rates, allocations).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EquilibriumPath {
    pub states: Vec<Vec<f64>>,
    pub series: BTreeMap<String, Vec<f64>>,
    /// `|x_{t+1} - h(x_t)|` in the sup norm, one entry per transition, when
    /// the path was produced from a map.
    pub step_residuals: Vec<f64>,
    /// Largest adjustment applied to the free coordinate when re-anchoring a
    /// shot path onto the stable manifold.
    pub max_reanchor: f64,
}

impl EquilibriumPath {
    pub fn from_states(states: Vec<State>) -> Self {
        Self {
            states: states.into_iter().map(|s| s.iter().copied().collect()).collect(),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the last period.
    pub fn horizon(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn state(&self, t: usize) -> State {
        State::from_vec(self.states[t].clone())
    }

    pub fn terminal(&self) -> Option<State> {
        self.states.last().map(|s| State::from_vec(s.clone()))
    }

    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }

    pub fn with_series(mut self, name: &str, values: Vec<f64>) -> Self {
        self.series.insert(name.to_string(), values);
        self
    }

    /// `|x_{t+1} - h(x_t)|` for every transition, recomputed from `system`.
    pub fn forward_residuals(&self, system: &MapSystem) -> Result<Vec<f64>, DynError> {
        self.states
            .windows(2)
            .map(|w| {
                let next = system.apply(&State::from_vec(w[0].clone()))?;
                Ok(sup_norm(&(next - State::from_vec(w[1].clone()))))
            })
            .collect()
    }

    /// Sup-norm distance of the last state from `point`.
    pub fn terminal_deviation(&self, point: &State) -> Option<f64> {
        self.terminal().map(|s| sup_norm(&(s - point)))
    }
}

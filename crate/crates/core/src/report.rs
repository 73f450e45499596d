//! Serializable summaries shared by the models and the CLI.

use serde::{Deserialize, Serialize};

use crate::dynsys::{Classification, DeterminacyVerdict, SteadyState};
use crate::reduced_form::NecessityVerdict;

/// Comparison of an elasticity with the threshold above which a model
/// predicts local determinacy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub elasticity: f64,
    pub predicts_determinate: bool,
    /// Whether the prediction matches the eigenvalue count.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminacyReport {
    pub steady_state: Vec<f64>,
    pub residual_norm: f64,
    /// `(re, im)` pairs, decreasing modulus.
    pub eigenvalues: Vec<(f64, f64)>,
    pub verdict: DeterminacyVerdict,
    pub analytic_eigenvalues: Option<Vec<f64>>,
    pub bound: Option<BoundCheck>,
    /// Whether dividend injection rules out paths to the fundamental steady
    /// state; `None` when the model has no such step.
    pub necessity: Option<NecessityVerdict>,
    /// Overall verdict on equilibrium selection: the local verdict when the
    /// fundamental steady state is eliminated, `Indeterminate` otherwise.
    pub selection: Classification,
}

impl DeterminacyReport {
    pub fn new(ss: &SteadyState, verdict: DeterminacyVerdict, necessity: Option<NecessityVerdict>) -> Self {
        let selection = match necessity {
            Some(n) if !n.is_eliminated() => Classification::Indeterminate,
            _ => verdict.classification,
        };
        Self {
            steady_state: ss.point.iter().copied().collect(),
            residual_norm: ss.residual_norm,
            eigenvalues: ss.eigenvalues.iter().map(|z| (z.re, z.im)).collect(),
            verdict,
            analytic_eigenvalues: None,
            bound: None,
            necessity,
            selection,
        }
    }

    pub fn with_analytic_eigenvalues(mut self, values: Vec<f64>) -> Self {
        self.analytic_eigenvalues = Some(values);
        self
    }

    pub fn with_bound(mut self, bound: BoundCheck) -> Self {
        self.bound = Some(bound);
        self
    }

    /// Largest distance between the computed and analytic eigenvalues after
    /// sorting both by modulus.
    pub fn eigenvalue_gap(&self) -> Option<f64> {
        let analytic = self.analytic_eigenvalues.as_ref()?;
        let mut a: Vec<f64> = analytic.clone();
        a.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).unwrap_or(std::cmp::Ordering::Equal));
        if a.len() != self.eigenvalues.len() {
            return Some(f64::INFINITY);
        }
        Some(
            self.eigenvalues
                .iter()
                .zip(&a)
                .map(|(&(re, im), &x)| ((re - x).powi(2) + im * im).sqrt())
                .fold(0.0, f64::max),
        )
    }
}

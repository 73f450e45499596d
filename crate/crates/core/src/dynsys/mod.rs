//! Fixed points, Jacobians, eigenvalue counting and saddle-path construction
//! for low-dimensional nonlinear maps.
//!
//! A model hands this module either an explicit map `x' = h(x)`
//! ([`MapSystem`]) or an implicit one `H(x, x') = 0` ([`ImplicitSystem`]),
//! together with the indices of its predetermined coordinates. Everything
//! here is a pure function of its inputs.

mod backward;
mod determinacy;
mod fixed_point;
mod implicit;
mod linalg;
mod path;
mod shooting;

use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backward::backward_iterate;
pub use determinacy::{classify_determinacy, classify_eigenvalues, DEFAULT_HYPERBOLICITY_MARGIN};
pub use fixed_point::{find_fixed_point, steady_state_at, NewtonOptions};
pub use implicit::ImplicitSystem;
pub use linalg::{eigenvalues, jacobian_fd, left_eigenvector, spectral_radius};
pub use path::EquilibriumPath;
pub use shooting::{shooting_deviation, solve_saddle_path, ShotOutcome, ShootingOptions};

pub type State = DVector<f64>;
pub type MapFn = Arc<dyn Fn(&State) -> State + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&State) -> DMatrix<f64> + Send + Sync>;
pub type AdmissibleFn = Arc<dyn Fn(&State) -> bool + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("map returned {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite evaluation at {point:?}")]
    NonFiniteEvaluation { point: Vec<f64> },
    #[error("Newton iteration stopped after {iterations} iterations with residual {residual:e} at {point:?}")]
    NoConvergence { iterations: usize, residual: f64, point: Vec<f64> },
    #[error("singular Jacobian at {point:?}")]
    SingularJacobian { point: Vec<f64> },
    #[error("target steady state is {classification}, not locally determinate")]
    NotDeterminate { classification: Classification },
    #[error("no sign change of the shooting function on [{lo}, {hi}] (deviations {dev_lo:e}, {dev_hi:e})")]
    ShootingFailed { lo: f64, hi: f64, dev_lo: f64, dev_hi: f64 },
    #[error("path ends {deviation:e} away from the steady state (tolerance {tol:e})")]
    TerminalDeviation { deviation: f64, tol: f64 },
    #[error("inverse map undefined at {point:?}: {reason}")]
    InverseUndefined { point: Vec<f64>, reason: String },
    #[error("{free} free coordinates; shooting handles at most one")]
    TooManyFreeCoordinates { free: usize },
}

/// Explicit autonomous map `x_{t+1} = h(x_t)`.
#[derive(Clone)]
pub struct MapSystem {
    dimension: usize,
    map: MapFn,
    predetermined: Vec<usize>,
    analytic_jacobian: Option<JacobianFn>,
    admissible: Option<AdmissibleFn>,
}

impl fmt::Debug for MapSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSystem")
            .field("dimension", &self.dimension)
            .field("predetermined", &self.predetermined)
            .field("analytic_jacobian", &self.analytic_jacobian.is_some())
            .field("admissible", &self.admissible.is_some())
            .finish()
    }
}

impl MapSystem {
    /// `predetermined` lists the coordinates fixed by history; the rest are
    /// forward-looking (jump) variables.
    pub fn new<F>(dimension: usize, predetermined: Vec<usize>, map: F) -> Result<Self, DynError>
    where
        F: Fn(&State) -> State + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(DynError::InvalidArgument("dimension must be positive".into()));
        }
        let mut sorted = predetermined.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != predetermined.len() || sorted.iter().any(|&i| i >= dimension) {
            return Err(DynError::InvalidArgument(format!(
                "predetermined indices {predetermined:?} invalid for dimension {dimension}"
            )));
        }
        Ok(Self {
            dimension,
            map: Arc::new(map),
            predetermined: sorted,
            analytic_jacobian: None,
            admissible: None,
        })
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&State) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.analytic_jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Restricts the economically meaningful region (positive prices, etc.).
    pub fn with_admissible<A>(mut self, admissible: A) -> Self
    where
        A: Fn(&State) -> bool + Send + Sync + 'static,
    {
        self.admissible = Some(Arc::new(admissible));
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn predetermined(&self) -> &[usize] {
        &self.predetermined
    }

    pub fn predetermined_count(&self) -> usize {
        self.predetermined.len()
    }

    pub fn free_coordinates(&self) -> Vec<usize> {
        (0..self.dimension).filter(|i| !self.predetermined.contains(i)).collect()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.analytic_jacobian.is_some()
    }

    /// Evaluates the map, checking shape and finiteness.
    pub fn apply(&self, x: &State) -> Result<State, DynError> {
        self.check_len(x.len())?;
        let y = (self.map)(x);
        self.check_len(y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(DynError::NonFiniteEvaluation { point: x.iter().copied().collect() });
        }
        Ok(y)
    }

    pub fn analytic_jacobian(&self, x: &State) -> Option<DMatrix<f64>> {
        self.analytic_jacobian.as_ref().map(|j| j(x))
    }

    pub fn is_admissible(&self, x: &State) -> bool {
        x.iter().all(|v| v.is_finite()) && self.admissible.as_ref().map_or(true, |a| a(x))
    }

    /// Jacobian at `x`: analytic when attached, central differences otherwise.
    pub fn jacobian(&self, x: &State, step: f64) -> Result<DMatrix<f64>, DynError> {
        match self.analytic_jacobian(x) {
            Some(j) => Ok(j),
            None => jacobian_fd(self, x, step),
        }
    }

    /// Plain forward iteration; stops with an error at the first non-finite value.
    pub fn iterate(&self, x0: &State, steps: usize) -> Result<Vec<State>, DynError> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(x0.clone());
        for _ in 0..steps {
            let next = self.apply(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    fn check_len(&self, got: usize) -> Result<(), DynError> {
        if got != self.dimension {
            return Err(DynError::DimensionMismatch { expected: self.dimension, got });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    LocallyDeterminate,
    Indeterminate,
    NoConvergentPath,
    NonHyperbolic,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::LocallyDeterminate => "locally determinate",
            Classification::Indeterminate => "indeterminate",
            Classification::NoConvergentPath => "no convergent path",
            Classification::NonHyperbolic => "non-hyperbolic",
        };
        f.write_str(s)
    }
}

/// Eigenvalue counts relative to the unit circle and the resulting verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminacyVerdict {
    pub stable_count: usize,
    pub unstable_count: usize,
    pub on_circle_count: usize,
    pub predetermined_count: usize,
    pub classification: Classification,
}

impl DeterminacyVerdict {
    pub fn dimension(&self) -> usize {
        self.stable_count + self.unstable_count + self.on_circle_count
    }

    pub fn is_determinate(&self) -> bool {
        self.classification == Classification::LocallyDeterminate
    }
}

/// A fixed point together with its local linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub point: State,
    pub residual_norm: f64,
    pub jacobian: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    pub verdict: DeterminacyVerdict,
}

impl SteadyState {
    /// Re-classifies with a different predetermined count or margin.
    pub fn classify(&self, predetermined_count: usize, margin: f64) -> DeterminacyVerdict {
        classify_eigenvalues(&self.eigenvalues, predetermined_count, margin)
    }

    pub fn eigenvalue_moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.norm()).collect()
    }
}

pub(crate) fn sup_norm(v: &State) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

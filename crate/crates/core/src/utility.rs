//! Two-period preferences described through the marginal rate of
//! substitution `M = U_1 / U_2` and its partial derivatives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Preferences over `(c1, c2)`. Quasi-concavity means `M_1 < 0 < M_2`.
pub trait Preferences: Send + Sync + fmt::Debug {
    fn mrs(&self, c1: f64, c2: f64) -> f64;

    /// `(dM/dc1, dM/dc2)`.
    fn mrs_partials(&self, c1: f64, c2: f64) -> (f64, f64);

    /// Inverse elasticity of substitution `-c1 M_1 / M` (valid when `M` is
    /// homogeneous of degree zero).
    fn inverse_elasticity(&self, c1: f64, c2: f64) -> f64 {
        -c1 * self.mrs_partials(c1, c2).0 / self.mrs(c1, c2)
    }

    /// Closed-form young consumption for wage `w` and gross return `r`, when known.
    fn closed_form_consumption(&self, _wage: f64, _rate: f64) -> Option<f64> {
        None
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    /// `log c1 + beta log c2`
    Log { beta: f64 },
    /// `(c1^(1-1/e) + beta c2^(1-1/e)) / (1-1/e)`
    Ces { beta: f64, eis: f64 },
    #[serde(skip)]
    Custom(Arc<dyn Preferences>),
}

impl fmt::Debug for UtilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilitySpec::Log { beta } => f.debug_struct("Log").field("beta", beta).finish(),
            UtilitySpec::Ces { beta, eis } => f.debug_struct("Ces").field("beta", beta).field("eis", eis).finish(),
            UtilitySpec::Custom(p) => f.debug_tuple("Custom").field(p).finish(),
        }
    }
}

impl UtilitySpec {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            UtilitySpec::Log { beta } => check_beta(beta),
            UtilitySpec::Ces { beta, eis } => {
                check_beta(beta)?;
                if !(eis > 0.0 && eis.is_finite()) {
                    return Err(format!("eis must be positive, got {eis}"));
                }
                Ok(())
            }
            UtilitySpec::Custom(ref p) => {
                // sample quasi-concavity on a small grid
                for &c1 in &[0.1, 0.5, 1.0, 2.0] {
                    for &c2 in &[0.1, 0.5, 1.0, 2.0] {
                        let (m1, m2) = p.mrs_partials(c1, c2);
                        if !(p.mrs(c1, c2) > 0.0 && m1 < 0.0 && m2 > 0.0) {
                            return Err(format!("custom preferences fail M > 0, M_1 < 0 < M_2 at ({c1}, {c2})"));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Elasticity of intertemporal substitution when it is a constant.
    pub fn constant_eis(&self) -> Option<f64> {
        match *self {
            UtilitySpec::Log { .. } => Some(1.0),
            UtilitySpec::Ces { eis, .. } => Some(eis),
            UtilitySpec::Custom(_) => None,
        }
    }
}

fn check_beta(beta: f64) -> Result<(), String> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(format!("beta must be positive, got {beta}"))
    }
}

impl Preferences for UtilitySpec {
    fn mrs(&self, c1: f64, c2: f64) -> f64 {
        match *self {
            UtilitySpec::Log { beta } => c2 / (beta * c1),
            UtilitySpec::Ces { beta, eis } => (c2 / c1).powf(1.0 / eis) / beta,
            UtilitySpec::Custom(ref p) => p.mrs(c1, c2),
        }
    }

    fn mrs_partials(&self, c1: f64, c2: f64) -> (f64, f64) {
        match *self {
            UtilitySpec::Log { .. } => {
                let m = self.mrs(c1, c2);
                (-m / c1, m / c2)
            }
            UtilitySpec::Ces { eis, .. } => {
                let m = self.mrs(c1, c2);
                (-m / (eis * c1), m / (eis * c2))
            }
            UtilitySpec::Custom(ref p) => p.mrs_partials(c1, c2),
        }
    }

    fn closed_form_consumption(&self, wage: f64, rate: f64) -> Option<f64> {
        match *self {
            UtilitySpec::Log { beta } => Some(wage / (1.0 + beta)),
            UtilitySpec::Ces { beta, eis } => Some(wage / (1.0 + beta.powf(eis) * rate.powf(eis - 1.0))),
            UtilitySpec::Custom(ref p) => p.closed_form_consumption(wage, rate),
        }
    }
}

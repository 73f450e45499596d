//! Intensive-form production `F(k, 1) = A g(k)` for constant-returns
//! technologies. Depreciation is left to the models that use it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{bisect, BisectOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProductionError {
    #[error("invalid production parameter: {0}")]
    Invalid(String),
    #[error("marginal product never equals {target} on k in [{lo:e}, {hi:e}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Technology {
    /// `g(k) = k^alpha`
    CobbDouglas { alpha: f64 },
    /// `g(k) = (alpha k^rho + 1 - alpha)^(1/rho)`, `rho = (e - 1)/e`
    Ces { alpha: f64, elasticity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductionSpec {
    #[serde(default = "one")]
    pub tfp: f64,
    pub technology: Technology,
}

fn one() -> f64 {
    1.0
}

/// Capital-labor ratios probed when inverting the marginal product.
pub const K_RANGE: (f64, f64) = (1e-12, 1e12);

impl ProductionSpec {
    pub fn cobb_douglas(tfp: f64, alpha: f64) -> Self {
        Self { tfp, technology: Technology::CobbDouglas { alpha } }
    }

    pub fn ces(tfp: f64, alpha: f64, elasticity: f64) -> Self {
        Self { tfp, technology: Technology::Ces { alpha, elasticity } }
    }

    pub fn validate(&self) -> Result<(), ProductionError> {
        if !(self.tfp > 0.0 && self.tfp.is_finite()) {
            return Err(ProductionError::Invalid(format!("tfp must be positive, got {}", self.tfp)));
        }
        let alpha = match self.technology {
            Technology::CobbDouglas { alpha } => alpha,
            Technology::Ces { alpha, elasticity } => {
                if !(elasticity > 0.0 && elasticity.is_finite()) {
                    return Err(ProductionError::Invalid(format!("elasticity must be positive, got {elasticity}")));
                }
                alpha
            }
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ProductionError::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(())
    }

    /// `(alpha, rho)`; `rho = None` means Cobb-Douglas.
    fn shape(&self) -> (f64, Option<f64>) {
        match self.technology {
            Technology::CobbDouglas { alpha } => (alpha, None),
            Technology::Ces { alpha, elasticity } => {
                let rho = (elasticity - 1.0) / elasticity;
                if rho.abs() < 1e-12 {
                    (alpha, None)
                } else {
                    (alpha, Some(rho))
                }
            }
        }
    }

    /// CES pieces without overflow: with `s = rho ln k`, returns `(x, m, s)`
    /// where `x = alpha + (1-alpha) e^{-s}`, `m = k` when `s > 0`, and
    /// `x = alpha e^s + 1 - alpha`, `m = 1` otherwise; in both cases
    /// `alpha k^rho + 1 - alpha = m^rho x`.
    fn ces_parts(alpha: f64, r: f64, k: f64) -> (f64, f64, f64) {
        let s = r * k.ln();
        if s > 0.0 {
            (alpha + (1.0 - alpha) * (-s).exp(), k, s)
        } else {
            (alpha * s.exp() + 1.0 - alpha, 1.0, s)
        }
    }

    /// `F(k, 1)`.
    pub fn output(&self, k: f64) -> f64 {
        let (alpha, rho) = self.shape();
        self.tfp
            * match rho {
                None => k.powf(alpha),
                Some(r) => {
                    let (x, m, _) = Self::ces_parts(alpha, r, k);
                    m * x.powf(1.0 / r)
                }
            }
    }

    pub fn marginal(&self, k: f64) -> f64 {
        let (alpha, rho) = self.shape();
        self.tfp
            * match rho {
                None => alpha * k.powf(alpha - 1.0),
                Some(r) => {
                    // alpha k^(rho-1) (alpha k^rho + 1 - alpha)^(1/rho - 1)
                    let (x, m, s) = Self::ces_parts(alpha, r, k);
                    let lead = if m == 1.0 { s.exp() / k } else { 1.0 };
                    alpha * lead * x.powf((1.0 - r) / r)
                }
            }
    }

    pub fn curvature(&self, k: f64) -> f64 {
        let (alpha, rho) = self.shape();
        self.tfp
            * match rho {
                None => alpha * (alpha - 1.0) * k.powf(alpha - 2.0),
                Some(r) => {
                    // -alpha (1-alpha) (1-rho) k^(rho-2) (alpha k^rho + 1 - alpha)^(1/rho - 2)
                    let (x, m, s) = Self::ces_parts(alpha, r, k);
                    let lead = if m == 1.0 { s.exp() / (k * k) } else { (-s).exp() / k };
                    -alpha * (1.0 - alpha) * (1.0 - r) * lead * x.powf((1.0 - 2.0 * r) / r)
                }
            }
    }

    /// Wage `F(k, 1) - k F_K(k, 1)`.
    pub fn wage(&self, k: f64) -> f64 {
        let (alpha, rho) = self.shape();
        match rho {
            None => self.tfp * (1.0 - alpha) * k.powf(alpha),
            Some(r) => {
                // (1-alpha) (alpha k^rho + 1 - alpha)^(1/rho - 1)
                let (x, m, s) = Self::ces_parts(alpha, r, k);
                let lead = if m == 1.0 { 1.0 } else { k * (-s).exp() };
                self.tfp * (1.0 - alpha) * lead * x.powf((1.0 - r) / r)
            }
        }
    }

    /// Elasticity of substitution between capital and labor at `k`, from
    /// `1/e = -k g g'' / (g' (g - k g'))`.
    pub fn elasticity(&self, k: f64) -> f64 {
        let (f, f1, f2) = (self.output(k), self.marginal(k), self.curvature(k));
        -f1 * (f - k * f1) / (k * f * f2)
    }

    /// Solves `F_K(k, 1) = target` on [`K_RANGE`]; the marginal product is
    /// strictly decreasing.
    pub fn inverse_marginal(&self, target: f64) -> Result<f64, ProductionError> {
        let (lo, hi) = K_RANGE;
        let g = |x: f64| self.marginal(x.exp()) - target;
        let (a, b) = (lo.ln(), hi.ln());
        if !(target > 0.0) || !(g(a) > 0.0 && g(b) < 0.0) {
            return Err(ProductionError::NoRoot { target, lo, hi });
        }
        let root = bisect(g, a, b, BisectOptions::default()).map_err(|_| ProductionError::NoRoot { target, lo, hi })?;
        // polish in levels so the residual is measured where callers use it
        let k = root.x.exp();
        let h = |k: f64| self.marginal(k) - target;
        let (klo, khi) = (k * (1.0 - 1e-9), k * (1.0 + 1e-9));
        if h(klo) > 0.0 && h(khi) < 0.0 {
            if let Ok(r) = bisect(h, klo, khi, BisectOptions::default()) {
                return Ok(r.x);
            }
        }
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-5 * x;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_differences() {
        for spec in [ProductionSpec::cobb_douglas(1.3, 0.3), ProductionSpec::ces(0.9, 0.4, 0.6), ProductionSpec::ces(1.0, 0.35, 2.5)] {
            for k in [0.2, 1.0, 3.7] {
                assert!((fd(|x| spec.output(x), k) - spec.marginal(k)).abs() < 1e-7 * spec.marginal(k).max(1.0));
                assert!((fd(|x| spec.marginal(x), k) - spec.curvature(k)).abs() < 1e-6 * spec.curvature(k).abs().max(1.0));
                assert!((spec.wage(k) - (spec.output(k) - k * spec.marginal(k))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn elasticity_recovers_parameter() {
        assert!((ProductionSpec::cobb_douglas(1.0, 0.3).elasticity(2.0) - 1.0).abs() < 1e-12);
        assert!((ProductionSpec::ces(1.0, 0.3, 0.4).elasticity(2.0) - 0.4).abs() < 1e-10);
    }

    #[test]
    fn inverse_marginal_round_trip() {
        let spec = ProductionSpec::cobb_douglas(1.0, 1.0 / 3.0);
        let k = spec.inverse_marginal(0.205).unwrap();
        assert!((spec.marginal(k) - 0.205).abs() < 1e-13);
        assert!((k - (1.0 / (3.0 * 0.205f64)).powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn extreme_ces_stays_finite() {
        let spec = ProductionSpec::ces(1.0, 0.33, 0.02);
        for k in [1e-12, 1e-6, 0.3, 1.0, 4.0, 1e6, 1e12] {
            let v = [spec.output(k), spec.marginal(k), spec.curvature(k), spec.wage(k)];
            assert!(v.iter().all(|x| x.is_finite()), "k={k}: {v:?}");
        }
        assert!(spec.inverse_marginal(0.545).is_ok());
        assert!((spec.marginal(1e-12) - 0.33f64.powf(1.0 / -49.0)).abs() < 1e-9);
    }

    #[test]
    fn ces_below_unity_has_bounded_marginal_product() {
        // marginal product tends to A alpha^(1/rho) as k -> 0
        let spec = ProductionSpec::ces(1.0, 0.5, 0.5);
        assert!(spec.inverse_marginal(100.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(ProductionSpec::cobb_douglas(1.0, 1.0).validate().is_err());
        assert!(ProductionSpec::ces(1.0, 0.3, -1.0).validate().is_err());
        assert!(ProductionSpec::cobb_douglas(0.0, 0.3).validate().is_err());
    }
}

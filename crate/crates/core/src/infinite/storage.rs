//! Log-utility agents splitting wealth between a risky iid storage technology
//! with finitely many outcomes and a risk-free bond.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduced_form::{Adapter, ReducedFormEconomy, SavingInterval};
use crate::roots::{bisect, BisectOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StorageError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no portfolio keeps every outcome positive at R = {rate}")]
    InfeasiblePortfolio { rate: f64 },
    #[error("every outcome weakly dominates the bond at R = {rate}; the portfolio problem is unbounded")]
    UnboundedPortfolio { rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZDistribution {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ZDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Self {
        Self { values, probs }
    }

    pub fn equiprobable(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { values, probs: vec![1.0 / n as f64; n] }
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.values.iter().zip(&self.probs).map(|(&z, &p)| p * f(z)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|z| z)
    }

    pub fn mean_inverse(&self) -> f64 {
        self.expect(|z| 1.0 / z)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_degenerate(&self) -> bool {
        let lo = self.min();
        self.values.iter().zip(&self.probs).all(|(&z, &p)| z == lo || p == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageRiskParams {
    pub beta: f64,
    pub z_dist: ZDistribution,
}

impl StorageRiskParams {
    pub fn new(beta: f64, z_dist: ZDistribution) -> Self {
        Self { beta, z_dist }
    }

    pub fn validate(&self) -> Result<(), StorageError> {
        let bad = |m: String| Err(StorageError::InvalidParams(m));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        let d = &self.z_dist;
        if d.values.is_empty() || d.values.len() != d.probs.len() {
            return bad(format!("{} outcomes but {} probabilities", d.values.len(), d.probs.len()));
        }
        if let Some(z) = d.values.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
            return bad(format!("productivity outcomes must be positive, got {z}"));
        }
        if let Some(p) = d.probs.iter().find(|p| !(**p >= 0.0)) {
            return bad(format!("probabilities must be nonnegative, got {p}"));
        }
        let total: f64 = d.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("probabilities sum to {total}, not 1"));
        }
        Ok(())
    }

    /// `1 / E[1/z]`
    pub fn fundamental_rate(&self) -> f64 {
        1.0 / self.z_dist.mean_inverse()
    }
}

/// Optimal share of wealth in storage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Portfolio {
    Optimal { eta: f64 },
    /// Every share in `[lo, hi]` is optimal (riskless storage paying `R`).
    Indifferent { lo: f64, hi: f64 },
}

impl Portfolio {
    pub fn eta(&self) -> Option<f64> {
        match *self {
            Portfolio::Optimal { eta } => Some(eta),
            Portfolio::Indifferent { .. } => None,
        }
    }

    /// Saving in the bubble, `1 - eta`, as an interval.
    pub fn bond_share(&self) -> SavingInterval {
        match *self {
            Portfolio::Optimal { eta } => SavingInterval::point(1.0 - eta),
            Portfolio::Indifferent { lo, hi } => SavingInterval::new(1.0 - hi, 1.0 - lo),
        }
    }
}

/// `E[(z - R)/(z eta + R(1 - eta))]`
pub fn portfolio_foc(params: &StorageRiskParams, rate: f64, eta: f64) -> f64 {
    params.z_dist.expect(|z| (z - rate) / (z * eta + rate * (1.0 - eta)))
}

/// Maximizer of `E[log(z eta + R(1 - eta))]` over `eta >= 0`, by bisection
/// on the first-order condition over `[0, eta_max - 1e-12]`.
pub fn storage_portfolio(params: &StorageRiskParams, rate: f64) -> Result<Portfolio, StorageError> {
    let d = &params.z_dist;
    if !(rate > 0.0) || !(d.min() > 0.0) {
        return Err(StorageError::InfeasiblePortfolio { rate });
    }
    if d.is_degenerate() {
        let z = d.min();
        return Ok(if rate > z {
            Portfolio::Optimal { eta: 0.0 }
        } else if rate == z {
            Portfolio::Indifferent { lo: 0.0, hi: f64::INFINITY }
        } else {
            return Err(StorageError::UnboundedPortfolio { rate });
        });
    }
    if rate >= d.mean() {
        return Ok(Portfolio::Optimal { eta: 0.0 });
    }
    // largest share keeping z eta + R(1 - eta) > 0 for outcomes below R
    let eta_max = d
        .values
        .iter()
        .zip(&d.probs)
        .filter(|&(&z, &p)| z < rate && p > 0.0)
        .map(|(&z, _)| rate / (rate - z))
        .fold(f64::INFINITY, f64::min);
    if !eta_max.is_finite() {
        return Err(StorageError::UnboundedPortfolio { rate });
    }
    let hi = eta_max - 1e-12;
    let foc = |eta: f64| portfolio_foc(params, rate, eta);
    if foc(hi) >= 0.0 {
        return Ok(Portfolio::Optimal { eta: hi });
    }
    let root = bisect(foc, 0.0, hi, BisectOptions::default()).map_err(|_| StorageError::InfeasiblePortfolio { rate })?;
    Ok(Portfolio::Optimal { eta: root.x })
}

/// `G(R) = beta E[z eta(R) + R(1 - eta(R))]`; `NaN` where the portfolio is
/// unbounded.
pub fn storage_growth(params: &StorageRiskParams, rate: f64) -> f64 {
    match storage_portfolio(params, rate) {
        Ok(Portfolio::Optimal { eta }) => params.beta * params.z_dist.expect(|z| z * eta + rate * (1.0 - eta)),
        // riskless storage at R: the split does not matter
        Ok(Portfolio::Indifferent { .. }) => params.beta * rate,
        Err(_) => f64::NAN,
    }
}

pub fn storage_saving(params: &StorageRiskParams, rate: f64) -> SavingInterval {
    match storage_portfolio(params, rate) {
        Ok(p) => p.bond_share(),
        Err(_) => SavingInterval::point(f64::NAN),
    }
}

/// `beta E[z] E[1/z] > 1`
pub fn storage_bubble_condition(params: &StorageRiskParams) -> bool {
    params.beta * params.z_dist.mean() * params.z_dist.mean_inverse() > 1.0
}

pub fn storage_reduced_form(params: &StorageRiskParams) -> Result<Adapter, StorageError> {
    params.validate()?;
    let (p1, p2) = (params.clone(), params.clone());
    let r_f = params.fundamental_rate();
    let (zmin, mean) = (params.z_dist.min(), params.z_dist.mean());
    let economy = ReducedFormEconomy::new("storage_risk", move |r| storage_growth(&p1, r), move |r| storage_saving(&p2, r))
        .with_large_rate(mean);
    let bracket = if params.z_dist.is_degenerate() { (0.5 * r_f, 2.0 * r_f) } else { (0.5 * (zmin + r_f), mean) };
    Ok(Adapter {
        economy,
        fundamental_bracket: bracket,
        bubbly_upper: Some(mean),
        closed_form_fundamental: Some(r_f),
        closed_form_bubbly: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> StorageRiskParams {
        StorageRiskParams::new(0.9, ZDistribution::equiprobable(vec![0.5, 2.0]))
    }

    #[test]
    fn full_storage_at_fundamental_rate() {
        let p = two_point();
        assert!((p.fundamental_rate() - 0.8).abs() < 1e-15);
        let eta = storage_portfolio(&p, 0.8).unwrap().eta().unwrap();
        assert!((eta - 1.0).abs() < 1e-12);
        assert!(portfolio_foc(&p, 0.8, eta).abs() < 1e-12);
    }

    #[test]
    fn no_storage_above_mean() {
        let p = two_point();
        for r in [1.25, 1.5, 3.0] {
            assert_eq!(storage_portfolio(&p, r).unwrap(), Portfolio::Optimal { eta: 0.0 });
            assert!((storage_growth(&p, r) - 0.9 * r).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_distribution() {
        let p = StorageRiskParams::new(0.9, ZDistribution::equiprobable(vec![1.1]));
        assert!(matches!(storage_portfolio(&p, 1.1).unwrap(), Portfolio::Indifferent { .. }));
        assert_eq!(storage_portfolio(&p, 1.2).unwrap(), Portfolio::Optimal { eta: 0.0 });
        assert!(matches!(storage_portfolio(&p, 1.0), Err(StorageError::UnboundedPortfolio { .. })));
        assert!(!storage_bubble_condition(&p));
    }

    #[test]
    fn interior_share_maximizes() {
        let p = two_point();
        let r = 1.0;
        let eta = storage_portfolio(&p, r).unwrap().eta().unwrap();
        let obj = |e: f64| p.z_dist.expect(|z| (z * e + r * (1.0 - e)).ln());
        assert!(eta > 0.0 && eta < 1.0);
        assert!(obj(eta) >= obj(eta - 1e-4) && obj(eta) >= obj(eta + 1e-4));
    }
}

//! Equilibrium-condition residuals along computed paths and certificates
//! that dividend injection rules out paths to the fundamental steady state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::EquilibriumPath;
use crate::infinite::leverage::LeverageParams;
use crate::olg::samuelson::SamuelsonParams;
use crate::olg::tirole::{young_consumption, TiroleParams};
use crate::reduced_form::{check_necessity, NecessityVerdict};
use crate::utility::Preferences;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("no path verifier for model {0}")]
    UnknownModel(String),
    #[error("path shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Samuelson,
    Tirole,
    Kocherlakota,
    Leverage,
    StorageRisk,
    ReducedFormCustom,
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelId::Samuelson => "samuelson",
            ModelId::Tirole => "tirole",
            ModelId::Kocherlakota => "kocherlakota",
            ModelId::Leverage => "leverage",
            ModelId::StorageRisk => "storage_risk",
            ModelId::ReducedFormCustom => "reduced_form_custom",
        };
        f.write_str(s)
    }
}

/// Parameters of the models whose paths can be verified.
#[derive(Debug, Clone)]
pub enum PathModel<'a> {
    Samuelson(&'a SamuelsonParams),
    Tirole(&'a TiroleParams),
    Leverage(&'a LeverageParams),
}

impl PathModel<'_> {
    pub fn id(&self) -> ModelId {
        match self {
            PathModel::Samuelson(_) => ModelId::Samuelson,
            PathModel::Tirole(_) => ModelId::Tirole,
            PathModel::Leverage(_) => ModelId::Leverage,
        }
    }
}

/// Per-transition residuals; `None` where a condition does not apply (the
/// no-arbitrage rate at a zero price, or a condition the model lacks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub model: ModelId,
    pub euler: Vec<Option<f64>>,
    pub no_arbitrage: Vec<Option<f64>>,
    pub market_clearing: Vec<Option<f64>>,
    pub budget: Vec<Option<f64>>,
    pub max_residual: f64,
    /// Transition with the largest residual.
    pub worst_period: Option<usize>,
    pub tol: f64,
    pub passed: bool,
}

impl ResidualReport {
    fn assemble(
        model: ModelId,
        euler: Vec<Option<f64>>,
        no_arbitrage: Vec<Option<f64>>,
        market_clearing: Vec<Option<f64>>,
        budget: Vec<Option<f64>>,
        tol: f64,
    ) -> Self {
        let mut max_residual = 0.0;
        let mut worst_period = None;
        for series in [&euler, &no_arbitrage, &market_clearing, &budget] {
            for (t, r) in series.iter().enumerate() {
                if let Some(r) = *r {
                    // NaN counts as a failure
                    if !(r <= max_residual) {
                        max_residual = if r.is_nan() { f64::INFINITY } else { r };
                        worst_period = Some(t);
                    }
                }
            }
        }
        Self { model, euler, no_arbitrage, market_clearing, budget, max_residual, worst_period, tol, passed: max_residual <= tol }
    }

    /// Transitions whose residual in any category exceeds `threshold`.
    pub fn periods_above(&self, threshold: f64) -> Vec<usize> {
        let n = self.euler.len();
        (0..n)
            .filter(|&t| {
                [&self.euler, &self.no_arbitrage, &self.market_clearing, &self.budget]
                    .iter()
                    .any(|s| s.get(t).copied().flatten().is_some_and(|r| !(r <= threshold)))
            })
            .collect()
    }
}

fn series<'a>(path: &'a EquilibriumPath, name: &str, len: usize) -> Result<&'a [f64], DiagnosticsError> {
    let s = path.series(name).ok_or_else(|| DiagnosticsError::ShapeMismatch(format!("missing series {name}")))?;
    if s.len() < len {
        return Err(DiagnosticsError::ShapeMismatch(format!("series {name} has {} entries, need {len}", s.len())));
    }
    Ok(s)
}

/// Evaluates every equilibrium condition of `model` at every transition of `path`.
pub fn verify_path(model: &PathModel<'_>, path: &EquilibriumPath, tol: f64) -> Result<ResidualReport, DiagnosticsError> {
    if path.len() < 2 {
        return Err(DiagnosticsError::ShapeMismatch(format!("need at least two dates, got {}", path.len())));
    }
    match model {
        PathModel::Samuelson(p) => verify_samuelson(p, path, tol),
        PathModel::Tirole(p) => verify_tirole(p, path, tol),
        PathModel::Leverage(p) => verify_leverage(p, path, tol),
    }
}

/// Same as [`verify_path`] but addressed by identifier; models without a
/// path representation are rejected.
pub fn verify_path_by_id(id: ModelId, model: &PathModel<'_>, path: &EquilibriumPath, tol: f64) -> Result<ResidualReport, DiagnosticsError> {
    if id != model.id() {
        return Err(DiagnosticsError::UnknownModel(format!("{id} (parameters are for {})", model.id())));
    }
    verify_path(model, path, tol)
}

/// Levels `P, D, c_young, c_old, R`. Euler: `P_t c_o,t+1 = beta c_y,t (P_{t+1} + D_{t+1})`
/// with consumption recomputed from prices; budget: reported consumption
/// against endowment plus asset flows; market clearing: goods.
fn verify_samuelson(p: &SamuelsonParams, path: &EquilibriumPath, tol: f64) -> Result<ResidualReport, DiagnosticsError> {
    let n = path.len();
    let price = series(path, "P", n)?;
    let div = series(path, "D", n)?;
    let cy = series(path, "c_young", n)?;
    let co = series(path, "c_old", n)?;
    let rate = series(path, "R", n - 1)?;
    let growth: Vec<f64> = (0..n).map(|t| p.g.powi(t as i32)).collect();
    let young = |t: usize| p.a * growth[t] - price[t];
    let old = |t: usize| p.b * growth[t] + price[t] + div[t];
    let mut euler = Vec::with_capacity(n - 1);
    let mut arb = Vec::with_capacity(n - 1);
    let mut market = Vec::with_capacity(n - 1);
    let mut budget = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let (yc, oc) = (young(t), old(t + 1));
        let lhs = price[t] * oc;
        let rhs = p.beta * yc * (price[t + 1] + div[t + 1]);
        euler.push(Some(if price[t] > 0.0 {
            (lhs - rhs).abs() / lhs.abs().max(1.0)
        } else {
            // zero price: the rate must be the one implied by the Euler equation
            (p.beta * rate[t] * yc - oc).abs() / oc.abs().max(1.0)
        }));
        arb.push((price[t] > 0.0).then(|| (rate[t] * price[t] - price[t + 1] - div[t + 1]).abs() / price[t].max(1.0)));
        let endowment = (p.a + p.b) * growth[t + 1] + div[t + 1];
        market.push(Some((cy[t + 1] + co[t + 1] - endowment).abs() / endowment.max(1.0)));
        let b = (cy[t] - yc).abs().max((co[t + 1] - oc).abs());
        budget.push(Some(b / oc.abs().max(1.0)));
    }
    Ok(ResidualReport::assemble(ModelId::Samuelson, euler, arb, market, budget, tol))
}

/// States `(k, P/N, D/N)`. Euler: first-order condition of the young with
/// consumption from the budget `c = omega - P/N - G k'`; no-arbitrage and
/// capital-market clearing are the first two rows of the implicit system;
/// budget is the dividend law.
fn verify_tirole(p: &TiroleParams, path: &EquilibriumPath, tol: f64) -> Result<ResidualReport, DiagnosticsError> {
    if path.states.iter().any(|s| s.len() != 3) {
        return Err(DiagnosticsError::ShapeMismatch("Tirole states have three coordinates".into()));
    }
    let n = path.len();
    let g = p.g;
    let mut euler = Vec::with_capacity(n - 1);
    let mut arb = Vec::with_capacity(n - 1);
    let mut market = Vec::with_capacity(n - 1);
    let mut budget = Vec::with_capacity(n - 1);
    for t in 0..n - 1 {
        let (x, y) = (&path.states[t], &path.states[t + 1]);
        let wage = p.wage(x[0]);
        let rate = p.f1(y[0]);
        let c = wage - x[1] - g * y[0];
        let foc = p.utility.mrs(c, rate * (wage - c)) - rate;
        euler.push(Some(if c > 0.0 && c < wage { foc.abs() / rate.max(1.0) } else { f64::INFINITY }));
        let h1 = y[1] + y[2] - x[1] / g * rate;
        arb.push(Some(h1.abs() / x[1].abs().max(1.0)));
        let cy = young_consumption(p, x[0], y[0]).unwrap_or(f64::NAN);
        let h2 = x[1] + g * y[0] + cy - wage;
        market.push(Some(h2.abs() / wage.max(1.0)));
        budget.push(Some((y[2] - p.q() * x[2]).abs() / x[2].abs().max(1.0)));
    }
    Ok(ResidualReport::assemble(ModelId::Tirole, euler, arb, market, budget, tol))
}

/// States `(y, kappa D G^(-t-1))`. Wealth is rebuilt from labor-market
/// clearing `phi beta W_{t-1} = y_t G^t`, land pricing and the wealth law;
/// market clearing checks the labor market at `t+1`, budget checks the
/// dividend coordinate.
fn verify_leverage(p: &LeverageParams, path: &EquilibriumPath, tol: f64) -> Result<ResidualReport, DiagnosticsError> {
    if path.states.iter().any(|s| s.len() != 2) {
        return Err(DiagnosticsError::ShapeMismatch("leverage states have two coordinates".into()));
    }
    let n = path.len();
    let (phi, beta, g) = (p.phi(), p.beta, p.g);
    let dividend = path.states[0][1] * g / p.kappa();
    let mut market = Vec::with_capacity(n - 1);
    let mut budget = Vec::with_capacity(n - 1);
    let mut labor = 1.0;
    for t in 0..n - 1 {
        let (x, y) = (&path.states[t], &path.states[t + 1]);
        let wealth = (p.capital_return(x[0]) * x[0] * labor + dividend) / (1.0 - (1.0 - phi) * beta);
        labor *= g;
        market.push(Some((phi * beta * wealth / y[0] - labor).abs() / labor));
        budget.push(Some((y[1] - x[1] / g).abs() / x[1].abs().max(1.0)));
    }
    let none = vec![None; n - 1];
    Ok(ResidualReport::assemble(ModelId::Leverage, none.clone(), none, market, budget, tol))
}

pub const CERTIFICATE_HORIZONS: [usize; 3] = [10, 100, 1000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityCertificate {
    pub r_lim: f64,
    pub g_d: f64,
    pub g: f64,
    pub d0: f64,
    pub horizons: Vec<usize>,
    /// `log sum_{t <= T} D0 (G_d/R_lim)^t` at each horizon.
    pub log_partial_sums: Vec<f64>,
    /// `log(S_1000 / S_100)`
    pub observed_log_growth: f64,
    /// `900 log(G_d/R_lim)`
    pub predicted_log_growth: f64,
    /// Observed and predicted growth agree within 1% and both are positive.
    pub geometric_divergence: bool,
    pub verdict: NecessityVerdict,
}

impl NecessityCertificate {
    pub fn fires(&self) -> bool {
        self.verdict.is_eliminated()
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Partial present values of dividends `D0 G_d^t` discounted at `R_lim`,
/// accumulated in logs; the verdict is eliminated iff `R_lim < G_d < G`.
pub fn certify_elimination(r_lim: f64, g_d: f64, g: f64, d0: f64) -> Result<NecessityCertificate, DiagnosticsError> {
    if !(d0 > 0.0 && d0.is_finite()) {
        return Err(DiagnosticsError::Precondition(format!("D0 must be positive, got {d0}")));
    }
    if !(r_lim > 0.0 && g_d > 0.0 && g > 0.0) {
        return Err(DiagnosticsError::Precondition(format!("rates must be positive, got ({r_lim}, {g_d}, {g})")));
    }
    let log_ratio = (g_d / r_lim).ln();
    let last = *CERTIFICATE_HORIZONS.last().expect("non-empty");
    let mut acc = f64::NEG_INFINITY;
    let mut log_partial_sums = Vec::new();
    for t in 0..=last {
        acc = log_sum_exp(acc, d0.ln() + t as f64 * log_ratio);
        if CERTIFICATE_HORIZONS.contains(&t) {
            log_partial_sums.push(acc);
        }
    }
    let observed = log_partial_sums[2] - log_partial_sums[1];
    let predicted = (CERTIFICATE_HORIZONS[2] - CERTIFICATE_HORIZONS[1]) as f64 * log_ratio;
    Ok(NecessityCertificate {
        r_lim,
        g_d,
        g,
        d0,
        horizons: CERTIFICATE_HORIZONS.to_vec(),
        log_partial_sums,
        observed_log_growth: observed,
        predicted_log_growth: predicted,
        geometric_divergence: predicted > 0.0 && (observed - predicted).abs() <= 0.01 * predicted,
        verdict: check_necessity(r_lim, g_d, g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::olg::samuelson::samuelson_closed_form;

    #[test]
    fn closed_form_path_verifies() {
        let p = SamuelsonParams::new(3.0, 1.0, 0.5, 1.2);
        let path = samuelson_closed_form(&p, p.bubbly_price(), 50).unwrap().to_equilibrium_path();
        let report = verify_path(&PathModel::Samuelson(&p), &path, 1e-10).unwrap();
        assert!(report.passed, "{}", report.max_residual);
    }

    #[test]
    fn perturbed_price_detected() {
        let p = SamuelsonParams::new(3.0, 1.0, 0.5, 1.2);
        let mut path = samuelson_closed_form(&p, 0.2, 20).unwrap().to_equilibrium_path();
        path.series.get_mut("P").unwrap()[5] += 1e-3;
        let report = verify_path(&PathModel::Samuelson(&p), &path, 1e-10).unwrap();
        for t in [4, 5] {
            assert!(report.euler[t].unwrap() > 1e-4);
        }
    }

    #[test]
    fn autarky_path() {
        let p = SamuelsonParams::new(3.0, 1.0, 0.5, 1.2);
        let path = samuelson_closed_form(&p, 0.0, 20).unwrap().to_equilibrium_path();
        let report = verify_path(&PathModel::Samuelson(&p), &path, 1e-12).unwrap();
        assert!(report.no_arbitrage.iter().all(Option::is_none));
        assert!(report.euler.iter().all(|r| r.unwrap() < 1e-12));
    }

    #[test]
    fn certificate_examples() {
        let c = certify_elimination(0.8, 1.0, 1.2, 0.01).unwrap();
        assert!(c.fires() && c.geometric_divergence);
        let c = certify_elimination(1.3, 1.0, 1.2, 0.01).unwrap();
        assert!(!c.fires() && !c.geometric_divergence);
        let bound = (0.01_f64 / (1.0 - 1.0 / 1.3)).ln();
        assert!(c.log_partial_sums[2] < bound);
        assert!(certify_elimination(0.8, 1.0, 1.2, 0.0).is_err());
    }
}

//! Entrepreneurs with log utility who invest when an opportunity arrives
//! (probability `pi`) and borrow up to `lambda` times equity. Land is in unit
//! supply; `phi = pi lambda < 1` measures the friction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::{steady_state_at, DynError, MapSystem, State, SteadyState, DEFAULT_HYPERBOLICITY_MARGIN};
use crate::production::{ProductionError, ProductionSpec};
use crate::reduced_form::{check_necessity, NecessityVerdict};
use crate::report::{BoundCheck, DeterminacyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LeverageError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no capital-labor ratio solves the steady-state condition: {0}")]
    NoRoot(ProductionError),
    #[error("wage {omega} at the bubbly steady state is not positive")]
    DegenerateWage { omega: f64 },
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeverageParams {
    pub beta: f64,
    pub pi: f64,
    pub lambda: f64,
    pub delta: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub production: ProductionSpec,
    /// Constant land dividend in goods.
    #[serde(rename = "D", default)]
    pub d: f64,
}

impl LeverageParams {
    pub fn new(beta: f64, pi: f64, lambda: f64, delta: f64, g: f64, production: ProductionSpec) -> Self {
        Self { beta, pi, lambda, delta, g, production, d: 0.0 }
    }

    pub fn with_dividend(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn phi(&self) -> f64 {
        self.pi * self.lambda
    }

    /// `phi beta / (1 - beta + phi beta)`
    pub fn kappa(&self) -> f64 {
        let pb = self.phi() * self.beta;
        pb / (1.0 - self.beta + pb)
    }

    pub fn validate(&self) -> Result<(), LeverageError> {
        let bad = |m: String| Err(LeverageError::InvalidParams(m));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return bad(format!("pi must lie in (0, 1), got {}", self.pi));
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be at least 1, got {}", self.lambda));
        }
        if !(self.phi() < 1.0) {
            return bad(format!("phi = pi * lambda must be < 1, got {}", self.phi()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return bad(format!("delta must lie in [0, 1], got {}", self.delta));
        }
        if !(self.g > 1.0 && self.g.is_finite()) {
            return bad(format!("G must exceed 1, got {}", self.g));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return bad(format!("D must be nonnegative, got {}", self.d));
        }
        self.production.validate().map_err(|e| LeverageError::InvalidParams(e.to_string()))
    }

    /// Gross return on capital `f'(y) + 1 - delta`.
    pub fn capital_return(&self, y: f64) -> f64 {
        self.production.marginal(y) + 1.0 - self.delta
    }

    /// `G(y, R) = beta (phi (f'(y) + 1 - delta) + (1 - phi) R)`
    pub fn wealth_growth(&self, y: f64, rate: f64) -> f64 {
        self.beta * (self.phi() * self.capital_return(y) + (1.0 - self.phi()) * rate)
    }
}

/// Aggregates at one date; `r` is the rate from this date to the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeverageState {
    pub y: f64,
    pub omega: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "K_H")]
    pub k_h: f64,
    #[serde(rename = "K_L")]
    pub k_l: f64,
}

fn no_root(e: ProductionError) -> LeverageError {
    LeverageError::NoRoot(e)
}

/// Fundamental balanced growth at date 0: `phi f'(y) + 1 - delta = G/beta`,
/// `R = 1 - delta`, `P = 0`.
pub fn leverage_fundamental(params: &LeverageParams) -> Result<LeverageState, LeverageError> {
    params.validate()?;
    let target = (params.g / params.beta - 1.0 + params.delta) / params.phi();
    let y = params.production.inverse_marginal(target).map_err(no_root)?;
    let w = y / (params.phi() * params.beta);
    Ok(LeverageState {
        y,
        omega: params.production.wage(y),
        r: 1.0 - params.delta,
        p: 0.0,
        w: w * params.g,
        k_h: y,
        k_l: (1.0 - params.phi()) / params.phi() * y,
    })
}

/// Bubbly balanced growth at date 0: `f'(y) + 1 - delta = G / kappa`,
/// `R = G`, `P_t = ((1 - phi)/phi) y G^(t+1)`, `K_L = 0`.
pub fn leverage_bubbly(params: &LeverageParams) -> Result<LeverageState, LeverageError> {
    params.validate()?;
    let target = params.g / params.kappa() - 1.0 + params.delta;
    let y = params.production.inverse_marginal(target).map_err(no_root)?;
    let phi = params.phi();
    let p = (1.0 - phi) / phi * y * params.g;
    Ok(LeverageState {
        y,
        omega: params.production.wage(y),
        r: params.g,
        p,
        w: p / ((1.0 - phi) * params.beta),
        k_h: y,
        k_l: 0.0,
    })
}

/// `P_t = ((1 - phi)/phi) y_b G^(t+1)`, by repeated multiplication.
pub fn leverage_bubbly_prices(params: &LeverageParams, horizon: usize) -> Result<Vec<f64>, LeverageError> {
    let s = leverage_bubbly(params)?;
    let mut out = vec![s.p];
    for t in 0..horizon {
        let next = out[t] * params.g;
        out.push(next);
    }
    Ok(out)
}

/// Map in `xi = (y, kappa D G^(-t-1))`:
/// `h1 = (kappa/G) xi1 (f'(xi1) + 1 - delta) + xi2`, `h2 = xi2 / G`.
/// Both coordinates are fixed by history.
pub fn leverage_injected_dynamics(params: &LeverageParams) -> Result<MapSystem, LeverageError> {
    params.validate()?;
    let (p1, p2) = (*params, *params);
    let c = params.kappa() / params.g;
    let g = params.g;
    Ok(MapSystem::new(2, vec![0, 1], move |x: &State| {
        State::from_vec(vec![c * x[0] * p1.capital_return(x[0]) + x[1], x[1] / g])
    })?
    .with_jacobian(move |x: &State| {
        let y = x[0];
        DMatrix::from_row_slice(
            2,
            2,
            &[c * (p2.capital_return(y) + y * p2.production.curvature(y)), 1.0, 0.0, 1.0 / g],
        )
    })
    .with_admissible(|x: &State| x[0] > 0.0 && x[1] >= 0.0))
}

/// `lambda_1 = 1 + (kappa/G) y_b f''(y_b)`, `lambda_2 = 1/G`.
pub fn leverage_eigenvalues(params: &LeverageParams, y_b: f64) -> (f64, f64) {
    (1.0 + params.kappa() / params.g * y_b * params.production.curvature(y_b), 1.0 / params.g)
}

/// `y_b f''(y_b) > -2 G / kappa`
pub fn leverage_curvature_condition(params: &LeverageParams, y_b: f64) -> bool {
    y_b * params.production.curvature(y_b) > -2.0 * params.g / params.kappa()
}

/// `(1/2)(1 - kappa (1 - delta)/G) / (1 + y_b f'(y_b)/omega_b)`: determinacy
/// holds when the capital-labor elasticity of substitution exceeds this.
pub fn leverage_es_bound(params: &LeverageParams, y_b: f64) -> Result<f64, LeverageError> {
    let omega = params.production.wage(y_b);
    if !(omega > 0.0) {
        return Err(LeverageError::DegenerateWage { omega });
    }
    let share = y_b * params.production.marginal(y_b) / omega;
    Ok(0.5 * (1.0 - params.kappa() * (1.0 - params.delta) / params.g) / (1.0 + share))
}

/// Fundamental rate `1 - delta` against constant dividends (`G_d = 1`).
pub fn leverage_necessity(params: &LeverageParams) -> NecessityVerdict {
    check_necessity(1.0 - params.delta, 1.0, params.g)
}

pub fn leverage_bubbly_steady_state(params: &LeverageParams) -> Result<SteadyState, LeverageError> {
    let s = leverage_bubbly(params)?;
    let map = leverage_injected_dynamics(params)?;
    Ok(steady_state_at(&map, &State::from_vec(vec![s.y, 0.0]), 1e-6, DEFAULT_HYPERBOLICITY_MARGIN)?)
}

pub fn leverage_determinacy(params: &LeverageParams) -> Result<DeterminacyReport, LeverageError> {
    let s = leverage_bubbly(params)?;
    let ss = leverage_bubbly_steady_state(params)?;
    let (l1, l2) = leverage_eigenvalues(params, s.y);
    let bound = leverage_es_bound(params, s.y)?;
    let es = params.production.elasticity(s.y);
    let predicts = es > bound;
    Ok(DeterminacyReport::new(&ss, ss.verdict, Some(leverage_necessity(params)))
        .with_analytic_eigenvalues(vec![l1, l2])
        .with_bound(BoundCheck {
            name: "elasticity_of_substitution".into(),
            bound,
            elasticity: es,
            predicts_determinate: predicts,
            agrees: predicts == ss.verdict.is_determinate(),
        }))
}

/// Which equilibrium a simulated path follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeverageRegime {
    /// `P = 0`, idle capital earns `1 - delta`.
    Fundamental,
    /// Land priced at `P_t = (1 - phi) beta W_t`, dividend `D` paid each date.
    Bubbly,
}

/// Largest accounting gaps at one date, scaled by `max(1, W_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccountingResiduals {
    pub wealth: f64,
    pub saving: f64,
    pub k_h: f64,
    pub k_l: f64,
    pub k: f64,
}

impl AccountingResiduals {
    pub fn max(&self) -> f64 {
        [self.wealth, self.saving, self.k_h, self.k_l, self.k].into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeveragePath {
    pub regime: LeverageRegime,
    pub states: Vec<LeverageState>,
    pub residuals: Vec<AccountingResiduals>,
    /// First date with `K_L < -1e-10` or `R` outside `[1 - delta, f'(y') + 1 - delta]`.
    pub inadmissible_from: Option<usize>,
}

impl LeveragePath {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(AccountingResiduals::max).fold(0.0, f64::max)
    }
}

/// Simulates aggregates for `horizon` dates from capital `K_H = y0`,
/// `K_L = k_l0` at date 0 (labor `G^0 = 1`), returning `horizon + 1` states.
/// Allocation each date follows
/// `K_H' = phi beta (X + P)`, `K_L' = (1 - phi) beta X - (1 - beta + phi beta) P`,
/// `K' = beta X - (1 - beta) P` with resources `X = Y + (1 - delta) K + D`.
pub fn leverage_simulate(
    params: &LeverageParams,
    regime: LeverageRegime,
    y0: f64,
    k_l0: f64,
    horizon: usize,
) -> Result<LeveragePath, LeverageError> {
    params.validate()?;
    if !(y0 > 0.0) {
        return Err(LeverageError::InvalidParams(format!("initial capital-labor ratio must be positive, got {y0}")));
    }
    let phi = params.phi();
    let beta = params.beta;
    let dividend = match regime {
        LeverageRegime::Fundamental => 0.0,
        LeverageRegime::Bubbly => params.d,
    };
    let mut labor = 1.0;
    let (mut k_h, mut k_l) = (y0, k_l0);
    let mut dates = Vec::with_capacity(horizon + 1);
    // (state, X_t) for each date; R filled in once P_{t+1} is known
    for _ in 0..=horizon {
        let y = k_h / labor;
        let x = params.production.marginal(y) * k_h + (1.0 - params.delta) * (k_h + k_l) + dividend;
        let (w, p) = match regime {
            LeverageRegime::Fundamental => (x, 0.0),
            LeverageRegime::Bubbly => {
                let w = x / (1.0 - (1.0 - phi) * beta);
                (w, (1.0 - phi) * beta * w)
            }
        };
        dates.push((
            LeverageState { y, omega: params.production.wage(y), r: f64::NAN, p, w, k_h, k_l },
            x - dividend,
        ));
        k_h = phi * beta * (x + p);
        k_l = (1.0 - phi) * beta * x - (1.0 - beta + phi * beta) * p;
        labor *= params.g;
    }
    let mut states: Vec<LeverageState> = dates.iter().map(|d| d.0).collect();
    let mut residuals = Vec::with_capacity(horizon);
    let mut inadmissible_from = None;
    for t in 0..horizon {
        let (s, next) = (states[t], states[t + 1]);
        let r = match regime {
            LeverageRegime::Fundamental => 1.0 - params.delta,
            LeverageRegime::Bubbly => (next.p + dividend) / s.p,
        };
        states[t].r = r;
        let x = dates[t].1 + dividend;
        let scale = s.w.abs().max(1.0);
        residuals.push(AccountingResiduals {
            wealth: (s.w - (dates[t].1 + s.p + dividend)).abs() / scale,
            saving: (next.k_h + next.k_l + s.p - beta * s.w).abs() / scale,
            k_h: (next.k_h - (phi * beta * x + phi * beta * s.p)).abs() / scale,
            k_l: (next.k_l - ((1.0 - phi) * beta * x - (1.0 - beta + phi * beta) * s.p)).abs() / scale,
            k: (next.k_h + next.k_l - (beta * x - (1.0 - beta) * s.p)).abs() / scale,
        });
        let band = r >= 1.0 - params.delta - 1e-12 && r <= params.capital_return(next.y) + 1e-12;
        if inadmissible_from.is_none() && (next.k_l < -1e-10 || !band) {
            inadmissible_from = Some(t);
        }
    }
    Ok(LeveragePath { regime, states, residuals, inadmissible_from })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> LeverageParams {
        LeverageParams::new(0.96, 0.1, 5.0, 0.1, 1.02, ProductionSpec::cobb_douglas(1.0, 1.0 / 3.0))
    }

    #[test]
    fn fundamental_capital_labor_ratio() {
        let p = example();
        let s = leverage_fundamental(&p).unwrap();
        let y = (1.0 / (3.0 * 0.325_f64)).powf(1.5);
        assert!((s.y - y).abs() < 1e-10);
        assert_eq!(s.r, 0.9);
        assert!((p.wealth_growth(s.y, s.r) - p.g).abs() < 1e-12);
    }

    #[test]
    fn bubbly_capital_labor_ratio() {
        let p = example();
        let s = leverage_bubbly(&p).unwrap();
        let mpk: f64 = 0.52 / 0.48 * 1.02 - 0.9;
        assert!((s.y - (1.0 / (3.0 * mpk)).powf(1.5)).abs() < 1e-10);
        assert!((p.wealth_growth(s.y, s.r) - p.g).abs() < 1e-12);
    }

    #[test]
    fn analytic_jacobian_matches_eigenvalues() {
        let p = example().with_dividend(0.01);
        let s = leverage_bubbly(&p).unwrap();
        let map = leverage_injected_dynamics(&p).unwrap();
        let j = map.analytic_jacobian(&State::from_vec(vec![s.y, 0.0])).unwrap();
        let (l1, l2) = leverage_eigenvalues(&p, s.y);
        assert!((j[(0, 0)] - l1).abs() < 1e-12 && (j[(1, 1)] - l2).abs() < 1e-15);
    }

    #[test]
    fn phi_at_least_one_rejected() {
        let p = LeverageParams::new(0.96, 0.25, 4.0, 0.1, 1.02, ProductionSpec::cobb_douglas(1.0, 0.3));
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("phi"));
    }

    #[test]
    fn bubbly_simulation_keeps_idle_capital_at_zero() {
        let p = example().with_dividend(0.01);
        let s = leverage_bubbly(&p).unwrap();
        let path = leverage_simulate(&p, LeverageRegime::Bubbly, s.y * 1.05, 0.0, 100).unwrap();
        assert!(path.max_residual() < 1e-10);
        assert!(path.states[1..].iter().all(|s| s.k_l.abs() < 1e-10));
    }
}

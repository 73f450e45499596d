//! Two-period OLG endowment economy with log utility, endowments
//! `(a G^t, b G^t)` and one unit of an asset paying `D_t = D0 G_d^t`.
//!
//! Detrended state: `xi = (P_t / G^t, D_t / G^t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::{
    solve_saddle_path, steady_state_at, DynError, EquilibriumPath, MapSystem, ShootingOptions, State, SteadyState,
    DEFAULT_HYPERBOLICITY_MARGIN,
};
use crate::reduced_form::{check_necessity, Adapter, NecessityVerdict, ReducedFormEconomy, SavingInterval};
use crate::report::DeterminacyReport;
use crate::roots::open_grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamuelsonError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("initial price {p0} outside [0, {upper}]")]
    InvalidInitialPrice { p0: f64, upper: f64 },
    #[error("interest rates have not settled: last change {change:e}")]
    NotConvergent { change: f64 },
    #[error("utility difference {difference:e} <= 0 for {who}")]
    OrderViolation { who: String, difference: f64 },
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamuelsonParams {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "G_d", default = "one")]
    pub g_d: f64,
    #[serde(rename = "D0", default)]
    pub d0: f64,
}

fn one() -> f64 {
    1.0
}

impl SamuelsonParams {
    pub fn new(a: f64, b: f64, beta: f64, g: f64) -> Self {
        Self { a, b, beta, g, g_d: 1.0, d0: 0.0 }
    }

    pub fn with_dividend(mut self, g_d: f64, d0: f64) -> Self {
        self.g_d = g_d;
        self.d0 = d0;
        self
    }

    pub fn validate(&self) -> Result<(), SamuelsonError> {
        for (name, v) in [("a", self.a), ("b", self.b), ("beta", self.beta), ("G", self.g), ("G_d", self.g_d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SamuelsonError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.d0 >= 0.0 && self.d0.is_finite()) {
            return Err(SamuelsonError::InvalidParams(format!("D0 must be nonnegative, got {}", self.d0)));
        }
        Ok(())
    }

    /// `q = G_d / G`.
    pub fn q(&self) -> f64 {
        self.g_d / self.g
    }

    /// Autarky interest rate `bG / (beta a)`.
    pub fn fundamental_rate(&self) -> f64 {
        self.b * self.g / (self.beta * self.a)
    }

    /// Detrended bubbly price `(beta a - b) / (1 + beta)`.
    pub fn bubbly_price(&self) -> f64 {
        (self.beta * self.a - self.b) / (1.0 + self.beta)
    }

    /// Detrended price at which the young would spend their whole endowment
    /// share `beta a / (1 + beta)`; the map has a pole there.
    pub fn price_ceiling(&self) -> f64 {
        self.beta * self.a / (1.0 + self.beta)
    }

    pub fn has_bubbly_steady_state(&self) -> bool {
        self.beta * self.a > self.b
    }

    pub fn necessity(&self) -> NecessityVerdict {
        check_necessity(self.fundamental_rate(), self.g_d, self.g)
    }
}

/// Equilibrium series in levels, with detrended prices and dividends.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SamuelsonPath {
    pub periods: usize,
    pub price: Vec<f64>,
    pub detrended_price: Vec<f64>,
    pub dividend: Vec<f64>,
    pub detrended_dividend: Vec<f64>,
    pub c_young: Vec<f64>,
    pub c_old: Vec<f64>,
    /// `R_t` for `t < periods`: no-arbitrage when `P_t > 0`, otherwise the
    /// rate implied by the Euler equation of the young.
    pub rate: Vec<f64>,
}

impl SamuelsonPath {
    /// Builds the level series from detrended prices and dividends.
    pub fn from_detrended(params: &SamuelsonParams, p: Vec<f64>, d: Vec<f64>) -> Self {
        assert_eq!(p.len(), d.len(), "price and dividend series differ in length");
        let n = p.len();
        let growth: Vec<f64> = (0..n).map(|t| params.g.powi(t as i32)).collect();
        let price: Vec<f64> = (0..n).map(|t| growth[t] * p[t]).collect();
        let dividend: Vec<f64> = (0..n).map(|t| growth[t] * d[t]).collect();
        let c_young: Vec<f64> = (0..n).map(|t| params.a * growth[t] - price[t]).collect();
        let c_old: Vec<f64> = (0..n).map(|t| params.b * growth[t] + price[t] + dividend[t]).collect();
        let rate = (0..n.saturating_sub(1))
            .map(|t| {
                if price[t] > 0.0 {
                    (price[t + 1] + dividend[t + 1]) / price[t]
                } else {
                    c_old[t + 1] / (params.beta * c_young[t])
                }
            })
            .collect();
        Self {
            periods: n.saturating_sub(1),
            price,
            detrended_price: p,
            dividend,
            detrended_dividend: d,
            c_young,
            c_old,
            rate,
        }
    }

    /// Detrended states plus the level series.
    pub fn to_equilibrium_path(&self) -> EquilibriumPath {
        let states = self
            .detrended_price
            .iter()
            .zip(&self.detrended_dividend)
            .map(|(&p, &d)| State::from_vec(vec![p, d]))
            .collect();
        EquilibriumPath::from_states(states)
            .with_series("P", self.price.clone())
            .with_series("D", self.dividend.clone())
            .with_series("c_young", self.c_young.clone())
            .with_series("c_old", self.c_old.clone())
            .with_series("R", self.rate.clone())
    }

    /// Inverse of [`SamuelsonPath::to_equilibrium_path`] on the state part.
    pub fn from_states(params: &SamuelsonParams, path: &EquilibriumPath) -> Self {
        Self::from_detrended(params, path.coordinate(0), path.coordinate(1))
    }

    /// Rates implied by the Euler equation, `(G/beta)(b + xi1' + xi2')/(a - xi1)`.
    pub fn euler_rates(&self, params: &SamuelsonParams) -> Vec<f64> {
        let (p, d) = (&self.detrended_price, &self.detrended_dividend);
        (0..p.len().saturating_sub(1))
            .map(|t| params.g / params.beta * (params.b + p[t + 1] + d[t + 1]) / (params.a - p[t]))
            .collect()
    }
}

/// Detrended closed form of the dividend-free equilibrium with initial price
/// `p0`: `1/p_t = (beta a/b)^t (1/p0 - c) + c`, `c = (1+beta)/(beta a - b)`.
fn detrended_closed_form(params: &SamuelsonParams, p0: f64, t: usize) -> f64 {
    if p0 == 0.0 {
        return 0.0;
    }
    let k = params.beta * params.a / params.b;
    let ba = params.beta * params.a - params.b;
    if ba == 0.0 {
        return 1.0 / (1.0 / p0 - (1.0 + params.beta) / params.b * t as f64);
    }
    let c = (1.0 + params.beta) / ba;
    1.0 / (k.powi(t as i32) * (1.0 / p0 - c) + c)
}

/// Dividend-free equilibrium with initial price `p0`, for `t = 0..=periods`.
pub fn samuelson_closed_form(params: &SamuelsonParams, p0: f64, periods: usize) -> Result<SamuelsonPath, SamuelsonError> {
    params.validate()?;
    if params.d0 != 0.0 {
        return Err(SamuelsonError::InvalidParams("closed form requires D0 = 0".into()));
    }
    let upper = if params.has_bubbly_steady_state() { params.bubbly_price() } else { 0.0 };
    if !(p0 >= 0.0 && p0 <= upper * (1.0 + 1e-14)) {
        return Err(SamuelsonError::InvalidInitialPrice { p0, upper });
    }
    let p: Vec<f64> = (0..=periods).map(|t| detrended_closed_form(params, p0, t)).collect();
    Ok(SamuelsonPath::from_detrended(params, p, vec![0.0; periods + 1]))
}

/// Forward iteration of the undetrended price recursion
/// `P_{t+1} = b G^{t+1} P_t / (beta a G^t - (1+beta) P_t)`.
pub fn samuelson_forward_prices(params: &SamuelsonParams, p0: f64, periods: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(periods + 1);
    let mut p = p0;
    out.push(p);
    for t in 0..periods {
        let gt = params.g.powi(t as i32);
        p = params.b * gt * params.g * p / (params.beta * params.a * gt - (1.0 + params.beta) * p);
        out.push(p);
    }
    out
}

/// The detrended dividend-injected map
/// `h(xi) = (b xi1/(beta a - (1+beta) xi1) - q xi2, q xi2)`
/// with the dividend coordinate predetermined.
pub fn samuelson_map(params: &SamuelsonParams) -> Result<MapSystem, SamuelsonError> {
    params.validate()?;
    let SamuelsonParams { a, b, beta, .. } = *params;
    let q = params.q();
    let ceiling = params.price_ceiling();
    let system = MapSystem::new(2, vec![1], move |x: &State| {
        State::from_vec(vec![b * x[0] / (beta * a - (1.0 + beta) * x[0]) - q * x[1], q * x[1]])
    })?
    .with_jacobian(move |x: &State| {
        let den = beta * a - (1.0 + beta) * x[0];
        nalgebra::DMatrix::from_row_slice(2, 2, &[b * beta * a / (den * den), -q, 0.0, q])
    })
    .with_admissible(move |x: &State| x[0] > 0.0 && x[0] < ceiling && x[1] >= 0.0);
    Ok(system)
}

/// The injected map together with the necessity flag for its parameters.
#[derive(Debug, Clone)]
pub struct InjectedSystem {
    pub system: MapSystem,
    pub necessity: NecessityVerdict,
}

pub fn samuelson_injected_system(params: &SamuelsonParams) -> Result<InjectedSystem, SamuelsonError> {
    Ok(InjectedSystem { system: samuelson_map(params)?, necessity: params.necessity() })
}

/// One-step inverse of the injected map:
/// `xi2 = xi2' / q`, `xi1 = beta a / (b / (xi1' + q xi2) + 1 + beta)`.
pub fn samuelson_inverse(params: &SamuelsonParams) -> impl Fn(&State) -> Result<State, DynError> {
    let SamuelsonParams { a, b, beta, .. } = *params;
    let q = params.q();
    move |next: &State| {
        if !(next[0] > 0.0) {
            return Err(DynError::InverseUndefined {
                point: next.iter().copied().collect(),
                reason: "price coordinate must be positive".into(),
            });
        }
        let x2 = next[1] / q;
        let den = next[0] + q * x2;
        if !(den > 0.0) {
            return Err(DynError::InverseUndefined {
                point: next.iter().copied().collect(),
                reason: "price plus dividend must be positive".into(),
            });
        }
        Ok(State::from_vec(vec![beta * a / (b / den + 1.0 + beta), x2]))
    }
}

/// Analytic steady states: `(0, 0)` and `((beta a - b)/(1 + beta), 0)`.
pub fn samuelson_steady_points(params: &SamuelsonParams) -> (State, State) {
    (State::from_vec(vec![0.0, 0.0]), State::from_vec(vec![params.bubbly_price(), 0.0]))
}

/// Fundamental and bubbly steady states, linearized with the analytic Jacobian.
pub fn samuelson_steady_states(params: &SamuelsonParams) -> Result<(SteadyState, SteadyState), SamuelsonError> {
    let sys = samuelson_map(params)?;
    let (f, b) = samuelson_steady_points(params);
    Ok((
        steady_state_at(&sys, &f, 1e-6, DEFAULT_HYPERBOLICITY_MARGIN)?,
        steady_state_at(&sys, &b, 1e-6, DEFAULT_HYPERBOLICITY_MARGIN)?,
    ))
}

/// Local verdict at the bubbly steady state combined with the necessity check
/// that removes paths to the fundamental one.
pub fn samuelson_determinacy(params: &SamuelsonParams) -> Result<DeterminacyReport, SamuelsonError> {
    let (_, bubbly) = samuelson_steady_states(params)?;
    Ok(DeterminacyReport::new(&bubbly, bubbly.verdict, Some(params.necessity()))
        .with_analytic_eigenvalues(vec![params.beta * params.a / params.b, params.q()]))
}

/// Unique injected equilibrium converging to the bubbly steady state.
pub fn samuelson_saddle_path(params: &SamuelsonParams, horizon: usize, tol: f64) -> Result<SamuelsonPath, SamuelsonError> {
    let sys = samuelson_map(params)?;
    let (_, bubbly) = samuelson_steady_states(params)?;
    let opts = ShootingOptions::new((0.0, params.price_ceiling()));
    let path = solve_saddle_path(&sys, &[params.d0], &bubbly, horizon, tol, &opts)?;
    Ok(SamuelsonPath::from_states(params, &path))
}

/// Limit of the Euler-implied interest rate along `path`.
pub fn samuelson_interest_limit(params: &SamuelsonParams, path: &SamuelsonPath) -> Result<f64, SamuelsonError> {
    let rates = path.euler_rates(params);
    match rates.as_slice() {
        [] => Err(SamuelsonError::NotConvergent { change: f64::INFINITY }),
        [r] => Ok(*r),
        [.., r0, r1] => {
            let change = (r1 - r0).abs();
            if change <= 1e-9 * r1.abs().max(1.0) {
                Ok(*r1)
            } else {
                Err(SamuelsonError::NotConvergent { change })
            }
        }
    }
}

/// Forward orbit of the injected map from a detrended price below the saddle
/// value, kept up to its last admissible date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalApproach {
    pub path: SamuelsonPath,
    /// Euler-implied rates along the admissible stretch.
    pub rates: Vec<f64>,
    /// True when the orbit left the admissible region (the price turned
    /// nonpositive) before `max_periods`.
    pub exited: bool,
    /// Sup-norm distance of the last admissible state from `(0, 0)`.
    pub closest_distance: f64,
}

impl FundamentalApproach {
    /// Rate at the last admissible transition, the closest approach to the
    /// fundamental steady state.
    pub fn limiting_rate(&self) -> Option<f64> {
        self.rates.last().copied()
    }
}

/// Iterates the injected map from `(p0, D0)` while the state stays
/// admissible. Started below the saddle-path price the orbit heads for
/// `(0, 0)`, and with `D0 > 0` the price eventually turns negative: such a
/// path cannot be an equilibrium.
pub fn samuelson_fundamental_approach(params: &SamuelsonParams, p0: f64, max_periods: usize) -> Result<FundamentalApproach, SamuelsonError> {
    let sys = samuelson_map(params)?;
    let start = State::from_vec(vec![p0, params.d0]);
    if !sys.is_admissible(&start) {
        return Err(SamuelsonError::InvalidInitialPrice { p0, upper: params.price_ceiling() });
    }
    let mut states = vec![start];
    let mut exited = false;
    for _ in 0..max_periods {
        let next = sys.apply(states.last().expect("non-empty"))?;
        if !sys.is_admissible(&next) {
            exited = true;
            break;
        }
        states.push(next);
    }
    let last = states.last().expect("non-empty");
    let closest_distance = last[0].abs().max(last[1].abs());
    let path = SamuelsonPath::from_detrended(
        params,
        states.iter().map(|s| s[0]).collect(),
        states.iter().map(|s| s[1]).collect(),
    );
    let rates = path.euler_rates(params);
    Ok(FundamentalApproach { path, rates, exited, closest_distance })
}

/// `F(p) = (1+beta) log(a - p) - beta log(beta a - (1+beta) p)`: generation
/// utility up to a constant as a function of the detrended price.
pub fn pareto_utility(params: &SamuelsonParams, p: f64) -> f64 {
    let beta = params.beta;
    (1.0 + beta) * (params.a - p).ln() - beta * (beta * params.a - (1.0 + beta) * p).ln()
}

/// `F'(p) = (1+beta) p / ((a - p)(beta a - (1+beta) p))`.
pub fn pareto_utility_slope(params: &SamuelsonParams, p: f64) -> f64 {
    let beta = params.beta;
    (1.0 + beta) * p / ((params.a - p) * (beta * params.a - (1.0 + beta) * p))
}

/// `log(1 + x) - x`, accurate for small `x`.
fn log1p_minus(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // alternating series -x^2/2 + x^3/3 - ...
        let mut term = -x * x;
        let mut sum = 0.0;
        for n in 2..40 {
            sum += term / n as f64;
            term *= -x;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

/// `F(p_high) - F(p_low)`, written so that it keeps full relative precision
/// when both prices are tiny.
pub fn pareto_difference(params: &SamuelsonParams, p_low: f64, p_high: f64) -> f64 {
    let beta = params.beta;
    let big_b = params.price_ceiling();
    let d = p_high - p_low;
    let u = d / (params.a - p_high);
    let v = d / (big_b - p_high);
    let linear = d * p_high / ((big_b - p_high) * (params.a - p_high));
    linear + beta * log1p_minus(v) - (1.0 + beta) * log1p_minus(u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub p0_low: f64,
    pub p0_high: f64,
    /// `log(b + P0') - log(b + P0)`.
    pub initial_old: f64,
    /// One entry per generation `t = 0..T-1`.
    pub generations: Vec<f64>,
    pub min_difference: f64,
    /// Smallest `F'(p)` over a 100-point grid of `(0, beta a/(1+beta))`.
    pub min_slope: f64,
}

/// Utility gains from moving from the equilibrium with initial price
/// `p0_low` to the one with `p0_high`.
pub fn pareto_compare(params: &SamuelsonParams, p0_low: f64, p0_high: f64, generations: usize) -> Result<ParetoReport, SamuelsonError> {
    params.validate()?;
    if !params.has_bubbly_steady_state() {
        return Err(SamuelsonError::InvalidParams("Pareto ranking needs beta a > b".into()));
    }
    let upper = params.bubbly_price();
    for p0 in [p0_low, p0_high] {
        if !(p0 >= 0.0 && p0 <= upper * (1.0 + 1e-14)) {
            return Err(SamuelsonError::InvalidInitialPrice { p0, upper });
        }
    }
    if p0_low > p0_high {
        return Err(SamuelsonError::InvalidParams(format!("need p0_low <= p0_high, got {p0_low} > {p0_high}")));
    }
    let initial_old = ((p0_high - p0_low) / (params.b + p0_low)).ln_1p();
    let diffs: Vec<f64> = (0..generations)
        .map(|t| {
            let lo = detrended_closed_form(params, p0_low, t);
            let hi = detrended_closed_form(params, p0_high, t);
            if lo == hi {
                0.0
            } else {
                pareto_difference(params, lo, hi)
            }
        })
        .collect();
    let min_difference = diffs.iter().copied().fold(initial_old, f64::min);
    let min_slope = open_grid(0.0, params.price_ceiling(), 100)
        .into_iter()
        .map(|p| pareto_utility_slope(params, p))
        .fold(f64::INFINITY, f64::min);
    if p0_low < p0_high {
        if !(initial_old > 0.0) {
            return Err(SamuelsonError::OrderViolation { who: "initial old".into(), difference: initial_old });
        }
        if let Some((t, &d)) = diffs.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(SamuelsonError::OrderViolation { who: format!("generation {t}"), difference: d });
        }
    }
    Ok(ParetoReport { p0_low, p0_high, initial_old, generations: diffs, min_difference, min_slope })
}

/// Saving rate out of young wealth `a G^t`: `(beta - bG/(aR)) / (1 + beta)`.
pub fn samuelson_saving_rate(params: &SamuelsonParams, rate: f64) -> f64 {
    (params.beta - params.b * params.g / (params.a * rate)) / (1.0 + params.beta)
}

pub fn samuelson_reduced_form(params: &SamuelsonParams) -> Adapter {
    let p = *params;
    let g = p.g;
    let economy = ReducedFormEconomy::new("samuelson", move |_| g, move |r| SavingInterval::point(samuelson_saving_rate(&p, r)))
        .with_large_rate(g);
    let r_f = params.fundamental_rate();
    Adapter {
        economy,
        fundamental_bracket: (r_f / 16.0, r_f * 16.0),
        bubbly_upper: Some(2.0 * g.max(r_f)),
        closed_form_fundamental: Some(r_f),
        closed_form_bubbly: Some(g),
    }
}

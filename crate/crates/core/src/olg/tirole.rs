//! Two-period OLG production economy with a dividend-paying asset in unit
//! supply. State `xi = (k, P/N, D/N)`; capital and the dividend scale are
//! predetermined, the per-capita price is free.
//!
//! `f(k) = F(k, 1) + (1 - delta) k`, `omega(k) = f(k) - k f'(k)`, and the
//! gross rate from `t` to `t+1` is `f'(k_{t+1})`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynsys::{
    eigenvalues, solve_saddle_path, steady_state_at, DynError, EquilibriumPath, ImplicitSystem, MapSystem,
    ShootingOptions, State, SteadyState, DEFAULT_HYPERBOLICITY_MARGIN,
};
use crate::production::{ProductionError, ProductionSpec};
use crate::reduced_form::{check_necessity, Adapter, NecessityVerdict, ReducedFormEconomy, SavingInterval};
use crate::report::{BoundCheck, DeterminacyReport};
use crate::roots::{bisect, log_grid, BisectOptions};
use crate::utility::{Preferences, UtilitySpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TiroleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Production(#[from] ProductionError),
    #[error("first-order condition has no root in (0, {wage}) at k = {k}, k' = {k_next}")]
    FocSolveFailed { k: f64, k_next: f64, wage: f64 },
    #[error("young consumption {c} is at a boundary of (0, {wage})")]
    DegenerateConsumption { c: f64, wage: f64 },
    #[error("no capital-labor ratio with zero asset demand on [{lo:e}, {hi:e}]")]
    NoFundamentalRoot { lo: f64, hi: f64 },
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiroleParams {
    pub production: ProductionSpec,
    pub delta: f64,
    pub utility: UtilitySpec,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "G_d", default = "one")]
    pub g_d: f64,
    #[serde(rename = "D0", default)]
    pub d0: f64,
    #[serde(rename = "N0", default = "one")]
    pub n0: f64,
}

fn one() -> f64 {
    1.0
}

impl TiroleParams {
    pub fn new(production: ProductionSpec, delta: f64, utility: UtilitySpec, g: f64) -> Self {
        Self { production, delta, utility, g, g_d: 1.0, d0: 0.0, n0: 1.0 }
    }

    pub fn with_dividend(mut self, g_d: f64, d0: f64) -> Self {
        self.g_d = g_d;
        self.d0 = d0;
        self
    }

    pub fn validate(&self) -> Result<(), TiroleError> {
        self.production.validate()?;
        self.utility.validate().map_err(TiroleError::InvalidParams)?;
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(TiroleError::InvalidParams(format!("delta must lie in [0, 1], got {}", self.delta)));
        }
        for (name, v) in [("G", self.g), ("G_d", self.g_d), ("N0", self.n0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TiroleError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.d0 >= 0.0 && self.d0.is_finite()) {
            return Err(TiroleError::InvalidParams(format!("D0 must be nonnegative, got {}", self.d0)));
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        self.g_d / self.g
    }

    pub fn f(&self, k: f64) -> f64 {
        self.production.output(k) + (1.0 - self.delta) * k
    }

    pub fn f1(&self, k: f64) -> f64 {
        self.production.marginal(k) + 1.0 - self.delta
    }

    pub fn f2(&self, k: f64) -> f64 {
        self.production.curvature(k)
    }

    pub fn wage(&self, k: f64) -> f64 {
        self.production.wage(k)
    }

    /// `omega'(k) = -k f''(k)`.
    pub fn wage_slope(&self, k: f64) -> f64 {
        -k * self.f2(k)
    }

    /// Capital-labor ratio with `f'(k) = rate`.
    pub fn capital_for_rate(&self, rate: f64) -> Result<f64, TiroleError> {
        Ok(self.production.inverse_marginal(rate - 1.0 + self.delta)?)
    }
}

/// Solves `M(c, R(omega - c)) = R` for young consumption by bisection on
/// `(1e-12 omega, (1 - 1e-12) omega)` with `R = f'(k')`.
pub fn young_consumption_foc(params: &TiroleParams, k: f64, k_next: f64) -> Result<f64, TiroleError> {
    let wage = params.wage(k);
    let rate = params.f1(k_next);
    let fail = TiroleError::FocSolveFailed { k, k_next, wage };
    if !(wage > 0.0 && rate > 0.0) {
        return Err(fail);
    }
    let foc = |c: f64| params.utility.mrs(c, rate * (wage - c)) - rate;
    bisect(foc, 1e-12 * wage, (1.0 - 1e-12) * wage, BisectOptions::default())
        .map(|r| r.x)
        .map_err(|_| fail)
}

/// Young consumption `c^y(k, k')`: closed form when the preferences provide
/// one, otherwise the numerical first-order condition.
pub fn young_consumption(params: &TiroleParams, k: f64, k_next: f64) -> Result<f64, TiroleError> {
    let wage = params.wage(k);
    let rate = params.f1(k_next);
    match params.utility.closed_form_consumption(wage, rate) {
        Some(c) if c.is_finite() && wage > 0.0 && rate > 0.0 => Ok(c),
        _ => young_consumption_foc(params, k, k_next),
    }
}

/// `c^y` with its partial derivatives `(dc/dk, dc/dk')` from the implicit
/// function theorem applied to the first-order condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionPartials {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn consumption_partials(params: &TiroleParams, k: f64, k_next: f64) -> Result<ConsumptionPartials, TiroleError> {
    let c = young_consumption(params, k, k_next)?;
    let wage = params.wage(k);
    let rate = params.f1(k_next);
    let (m1, m2) = params.utility.mrs_partials(c, rate * (wage - c));
    let den = m1 - rate * m2;
    Ok(ConsumptionPartials {
        c,
        c1: -m2 * rate * params.wage_slope(k) / den,
        c2: -(m2 * (wage - c) - 1.0) * params.f2(k_next) / den,
    })
}

/// Residuals
/// `H1 = eta2 + eta3 - (xi2/G) f'(eta1)`,
/// `H2 = xi2 + G eta1 + c^y(xi1, eta1) - omega(xi1)`,
/// `H3 = eta3 - q xi3`.
pub fn tirole_residual(params: &TiroleParams, x: &State, y: &State) -> State {
    let g = params.g;
    let c = young_consumption(params, x[0], y[0]).unwrap_or(f64::NAN);
    State::from_vec(vec![
        y[1] + y[2] - x[1] / g * params.f1(y[0]),
        x[1] + g * y[0] + c - params.wage(x[0]),
        y[2] - params.q() * x[2],
    ])
}

pub fn tirole_system(params: &TiroleParams) -> Result<ImplicitSystem, TiroleError> {
    params.validate()?;
    let p = params.clone();
    Ok(ImplicitSystem::new(3, vec![0, 2], move |x: &State, y: &State| tirole_residual(&p, x, y))?)
}

/// Root of `phi` on `(0, cap]` nearest to `guess` in log distance, found by
/// widening `[guess/(1+r), guess(1+r)]` from `r = 1e-6`.
fn nearest_root<F: Fn(f64) -> f64>(phi: F, guess: f64, cap: f64) -> Option<f64> {
    let guess = guess.min(cap);
    let f0 = phi(guess);
    if f0 == 0.0 {
        return Some(guess);
    }
    if !f0.is_finite() {
        return None;
    }
    let floor = cap * 1e-12;
    let (mut inner_lo, mut inner_hi) = (guess, guess);
    let mut r = 1e-6;
    loop {
        let lo = (guess / (1.0 + r)).max(floor);
        let hi = (guess * (1.0 + r)).min(cap);
        let (f_lo, f_hi) = (phi(lo), phi(hi));
        if f_lo.is_finite() && (f_lo > 0.0) != (f0 > 0.0) {
            return bisect(&phi, lo, inner_lo, BisectOptions::default()).ok().map(|r| r.x);
        }
        if f_hi.is_finite() && (f_hi > 0.0) != (f0 > 0.0) {
            return bisect(&phi, inner_hi, hi, BisectOptions::default()).ok().map(|r| r.x);
        }
        if lo <= floor && hi >= cap {
            return None;
        }
        inner_lo = lo;
        inner_hi = hi;
        r *= 2.0;
    }
}

/// Next state from the current one, solving `H2 = 0` for next-period capital
/// on `(0, (omega - xi2)/G]`. Where several roots exist the one nearest the
/// current capital stock is taken, which is the branch defined locally by
/// the implicit function theorem near a steady state.
pub fn tirole_step(params: &TiroleParams, x: &State) -> Option<State> {
    let (k, b, d) = (x[0], x[1], x[2]);
    if !(k > 0.0) {
        return None;
    }
    let g = params.g;
    let target = params.wage(k) - b;
    if !(target > 0.0) {
        return None;
    }
    let phi = |kn: f64| g * kn + young_consumption(params, k, kn).unwrap_or(f64::NAN) - target;
    let k_next = nearest_root(phi, k, target / g)?;
    let d_next = params.q() * d;
    let b_next = b / g * params.f1(k_next) - d_next;
    Some(State::from_vec(vec![k_next, b_next, d_next]))
}

/// `Dh = -(D_y H)^{-1} D_x H` at `x`, with the blocks written out.
pub fn tirole_jacobian_at(params: &TiroleParams, x: &State) -> Option<DMatrix<f64>> {
    let y = tirole_step(params, x)?;
    let g = params.g;
    let cp = consumption_partials(params, x[0], y[0]).ok()?;
    let dx = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -params.f1(y[0]) / g, 0.0, cp.c1 - params.wage_slope(x[0]), 1.0, 0.0, 0.0, 0.0, -params.q()],
    );
    let dy = DMatrix::from_row_slice(3, 3, &[-x[1] / g * params.f2(y[0]), 1.0, 1.0, g + cp.c2, 0.0, 0.0, 0.0, 0.0, 1.0]);
    dy.lu().solve(&(-dx))
}

/// Forward map with the analytic Jacobian attached.
pub fn tirole_map(params: &TiroleParams) -> Result<MapSystem, TiroleError> {
    params.validate()?;
    let (p1, p2) = (params.clone(), params.clone());
    Ok(MapSystem::new(3, vec![0, 2], move |x: &State| {
        tirole_step(&p1, x).unwrap_or_else(|| State::from_element(3, f64::NAN))
    })?
    .with_jacobian(move |x: &State| {
        tirole_jacobian_at(&p2, x).unwrap_or_else(|| DMatrix::from_element(3, 3, f64::NAN))
    })
    .with_admissible(|x: &State| x[0] > 0.0 && x[1] > 0.0 && x[2] >= 0.0))
}

/// Per-capita asset demand in a stationary state, `omega - c^y(k, k) - G k`.
pub fn asset_demand(params: &TiroleParams, k: f64) -> Result<f64, TiroleError> {
    Ok(params.wage(k) - young_consumption(params, k, k)? - params.g * k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiroleSteadyStates {
    pub k_f: f64,
    pub r_f: f64,
    /// Every zero of the stationary asset demand found by the grid scan.
    pub fundamental_roots: Vec<f64>,
    pub k_b: f64,
    /// Per-capita bubble `omega(k_b) - c^y(k_b, k_b) - G k_b`.
    pub bubble: f64,
    pub low_interest: bool,
}

impl TiroleSteadyStates {
    pub fn fundamental_point(&self) -> State {
        State::from_vec(vec![self.k_f, 0.0, 0.0])
    }

    pub fn bubbly_point(&self) -> State {
        State::from_vec(vec![self.k_b, self.bubble, 0.0])
    }
}

/// Scan range for fundamental capital.
const K_SCAN: (f64, f64, usize) = (1e-8, 1e6, 4000);

/// `k_b` from `f'(k_b) = G`; `k_f` is the smallest zero of the stationary
/// asset demand above `k_b` (or the largest zero when none lies above).
pub fn tirole_steady_states(params: &TiroleParams) -> Result<TiroleSteadyStates, TiroleError> {
    params.validate()?;
    let k_b = params.capital_for_rate(params.g)?;
    let bubble = asset_demand(params, k_b)?;
    let demand = |k: f64| asset_demand(params, k).unwrap_or(f64::NAN);
    let grid = log_grid(K_SCAN.0, K_SCAN.1, K_SCAN.2);
    let mut roots = Vec::new();
    let mut prev = (grid[0], demand(grid[0]));
    for &k in &grid[1..] {
        let v = demand(k);
        if prev.1.is_finite() && v.is_finite() && (prev.1 > 0.0) != (v > 0.0) {
            if let Ok(r) = bisect(demand, prev.0, k, BisectOptions::default()) {
                roots.push(r.x);
            }
        }
        prev = (k, v);
    }
    let k_f = roots
        .iter()
        .copied()
        .find(|&k| k > k_b)
        .or_else(|| roots.last().copied())
        .ok_or(TiroleError::NoFundamentalRoot { lo: K_SCAN.0, hi: K_SCAN.1 })?;
    let r_f = params.f1(k_f);
    Ok(TiroleSteadyStates { k_f, r_f, fundamental_roots: roots, k_b, bubble, low_interest: r_f < params.g })
}

/// Entries of the Jacobian at the bubbly steady state:
/// `Dh = [[p/s, -1/s, 0], [-p r/s, 1 + r/s, -q], [0, 0, q]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianPieces {
    /// `omega'(k_b) - c_1`
    pub p: f64,
    /// `G_d / G`
    pub q: f64,
    /// `-(b*/G) f''(k_b)`, with `b*` the per-capita bubble
    pub r: f64,
    /// `G + c_2`
    pub s: f64,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
}

impl JacobianPieces {
    pub fn matrix(&self) -> DMatrix<f64> {
        let JacobianPieces { p, q, r, s, .. } = *self;
        DMatrix::from_row_slice(3, 3, &[p / s, -1.0 / s, 0.0, -p * r / s, 1.0 + r / s, -q, 0.0, 0.0, q])
    }

    /// Eigenvalues of the 2x2 price-capital block followed by `q`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let JacobianPieces { p, q, r, s, .. } = *self;
        let tr = p / s + 1.0 + r / s;
        let det = p / s;
        let disc = (0.5 * tr).powi(2) - det;
        let root = disc.max(0.0).sqrt();
        vec![0.5 * tr + root, 0.5 * tr - root, q]
    }

    /// Sign conditions `p > 0`, `0 < q < 1`, `r > 0`, `s > 0`.
    pub fn sign_conditions(&self) -> bool {
        self.p > 0.0 && self.q > 0.0 && self.q < 1.0 && self.r > 0.0 && self.s > 0.0
    }
}

pub fn jacobian_pieces(params: &TiroleParams, ss: &TiroleSteadyStates) -> Result<JacobianPieces, TiroleError> {
    let k = ss.k_b;
    let cp = consumption_partials(params, k, k)?;
    Ok(JacobianPieces {
        p: params.wage_slope(k) - cp.c1,
        q: params.q(),
        r: -ss.bubble / params.g * params.f2(k),
        s: params.g + cp.c2,
        c: cp.c,
        c1: cp.c1,
        c2: cp.c2,
    })
}

/// `1 + (G^2 / f'') omega / (c (omega - c))` at `k_b`: local determinacy
/// holds when the intertemporal elasticity exceeds this.
pub fn tirole_eis_bound(params: &TiroleParams, k_b: f64) -> Result<f64, TiroleError> {
    let wage = params.wage(k_b);
    let c = young_consumption(params, k_b, k_b)?;
    if !(c > 0.0 && c < wage) {
        return Err(TiroleError::DegenerateConsumption { c, wage });
    }
    Ok(1.0 + params.g * params.g / params.f2(k_b) * wage / (c * (wage - c)))
}

/// Parameter-only upper bound on [`tirole_eis_bound`] for
/// `f(k) = A k^alpha + (1 - delta) k`:
/// `1 - (4 alpha/(1-alpha)^2) (1 - (1-delta)/G)^{-2}`.
pub fn cobb_douglas_eis_bound(alpha: f64, delta: f64, g: f64) -> f64 {
    1.0 - 4.0 * alpha / (1.0 - alpha).powi(2) / (1.0 - (1.0 - delta) / g).powi(2)
}

/// Intertemporal elasticity at the bubbly steady-state allocation.
pub fn eis_at_bubbly_state(params: &TiroleParams, k_b: f64) -> Result<f64, TiroleError> {
    if let Some(e) = params.utility.constant_eis() {
        return Ok(e);
    }
    let wage = params.wage(k_b);
    let c = young_consumption(params, k_b, k_b)?;
    Ok(1.0 / params.utility.inverse_elasticity(c, params.g * (wage - c)))
}

/// `G + dc^y/dk' > 0` at the bubbly steady state.
pub fn tirole_suff_cond(params: &TiroleParams, k_b: f64) -> Result<bool, TiroleError> {
    Ok(params.g + consumption_partials(params, k_b, k_b)?.c2 > 0.0)
}

/// Linearization of the forward map at the bubbly steady state.
pub fn tirole_bubbly_steady_state(params: &TiroleParams, ss: &TiroleSteadyStates) -> Result<SteadyState, TiroleError> {
    let map = tirole_map(params)?;
    Ok(steady_state_at(&map, &ss.bubbly_point(), 1e-6, DEFAULT_HYPERBOLICITY_MARGIN)?)
}

pub fn tirole_necessity(params: &TiroleParams, ss: &TiroleSteadyStates) -> NecessityVerdict {
    check_necessity(ss.r_f, params.g_d, params.g)
}

pub fn tirole_determinacy(params: &TiroleParams) -> Result<DeterminacyReport, TiroleError> {
    let ss = tirole_steady_states(params)?;
    let bubbly = tirole_bubbly_steady_state(params, &ss)?;
    let pieces = jacobian_pieces(params, &ss)?;
    let mut report = DeterminacyReport::new(&bubbly, bubbly.verdict, Some(tirole_necessity(params, &ss)))
        .with_analytic_eigenvalues(pieces.eigenvalues());
    if let (Ok(bound), Ok(eis)) = (tirole_eis_bound(params, ss.k_b), eis_at_bubbly_state(params, ss.k_b)) {
        let predicts = eis > bound;
        report = report.with_bound(BoundCheck {
            name: "eis".into(),
            bound,
            elasticity: eis,
            predicts_determinate: predicts,
            agrees: predicts == bubbly.verdict.is_determinate(),
        });
    }
    Ok(report)
}

/// Eigenvalues of a 3x3 Jacobian computed from the implicit system by finite
/// differences, for cross-checking the analytic blocks.
pub fn implicit_jacobian_eigenvalues(params: &TiroleParams, ss: &TiroleSteadyStates, step: f64) -> Result<Vec<f64>, TiroleError> {
    let sys = tirole_system(params)?;
    let x = ss.bubbly_point();
    let j = sys.implied_jacobian(&x, &x, step)?;
    Ok(eigenvalues(&j).iter().map(|z| z.re).collect())
}

/// Saddle path from `(k0, D0/N0)` toward the bubbly steady state.
pub fn tirole_saddle_path(params: &TiroleParams, k0: f64, horizon: usize, tol: f64) -> Result<EquilibriumPath, TiroleError> {
    let ss = tirole_steady_states(params)?;
    let bubbly = tirole_bubbly_steady_state(params, &ss)?;
    let map = tirole_map(params)?;
    let opts = ShootingOptions::new((0.0, params.wage(k0)));
    let path = solve_saddle_path(&map, &[k0, params.d0 / params.n0], &bubbly, horizon, tol, &opts)?;
    let rates: Vec<f64> = path.coordinate(0).iter().skip(1).map(|&k| params.f1(k)).collect();
    Ok(path.with_series("R", rates))
}

/// Reduced form with `W_t = omega N_0 G^t`:
/// `s(R) = 1 - (c^y(k, k) + G k)/omega(k)` at `f'(k) = R`.
pub fn tirole_reduced_form(params: &TiroleParams) -> Result<Adapter, TiroleError> {
    let ss = tirole_steady_states(params)?;
    let p = params.clone();
    let g = params.g;
    let economy = ReducedFormEconomy::new(
        "tirole",
        move |_| g,
        move |r| {
            let s = p
                .capital_for_rate(r)
                .and_then(|k| Ok(asset_demand(&p, k)? / p.wage(k)))
                .unwrap_or(f64::NAN);
            SavingInterval::point(s)
        },
    )
    .with_large_rate(g);
    Ok(Adapter {
        economy,
        fundamental_bracket: (ss.r_f * 0.5, ss.r_f * 2.0),
        bubbly_upper: Some(2.0 * g.max(ss.r_f)),
        closed_form_fundamental: None,
        closed_form_bubbly: Some(g),
    })
}

/// Fundamental capital under log utility and Cobb-Douglas production:
/// `k_f^{1-alpha} = beta A (1-alpha) / (G (1+beta))`.
pub fn log_cobb_douglas_capital(tfp: f64, alpha: f64, beta: f64, g: f64) -> f64 {
    (beta * tfp * (1.0 - alpha) / (g * (1.0 + beta))).powf(1.0 / (1.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_cd(alpha: f64, delta: f64, beta: f64, g: f64) -> TiroleParams {
        TiroleParams::new(ProductionSpec::cobb_douglas(1.0, alpha), delta, UtilitySpec::Log { beta }, g)
    }

    #[test]
    fn foc_matches_log_closed_form() {
        let p = log_cd(1.0 / 3.0, 0.1, 0.9, 1.05);
        for (k, kn) in [(0.5, 0.6), (2.0, 1.0), (0.1, 3.0)] {
            let c = young_consumption_foc(&p, k, kn).unwrap();
            assert!((c - p.wage(k) / 1.9).abs() < 1e-10 * p.wage(k));
        }
    }

    #[test]
    fn foc_matches_ces_closed_form() {
        let p = TiroleParams::new(ProductionSpec::cobb_douglas(1.0, 0.3), 0.5, UtilitySpec::Ces { beta: 0.9, eis: 0.5 }, 1.05);
        let c = young_consumption_foc(&p, 0.7, 0.8).unwrap();
        let closed = p.utility.closed_form_consumption(p.wage(0.7), p.f1(0.8)).unwrap();
        assert!((c - closed).abs() < 1e-10);
    }

    #[test]
    fn partials_match_differences() {
        let p = TiroleParams::new(ProductionSpec::cobb_douglas(1.0, 0.3), 0.5, UtilitySpec::Ces { beta: 0.9, eis: 0.5 }, 1.05);
        let (k, kn, h) = (0.7, 0.8, 1e-6);
        let cp = consumption_partials(&p, k, kn).unwrap();
        let d1 = (young_consumption(&p, k + h, kn).unwrap() - young_consumption(&p, k - h, kn).unwrap()) / (2.0 * h);
        let d2 = (young_consumption(&p, k, kn + h).unwrap() - young_consumption(&p, k, kn - h).unwrap()) / (2.0 * h);
        assert!((cp.c1 - d1).abs() < 1e-7 && (cp.c2 - d2).abs() < 1e-7);
    }

    #[test]
    fn log_cobb_douglas_fundamental_capital() {
        let p = log_cd(1.0 / 3.0, 0.1, 0.9, 1.05);
        let ss = tirole_steady_states(&p).unwrap();
        let k_f = log_cobb_douglas_capital(1.0, 1.0 / 3.0, 0.9, 1.05);
        assert!((ss.k_f - k_f).abs() < 1e-12 * k_f);
        assert!(asset_demand(&p, ss.k_f).unwrap().abs() < 1e-14);
        assert!((p.f1(ss.k_b) - 1.05).abs() < 1e-14);
    }

    #[test]
    fn residuals_vanish_at_steady_states() {
        let p = log_cd(0.25, 1.0, 0.9, 1.05).with_dividend(0.9, 0.01);
        let ss = tirole_steady_states(&p).unwrap();
        for x in [ss.fundamental_point(), ss.bubbly_point()] {
            assert!(tirole_residual(&p, &x, &x).amax() < 1e-14);
        }
    }

    #[test]
    fn analytic_and_implicit_jacobians_agree() {
        let p = log_cd(0.25, 1.0, 0.9, 1.05).with_dividend(0.9, 0.01);
        let ss = tirole_steady_states(&p).unwrap();
        let pieces = jacobian_pieces(&p, &ss).unwrap();
        let map = tirole_map(&p).unwrap();
        let x = ss.bubbly_point();
        assert!((map.analytic_jacobian(&x).unwrap() - pieces.matrix()).amax() < 1e-10);
        let fd = crate::dynsys::jacobian_fd(&map, &x, 1e-6).unwrap();
        assert!((fd - pieces.matrix()).amax() < 1e-5);
    }

    #[test]
    fn cobb_douglas_bound_dominates() {
        for (alpha, delta, g) in [(0.25, 1.0, 1.05), (0.3, 0.5, 1.2), (0.4, 0.9, 1.1)] {
            let p = log_cd(alpha, delta, 0.9, g);
            let ss = tirole_steady_states(&p).unwrap();
            let bound = tirole_eis_bound(&p, ss.k_b).unwrap();
            assert!(bound < 1.0);
            assert!(bound <= cobb_douglas_eis_bound(alpha, delta, g) + 1e-12);
        }
    }
}

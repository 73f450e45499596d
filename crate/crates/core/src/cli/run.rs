//! Scenario execution: dispatch to the model modules and assemble a report.

use std::fmt::Display;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::{certify_elimination, verify_path, ModelId, PathModel};
use crate::dynsys::{EquilibriumPath, SteadyState, State};
use crate::infinite::kocherlakota::{kocherlakota_reduced_form, KocherlakotaParams};
use crate::infinite::leverage::{
    leverage_bubbly, leverage_curvature_condition, leverage_determinacy, leverage_eigenvalues, leverage_es_bound,
    leverage_fundamental, leverage_injected_dynamics, leverage_necessity, leverage_simulate, LeverageParams, LeverageRegime,
};
use crate::infinite::storage::{storage_bubble_condition, storage_portfolio, storage_reduced_form, StorageRiskParams};
use crate::olg::samuelson::{samuelson_determinacy, samuelson_saddle_path, samuelson_steady_states, SamuelsonParams};
use crate::olg::tirole::{
    cobb_douglas_eis_bound, jacobian_pieces, tirole_bubbly_steady_state, tirole_determinacy, tirole_necessity,
    tirole_saddle_path, tirole_steady_states, tirole_suff_cond, TiroleParams,
};
use crate::production::Technology;
use crate::reduced_form::{check_necessity, Adapter};

use super::config::{ModelParams, RunKind, ScenarioConfig};
use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Verification {
    fn from_checks(checks: &[(bool, String)]) -> Self {
        let failures: Vec<String> = checks.iter().filter(|(ok, _)| !ok).map(|(_, m)| m.clone()).collect();
        Self { passed: failures.is_empty(), failures }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub run: RunKind,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn failed_verifications(&self) -> usize {
        self.rows.iter().filter(|r| r.passed == Some(false)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: ScenarioConfig,
    pub run: RunKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    /// Wall-clock milliseconds; only when requested, since it breaks
    /// byte-for-byte reproducibility.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    /// 0 success, 3 row-level solver errors, 4 failed verification.
    pub fn exit_code(&self) -> i32 {
        if let Some(s) = &self.sweep {
            if s.error_count() > 0 {
                return 3;
            }
            if s.failed_verifications() > 0 {
                return 4;
            }
        }
        match &self.verification {
            Some(v) if !v.passed => 4,
            _ => 0,
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

struct Outcome {
    value: Value,
    verification: Option<Verification>,
}

impl Outcome {
    fn plain(value: Value) -> Self {
        Self { value, verification: None }
    }
}

fn solver<E: Display>(e: E) -> CliError {
    CliError::Solver(e.to_string())
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn steady_json(ss: &SteadyState) -> Value {
    json!({
        "point": ss.point.as_slice(),
        "residual_norm": ss.residual_norm,
        "eigenvalues": ss.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "verdict": ss.verdict,
    })
}

/// Runs the scenario for `config.run`. A sweep runs its rows in parallel
/// and keeps grid order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, CliError> {
    config.check()?;
    let kind = config
        .run
        .ok_or_else(|| CliError::ConfigInvalid("no run kind: set `run` in the config or pass a subcommand".into()))?;
    let mut report = RunReport {
        tool: "bubblekit",
        version: env!("CARGO_PKG_VERSION"),
        scenario: config.clone(),
        run: kind,
        result: None,
        sweep: None,
        verification: None,
        timing_ms: None,
    };
    if kind == RunKind::Sweep {
        report.sweep = Some(run_sweep(config)?);
        return Ok(report);
    }
    let params = config.model_params()?;
    let outcome = analyze(config, &params, kind)?;
    report.result = Some(outcome.value);
    report.verification = outcome.verification;
    Ok(report)
}

/// One row per grid point; a failing row records its error and the sweep
/// carries on.
pub fn run_sweep(config: &ScenarioConfig) -> Result<SweepReport, CliError> {
    let spec = config.sweep.as_ref().ok_or_else(|| CliError::ConfigInvalid("run = sweep needs a [sweep] table".into()))?;
    let points = spec.points()?;
    let kind = spec.run.unwrap_or(match config.model {
        ModelId::Samuelson | ModelId::Tirole | ModelId::Leverage => RunKind::Determinacy,
        _ => RunKind::Steady,
    });
    if kind == RunKind::Sweep {
        return Err(CliError::ConfigInvalid("sweep.run cannot itself be sweep".into()));
    }
    // the parameter path must exist in the base config
    config.with_param(&spec.parameter, points[0])?;
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let outcome = config
                .with_param(&spec.parameter, value)
                .and_then(|c| c.model_params().and_then(|p| analyze(&c, &p, kind)));
            match outcome {
                Ok(o) => SweepRow {
                    index,
                    value,
                    error: None,
                    passed: o.verification.map(|v| v.passed),
                    result: Some(o.value),
                },
                Err(e) => SweepRow { index, value, error: Some(e.to_string()), passed: None, result: None },
            }
        })
        .collect();
    Ok(SweepReport { parameter: spec.parameter.clone(), run: kind, rows })
}

fn analyze(config: &ScenarioConfig, params: &ModelParams, kind: RunKind) -> Result<Outcome, CliError> {
    match params {
        ModelParams::Samuelson(p) => samuelson(config, p, kind),
        ModelParams::Tirole(p) => tirole(config, p, kind),
        ModelParams::Leverage(p) => leverage(config, p, kind),
        ModelParams::Kocherlakota(p) => {
            let adapter = kocherlakota_reduced_form(p).map_err(solver)?;
            reduced(config, &adapter, kind, kocherlakota_extras(p))
        }
        ModelParams::StorageRisk(p) => {
            let adapter = storage_reduced_form(p).map_err(solver)?;
            reduced(config, &adapter, kind, storage_extras(p))
        }
        ModelParams::ReducedFormCustom(t) => reduced(config, &t.adapter(), kind, json!({})),
    }
}

fn residual_checks(report: &crate::diagnostics::ResidualReport) -> (bool, String) {
    (
        report.passed,
        format!("max residual {:e} at transition {:?} exceeds {:e}", report.max_residual, report.worst_period, report.tol),
    )
}

fn certificate_json(r_lim: f64, g_d: f64, g: f64, d0: f64) -> (Value, Vec<(bool, String)>) {
    match certify_elimination(r_lim, g_d, g, d0) {
        Ok(cert) => {
            let agrees = cert.verdict == check_necessity(r_lim, g_d, g);
            (to_json(&cert), vec![(agrees, "certificate verdict disagrees with the necessity check".into())])
        }
        Err(e) => (json!({ "skipped": e.to_string() }), vec![]),
    }
}

fn samuelson(config: &ScenarioConfig, p: &SamuelsonParams, kind: RunKind) -> Result<Outcome, CliError> {
    let steady = || -> Result<Value, CliError> {
        let (fund, bubbly) = samuelson_steady_states(p).map_err(solver)?;
        Ok(json!({
            "fundamental": steady_json(&fund),
            "bubbly": steady_json(&bubbly),
            "fundamental_rate": p.fundamental_rate(),
            "bubbly_price": p.bubbly_price(),
            "has_bubbly_steady_state": p.has_bubbly_steady_state(),
            "necessity": p.necessity(),
        }))
    };
    match kind {
        RunKind::Steady => Ok(Outcome::plain(json!({ "steady_states": steady()? }))),
        RunKind::Determinacy => {
            let report = samuelson_determinacy(p).map_err(solver)?;
            Ok(Outcome::plain(json!({
                "steady_states": steady()?,
                "eigenvalue_gap": report.eigenvalue_gap(),
                "determinacy": report,
            })))
        }
        RunKind::Path | RunKind::Verify => {
            let path = samuelson_saddle_path(p, config.horizon, config.tolerances.path).map_err(solver)?;
            let eq = path.to_equilibrium_path();
            let residuals = verify_path(&PathModel::Samuelson(p), &eq, config.tolerances.verify).map_err(solver)?;
            let target = State::from_vec(vec![p.bubbly_price(), 0.0]);
            let mut value = json!({
                "path": eq,
                "terminal_deviation": eq.terminal_deviation(&target),
                "residuals": residuals,
            });
            if kind == RunKind::Path {
                return Ok(Outcome::plain(value));
            }
            let mut checks = vec![residual_checks(&residuals)];
            if p.d0 > 0.0 {
                let (cert, c) = certificate_json(p.fundamental_rate(), p.g_d, p.g, p.d0);
                value["certificate"] = cert;
                checks.extend(c);
            }
            Ok(Outcome { value, verification: Some(Verification::from_checks(&checks)) })
        }
        RunKind::Sweep => unreachable!("sweep rows never nest"),
    }
}

fn tirole(config: &ScenarioConfig, p: &TiroleParams, kind: RunKind) -> Result<Outcome, CliError> {
    let ss = tirole_steady_states(p).map_err(solver)?;
    let steady = || -> Result<Value, CliError> {
        let bubbly = if ss.low_interest { Some(steady_json(&tirole_bubbly_steady_state(p, &ss).map_err(solver)?)) } else { None };
        Ok(json!({
            "solution": ss,
            "bubbly": bubbly,
            "necessity": tirole_necessity(p, &ss),
        }))
    };
    match kind {
        RunKind::Steady => Ok(Outcome::plain(json!({ "steady_states": steady()? }))),
        RunKind::Determinacy => {
            let report = tirole_determinacy(p).map_err(solver)?;
            let pieces = jacobian_pieces(p, &ss).map_err(solver)?;
            let closed_bound = match (p.production.technology, p.utility.constant_eis()) {
                (Technology::CobbDouglas { alpha }, Some(_)) => Some(cobb_douglas_eis_bound(alpha, p.delta, p.g)),
                _ => None,
            };
            Ok(Outcome::plain(json!({
                "steady_states": steady()?,
                "determinacy": report,
                "eigenvalue_gap": report.eigenvalue_gap(),
                "jacobian_pieces": pieces,
                "sign_conditions": pieces.sign_conditions(),
                "sufficient_condition": tirole_suff_cond(p, ss.k_b).map_err(solver)?,
                "cobb_douglas_bound": closed_bound,
            })))
        }
        RunKind::Path | RunKind::Verify => {
            let k0 = config.initial.k0.unwrap_or(ss.k_f);
            let path = tirole_saddle_path(p, k0, config.horizon, config.tolerances.path).map_err(solver)?;
            let residuals = verify_path(&PathModel::Tirole(p), &path, config.tolerances.verify).map_err(solver)?;
            let mut value = json!({
                "initial_capital": k0,
                "terminal_deviation": path.terminal_deviation(&ss.bubbly_point()),
                "path": path,
                "residuals": residuals,
            });
            if kind == RunKind::Path {
                return Ok(Outcome::plain(value));
            }
            let mut checks = vec![residual_checks(&residuals)];
            if p.d0 > 0.0 {
                let (cert, c) = certificate_json(ss.r_f, p.g_d, p.g, p.d0 / p.n0);
                value["certificate"] = cert;
                checks.extend(c);
            }
            Ok(Outcome { value, verification: Some(Verification::from_checks(&checks)) })
        }
        RunKind::Sweep => unreachable!("sweep rows never nest"),
    }
}

fn leverage(config: &ScenarioConfig, p: &LeverageParams, kind: RunKind) -> Result<Outcome, CliError> {
    let fund = leverage_fundamental(p).map_err(solver)?;
    let bubbly = leverage_bubbly(p).map_err(solver)?;
    let steady = json!({
        "phi": p.phi(),
        "kappa": p.kappa(),
        "fundamental": fund,
        "bubbly": bubbly,
        "necessity": leverage_necessity(p),
    });
    match kind {
        RunKind::Steady => Ok(Outcome::plain(json!({ "steady_states": steady }))),
        RunKind::Determinacy => {
            let report = leverage_determinacy(p).map_err(solver)?;
            let (l1, l2) = leverage_eigenvalues(p, bubbly.y);
            Ok(Outcome::plain(json!({
                "steady_states": steady,
                "determinacy": report,
                "eigenvalue_gap": report.eigenvalue_gap(),
                "analytic_eigenvalues": [l1, l2],
                "curvature_condition": leverage_curvature_condition(p, bubbly.y),
                "es_bound": leverage_es_bound(p, bubbly.y).map_err(solver)?,
            })))
        }
        RunKind::Path | RunKind::Verify => {
            let y0 = config.initial.y0.unwrap_or(fund.y);
            let map = leverage_injected_dynamics(p).map_err(solver)?;
            let x0 = State::from_vec(vec![y0, p.kappa() * p.d / p.g]);
            let states = map.iterate(&x0, config.horizon).map_err(solver)?;
            let rates = states.iter().map(|s| p.capital_return(s[0])).collect();
            let path = EquilibriumPath::from_states(states).with_series("capital_return", rates);
            let residuals = verify_path(&PathModel::Leverage(p), &path, config.tolerances.verify).map_err(solver)?;
            let target = State::from_vec(vec![bubbly.y, 0.0]);
            let mut value = json!({
                "terminal_deviation": path.terminal_deviation(&target),
                "path": path,
                "residuals": residuals,
            });
            if kind == RunKind::Path {
                return Ok(Outcome::plain(value));
            }
            let sim = leverage_simulate(p, LeverageRegime::Bubbly, y0, fund.k_l, config.horizon).map_err(solver)?;
            let accounting = sim.max_residual();
            value["accounting_max_residual"] = json!(accounting);
            value["inadmissible_from"] = json!(sim.inadmissible_from);
            let mut checks = vec![
                residual_checks(&residuals),
                (accounting <= config.tolerances.verify, format!("accounting residual {accounting:e} exceeds tolerance")),
            ];
            if p.d > 0.0 {
                let (cert, c) = certificate_json(1.0 - p.delta, 1.0, p.g, p.d);
                value["certificate"] = cert;
                checks.extend(c);
            }
            Ok(Outcome { value, verification: Some(Verification::from_checks(&checks)) })
        }
        RunKind::Sweep => unreachable!("sweep rows never nest"),
    }
}

fn kocherlakota_extras(p: &KocherlakotaParams) -> Value {
    json!({
        "low_interest": p.low_interest(),
        "bubbly_price_coefficient": p.bubbly_price_coefficient(),
    })
}

fn storage_extras(p: &StorageRiskParams) -> Value {
    let r_f = p.fundamental_rate();
    json!({
        "bubble_condition": storage_bubble_condition(p),
        "mean": p.z_dist.mean(),
        "portfolio_at_fundamental_rate": storage_portfolio(p, r_f).ok(),
    })
}

fn reduced(config: &ScenarioConfig, adapter: &Adapter, kind: RunKind, extras: Value) -> Result<Outcome, CliError> {
    let sol = adapter.solve(config.tolerances.reduced_form).map_err(solver)?;
    let growth_residual = (adapter.economy.growth(sol.r_b) - sol.r_b).abs();
    let steady = json!({
        "solution": sol,
        "growth_residual": growth_residual,
        "closed_form_fundamental": adapter.closed_form_fundamental,
        "closed_form_bubbly": adapter.closed_form_bubbly,
        "model": extras,
    });
    match kind {
        RunKind::Steady => Ok(Outcome::plain(json!({ "steady_states": steady }))),
        RunKind::Determinacy => Err(CliError::ConfigInvalid(format!(
            "determinacy needs dynamics; {} is a reduced-form model (use steady, path or verify)",
            config.model
        ))),
        RunKind::Path | RunKind::Verify => {
            let w0 = config.initial.w0.unwrap_or(1.0);
            let prices = sol.price_path(w0, config.horizon);
            let exact_ratio = prices.windows(2).all(|w| w[1] == w[0] * sol.r_b);
            let value = json!({
                "steady_states": steady,
                "initial_wealth": w0,
                "prices": prices,
                "exact_growth_ratio": exact_ratio,
            });
            if kind == RunKind::Path {
                return Ok(Outcome::plain(value));
            }
            let checks = [
                (growth_residual <= config.tolerances.verify, format!("|G(R_b) - R_b| = {growth_residual:e} exceeds tolerance")),
                (exact_ratio, "price ratio differs from R_b".to_string()),
                (sol.r_b > sol.r_f, format!("R_b = {} is not above R_f = {}", sol.r_b, sol.r_f)),
            ];
            Ok(Outcome { value, verification: Some(Verification::from_checks(&checks)) })
        }
        RunKind::Sweep => unreachable!("sweep rows never nest"),
    }
}

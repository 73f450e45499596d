//! Residual verification: clean paths pass, single-period faults are caught.

use bubblekit::diagnostics::{verify_path, verify_path_by_id, ModelId, PathModel};
use bubblekit::infinite::leverage::{leverage_bubbly, leverage_simulate, LeverageParams, LeverageRegime};
use bubblekit::olg::samuelson::{samuelson_closed_form, samuelson_saddle_path, SamuelsonParams};
use bubblekit::production::ProductionSpec;

const TOL: f64 = 1e-8;

fn params() -> SamuelsonParams {
    SamuelsonParams::new(3.0, 1.0, 0.5, 1.2).with_dividend(1.0, 0.001)
}

#[test]
fn saddle_path_passes() {
    let p = params();
    let path = samuelson_saddle_path(&p, 200, TOL).unwrap().to_equilibrium_path();
    let report = verify_path(&PathModel::Samuelson(&p), &path, TOL).unwrap();
    assert!(report.passed, "max residual {:e}", report.max_residual);
}

#[test]
fn single_period_price_fault_is_located() {
    let p = params();
    let clean = samuelson_saddle_path(&p, 200, TOL).unwrap().to_equilibrium_path();
    for t in [1, 37, 150] {
        let mut path = clean.clone();
        let price = path.series.get_mut("P").unwrap();
        price[t] += 10.0 * TOL * price[t].abs().max(1.0);
        let report = verify_path(&PathModel::Samuelson(&p), &path, TOL).unwrap();
        assert!(!report.passed, "fault at {t} not detected");
        let flagged = report.periods_above(TOL);
        assert!(!flagged.is_empty() && flagged.iter().all(|&s| s + 1 >= t && s <= t), "fault at {t}, flagged {flagged:?}");
    }
}

#[test]
fn consumption_fault_breaks_budget() {
    let p = params();
    let mut path = samuelson_saddle_path(&p, 100, TOL).unwrap().to_equilibrium_path();
    path.series.get_mut("c_old").unwrap()[20] += 1e-6;
    let report = verify_path(&PathModel::Samuelson(&p), &path, TOL).unwrap();
    assert!(!report.passed);
    assert!(report.budget.iter().flatten().any(|&r| r > TOL));
}

#[test]
fn zero_price_path_has_no_arbitrage_gaps() {
    let p = SamuelsonParams::new(3.0, 1.0, 0.5, 1.2);
    let path = samuelson_closed_form(&p, 0.0, 50).unwrap().to_equilibrium_path();
    let report = verify_path(&PathModel::Samuelson(&p), &path, TOL).unwrap();
    assert!(report.passed, "max residual {:e}", report.max_residual);
    assert!(report.no_arbitrage.iter().all(Option::is_none));
}

#[test]
fn leverage_accounting_closes() {
    let p = LeverageParams::new(0.96, 0.1, 5.0, 0.1, 1.02, ProductionSpec::cobb_douglas(1.0, 1.0 / 3.0)).with_dividend(0.01);
    let b = leverage_bubbly(&p).unwrap();
    let path = leverage_simulate(&p, LeverageRegime::Bubbly, b.k_h, b.k_l, 60).unwrap();
    assert!(path.max_residual() < 1e-12, "{:e}", path.max_residual());
}

#[test]
fn mismatched_model_id_is_rejected() {
    let p = params();
    let path = samuelson_saddle_path(&p, 150, TOL).unwrap().to_equilibrium_path();
    assert!(verify_path_by_id(ModelId::Tirole, &PathModel::Samuelson(&p), &path, TOL).is_err());
    assert!(verify_path_by_id(ModelId::Samuelson, &PathModel::Samuelson(&p), &path, TOL).is_ok());
}

#[test]
fn short_path_is_rejected() {
    let p = params();
    let mut path = samuelson_saddle_path(&p, 150, TOL).unwrap().to_equilibrium_path();
    path.states.truncate(1);
    assert!(verify_path(&PathModel::Samuelson(&p), &path, TOL).is_err());
}

//! Model solvers against closed forms and finite differences.

use proptest::prelude::*;

use bubblekit::diagnostics::certify_elimination;
use bubblekit::dynsys::{eigenvalues, jacobian_fd};
use bubblekit::infinite::leverage::{leverage_bubbly, leverage_bubbly_steady_state, leverage_eigenvalues, leverage_injected_dynamics, LeverageParams};
use bubblekit::olg::samuelson::{pareto_compare, samuelson_closed_form, samuelson_steady_states, SamuelsonParams};
use bubblekit::olg::tirole::{implicit_jacobian_eigenvalues, jacobian_pieces, tirole_steady_states, TiroleParams};
use bubblekit::production::ProductionSpec;
use bubblekit::reduced_form::check_necessity;
use bubblekit::utility::UtilitySpec;

fn samuelson() -> impl Strategy<Value = SamuelsonParams> {
    (0.3..0.95f64, 0.5..2.0f64, 1.1..3.0f64, 1.0..1.5f64).prop_map(|(beta, b, m, g)| SamuelsonParams::new(b / beta * m, b, beta, g))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // P_t / (a G^t - P_t) = beta P_{t+1} / (b G^{t+1} + P_{t+1}) from the young's problem
    #[test]
    fn closed_form_satisfies_level_euler(p in samuelson(), frac in 0.01..1.0f64) {
        let p0 = frac * (p.beta * p.a - p.b) / (1.0 + p.beta);
        let path = samuelson_closed_form(&p, p0, 40).unwrap();
        for t in 0..40 {
            let gt = p.g.powi(t as i32);
            let (now, next) = (path.price[t], path.price[t + 1]);
            let lhs = now * (p.b * gt * p.g + next);
            let rhs = p.beta * (p.a * gt - now) * next;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300), "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn samuelson_steady_points_match_formula(p in samuelson()) {
        let (f, b) = samuelson_steady_states(&p).unwrap();
        prop_assert!(f.point.amax() < 1e-14);
        prop_assert!((b.point[0] - (p.beta * p.a - p.b) / (1.0 + p.beta)).abs() < 1e-12);
    }

    // generation utility in detrended terms: log(a - x_t) + beta log(b + x_{t+1})
    #[test]
    fn higher_initial_price_is_weakly_better(p in samuelson(), lo in 0.05..0.5f64, hi in 0.5..1.0f64) {
        let bubbly = (p.beta * p.a - p.b) / (1.0 + p.beta);
        let report = pareto_compare(&p, lo * bubbly, hi * bubbly, 30).unwrap();
        let low = samuelson_closed_form(&p, lo * bubbly, 31).unwrap().detrended_price;
        let high = samuelson_closed_form(&p, hi * bubbly, 31).unwrap().detrended_price;
        let u = |x: &[f64], t: usize| (p.a - x[t]).ln() + p.beta * (p.b + x[t + 1]).ln();
        for t in 0..30 {
            let direct = u(&high, t) - u(&low, t);
            prop_assert!(direct >= -1e-12, "generation {t} loses {direct}");
            prop_assert!((direct - report.generations[t]).abs() < 1e-9 * direct.abs().max(1e-6));
        }
        prop_assert!(report.initial_old > 0.0);
    }

    #[test]
    fn certificate_agrees_with_necessity(r in 0.5..1.5f64, gd in 0.5..1.5f64, g in 0.5..1.5f64, d0 in 1e-4..1.0f64) {
        let cert = certify_elimination(r, gd, g, d0).unwrap();
        prop_assert_eq!(cert.verdict, check_necessity(r, gd, g));
        if cert.fires() {
            prop_assert!(cert.geometric_divergence);
        }
    }

    // log utility, Cobb-Douglas: k_f^{1-alpha} = beta (1-alpha) / (G (1+beta)), f'(k_b) = G
    #[test]
    fn tirole_steady_states_match_cobb_douglas(alpha in 0.15..0.45f64, beta in 0.5..0.95f64, g in 1.0..1.2f64, delta in 0.5..1.0f64) {
        let p = TiroleParams::new(ProductionSpec::cobb_douglas(1.0, alpha), delta, UtilitySpec::Log { beta }, g);
        let ss = tirole_steady_states(&p).unwrap();
        let k_f = (beta * (1.0 - alpha) / (g * (1.0 + beta))).powf(1.0 / (1.0 - alpha));
        let k_b = (alpha / (g - 1.0 + delta)).powf(1.0 / (1.0 - alpha));
        prop_assert!((ss.k_f - k_f).abs() < 1e-10 * k_f);
        prop_assert!((ss.k_b - k_b).abs() < 1e-10 * k_b);
    }

    #[test]
    fn tirole_analytic_eigenvalues_match_finite_differences(alpha in 0.15..0.35f64, beta in 0.7..0.95f64, eis in 0.3..2.0f64, frac in 0.1..0.9f64) {
        let g = 1.05;
        let base = TiroleParams::new(ProductionSpec::cobb_douglas(1.0, alpha), 1.0, UtilitySpec::Ces { beta, eis }, g);
        let ss = tirole_steady_states(&base).unwrap();
        prop_assume!(ss.r_f < g && ss.bubble > 0.0);
        let p = base.with_dividend(ss.r_f + frac * (g - ss.r_f), 0.01);
        let ss = tirole_steady_states(&p).unwrap();
        let pieces = jacobian_pieces(&p, &ss).unwrap();
        prop_assume!(pieces.eigenvalues().iter().all(|x| x.abs() < 50.0));
        let an = sorted(pieces.eigenvalues());
        let fd = sorted(implicit_jacobian_eigenvalues(&p, &ss, 1e-6).unwrap());
        for (a, f) in an.iter().zip(&fd) {
            prop_assert!((a - f).abs() < 1e-5 * a.abs().max(1.0), "{an:?} vs {fd:?}");
        }
    }

    #[test]
    fn leverage_eigenvalues_match_finite_differences(pi in 0.05..0.2f64, lambda in 2.0..6.0f64, d in 0.001..0.05f64) {
        prop_assume!(pi * lambda < 0.9);
        let p = LeverageParams::new(0.96, pi, lambda, 0.1, 1.02, ProductionSpec::cobb_douglas(1.0, 1.0 / 3.0)).with_dividend(d);
        let Ok(b) = leverage_bubbly(&p) else { return Err(TestCaseError::reject("no bubbly state")) };
        let ss = leverage_bubbly_steady_state(&p).unwrap();
        let map = leverage_injected_dynamics(&p).unwrap();
        let j = jacobian_fd(&map, &ss.point, 1e-6).unwrap();
        let fd = sorted(eigenvalues(&j).iter().map(|z| z.re).collect());
        let (l1, l2) = leverage_eigenvalues(&p, b.y);
        let an = sorted(vec![l1, l2]);
        for (a, f) in an.iter().zip(&fd) {
            prop_assert!((a - f).abs() < 1e-6 * a.abs().max(1.0), "{an:?} vs {fd:?}");
        }
    }

    // central differences of output and Euler's theorem for the wage
    #[test]
    fn ces_derivatives_match_output(alpha in 0.2..0.5f64, sigma in 0.2..3.0f64, k in 0.05..20.0f64) {
        prop_assume!((sigma - 1.0).abs() > 1e-3);
        let f = ProductionSpec::ces(1.0, alpha, sigma);
        let h = 1e-5 * k;
        let fd = (f.output(k + h) - f.output(k - h)) / (2.0 * h);
        prop_assert!((f.marginal(k) - fd).abs() < 1e-7 * fd.abs().max(1.0));
        let fd2 = (f.marginal(k + h) - f.marginal(k - h)) / (2.0 * h);
        prop_assert!((f.curvature(k) - fd2).abs() < 1e-6 * fd2.abs().max(1.0));
        prop_assert!((f.wage(k) - (f.output(k) - k * f.marginal(k))).abs() < 1e-12 * f.output(k).max(1.0));
    }
}

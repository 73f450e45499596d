//! Stationary reduced form of a growing economy: a growth function `G(R)`
//! and a saving-rate correspondence `s(R)`, both functions of the gross
//! risk-free rate. The fundamental rate solves `s(R) = 0`; a bubbly
//! equilibrium has `R = G(R)` and price `P_t = p W_t` with `p` in `s(R)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::{bisect, BisectOptions};

/// Relative slack below which two rates count as equal in strict comparisons.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `a < b` with a relative tie band, so values equal up to round-off are
/// not reported as ordered.
pub fn strictly_less(a: f64, b: f64) -> bool {
    b - a > TIE_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReducedFormError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no sign change on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("saving rate is not finite at R = {rate}")]
    NonFiniteSaving { rate: f64 },
    #[error("growth is not finite at R = {rate}")]
    NonFiniteGrowth { rate: f64 },
    #[error("bisection stopped with residual {residual:e} above tolerance {tol:e} at R = {rate}")]
    ToleranceNotMet { rate: f64, residual: f64, tol: f64 },
    #[error("no low-interest gap: G(R_f) = {growth} <= R_f = {r_f}")]
    PreconditionFailed { r_f: f64, growth: f64 },
    #[error("saving set [{lo}, {hi}] at R_b = {rate} has no positive element")]
    NoBubblyEquilibrium { rate: f64, lo: f64, hi: f64 },
}

/// Closed interval of optimal saving rates; degenerate for single-valued
/// demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavingInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SavingInterval {
    pub fn point(s: f64) -> Self {
        Self { lo: s, hi: s }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo: lo.min(hi), hi: lo.max(hi) }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

pub type GrowthFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SavingFn = Arc<dyn Fn(f64) -> SavingInterval + Send + Sync>;

#[derive(Clone)]
pub struct ReducedFormEconomy {
    name: String,
    growth: GrowthFn,
    saving: SavingFn,
    /// Net supply of the asset relative to wealth; zero for a pure bubble.
    asset_supply: f64,
    /// Largest admissible one-step change of `G` between neighboring sample
    /// points in the continuity check.
    jump_threshold: f64,
    /// Rate above which the model guarantees `G(R) < R`.
    large_rate: Option<f64>,
}

impl fmt::Debug for ReducedFormEconomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedFormEconomy")
            .field("name", &self.name)
            .field("asset_supply", &self.asset_supply)
            .field("jump_threshold", &self.jump_threshold)
            .field("large_rate", &self.large_rate)
            .finish()
    }
}

impl ReducedFormEconomy {
    pub fn new<G, S>(name: &str, growth: G, saving: S) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> SavingInterval + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            growth: Arc::new(growth),
            saving: Arc::new(saving),
            asset_supply: 0.0,
            jump_threshold: 1e-2,
            large_rate: None,
        }
    }

    pub fn with_jump_threshold(mut self, threshold: f64) -> Self {
        self.jump_threshold = threshold;
        self
    }

    pub fn with_large_rate(mut self, rate: f64) -> Self {
        self.large_rate = Some(rate);
        self
    }

    pub fn with_asset_supply(mut self, supply: f64) -> Self {
        self.asset_supply = supply;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn asset_supply(&self) -> f64 {
        self.asset_supply
    }

    pub fn large_rate(&self) -> Option<f64> {
        self.large_rate
    }

    pub fn growth(&self, rate: f64) -> f64 {
        (self.growth)(rate)
    }

    pub fn saving(&self, rate: f64) -> SavingInterval {
        (self.saving)(rate)
    }

    /// Midpoint selection from the saving set.
    pub fn saving_rate(&self, rate: f64) -> f64 {
        self.saving(rate).midpoint()
    }

    /// Samples `G` on `n` evenly spaced points of `[lo, hi]` and reports the
    /// largest jump between neighbors.
    pub fn check_continuity(&self, lo: f64, hi: f64, n: usize) -> ContinuityReport {
        let n = n.max(2);
        let values: Vec<f64> = (0..n).map(|i| self.growth(lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect();
        let finite = values.iter().all(|v| v.is_finite());
        let max_jump = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        ContinuityReport { lo, hi, samples: n, max_jump, threshold: self.jump_threshold, passed: finite && max_jump <= self.jump_threshold }
    }

    /// Checks `G(R) < R` on `n` points of `[from, to]`.
    pub fn check_growth_below_rate(&self, from: f64, to: f64, n: usize) -> GrowthBelowRateReport {
        let n = n.max(2);
        let mut worst = f64::NEG_INFINITY;
        let mut worst_rate = from;
        for i in 0..n {
            let r = from + (to - from) * i as f64 / (n - 1) as f64;
            let gap = self.growth(r) - r;
            if !(gap <= worst) {
                worst = gap;
                worst_rate = r;
            }
        }
        GrowthBelowRateReport { from, to, samples: n, max_gap: worst, worst_rate, passed: worst < 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub max_jump: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Sampled check that the growth function lies below the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBelowRateReport {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    /// `max G(R) - R` over the samples.
    pub max_gap: f64,
    pub worst_rate: f64,
    pub passed: bool,
}

/// A model's reduced form together with the brackets and closed forms it
/// knows about.
#[derive(Debug, Clone)]
pub struct Adapter {
    pub economy: ReducedFormEconomy,
    pub fundamental_bracket: (f64, f64),
    pub bubbly_upper: Option<f64>,
    pub closed_form_fundamental: Option<f64>,
    pub closed_form_bubbly: Option<f64>,
}

impl Adapter {
    pub fn solve(&self, tol: f64) -> Result<BubbleSolution, ReducedFormError> {
        solve_bubbly_equilibrium(&self.economy, self.fundamental_bracket, self.bubbly_upper, tol)
    }
}

/// Root of the midpoint saving rate on `bracket`.
pub fn solve_fundamental_rate(econ: &ReducedFormEconomy, bracket: (f64, f64), tol: f64) -> Result<f64, ReducedFormError> {
    let (lo, hi) = bracket;
    if !(tol > 0.0) || !(lo < hi) {
        return Err(ReducedFormError::InvalidArgument(format!("need tol > 0 and lo < hi, got tol={tol}, [{lo}, {hi}]")));
    }
    let s = |r: f64| econ.saving_rate(r);
    for r in [lo, hi] {
        if !econ.saving(r).is_finite() {
            return Err(ReducedFormError::NonFiniteSaving { rate: r });
        }
    }
    let root = bisect(s, lo, hi, BisectOptions::default()).map_err(|e| match e {
        crate::roots::BracketError::NoSignChange { lo, hi, f_lo, f_hi } => ReducedFormError::NoSignChange { lo, hi, f_lo, f_hi },
        crate::roots::BracketError::NonFinite { x } => ReducedFormError::NonFiniteSaving { rate: x },
        crate::roots::BracketError::InvalidBracket { lo, hi } => {
            ReducedFormError::InvalidArgument(format!("invalid bracket [{lo}, {hi}]"))
        }
    })?;
    if root.value.abs() > tol {
        return Err(ReducedFormError::ToleranceNotMet { rate: root.x, residual: root.value.abs(), tol });
    }
    Ok(root.x)
}

/// Default upper end of the bubbly-rate search: `max(10, 2 sup G)` over
/// samples of `[r_f, 10]`.
pub fn default_upper(econ: &ReducedFormEconomy, r_f: f64) -> f64 {
    let top = 10.0_f64.max(r_f * 2.0);
    let sup = (0..=100)
        .map(|i| econ.growth(r_f + (top - r_f) * i as f64 / 100.0))
        .filter(|g| g.is_finite())
        .fold(0.0, f64::max);
    10.0_f64.max(2.0 * sup)
}

/// Solves `G(R) = R` on `(r_f, upper)`; `upper = None` uses [`default_upper`].
pub fn solve_bubbly_rate(econ: &ReducedFormEconomy, r_f: f64, upper: Option<f64>, tol: f64) -> Result<f64, ReducedFormError> {
    if !(tol > 0.0) {
        return Err(ReducedFormError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let g_f = econ.growth(r_f);
    if !g_f.is_finite() {
        return Err(ReducedFormError::NonFiniteGrowth { rate: r_f });
    }
    if !(g_f > r_f) {
        return Err(ReducedFormError::PreconditionFailed { r_f, growth: g_f });
    }
    let upper = upper.unwrap_or_else(|| default_upper(econ, r_f));
    let gap = |r: f64| econ.growth(r) - r;
    let g_u = gap(upper);
    if !(g_u < 0.0) {
        return Err(ReducedFormError::NoSignChange { lo: r_f, hi: upper, f_lo: g_f - r_f, f_hi: g_u });
    }
    let root = bisect(gap, r_f, upper, BisectOptions::default()).map_err(|e| match e {
        crate::roots::BracketError::NonFinite { x } => ReducedFormError::NonFiniteGrowth { rate: x },
        _ => ReducedFormError::NoSignChange { lo: r_f, hi: upper, f_lo: g_f - r_f, f_hi: g_u },
    })?;
    if root.value.abs() > tol {
        return Err(ReducedFormError::ToleranceNotMet { rate: root.x, residual: root.value.abs(), tol });
    }
    Ok(root.x)
}

/// Bubbly balanced-growth equilibrium `P_t = p W_0 R_b^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleSolution {
    pub r_f: f64,
    pub r_b: f64,
    pub growth_at_rb: f64,
    pub saving_rate_at_rb: f64,
    /// True when the saving set at `r_b` was not a single point.
    pub ambiguous_saving: bool,
}

impl BubbleSolution {
    /// `P_0, ..., P_horizon` built by repeated multiplication, so
    /// `P_{t+1} = P_t * R_b` holds bit for bit.
    pub fn price_path(&self, w0: f64, horizon: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(horizon + 1);
        let mut p = self.saving_rate_at_rb * w0;
        out.push(p);
        for _ in 0..horizon {
            p *= self.r_b;
            out.push(p);
        }
        out
    }

    pub fn price(&self, t: usize, w0: f64) -> f64 {
        *self.price_path(w0, t).last().expect("non-empty")
    }
}

/// Fundamental rate on `bracket`, then the bubbly rate above it and the
/// saving rate selected at the bubbly rate.
pub fn solve_bubbly_equilibrium(
    econ: &ReducedFormEconomy,
    bracket: (f64, f64),
    upper: Option<f64>,
    tol: f64,
) -> Result<BubbleSolution, ReducedFormError> {
    let r_f = solve_fundamental_rate(econ, bracket, tol)?;
    let r_b = solve_bubbly_rate(econ, r_f, upper, tol)?;
    let set = econ.saving(r_b);
    if !(set.hi > 0.0) {
        return Err(ReducedFormError::NoBubblyEquilibrium { rate: r_b, lo: set.lo, hi: set.hi });
    }
    let positive = SavingInterval::new(set.lo.max(0.0), set.hi);
    Ok(BubbleSolution {
        r_f,
        r_b,
        growth_at_rb: econ.growth(r_b),
        saving_rate_at_rb: positive.midpoint(),
        ambiguous_saving: !set.is_degenerate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NecessityViolation {
    /// `R_limit >= G_d`: the present value of dividends is finite.
    RateNotBelowDividendGrowth,
    /// `G_d >= G`: dividends are not negligible relative to the economy.
    DividendGrowthNotBelowGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NecessityVerdict {
    FundamentalEliminated,
    NotEliminated { violated: NecessityViolation },
}

impl NecessityVerdict {
    pub fn is_eliminated(&self) -> bool {
        matches!(self, NecessityVerdict::FundamentalEliminated)
    }
}

/// `R_limit < G_d < G`: a fundamental price would have to grow at `G_d`
/// while its present value at the limiting rate diverges.
pub fn check_necessity(r_limit: f64, g_d: f64, g: f64) -> NecessityVerdict {
    if !strictly_less(r_limit, g_d) {
        NecessityVerdict::NotEliminated { violated: NecessityViolation::RateNotBelowDividendGrowth }
    } else if !strictly_less(g_d, g) {
        NecessityVerdict::NotEliminated { violated: NecessityViolation::DividendGrowthNotBelowGrowth }
    } else {
        NecessityVerdict::FundamentalEliminated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn linear() -> ReducedFormEconomy {
        ReducedFormEconomy::new("linear", |r| 0.5 * r + 0.3, |r| SavingInterval::point(r - 0.4))
    }

    #[test]
    fn linear_fixed_point() {
        let e = linear();
        let r_f = solve_fundamental_rate(&e, (0.1, 2.0), 1e-12).unwrap();
        assert!((r_f - 0.4).abs() < 1e-14);
        let r_b = solve_bubbly_rate(&e, 0.4, None, 1e-12).unwrap();
        assert!((r_b - 0.6).abs() < 1e-14);
    }

    #[test]
    fn no_gap_is_reported() {
        let e = ReducedFormEconomy::new("flat", |_| 1.0, |r| SavingInterval::point(r - 1.5));
        assert!(matches!(solve_bubbly_rate(&e, 1.5, None, 1e-10), Err(ReducedFormError::PreconditionFailed { .. })));
    }

    #[test]
    fn bad_bracket() {
        let e = linear();
        assert!(matches!(solve_fundamental_rate(&e, (0.5, 2.0), 1e-12), Err(ReducedFormError::NoSignChange { .. })));
    }

    #[test]
    fn indifference_interval_uses_positive_part() {
        let e = ReducedFormEconomy::new("interval", |_| 1.2, |r| {
            if (r - 1.2).abs() < 1e-3 {
                SavingInterval::new(-0.2, 0.6)
            } else {
                SavingInterval::point(r - 0.8)
            }
        });
        let sol = solve_bubbly_equilibrium(&e, (0.5, 1.0), None, 1e-10).unwrap();
        assert!(sol.ambiguous_saving);
        assert!((sol.saving_rate_at_rb - 0.3).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_saving_at_bubbly_rate() {
        let e = ReducedFormEconomy::new("neg", |_| 1.2, |r| SavingInterval::point(if r > 1.0 { -0.1 } else { r - 0.8 }));
        assert!(matches!(solve_bubbly_equilibrium(&e, (0.5, 1.0), None, 1e-10), Err(ReducedFormError::NoBubblyEquilibrium { .. })));
    }

    #[test]
    fn necessity_examples() {
        assert!(check_necessity(0.8, 1.0, 1.2).is_eliminated());
        assert_eq!(
            check_necessity(1.0, 1.0, 1.2),
            NecessityVerdict::NotEliminated { violated: NecessityViolation::RateNotBelowDividendGrowth }
        );
        assert_eq!(
            check_necessity(0.9, 1.3, 1.2),
            NecessityVerdict::NotEliminated { violated: NecessityViolation::DividendGrowthNotBelowGrowth }
        );
        // 1.2/1.5 rounds just below 0.8
        assert!(!check_necessity(1.2 / 1.5, 0.8, 1.2).is_eliminated());
    }

    #[test]
    fn continuity_and_large_rate_checks() {
        let e = linear();
        assert!(e.check_continuity(0.0, 5.0, 1000).passed);
        assert!(e.check_growth_below_rate(0.61, 10.0, 1000).passed);
        assert!(!e.check_growth_below_rate(0.5, 10.0, 1000).passed);
        let jumpy = ReducedFormEconomy::new("jump", |r| if r < 1.0 { 0.5 } else { 1.5 }, |_| SavingInterval::point(0.0));
        assert!(!jumpy.check_continuity(0.0, 2.0, 1000).passed);
    }

    proptest! {
        #[test]
        fn price_path_is_geometric(p in 0.01f64..2.0, rb in 0.5f64..2.0, w0 in 0.1f64..10.0) {
            let sol = BubbleSolution { r_f: 0.1, r_b: rb, growth_at_rb: rb, saving_rate_at_rb: p, ambiguous_saving: false };
            let path = sol.price_path(w0, 40);
            for w in path.windows(2) {
                prop_assert_eq!(w[1], w[0] * rb);
            }
        }
    }
}

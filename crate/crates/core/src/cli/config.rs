//! Scenario files: TOML with a `model`, a `[params]` table handed to the
//! model's own deserializer, and optional `[tolerances]`, `[initial]` and
//! `[sweep]` tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::ModelId;
use crate::infinite::kocherlakota::KocherlakotaParams;
use crate::infinite::leverage::LeverageParams;
use crate::infinite::storage::StorageRiskParams;
use crate::olg::samuelson::SamuelsonParams;
use crate::olg::tirole::TiroleParams;
use crate::reduced_form::{Adapter, ReducedFormEconomy, SavingInterval};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Steady,
    Determinacy,
    Path,
    Sweep,
    Verify,
}

impl std::fmt::Display for RunKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RunKind::Steady => "steady",
            RunKind::Determinacy => "determinacy",
            RunKind::Path => "path",
            RunKind::Sweep => "sweep",
            RunKind::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Terminal deviation accepted by the shooting solver.
    pub path: f64,
    /// Residual threshold for `verify`.
    pub verify: f64,
    /// Bisection tolerance for reduced-form rates.
    pub reduced_form: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { path: 1e-8, verify: 1e-8, reduced_form: 1e-12 }
    }
}

/// Starting point for `path` and `verify`. Unset fields fall back to the
/// fundamental steady state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Initial {
    /// Tirole capital per young agent.
    pub k0: Option<f64>,
    /// Leverage capital-labor ratio of productive entrepreneurs.
    pub y0: Option<f64>,
    /// Reduced-form initial wealth.
    pub w0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted key into `[params]`, e.g. `G_d` or `utility.eis`.
    pub parameter: String,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    /// What each row computes; `determinacy` for models with dynamics,
    /// `steady` otherwise.
    #[serde(default)]
    pub run: Option<RunKind>,
}

impl SweepSpec {
    /// Explicit grid, or `start, start + step, ...` up to `stop` inclusive.
    /// Points are `start + i step` rounded to 12 decimals, so decimal steps
    /// land on their decimal values (`0.7 + 2 * 0.05` is `0.8`).
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let bad = |m: &str| Err(CliError::ConfigInvalid(format!("sweep: {m}")));
        let points = match (&self.grid, self.start, self.stop, self.step) {
            (Some(g), None, None, None) => g.clone(),
            (None, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0) || !(b >= a) {
                    return bad("need step > 0 and stop >= start");
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                if n > 1_000_000 {
                    return bad("more than a million grid points");
                }
                (0..=n).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect()
            }
            _ => return bad("give either grid = [...] or start, stop and step"),
        };
        if points.is_empty() {
            return bad("grid is empty");
        }
        if let Some(x) = points.iter().find(|x| !x.is_finite()) {
            return Err(CliError::ConfigInvalid(format!("sweep: grid value {x} is not finite")));
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelId,
    #[serde(default)]
    pub run: Option<RunKind>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    pub params: toml::Table,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_horizon() -> usize {
    200
}

/// Parameters after model-specific parsing and validation.
#[derive(Debug, Clone)]
pub enum ModelParams {
    Samuelson(SamuelsonParams),
    Tirole(TiroleParams),
    Kocherlakota(KocherlakotaParams),
    Leverage(LeverageParams),
    StorageRisk(StorageRiskParams),
    ReducedFormCustom(TabulatedReducedForm),
}

fn typed<T: serde::de::DeserializeOwned>(model: ModelId, table: &toml::Table) -> Result<T, CliError> {
    toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e| CliError::ConfigInvalid(format!("params for {model}: {}", e.to_string().trim())))
}

fn invalid<E: std::fmt::Display>(model: ModelId) -> impl Fn(E) -> CliError {
    move |e| CliError::ConfigInvalid(format!("params for {model}: {e}"))
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string().trim().to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Structural checks that do not depend on the model.
    pub fn check(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [("path", t.path), ("verify", t.verify), ("reduced_form", t.reduced_form)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::ConfigInvalid(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if self.horizon == 0 {
            return Err(CliError::ConfigInvalid("horizon must be at least 1".into()));
        }
        if let Some(s) = &self.sweep {
            s.points()?;
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let m = self.model;
        let t = &self.params;
        Ok(match m {
            ModelId::Samuelson => {
                let p: SamuelsonParams = typed(m, t)?;
                p.validate().map_err(invalid(m))?;
                ModelParams::Samuelson(p)
            }
            ModelId::Tirole => {
                let p: TiroleParams = typed(m, t)?;
                p.validate().map_err(invalid(m))?;
                ModelParams::Tirole(p)
            }
            ModelId::Kocherlakota => {
                let p: KocherlakotaParams = typed(m, t)?;
                p.validate().map_err(invalid(m))?;
                ModelParams::Kocherlakota(p)
            }
            ModelId::Leverage => {
                let p: LeverageParams = typed(m, t)?;
                p.validate().map_err(invalid(m))?;
                ModelParams::Leverage(p)
            }
            ModelId::StorageRisk => {
                let p: StorageRiskParams = typed(m, t)?;
                p.validate().map_err(invalid(m))?;
                ModelParams::StorageRisk(p)
            }
            ModelId::ReducedFormCustom => {
                let p: TabulatedReducedForm = typed(m, t)?;
                p.validate().map_err(invalid(m))?;
                ModelParams::ReducedFormCustom(p)
            }
        })
    }

    /// Copy with `params.<dotted>` set to `value`. The key must already exist
    /// (possibly through a default) or its parent table must.
    pub fn with_param(&self, dotted: &str, value: f64) -> Result<Self, CliError> {
        let mut out = self.clone();
        let keys: Vec<&str> = dotted.split('.').collect();
        let (last, parents) = keys.split_last().expect("split yields at least one piece");
        let mut table = &mut out.params;
        for k in parents {
            table = match table.get_mut(*k) {
                Some(toml::Value::Table(inner)) => inner,
                _ => return Err(CliError::ConfigInvalid(format!("sweep parameter {dotted}: params.{k} is not a table"))),
            };
        }
        if last.is_empty() {
            return Err(CliError::ConfigInvalid(format!("sweep parameter {dotted:?} is malformed")));
        }
        table.insert((*last).to_string(), toml::Value::Float(value));
        Ok(out)
    }
}

/// User-supplied reduced form: `G(R)` and `s(R)` tabulated on an increasing
/// rate grid and interpolated linearly; flat beyond the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedReducedForm {
    pub rates: Vec<f64>,
    pub growth: Vec<f64>,
    pub saving: Vec<f64>,
    /// Bracket for the fundamental rate; defaults to the grid ends.
    #[serde(default)]
    pub bracket: Option<[f64; 2]>,
    /// Search ceiling for the bubbly rate; defaults to the last grid rate.
    #[serde(default)]
    pub upper: Option<f64>,
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&r| r <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

impl TabulatedReducedForm {
    pub fn validate(&self) -> Result<(), String> {
        let n = self.rates.len();
        if n < 2 {
            return Err("need at least two tabulated rates".into());
        }
        if self.growth.len() != n || self.saving.len() != n {
            return Err(format!("{n} rates but {} growth and {} saving values", self.growth.len(), self.saving.len()));
        }
        if self.rates.iter().chain(&self.growth).chain(&self.saving).any(|x| !x.is_finite()) {
            return Err("tabulated values must be finite".into());
        }
        if self.rates.windows(2).any(|w| !(w[0] < w[1])) || !(self.rates[0] > 0.0) {
            return Err("rates must be positive and strictly increasing".into());
        }
        if let Some([lo, hi]) = self.bracket {
            if !(lo > 0.0 && lo < hi) {
                return Err(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi"));
            }
        }
        Ok(())
    }

    pub fn growth_at(&self, rate: f64) -> f64 {
        interpolate(&self.rates, &self.growth, rate)
    }

    pub fn saving_at(&self, rate: f64) -> f64 {
        interpolate(&self.rates, &self.saving, rate)
    }

    pub fn adapter(&self) -> Adapter {
        let (a, b) = (self.clone(), self.clone());
        let last = *self.rates.last().expect("validated");
        let bracket = self.bracket.map(|[lo, hi]| (lo, hi)).unwrap_or((self.rates[0], last));
        let economy = ReducedFormEconomy::new(
            "reduced_form_custom",
            move |r| a.growth_at(r),
            move |r| SavingInterval::point(b.saving_at(r)),
        );
        Adapter {
            economy,
            fundamental_bracket: bracket,
            bubbly_upper: Some(self.upper.unwrap_or(last)),
            closed_form_fundamental: None,
            closed_form_bubbly: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMUELSON: &str = r#"
model = "samuelson"
run = "steady"
[params]
a = 3.0
b = 1.0
beta = 0.5
G = 1.2
"#;

    #[test]
    fn parses_and_validates() {
        let c = ScenarioConfig::from_toml_str(SAMUELSON).unwrap();
        assert_eq!(c.model, ModelId::Samuelson);
        assert_eq!(c.horizon, 200);
        assert!(matches!(c.model_params().unwrap(), ModelParams::Samuelson(_)));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("{SAMUELSON}\nalpha = 0.3\n");
        let err = ScenarioConfig::from_toml_str(&text).unwrap().model_params().unwrap_err();
        assert!(matches!(err, CliError::ConfigInvalid(_)), "{err}");
        assert!(ScenarioConfig::from_toml_str(&format!("colour = 1\n{SAMUELSON}")).is_err());
    }

    #[test]
    fn range_grid_is_inclusive() {
        let s = SweepSpec { parameter: "G_d".into(), grid: None, start: Some(0.7), stop: Some(1.3), step: Some(0.05), run: None };
        let pts = s.points().unwrap();
        assert_eq!(pts.len(), 13);
        assert_eq!(pts[2], 0.8);
        assert_eq!(pts[12], 1.3);
        let empty = SweepSpec { grid: Some(vec![]), start: None, stop: None, step: None, ..s };
        assert!(matches!(empty.points(), Err(CliError::ConfigInvalid(_))));
    }

    #[test]
    fn nested_override() {
        let text = r#"
model = "tirole"
[params]
delta = 1.0
G = 1.05
production = { technology = { kind = "cobb_douglas", alpha = 0.25 } }
utility = { kind = "ces", beta = 0.9, eis = 0.5 }
"#;
        let c = ScenarioConfig::from_toml_str(text).unwrap().with_param("utility.eis", 1.5).unwrap();
        match c.model_params().unwrap() {
            ModelParams::Tirole(p) => assert_eq!(p.utility.constant_eis(), Some(1.5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let t = TabulatedReducedForm { rates: vec![1.0, 2.0], growth: vec![1.5, 1.5], saving: vec![-1.0, 1.0], bracket: None, upper: None };
        assert!((t.saving_at(1.25) + 0.5).abs() < 1e-15);
        assert_eq!(t.saving_at(5.0), 1.0);
    }
}

//! Two-agent exchange economy with alternating endowments `a G^t`, `b G^t`
//! and CRRA utility. Only the reduced form is exposed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduced_form::{Adapter, ReducedFormEconomy, SavingInterval};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KocherlakotaError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KocherlakotaParams {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "G")]
    pub g: f64,
}

impl KocherlakotaParams {
    pub fn new(a: f64, b: f64, beta: f64, gamma: f64, g: f64) -> Self {
        Self { a, b, beta, gamma, g }
    }

    pub fn validate(&self) -> Result<(), KocherlakotaError> {
        let bad = |m: String| Err(KocherlakotaError::InvalidParams(m));
        if !(self.b > 0.0 && self.a > self.b && self.a.is_finite()) {
            return bad(format!("need a > b > 0, got a={}, b={}", self.a, self.b));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return bad(format!("G must be positive, got {}", self.g));
        }
        if !(self.beta * self.g.powf(1.0 - self.gamma) < 1.0) {
            return bad(format!(
                "existence requires beta G^(1-gamma) < 1, got {}",
                self.beta * self.g.powf(1.0 - self.gamma)
            ));
        }
        Ok(())
    }

    /// `(1/beta) ((b/a) G)^gamma`
    pub fn fundamental_rate(&self) -> f64 {
        (self.b / self.a * self.g).powf(self.gamma) / self.beta
    }

    /// `b < (beta G^(1-gamma))^(1/gamma) a`
    pub fn low_interest(&self) -> bool {
        self.b < self.discount_root() * self.a
    }

    fn discount_root(&self) -> f64 {
        (self.beta * self.g.powf(1.0 - self.gamma)).powf(1.0 / self.gamma)
    }

    /// Bubble-to-endowment coefficient in `P_t = coef * G^t` at `R = G`.
    pub fn bubbly_price_coefficient(&self) -> f64 {
        let m = self.discount_root();
        (m * self.a - self.b) / (1.0 + m)
    }
}

/// `s(R) = ((beta R)^(1/gamma) - (b/a) G) / (R + (beta R)^(1/gamma))`.
pub fn kocherlakota_saving_rate(params: &KocherlakotaParams, rate: f64) -> f64 {
    let m = (params.beta * rate).powf(1.0 / params.gamma);
    (m - params.b / params.a * params.g) / (rate + m)
}

/// Reduced form with `W_t = a G^t` and constant growth `G`.
pub fn kocherlakota_reduced_form(params: &KocherlakotaParams) -> Result<Adapter, KocherlakotaError> {
    params.validate()?;
    let p = *params;
    let g = params.g;
    let r_f = params.fundamental_rate();
    let economy = ReducedFormEconomy::new("kocherlakota", move |_| g, move |r| {
        SavingInterval::point(kocherlakota_saving_rate(&p, r))
    })
    .with_large_rate(g);
    Ok(Adapter {
        economy,
        fundamental_bracket: (r_f / 16.0, r_f * 16.0),
        bubbly_upper: Some(2.0 * g.max(r_f)),
        closed_form_fundamental: Some(r_f),
        closed_form_bubbly: Some(g),
    })
}

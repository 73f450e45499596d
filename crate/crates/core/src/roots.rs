//! Bracketed scalar root finding.
//!
//! Every one-dimensional solve in the crate (interest rates, capital-labor
//! ratios, consumption first-order conditions, portfolio shares) goes through
//! [`bisect`]. Bisection is slow but its bracket invariant makes failures easy
//! to report and the result independent of starting guesses.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BracketError {
    #[error("no sign change on [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("non-finite function value at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
}

/// Stopping rule for [`bisect`].
///
/// `xtol = 0.0` bisects until the bracket cannot be split any further in
/// floating point.
#[derive(Debug, Clone, Copy)]
pub struct BisectOptions {
    pub xtol: f64,
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self { xtol: 0.0, ftol: 0.0, max_iter: 400 }
    }
}

impl BisectOptions {
    pub fn with_xtol(xtol: f64) -> Self {
        Self { xtol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Final bracket, still containing a sign change (or an exact zero).
    pub bracket: (f64, f64),
}

/// Finds a root of `f` on `[lo, hi]`, which must straddle a sign change.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, opts: BisectOptions) -> Result<Root, BracketError>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(BracketError::InvalidBracket { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    if !fa.is_finite() {
        return Err(BracketError::NonFinite { x: a });
    }
    if fa == 0.0 {
        return Ok(Root { x: a, value: 0.0, iterations: 0, bracket: (a, a) });
    }
    let fb = f(b);
    if !fb.is_finite() {
        return Err(BracketError::NonFinite { x: b });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, value: 0.0, iterations: 0, bracket: (b, b) });
    }
    if fa.signum() == fb.signum() {
        return Err(BracketError::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }

    let mut best = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=opts.max_iter {
        let mid = a + 0.5 * (b - a);
        if mid <= a || mid >= b {
            return Ok(Root { x: best.0, value: best.1, iterations: it, bracket: (a, b) });
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(BracketError::NonFinite { x: mid });
        }
        if fm.abs() <= best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 {
            return Ok(Root { x: mid, value: 0.0, iterations: it, bracket: (mid, mid) });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        let width_done = opts.xtol > 0.0 && (b - a) <= opts.xtol;
        let value_done = opts.ftol > 0.0 && fm.abs() <= opts.ftol;
        if width_done || value_done {
            return Ok(Root { x: mid, value: fm, iterations: it, bracket: (a, b) });
        }
    }
    Ok(Root { x: best.0, value: best.1, iterations: opts.max_iter, bracket: (a, b) })
}

/// Evaluates `f` on `grid` and returns every adjacent pair whose values change
/// sign (an exact zero counts as the start of a new sign run).
pub fn sign_changes<F>(mut f: F, grid: &[f64]) -> Vec<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    grid.windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0].is_finite() && v[1].is_finite())
        .filter(|(_, v)| (v[0] < 0.0 && v[1] >= 0.0) || (v[0] > 0.0 && v[1] <= 0.0))
        .map(|(x, _)| (x[0], x[1]))
        .collect()
}

/// `n` points spaced evenly in log scale on `[lo, hi]`, both positive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `n` points spaced evenly on the open interval `(lo, hi)`.
pub fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, BisectOptions::default()).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reports_missing_sign_change() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, BisectOptions::default()).unwrap_err();
        assert!(matches!(err, BracketError::NoSignChange { .. }));
    }

    #[test]
    fn exact_endpoint_root() {
        let r = bisect(|x| x - 1.0, 1.0, 3.0, BisectOptions::default()).unwrap();
        assert_eq!(r.x, 1.0);
    }

    #[test]
    fn ftol_stops_early() {
        let r = bisect(|x| x - 0.3, 0.0, 1.0, BisectOptions { ftol: 1e-3, ..Default::default() })
            .unwrap();
        assert!(r.value.abs() <= 1e-3);
        assert!(r.iterations < 20);
    }

    #[test]
    fn counts_sign_changes() {
        let grid = open_grid(0.0, 4.0, 399);
        let changes = sign_changes(|x| (x - 1.0) * (x - 3.0), &grid);
        assert_eq!(changes.len(), 2);
    }
}

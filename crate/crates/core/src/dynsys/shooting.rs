//! Saddle-path construction by shooting on the single forward-looking
//! coordinate.
//!
//! The shooting function maps a trial value of the free coordinate to the
//! deviation of the forward orbit from the target along the unstable left
//! eigenvector, read off when the orbit escapes, leaves the admissible
//! region, or reaches the end of the window. Its unique sign change is the
//! stable-manifold value. Forward iteration from that value alone cannot stay
//! on the manifold for long (round-off grows like `|lambda_u|^t`), so the
//! path is re-anchored every period: the free coordinate of each new state is
//! re-solved in a tight bracket around the mapped value. The corrections are
//! at round-off level and are reported in `max_reanchor`.

use nalgebra::DVector;

use super::{
    left_eigenvector, sup_norm, Classification, DynError,
    EquilibriumPath, MapSystem, State, SteadyState,
};
use crate::roots::{bisect, BisectOptions};

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    /// Admissible range of the free coordinate.
    pub bracket: (f64, f64),
    /// Forward steps per trial orbit.
    pub window: usize,
    /// Deviation along the unstable direction at which a trial orbit counts
    /// as escaped; relative to `max(1, |target|)`, and never below twice the
    /// starting deviation.
    pub escape: f64,
    pub reanchor: bool,
    pub fd_step: f64,
}

impl ShootingOptions {
    pub fn new(bracket: (f64, f64)) -> Self {
        Self { bracket, window: 400, escape: 1e-3, reanchor: true, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotOutcome {
    /// Last unstable-direction deviation observed while admissible.
    pub deviation: f64,
    pub steps: usize,
    pub escaped: bool,
    pub left_region: bool,
}

struct Shooter<'a> {
    system: &'a MapSystem,
    target: State,
    direction: DVector<f64>,
    free: usize,
    escape: f64,
    window: usize,
}

impl<'a> Shooter<'a> {
    fn new(system: &'a MapSystem, target: &SteadyState, opts: &ShootingOptions) -> Result<Self, DynError> {
        let free = match system.free_coordinates().as_slice() {
            [i] => *i,
            other => return Err(DynError::TooManyFreeCoordinates { free: other.len() }),
        };
        let unstable = target
            .eigenvalues
            .iter()
            .filter(|z| z.norm() > 1.0)
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or(DynError::NotDeterminate { classification: target.verdict.classification })?;
        let mut direction = left_eigenvector(&target.jacobian, unstable.re);
        if direction[free] < 0.0 {
            direction = -direction;
        }
        Ok(Self {
            system,
            target: target.point.clone(),
            direction,
            free,
            escape: opts.escape * sup_norm(&target.point).max(1.0),
            window: opts.window,
        })
    }

    fn deviation(&self, x: &State) -> f64 {
        self.direction.dot(&(x - &self.target))
    }

    fn shoot(&self, start: &State) -> ShotOutcome {
        let mut x = start.clone();
        let mut d = self.deviation(&x);
        if !self.system.is_admissible(&x) {
            return ShotOutcome { deviation: d, steps: 0, escaped: false, left_region: true };
        }
        // a start farther out than the escape level must first move away
        let escape = self.escape.max(2.0 * d.abs());
        for step in 0..self.window {
            if d.abs() > escape {
                return ShotOutcome { deviation: d, steps: step, escaped: true, left_region: false };
            }
            match self.system.apply(&x) {
                Ok(next) if self.system.is_admissible(&next) => {
                    x = next;
                    d = self.deviation(&x);
                }
                _ => return ShotOutcome { deviation: d, steps: step, escaped: false, left_region: true },
            }
        }
        ShotOutcome { deviation: d, steps: self.window, escaped: false, left_region: false }
    }

    fn with_free(&self, base: &State, value: f64) -> State {
        let mut x = base.clone();
        x[self.free] = value;
        x
    }

    fn solve_free(&self, base: &State, lo: f64, hi: f64) -> Result<f64, DynError> {
        let f = |v: f64| self.shoot(&self.with_free(base, v)).deviation;
        let (dlo, dhi) = (f(lo), f(hi));
        if dlo == 0.0 {
            return Ok(lo);
        }
        if dhi == 0.0 {
            return Ok(hi);
        }
        if dlo.signum() == dhi.signum() {
            return Err(DynError::ShootingFailed { lo, hi, dev_lo: dlo, dev_hi: dhi });
        }
        // |deviation| is read at different escape times, so only the final
        // bracket is meaningful, not the smallest observed value
        bisect(f, lo, hi, BisectOptions::default())
            .map(|r| 0.5 * (r.bracket.0 + r.bracket.1))
            .map_err(|_| DynError::ShootingFailed { lo, hi, dev_lo: dlo, dev_hi: dhi })
    }

    /// Re-solves the free coordinate of `x` near its current value.
    fn reanchor(&self, x: &State, bracket: (f64, f64)) -> Option<f64> {
        let center = x[self.free];
        let mut radius = 1e-10 * center.abs().max(1.0);
        for _ in 0..12 {
            let lo = (center - radius).max(bracket.0);
            let hi = (center + radius).min(bracket.1);
            if let Ok(v) = self.solve_free(x, lo, hi) {
                return Some(v);
            }
            radius *= 16.0;
        }
        None
    }
}

fn assemble(system: &MapSystem, predetermined: &[f64], free_value: f64) -> State {
    let mut x = State::zeros(system.dimension());
    for (&i, &v) in system.predetermined().iter().zip(predetermined) {
        x[i] = v;
    }
    for i in system.free_coordinates() {
        x[i] = free_value;
    }
    x
}

/// Evaluates the shooting function at one trial value of the free coordinate.
pub fn shooting_deviation(
    system: &MapSystem,
    target: &SteadyState,
    initial_predetermined: &[f64],
    free_value: f64,
    opts: &ShootingOptions,
) -> Result<ShotOutcome, DynError> {
    check_predetermined(system, initial_predetermined)?;
    let shooter = Shooter::new(system, target, opts)?;
    Ok(shooter.shoot(&assemble(system, initial_predetermined, free_value)))
}

fn check_predetermined(system: &MapSystem, values: &[f64]) -> Result<(), DynError> {
    if values.len() != system.predetermined_count() {
        return Err(DynError::InvalidArgument(format!(
            "expected {} predetermined values, got {}",
            system.predetermined_count(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DynError::InvalidArgument("predetermined values must be finite".into()));
    }
    Ok(())
}

/// Constructs the orbit that starts from the given predetermined coordinates
/// and converges to `target`.
///
/// With no free coordinate the path is plain forward iteration. With one, the
/// free initial value is found by bisection on the shooting function over
/// `opts.bracket`.
pub fn solve_saddle_path(
    system: &MapSystem,
    initial_predetermined: &[f64],
    target: &SteadyState,
    horizon: usize,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<EquilibriumPath, DynError> {
    if horizon == 0 {
        return Err(DynError::InvalidArgument("horizon must be at least 1".into()));
    }
    check_predetermined(system, initial_predetermined)?;
    let verdict = target.classify(system.predetermined_count(), super::DEFAULT_HYPERBOLICITY_MARGIN);
    if verdict.classification != Classification::LocallyDeterminate {
        return Err(DynError::NotDeterminate { classification: verdict.classification });
    }

    let mut states: Vec<State> = Vec::with_capacity(horizon + 1);
    let mut max_reanchor = 0.0_f64;
    if system.free_coordinates().is_empty() {
        states = system.iterate(&assemble(system, initial_predetermined, 0.0), horizon)?;
    } else {
        let shooter = Shooter::new(system, target, opts)?;
        let base = assemble(system, initial_predetermined, opts.bracket.0);
        let x0 = shooter.solve_free(&base, opts.bracket.0, opts.bracket.1)?;
        states.push(shooter.with_free(&base, x0));
        for _ in 0..horizon {
            let mut next = system.apply(states.last().expect("non-empty"))?;
            if opts.reanchor {
                if let Some(v) = shooter.reanchor(&next, opts.bracket) {
                    max_reanchor = max_reanchor.max((v - next[shooter.free]).abs());
                    next[shooter.free] = v;
                }
            }
            states.push(next);
        }
    }

    let deviation = sup_norm(&(states.last().expect("non-empty") - &target.point));
    let mut path = EquilibriumPath::from_states(states);
    path.step_residuals = path.forward_residuals(system)?;
    path.max_reanchor = max_reanchor;
    if !(deviation <= tol) {
        return Err(DynError::TerminalDeviation { deviation, tol });
    }
    Ok(path)
}

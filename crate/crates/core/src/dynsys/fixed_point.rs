use nalgebra::DMatrix;

use super::{
    classify_eigenvalues, eigenvalues, sup_norm, DynError, MapSystem, State, SteadyState,
    DEFAULT_HYPERBOLICITY_MARGIN,
};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Sup-norm bound on `h(x) - x` at the returned point.
    pub tol: f64,
    pub max_iter: usize,
    /// Step-length halvings allowed per Newton iteration.
    pub max_halvings: usize,
    /// Finite-difference step, scaled by `max(1, |x|)`.
    pub fd_step: f64,
    pub margin: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            max_halvings: 30,
            fd_step: 1e-6,
            margin: DEFAULT_HYPERBOLICITY_MARGIN,
        }
    }
}

impl NewtonOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Damped Newton iteration on `h(x) - x`, halving the step until the residual
/// decreases.
pub fn find_fixed_point(system: &MapSystem, guess: &State, opts: &NewtonOptions) -> Result<SteadyState, DynError> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(DynError::InvalidArgument("tol must be positive and max_iter at least 1".into()));
    }
    if guess.iter().any(|v| !v.is_finite()) {
        return Err(DynError::InvalidArgument("guess must be finite".into()));
    }
    let n = system.dimension();
    let identity = DMatrix::<f64>::identity(n, n);
    let residual = |x: &State| -> Result<State, DynError> { Ok(system.apply(x)? - x) };

    let mut x = guess.clone();
    let mut fx = residual(&x)?;
    let mut norm = sup_norm(&fx);
    let mut iterations = 0;
    // after the tolerance is met, a few more full steps are taken as long as
    // they keep reducing the residual
    let mut polish = 3;
    while norm > opts.tol || polish > 0 {
        if norm <= opts.tol {
            polish -= 1;
            if norm == 0.0 {
                break;
            }
        }
        if iterations == opts.max_iter {
            if norm <= opts.tol {
                break;
            }
            return Err(DynError::NoConvergence { iterations, residual: norm, point: x.iter().copied().collect() });
        }
        iterations += 1;
        let step_size = opts.fd_step * sup_norm(&x).max(1.0);
        let jac = system.jacobian(&x, step_size)? - &identity;
        let sv = jac.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > 1e-10 * smax.max(1.0)) {
            if norm <= opts.tol {
                break;
            }
            return Err(DynError::SingularJacobian { point: x.iter().copied().collect() });
        }
        let delta = jac
            .lu()
            .solve(&(-&fx))
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or_else(|| DynError::SingularJacobian { point: x.iter().copied().collect() })?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = &x + &delta * t;
            if let Ok(f_trial) = residual(&trial) {
                let n_trial = sup_norm(&f_trial);
                if n_trial < norm || (norm <= opts.tol && n_trial <= norm && t == 1.0) {
                    accepted = Some((trial, f_trial, n_trial));
                    break;
                }
            }
            if norm <= opts.tol {
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, fn_, nn)) => {
                x = xn;
                fx = fn_;
                norm = nn;
            }
            None if norm <= opts.tol => break,
            None => {
                return Err(DynError::NoConvergence { iterations, residual: norm, point: x.iter().copied().collect() });
            }
        }
    }
    steady_state_at(system, &x, opts.fd_step, opts.margin)
}

/// Linearizes `system` at `point` (assumed to be a fixed point) and classifies it.
pub fn steady_state_at(system: &MapSystem, point: &State, fd_step: f64, margin: f64) -> Result<SteadyState, DynError> {
    let residual_norm = sup_norm(&(system.apply(point)? - point));
    let jacobian = system.jacobian(point, fd_step * sup_norm(point).max(1.0))?;
    let eigenvalues = eigenvalues(&jacobian);
    let verdict = classify_eigenvalues(&eigenvalues, system.predetermined_count(), margin);
    Ok(SteadyState { point: point.clone(), residual_norm, jacobian, eigenvalues, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::Classification;
    use nalgebra::DVector;

    #[test]
    fn contraction_in_one_dimension() {
        let sys = MapSystem::new(1, vec![0], |x: &State| x * 0.5).unwrap();
        let ss = find_fixed_point(&sys, &DVector::from_vec(vec![1.0]), &NewtonOptions::default()).unwrap();
        assert!(ss.point[0].abs() < 1e-12);
        assert_eq!(ss.verdict.classification, Classification::LocallyDeterminate);
    }

    #[test]
    fn identity_has_singular_newton_matrix() {
        let sys = MapSystem::new(1, vec![], |x: &State| x.clone() + DVector::from_vec(vec![1e-3])).unwrap();
        let err = find_fixed_point(&sys, &DVector::from_vec(vec![0.0]), &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, DynError::SingularJacobian { .. }), "{err:?}");
    }

    #[test]
    fn no_fixed_point_exhausts_iterations() {
        // x + 1 + x^2 has no real fixed point
        let sys = MapSystem::new(1, vec![], |x: &State| x.map(|v| v + 1.0 + v * v)).unwrap();
        let err = find_fixed_point(&sys, &DVector::from_vec(vec![0.3]), &NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, DynError::NoConvergence { .. } | DynError::SingularJacobian { .. }));
    }

    #[test]
    fn rejects_bad_options() {
        let sys = MapSystem::new(1, vec![], |x: &State| x * 0.5).unwrap();
        let opts = NewtonOptions { tol: 0.0, ..Default::default() };
        assert!(find_fixed_point(&sys, &DVector::from_vec(vec![1.0]), &opts).is_err());
    }
}

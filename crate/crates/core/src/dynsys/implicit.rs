use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{sup_norm, DynError, MapSystem, State};

pub type ResidualFn = Arc<dyn Fn(&State, &State) -> State + Send + Sync>;

/// Implicit one-step relation `H(x_t, x_{t+1}) = 0`.
#[derive(Clone)]
pub struct ImplicitSystem {
    dimension: usize,
    residual: ResidualFn,
    predetermined: Vec<usize>,
}

impl fmt::Debug for ImplicitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitSystem")
            .field("dimension", &self.dimension)
            .field("predetermined", &self.predetermined)
            .finish()
    }
}

impl ImplicitSystem {
    pub fn new<F>(dimension: usize, predetermined: Vec<usize>, residual: F) -> Result<Self, DynError>
    where
        F: Fn(&State, &State) -> State + Send + Sync + 'static,
    {
        // reuse MapSystem's index validation
        MapSystem::new(dimension, predetermined.clone(), move |x: &State| x.clone())?;
        let mut predetermined = predetermined;
        predetermined.sort_unstable();
        Ok(Self { dimension, residual: Arc::new(residual), predetermined })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn predetermined(&self) -> &[usize] {
        &self.predetermined
    }

    pub fn predetermined_count(&self) -> usize {
        self.predetermined.len()
    }

    pub fn residual(&self, x: &State, y: &State) -> Result<State, DynError> {
        for v in [x, y] {
            if v.len() != self.dimension {
                return Err(DynError::DimensionMismatch { expected: self.dimension, got: v.len() });
            }
        }
        let r = (self.residual)(x, y);
        if r.len() != self.dimension {
            return Err(DynError::DimensionMismatch { expected: self.dimension, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(DynError::NonFiniteEvaluation { point: x.iter().chain(y.iter()).copied().collect() });
        }
        Ok(r)
    }

    /// Central-difference blocks `(D_x H, D_y H)` at `(x, y)`.
    pub fn blocks(&self, x: &State, y: &State, step: f64) -> Result<(DMatrix<f64>, DMatrix<f64>), DynError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(DynError::InvalidArgument(format!("finite-difference step {step} must be positive")));
        }
        let n = self.dimension;
        let mut dx = DMatrix::zeros(n, n);
        let mut dy = DMatrix::zeros(n, n);
        for j in 0..n {
            let (mut xu, mut xd) = (x.clone(), x.clone());
            xu[j] += step;
            xd[j] -= step;
            dx.set_column(j, &((self.residual(&xu, y)? - self.residual(&xd, y)?) / (2.0 * step)));
            let (mut yu, mut yd) = (y.clone(), y.clone());
            yu[j] += step;
            yd[j] -= step;
            dy.set_column(j, &((self.residual(x, &yu)? - self.residual(x, &yd)?) / (2.0 * step)));
        }
        Ok((dx, dy))
    }

    /// Jacobian of the implied forward map, `-(D_y H)^{-1} D_x H`.
    pub fn implied_jacobian(&self, x: &State, y: &State, step: f64) -> Result<DMatrix<f64>, DynError> {
        let (dx, dy) = self.blocks(x, y, step)?;
        dy.lu()
            .solve(&(-dx))
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| DynError::SingularJacobian { point: y.iter().copied().collect() })
    }

    /// Solves `H(x, y) = 0` for `y` by Newton's method from `guess`.
    pub fn solve_next(&self, x: &State, guess: &State, tol: f64, max_iter: usize) -> Result<State, DynError> {
        let mut y = guess.clone();
        let mut r = self.residual(x, &y)?;
        let mut norm = sup_norm(&r);
        let mut it = 0;
        while norm > tol {
            if it == max_iter {
                return Err(DynError::NoConvergence { iterations: it, residual: norm, point: y.iter().copied().collect() });
            }
            it += 1;
            let step = 1e-7 * sup_norm(&y).max(1.0);
            let (_, dy) = self.blocks(x, &y, step)?;
            let delta = dy
                .lu()
                .solve(&(-&r))
                .ok_or_else(|| DynError::SingularJacobian { point: y.iter().copied().collect() })?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = &y + &delta * t;
                if let Ok(rt) = self.residual(x, &trial) {
                    let nt = sup_norm(&rt);
                    if nt < norm {
                        y = trial;
                        r = rt;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(DynError::NoConvergence { iterations: it, residual: norm, point: y.iter().copied().collect() });
            }
        }
        Ok(y)
    }

    /// Explicit map obtained by solving for the next state, warm-started at
    /// the current one.
    pub fn to_map_system(&self, tol: f64) -> MapSystem {
        let this = self.clone();
        let n = self.dimension;
        MapSystem::new(n, self.predetermined.clone(), move |x: &State| {
            this.solve_next(x, x, tol, 100)
                .unwrap_or_else(|_| State::from_element(n, f64::NAN))
        })
        .expect("indices validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_implicit_matches_explicit() {
        // y = A x written as 2y - 2Ax = 0
        let sys = ImplicitSystem::new(2, vec![0], |x: &State, y: &State| {
            State::from_vec(vec![2.0 * (y[0] - 0.5 * x[0]), 2.0 * (y[1] - 1.5 * x[1] - 0.2 * x[0])])
        })
        .unwrap();
        let x = State::from_vec(vec![1.0, 2.0]);
        let y = sys.solve_next(&x, &x, 1e-13, 50).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-12 && (y[1] - 3.2).abs() < 1e-12);
        let j = sys.implied_jacobian(&x, &y, 1e-6).unwrap();
        assert!((j[(0, 0)] - 0.5).abs() < 1e-8);
        assert!((j[(1, 0)] - 0.2).abs() < 1e-8);
        assert!((j[(1, 1)] - 1.5).abs() < 1e-8);
        let map = sys.to_map_system(1e-13);
        assert!((map.apply(&x).unwrap()[1] - 3.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(ImplicitSystem::new(2, vec![2], |_: &State, y: &State| y.clone()).is_err());
    }
}

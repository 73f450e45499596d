use nalgebra::{Complex, DMatrix, DVector};

use super::{DynError, MapSystem, State};

/// Central finite-difference Jacobian with absolute step `step`.
pub fn jacobian_fd(system: &MapSystem, point: &State, step: f64) -> Result<DMatrix<f64>, DynError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(DynError::InvalidArgument(format!("finite-difference step {step} must be positive")));
    }
    let n = system.dimension();
    if point.len() != n {
        return Err(DynError::DimensionMismatch { expected: n, got: point.len() });
    }
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut up = point.clone();
        let mut down = point.clone();
        up[j] += step;
        down[j] -= step;
        let hu = system.apply(&up)?;
        let hd = system.apply(&down)?;
        let col = (hu - hd) / (2.0 * step);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Eigenvalues with multiplicity, sorted by decreasing modulus.
///
/// 1x1, 2x2 and block-triangular 3x3 matrices use closed forms (exact on the
/// diagonal of triangular blocks); everything else goes through a real Schur
/// decomposition.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    let mut out = match m.nrows() {
        0 => Vec::new(),
        1 => vec![Complex::new(m[(0, 0)], 0.0)],
        2 => eig2(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]).to_vec(),
        3 => eig3_block(m).unwrap_or_else(|| general(m)),
        _ => general(m),
    };
    out.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal))
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).iter().fold(0.0, |r, z| r.max(z.norm()))
}

fn eig2(a: f64, b: f64, c: f64, d: f64) -> [Complex<f64>; 2] {
    if b == 0.0 || c == 0.0 {
        return [Complex::new(a, 0.0), Complex::new(d, 0.0)];
    }
    let half_tr = 0.5 * (a + d);
    let det = a * d - b * c;
    // discriminant written as ((a-d)/2)^2 + bc to avoid cancellation in tr^2/4 - det
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let big = if half_tr >= 0.0 { half_tr + root } else { half_tr - root };
        let small = if big != 0.0 { det / big } else { half_tr - root };
        [Complex::new(big, 0.0), Complex::new(small, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex::new(half_tr, im), Complex::new(half_tr, -im)]
    }
}

fn eig3_block(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let e = |i: usize, j: usize| m[(i, j)];
    // isolated (2,2) entry: last row or last column zero off the diagonal
    if (e(2, 0) == 0.0 && e(2, 1) == 0.0) || (e(0, 2) == 0.0 && e(1, 2) == 0.0) {
        let mut v = eig2(e(0, 0), e(0, 1), e(1, 0), e(1, 1)).to_vec();
        v.push(Complex::new(e(2, 2), 0.0));
        return Some(v);
    }
    // isolated (0,0) entry
    if (e(1, 0) == 0.0 && e(2, 0) == 0.0) || (e(0, 1) == 0.0 && e(0, 2) == 0.0) {
        let mut v = eig2(e(1, 1), e(1, 2), e(2, 1), e(2, 2)).to_vec();
        v.push(Complex::new(e(0, 0), 0.0));
        return Some(v);
    }
    None
}

fn general(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Unit left eigenvector `w` with `w^T m = lambda w^T` for a real eigenvalue,
/// taken as the right singular vector of `m^T - lambda I` with the smallest
/// singular value.
pub fn left_eigenvector(m: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m.transpose() - DMatrix::<f64>::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &s)| if s < bv { (i, s) } else { (bi, bv) });
    let w: DVector<f64> = v_t.row(idx).transpose();
    w.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(v: &[Complex<f64>]) -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        r
    }

    #[test]
    fn triangular_two_by_two_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[1.5, -5.0 / 6.0, 0.0, 5.0 / 6.0]);
        let ev = eigenvalues(&m);
        assert_eq!(sorted_re(&ev), vec![5.0 / 6.0, 1.5]);
    }

    #[test]
    fn complex_pair() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = eigenvalues(&m);
        assert!(ev.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
        assert!(ev.iter().any(|z| z.im > 0.0));
    }

    #[test]
    fn block_three_by_three_matches_schur() {
        let m = DMatrix::from_row_slice(3, 3, &[0.3, -0.2, 0.0, -0.1, 1.4, -0.7, 0.0, 0.0, 0.7]);
        let block = eigenvalues(&m);
        let schur = general(&m);
        let (mut a, mut b) = (sorted_re(&block), sorted_re(&schur));
        a.dedup();
        b.dedup();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn general_four_by_four() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, -3.0, 2.0, 0.5]));
        let mut p = DMatrix::identity(4, 4);
        p[(0, 1)] = 1.0;
        p[(2, 3)] = -2.0;
        let a = &p * m * p.clone().try_inverse().unwrap();
        let ev = eigenvalues(&a);
        let re = sorted_re(&ev);
        for (x, y) in re.iter().zip([-3.0, 0.5, 2.0, 4.0]) {
            assert!((x - y).abs() < 1e-10, "{re:?}");
        }
    }

    #[test]
    fn left_eigenvector_of_triangular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.5, -0.8, 0.0, 0.8]);
        let w = left_eigenvector(&m, 1.5);
        let lhs = w.transpose() * &m;
        let rhs = w.transpose() * 1.5;
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

use nalgebra::Complex;

use super::{Classification, DeterminacyVerdict, SteadyState};

/// Eigenvalues whose modulus lies within this distance of 1 are treated as
/// being on the unit circle.
pub const DEFAULT_HYPERBOLICITY_MARGIN: f64 = 1e-8;

/// Counts eigenvalues inside, outside and on the unit circle and compares the
/// stable count with the number of predetermined variables.
pub fn classify_eigenvalues(
    eigenvalues: &[Complex<f64>],
    predetermined_count: usize,
    margin: f64,
) -> DeterminacyVerdict {
    let mut stable = 0;
    let mut unstable = 0;
    let mut on_circle = 0;
    for z in eigenvalues {
        let r = z.norm();
        if r < 1.0 - margin {
            stable += 1;
        } else if r > 1.0 + margin {
            unstable += 1;
        } else {
            on_circle += 1;
        }
    }
    let classification = if on_circle > 0 {
        Classification::NonHyperbolic
    } else if stable == predetermined_count {
        Classification::LocallyDeterminate
    } else if stable > predetermined_count {
        Classification::Indeterminate
    } else {
        Classification::NoConvergentPath
    };
    DeterminacyVerdict {
        stable_count: stable,
        unstable_count: unstable,
        on_circle_count: on_circle,
        predetermined_count,
        classification,
    }
}

pub fn classify_determinacy(state: &SteadyState, predetermined_count: usize, margin: f64) -> DeterminacyVerdict {
    classify_eigenvalues(&state.eigenvalues, predetermined_count, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reals(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn saddle_with_one_predetermined() {
        let v = classify_eigenvalues(&reals(&[1.5, 1.0 / 1.2]), 1, DEFAULT_HYPERBOLICITY_MARGIN);
        assert_eq!(v.classification, Classification::LocallyDeterminate);
        assert_eq!((v.stable_count, v.unstable_count), (1, 1));
    }

    #[test]
    fn two_stable_one_predetermined() {
        let v = classify_eigenvalues(&reals(&[0.5, 0.5]), 1, DEFAULT_HYPERBOLICITY_MARGIN);
        assert_eq!(v.classification, Classification::Indeterminate);
    }

    #[test]
    fn unit_root() {
        let v = classify_eigenvalues(&reals(&[1.0]), 1, DEFAULT_HYPERBOLICITY_MARGIN);
        assert_eq!(v.classification, Classification::NonHyperbolic);
        assert_eq!(v.on_circle_count, 1);
    }

    #[test]
    fn too_few_stable_roots() {
        let v = classify_eigenvalues(&reals(&[2.0, 3.0, 0.1]), 2, DEFAULT_HYPERBOLICITY_MARGIN);
        assert_eq!(v.classification, Classification::NoConvergentPath);
    }

    #[test]
    fn complex_modulus_counts() {
        let ev = vec![Complex::new(0.6, 0.6), Complex::new(0.6, -0.6)];
        let v = classify_eigenvalues(&ev, 2, DEFAULT_HYPERBOLICITY_MARGIN);
        assert_eq!(v.classification, Classification::LocallyDeterminate);
    }

    proptest! {
        #[test]
        fn counts_add_up(moduli in proptest::collection::vec(0.0f64..3.0, 1..6), pre in 0usize..6) {
            let pre = pre.min(moduli.len());
            let v = classify_eigenvalues(&reals(&moduli), pre, 1e-8);
            prop_assert_eq!(v.dimension(), moduli.len());
            let hyperbolic = v.on_circle_count == 0;
            prop_assert_eq!(v.classification == Classification::LocallyDeterminate, hyperbolic && v.stable_count == pre);
            prop_assert_eq!(v.classification == Classification::Indeterminate, hyperbolic && v.stable_count > pre);
            prop_assert_eq!(v.classification == Classification::NoConvergentPath, hyperbolic && v.stable_count < pre);
        }
    }
}

use super::{DynError, EquilibriumPath, State};

/// Builds a path of `steps + 1` states ending at `terminal` by repeatedly
/// applying a one-step inverse map. The inverse reports `InverseUndefined`
/// when a step leaves its domain.
pub fn backward_iterate<F>(inverse: F, terminal: &State, steps: usize) -> Result<EquilibriumPath, DynError>
where
    F: Fn(&State) -> Result<State, DynError>,
{
    let mut rev = Vec::with_capacity(steps + 1);
    rev.push(terminal.clone());
    for _ in 0..steps {
        let prev = inverse(rev.last().expect("non-empty"))?;
        if prev.iter().any(|v| !v.is_finite()) {
            return Err(DynError::InverseUndefined {
                point: rev.last().expect("non-empty").iter().copied().collect(),
                reason: "inverse produced a non-finite state".into(),
            });
        }
        rev.push(prev);
    }
    rev.reverse();
    Ok(EquilibriumPath::from_states(rev))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_is_terminal() {
        let terminal = State::from_vec(vec![0.4, 0.01]);
        let path = backward_iterate(|_: &State| unreachable!(), &terminal, 0).unwrap();
        assert_eq!(path.states, vec![vec![0.4, 0.01]]);
    }

    #[test]
    fn doubling_inverse() {
        let terminal = State::from_vec(vec![1.0]);
        let path = backward_iterate(|x: &State| Ok(x * 0.5), &terminal, 3).unwrap();
        assert_eq!(path.coordinate(0), vec![0.125, 0.25, 0.5, 1.0]);
    }
}

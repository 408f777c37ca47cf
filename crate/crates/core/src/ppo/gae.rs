//! Generalized advantage estimation.

/// Compute advantages and returns for a rollout segment.
///
/// `values` holds one estimate per step plus the bootstrap value of the
/// state after the last step (zero when that state is terminal), so
/// `values.len() == rewards.len() + 1`. A `true` in `dones` marks an episode
/// boundary: the temporal-difference error there ignores the next value and
/// the advantage accumulator truncates. Returns are advantages plus values.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let t_len = rewards.len();
    assert_eq!(values.len(), t_len + 1, "values must include the bootstrap entry");
    assert_eq!(dones.len(), t_len);
    let mut advantages = vec![0.0; t_len];
    let mut acc = 0.0;
    for t in (0..t_len).rev() {
        let next_value = if dones[t] { 0.0 } else { values[t + 1] };
        let delta = rewards[t] + gamma * next_value - values[t];
        acc = if dones[t] { delta } else { delta + gamma * lambda * acc };
        advantages[t] = acc;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_recursion_matches() {
        let (adv, ret) = compute_gae(&[1.0, 1.0], &[0.0, 0.0, 0.0], &[false, true], 1.0, 1.0);
        assert_eq!(adv, vec![2.0, 1.0]);
        assert_eq!(ret, vec![2.0, 1.0]);
    }

    #[test]
    fn lambda_zero_reduces_to_td_error() {
        let rewards = [0.5, -0.25, 2.0];
        let values = [0.1, 0.4, -0.2, 0.3];
        let dones = [false, false, false];
        let gamma = 0.9;
        let (adv, _) = compute_gae(&rewards, &values, &dones, gamma, 0.0);
        for t in 0..3 {
            let delta = rewards[t] + gamma * values[t + 1] - values[t];
            assert!((adv[t] - delta).abs() < 1e-12);
        }
    }

    #[test]
    fn monte_carlo_limit_at_unit_gamma_lambda() {
        // With gamma = lambda = 1 and a terminal end, the advantage is the
        // reward-to-go minus the value.
        let rewards = [1.0, 2.0, 3.0];
        let values = [0.5, 0.25, -0.5, 0.0];
        let dones = [false, false, true];
        let (adv, ret) = compute_gae(&rewards, &values, &dones, 1.0, 1.0);
        let totals = [6.0, 5.0, 3.0];
        for t in 0..3 {
            assert!((adv[t] - (totals[t] - values[t])).abs() < 1e-12);
            assert!((ret[t] - totals[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_uses_bootstrap() {
        let (adv, _) = compute_gae(&[1.0], &[0.0, 10.0], &[false], 0.5, 1.0);
        // delta = 1 + 0.5 * 10 - 0 = 6.
        assert!((adv[0] - 6.0).abs() < 1e-12);
        let (adv, _) = compute_gae(&[1.0], &[0.0, 10.0], &[true], 0.5, 1.0);
        assert!((adv[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn episode_boundary_resets_accumulator() {
        // Two one-step episodes in one segment.
        let (adv, _) = compute_gae(&[1.0, 2.0], &[0.0, 0.0, 0.0], &[true, true], 0.9, 0.95);
        assert_eq!(adv, vec![1.0, 2.0]);
    }
}

//! REINFORCE updates of the policy head during search.

use std::sync::Arc;

use ndarray::Array2;

use crate::Scalar;

use super::forward::{policy_head_log_likelihood_grad, TrunkFeatures};
use super::layers::{masked_softmax, FlopCounter};
use super::params::{Params, PolicyHead, PolicyValueNet};
use super::NetError;

/// One sampled simulation step: the state (as cached trunk features), the
/// action taken and the legal mask, all in the state's canonical frame.
#[derive(Clone, Debug)]
pub struct TrajectoryStep<T> {
    pub features: Arc<TrunkFeatures<T>>,
    pub action: usize,
    pub mask: Vec<bool>,
}

/// Per-step advantage. `leaf_value` is from the perspective of the player
/// acting at step 0; players alternate every step.
#[inline]
fn advantage<T: Scalar>(step: usize, leaf_value: T, baseline: T) -> T {
    let signed = if step.is_multiple_of(2) {
        leaf_value
    } else {
        -leaf_value
    };
    signed - baseline
}

/// `sum_i (V_i - b) * grad log pi(a_i | s_i)` over the policy head parameters.
pub fn reinforce_gradient<T: Scalar>(
    head: &PolicyHead<T>,
    trajectory: &[TrajectoryStep<T>],
    leaf_value: T,
    baseline: T,
    flops: &mut FlopCounter,
) -> Result<PolicyHead<T>, NetError> {
    let mut grad = head.zeroed();
    for (i, step) in trajectory.iter().enumerate() {
        let adv = advantage(i, leaf_value, baseline);
        policy_head_log_likelihood_grad(
            head,
            &step.features,
            step.action,
            &step.mask,
            adv,
            &mut grad,
            flops,
        )?;
    }
    if !grad.all_finite() {
        return Err(NetError::NonFinite("policy gradient"));
    }
    Ok(grad)
}

/// Plain gradient ascent on the policy head:
/// `theta + alpha * (V - b) * sum_i grad log pi(a_i | s_i)`.
pub fn reinforce_step<T: Scalar>(
    head: &PolicyHead<T>,
    trajectory: &[TrajectoryStep<T>],
    leaf_value: T,
    baseline: T,
    alpha: T,
) -> Result<PolicyHead<T>, NetError> {
    let mut next = head.clone();
    reinforce_in_place(&mut next, trajectory, leaf_value, baseline, alpha)?;
    Ok(next)
}

pub fn reinforce_in_place<T: Scalar>(
    head: &mut PolicyHead<T>,
    trajectory: &[TrajectoryStep<T>],
    leaf_value: T,
    baseline: T,
    alpha: T,
) -> Result<(), NetError> {
    if alpha == T::zero() || trajectory.is_empty() {
        return Ok(());
    }
    let grad = reinforce_gradient(
        head,
        trajectory,
        leaf_value,
        baseline,
        &mut FlopCounter::default(),
    )?;
    head.add_scaled(&grad, alpha);
    Ok(())
}

/// One simulation step for full-network adaptation: the encoded state rather
/// than cached features, since the trunk itself moves.
#[derive(Clone, Debug)]
pub struct FullStep<T> {
    pub input: Vec<T>,
    pub action: usize,
    pub mask: Vec<bool>,
}

/// REINFORCE gradient through the whole network, trunk included.
pub fn reinforce_gradient_full<T: Scalar>(
    net: &PolicyValueNet<T>,
    trajectory: &[FullStep<T>],
    leaf_value: T,
    baseline: T,
    flops: &mut FlopCounter,
) -> Result<PolicyValueNet<T>, NetError> {
    let cells = net.config.cells();
    let batch = trajectory.len();
    let inputs: Vec<T> = trajectory
        .iter()
        .flat_map(|s| s.input.iter().copied())
        .collect();
    let tape = net.forward_tape(&inputs, batch);
    let mut d_logits = Array2::zeros((cells, batch));
    for (b, step) in trajectory.iter().enumerate() {
        if !step.mask[step.action] {
            return Err(NetError::IllegalAction(step.action));
        }
        let logits = tape.logits.column(b).to_vec();
        let probs = masked_softmax(&logits, &step.mask)?;
        let adv = advantage(b, leaf_value, baseline);
        for i in 0..cells {
            if step.mask[i] {
                let onehot = if i == step.action {
                    T::one()
                } else {
                    T::zero()
                };
                d_logits[[i, b]] = adv * (onehot - probs[i]);
            }
        }
    }
    let d_values = Array2::zeros((1, batch));
    let grad = net.backward_tape(&tape, &d_logits, &d_values, flops);
    if !grad.all_finite() {
        return Err(NetError::NonFinite("policy gradient"));
    }
    Ok(grad)
}

pub fn reinforce_full_in_place<T: Scalar>(
    net: &mut PolicyValueNet<T>,
    trajectory: &[FullStep<T>],
    leaf_value: T,
    baseline: T,
    alpha: T,
) -> Result<(), NetError> {
    if alpha == T::zero() || trajectory.is_empty() {
        return Ok(());
    }
    let grad = reinforce_gradient_full(
        net,
        trajectory,
        leaf_value,
        baseline,
        &mut FlopCounter::default(),
    )?;
    net.add_scaled(&grad, alpha);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hex::{canonical_action, canonical_mask, encode, Action, GameState};
    use crate::net::{policy_head_forward, NetConfig};

    fn trajectory(net: &PolicyValueNet<f64>, moves: &[u16]) -> Vec<TrajectoryStep<f64>> {
        let mut s = GameState::new(net.config.size).unwrap();
        let mut out = Vec::new();
        for &m in moves {
            out.push(TrajectoryStep {
                features: Arc::new(net.trunk_forward(&encode(&s))),
                action: canonical_action(&s, Action(m)),
                mask: canonical_mask(&s),
            });
            s.play(Action(m)).unwrap();
        }
        out
    }

    #[test]
    fn zero_learning_rate_leaves_head_untouched() {
        let net = PolicyValueNet::<f64>::init(NetConfig::new(3), 5).unwrap();
        let traj = trajectory(&net, &[4, 0, 8]);
        let next = reinforce_step(&net.policy, &traj, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(next, net.policy);
    }

    #[test]
    fn two_action_softmax_gradient_by_hand() {
        // Logits are the fc bias alone: zero weights, so logits (0, 0).
        let mut net = PolicyValueNet::<f64>::init(NetConfig::new(2), 0).unwrap();
        net.policy.fc_w.fill(0.0);
        net.policy.fc_b.fill(0.0);
        let s = GameState::new(2).unwrap();
        let features = Arc::new(net.trunk_forward(&encode(&s)));
        let mask = vec![true, true, false, false];
        let step = TrajectoryStep {
            features,
            action: 0,
            mask,
        };
        let grad = reinforce_gradient(
            &net.policy,
            std::slice::from_ref(&step),
            1.0,
            0.0,
            &mut FlopCounter::default(),
        )
        .unwrap();
        assert_eq!(grad.fc_b.to_vec(), vec![0.5, -0.5, 0.0, 0.0]);
        let next = reinforce_step(&net.policy, &[step], 1.0, 0.0, 0.1).unwrap();
        assert!((next.fc_b[0] - 0.05).abs() < 1e-15);
        assert!((next.fc_b[1] + 0.05).abs() < 1e-15);
    }

    #[test]
    fn positive_return_raises_probability_of_taken_action() {
        let net = PolicyValueNet::<f64>::init(NetConfig::new(3), 9).unwrap();
        let traj = trajectory(&net, &[2]);
        let before = policy_head_forward(&traj[0].features, &net.policy, &traj[0].mask).unwrap();
        let head = reinforce_step(&net.policy, &traj, 1.0, 0.0, 0.05).unwrap();
        let after = policy_head_forward(&traj[0].features, &head, &traj[0].mask).unwrap();
        assert!(after[traj[0].action] > before[traj[0].action]);
        // The second ply belongs to the other player: its sign flips.
        let traj = trajectory(&net, &[2, 6]);
        let head = reinforce_step(&net.policy, &traj, 1.0, 0.0, 0.05).unwrap();
        let p1 = policy_head_forward(&traj[1].features, &net.policy, &traj[1].mask).unwrap();
        let p1_after = policy_head_forward(&traj[1].features, &head, &traj[1].mask).unwrap();
        assert!(p1_after[traj[1].action] < p1[traj[1].action]);
    }

    #[test]
    fn illegal_action_is_an_error() {
        let net = PolicyValueNet::<f64>::init(NetConfig::new(3), 9).unwrap();
        let mut traj = trajectory(&net, &[2]);
        let a = traj[0].action;
        traj[0].mask[a] = false;
        assert!(reinforce_step(&net.policy, &traj, 1.0, 0.0, 0.1).is_err());
    }
}

//! Supervised training of the whole network on search targets.

use ndarray::Array2;

use crate::hex::PLANES;
use crate::Scalar;

use super::layers::FlopCounter;
use super::params::{Params, PolicyValueNet};
use super::NetError;

/// One training input in the state's canonical frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub input: Vec<T>,
    pub legal: Vec<bool>,
    /// Target distribution; support must lie inside `legal`.
    pub target: Vec<T>,
    /// Game outcome for the player to move, `±1`.
    pub outcome: T,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Losses {
    pub policy: f64,
    pub value: f64,
    pub l2: f64,
}

impl Losses {
    pub fn total(&self) -> f64 {
        self.policy + self.value + self.l2
    }
}

/// Mean over the batch of `CE(target, policy) + (z - v)^2`, plus
/// `l2 * ||theta||^2`, together with its gradient.
pub fn loss_and_gradient<T: Scalar>(
    net: &PolicyValueNet<T>,
    batch: &[Sample<T>],
    l2: T,
) -> Result<(Losses, PolicyValueNet<T>), NetError> {
    let (losses, d_logits, d_values, tape) = losses_with_output_grads(net, batch, l2)?;
    let mut grad = net.backward_tape(&tape, &d_logits, &d_values, &mut FlopCounter::default());
    if l2 != T::zero() {
        grad.add_scaled(net, T::of(2.0) * l2);
    }
    if !grad.all_finite() {
        return Err(NetError::NonFinite("gradient"));
    }
    Ok((losses, grad))
}

/// Loss only; the finite-difference oracle evaluates this.
pub fn loss<T: Scalar>(
    net: &PolicyValueNet<T>,
    batch: &[Sample<T>],
    l2: T,
) -> Result<Losses, NetError> {
    Ok(losses_with_output_grads(net, batch, l2)?.0)
}

type OutputGrads<T> = (Losses, Array2<T>, Array2<T>, super::forward::Tape<T>);

fn losses_with_output_grads<T: Scalar>(
    net: &PolicyValueNet<T>,
    batch: &[Sample<T>],
    l2: T,
) -> Result<OutputGrads<T>, NetError> {
    if batch.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    let cells = net.config.cells();
    let n = batch.len();
    let inputs: Vec<T> = batch
        .iter()
        .flat_map(|s| {
            assert_eq!(s.input.len(), PLANES * cells);
            s.input.iter().copied()
        })
        .collect();
    let tape = net.forward_tape(&inputs, n);
    let inv_n = T::one() / T::of(n as f64);
    let mut d_logits = Array2::zeros((cells, n));
    let mut d_values = Array2::zeros((1, n));
    let mut policy_loss = T::zero();
    let mut value_loss = T::zero();
    for (b, sample) in batch.iter().enumerate() {
        let column = tape.logits.column(b);
        let max = (0..cells)
            .filter(|&i| sample.legal[i])
            .map(|i| column[i])
            .fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            return Err(NetError::NoLegalActions);
        }
        let log_z = (0..cells)
            .filter(|&i| sample.legal[i])
            .map(|i| (column[i] - max).exp())
            .sum::<T>()
            .ln()
            + max;
        for i in 0..cells {
            if !sample.legal[i] {
                continue;
            }
            let log_p = column[i] - log_z;
            let t = sample.target[i];
            if t > T::zero() {
                policy_loss -= t * log_p;
            }
            d_logits[[i, b]] = (log_p.exp() - t) * inv_n;
        }
        let v = tape.values[[0, b]];
        let err = v - sample.outcome;
        value_loss += err * err;
        d_values[[0, b]] = T::of(2.0) * err * inv_n;
    }
    let l2_loss = if l2 == T::zero() {
        T::zero()
    } else {
        l2 * net
            .slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|&w| w * w)
            .sum::<T>()
    };
    let losses = Losses {
        policy: (policy_loss * inv_n).as_f64(),
        value: (value_loss * inv_n).as_f64(),
        l2: l2_loss.as_f64(),
    };
    if !losses.total().is_finite() {
        return Err(NetError::NonFinite("loss"));
    }
    Ok((losses, d_logits, d_values, tape))
}

/// SGD with classical momentum: `v = mu * v + g`, `theta -= lr * v`.
#[derive(Clone, Debug, PartialEq)]
pub struct SgdMomentum<T> {
    pub velocity: PolicyValueNet<T>,
}

impl<T: Scalar> SgdMomentum<T> {
    pub fn new(net: &PolicyValueNet<T>) -> Self {
        SgdMomentum {
            velocity: net.zeroed(),
        }
    }

    pub fn apply(
        &mut self,
        net: &mut PolicyValueNet<T>,
        grad: &PolicyValueNet<T>,
        lr: T,
        momentum: T,
    ) {
        for (v, g) in self.velocity.slices_mut().into_iter().zip(grad.slices()) {
            for (vi, &gi) in v.iter_mut().zip(g) {
                *vi = momentum * *vi + gi;
            }
        }
        if lr != T::zero() {
            net.add_scaled(&self.velocity, -lr);
        }
    }
}

/// One optimizer step on `batch`. Returns the losses measured before the step.
pub fn train_step<T: Scalar>(
    net: &mut PolicyValueNet<T>,
    optimizer: &mut SgdMomentum<T>,
    batch: &[Sample<T>],
    lr: T,
    momentum: T,
    l2: T,
) -> Result<Losses, NetError> {
    let (losses, grad) = loss_and_gradient(net, batch, l2)?;
    optimizer.apply(net, &grad, lr, momentum);
    Ok(losses)
}

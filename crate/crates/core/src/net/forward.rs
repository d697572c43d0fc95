//! Forward and backward passes.
//!
//! Activations are laid out `[channels, batch * n²]` so each convolution is a
//! single matrix product against its im2col expansion.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::hex::PLANES;
use crate::Scalar;

use super::layers::{
    bias_act, columns_to_planes, gemm, masked_softmax, matmul, planes_to_columns, relu_backward,
    row_sums, FlopCounter, Geometry,
};
use super::params::{Conv, PolicyHead, PolicyValueNet, Trunk, ValueHead};
use super::NetError;

/// Output of the frozen trunk for one state: `[channels, n²]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrunkFeatures<T>(pub Array2<T>);

impl<T> TrunkFeatures<T> {
    pub fn view(&self) -> ArrayView2<'_, T> {
        self.0.view()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<T> {
    /// Probabilities over all `n²` cells; illegal cells are exactly zero.
    pub policy: Vec<T>,
    /// Value in `[-1, 1]` for the player to move.
    pub value: T,
}

fn conv_forward<T: Scalar>(
    layer: &Conv<T>,
    geometry: &Geometry,
    input: ArrayView2<T>,
    flops: &mut FlopCounter,
) -> (Array2<T>, Array2<T>) {
    let cols = geometry.im2col(input);
    let mut z = matmul(layer.weight.view(), cols.view(), flops);
    bias_act(&mut z, &layer.bias, true);
    (cols, z)
}

impl<T: Scalar> Trunk<T> {
    fn run(&self, geometry: &Geometry, input: Array2<T>, flops: &mut FlopCounter) -> Array2<T> {
        let mut act = input;
        for layer in &self.layers {
            act = conv_forward(layer, geometry, act.view(), flops).1;
        }
        act
    }
}

impl<T: Scalar> PolicyHead<T> {
    /// Hidden activation `[2 * n²]` and logits `[n²]` for one state.
    fn hidden_and_logits(
        &self,
        features: ArrayView2<T>,
        flops: &mut FlopCounter,
    ) -> (Array2<T>, Array1<T>) {
        let cells = features.ncols();
        let mut hidden = matmul(self.conv_w.view(), features, flops);
        bias_act(&mut hidden, &self.conv_b, true);
        let flat = hidden
            .view()
            .into_shape_with_order((2 * cells, 1))
            .expect("contiguous hidden");
        let mut logits = matmul(self.fc_w.view(), flat, flops);
        bias_act(&mut logits, &self.fc_b, false);
        (hidden, logits.column(0).to_owned())
    }

    pub fn logits(&self, features: &TrunkFeatures<T>) -> Vec<T> {
        self.hidden_and_logits(features.view(), &mut FlopCounter::default())
            .1
            .to_vec()
    }
}

impl<T: Scalar> ValueHead<T> {
    fn value(&self, features: ArrayView2<T>) -> T {
        let flops = &mut FlopCounter::default();
        let cells = features.ncols();
        let mut hidden = matmul(self.conv_w.view(), features, flops);
        bias_act(&mut hidden, &self.conv_b, true);
        let flat = hidden
            .into_shape_with_order((cells, 1))
            .expect("contiguous hidden");
        let mut fc1 = matmul(self.fc1_w.view(), flat.view(), flops);
        bias_act(&mut fc1, &self.fc1_b, true);
        let mut out = matmul(self.fc2_w.view(), fc1.view(), flops);
        bias_act(&mut out, &self.fc2_b, false);
        out[[0, 0]].tanh()
    }
}

/// Masked softmax of `head` applied to cached trunk features.
pub fn policy_head_forward<T: Scalar>(
    features: &TrunkFeatures<T>,
    head: &PolicyHead<T>,
    mask: &[bool],
) -> Result<Vec<T>, NetError> {
    masked_softmax(&head.logits(features), mask)
}

impl<T: Scalar> PolicyValueNet<T> {
    fn check_input(&self, encoded: &[T]) {
        assert_eq!(
            encoded.len(),
            PLANES * self.config.cells(),
            "encoded input size"
        );
    }

    /// Runs the frozen trunk on one encoded state.
    pub fn trunk_forward(&self, encoded: &[T]) -> TrunkFeatures<T> {
        self.check_input(encoded);
        let cells = self.config.cells();
        let input = Array2::from_shape_vec((PLANES, cells), encoded.to_vec()).expect("input shape");
        let geometry = Geometry::new(self.config.size);
        TrunkFeatures(
            self.trunk
                .run(&geometry, input, &mut FlopCounter::default()),
        )
    }

    pub fn value_from_features(&self, features: &TrunkFeatures<T>) -> T {
        self.value.value(features.view())
    }

    /// Both heads on cached features, using the network's own policy head.
    pub fn heads_forward(
        &self,
        features: &TrunkFeatures<T>,
        mask: &[bool],
    ) -> Result<Evaluation<T>, NetError> {
        Ok(Evaluation {
            policy: policy_head_forward(features, &self.policy, mask)?,
            value: self.value_from_features(features),
        })
    }

    /// Full evaluation of one encoded state under a legal-action mask.
    pub fn forward(&self, encoded: &[T], mask: &[bool]) -> Result<Evaluation<T>, NetError> {
        if !mask.iter().any(|&m| m) {
            return Err(NetError::NoLegalActions);
        }
        let features = self.trunk_forward(encoded);
        self.heads_forward(&features, mask)
    }
}

/// Intermediate activations of a batched forward pass, kept for backward.
pub(crate) struct Tape<T> {
    batch: usize,
    cols: Vec<Array2<T>>,
    acts: Vec<Array2<T>>,
    p_hidden: Array2<T>,
    p_flat: Array2<T>,
    pub logits: Array2<T>,
    v_hidden: Array2<T>,
    v_flat: Array2<T>,
    v_fc1: Array2<T>,
    /// `tanh` outputs, `[1, batch]`.
    pub values: Array2<T>,
}

impl<T: Scalar> PolicyValueNet<T> {
    /// `inputs` holds `batch` encoded states back to back.
    pub(crate) fn forward_tape(&self, inputs: &[T], batch: usize) -> Tape<T> {
        let cells = self.config.cells();
        assert_eq!(inputs.len(), batch * PLANES * cells);
        let flops = &mut FlopCounter::default();
        let geometry = Geometry::new(self.config.size);
        // Interleave per-state planes into [PLANES, batch * cells].
        let input = Array2::from_shape_fn((PLANES, batch * cells), |(c, j)| {
            inputs[(j / cells) * PLANES * cells + c * cells + j % cells]
        });
        let mut cols = Vec::with_capacity(self.trunk.layers.len());
        let mut acts = Vec::with_capacity(self.trunk.layers.len());
        let mut act = input;
        for layer in &self.trunk.layers {
            let (c, a) = conv_forward(layer, &geometry, act.view(), flops);
            cols.push(c);
            acts.push(a.clone());
            act = a;
        }
        let features = acts.last().expect("non-empty trunk");

        let mut p_hidden = matmul(self.policy.conv_w.view(), features.view(), flops);
        bias_act(&mut p_hidden, &self.policy.conv_b, true);
        let p_flat = planes_to_columns(&p_hidden, cells);
        let mut logits = matmul(self.policy.fc_w.view(), p_flat.view(), flops);
        bias_act(&mut logits, &self.policy.fc_b, false);

        let mut v_hidden = matmul(self.value.conv_w.view(), features.view(), flops);
        bias_act(&mut v_hidden, &self.value.conv_b, true);
        let v_flat = planes_to_columns(&v_hidden, cells);
        let mut v_fc1 = matmul(self.value.fc1_w.view(), v_flat.view(), flops);
        bias_act(&mut v_fc1, &self.value.fc1_b, true);
        let mut values = matmul(self.value.fc2_w.view(), v_fc1.view(), flops);
        bias_act(&mut values, &self.value.fc2_b, false);
        values.mapv_inplace(|v| v.tanh());

        Tape {
            batch,
            cols,
            acts,
            p_hidden,
            p_flat,
            logits,
            v_hidden,
            v_flat,
            v_fc1,
            values,
        }
    }

    /// Back-propagates `d_logits` (`[n², batch]`) and `d_values` (gradient with
    /// respect to the tanh output, `[1, batch]`) through the whole network.
    pub(crate) fn backward_tape(
        &self,
        tape: &Tape<T>,
        d_logits: &Array2<T>,
        d_values: &Array2<T>,
        flops: &mut FlopCounter,
    ) -> PolicyValueNet<T> {
        let cells = self.config.cells();
        let geometry = Geometry::new(self.config.size);
        let mut grad = PolicyValueNet::zeros(self.config);
        let features = tape.acts.last().expect("non-empty trunk");

        // Policy head.
        grad.policy.fc_w = matmul(d_logits.view(), tape.p_flat.t(), flops);
        grad.policy.fc_b = row_sums(d_logits);
        let d_flat = matmul(self.policy.fc_w.t(), d_logits.view(), flops);
        let mut d_hidden = columns_to_planes(&d_flat, cells);
        relu_backward(&mut d_hidden, &tape.p_hidden);
        grad.policy.conv_w = matmul(d_hidden.view(), features.t(), flops);
        grad.policy.conv_b = row_sums(&d_hidden);
        let mut d_features = matmul(self.policy.conv_w.t(), d_hidden.view(), flops);

        // Value head.
        let d_pre = ndarray::Zip::from(d_values)
            .and(&tape.values)
            .map_collect(|&d, &v| d * (T::one() - v * v));
        flops.add(3 * tape.batch);
        grad.value.fc2_w = matmul(d_pre.view(), tape.v_fc1.t(), flops);
        grad.value.fc2_b = row_sums(&d_pre);
        let mut d_fc1 = matmul(self.value.fc2_w.t(), d_pre.view(), flops);
        relu_backward(&mut d_fc1, &tape.v_fc1);
        grad.value.fc1_w = matmul(d_fc1.view(), tape.v_flat.t(), flops);
        grad.value.fc1_b = row_sums(&d_fc1);
        let d_vflat = matmul(self.value.fc1_w.t(), d_fc1.view(), flops);
        let mut d_vhidden = columns_to_planes(&d_vflat, cells);
        relu_backward(&mut d_vhidden, &tape.v_hidden);
        grad.value.conv_w = matmul(d_vhidden.view(), features.t(), flops);
        grad.value.conv_b = row_sums(&d_vhidden);
        gemm(
            T::one(),
            self.value.conv_w.t(),
            d_vhidden.view(),
            T::one(),
            &mut d_features.view_mut(),
            flops,
        );

        // Trunk, last layer first.
        let mut d_act = d_features;
        for l in (0..self.trunk.layers.len()).rev() {
            relu_backward(&mut d_act, &tape.acts[l]);
            flops.add(d_act.len());
            grad.trunk.layers[l].weight = matmul(d_act.view(), tape.cols[l].t(), flops);
            grad.trunk.layers[l].bias = d_act.sum_axis(Axis(1));
            flops.add(d_act.len());
            if l > 0 {
                let d_cols = matmul(self.trunk.layers[l].weight.t(), d_act.view(), flops);
                let cin = self.trunk.layers[l].weight.ncols() / super::params::KERNEL_TAPS;
                d_act = geometry.col2im(d_cols.view(), cin);
                flops.add(d_cols.len());
            }
        }
        grad
    }
}

/// Gradient of `sum_i adv_i * log pi(a_i | s_i)` with respect to the policy
/// head only, for single states given as cached trunk features.
pub(crate) fn policy_head_log_likelihood_grad<T: Scalar>(
    head: &PolicyHead<T>,
    features: &TrunkFeatures<T>,
    action: usize,
    mask: &[bool],
    advantage: T,
    grad: &mut PolicyHead<T>,
    flops: &mut FlopCounter,
) -> Result<(), NetError> {
    let cells = features.0.ncols();
    let (hidden, logits) = head.hidden_and_logits(features.view(), &mut FlopCounter::default());
    let probs = masked_softmax(logits.as_slice().expect("contiguous"), mask)?;
    if !mask[action] {
        return Err(NetError::IllegalAction(action));
    }
    // d log pi(a) / d logits = onehot(a) - pi, restricted to legal cells.
    let d_logits = Array2::from_shape_fn((cells, 1), |(i, _)| {
        if !mask[i] {
            T::zero()
        } else if i == action {
            advantage * (T::one() - probs[i])
        } else {
            -advantage * probs[i]
        }
    });
    flops.add(2 * cells);
    let flat = hidden
        .view()
        .into_shape_with_order((2 * cells, 1))
        .expect("contiguous hidden");
    gemm(
        T::one(),
        d_logits.view(),
        flat.t(),
        T::one(),
        &mut grad.fc_w.view_mut(),
        flops,
    );
    flops.add(cells);
    grad.fc_b += &d_logits.column(0);
    flops.add(cells);
    let d_flat = matmul(head.fc_w.t(), d_logits.view(), flops);
    let mut d_hidden = d_flat
        .into_shape_with_order((2, cells))
        .expect("hidden shape");
    relu_backward(&mut d_hidden, &hidden);
    flops.add(d_hidden.len());
    gemm(
        T::one(),
        d_hidden.view(),
        features.view().t(),
        T::one(),
        &mut grad.conv_w.view_mut(),
        flops,
    );
    grad.conv_b += &d_hidden.sum_axis(Axis(1));
    flops.add(d_hidden.len());
    Ok(())
}

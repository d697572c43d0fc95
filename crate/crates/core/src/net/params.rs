use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hex::{MAX_SIZE, MIN_SIZE, PLANES};
use crate::Scalar;

use super::NetError;

pub const KERNEL_TAPS: usize = 9;
pub const POLICY_CHANNELS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetConfig {
    pub size: usize,
    pub channels: usize,
    pub trunk_layers: usize,
    pub value_hidden: usize,
}

impl NetConfig {
    pub fn new(size: usize) -> NetConfig {
        NetConfig {
            size,
            channels: 32,
            trunk_layers: 3,
            value_hidden: 64,
        }
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.size * self.size
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if !(MIN_SIZE..=MAX_SIZE).contains(&self.size) {
            return Err(NetError::Config(format!("board size {}", self.size)));
        }
        if self.channels == 0 || self.trunk_layers == 0 || self.value_hidden == 0 {
            return Err(NetError::Config(format!("{:?}", self)));
        }
        Ok(())
    }
}

/// 3×3 zero-padded convolution stored as a `[out, in * 9]` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trunk<T> {
    pub layers: Vec<Conv<T>>,
}

/// The parameters PGS adapts: a 1×1 convolution to two channels followed by
/// an affine map to one logit per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyHead<T> {
    pub conv_w: Array2<T>,
    pub conv_b: Array1<T>,
    pub fc_w: Array2<T>,
    pub fc_b: Array1<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueHead<T> {
    pub conv_w: Array2<T>,
    pub conv_b: Array1<T>,
    pub fc1_w: Array2<T>,
    pub fc1_b: Array1<T>,
    pub fc2_w: Array2<T>,
    pub fc2_b: Array1<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyValueNet<T> {
    pub config: NetConfig,
    pub trunk: Trunk<T>,
    pub policy: PolicyHead<T>,
    pub value: ValueHead<T>,
}

/// Uniform visiting of every parameter tensor in a fixed order. Gradients and
/// momentum buffers reuse the parameter structs, so optimizer updates are a zip
/// over two visitors.
pub trait Params<T: Scalar> {
    fn slices(&self) -> Vec<&[T]>;
    fn slices_mut(&mut self) -> Vec<&mut [T]>;

    fn num_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    fn zeroed(&self) -> Self
    where
        Self: Clone,
    {
        let mut out = self.clone();
        for s in out.slices_mut() {
            s.fill(T::zero());
        }
        out
    }

    fn flat(&self) -> Vec<T> {
        self.slices().into_iter().flatten().copied().collect()
    }

    fn all_finite(&self) -> bool {
        self.slices()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// `self += scale * other`.
    fn add_scaled(&mut self, other: &Self, scale: T) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }
}

fn slice<T>(a: &ndarray::ArrayBase<impl ndarray::Data<Elem = T>, impl ndarray::Dimension>) -> &[T] {
    a.as_slice().expect("parameters are contiguous")
}

fn slice_mut<T>(
    a: &mut ndarray::ArrayBase<impl ndarray::DataMut<Elem = T>, impl ndarray::Dimension>,
) -> &mut [T] {
    a.as_slice_mut().expect("parameters are contiguous")
}

impl<T: Scalar> Params<T> for Conv<T> {
    fn slices(&self) -> Vec<&[T]> {
        vec![slice(&self.weight), slice(&self.bias)]
    }
    fn slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![slice_mut(&mut self.weight), slice_mut(&mut self.bias)]
    }
}

impl<T: Scalar> Params<T> for Trunk<T> {
    fn slices(&self) -> Vec<&[T]> {
        self.layers.iter().flat_map(|l| l.slices()).collect()
    }
    fn slices_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.slices_mut())
            .collect()
    }
}

impl<T: Scalar> Params<T> for PolicyHead<T> {
    fn slices(&self) -> Vec<&[T]> {
        vec![
            slice(&self.conv_w),
            slice(&self.conv_b),
            slice(&self.fc_w),
            slice(&self.fc_b),
        ]
    }
    fn slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            slice_mut(&mut self.conv_w),
            slice_mut(&mut self.conv_b),
            slice_mut(&mut self.fc_w),
            slice_mut(&mut self.fc_b),
        ]
    }
}

impl<T: Scalar> Params<T> for ValueHead<T> {
    fn slices(&self) -> Vec<&[T]> {
        vec![
            slice(&self.conv_w),
            slice(&self.conv_b),
            slice(&self.fc1_w),
            slice(&self.fc1_b),
            slice(&self.fc2_w),
            slice(&self.fc2_b),
        ]
    }
    fn slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            slice_mut(&mut self.conv_w),
            slice_mut(&mut self.conv_b),
            slice_mut(&mut self.fc1_w),
            slice_mut(&mut self.fc1_b),
            slice_mut(&mut self.fc2_w),
            slice_mut(&mut self.fc2_b),
        ]
    }
}

impl<T: Scalar> Params<T> for PolicyValueNet<T> {
    fn slices(&self) -> Vec<&[T]> {
        let mut v = self.trunk.slices();
        v.extend(self.policy.slices());
        v.extend(self.value.slices());
        v
    }
    fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = self.trunk.slices_mut();
        v.extend(self.policy.slices_mut());
        v.extend(self.value.slices_mut());
        v
    }
}

/// Name and logical shape of every tensor, in [`Params::slices`] order.
pub fn tensor_layout(config: &NetConfig) -> Vec<(String, Vec<usize>)> {
    let c = config.channels;
    let p = config.cells();
    let h = config.value_hidden;
    let mut out = Vec::new();
    for l in 0..config.trunk_layers {
        let cin = if l == 0 { PLANES } else { c };
        out.push((format!("trunk.{l}.weight"), vec![c, cin, 3, 3]));
        out.push((format!("trunk.{l}.bias"), vec![c]));
    }
    out.push(("policy.conv.weight".into(), vec![POLICY_CHANNELS, c]));
    out.push(("policy.conv.bias".into(), vec![POLICY_CHANNELS]));
    out.push(("policy.fc.weight".into(), vec![p, POLICY_CHANNELS * p]));
    out.push(("policy.fc.bias".into(), vec![p]));
    out.push(("value.conv.weight".into(), vec![1, c]));
    out.push(("value.conv.bias".into(), vec![1]));
    out.push(("value.fc1.weight".into(), vec![h, p]));
    out.push(("value.fc1.bias".into(), vec![h]));
    out.push(("value.fc2.weight".into(), vec![1, h]));
    out.push(("value.fc2.bias".into(), vec![1]));
    out
}

struct Init {
    rng: ChaCha8Rng,
}

impl Init {
    fn uniform<T: Scalar>(&mut self, rows: usize, cols: usize, bound: f64) -> Array2<T> {
        Array2::from_shape_fn((rows, cols), |_| {
            T::of(self.rng.random_range(-bound..bound))
        })
    }

    fn uniform_vec<T: Scalar>(&mut self, len: usize, bound: f64) -> Array1<T> {
        Array1::from_shape_fn(len, |_| T::of(self.rng.random_range(-bound..bound)))
    }
}

impl<T: Scalar> PolicyValueNet<T> {
    /// Deterministic initialization from `seed`. Layers feeding a ReLU use a
    /// He-style bound `sqrt(6 / fan_in)`; output layers use `1 / sqrt(fan_in)`.
    /// The final value bias starts at zero.
    pub fn init(config: NetConfig, seed: u64) -> Result<Self, NetError> {
        config.validate()?;
        let mut init = Init {
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let c = config.channels;
        let p = config.cells();
        let h = config.value_hidden;
        let relu_bound = |fan_in: usize| (6.0 / fan_in as f64).sqrt();
        let out_bound = |fan_in: usize| 1.0 / (fan_in as f64).sqrt();

        let mut layers = Vec::with_capacity(config.trunk_layers);
        for l in 0..config.trunk_layers {
            let cin = if l == 0 { PLANES } else { c };
            let fan_in = cin * KERNEL_TAPS;
            layers.push(Conv {
                weight: init.uniform(c, fan_in, relu_bound(fan_in)),
                bias: init.uniform_vec(c, out_bound(fan_in)),
            });
        }
        let policy = PolicyHead {
            conv_w: init.uniform(POLICY_CHANNELS, c, relu_bound(c)),
            conv_b: init.uniform_vec(POLICY_CHANNELS, out_bound(c)),
            fc_w: init.uniform(p, POLICY_CHANNELS * p, out_bound(POLICY_CHANNELS * p)),
            fc_b: init.uniform_vec(p, out_bound(POLICY_CHANNELS * p)),
        };
        let value = ValueHead {
            conv_w: init.uniform(1, c, relu_bound(c)),
            conv_b: init.uniform_vec(1, out_bound(c)),
            fc1_w: init.uniform(h, p, relu_bound(p)),
            fc1_b: init.uniform_vec(h, out_bound(p)),
            fc2_w: init.uniform(1, h, out_bound(h)),
            fc2_b: Array1::zeros(1),
        };
        Ok(PolicyValueNet {
            config,
            trunk: Trunk { layers },
            policy,
            value,
        })
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Scalar>(&self) -> PolicyValueNet<U> {
        let conv = |a: &Array2<T>| a.mapv(|v| U::of(v.as_f64()));
        let vec = |a: &Array1<T>| a.mapv(|v| U::of(v.as_f64()));
        PolicyValueNet {
            config: self.config,
            trunk: Trunk {
                layers: self
                    .trunk
                    .layers
                    .iter()
                    .map(|l| Conv {
                        weight: conv(&l.weight),
                        bias: vec(&l.bias),
                    })
                    .collect(),
            },
            policy: PolicyHead {
                conv_w: conv(&self.policy.conv_w),
                conv_b: vec(&self.policy.conv_b),
                fc_w: conv(&self.policy.fc_w),
                fc_b: vec(&self.policy.fc_b),
            },
            value: ValueHead {
                conv_w: conv(&self.value.conv_w),
                conv_b: vec(&self.value.conv_b),
                fc1_w: conv(&self.value.fc1_w),
                fc1_b: vec(&self.value.fc1_b),
                fc2_w: conv(&self.value.fc2_w),
                fc2_b: vec(&self.value.fc2_b),
            },
        }
    }

    /// An all-zero network with the shapes of `config`.
    pub fn zeros(config: NetConfig) -> Self {
        let mut net = Self::init(config, 0).expect("valid config");
        for s in net.slices_mut() {
            s.fill(T::zero());
        }
        net
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = PolicyValueNet::<f32>::init(NetConfig::new(5), 42).unwrap();
        let b = PolicyValueNet::<f32>::init(NetConfig::new(5), 42).unwrap();
        let c = PolicyValueNet::<f32>::init(NetConfig::new(5), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.value.fc2_b[0], 0.0);
        assert!(a.all_finite());
    }

    #[test]
    fn layout_matches_parameter_slices() {
        let net = PolicyValueNet::<f32>::init(NetConfig::new(4), 1).unwrap();
        let layout = tensor_layout(&net.config);
        let slices = net.slices();
        assert_eq!(layout.len(), slices.len());
        for ((_, shape), s) in layout.iter().zip(&slices) {
            assert_eq!(shape.iter().product::<usize>(), s.len());
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(PolicyValueNet::<f32>::init(NetConfig::new(1), 0).is_err());
        let mut cfg = NetConfig::new(5);
        cfg.channels = 0;
        assert!(PolicyValueNet::<f32>::init(cfg, 0).is_err());
    }
}

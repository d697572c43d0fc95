//! Dense kernels shared by the forward and backward passes.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2, Axis};

use crate::Scalar;

use super::params::KERNEL_TAPS;
use super::NetError;

const NO_SOURCE: u32 = u32::MAX;

/// Gather table for a zero-padded 3×3 convolution on an `n × n` grid:
/// `source[tap * n² + p]` is the input position read by output `p` at `tap`.
pub(crate) struct Geometry {
    cells: usize,
    source: Vec<u32>,
}

impl Geometry {
    pub fn new(size: usize) -> Geometry {
        let cells = size * size;
        let mut source = vec![NO_SOURCE; KERNEL_TAPS * cells];
        for tap in 0..KERNEL_TAPS {
            let (dr, dc) = (tap as isize / 3 - 1, tap as isize % 3 - 1);
            for p in 0..cells {
                let r = (p / size) as isize + dr;
                let c = (p % size) as isize + dc;
                if r >= 0 && c >= 0 && r < size as isize && c < size as isize {
                    source[tap * cells + p] = (r as usize * size + c as usize) as u32;
                }
            }
        }
        Geometry { cells, source }
    }

    /// `input` is `[cin, batch * n²]`; returns `[cin * 9, batch * n²]`.
    pub fn im2col<T: Scalar>(&self, input: ArrayView2<T>) -> Array2<T> {
        let (cin, width) = input.dim();
        let batch = width / self.cells;
        let mut out = Array2::zeros((cin * KERNEL_TAPS, width));
        for ci in 0..cin {
            let src_row = input.row(ci);
            let src = src_row.as_slice().expect("contiguous rows");
            for tap in 0..KERNEL_TAPS {
                let mut dst_row = out.row_mut(ci * KERNEL_TAPS + tap);
                let dst = dst_row.as_slice_mut().expect("contiguous rows");
                let table = &self.source[tap * self.cells..(tap + 1) * self.cells];
                for b in 0..batch {
                    let base = b * self.cells;
                    for (p, &s) in table.iter().enumerate() {
                        if s != NO_SOURCE {
                            dst[base + p] = src[base + s as usize];
                        }
                    }
                }
            }
        }
        out
    }

    /// Adjoint of [`Geometry::im2col`]: scatters column gradients back onto
    /// the `[cin, batch * n²]` input.
    pub fn col2im<T: Scalar>(&self, cols: ArrayView2<T>, cin: usize) -> Array2<T> {
        let width = cols.ncols();
        let batch = width / self.cells;
        let mut out = Array2::zeros((cin, width));
        for ci in 0..cin {
            let mut dst_row = out.row_mut(ci);
            let dst = dst_row.as_slice_mut().expect("contiguous rows");
            for tap in 0..KERNEL_TAPS {
                let src_row = cols.row(ci * KERNEL_TAPS + tap);
                let table = &self.source[tap * self.cells..(tap + 1) * self.cells];
                for b in 0..batch {
                    let base = b * self.cells;
                    for (p, &s) in table.iter().enumerate() {
                        if s != NO_SOURCE {
                            dst[base + s as usize] += src_row[base + p];
                        }
                    }
                }
            }
        }
        out
    }
}

/// Counts floating-point operations of the kernels it is passed to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlopCounter {
    pub flops: u64,
}

impl FlopCounter {
    #[inline]
    pub fn add(&mut self, n: usize) {
        self.flops += n as u64;
    }
}

/// `c = alpha * a · b + beta * c`.
pub(crate) fn gemm<T: Scalar>(
    alpha: T,
    a: ArrayView2<T>,
    b: ArrayView2<T>,
    beta: T,
    c: &mut ArrayViewMut2<T>,
    flops: &mut FlopCounter,
) {
    flops.add(2 * a.nrows() * a.ncols() * b.ncols());
    general_mat_mul(alpha, &a, &b, beta, c);
}

pub(crate) fn matmul<T: Scalar>(
    a: ArrayView2<T>,
    b: ArrayView2<T>,
    flops: &mut FlopCounter,
) -> Array2<T> {
    let mut c = Array2::zeros((a.nrows(), b.ncols()));
    gemm(T::one(), a, b, T::zero(), &mut c.view_mut(), flops);
    c
}

/// Adds a per-row bias and optionally applies ReLU in place.
pub(crate) fn bias_act<T: Scalar>(z: &mut Array2<T>, bias: &Array1<T>, relu: bool) {
    for (mut row, &b) in z.axis_iter_mut(Axis(0)).zip(bias.iter()) {
        if relu {
            row.mapv_inplace(|v| {
                let v = v + b;
                if v > T::zero() {
                    v
                } else {
                    T::zero()
                }
            });
        } else {
            row.mapv_inplace(|v| v + b);
        }
    }
}

/// Zeroes gradient entries whose forward activation was clipped by ReLU.
pub(crate) fn relu_backward<T: Scalar>(grad: &mut Array2<T>, activation: &Array2<T>) {
    ndarray::Zip::from(grad).and(activation).for_each(|g, &a| {
        if a <= T::zero() {
            *g = T::zero();
        }
    });
}

pub(crate) fn row_sums<T: Scalar>(a: &Array2<T>) -> Array1<T> {
    a.sum_axis(Axis(1))
}

/// `[ch, batch * n²]` → `[ch * n², batch]`, channel-major within a column.
pub(crate) fn planes_to_columns<T: Scalar>(a: &Array2<T>, cells: usize) -> Array2<T> {
    let (ch, width) = a.dim();
    let batch = width / cells;
    Array2::from_shape_fn((ch * cells, batch), |(i, b)| {
        a[[i / cells, b * cells + i % cells]]
    })
}

/// Inverse of [`planes_to_columns`].
pub(crate) fn columns_to_planes<T: Scalar>(a: &Array2<T>, cells: usize) -> Array2<T> {
    let (rows, batch) = a.dim();
    let ch = rows / cells;
    Array2::from_shape_fn((ch, batch * cells), |(c, j)| {
        a[[c * cells + j % cells, j / cells]]
    })
}

/// Softmax over the entries where `mask` is set; masked-out entries are
/// exactly zero.
pub fn masked_softmax<T: Scalar>(logits: &[T], mask: &[bool]) -> Result<Vec<T>, NetError> {
    debug_assert_eq!(logits.len(), mask.len());
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(None, |acc: Option<T>, l| Some(acc.map_or(l, |a| a.max(l))))
        .ok_or(NetError::NoLegalActions)?;
    if !max.is_finite() {
        return Err(NetError::NonFinite("logits"));
    }
    let mut out: Vec<T> = logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { (l - max).exp() } else { T::zero() })
        .collect();
    let total: T = out.iter().copied().sum();
    for v in &mut out {
        *v = *v / total;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn softmax_degenerate_cases() {
        let p = masked_softmax(&[3.0f32, -1.0, 7.0], &[false, true, false]).unwrap();
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
        let p = masked_softmax(&[0.5f64; 4], &[true, true, false, true]).unwrap();
        for (i, v) in p.iter().enumerate() {
            let expect = if i == 2 { 0.0 } else { 1.0 / 3.0 };
            assert!((v - expect).abs() < 1e-15);
        }
        assert!(matches!(
            masked_softmax(&[1.0f32, 2.0], &[false, false]),
            Err(NetError::NoLegalActions)
        ));
    }

    #[test]
    fn im2col_and_col2im_are_adjoint() {
        let g = Geometry::new(3);
        let x = Array2::from_shape_fn((2, 18), |(i, j)| (i * 18 + j) as f64 * 0.1 - 1.0);
        let y = Array2::from_shape_fn((18, 18), |(i, j)| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let lhs: f64 = (&g.im2col(x.view()) * &y).sum();
        let rhs: f64 = (&x * &g.col2im(y.view(), 2)).sum();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn centre_tap_is_identity() {
        let g = Geometry::new(2);
        let x = array![[1.0f32, 2.0, 3.0, 4.0]];
        let cols = g.im2col(x.view());
        assert_eq!(cols.row(4).to_vec(), vec![1.0, 2.0, 3.0, 4.0]);
        // Top-left tap of the top-left cell reads padding.
        assert_eq!(cols[[0, 0]], 0.0);
        assert_eq!(cols[[0, 3]], 1.0);
    }

    #[test]
    fn plane_column_reshapes_invert() {
        let a = Array2::from_shape_fn((2, 8), |(i, j)| (i * 8 + j) as f32);
        let cols = planes_to_columns(&a, 4);
        assert_eq!(cols.dim(), (8, 2));
        assert_eq!(cols[[5, 1]], a[[1, 5]]);
        assert_eq!(columns_to_planes(&cols, 4), a);
    }
}

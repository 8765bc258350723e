//! Layer kinds and their forward/backward kernels.

use serde::{Deserialize, Serialize};

use super::tensor::{gemm, Scalar, Tensor};
use crate::error::{Error, Result};

/// One layer of a [`LayerGraph`](super::LayerGraph).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Square-kernel 2-D convolution with zero padding.
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    /// Fully-connected layer; flattens its input.
    Dense { inputs: usize, outputs: usize },
    Relu,
    Sigmoid,
    /// Nearest-neighbour 2x upsampling.
    Upsample2x,
    /// Concatenation of two inputs along the channel axis.
    Concat,
}

impl LayerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Relu => "relu",
            LayerSpec::Sigmoid => "sigmoid",
            LayerSpec::Upsample2x => "upsample2x",
            LayerSpec::Concat => "concat",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            LayerSpec::Concat => 2,
            _ => 1,
        }
    }

    /// Weight and bias shapes, if the layer has parameters.
    pub fn param_shapes(&self) -> Option<([usize; 4], [usize; 4])> {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => Some((
                [out_channels, in_channels, kernel, kernel],
                [out_channels, 1, 1, 1],
            )),
            LayerSpec::Dense { inputs, outputs } => {
                Some(([outputs, inputs, 1, 1], [outputs, 1, 1, 1]))
            }
            _ => None,
        }
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                kernel,
                ..
            } => in_channels * kernel * kernel,
            LayerSpec::Dense { inputs, .. } => inputs,
            _ => 0,
        }
    }

    /// Output (channels, height, width) for the given input shapes.
    pub fn output_shape(&self, inputs: &[[usize; 3]]) -> Result<[usize; 3]> {
        if inputs.len() != self.arity() {
            return Err(Error::Dimension(format!(
                "{} takes {} inputs, got {}",
                self.name(),
                self.arity(),
                inputs.len()
            )));
        }
        let [c, h, w] = inputs[0];
        match *self {
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                if c != in_channels {
                    return Err(Error::Dimension(format!(
                        "conv2d expects {in_channels} channels, got {c}"
                    )));
                }
                if kernel == 0 || stride == 0 || h + 2 * padding < kernel || w + 2 * padding < kernel
                {
                    return Err(Error::Dimension(format!(
                        "conv2d kernel {kernel} stride {stride} does not fit {h}x{w}"
                    )));
                }
                Ok([
                    out_channels,
                    (h + 2 * padding - kernel) / stride + 1,
                    (w + 2 * padding - kernel) / stride + 1,
                ])
            }
            LayerSpec::Dense { inputs: n, outputs } => {
                if c * h * w != n {
                    return Err(Error::Dimension(format!(
                        "dense expects {n} inputs, got {c}x{h}x{w}"
                    )));
                }
                Ok([outputs, 1, 1])
            }
            LayerSpec::Relu | LayerSpec::Sigmoid => Ok([c, h, w]),
            LayerSpec::Upsample2x => Ok([c, 2 * h, 2 * w]),
            LayerSpec::Concat => {
                let [c2, h2, w2] = inputs[1];
                if (h, w) != (h2, w2) {
                    return Err(Error::Dimension(format!(
                        "concat spatial mismatch {h}x{w} vs {h2}x{w2}"
                    )));
                }
                Ok([c + c2, h, w])
            }
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) struct ConvGeom {
    pub in_c: usize,
    pub out_c: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeom {
    pub fn new(spec: &LayerSpec, in_h: usize, in_w: usize) -> Self {
        let LayerSpec::Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
        } = *spec
        else {
            unreachable!("ConvGeom built from non-conv layer");
        };
        ConvGeom {
            in_c: in_channels,
            out_c: out_channels,
            k: kernel,
            stride,
            pad: padding,
            in_h,
            in_w,
            out_h: (in_h + 2 * padding - kernel) / stride + 1,
            out_w: (in_w + 2 * padding - kernel) / stride + 1,
        }
    }

    fn col_rows(&self) -> usize {
        self.in_c * self.k * self.k
    }

    fn out_len(&self) -> usize {
        self.out_h * self.out_w
    }

    /// Valid output range `[lo, hi)` along one axis for kernel offset `kk`.
    fn valid(&self, kk: usize, in_len: usize, out_len: usize) -> (usize, usize) {
        // input index = o * stride + kk - pad must lie in [0, in_len)
        let lo = if kk >= self.pad {
            0
        } else {
            (self.pad - kk).div_ceil(self.stride)
        };
        let hi = if in_len + self.pad > kk {
            ((in_len + self.pad - kk - 1) / self.stride + 1).min(out_len)
        } else {
            0
        };
        (lo, hi.max(lo))
    }

    /// Writes the patch matrix of one item into columns `[off, off + out_len)`
    /// of a row-major matrix with leading dimension `ld`.
    fn im2col<T: Scalar>(&self, x: &[T], cols: &mut [T], ld: usize, off: usize) {
        let ol = self.out_len();
        for c in 0..self.in_c {
            let plane = &x[c * self.in_h * self.in_w..(c + 1) * self.in_h * self.in_w];
            for ky in 0..self.k {
                let (y0, y1) = self.valid(ky, self.in_h, self.out_h);
                for kx in 0..self.k {
                    let (x0, x1) = self.valid(kx, self.in_w, self.out_w);
                    let row = (c * self.k + ky) * self.k + kx;
                    let dst = &mut cols[row * ld + off..row * ld + off + ol];
                    dst.fill(T::zero());
                    for oy in y0..y1 {
                        let iy = oy * self.stride + ky - self.pad;
                        let src = &plane[iy * self.in_w..(iy + 1) * self.in_w];
                        let drow = &mut dst[oy * self.out_w..(oy + 1) * self.out_w];
                        if self.stride == 1 {
                            let ix0 = x0 + kx - self.pad;
                            drow[x0..x1].copy_from_slice(&src[ix0..ix0 + (x1 - x0)]);
                        } else {
                            for ox in x0..x1 {
                                drow[ox] = src[ox * self.stride + kx - self.pad];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Adjoint of [`ConvGeom::im2col`]: accumulates columns back into `dx`.
    fn col2im<T: Scalar>(&self, cols: &[T], ld: usize, off: usize, dx: &mut [T]) {
        let ol = self.out_len();
        for c in 0..self.in_c {
            let plane = &mut dx[c * self.in_h * self.in_w..(c + 1) * self.in_h * self.in_w];
            for ky in 0..self.k {
                let (y0, y1) = self.valid(ky, self.in_h, self.out_h);
                for kx in 0..self.k {
                    let (x0, x1) = self.valid(kx, self.in_w, self.out_w);
                    let row = (c * self.k + ky) * self.k + kx;
                    let src = &cols[row * ld + off..row * ld + off + ol];
                    for oy in y0..y1 {
                        let iy = oy * self.stride + ky - self.pad;
                        let dst = &mut plane[iy * self.in_w..(iy + 1) * self.in_w];
                        let srow = &src[oy * self.out_w..(oy + 1) * self.out_w];
                        if self.stride == 1 {
                            let ix0 = x0 + kx - self.pad;
                            for (d, &v) in dst[ix0..ix0 + (x1 - x0)].iter_mut().zip(&srow[x0..x1]) {
                                *d = *d + v;
                            }
                        } else {
                            for ox in x0..x1 {
                                let ix = ox * self.stride + kx - self.pad;
                                dst[ix] = dst[ix] + srow[ox];
                            }
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn conv2d_forward<T: Scalar>(
    spec: &LayerSpec,
    x: &Tensor<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> Tensor<T> {
    let [n, _, h, w] = x.shape();
    let g = ConvGeom::new(spec, h, w);
    let ol = g.out_len();
    let mut out = Tensor::zeros([n, g.out_c, g.out_h, g.out_w]);
    let mut cols = vec![T::zero(); g.col_rows() * ol];
    for i in 0..n {
        g.im2col(x.item(i), &mut cols, ol, 0);
        let y = out.item_mut(i);
        for (oc, &b) in bias.data().iter().enumerate() {
            y[oc * ol..(oc + 1) * ol].fill(b);
        }
        gemm(g.out_c, g.col_rows(), ol, T::one(), weight.data(), false, &cols, false, T::one(), y);
    }
    out
}

/// Returns the input gradient (unless `need_input_grad` is false); accumulates
/// parameter gradients into `dw`, `db`.
pub(crate) fn conv2d_backward<T: Scalar>(
    spec: &LayerSpec,
    x: &Tensor<T>,
    weight: &Tensor<T>,
    dout: &Tensor<T>,
    dw: &mut Tensor<T>,
    db: &mut Tensor<T>,
    need_input_grad: bool,
) -> Option<Tensor<T>> {
    let [n, _, h, w] = x.shape();
    let g = ConvGeom::new(spec, h, w);
    let ol = g.out_len();
    let rows = g.col_rows();
    let mut dx = need_input_grad.then(|| Tensor::zeros(x.shape()));
    let mut cols = vec![T::zero(); rows * ol];
    let mut dcols = vec![T::zero(); rows * ol];
    for i in 0..n {
        let dy = dout.item(i);
        for oc in 0..g.out_c {
            db.data_mut()[oc] = db.data()[oc] + dy[oc * ol..(oc + 1) * ol].iter().copied().sum::<T>();
        }
        g.im2col(x.item(i), &mut cols, ol, 0);
        // dW (out_c × rows) += dy (out_c × ol) · colsᵀ
        gemm(g.out_c, ol, rows, T::one(), dy, false, &cols, true, T::one(), dw.data_mut());
        if let Some(dx) = dx.as_mut() {
            gemm(rows, g.out_c, ol, T::one(), weight.data(), true, dy, false, T::zero(), &mut dcols);
            g.col2im(&dcols, ol, 0, dx.item_mut(i));
        }
    }
    dx
}

pub(crate) fn dense_forward<T: Scalar>(x: &Tensor<T>, weight: &Tensor<T>, bias: &Tensor<T>) -> Tensor<T> {
    let n = x.batch();
    let inputs = x.item_len();
    let outputs = bias.len();
    let mut out = Tensor::zeros([n, outputs, 1, 1]);
    for i in 0..n {
        out.item_mut(i).copy_from_slice(bias.data());
    }
    gemm(n, inputs, outputs, T::one(), x.data(), false, weight.data(), true, T::one(), out.data_mut());
    out
}

pub(crate) fn dense_backward<T: Scalar>(
    x: &Tensor<T>,
    weight: &Tensor<T>,
    dout: &Tensor<T>,
    dw: &mut Tensor<T>,
    db: &mut Tensor<T>,
) -> Tensor<T> {
    let n = x.batch();
    let inputs = x.item_len();
    let outputs = dout.item_len();
    for i in 0..n {
        for (b, &g) in db.data_mut().iter_mut().zip(dout.item(i)) {
            *b = *b + g;
        }
    }
    gemm(outputs, n, inputs, T::one(), dout.data(), true, x.data(), false, T::one(), dw.data_mut());
    let mut dx = Tensor::zeros(x.shape());
    gemm(n, outputs, inputs, T::one(), dout.data(), false, weight.data(), false, T::zero(), dx.data_mut());
    dx
}

pub(crate) fn relu_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| v.max(T::zero()))
}

pub(crate) fn relu_backward<T: Scalar>(y: &Tensor<T>, dout: &Tensor<T>) -> Tensor<T> {
    let data = y
        .data()
        .iter()
        .zip(dout.data())
        .map(|(&y, &g)| if y > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::from_vec(y.shape(), data).expect("shape preserved")
}

pub(crate) fn sigmoid_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| T::one() / (T::one() + (-v).exp()))
}

pub(crate) fn sigmoid_backward<T: Scalar>(y: &Tensor<T>, dout: &Tensor<T>) -> Tensor<T> {
    let data = y
        .data()
        .iter()
        .zip(dout.data())
        .map(|(&y, &g)| g * y * (T::one() - y))
        .collect();
    Tensor::from_vec(y.shape(), data).expect("shape preserved")
}

pub(crate) fn upsample_forward<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let [n, c, h, w] = x.shape();
    let mut out = Tensor::zeros([n, c, 2 * h, 2 * w]);
    let src = x.data();
    let dst = out.data_mut();
    for plane in 0..n * c {
        for y in 0..h {
            let row = &src[(plane * h + y) * w..(plane * h + y + 1) * w];
            for dy in 0..2 {
                let base = (plane * 2 * h + 2 * y + dy) * 2 * w;
                for (x, &v) in row.iter().enumerate() {
                    dst[base + 2 * x] = v;
                    dst[base + 2 * x + 1] = v;
                }
            }
        }
    }
    out
}

pub(crate) fn upsample_backward<T: Scalar>(dout: &Tensor<T>) -> Tensor<T> {
    let [n, c, h2, w2] = dout.shape();
    let (h, w) = (h2 / 2, w2 / 2);
    let mut dx = Tensor::zeros([n, c, h, w]);
    let src = dout.data();
    let dst = dx.data_mut();
    for plane in 0..n * c {
        for y in 0..h {
            for x in 0..w {
                let base = (plane * h2 + 2 * y) * w2 + 2 * x;
                dst[(plane * h + y) * w + x] =
                    src[base] + src[base + 1] + src[base + w2] + src[base + w2 + 1];
            }
        }
    }
    dx
}

pub(crate) fn concat_forward<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let [n, ca, h, w] = a.shape();
    let cb = b.shape()[1];
    let mut out = Tensor::zeros([n, ca + cb, h, w]);
    let la = a.item_len();
    for i in 0..n {
        let dst = out.item_mut(i);
        dst[..la].copy_from_slice(a.item(i));
        dst[la..].copy_from_slice(b.item(i));
    }
    out
}

pub(crate) fn concat_backward<T: Scalar>(
    a_shape: [usize; 4],
    b_shape: [usize; 4],
    dout: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>) {
    let mut da = Tensor::zeros(a_shape);
    let mut db = Tensor::zeros(b_shape);
    let la = da.item_len();
    for i in 0..dout.batch() {
        let src = dout.item(i);
        da.item_mut(i).copy_from_slice(&src[..la]);
        db.item_mut(i).copy_from_slice(&src[la..]);
    }
    (da, db)
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::imagecore::ImageTensor;
use crate::{Error, Result};

/// Dense 2-D convolution weights with "same" zero padding.
///
/// `weights` is row-major `[out_channels][in_channels][kernel_size][kernel_size]`.
/// Padding is implied as `dilation · (kernel_size / 2)` so that the output has
/// the input's spatial size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub dilation: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl ConvParams {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        dilation: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        let p = Self {
            in_channels,
            out_channels,
            kernel_size,
            dilation,
            weights,
            bias,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::param("channels", "must be positive"));
        }
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::param(
                "kernel_size",
                format!("{} must be odd for same-size output", self.kernel_size),
            ));
        }
        if self.dilation == 0 {
            return Err(Error::param("dilation", "must be at least 1"));
        }
        let n = self.out_channels * self.in_channels * self.kernel_size * self.kernel_size;
        if self.weights.len() != n {
            return Err(Error::shape(format!("{n} weights"), self.weights.len()));
        }
        if self.bias.len() != self.out_channels {
            return Err(Error::shape(format!("{} biases", self.out_channels), self.bias.len()));
        }
        Ok(())
    }

    pub fn padding(&self) -> usize {
        self.dilation * (self.kernel_size / 2)
    }

    #[inline]
    pub fn weight(&self, o: usize, i: usize, ky: usize, kx: usize) -> f64 {
        let k = self.kernel_size;
        self.weights[((o * self.in_channels + i) * k + ky) * k + kx]
    }

    /// 1×1 kernel mapping channel `i` to channel `i` with weight 1.
    pub fn identity(channels: usize) -> Self {
        let mut weights = vec![0.0; channels * channels];
        for c in 0..channels {
            weights[c * channels + c] = 1.0;
        }
        Self {
            in_channels: channels,
            out_channels: channels,
            kernel_size: 1,
            dilation: 1,
            weights,
            bias: vec![0.0; channels],
        }
    }

    /// Weights uniform in `±1/√fan_in`, zero bias.
    pub fn random<R: Rng + ?Sized>(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        dilation: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let fan_in = (in_channels * kernel_size * kernel_size).max(1) as f64;
        let bound = 1.0 / fan_in.sqrt();
        let n = out_channels * in_channels * kernel_size * kernel_size;
        let weights = (0..n).map(|_| rng.random_range(-bound..bound)).collect();
        let bias = (0..out_channels).map(|_| rng.random_range(-0.1..0.1)).collect();
        Self::new(in_channels, out_channels, kernel_size, dilation, weights, bias)
    }
}

/// Same-size dilated cross-correlation with zero padding.
pub fn dilated_conv(x: &ImageTensor, p: &ConvParams) -> Result<ImageTensor> {
    p.validate()?;
    if x.channels() != p.in_channels {
        return Err(Error::shape(
            format!("{} input channels", p.in_channels),
            format!("{}", x.channels()),
        ));
    }
    let (h, w, _) = x.dims();
    let (k, d) = (p.kernel_size, p.dilation as i64);
    let half = (k / 2) as i64;
    let (cin, cout) = (p.in_channels, p.out_channels);

    let mut out = ImageTensor::zeros(h, w, cout)?;
    for px in out.data_mut().chunks_exact_mut(cout) {
        px.copy_from_slice(&p.bias);
    }
    // Transposed per-tap weights: tap[i * cout + o].
    let mut tap = vec![0.0; cin * cout];
    for ky in 0..k {
        let oy = (ky as i64 - half) * d;
        for kx in 0..k {
            let ox = (kx as i64 - half) * d;
            for i in 0..cin {
                for o in 0..cout {
                    tap[i * cout + o] = p.weight(o, i, ky, kx);
                }
            }
            let ys = (-oy).max(0)..(h as i64 - oy).min(h as i64);
            let xs = (-ox).max(0)..(w as i64 - ox).min(w as i64);
            for y in ys.clone() {
                let sy = (y + oy) as usize;
                for xx in xs.clone() {
                    let sx = (xx + ox) as usize;
                    let base = out.index(y as usize, xx as usize, 0);
                    let src_start = x.index(sy, sx, 0);
                    let src = &x.data()[src_start..src_start + cin];
                    let dst = &mut out.data_mut()[base..base + cout];
                    for (i, &v) in src.iter().enumerate() {
                        if v == 0.0 {
                            continue;
                        }
                        for (acc, &wt) in dst.iter_mut().zip(&tap[i * cout..(i + 1) * cout]) {
                            *acc += wt * v;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Per-channel (depthwise) dilated convolution; `weights` is
/// `[channels][kernel_size][kernel_size]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthwiseParams {
    pub channels: usize,
    pub kernel_size: usize,
    pub dilation: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DepthwiseParams {
    /// The equivalent dense kernel, zero off the channel diagonal.
    pub fn to_dense(&self) -> Result<ConvParams> {
        let (c, k) = (self.channels, self.kernel_size);
        if self.weights.len() != c * k * k {
            return Err(Error::shape(format!("{} depthwise weights", c * k * k), self.weights.len()));
        }
        let mut weights = vec![0.0; c * c * k * k];
        for ch in 0..c {
            let src = &self.weights[ch * k * k..(ch + 1) * k * k];
            let dst = ((ch * c) + ch) * k * k;
            weights[dst..dst + k * k].copy_from_slice(src);
        }
        ConvParams::new(c, c, k, self.dilation, weights, self.bias.clone())
    }

    pub fn random<R: Rng + ?Sized>(channels: usize, kernel_size: usize, dilation: usize, rng: &mut R) -> Result<Self> {
        let bound = 1.0 / kernel_size as f64;
        let p = Self {
            channels,
            kernel_size,
            dilation,
            weights: (0..channels * kernel_size * kernel_size)
                .map(|_| rng.random_range(-bound..bound))
                .collect(),
            bias: vec![0.0; channels],
        };
        p.to_dense()?;
        Ok(p)
    }
}

/// One pyramid branch: a dense dilated convolution, or a depthwise dilated
/// convolution followed by a 1×1 pointwise convolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchConv {
    Separable {
        depthwise: DepthwiseParams,
        pointwise: ConvParams,
    },
    Dense(ConvParams),
}

impl BranchConv {
    pub fn dilation(&self) -> usize {
        match self {
            BranchConv::Dense(p) => p.dilation,
            BranchConv::Separable { depthwise, .. } => depthwise.dilation,
        }
    }

    pub fn in_channels(&self) -> usize {
        match self {
            BranchConv::Dense(p) => p.in_channels,
            BranchConv::Separable { depthwise, .. } => depthwise.channels,
        }
    }

    pub fn out_channels(&self) -> usize {
        match self {
            BranchConv::Dense(p) => p.out_channels,
            BranchConv::Separable { pointwise, .. } => pointwise.out_channels,
        }
    }

    pub fn forward(&self, x: &ImageTensor) -> Result<ImageTensor> {
        match self {
            BranchConv::Dense(p) => dilated_conv(x, p),
            BranchConv::Separable { depthwise, pointwise } => {
                if pointwise.kernel_size != 1 || pointwise.in_channels != depthwise.channels {
                    return Err(Error::param(
                        "pointwise",
                        "must be a 1x1 convolution over the depthwise channels",
                    ));
                }
                dilated_conv(&dilated_conv(x, &depthwise.to_dense()?)?, pointwise)
            }
        }
    }
}

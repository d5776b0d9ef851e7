//! Adaptive atrous pyramid: parallel dilated branches, a pooled per-branch
//! descriptor, per-modality importance scores, and residual enhancement.
//!
//! ```text
//! Y_i   = F_i(X)                          (one branch per dilation rate)
//! y_i   = mean(Y_i)                       (scalar per branch)
//! s^k   = clamp01(max(tanh(G^k(y)), 0))   (G^k = FC-ReLU-FC, k ∈ {seg, bnd})
//! Z^k   = Y ⊙ s^k + Y                     (branch i scaled by 1 + s_i)
//! ```
//!
//! A per-modality 1×1 convolution then squeezes `Z^k` back to the output
//! channel count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::conv::{dilated_conv, BranchConv, ConvParams, DepthwiseParams};
use crate::imagecore::ImageTensor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsppConfig {
    pub dilation_rates: Vec<usize>,
    pub branch_channels: usize,
}

impl AsppConfig {
    pub const DEFAULT_RATES: [usize; 7] = [1, 2, 4, 6, 8, 12, 18];

    pub fn new(dilation_rates: Vec<usize>, branch_channels: usize) -> Result<Self> {
        let cfg = Self {
            dilation_rates,
            branch_channels,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dilation_rates.is_empty() {
            return Err(Error::param("dilation_rates", "need at least one branch"));
        }
        if self.dilation_rates[0] == 0 {
            return Err(Error::param("dilation_rates", "rates must be at least 1"));
        }
        if self.dilation_rates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(
                "dilation_rates",
                format!("{:?} is not strictly increasing", self.dilation_rates),
            ));
        }
        if self.branch_channels == 0 {
            return Err(Error::param("branch_channels", "must be positive"));
        }
        Ok(())
    }

    pub fn branch_count(&self) -> usize {
        self.dilation_rates.len()
    }

    /// Kernel size for a rate: 1×1 for rate 1, 3×3 otherwise.
    pub fn kernel_size_for(rate: usize) -> usize {
        if rate == 1 {
            1
        } else {
            3
        }
    }
}

impl Default for AsppConfig {
    fn default() -> Self {
        Self {
            dilation_rates: Self::DEFAULT_RATES.to_vec(),
            branch_channels: 8,
        }
    }
}

/// FC-ReLU-FC block `ℝᴺ → ℝᴴ → ℝᴺ`. Weight matrices are row-major:
/// `fc1_weight` is `hidden × n`, `fc2_weight` is `n × hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub n: usize,
    pub hidden: usize,
    pub fc1_weight: Vec<f64>,
    pub fc1_bias: Vec<f64>,
    pub fc2_weight: Vec<f64>,
    pub fc2_bias: Vec<f64>,
}

impl TransformParams {
    pub fn zeros(n: usize, hidden: usize) -> Self {
        Self {
            n,
            hidden,
            fc1_weight: vec![0.0; hidden * n],
            fc1_bias: vec![0.0; hidden],
            fc2_weight: vec![0.0; n * hidden],
            fc2_bias: vec![0.0; n],
        }
    }

    /// Every parameter uniform in `±scale`.
    pub fn random<R: Rng + ?Sized>(n: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut draw = |len: usize| (0..len).map(|_| rng.random_range(-scale..=scale)).collect::<Vec<_>>();
        Self {
            n,
            hidden,
            fc1_weight: draw(hidden * n),
            fc1_bias: draw(hidden),
            fc2_weight: draw(n * hidden),
            fc2_bias: draw(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("fc1_weight", self.fc1_weight.len(), self.hidden * self.n),
            ("fc1_bias", self.fc1_bias.len(), self.hidden),
            ("fc2_weight", self.fc2_weight.len(), self.n * self.hidden),
            ("fc2_bias", self.fc2_bias.len(), self.n),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(Error::shape(format!("{want} values in {name}"), got));
            }
        }
        if self.n == 0 || self.hidden == 0 {
            return Err(Error::param("transform", "n and hidden must be positive"));
        }
        Ok(())
    }

    /// Flattened parameters in field order (fc1 weight, fc1 bias, fc2 weight,
    /// fc2 bias).
    pub fn to_flat(&self) -> Vec<f64> {
        [&self.fc1_weight, &self.fc1_bias, &self.fc2_weight, &self.fc2_bias]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn from_flat(n: usize, hidden: usize, flat: &[f64]) -> Result<Self> {
        let sizes = [hidden * n, hidden, n * hidden, n];
        if flat.len() != sizes.iter().sum::<usize>() {
            return Err(Error::shape(sizes.iter().sum::<usize>(), flat.len()));
        }
        let mut rest = flat;
        let mut take = |k: usize| {
            let (head, tail) = rest.split_at(k);
            rest = tail;
            head.to_vec()
        };
        Ok(Self {
            n,
            hidden,
            fc1_weight: take(sizes[0]),
            fc1_bias: take(sizes[1]),
            fc2_weight: take(sizes[2]),
            fc2_bias: take(sizes[3]),
        })
    }
}

/// Per-branch importance scores, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ImportanceVector(Vec<f64>);

impl ImportanceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param("importance", format!("{v} is outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ImportanceVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ImportanceVector> for Vec<f64> {
    fn from(v: ImportanceVector) -> Self {
        v.0
    }
}

/// Elementwise `max(tanh(v), 0)`.
pub fn clipped_tanh(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.tanh().max(0.0)).collect()
}

/// Derivative of [`clipped_tanh`]; taken as 0 at the kink.
pub fn clipped_tanh_grad(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            if x > 0.0 {
                let t = x.tanh();
                1.0 - t * t
            } else {
                0.0
            }
        })
        .collect()
}

struct TransformTape {
    pre_hidden: Vec<f64>,
    pre_out: Vec<f64>,
    scores: Vec<f64>,
}

fn transform_forward(y: &[f64], t: &TransformParams) -> Result<TransformTape> {
    t.validate()?;
    if y.len() != t.n {
        return Err(Error::shape(format!("descriptor of length {}", t.n), y.len()));
    }
    let pre_hidden: Vec<f64> = (0..t.hidden)
        .map(|j| {
            let row = &t.fc1_weight[j * t.n..(j + 1) * t.n];
            t.fc1_bias[j] + row.iter().zip(y).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect();
    let hidden: Vec<f64> = pre_hidden.iter().map(|&v| v.max(0.0)).collect();
    let pre_out: Vec<f64> = (0..t.n)
        .map(|i| {
            let row = &t.fc2_weight[i * t.hidden..(i + 1) * t.hidden];
            t.fc2_bias[i] + row.iter().zip(&hidden).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect();
    // γ: clamp to [0, 1]; a no-op on δ's range but guards the type invariant.
    let scores = clipped_tanh(&pre_out).into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(TransformTape {
        pre_hidden,
        pre_out,
        scores,
    })
}

/// Importance scores for one modality from the pooled descriptor `y`.
pub fn importance_scores(y: &[f64], t: &TransformParams) -> Result<ImportanceVector> {
    ImportanceVector::new(transform_forward(y, t)?.scores)
}

/// Gradients of `Σᵢ upstream[i]·sᵢ` with respect to the descriptor `y` and to
/// the flattened transform parameters (layout of [`TransformParams::to_flat`]).
pub fn importance_scores_vjp(y: &[f64], t: &TransformParams, upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let tape = transform_forward(y, t)?;
    if upstream.len() != t.n {
        return Err(Error::shape(t.n, upstream.len()));
    }
    let d_pre_out: Vec<f64> = clipped_tanh_grad(&tape.pre_out)
        .iter()
        .zip(upstream)
        .map(|(g, u)| g * u)
        .collect();
    let hidden: Vec<f64> = tape.pre_hidden.iter().map(|&v| v.max(0.0)).collect();

    let mut d_fc2_w = vec![0.0; t.n * t.hidden];
    let mut d_hidden = vec![0.0; t.hidden];
    for i in 0..t.n {
        for j in 0..t.hidden {
            d_fc2_w[i * t.hidden + j] = d_pre_out[i] * hidden[j];
            d_hidden[j] += d_pre_out[i] * t.fc2_weight[i * t.hidden + j];
        }
    }
    let d_pre_hidden: Vec<f64> = d_hidden
        .iter()
        .zip(&tape.pre_hidden)
        .map(|(d, &p)| if p > 0.0 { *d } else { 0.0 })
        .collect();
    let mut d_fc1_w = vec![0.0; t.hidden * t.n];
    let mut d_y = vec![0.0; t.n];
    for j in 0..t.hidden {
        for i in 0..t.n {
            d_fc1_w[j * t.n + i] = d_pre_hidden[j] * y[i];
            d_y[i] += d_pre_hidden[j] * t.fc1_weight[j * t.n + i];
        }
    }
    let d_params = [d_fc1_w, d_pre_hidden, d_fc2_w, d_pre_out].concat();
    Ok((d_y, d_params))
}

/// Runs every branch on `x`; branch `i` uses `dilation_rates[i]`.
pub fn aspp_branches(x: &ImageTensor, cfg: &AsppConfig, branches: &[BranchConv]) -> Result<Vec<ImageTensor>> {
    cfg.validate()?;
    if branches.len() != cfg.branch_count() {
        return Err(Error::shape(format!("{} branches", cfg.branch_count()), branches.len()));
    }
    branches
        .iter()
        .zip(&cfg.dilation_rates)
        .map(|(b, &rate)| {
            if b.dilation() != rate {
                return Err(Error::param(
                    "branch dilation",
                    format!("branch has dilation {} but config says {rate}", b.dilation()),
                ));
            }
            if b.out_channels() != cfg.branch_channels {
                return Err(Error::shape(
                    format!("{} branch channels", cfg.branch_channels),
                    b.out_channels(),
                ));
            }
            b.forward(x)
        })
        .collect()
}

/// Global average of each branch over all pixels and channels.
pub fn pooled_descriptor(ys: &[ImageTensor]) -> Vec<f64> {
    ys.iter().map(ImageTensor::mean).collect()
}

/// `Y ⊙ s + Y` with branch `i` scaled by `s_i`, concatenated along channels
/// (before the squeeze convolution).
pub fn enhance(ys: &[ImageTensor], s: &ImportanceVector) -> Result<ImageTensor> {
    if ys.len() != s.len() {
        return Err(Error::shape(format!("{} scores", ys.len()), s.len()));
    }
    let scaled: Vec<ImageTensor> = ys
        .iter()
        .zip(s.values())
        .map(|(y, &si)| y.map(|v| v * si + v))
        .collect();
    ImageTensor::concat_channels(&scaled)
}

/// All learned weights of one adaptive pyramid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsppParams {
    pub branches: Vec<BranchConv>,
    pub transform_seg: TransformParams,
    pub transform_bnd: TransformParams,
    pub squeeze_seg: ConvParams,
    pub squeeze_bnd: ConvParams,
}

impl AsppParams {
    /// Randomly initialised parameters; `separable` selects depthwise +
    /// pointwise branches.
    pub fn random<R: Rng + ?Sized>(
        cfg: &AsppConfig,
        in_channels: usize,
        out_channels: usize,
        hidden: usize,
        separable: bool,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.branch_count();
        let mut branches = Vec::with_capacity(n);
        for &rate in &cfg.dilation_rates {
            let k = AsppConfig::kernel_size_for(rate);
            branches.push(if separable {
                BranchConv::Separable {
                    depthwise: DepthwiseParams::random(in_channels, k, rate, rng)?,
                    pointwise: ConvParams::random(in_channels, cfg.branch_channels, 1, 1, rng)?,
                }
            } else {
                BranchConv::Dense(ConvParams::random(in_channels, cfg.branch_channels, k, rate, rng)?)
            });
        }
        let squeeze_in = n * cfg.branch_channels;
        Ok(Self {
            branches,
            transform_seg: TransformParams::random(n, hidden, 1.0, rng),
            transform_bnd: TransformParams::random(n, hidden, 1.0, rng),
            squeeze_seg: ConvParams::random(squeeze_in, out_channels, 1, 1, rng)?,
            squeeze_bnd: ConvParams::random(squeeze_in, out_channels, 1, 1, rng)?,
        })
    }
}

/// Every intermediate of one forward pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsppOutput {
    pub branches: Vec<ImageTensor>,
    pub pooled: Vec<f64>,
    pub scores_seg: ImportanceVector,
    pub scores_bnd: ImportanceVector,
    pub enhanced_seg: ImageTensor,
    pub enhanced_bnd: ImageTensor,
    pub z_seg: ImageTensor,
    pub z_bnd: ImageTensor,
}

/// Shared branches and descriptor, then independent score, enhancement and
/// squeeze paths for the segmentation and boundary modalities.
pub fn adaptive_aspp_forward(x: &ImageTensor, cfg: &AsppConfig, params: &AsppParams) -> Result<AsppOutput> {
    let branches = aspp_branches(x, cfg, &params.branches)?;
    let pooled = pooled_descriptor(&branches);
    let scores_seg = importance_scores(&pooled, &params.transform_seg)?;
    let scores_bnd = importance_scores(&pooled, &params.transform_bnd)?;
    let enhanced_seg = enhance(&branches, &scores_seg)?;
    let enhanced_bnd = enhance(&branches, &scores_bnd)?;
    let z_seg = dilated_conv(&enhanced_seg, &params.squeeze_seg)?;
    let z_bnd = dilated_conv(&enhanced_bnd, &params.squeeze_bnd)?;
    Ok(AsppOutput {
        branches,
        pooled,
        scores_seg,
        scores_bnd,
        enhanced_seg,
        enhanced_bnd,
        z_seg,
        z_bnd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::SeededRng;
    use crate::oracle::{conv_direct, importance_direct};
    use proptest::prelude::{any, prop_assert, proptest};

    fn random_map(h: usize, w: usize, c: usize, rng: &mut SeededRng) -> ImageTensor {
        ImageTensor::from_fn(h, w, c, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(AsppConfig::new(vec![], 4).is_err());
        assert!(AsppConfig::new(vec![1, 1], 4).is_err());
        assert!(AsppConfig::new(vec![2, 1], 4).is_err());
        assert!(AsppConfig::new(vec![0, 1], 4).is_err());
        assert_eq!(AsppConfig::default().branch_count(), 7);
    }

    #[test]
    fn clipped_tanh_values() {
        let out = clipped_tanh(&[0.0, -1.0, 1.0, -0.0]);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 0.0);
        // tanh(1) from its series e^2: (e² − 1)/(e² + 1), cross-checked to 15 digits.
        assert!((out[2] - 0.761_594_155_955_764_9).abs() < 1e-15);
        assert_eq!(out[3], 0.0);
    }

    #[test]
    fn zero_transform_gives_zero_scores() {
        let t = TransformParams::zeros(7, 7);
        let s = importance_scores(&[0.3, -2.0, 1.0, 0.0, 5.0, 0.1, 0.2], &t).unwrap();
        assert_eq!(s, ImportanceVector::zeros(7));
        assert!(importance_scores(&[0.0; 6], &t).is_err());
    }

    // W1 = [[1, -1], [0.5, 0.5]], b1 = [0, -0.25], W2 = [[2, 0], [-1, 1]], b2 = [0.1, 0]
    // y = [0.5, 0.25] → pre_hidden = [0.25, 0.125] → hidden same
    // pre_out = [0.6, -0.125] → s = [tanh(0.6), 0]
    #[test]
    fn small_fixture() {
        let t = TransformParams {
            n: 2,
            hidden: 2,
            fc1_weight: vec![1.0, -1.0, 0.5, 0.5],
            fc1_bias: vec![0.0, -0.25],
            fc2_weight: vec![2.0, 0.0, -1.0, 1.0],
            fc2_bias: vec![0.1, 0.0],
        };
        let s = importance_scores(&[0.5, 0.25], &t).unwrap();
        assert!((s.values()[0] - 0.6f64.tanh()).abs() < 1e-15);
        assert_eq!(s.values()[1], 0.0);
    }

    #[test]
    fn enhance_identities() {
        let mut rng = SeededRng::new(1, 0);
        let ys: Vec<ImageTensor> = (0..3).map(|_| random_map(4, 5, 2, &mut rng)).collect();
        let cat = ImageTensor::concat_channels(&ys).unwrap();
        assert_eq!(enhance(&ys, &ImportanceVector::zeros(3)).unwrap(), cat);
        assert_eq!(enhance(&ys, &ImportanceVector::ones(3)).unwrap(), cat.scale(2.0));
        assert!(enhance(&ys, &ImportanceVector::zeros(2)).is_err());
    }

    #[test]
    fn enhance_scales_each_branch() {
        let mut rng = SeededRng::new(2, 0);
        let ys: Vec<ImageTensor> = (0..4).map(|_| random_map(3, 3, 2, &mut rng)).collect();
        let s = ImportanceVector::new(vec![0.1, 0.9, 0.0, 0.5]).unwrap();
        let parts = enhance(&ys, &s).unwrap().split_channels(&[2, 2, 2, 2]).unwrap();
        for ((part, y), si) in parts.iter().zip(&ys).zip(s.values()) {
            for (a, b) in part.data().iter().zip(y.data()) {
                assert!((a - b * (1.0 + si)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pooled_descriptor_means() {
        let ys = vec![
            ImageTensor::filled(3, 3, 2, 0.75).unwrap(),
            ImageTensor::zeros(2, 2, 1).unwrap(),
            ImageTensor::filled(5, 7, 3, 0.7).unwrap(),
        ];
        let y = pooled_descriptor(&ys);
        assert_eq!(&y[..2], &[0.75, 0.0]);
        assert!((y[2] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn single_branch_is_plain_conv() {
        let mut rng = SeededRng::new(3, 0);
        let x = random_map(6, 6, 3, &mut rng);
        let cfg = AsppConfig::new(vec![2], 4).unwrap();
        let p = ConvParams::random(3, 4, 3, 2, &mut rng).unwrap();
        let ys = aspp_branches(&x, &cfg, &[BranchConv::Dense(p.clone())]).unwrap();
        assert_eq!(ys, vec![dilated_conv(&x, &p).unwrap()]);
    }

    #[test]
    fn default_forward_shapes_and_branch_oracle() {
        let mut rng = SeededRng::new(4, 0);
        let cfg = AsppConfig::default();
        let params = AsppParams::random(&cfg, 3, 5, 7, false, &mut rng).unwrap();
        let x = random_map(12, 10, 3, &mut rng);
        let out = adaptive_aspp_forward(&x, &cfg, &params).unwrap();
        assert_eq!(out.branches.len(), 7);
        assert!(out.branches.iter().all(|b| b.dims() == (12, 10, 8)));
        assert_eq!(out.enhanced_seg.dims(), (12, 10, 56));
        assert_eq!(out.z_seg.dims(), (12, 10, 5));
        assert_eq!(out.z_bnd.dims(), (12, 10, 5));
        for (b, conv) in out.branches.iter().zip(&params.branches) {
            let BranchConv::Dense(p) = conv else { unreachable!() };
            let oracle = conv_direct(&x, p);
            for (a, e) in b.data().iter().zip(oracle.data()) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn modality_independence() {
        let mut rng = SeededRng::new(5, 0);
        let cfg = AsppConfig::new(vec![1, 2, 3], 2).unwrap();
        let params = AsppParams::random(&cfg, 2, 2, 3, false, &mut rng).unwrap();
        let x = random_map(6, 6, 2, &mut rng);
        let base = adaptive_aspp_forward(&x, &cfg, &params).unwrap();
        let mut perturbed = params.clone();
        perturbed.transform_seg = TransformParams::random(3, 3, 2.0, &mut rng);
        let out = adaptive_aspp_forward(&x, &cfg, &perturbed).unwrap();
        assert_eq!(out.z_bnd, base.z_bnd);
        assert_eq!(out.scores_bnd, base.scores_bnd);
    }

    #[test]
    fn zero_transforms_make_modalities_agree() {
        let mut rng = SeededRng::new(6, 0);
        let cfg = AsppConfig::new(vec![1, 3], 3).unwrap();
        let mut params = AsppParams::random(&cfg, 2, 2, 2, true, &mut rng).unwrap();
        params.transform_seg = TransformParams::zeros(2, 2);
        params.transform_bnd = TransformParams::zeros(2, 2);
        params.squeeze_bnd = params.squeeze_seg.clone();
        let x = random_map(5, 5, 2, &mut rng);
        let out = adaptive_aspp_forward(&x, &cfg, &params).unwrap();
        assert_eq!(out.enhanced_seg, ImageTensor::concat_channels(&out.branches).unwrap());
        assert_eq!(out.enhanced_seg, out.enhanced_bnd);
        assert_eq!(out.z_seg, out.z_bnd);
    }

    #[test]
    fn mismatched_branch_rates_rejected() {
        let mut rng = SeededRng::new(7, 0);
        let cfg = AsppConfig::new(vec![1, 2], 2).unwrap();
        let x = random_map(4, 4, 1, &mut rng);
        let b = vec![
            BranchConv::Dense(ConvParams::random(1, 2, 1, 1, &mut rng).unwrap()),
            BranchConv::Dense(ConvParams::random(1, 2, 3, 3, &mut rng).unwrap()),
        ];
        assert!(aspp_branches(&x, &cfg, &b).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let mut rng = SeededRng::new(8, 0);
        let t = TransformParams::random(4, 3, 1.0, &mut rng);
        assert_eq!(TransformParams::from_flat(4, 3, &t.to_flat()).unwrap(), t);
    }

    proptest! {
        #[test]
        fn scores_always_in_unit_interval(
            seed in any::<u64>(),
            scale in 0.01f64..50.0,
            y in proptest::collection::vec(-100.0f64..100.0, 5),
        ) {
            let mut rng = SeededRng::new(seed, 0);
            let t = TransformParams::random(5, 4, scale, &mut rng);
            let s = importance_scores(&y, &t).unwrap();
            prop_assert!(s.values().iter().all(|v| (0.0..=1.0).contains(v)));
            let oracle = importance_direct(&y, &t);
            for (a, b) in s.values().iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn larger_score_never_shrinks_branch(
            seed in any::<u64>(),
            lo in 0.0f64..1.0,
            delta in 0.0f64..1.0,
        ) {
            let hi = (lo + delta).min(1.0);
            let mut rng = SeededRng::new(seed, 0);
            let y = random_map(3, 3, 2, &mut rng);
            let a = enhance(std::slice::from_ref(&y), &ImportanceVector::new(vec![lo]).unwrap()).unwrap();
            let b = enhance(std::slice::from_ref(&y), &ImportanceVector::new(vec![hi]).unwrap()).unwrap();
            for (u, v) in a.data().iter().zip(b.data()) {
                prop_assert!(v.abs() >= u.abs());
            }
        }
    }
}

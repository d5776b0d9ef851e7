//! Brute-force reference implementations.
//!
//! Each function here is the most literal evaluation of its definition:
//! nested loops, no precomputation, no shared helpers with the optimised
//! paths it is compared against. The test suites and the `selfcheck` command
//! measure the production code against these.

use crate::imagecore::{BinaryMask, ClassMask, ImageTensor};
use crate::neuralref::{ConvParams, TransformParams};

/// Direct quadruple-loop dilated cross-correlation with zero padding.
pub fn conv_direct(x: &ImageTensor, p: &ConvParams) -> ImageTensor {
    let (h, w, _) = x.dims();
    let k = p.kernel_size as i64;
    let d = p.dilation as i64;
    let pad = d * (k / 2);
    ImageTensor::from_fn(h, w, p.out_channels, |y, xx, o| {
        let mut acc = p.bias[o];
        for i in 0..p.in_channels {
            for ky in 0..k {
                for kx in 0..k {
                    let sy = y as i64 + ky * d - pad;
                    let sx = xx as i64 + kx * d - pad;
                    if sy < 0 || sx < 0 || sy >= h as i64 || sx >= w as i64 {
                        continue;
                    }
                    let wi = ((o * p.in_channels + i) * p.kernel_size + ky as usize) * p.kernel_size + kx as usize;
                    acc += p.weights[wi] * x.get(sy as usize, sx as usize, i);
                }
            }
        }
        acc
    })
    .expect("input dims are valid")
}

/// Square-window dilation (`dilating = true`) or erosion, with out-of-image
/// pixels treated as background.
pub fn morphology_direct(mask: &BinaryMask, radius: usize, dilating: bool) -> BinaryMask {
    let (h, w) = (mask.height() as i64, mask.width() as i64);
    let r = radius as i64;
    BinaryMask::from_fn(mask.height(), mask.width(), |y, x| {
        let mut hits = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                let (sy, sx) = (y as i64 + dy, x as i64 + dx);
                if sy >= 0 && sy < h && sx >= 0 && sx < w && mask.get(sy as usize, sx as usize) {
                    hits += 1;
                }
            }
        }
        if dilating {
            hits > 0
        } else {
            hits == (2 * r + 1) * (2 * r + 1)
        }
    })
    .expect("input dims are valid")
}

/// `out[y][x] = src[y − dy][x − dx]` or 0.
pub fn translate_direct(src: &ImageTensor, dx: i64, dy: i64) -> ImageTensor {
    let (h, w, c) = src.dims();
    ImageTensor::from_fn(h, w, c, |y, x, ch| {
        let sy = y as i64 - dy;
        let sx = x as i64 - dx;
        if sy >= 0 && sx >= 0 && sy < h as i64 && sx < w as i64 {
            src.get(sy as usize, sx as usize, ch)
        } else {
            0.0
        }
    })
    .expect("input dims are valid")
}

pub fn translate_mask_direct(src: &BinaryMask, dx: i64, dy: i64) -> BinaryMask {
    let (h, w) = (src.height() as i64, src.width() as i64);
    BinaryMask::from_fn(src.height(), src.width(), |y, x| {
        let sy = y as i64 - dy;
        let sx = x as i64 - dx;
        sy >= 0 && sx >= 0 && sy < h && sx < w && src.get(sy as usize, sx as usize)
    })
    .expect("input dims are valid")
}

/// `G(y) = W₂·relu(W₁·y + b₁) + b₂`, then `clamp(max(tanh(·), 0), 0, 1)`.
pub fn importance_direct(y: &[f64], t: &TransformParams) -> Vec<f64> {
    let mut hidden = vec![0.0; t.hidden];
    for (j, hj) in hidden.iter_mut().enumerate() {
        let mut acc = t.fc1_bias[j];
        for (i, yi) in y.iter().enumerate() {
            acc += t.fc1_weight[j * t.n + i] * yi;
        }
        *hj = if acc > 0.0 { acc } else { 0.0 };
    }
    (0..t.n)
        .map(|i| {
            let mut acc = t.fc2_bias[i];
            for (j, hj) in hidden.iter().enumerate() {
                acc += t.fc2_weight[i * t.hidden + j] * hj;
            }
            acc.tanh().max(0.0).clamp(0.0, 1.0)
        })
        .collect()
}

/// One-vs-rest `(tp, tn, fp, fn)` per class by per-pixel tally.
pub fn confusion_direct(pred: &ClassMask, gt: &ClassMask, classes: usize) -> Vec<[u64; 4]> {
    let mut out = vec![[0u64; 4]; classes];
    for (c, counts) in out.iter_mut().enumerate() {
        for (&p, &g) in pred.data().iter().zip(gt.data()) {
            let (p, g) = (p as usize == c, g as usize == c);
            let slot = match (p, g) {
                (true, true) => 0,
                (false, false) => 1,
                (true, false) => 2,
                (false, true) => 3,
            };
            counts[slot] += 1;
        }
    }
    out
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{mask::BinaryMask, tensor::ImageTensor, SeededRng};
use crate::{Error, Result};

/// Integer pixel offset `D = (dx, dy)`; positive values move content right
/// and down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TranslationVector {
    pub dx: i64,
    pub dy: i64,
}

impl TranslationVector {
    pub fn new(dx: i64, dy: i64) -> Self {
        Self { dx, dy }
    }

    pub fn inverse(self) -> Self {
        Self {
            dx: -self.dx,
            dy: -self.dy,
        }
    }
}

/// Shift with zero fill: `out[y][x] = src[y - dy][x - dx]` when that source
/// index is in bounds, 0 otherwise.
pub trait Translate: Sized {
    fn translate_zero_fill(&self, d: TranslationVector) -> Self;
}

// Source range [lo, hi) along one axis that lands in bounds after shifting by `d`.
fn overlap(len: usize, d: i64) -> Option<(usize, usize)> {
    let len = len as i64;
    let lo = (-d).max(0);
    let hi = (len - d).min(len);
    (lo < hi).then_some((lo as usize, hi as usize))
}

impl Translate for ImageTensor {
    fn translate_zero_fill(&self, d: TranslationVector) -> Self {
        let (h, w, c) = self.dims();
        let mut out = ImageTensor::zeros(h, w, c).expect("source dims are valid");
        let (Some((y0, y1)), Some((x0, x1))) = (overlap(h, d.dy), overlap(w, d.dx)) else {
            return out;
        };
        for sy in y0..y1 {
            let ty = (sy as i64 + d.dy) as usize;
            let tx = (x0 as i64 + d.dx) as usize;
            let src = &self.data()[self.index(sy, x0, 0)..self.index(sy, x1 - 1, c - 1) + 1];
            let start = out.index(ty, tx, 0);
            out.data_mut()[start..start + src.len()].copy_from_slice(src);
        }
        out
    }
}

impl Translate for BinaryMask {
    fn translate_zero_fill(&self, d: TranslationVector) -> Self {
        let (h, w) = (self.height(), self.width());
        let mut out = BinaryMask::zeros(h, w).expect("source dims are valid");
        let (Some((y0, y1)), Some((x0, x1))) = (overlap(h, d.dy), overlap(w, d.dx)) else {
            return out;
        };
        for sy in y0..y1 {
            for sx in x0..x1 {
                if self.get(sy, sx) {
                    out.set((sy as i64 + d.dy) as usize, (sx as i64 + d.dx) as usize, true);
                }
            }
        }
        out
    }
}

pub fn translate_zero_fill<T: Translate>(src: &T, d: TranslationVector) -> T {
    src.translate_zero_fill(d)
}

/// Draws `dx ~ U(-λw, λw)` and `dy ~ U(-λh, λh)`, rounded to the nearest
/// pixel with ties away from zero.
///
/// Rounded values are clamped to `⌊λw⌋` / `⌊λh⌋` so the result never leaves
/// the continuous interval.
pub fn sample_translation<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    lambda: f64,
    rng: &mut R,
) -> Result<TranslationVector> {
    validate_lambda(lambda)?;
    Ok(TranslationVector {
        dx: sample_offset(width, lambda, rng),
        dy: sample_offset(height, lambda, rng),
    })
}

pub(crate) fn validate_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param("lambda", format!("{lambda} is outside [0, 1]")));
    }
    Ok(())
}

fn sample_offset<R: Rng + ?Sized>(extent: usize, lambda: f64, rng: &mut R) -> i64 {
    let bound = lambda * extent as f64;
    if bound <= 0.0 {
        return 0;
    }
    let v: f64 = rng.random_range(-bound..=bound);
    let limit = bound.floor() as i64;
    (v.round() as i64).clamp(-limit, limit)
}

impl SeededRng {
    pub fn translation(&mut self, width: usize, height: usize, lambda: f64) -> Result<TranslationVector> {
        sample_translation(width, height, lambda, self)
    }
}

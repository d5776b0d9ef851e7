//! Mixup, Cutout and CutMix adapted to segmentation triples.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::{Error, Result};

/// Half-open pixel rectangle `[y0, y1) × [x0, x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub y0: usize,
    pub x0: usize,
    pub y1: usize,
    pub x1: usize,
}

impl Rect {
    /// Rectangle of `height × width` centred on `(cy, cx)`, clipped to the
    /// image.
    pub fn centered(cy: usize, cx: usize, height: usize, width: usize, img_h: usize, img_w: usize) -> Rect {
        let clip = |c: usize, len: usize, max: usize| {
            let lo = c as i64 - (len / 2) as i64;
            let hi = lo + len as i64;
            (lo.clamp(0, max as i64) as usize, hi.clamp(0, max as i64) as usize)
        };
        let (y0, y1) = clip(cy, height, img_h);
        let (x0, x1) = clip(cx, width, img_w);
        Rect { y0, x0, y1, x1 }
    }

    pub fn full(height: usize, width: usize) -> Rect {
        Rect {
            y0: 0,
            x0: 0,
            y1: height,
            x1: width,
        }
    }

    pub fn area(&self) -> usize {
        self.y1.saturating_sub(self.y0) * self.x1.saturating_sub(self.x0)
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        (self.y0..self.y1).contains(&y) && (self.x0..self.x1).contains(&x)
    }

    fn check(&self, height: usize, width: usize) -> Result<()> {
        if self.y0 > self.y1 || self.x0 > self.x1 || self.y1 > height || self.x1 > width {
            return Err(Error::param(
                "rect",
                format!("{self:?} is not inside a {height}x{width} image"),
            ));
        }
        Ok(())
    }
}

/// `image = λ·a + (1 − λ)·b`; labels come from `a` when `λ ≥ 0.5`, else from
/// `b`.
pub fn mixup_with_lambda(a: &Sample, b: &Sample, lambda: f64) -> Result<Sample> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param("lambda", format!("{lambda} is outside [0, 1]")));
    }
    a.ensure_same_size(b)?;
    let image = a.image.zip_with(&b.image, |x, y| lambda * x + (1.0 - lambda) * y)?;
    let labels = if lambda >= 0.5 { a } else { b };
    Ok(Sample {
        image,
        seg: labels.seg.clone(),
        boundary: labels.boundary.clone(),
    })
}

/// Mixup with `λ ~ Beta(alpha, alpha)`. Returns the sample and the drawn λ.
pub fn mixup<R: Rng + ?Sized>(a: &Sample, b: &Sample, alpha: f64, rng: &mut R) -> Result<(Sample, f64)> {
    let beta = Beta::new(alpha, alpha)
        .map_err(|e| Error::param("alpha", format!("{alpha}: {e}")))?;
    let lambda = beta.sample(rng);
    Ok((mixup_with_lambda(a, b, lambda)?, lambda))
}

/// Zeroes the image inside `hole`; labels are unchanged.
pub fn cutout_region(a: &Sample, hole: Rect) -> Result<Sample> {
    hole.check(a.height(), a.width())?;
    let mut out = a.clone();
    for y in hole.y0..hole.y1 {
        for x in hole.x0..hole.x1 {
            out.image.pixel_mut(y, x).fill(0.0);
        }
    }
    Ok(out)
}

/// Square hole of side `hole_size` at a uniformly drawn centre, clipped to the
/// image.
pub fn cutout<R: Rng + ?Sized>(a: &Sample, hole_size: usize, rng: &mut R) -> Result<(Sample, Rect)> {
    let cy = rng.random_range(0..a.height());
    let cx = rng.random_range(0..a.width());
    let hole = Rect::centered(cy, cx, hole_size, hole_size, a.height(), a.width());
    Ok((cutout_region(a, hole)?, hole))
}

/// Copies `patch` from `b` into `a` for image, segmentation and boundary.
pub fn cutmix_region(a: &Sample, b: &Sample, patch: Rect) -> Result<Sample> {
    a.ensure_same_size(b)?;
    patch.check(a.height(), a.width())?;
    let mut out = a.clone();
    for y in patch.y0..patch.y1 {
        for x in patch.x0..patch.x1 {
            out.image.pixel_mut(y, x).copy_from_slice(b.image.pixel(y, x));
            out.seg.set(y, x, b.seg.get(y, x));
            out.boundary.set(y, x, b.boundary.get(y, x));
        }
    }
    Ok(out)
}

/// CutMix with area ratio `r ~ U(0, 1)`: the patch is `√r·H × √r·W` (same
/// aspect as the image) around a uniform centre, clipped to the image.
pub fn cutmix<R: Rng + ?Sized>(a: &Sample, b: &Sample, rng: &mut R) -> Result<(Sample, Rect)> {
    let (h, w) = (a.height(), a.width());
    let side = rng.random::<f64>().sqrt();
    let ph = (h as f64 * side).round() as usize;
    let pw = (w as f64 * side).round() as usize;
    let cy = rng.random_range(0..h);
    let cx = rng.random_range(0..w);
    let patch = Rect::centered(cy, cx, ph, pw, h, w);
    Ok((cutmix_region(a, b, patch)?, patch))
}

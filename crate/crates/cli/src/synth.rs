//! Synthetic stand-in dataset: textured backgrounds with one to three
//! "transparent" regions (ellipses and star-shaped polygons) whose interiors
//! are a faint tint of the background and whose rims catch a highlight.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use anyhow::{bail, Result};
use fakemix_core::imagecore::{quantize, write_image_png, write_mask_png, BinaryMask, ImageTensor, SeededRng};
use rand::Rng;
use rayon::prelude::*;

use crate::fsutil::StagedDir;
use crate::manifest::{Manifest, ManifestEntry};

pub const IMAGE_DIR: &str = "images";
pub const MASK_DIR: &str = "masks";
pub const MANIFEST_NAME: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Ellipse { cy: f64, cx: f64, ry: f64, rx: f64, angle: f64 },
    Polygon(Vec<(f64, f64)>),
}

impl Shape {
    fn contains(&self, y: f64, x: f64) -> bool {
        match self {
            Shape::Ellipse { cy, cx, ry, rx, angle } => {
                let (s, c) = angle.sin_cos();
                let (dy, dx) = (y - cy, x - cx);
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                (u / rx).powi(2) + (v / ry).powi(2) <= 1.0
            }
            Shape::Polygon(pts) => {
                // Even-odd ray casting.
                let mut inside = false;
                let mut j = pts.len() - 1;
                for i in 0..pts.len() {
                    let (yi, xi) = pts[i];
                    let (yj, xj) = pts[j];
                    if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                        inside = !inside;
                    }
                    j = i;
                }
                inside
            }
        }
    }
}

fn random_shape(rng: &mut SeededRng, size: f64, central: bool) -> Shape {
    let (lo, hi) = if central { (0.25, 0.75) } else { (0.1, 0.9) };
    let cy = rng.random_range(lo..hi) * size;
    let cx = rng.random_range(lo..hi) * size;
    let r_min = (size / 8.0).max(1.5);
    let r_max = (size / 4.0).max(r_min + 0.5);
    if rng.random_bool(0.5) {
        Shape::Ellipse {
            cy,
            cx,
            ry: rng.random_range(r_min..r_max),
            rx: rng.random_range(r_min..r_max),
            angle: rng.random_range(0.0..TAU),
        }
    } else {
        let n = rng.random_range(3..=7);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts = angles
            .into_iter()
            .map(|a| {
                let r = rng.random_range(r_min..r_max);
                (cy + r * a.sin(), cx + r * a.cos())
            })
            .collect();
        Shape::Polygon(pts)
    }
}

/// Deterministic image and foreground mask for sample `index` of a run.
pub fn synth_sample(seed: u64, index: u64, size: usize) -> Result<(ImageTensor, BinaryMask)> {
    if size == 0 {
        bail!("synthetic image size must be positive");
    }
    let mut rng = SeededRng::for_purpose(seed, index, "synth");
    let s = size as f64;
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.25..0.75));
    let (gy, gx) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    let freq = rng.random_range(1.0..4.0);
    let phase: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..TAU));
    let tint: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.6..1.0));

    let shapes: Vec<Shape> = (0..rng.random_range(1..=3))
        .map(|k| random_shape(&mut rng, s, k == 0))
        .collect();
    let mut mask = BinaryMask::from_fn(size, size, |y, x| {
        let (py, px) = (y as f64 + 0.5, x as f64 + 0.5);
        shapes.iter().any(|sh| sh.contains(py, px))
    })?;
    if mask.is_empty() {
        mask.set(size / 2, size / 2, true);
    }
    let rim = |y: usize, x: usize| {
        mask.get(y, x)
            && [(0i64, 1i64), (0, -1), (1, 0), (-1, 0)].iter().any(|&(dy, dx)| {
                let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                ny < 0 || nx < 0 || ny >= size as i64 || nx >= size as i64 || !mask.get(ny as usize, nx as usize)
            })
    };

    let mut noise = SeededRng::for_purpose(seed, index, "synth-noise");
    let image = ImageTensor::from_fn(size, size, 3, |y, x, c| {
        let (fy, fx) = (y as f64 / s - 0.5, x as f64 / s - 0.5);
        let bg = base[c] + gy * fy + gx * fx + 0.08 * (TAU * freq * (fx + 0.7 * fy) + phase[c]).sin();
        let v = if rim(y, x) {
            bg + 0.25
        } else if mask.get(y, x) {
            0.85 * bg + 0.15 * tint[c]
        } else {
            bg
        };
        (v + noise.random_range(-0.02..0.02)).clamp(0.0, 1.0)
    })?;
    Ok((image, mask))
}

/// Writes `count` samples of `size × size` under `out_dir` together with a
/// manifest. The directory is replaced atomically.
pub fn cmd_synth(count: usize, size: usize, seed: u64, out_dir: &Path) -> Result<Manifest> {
    let staged = StagedDir::new(out_dir)?;
    let root = staged.path();
    fs::create_dir_all(root.join(IMAGE_DIR))?;
    fs::create_dir_all(root.join(MASK_DIR))?;

    let results: Vec<(ManifestEntry, [f64; 3])> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let (image, mask) = synth_sample(seed, i as u64, size)?;
            let id = format!("{i:05}");
            let entry = ManifestEntry {
                image: format!("{IMAGE_DIR}/{id}.png").into(),
                seg: format!("{MASK_DIR}/{id}.png").into(),
                boundary: None,
                split: if i % 5 == 4 { "test" } else { "train" }.into(),
                id,
            };
            write_image_png(root.join(&entry.image), &image)?;
            write_mask_png(root.join(&entry.seg), &mask)?;
            // Sums of the stored 8-bit values, as ingest would see them.
            let mut sums = [0.0; 3];
            for px in image.data().chunks_exact(3) {
                for (s, &v) in sums.iter_mut().zip(px) {
                    *s += f64::from(quantize(v));
                }
            }
            Ok((entry, sums))
        })
        .collect::<Result<_>>()?;

    let pixels = (count * size * size) as f64;
    let mut totals = [0.0; 3];
    for (_, sums) in &results {
        for (t, s) in totals.iter_mut().zip(sums) {
            *t += s;
        }
    }
    let means = if count == 0 {
        vec![0.0; 3]
    } else {
        totals.iter().map(|t| t / 255.0 / pixels).collect()
    };
    let entries = results.into_iter().map(|(e, _)| e).collect();
    let manifest = Manifest::new(means, entries, root.to_path_buf());
    manifest.save(&root.join(MANIFEST_NAME))?;
    staged.commit()?;
    Ok(Manifest {
        base_dir: out_dir.to_path_buf(),
        ..manifest
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_deterministic_and_nonempty() {
        for i in 0..50 {
            let (a, ma) = synth_sample(3, i, 32).unwrap();
            let (b, mb) = synth_sample(3, i, 32).unwrap();
            assert_eq!(a, b);
            assert_eq!(ma, mb);
            assert!(!ma.is_empty());
            assert!(a.is_unit_range());
        }
        assert_ne!(synth_sample(3, 0, 32).unwrap(), synth_sample(4, 0, 32).unwrap());
    }

    #[test]
    fn tiny_images_still_have_foreground() {
        for i in 0..20 {
            assert!(!synth_sample(1, i, 2).unwrap().1.is_empty());
        }
        assert!(synth_sample(1, 0, 0).is_err());
    }

    #[test]
    fn polygon_contains_square_interior() {
        let sq = Shape::Polygon(vec![(0.0, 0.0), (0.0, 4.0), (4.0, 4.0), (4.0, 0.0)]);
        assert!(sq.contains(2.0, 2.0));
        assert!(!sq.contains(5.0, 2.0));
        let e = Shape::Ellipse {
            cy: 0.0,
            cx: 0.0,
            ry: 1.0,
            rx: 3.0,
            angle: 0.0,
        };
        assert!(e.contains(0.0, 2.9));
        assert!(!e.contains(1.1, 0.0));
    }
}

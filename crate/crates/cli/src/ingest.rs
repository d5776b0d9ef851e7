use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fakemix_core::imagecore::{read_class_png, read_image_png};
use rayon::prelude::*;

use crate::fsutil::{png_files, relative_to};
use crate::manifest::{Manifest, ManifestEntry};

/// Pairs `<stem>.png` images and masks, computes per-channel means over every
/// image pixel and writes the manifest.
pub fn cmd_ingest(image_dir: &Path, mask_dir: &Path, out_manifest: &Path, split: &str) -> Result<Manifest> {
    let images: BTreeMap<_, _> = png_files(image_dir)?.into_iter().collect();
    let masks: BTreeMap<_, _> = png_files(mask_dir)?.into_iter().collect();
    let unpaired: Vec<&String> = images
        .keys()
        .filter(|k| !masks.contains_key(*k))
        .chain(masks.keys().filter(|k| !images.contains_key(*k)))
        .collect();
    if !unpaired.is_empty() {
        bail!("unpaired files (no image/mask partner): {unpaired:?}");
    }
    if images.is_empty() {
        bail!("no PNG files found in {} and {}", image_dir.display(), mask_dir.display());
    }

    let per_image: Vec<(Vec<f64>, usize)> = images
        .par_iter()
        .map(|(stem, img_path)| -> Result<_> {
            let img = read_image_png(img_path).with_context(|| format!("{stem}: image"))?;
            let seg = read_class_png(&masks[stem]).with_context(|| format!("{stem}: mask"))?;
            if (seg.height(), seg.width()) != (img.height(), img.width()) {
                bail!(
                    "{stem}: mask is {}x{} but image is {}x{}",
                    seg.height(),
                    seg.width(),
                    img.height(),
                    img.width()
                );
            }
            Ok((img.channel_sums(), img.height() * img.width()))
        })
        .collect::<Result<_>>()?;

    let pixels: usize = per_image.iter().map(|(_, n)| n).sum();
    let mut sums = vec![0.0; 3];
    for (s, _) in &per_image {
        for (t, v) in sums.iter_mut().zip(s) {
            *t += v;
        }
    }
    let means = sums.into_iter().map(|s| s / pixels as f64).collect();

    let base = out_manifest.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(base)?;
    let entries = images
        .iter()
        .map(|(stem, img)| ManifestEntry {
            id: stem.clone(),
            image: relative_to(img, base),
            seg: relative_to(&masks[stem], base),
            boundary: None,
            split: split.to_string(),
        })
        .collect();
    let manifest = Manifest::new(means, entries, base.to_path_buf());
    manifest.save(out_manifest)?;
    Ok(manifest)
}

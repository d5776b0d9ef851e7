use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fakemix_core::boundary::{boundary_band, multiclass_to_binary};
use fakemix_core::imagecore::{read_class_png, write_mask_png};
use rayon::prelude::*;

use crate::fsutil::{atomic_bytes, atomic_file};
use crate::manifest::{band_config, Manifest};

pub const BOUNDARY_DIR: &str = "boundaries";

/// Writes `boundaries/<id>.png` next to the manifest for every entry and
/// records the paths. Re-running with the same thickness rewrites identical
/// bytes.
pub fn cmd_gen_boundary(manifest_path: &Path, thickness: Option<usize>) -> Result<Manifest> {
    let mut manifest = Manifest::load(manifest_path)?;
    let out_dir = manifest.base_dir.join(BOUNDARY_DIR);
    fs::create_dir_all(&out_dir)?;
    let paths: Vec<PathBuf> = manifest
        .entries
        .par_iter()
        .map(|e| -> Result<PathBuf> {
            let seg = read_class_png(manifest.resolve(&e.seg)).with_context(|| format!("entry {:?}", e.id))?;
            let band = boundary_band(&multiclass_to_binary(&seg), band_config(thickness, seg.height(), seg.width())?);
            let rel = PathBuf::from(BOUNDARY_DIR).join(format!("{}.png", e.id));
            let dest = manifest.base_dir.join(&rel);
            atomic_file(&dest, |tmp| Ok(write_mask_png(tmp, &band)?))?;
            Ok(rel)
        })
        .collect::<Result<_>>()?;
    for (e, p) in manifest.entries.iter_mut().zip(paths) {
        e.boundary = Some(p);
    }
    atomic_bytes(manifest_path, manifest.to_jsonl().as_bytes())?;
    Ok(manifest)
}

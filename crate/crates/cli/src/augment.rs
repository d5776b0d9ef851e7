//! Augmentation runs over a manifest, with a provenance sidecar that is
//! enough to rebuild every output sample.

use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fakemix_core::augment::{
    cutmix, cutmix_region, cutout, cutout_region, fakemix, mixup, mixup_with_lambda, replay_fakemix, DonorPool,
    DonorSource, FakeMixConfig, FakeMixTrace, Paste, Rect, Sample,
};
use fakemix_core::imagecore::{write_class_png, write_image_png, write_mask_png, SeededRng, TranslationVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Method, RunConfig};
use crate::fsutil::StagedDir;
use crate::manifest::{Manifest, ManifestEntry};

pub const PROVENANCE_NAME: &str = "provenance.jsonl";
pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// Donors read from disk on demand.
pub struct DiskPool<'a> {
    manifest: &'a Manifest,
    thickness: Option<usize>,
}

impl<'a> DiskPool<'a> {
    pub fn new(manifest: &'a Manifest, thickness: Option<usize>) -> Self {
        Self { manifest, thickness }
    }
}

impl DonorPool for DiskPool<'_> {
    fn len(&self) -> usize {
        self.manifest.len()
    }

    fn fetch(&self, index: usize) -> fakemix_core::Result<Cow<'_, Sample>> {
        if index >= self.manifest.len() {
            return Err(fakemix_core::Error::DonorOutOfRange {
                index,
                len: self.manifest.len(),
            });
        }
        self.manifest
            .load_sample(index, self.thickness)
            .map(Cow::Owned)
            .map_err(|e| fakemix_core::Error::Data(format!("{e:#}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// The gate kept the original image.
    Kept,
    Augmented,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DonorRecord {
    pub id: String,
    /// Manifest index of the donor.
    pub index: usize,
    pub dx: i64,
    pub dy: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_offset: Option<TranslationVector>,
}

/// One sidecar line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub entry_id: String,
    pub index: usize,
    pub method: Method,
    pub outcome: Outcome,
    pub donors: Vec<DonorRecord>,
    /// Mixup weight of the base image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix_lambda: Option<f64>,
    /// Cutout hole or CutMix patch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Rect>,
}

fn fakemix_config(manifest: &Manifest, cfg: &RunConfig) -> FakeMixConfig {
    FakeMixConfig {
        channel_mean: Some(manifest.header.channel_means.clone()),
        ..cfg.fakemix.clone()
    }
}

fn donor_record(manifest: &Manifest, index: usize, shift: TranslationVector, content_offset: Option<TranslationVector>) -> DonorRecord {
    DonorRecord {
        id: manifest.entries[index].id.clone(),
        index,
        dx: shift.dx,
        dy: shift.dy,
        content_offset,
    }
}

/// Augments entry `index`. The rng stream is the entry index, so the result
/// does not depend on which worker runs it or in what order.
pub fn augment_entry(
    manifest: &Manifest,
    pool: &DiskPool<'_>,
    cfg: &RunConfig,
    index: usize,
) -> Result<(Sample, ProvenanceRecord)> {
    let base = manifest.load_sample(index, cfg.thickness)?;
    let mut rng = SeededRng::new(cfg.seed, index as u64);
    let donors = DonorSource::excluding(pool, index);
    let mut record = ProvenanceRecord {
        entry_id: manifest.entries[index].id.clone(),
        index,
        method: cfg.method,
        outcome: Outcome::Augmented,
        donors: Vec::new(),
        mix_lambda: None,
        region: None,
    };
    let sample = match cfg.method {
        Method::Fakemix => {
            let out = fakemix(&base, &donors, &fakemix_config(manifest, cfg), &mut rng)?;
            if out.trace.kept {
                record.outcome = Outcome::Kept;
            }
            record.donors = out
                .trace
                .pastes
                .iter()
                .map(|p| donor_record(manifest, p.donor, p.shift, p.content_offset))
                .collect();
            out.sample
        }
        Method::Mixup => {
            let d = donors.pick(&mut rng)?;
            let donor = donors.fetch_sized(d, base.height(), base.width())?;
            let (s, lambda) = mixup(&base, &donor, cfg.alpha, &mut rng)?;
            record.donors.push(donor_record(manifest, d, TranslationVector::default(), None));
            record.mix_lambda = Some(lambda);
            s
        }
        Method::Cutout => {
            let hole = cfg.hole_size.unwrap_or(base.height().min(base.width()) / 4);
            let (s, rect) = cutout(&base, hole, &mut rng)?;
            record.region = Some(rect);
            s
        }
        Method::Cutmix => {
            let d = donors.pick(&mut rng)?;
            let donor = donors.fetch_sized(d, base.height(), base.width())?;
            let (s, rect) = cutmix(&base, &donor, &mut rng)?;
            record.donors.push(donor_record(manifest, d, TranslationVector::default(), None));
            record.region = Some(rect);
            s
        }
    };
    Ok((sample, record))
}

/// Rebuilds an output sample from its provenance line without any RNG.
pub fn replay_record(manifest: &Manifest, cfg: &RunConfig, record: &ProvenanceRecord) -> Result<Sample> {
    let pool = DiskPool::new(manifest, cfg.thickness);
    let base = manifest.load_sample(record.index, cfg.thickness)?;
    let source = DonorSource::new(&pool);
    let donor = |i: usize| -> Result<Sample> {
        let r = record.donors.get(i).context("provenance line is missing a donor")?;
        Ok(source.fetch_sized(r.index, base.height(), base.width())?.into_owned())
    };
    let region = || record.region.context("provenance line is missing its region");
    Ok(match record.method {
        Method::Fakemix => {
            let trace = FakeMixTrace {
                kept: record.outcome == Outcome::Kept,
                pastes: record
                    .donors
                    .iter()
                    .map(|d| Paste {
                        donor: d.index,
                        shift: TranslationVector::new(d.dx, d.dy),
                        content_offset: d.content_offset,
                    })
                    .collect(),
            };
            replay_fakemix(&base, &pool, &fakemix_config(manifest, cfg), &trace)?
        }
        Method::Mixup => {
            let lambda = record.mix_lambda.context("mixup provenance line is missing mix_lambda")?;
            mixup_with_lambda(&base, &donor(0)?, lambda)?
        }
        Method::Cutout => cutout_region(&base, region()?)?,
        Method::Cutmix => cutmix_region(&base, &donor(0)?, region()?)?,
    })
}

pub fn write_sample(root: &Path, id: &str, sample: &Sample) -> Result<ManifestEntry> {
    let entry = ManifestEntry {
        id: id.to_string(),
        image: PathBuf::from("images").join(format!("{id}.png")),
        seg: PathBuf::from("seg").join(format!("{id}.png")),
        boundary: Some(PathBuf::from("boundary").join(format!("{id}.png"))),
        split: String::new(),
    };
    write_image_png(root.join(&entry.image), &sample.image)?;
    write_class_png(root.join(&entry.seg), &sample.seg)?;
    write_mask_png(root.join(entry.boundary.as_ref().expect("set above")), &sample.boundary)?;
    Ok(entry)
}

/// Output tree under `cfg.out`: `images/`, `seg/`, `boundary/`,
/// `manifest.jsonl` and `provenance.jsonl`. The tree is staged and swapped
/// in atomically.
pub fn cmd_augment(manifest_path: &Path, cfg: &RunConfig) -> Result<Vec<ProvenanceRecord>> {
    cfg.validate()?;
    let manifest = Manifest::load(manifest_path)?;
    let needs_donor = match cfg.method {
        Method::Fakemix => cfg.fakemix.repetitions > 0,
        Method::Mixup | Method::Cutmix => true,
        Method::Cutout => false,
    };
    if needs_donor && manifest.is_empty() {
        bail!("manifest has no entries to draw donors from");
    }
    let staged = StagedDir::new(&cfg.out)?;
    let root = staged.path();
    for sub in ["images", "seg", "boundary"] {
        fs::create_dir_all(root.join(sub))?;
    }

    let pool = DiskPool::new(&manifest, cfg.thickness);
    let threads = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let results: Vec<(ManifestEntry, ProvenanceRecord)> = threads.install(|| {
        (0..manifest.len())
            .into_par_iter()
            .map(|i| -> Result<_> {
                let src = &manifest.entries[i];
                let (sample, record) =
                    augment_entry(&manifest, &pool, cfg, i).with_context(|| format!("entry {:?}", src.id))?;
                let mut entry = write_sample(root, &src.id, &sample)?;
                entry.split = src.split.clone();
                Ok((entry, record))
            })
            .collect::<Result<_>>()
    })?;

    let (entries, records): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut sidecar = String::new();
    for r in &records {
        sidecar.push_str(&serde_json::to_string(r)?);
        sidecar.push('\n');
    }
    fs::write(root.join(PROVENANCE_NAME), sidecar)?;
    Manifest::new(manifest.header.channel_means.clone(), entries, root.to_path_buf())
        .save(&root.join(MANIFEST_NAME))?;
    staged.commit()?;
    Ok(records)
}

pub fn read_provenance(path: &Path) -> Result<Vec<ProvenanceRecord>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", path.display(), n + 1)))
        .collect()
}

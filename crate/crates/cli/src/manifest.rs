//! Dataset manifest: JSON lines, a header line followed by one line per
//! entry. Paths are stored relative to the manifest's directory when they lie
//! underneath it.
//!
//! ```text
//! {"format_version":1,"channel_means":[0.41,0.39,0.37]}
//! {"id":"0001","image":"images/0001.png","seg":"masks/0001.png","split":"train"}
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fakemix_core::augment::Sample;
use fakemix_core::boundary::{boundary_band, multiclass_to_binary, BoundaryBandConfig};
use fakemix_core::imagecore::{read_class_png, read_image_png, read_mask_png};
use serde::{Deserialize, Serialize};

use crate::fsutil::atomic_bytes;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub format_version: u32,
    pub channel_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub image: PathBuf,
    pub seg: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<PathBuf>,
    pub split: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
    /// Directory that relative entry paths are resolved against.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn new(channel_means: Vec<f64>, entries: Vec<ManifestEntry>, base_dir: PathBuf) -> Self {
        Self {
            header: ManifestHeader {
                format_version: FORMAT_VERSION,
                channel_means,
            },
            entries,
            base_dir,
        }
    }

    /// Parses and validates: known version, unique ids, existing files.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::parse(&text, base_dir).with_context(|| format!("in manifest {}", path.display()))?;
        m.check_files()?;
        Ok(m)
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, first)) = lines.next() else {
            bail!("manifest is empty (missing header line)");
        };
        let header: ManifestHeader = serde_json::from_str(first).context("line 1: bad header")?;
        if header.format_version != FORMAT_VERSION {
            bail!(
                "unsupported manifest format_version {} (expected {FORMAT_VERSION})",
                header.format_version
            );
        }
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in lines {
            let e: ManifestEntry =
                serde_json::from_str(line).with_context(|| format!("line {}: bad entry", n + 1))?;
            if !seen.insert(e.id.clone()) {
                bail!("line {}: duplicate id {:?}", n + 1, e.id);
            }
            entries.push(e);
        }
        Ok(Self {
            header,
            entries,
            base_dir,
        })
    }

    fn check_files(&self) -> Result<()> {
        for e in &self.entries {
            let paths = [Some(&e.image), Some(&e.seg), e.boundary.as_ref()];
            for p in paths.into_iter().flatten() {
                let full = self.resolve(p);
                if !full.is_file() {
                    bail!("entry {:?}: missing file {}", e.id, full.display());
                }
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_bytes(path, self.to_jsonl().as_bytes())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Loads entry `index` as a sample. Entries without a recorded boundary
    /// get one generated from the segmentation with `thickness` (or the
    /// size-scaled default).
    pub fn load_sample(&self, index: usize, thickness: Option<usize>) -> Result<Sample> {
        let e = self
            .entries
            .get(index)
            .with_context(|| format!("entry index {index} out of range"))?;
        let image = read_image_png(self.resolve(&e.image)).with_context(|| format!("entry {:?}: image", e.id))?;
        let seg = read_class_png(self.resolve(&e.seg)).with_context(|| format!("entry {:?}: seg", e.id))?;
        let boundary = match &e.boundary {
            Some(p) => read_mask_png(self.resolve(p)).with_context(|| format!("entry {:?}: boundary", e.id))?,
            None => boundary_band(&multiclass_to_binary(&seg), band_config(thickness, seg.height(), seg.width())?),
        };
        Sample::new(image, seg, boundary).with_context(|| format!("entry {:?}", e.id))
    }
}

pub fn band_config(thickness: Option<usize>, height: usize, width: usize) -> Result<BoundaryBandConfig> {
    Ok(match thickness {
        Some(t) => BoundaryBandConfig::new(t)?,
        None => BoundaryBandConfig::for_size(height, width),
    })
}

//! Augmentation run configuration. Sources, lowest precedence first:
//! built-in defaults, a flat JSON config file, `FAKEMIX_*` environment
//! variables, command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fakemix_core::augment::{ContentMode, DonorPolicy, FakeMixConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Fakemix,
    Mixup,
    Cutout,
    Cutmix,
}

/// Every setting as optional; used both for the JSON file and for the
/// flag/env layer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub method: Option<Method>,
    pub lambda: Option<f64>,
    pub prob: Option<f64>,
    pub reps: Option<usize>,
    pub content: Option<ContentMode>,
    pub donor_policy: Option<DonorPolicy>,
    pub alpha: Option<f64>,
    pub hole_size: Option<usize>,
    pub thickness: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            seed: over.seed.or(self.seed),
            workers: over.workers.or(self.workers),
            method: over.method.or(self.method),
            lambda: over.lambda.or(self.lambda),
            prob: over.prob.or(self.prob),
            reps: over.reps.or(self.reps),
            content: over.content.or(self.content),
            donor_policy: over.donor_policy.or(self.donor_policy),
            alpha: over.alpha.or(self.alpha),
            hole_size: over.hole_size.or(self.hole_size),
            thickness: over.thickness.or(self.thickness),
            out: over.out.or(self.out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub method: Method,
    /// λ, p, n and content mode; `channel_mean` is filled from the manifest.
    pub fakemix: FakeMixConfig,
    /// Mixup's Beta(α, α) parameter.
    pub alpha: f64,
    /// Cutout hole side; `None` means a quarter of the shorter image side.
    pub hole_size: Option<usize>,
    /// Boundary thickness for entries without a boundary file.
    pub thickness: Option<usize>,
    pub out: PathBuf,
}

pub const DEFAULT_ALPHA: f64 = 0.4;

impl RunConfig {
    pub fn new(out: PathBuf) -> Self {
        Self {
            seed: 0,
            workers: 1,
            method: Method::Fakemix,
            fakemix: FakeMixConfig::default(),
            alpha: DEFAULT_ALPHA,
            hole_size: None,
            thickness: None,
            out,
        }
    }

    pub fn from_layer(layer: ConfigLayer) -> Result<Self> {
        let Some(out) = layer.out else {
            bail!("no output directory given (--out, FAKEMIX_OUT or \"out\" in the config file)");
        };
        let mut cfg = Self::new(out);
        let fm = &mut cfg.fakemix;
        fm.lambda = layer.lambda.unwrap_or(fm.lambda);
        fm.p = layer.prob.unwrap_or(fm.p);
        fm.repetitions = layer.reps.unwrap_or(fm.repetitions);
        fm.content = layer.content.unwrap_or(fm.content);
        fm.donor_policy = layer.donor_policy.unwrap_or(fm.donor_policy);
        cfg.seed = layer.seed.unwrap_or(cfg.seed);
        cfg.workers = layer.workers.unwrap_or(cfg.workers);
        cfg.method = layer.method.unwrap_or(cfg.method);
        cfg.alpha = layer.alpha.unwrap_or(cfg.alpha);
        cfg.hole_size = layer.hole_size.or(cfg.hole_size);
        cfg.thickness = layer.thickness.or(cfg.thickness);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config file (if any) overlaid by flags.
    pub fn resolve(config_file: Option<&Path>, flags: ConfigLayer) -> Result<Self> {
        let base = match config_file {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        Self::from_layer(base.overlay(flags))
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if self.thickness == Some(0) {
            bail!("thickness must be at least 1");
        }
        match self.method {
            Method::Fakemix => {
                // Channel means arrive with the manifest; check the rest now.
                let mut probe = self.fakemix.clone();
                probe.channel_mean.get_or_insert_with(Vec::new);
                probe.validate()?;
            }
            Method::Mixup if !(self.alpha > 0.0 && self.alpha.is_finite()) => {
                bail!("alpha must be positive and finite, got {}", self.alpha)
            }
            _ => {}
        }
        Ok(())
    }
}

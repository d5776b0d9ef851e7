//! FakeMix and the Mixup / Cutout / CutMix comparison augmentations.
//!
//! Every augmentation here is a pure function of its inputs and the supplied
//! random stream, so a fixed `(seed, sample index)` reproduces an output
//! bit-for-bit no matter how work is scheduled.

mod baselines;
mod fakemix;
mod sample;

pub use baselines::{cutmix, cutmix_region, cutout, cutout_region, mixup, mixup_with_lambda, Rect};
pub use fakemix::{
    composite, extract_t_boundary, fakemix, fakemix_once, paste_layers, replay_fakemix, ContentFill,
    ContentMode, DonorPolicy, DonorPool, DonorSource, FakeMixConfig, FakeMixOutcome, FakeMixTrace, Paste,
    PasteLayers, PasteStep,
};
pub use sample::Sample;

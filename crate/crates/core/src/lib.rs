//! Boundary-guided augmentation and reference numerics for transparent-object
//! segmentation.
//!
//! The crate is organised bottom-up:
//!
//! - [`imagecore`] holds dense tensors, binary and class-id masks, morphology,
//!   zero-fill translation, resizing, PNG I/O and seeded per-sample RNG streams.
//! - [`boundary`] holds boundary-band labels derived from segmentation masks.
//! - [`augment`] holds FakeMix (boundary-content pasting with label preservation)
//!   and the Mixup, Cutout and CutMix baselines.
//! - [`neuralref`] holds a reference forward pass of the adaptive atrous pyramid,
//!   the dual-branch decoder fusion, losses and a finite-difference checker.
//! - [`metrics`] holds pixel accuracy, IoU/mIoU, MAE and BER/mBER.
//! - [`oracle`] holds brute-force reference implementations used by tests and the
//!   `selfcheck` command.

pub mod augment;
pub mod boundary;
mod error;
pub mod imagecore;
pub mod metrics;
pub mod neuralref;
pub mod oracle;

pub use error::{Error, Result};

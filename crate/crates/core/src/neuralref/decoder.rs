//! Bottom-up, dual-branch decoder fusion.
//!
//! ```text
//! M^s_p = F(Z^s_p + Z^s_p ⊙ Z^b_p [+ UP(M^s_{p+1})])
//! M^b_p = F(Z^b_p [+ UP(M^b_{p+1})])
//! ```
//!
//! The bracketed term is absent at the deepest stage.

use serde::{Deserialize, Serialize};

use super::conv::{dilated_conv, ConvParams};
use crate::imagecore::{upsample_bilinear, ImageTensor};
use crate::{Error, Result};

fn add_upsampled(base: ImageTensor, above: Option<&ImageTensor>) -> Result<ImageTensor> {
    match above {
        None => Ok(base),
        Some(m) => {
            let up = upsample_bilinear(m, base.height(), base.width())?;
            base.add(&up)
        }
    }
}

/// Segmentation-branch fusion with boundary attention.
pub fn decoder_fuse_seg(
    z_s: &ImageTensor,
    z_b: &ImageTensor,
    m_above: Option<&ImageTensor>,
    f: &ConvParams,
) -> Result<ImageTensor> {
    let attended = z_s.zip_with(z_b, |s, b| s + s * b)?;
    dilated_conv(&add_upsampled(attended, m_above)?, f)
}

/// Boundary-branch fusion.
pub fn decoder_fuse_bnd(z_b: &ImageTensor, m_above: Option<&ImageTensor>, f: &ConvParams) -> Result<ImageTensor> {
    dilated_conv(&add_upsampled(z_b.clone(), m_above)?, f)
}

/// Decoder features per stage; index 0 is the shallowest (largest) stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderState {
    pub seg: Vec<ImageTensor>,
    pub bnd: Vec<ImageTensor>,
}

/// Runs both branches from the deepest stage up. `stages[p]` holds
/// `(Z^s, Z^b)` for stage `p`; each stage must be exactly twice the spatial
/// size of the next.
pub fn decode(
    stages: &[(ImageTensor, ImageTensor)],
    f_seg: &[ConvParams],
    f_bnd: &[ConvParams],
) -> Result<DecoderState> {
    let n = stages.len();
    if n == 0 || f_seg.len() != n || f_bnd.len() != n {
        return Err(Error::shape(
            format!("{n} stages with one fusion conv per branch"),
            format!("{} seg / {} bnd convs", f_seg.len(), f_bnd.len()),
        ));
    }
    for w in stages.windows(2) {
        let (big, small) = (&w[0].0, &w[1].0);
        if big.height() != 2 * small.height() || big.width() != 2 * small.width() {
            return Err(Error::shape(
                format!("{}x{}", 2 * small.height(), 2 * small.width()),
                format!("{}x{}", big.height(), big.width()),
            ));
        }
    }
    let mut seg: Vec<Option<ImageTensor>> = vec![None; n];
    let mut bnd: Vec<Option<ImageTensor>> = vec![None; n];
    for p in (0..n).rev() {
        let (z_s, z_b) = &stages[p];
        let above_s = seg.get(p + 1).and_then(Option::as_ref);
        let above_b = bnd.get(p + 1).and_then(Option::as_ref);
        seg[p] = Some(decoder_fuse_seg(z_s, z_b, above_s, &f_seg[p])?);
        bnd[p] = Some(decoder_fuse_bnd(z_b, above_b, &f_bnd[p])?);
    }
    Ok(DecoderState {
        seg: seg.into_iter().map(|m| m.expect("filled")).collect(),
        bnd: bnd.into_iter().map(|m| m.expect("filled")).collect(),
    })
}

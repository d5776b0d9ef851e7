use super::{
    mask::{BinaryMask, ClassMask},
    tensor::ImageTensor,
};
use crate::{Error, Result};

fn check_target(new_h: usize, new_w: usize) -> Result<()> {
    if new_h == 0 || new_w == 0 {
        return Err(Error::param(
            "size",
            format!("target size must be positive, got {new_h}x{new_w}"),
        ));
    }
    Ok(())
}

// Corner-aligned source coordinate of output index `i`.
fn source_coord(i: usize, src_len: usize, dst_len: usize) -> f64 {
    if dst_len == 1 || src_len == 1 {
        0.0
    } else {
        i as f64 * (src_len - 1) as f64 / (dst_len - 1) as f64
    }
}

/// Channel-wise bilinear interpolation with corner-aligned sampling: output
/// corners coincide with input corners. Same-size input is returned unchanged.
pub fn upsample_bilinear(src: &ImageTensor, new_h: usize, new_w: usize) -> Result<ImageTensor> {
    check_target(new_h, new_w)?;
    let (h, w, c) = src.dims();
    if (h, w) == (new_h, new_w) {
        return Ok(src.clone());
    }
    let xs: Vec<(usize, usize, f64)> = (0..new_w)
        .map(|x| {
            let sx = source_coord(x, w, new_w);
            let x0 = (sx.floor() as usize).min(w - 1);
            (x0, (x0 + 1).min(w - 1), sx - x0 as f64)
        })
        .collect();
    let mut out = ImageTensor::zeros(new_h, new_w, c)?;
    for y in 0..new_h {
        let sy = source_coord(y, h, new_h);
        let y0 = (sy.floor() as usize).min(h - 1);
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f64;
        for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
            for ch in 0..c {
                let top = src.get(y0, x0, ch) * (1.0 - fx) + src.get(y0, x1, ch) * fx;
                let bottom = src.get(y1, x0, ch) * (1.0 - fx) + src.get(y1, x1, ch) * fx;
                out.set(y, x, ch, top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    Ok(out)
}

fn nearest_index(i: usize, src_len: usize, dst_len: usize) -> usize {
    (i * src_len / dst_len).min(src_len - 1)
}

pub fn resize_nearest_mask(src: &BinaryMask, new_h: usize, new_w: usize) -> Result<BinaryMask> {
    check_target(new_h, new_w)?;
    let (h, w) = (src.height(), src.width());
    BinaryMask::from_fn(new_h, new_w, |y, x| {
        src.get(nearest_index(y, h, new_h), nearest_index(x, w, new_w))
    })
}

pub fn resize_nearest_class(src: &ClassMask, new_h: usize, new_w: usize) -> Result<ClassMask> {
    check_target(new_h, new_w)?;
    let (h, w) = (src.height(), src.width());
    ClassMask::from_fn(new_h, new_w, |y, x| {
        src.get(nearest_index(y, h, new_h), nearest_index(x, w, new_w))
    })
}

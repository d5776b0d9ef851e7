//! 8-bit PNG raster I/O.
//!
//! Images are read as RGB and mapped to `[0, 1]` by `/255`; writing rounds to
//! the nearest 8-bit level. Binary masks read any nonzero gray value as 1 and
//! are written as exactly `{0, 255}`. Class-id masks store the id as the raw
//! gray value.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};

use super::{
    mask::{BinaryMask, ClassMask},
    tensor::ImageTensor,
};
use crate::{Error, Result};

pub fn read_image_png(path: impl AsRef<Path>) -> Result<ImageTensor> {
    let rgb = image::open(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect();
    ImageTensor::from_vec(h as usize, w as usize, 3, data)
}

/// Rounds `v ∈ [0, 1]` to the nearest 8-bit level; out-of-range values clamp.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a 1-channel (gray) or 3-channel (RGB) tensor.
pub fn write_image_png(path: impl AsRef<Path>, img: &ImageTensor) -> Result<()> {
    let (h, w, c) = img.dims();
    let raw: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    match c {
        3 => {
            let buf: RgbImage = ImageBuffer::<Rgb<u8>, _>::from_raw(w as u32, h as u32, raw)
                .expect("buffer length matches dims");
            buf.save_with_format(path, image::ImageFormat::Png)?;
        }
        1 => {
            let buf: GrayImage = ImageBuffer::<Luma<u8>, _>::from_raw(w as u32, h as u32, raw)
                .expect("buffer length matches dims");
            buf.save_with_format(path, image::ImageFormat::Png)?;
        }
        _ => {
            return Err(Error::param(
                "channels",
                format!("PNG output supports 1 or 3 channels, got {c}"),
            ))
        }
    }
    Ok(())
}

fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    Ok(image::open(path)?.to_luma8())
}

pub fn read_mask_png(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let g = read_gray(path)?;
    let (w, h) = g.dimensions();
    BinaryMask::from_vec(
        h as usize,
        w as usize,
        g.into_raw().into_iter().map(|v| u8::from(v != 0)).collect(),
    )
}

pub fn write_mask_png(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let raw = mask.data().iter().map(|&v| v * 255).collect();
    save_gray(path, mask.width(), mask.height(), raw)
}

pub fn read_class_png(path: impl AsRef<Path>) -> Result<ClassMask> {
    let g = read_gray(path)?;
    let (w, h) = g.dimensions();
    ClassMask::from_vec(
        h as usize,
        w as usize,
        g.into_raw().into_iter().map(u32::from).collect(),
    )
}

pub fn write_class_png(path: impl AsRef<Path>, mask: &ClassMask) -> Result<()> {
    let raw = mask
        .data()
        .iter()
        .map(|&id| {
            u8::try_from(id)
                .map_err(|_| Error::param("class id", format!("{id} does not fit an 8-bit PNG")))
        })
        .collect::<Result<Vec<u8>>>()?;
    save_gray(path, mask.width(), mask.height(), raw)
}

fn save_gray(path: impl AsRef<Path>, w: usize, h: usize, raw: Vec<u8>) -> Result<()> {
    let buf: GrayImage =
        ImageBuffer::from_raw(w as u32, h as u32, raw).expect("buffer length matches dims");
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

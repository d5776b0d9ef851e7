use serde::{Deserialize, Serialize};

use super::mask::BinaryMask;
use crate::{Error, Result};

/// Dense `height × width × channels` map of reals, stored row-major with the
/// channel index varying fastest.
///
/// Images loaded from or written to disk hold values in `[0, 1]`; feature maps
/// are unrestricted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct ImageTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for ImageTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        ImageTensor::from_vec(raw.height, raw.width, raw.channels, raw.data)
    }
}

impl From<ImageTensor> for RawTensor {
    fn from(t: ImageTensor) -> Self {
        RawTensor {
            height: t.height,
            width: t.width,
            channels: t.channels,
            data: t.data,
        }
    }
}

fn check_dims(height: usize, width: usize, channels: usize) -> Result<()> {
    if height == 0 || width == 0 || channels == 0 {
        return Err(Error::param(
            "shape",
            format!("dimensions must be positive, got {height}x{width}x{channels}"),
        ));
    }
    Ok(())
}

impl ImageTensor {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::filled(height, width, channels, 0.0)
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        check_dims(height, width, channels)?;
        Ok(Self {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        })
    }

    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(height, width, channels)?;
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::shape(
                format!("{expected} values for {height}x{width}x{channels}"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds a tensor by evaluating `f(y, x, c)` at every position.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        check_dims(height, width, channels)?;
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, value: f64) {
        let i = self.index(y, x, c);
        self.data[i] = value;
    }

    /// All channel values of the pixel at `(y, x)`.
    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> &[f64] {
        let start = self.index(y, x, 0);
        &self.data[start..start + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, y: usize, x: usize) -> &mut [f64] {
        let start = self.index(y, x, 0);
        let channels = self.channels;
        &mut self.data[start..start + channels]
    }

    pub fn same_spatial(&self, height: usize, width: usize) -> bool {
        self.height == height && self.width == width
    }

    pub(crate) fn ensure_same_shape(&self, other: &ImageTensor) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::shape(
                format!("{:?}", self.dims()),
                format!("{:?}", other.dims()),
            ));
        }
        Ok(())
    }

    pub(crate) fn ensure_spatial(&self, height: usize, width: usize) -> Result<()> {
        if !self.same_spatial(height, width) {
            return Err(Error::shape(
                format!("{}x{}", self.height, self.width),
                format!("{height}x{width}"),
            ));
        }
        Ok(())
    }

    /// Extracts channel `c` as a single-channel tensor.
    pub fn channel(&self, c: usize) -> Result<ImageTensor> {
        if c >= self.channels {
            return Err(Error::param(
                "channel",
                format!("{c} out of range for {} channels", self.channels),
            ));
        }
        ImageTensor::from_fn(self.height, self.width, 1, |y, x, _| self.get(y, x, c))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ImageTensor {
        ImageTensor {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &ImageTensor,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<ImageTensor> {
        self.ensure_same_shape(other)?;
        Ok(ImageTensor {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ImageTensor) -> Result<ImageTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, factor: f64) -> ImageTensor {
        self.map(|v| v * factor)
    }

    /// Mean over every channel and pixel, using compensated summation.
    pub fn mean(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &v in &self.data {
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
        }
        (sum + comp) / self.data.len() as f64
    }

    /// Per-channel sums over all pixels.
    pub fn channel_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.channels];
        for px in self.data.chunks_exact(self.channels) {
            for (s, v) in sums.iter_mut().zip(px) {
                *s += v;
            }
        }
        sums
    }

    /// Concatenates tensors along the channel axis.
    pub fn concat_channels(parts: &[ImageTensor]) -> Result<ImageTensor> {
        let first = parts
            .first()
            .ok_or_else(|| Error::param("parts", "cannot concatenate zero tensors"))?;
        let (h, w) = (first.height, first.width);
        for p in parts {
            p.ensure_spatial(h, w)?;
        }
        let channels: usize = parts.iter().map(|p| p.channels).sum();
        let mut data = Vec::with_capacity(h * w * channels);
        for y in 0..h {
            for x in 0..w {
                for p in parts {
                    data.extend_from_slice(p.pixel(y, x));
                }
            }
        }
        ImageTensor::from_vec(h, w, channels, data)
    }

    /// Splits along the channel axis into consecutive groups of the given sizes.
    pub fn split_channels(&self, sizes: &[usize]) -> Result<Vec<ImageTensor>> {
        if sizes.iter().sum::<usize>() != self.channels {
            return Err(Error::shape(
                format!("{} channels", self.channels),
                format!("split sizes {sizes:?}"),
            ));
        }
        let mut offset = 0;
        let mut out = Vec::with_capacity(sizes.len());
        for &n in sizes {
            out.push(ImageTensor::from_fn(self.height, self.width, n, |y, x, c| {
                self.get(y, x, offset + c)
            })?);
            offset += n;
        }
        Ok(out)
    }

    /// True when every value lies in `[0, 1]`.
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

/// Right-hand operand of [`elementwise_mul`].
pub enum MulOperand<'a> {
    /// Broadcast across every channel of the left operand.
    Mask(&'a BinaryMask),
    /// Same channel count, or a single channel that broadcasts.
    Tensor(&'a ImageTensor),
}

impl<'a> From<&'a BinaryMask> for MulOperand<'a> {
    fn from(m: &'a BinaryMask) -> Self {
        MulOperand::Mask(m)
    }
}

impl<'a> From<&'a ImageTensor> for MulOperand<'a> {
    fn from(t: &'a ImageTensor) -> Self {
        MulOperand::Tensor(t)
    }
}

/// Pixel-wise product `a ⊙ b`.
pub fn elementwise_mul<'a>(a: &ImageTensor, b: impl Into<MulOperand<'a>>) -> Result<ImageTensor> {
    match b.into() {
        MulOperand::Mask(m) => {
            a.ensure_spatial(m.height(), m.width())?;
            let mut out = a.clone();
            for (px, &bit) in out.data.chunks_exact_mut(a.channels).zip(m.data()) {
                let f = f64::from(bit);
                px.iter_mut().for_each(|v| *v *= f);
            }
            Ok(out)
        }
        MulOperand::Tensor(t) if t.channels == a.channels => a.zip_with(t, |x, y| x * y),
        MulOperand::Tensor(t) if t.channels == 1 => {
            a.ensure_spatial(t.height, t.width)?;
            let mut out = a.clone();
            for (px, &f) in out.data.chunks_exact_mut(a.channels).zip(&t.data) {
                px.iter_mut().for_each(|v| *v *= f);
            }
            Ok(out)
        }
        MulOperand::Tensor(t) => Err(Error::shape(
            format!("{} or 1 channels", a.channels),
            format!("{} channels", t.channels),
        )),
    }
}

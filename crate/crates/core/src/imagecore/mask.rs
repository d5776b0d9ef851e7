use crate::{Error, Result};

/// `height × width` map holding exactly 0 or 1 per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, false)
    }

    pub fn ones(height: usize, width: usize) -> Result<Self> {
        Self::filled(height, width, true)
    }

    pub fn filled(height: usize, width: usize, on: bool) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::param(
                "shape",
                format!("mask dimensions must be positive, got {height}x{width}"),
            ));
        }
        Ok(Self {
            height,
            width,
            data: vec![u8::from(on); height * width],
        })
    }

    /// Rejects any value other than 0 or 1.
    pub fn from_vec(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        let mut m = Self::zeros(height, width)?;
        if data.len() != height * width {
            return Err(Error::shape(
                format!("{} values for {height}x{width}", height * width),
                format!("{} values", data.len()),
            ));
        }
        if let Some(bad) = data.iter().find(|&&v| v > 1) {
            return Err(Error::param("mask", format!("value {bad} is not 0 or 1")));
        }
        m.data = data;
        Ok(m)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut m = Self::zeros(height, width)?;
        for y in 0..height {
            for x in 0..width {
                m.data[y * width + x] = u8::from(f(y, x));
            }
        }
        Ok(m)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, on: bool) {
        self.data[y * self.width + x] = u8::from(on);
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    fn zip(&self, other: &BinaryMask, f: impl Fn(u8, u8) -> u8) -> Result<BinaryMask> {
        self.ensure_same_shape(other)?;
        Ok(BinaryMask {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip(other, |a, b| a | b)
    }

    /// `self AND NOT other`.
    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip(other, |a, b| a & (1 - b))
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    pub(crate) fn ensure_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::shape(
                format!("{}x{}", self.height, self.width),
                format!("{}x{}", other.height, other.width),
            ));
        }
        Ok(())
    }
}

/// `height × width` map of integer class ids, 0 being background.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassMask {
    height: usize,
    width: usize,
    data: Vec<u32>,
}

impl ClassMask {
    pub fn from_vec(height: usize, width: usize, data: Vec<u32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::param(
                "shape",
                format!("mask dimensions must be positive, got {height}x{width}"),
            ));
        }
        if data.len() != height * width {
            return Err(Error::shape(
                format!("{} values for {height}x{width}", height * width),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> u32) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self::from_vec(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, id: u32) {
        self.data[y * self.width + x] = id;
    }

    pub fn max_id(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

impl From<&BinaryMask> for ClassMask {
    fn from(m: &BinaryMask) -> Self {
        ClassMask {
            height: m.height,
            width: m.width,
            data: m.data.iter().map(|&v| u32::from(v)).collect(),
        }
    }
}

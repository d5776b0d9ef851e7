use crate::boundary::{boundary_band, multiclass_to_binary, BoundaryBandConfig};
use crate::imagecore::{
    resize_nearest_class, resize_nearest_mask, upsample_bilinear, BinaryMask, ClassMask, ImageTensor,
};
use crate::{Error, Result};

/// Training triple: image, segmentation label and boundary label, all of the
/// same height and width.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: ImageTensor,
    pub seg: ClassMask,
    pub boundary: BinaryMask,
}

impl Sample {
    pub fn new(image: ImageTensor, seg: ClassMask, boundary: BinaryMask) -> Result<Self> {
        let (h, w) = (image.height(), image.width());
        for (what, sh, sw) in [
            ("segmentation", seg.height(), seg.width()),
            ("boundary", boundary.height(), boundary.width()),
        ] {
            if (sh, sw) != (h, w) {
                return Err(Error::ShapeMismatch {
                    expected: format!("{what} label of {h}x{w}"),
                    actual: format!("{sh}x{sw}"),
                });
            }
        }
        Ok(Self {
            image,
            seg,
            boundary,
        })
    }

    /// Builds the triple, generating the boundary label from the binarized
    /// segmentation.
    pub fn with_generated_boundary(image: ImageTensor, seg: ClassMask, cfg: BoundaryBandConfig) -> Result<Self> {
        let boundary = boundary_band(&multiclass_to_binary(&seg), cfg);
        Self::new(image, seg, boundary)
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    /// Bilinear for the image, nearest-neighbour for both labels. Returns a
    /// plain clone when the size already matches.
    pub fn resized_to(&self, height: usize, width: usize) -> Result<Sample> {
        if self.image.same_spatial(height, width) {
            return Ok(self.clone());
        }
        Ok(Sample {
            image: upsample_bilinear(&self.image, height, width)?,
            seg: resize_nearest_class(&self.seg, height, width)?,
            boundary: resize_nearest_mask(&self.boundary, height, width)?,
        })
    }

    pub(crate) fn ensure_same_size(&self, other: &Sample) -> Result<()> {
        if (self.height(), self.width()) != (other.height(), other.width()) {
            return Err(Error::shape(
                format!("{}x{}", self.height(), self.width()),
                format!("{}x{}", other.height(), other.width()),
            ));
        }
        if self.image.channels() != other.image.channels() {
            return Err(Error::shape(
                format!("{} channels", self.image.channels()),
                format!("{} channels", other.image.channels()),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_misaligned_labels() {
        let img = ImageTensor::zeros(4, 4, 3).unwrap();
        let seg = ClassMask::from_vec(4, 3, vec![0; 12]).unwrap();
        let bnd = BinaryMask::zeros(4, 4).unwrap();
        assert!(Sample::new(img.clone(), seg, bnd.clone()).is_err());
        let seg = ClassMask::from_vec(4, 4, vec![0; 16]).unwrap();
        assert!(Sample::new(img, seg, bnd).is_ok());
    }

    #[test]
    fn resize_keeps_alignment() {
        let img = ImageTensor::filled(4, 6, 3, 0.5).unwrap();
        let seg = ClassMask::from_fn(4, 6, |y, _| u32::from(y >= 2)).unwrap();
        let s = Sample::with_generated_boundary(img, seg, BoundaryBandConfig::new(1).unwrap()).unwrap();
        let r = s.resized_to(8, 12).unwrap();
        assert_eq!((r.height(), r.width()), (8, 12));
        assert_eq!((r.seg.height(), r.boundary.width()), (8, 12));
        assert_eq!(s.resized_to(4, 6).unwrap(), s);
    }
}

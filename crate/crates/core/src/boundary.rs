//! Boundary-band labels derived from segmentation masks.

use serde::{Deserialize, Serialize};

use crate::imagecore::{dilate, erode, BinaryMask, ClassMask};
use crate::{Error, Result};

/// Reference resolution at which [`BoundaryBandConfig::DEFAULT_THICKNESS`] applies.
pub const REFERENCE_SIZE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryBandConfig {
    thickness: usize,
}

impl BoundaryBandConfig {
    pub const DEFAULT_THICKNESS: usize = 4;

    pub fn new(thickness: usize) -> Result<Self> {
        if thickness == 0 {
            return Err(Error::param("thickness", "must be at least 1"));
        }
        Ok(Self { thickness })
    }

    /// Default thickness scaled by `min(height, width) / 512`, never below 1.
    pub fn for_size(height: usize, width: usize) -> Self {
        let scaled = Self::DEFAULT_THICKNESS as f64 * height.min(width) as f64 / REFERENCE_SIZE as f64;
        Self {
            thickness: (scaled.round() as usize).max(1),
        }
    }

    pub fn thickness(&self) -> usize {
        self.thickness
    }
}

impl Default for BoundaryBandConfig {
    fn default() -> Self {
        Self {
            thickness: Self::DEFAULT_THICKNESS,
        }
    }
}

/// `dilate(gs, t) AND NOT erode(gs, t)`: a band roughly `2t` wide straddling
/// every foreground/background transition.
pub fn boundary_band(gs: &BinaryMask, cfg: BoundaryBandConfig) -> BinaryMask {
    let t = cfg.thickness;
    dilate(gs, t)
        .and_not(&erode(gs, t))
        .expect("morphology preserves shape")
}

/// Foreground is every pixel whose class id is nonzero.
pub fn multiclass_to_binary(gs: &ClassMask) -> BinaryMask {
    BinaryMask::from_fn(gs.height(), gs.width(), |y, x| gs.get(y, x) != 0)
        .expect("class mask dims are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t1() -> BoundaryBandConfig {
        BoundaryBandConfig::new(1).unwrap()
    }

    #[test]
    fn zero_thickness_rejected() {
        assert!(BoundaryBandConfig::new(0).is_err());
    }

    #[test]
    fn size_scaling() {
        assert_eq!(BoundaryBandConfig::for_size(512, 512).thickness(), 4);
        assert_eq!(BoundaryBandConfig::for_size(1024, 2048).thickness(), 8);
        assert_eq!(BoundaryBandConfig::for_size(256, 300).thickness(), 2);
        assert_eq!(BoundaryBandConfig::for_size(64, 64).thickness(), 1);
        assert_eq!(BoundaryBandConfig::for_size(8, 8).thickness(), 1);
    }

    #[test]
    fn empty_input_gives_empty_band() {
        let gs = BinaryMask::zeros(9, 9).unwrap();
        assert!(boundary_band(&gs, t1()).is_empty());
    }

    #[test]
    fn centered_square() {
        let gs = BinaryMask::from_fn(7, 7, |y, x| (2..=4).contains(&y) && (2..=4).contains(&x)).unwrap();
        let expected = BinaryMask::from_fn(7, 7, |y, x| {
            (1..=5).contains(&y) && (1..=5).contains(&x) && !(y == 3 && x == 3)
        })
        .unwrap();
        assert_eq!(boundary_band(&gs, t1()), expected);
    }

    #[test]
    fn all_ones_gives_border_ring() {
        let gs = BinaryMask::ones(6, 6).unwrap();
        let expected = BinaryMask::from_fn(6, 6, |y, x| y == 0 || x == 0 || y == 5 || x == 5).unwrap();
        assert_eq!(boundary_band(&gs, t1()), expected);
    }

    #[test]
    fn binarize_class_ids() {
        let gs = ClassMask::from_vec(2, 3, vec![0, 1, 2, 2, 0, 1]).unwrap();
        assert_eq!(multiclass_to_binary(&gs).data(), &[0, 1, 1, 1, 0, 1]);
        let zero = ClassMask::from_vec(2, 2, vec![0; 4]).unwrap();
        assert!(multiclass_to_binary(&zero).is_empty());
    }

    #[test]
    fn band_of_band_differs() {
        let gs = BinaryMask::from_fn(24, 24, |y, x| {
            let (dy, dx) = (y as f64 - 11.5, x as f64 - 11.5);
            dy * dy + dx * dx < 49.0
        })
        .unwrap();
        let cfg = BoundaryBandConfig::new(2).unwrap();
        let band = boundary_band(&gs, cfg);
        assert!(!band.is_empty());
        assert_ne!(boundary_band(&band, cfg), band);
    }

    fn arb_mask(h: usize, w: usize) -> impl Strategy<Value = BinaryMask> {
        proptest::collection::vec(0u8..=1, h * w).prop_map(move |v| BinaryMask::from_vec(h, w, v).unwrap())
    }

    proptest! {
        #[test]
        fn band_within_dilation_and_outside_erosion(gs in arb_mask(16, 16), t in 1usize..4) {
            let cfg = BoundaryBandConfig::new(t).unwrap();
            let band = boundary_band(&gs, cfg);
            prop_assert!(band.is_subset_of(&dilate(&gs, t)));
            prop_assert!(band.and(&erode(&gs, t)).unwrap().is_empty());
        }

        #[test]
        fn complement_symmetry_on_interior(
            ids in proptest::collection::vec(0u32..3, 16 * 16),
            t in 1usize..3,
        ) {
            let gs = multiclass_to_binary(&ClassMask::from_vec(16, 16, ids.clone()).unwrap());
            for (i, &id) in ids.iter().enumerate() {
                prop_assert_eq!(gs.data()[i] == 1, id != 0);
            }
            let cfg = BoundaryBandConfig::new(t).unwrap();
            let a = boundary_band(&gs, cfg);
            let b = boundary_band(&gs.complement(), cfg);
            for y in (2 * t)..(16 - 2 * t) {
                for x in (2 * t)..(16 - 2 * t) {
                    prop_assert_eq!(a.get(y, x), b.get(y, x));
                }
            }
        }
    }
}

//! Binary dilation and erosion with a square structuring element of side
//! `2·radius + 1`.
//!
//! Pixels outside the image count as background for both operations, so
//! erosion clears a `radius`-wide ring along the border of an all-ones mask.
//! Both operators are computed separably (rows, then columns), which is exact
//! for a square element.

use super::mask::BinaryMask;

pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    sweep(mask, radius, true)
}

pub fn erode(mask: &BinaryMask, radius: usize) -> BinaryMask {
    sweep(mask, radius, false)
}

// `dilating`: output is 1 if any in-window pixel is 1.
// otherwise: output is 1 only if every in-window pixel exists and is 1.
fn sweep(mask: &BinaryMask, radius: usize, dilating: bool) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (h, w) = (mask.height(), mask.width());
    let rows = pass_1d(mask.data(), h, w, radius, dilating, true);
    let out = pass_1d(&rows, h, w, radius, dilating, false);
    BinaryMask::from_vec(h, w, out).expect("sweep preserves shape and binarity")
}

fn pass_1d(src: &[u8], h: usize, w: usize, r: usize, dilating: bool, along_x: bool) -> Vec<u8> {
    let (lines, len) = if along_x { (h, w) } else { (w, h) };
    let at = |line: usize, i: usize| {
        if along_x {
            line * w + i
        } else {
            i * w + line
        }
    };
    let mut out = vec![0u8; h * w];
    // Prefix counts of ones along each line give O(1) window queries.
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for i in 0..len {
            prefix[i + 1] = prefix[i] + usize::from(src[at(line, i)]);
        }
        for i in 0..len {
            let lo = i.saturating_sub(r);
            let hi = (i + r).min(len - 1);
            let ones = prefix[hi + 1] - prefix[lo];
            let on = if dilating {
                ones > 0
            } else {
                // The full window must be in bounds and all ones.
                i >= r && i + r < len && ones == 2 * r + 1
            };
            out[at(line, i)] = u8::from(on);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(mask: &BinaryMask, r: usize, dilating: bool) -> BinaryMask {
        let (h, w) = (mask.height() as i64, mask.width() as i64);
        let r = r as i64;
        BinaryMask::from_fn(mask.height(), mask.width(), |y, x| {
            let mut any = false;
            let mut all = true;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (sy, sx) = (y as i64 + dy, x as i64 + dx);
                    let v = sy >= 0 && sy < h && sx >= 0 && sx < w && mask.get(sy as usize, sx as usize);
                    any |= v;
                    all &= v;
                }
            }
            if dilating {
                any
            } else {
                all
            }
        })
        .unwrap()
    }

    #[test]
    fn radius_zero_is_identity() {
        let m = BinaryMask::from_vec(2, 3, vec![1, 0, 1, 0, 0, 1]).unwrap();
        assert_eq!(dilate(&m, 0), m);
        assert_eq!(erode(&m, 0), m);
    }

    #[test]
    fn dilate_single_pixel() {
        let m = BinaryMask::from_fn(5, 5, |y, x| y == 2 && x == 2).unwrap();
        let expected = BinaryMask::from_fn(5, 5, |y, x| (1..=3).contains(&y) && (1..=3).contains(&x)).unwrap();
        assert_eq!(dilate(&m, 1), expected);
    }

    #[test]
    fn erode_all_ones_leaves_border_ring_clear() {
        let m = BinaryMask::ones(6, 7).unwrap();
        let expected = BinaryMask::from_fn(6, 7, |y, x| (1..=4).contains(&y) && (1..=5).contains(&x)).unwrap();
        assert_eq!(erode(&m, 1), expected);
    }

    #[test]
    fn radius_larger_than_image() {
        let m = BinaryMask::from_fn(3, 3, |y, x| y == 0 && x == 0).unwrap();
        assert_eq!(dilate(&m, 10), BinaryMask::ones(3, 3).unwrap());
        assert!(erode(&BinaryMask::ones(3, 3).unwrap(), 2).is_empty());
    }

    fn arb_mask(h: usize, w: usize) -> impl Strategy<Value = BinaryMask> {
        proptest::collection::vec(0u8..=1, h * w).prop_map(move |v| BinaryMask::from_vec(h, w, v).unwrap())
    }

    proptest! {
        #[test]
        fn matches_brute_force(m in arb_mask(9, 11), r in 0usize..4) {
            prop_assert_eq!(dilate(&m, r), brute(&m, r, true));
            prop_assert_eq!(erode(&m, r), brute(&m, r, false));
        }

        // erode(m) = ¬dilate(¬m) away from the border, where zero padding breaks the duality.
        #[test]
        fn duality_on_interior(m in arb_mask(16, 16), r in 1usize..4) {
            let lhs = erode(&m, r);
            let rhs = dilate(&m.complement(), r).complement();
            for y in r..16 - r {
                for x in r..16 - r {
                    prop_assert_eq!(lhs.get(y, x), rhs.get(y, x));
                }
            }
        }
    }
}

use crate::imagecore::ImageTensor;

/// Channel-wise max per pixel, min-max normalised to `[0, 1]`. A constant map
/// (zero range) renders as all zeros.
pub fn visualize_features(m: &ImageTensor) -> ImageTensor {
    let (h, w, c) = m.dims();
    let maxes: Vec<f64> = m
        .data()
        .chunks_exact(c)
        .map(|px| px.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let lo = maxes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = maxes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let data = if range > 0.0 {
        maxes.into_iter().map(|v| (v - lo) / range).collect()
    } else {
        vec![0.0; h * w]
    };
    ImageTensor::from_vec(h, w, 1, data).expect("one value per pixel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_channel_is_normalised_passthrough() {
        let m = ImageTensor::from_vec(1, 4, 1, vec![2.0, 4.0, 3.0, 6.0]).unwrap();
        assert_eq!(visualize_features(&m).data(), &[0.0, 0.5, 0.25, 1.0]);
    }

    #[test]
    fn constant_map_renders_black() {
        let m = ImageTensor::filled(3, 3, 4, -1.5).unwrap();
        assert!(visualize_features(&m).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn channel_max_per_pixel() {
        let m = ImageTensor::from_vec(1, 3, 2, vec![0.0, 1.0, -3.0, -2.0, 5.0, 0.5]).unwrap();
        // maxes: [1, -2, 5] → (v + 2) / 7
        let out = visualize_features(&m);
        assert_eq!(out.data(), &[3.0 / 7.0, 0.0, 1.0]);
    }
}

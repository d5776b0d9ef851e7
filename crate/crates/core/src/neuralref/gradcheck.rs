use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Coordinate with the largest relative error.
    pub worst_index: usize,
    pub numeric: Vec<f64>,
    pub analytic: Vec<f64>,
}

/// Below this magnitude a gradient component is compared absolutely.
const REL_FLOOR: f64 = 1e-10;

/// Compares `analytic` with central differences `(f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h`.
///
/// Relative error per coordinate is `|a − n| / max(|a|, |n|)`, falling back to
/// `|a − n|` when both are below `1e-10`.
pub fn finite_diff_check(
    f: impl Fn(&[f64]) -> f64,
    analytic: &[f64],
    point: &[f64],
    h: f64,
) -> Result<GradCheckReport> {
    if analytic.len() != point.len() {
        return Err(Error::shape(point.len(), analytic.len()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", format!("{h} must be positive and finite")));
    }
    let mut x = point.to_vec();
    let mut numeric = Vec::with_capacity(point.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let plus = f(&x);
        x[i] = orig - h;
        let minus = f(&x);
        x[i] = orig;
        numeric.push((plus - minus) / (2.0 * h));
    }
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst_index: 0,
        numeric,
        analytic: analytic.to_vec(),
    };
    for (i, (&a, &n)) in analytic.iter().zip(&report.numeric).enumerate() {
        let abs = (a - n).abs();
        let denom = a.abs().max(n.abs());
        let rel = if denom < REL_FLOOR { abs } else { abs / denom };
        report.max_abs_error = report.max_abs_error.max(abs);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::{BinaryMask, ImageTensor, SeededRng};
    use crate::neuralref::{
        clipped_tanh, clipped_tanh_grad, dice_loss, dice_loss_grad, importance_scores, importance_scores_vjp,
        TransformParams,
    };
    use rand::Rng;

    #[test]
    fn quadratic() {
        // f = Σ (i+1)·x_i² + x_0·x_1
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum::<f64>() + x[0] * x[1];
        let p = [0.3, -1.2, 2.0, 0.7];
        let g = [2.0 * 0.3 + -1.2, 4.0 * -1.2 + 0.3, 6.0 * 2.0, 8.0 * 0.7];
        let r = finite_diff_check(f, &g, &p, 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-6, "{r:?}");
    }

    #[test]
    fn detects_wrong_gradient() {
        let f = |x: &[f64]| x[0] * x[0];
        let r = finite_diff_check(f, &[1.0], &[1.0], 1e-5).unwrap();
        assert!((r.max_rel_error - 0.5).abs() < 1e-6);
    }

    #[test]
    fn argument_validation() {
        let f = |x: &[f64]| x[0];
        assert!(finite_diff_check(f, &[1.0, 2.0], &[0.0], 1e-5).is_err());
        assert!(finite_diff_check(f, &[1.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn clipped_tanh_away_from_kink() {
        let p = [0.4, 1.3, -0.8, 2.2, -2.0];
        let f = |x: &[f64]| clipped_tanh(x).iter().sum::<f64>();
        let r = finite_diff_check(f, &clipped_tanh_grad(&p), &p, 1e-6).unwrap();
        assert!(r.max_rel_error < 1e-5, "{r:?}");
    }

    #[test]
    fn dice_wrt_prediction() {
        let mut rng = SeededRng::new(11, 0);
        let gt = BinaryMask::from_fn(4, 4, |y, x| y * 4 + x < 7).unwrap();
        let pred = ImageTensor::from_fn(4, 4, 1, |_, _, _| rng.random_range(0.05..0.95)).unwrap();
        let f = |x: &[f64]| dice_loss(&ImageTensor::from_vec(4, 4, 1, x.to_vec()).unwrap(), &gt).unwrap();
        let r = finite_diff_check(f, &dice_loss_grad(&pred, &gt).unwrap(), pred.data(), 1e-6).unwrap();
        assert!(r.max_rel_error < 1e-4, "{r:?}");
    }

    #[test]
    fn transform_path() {
        let mut rng = SeededRng::new(12, 0);
        let t = TransformParams::random(7, 7, 0.8, &mut rng);
        let y: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let up: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (gy, gp) = importance_scores_vjp(&y, &t, &up).unwrap();
        let dot = |s: &[f64]| s.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>();
        let fy = |x: &[f64]| dot(importance_scores(x, &t).unwrap().values());
        assert!(finite_diff_check(fy, &gy, &y, 1e-6).unwrap().max_rel_error < 1e-4);
        let fp = |x: &[f64]| dot(importance_scores(&y, &TransformParams::from_flat(7, 7, x).unwrap()).unwrap().values());
        assert!(finite_diff_check(fp, &gp, &t.to_flat(), 1e-6).unwrap().max_rel_error < 1e-4);
    }
}

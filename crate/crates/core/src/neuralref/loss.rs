use crate::imagecore::{BinaryMask, ClassMask, ImageTensor};
use crate::{Error, Result};

/// Smoothing term of the dice loss.
pub const DICE_EPS: f64 = 1.0;

fn check_prob_map(pred: &ImageTensor, h: usize, w: usize) -> Result<()> {
    if pred.channels() != 1 {
        return Err(Error::shape("1 channel", pred.channels()));
    }
    pred.ensure_spatial(h, w)
}

/// `1 − (2·Σ pred·gt + ε) / (Σ pred + Σ gt + ε)` with `ε = 1`.
pub fn dice_loss(pred: &ImageTensor, gt: &BinaryMask) -> Result<f64> {
    check_prob_map(pred, gt.height(), gt.width())?;
    let (mut inter, mut sp, mut sg) = (0.0, 0.0, 0.0);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let g = f64::from(g);
        inter += p * g;
        sp += p;
        sg += g;
    }
    Ok(1.0 - (2.0 * inter + DICE_EPS) / (sp + sg + DICE_EPS))
}

/// Gradient of [`dice_loss`] with respect to every prediction value.
pub fn dice_loss_grad(pred: &ImageTensor, gt: &BinaryMask) -> Result<Vec<f64>> {
    check_prob_map(pred, gt.height(), gt.width())?;
    let (mut inter, mut sp, mut sg) = (0.0, 0.0, 0.0);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        let g = f64::from(g);
        inter += p * g;
        sp += p;
        sg += g;
    }
    let num = 2.0 * inter + DICE_EPS;
    let den = sp + sg + DICE_EPS;
    Ok(gt
        .data()
        .iter()
        .map(|&g| -(2.0 * f64::from(g) * den - num) / (den * den))
        .collect())
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&v| v - lse).collect()
}

fn check_logits(logits: &ImageTensor, gt: &ClassMask) -> Result<()> {
    logits.ensure_spatial(gt.height(), gt.width())?;
    if let Some(&bad) = gt.data().iter().find(|&&id| id as usize >= logits.channels()) {
        return Err(Error::param(
            "gt",
            format!("class id {bad} has no logit among {} channels", logits.channels()),
        ));
    }
    Ok(())
}

/// Mean over pixels of `−log softmax(logits)[gt]`.
pub fn cross_entropy_loss(logits: &ImageTensor, gt: &ClassMask) -> Result<f64> {
    check_logits(logits, gt)?;
    let c = logits.channels();
    let total: f64 = logits
        .data()
        .chunks_exact(c)
        .zip(gt.data())
        .map(|(px, &id)| -log_softmax(px)[id as usize])
        .sum();
    Ok(total / gt.data().len() as f64)
}

/// Gradient of [`cross_entropy_loss`] with respect to the logits, in the
/// logits' layout: `(softmax − onehot) / pixels`.
pub fn cross_entropy_grad(logits: &ImageTensor, gt: &ClassMask) -> Result<Vec<f64>> {
    check_logits(logits, gt)?;
    let c = logits.channels();
    let n = gt.data().len() as f64;
    let mut grad = Vec::with_capacity(logits.data().len());
    for (px, &id) in logits.data().chunks_exact(c).zip(gt.data()) {
        for (k, lp) in log_softmax(px).into_iter().enumerate() {
            let onehot = if k == id as usize { 1.0 } else { 0.0 };
            grad.push((lp.exp() - onehot) / n);
        }
    }
    Ok(grad)
}

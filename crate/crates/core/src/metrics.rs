//! Segmentation evaluation: pixel accuracy, IoU/mIoU, MAE and BER/mBER.
//!
//! Conventions:
//! - a class absent from both prediction and ground truth scores IoU 100;
//! - BER is undefined for a class with no positives or no negatives, and such
//!   classes are left out of the mBER mean;
//! - dataset-level Acc/IoU/BER come from confusion counts summed over images,
//!   while MAE is averaged per image.

use std::collections::BTreeMap;
use std::ops::AddAssign;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::imagecore::{read_class_png, read_image_png, BinaryMask, ClassMask, ImageTensor};
use crate::{Error, Result};

/// One-vs-rest pixel counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.tn += o.tn;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

fn check_pair(pred: &ClassMask, gt: &ClassMask, classes: usize) -> Result<()> {
    if (pred.height(), pred.width()) != (gt.height(), gt.width()) {
        return Err(Error::shape(
            format!("{}x{}", gt.height(), gt.width()),
            format!("{}x{}", pred.height(), pred.width()),
        ));
    }
    if classes == 0 {
        return Err(Error::param("classes", "must be at least 1"));
    }
    for (what, m) in [("prediction", pred), ("ground truth", gt)] {
        if m.max_id() as usize >= classes {
            return Err(Error::param(
                "classes",
                format!("{what} contains class id {} but only {classes} classes exist", m.max_id()),
            ));
        }
    }
    Ok(())
}

/// Per-class one-vs-rest counts.
pub fn confusion_counts(pred: &ClassMask, gt: &ClassMask, classes: usize) -> Result<Vec<ConfusionCounts>> {
    check_pair(pred, gt, classes)?;
    // Joint histogram, then one-vs-rest views of it.
    let mut joint = vec![0u64; classes * classes];
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        joint[g as usize * classes + p as usize] += 1;
    }
    let total = pred.data().len() as u64;
    Ok((0..classes)
        .map(|c| {
            let tp = joint[c * classes + c];
            let gt_c: u64 = joint[c * classes..(c + 1) * classes].iter().sum();
            let pred_c: u64 = (0..classes).map(|g| joint[g * classes + c]).sum();
            let fp = pred_c - tp;
            let fn_ = gt_c - tp;
            ConfusionCounts {
                tp,
                tn: total - tp - fp - fn_,
                fp,
                fn_,
            }
        })
        .collect())
}

/// `100·TP / (TP + FP + FN)`, or 100 when the class appears in neither mask.
pub fn iou(c: &ConfusionCounts) -> f64 {
    let denom = c.tp + c.fp + c.fn_;
    if denom == 0 {
        100.0
    } else {
        100.0 * c.tp as f64 / denom as f64
    }
}

pub fn miou(counts: &[ConfusionCounts]) -> f64 {
    counts.iter().map(iou).sum::<f64>() / counts.len() as f64
}

/// `100·(1 − ½(TP/Np + TN/Nn))`; `None` if the class has no positives or no
/// negatives.
pub fn ber(c: &ConfusionCounts) -> Option<f64> {
    let (np, nn) = (c.positives(), c.negatives());
    if np == 0 || nn == 0 {
        return None;
    }
    Some(100.0 * (1.0 - 0.5 * (c.tp as f64 / np as f64 + c.tn as f64 / nn as f64)))
}

/// Mean BER over the classes where it is defined; `None` if there are none.
pub fn mber(counts: &[ConfusionCounts]) -> Option<f64> {
    let defined: Vec<f64> = counts.iter().filter_map(ber).collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// `100 · correct / total`.
pub fn pixel_accuracy(pred: &ClassMask, gt: &ClassMask) -> Result<f64> {
    check_pair(pred, gt, (pred.max_id().max(gt.max_id()) + 1) as usize)?;
    let correct = pred.data().iter().zip(gt.data()).filter(|(a, b)| a == b).count();
    Ok(100.0 * correct as f64 / gt.data().len() as f64)
}

/// Mean `|pred − gt|` over pixels of a single-channel probability map.
pub fn mae(pred_prob: &ImageTensor, gt: &BinaryMask) -> Result<f64> {
    if pred_prob.channels() != 1 {
        return Err(Error::shape("1 channel", pred_prob.channels()));
    }
    pred_prob.ensure_spatial(gt.height(), gt.width())?;
    let sum: f64 = pred_prob
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| (p - f64::from(g)).abs())
        .sum();
    Ok(sum / gt.data().len() as f64)
}

/// How per-image results were combined into dataset figures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub images: usize,
    pub classes: usize,
    pub count_aggregation: String,
    pub mae_aggregation: String,
    pub accuracy_definition: String,
    pub empty_class_iou: String,
    pub ber_skipped_classes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percent.
    pub acc: f64,
    pub iou_per_class: BTreeMap<usize, f64>,
    pub miou: f64,
    /// Ratio in `[0, 1]`.
    pub mae: f64,
    pub ber_per_class: BTreeMap<usize, f64>,
    pub mber: Option<f64>,
    pub pixel_counts: BTreeMap<usize, ConfusionCounts>,
    pub metadata: ReportMetadata,
}

/// Per-image intermediate used by [`MetricsReport::aggregate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageEvaluation {
    pub counts: Vec<ConfusionCounts>,
    pub correct: u64,
    pub pixels: u64,
    pub mae: f64,
}

impl ImageEvaluation {
    /// `pred_prob` is the foreground probability used for MAE.
    pub fn compute(pred: &ClassMask, gt: &ClassMask, pred_prob: &ImageTensor, classes: usize) -> Result<Self> {
        let counts = confusion_counts(pred, gt, classes)?;
        let correct = pred.data().iter().zip(gt.data()).filter(|(a, b)| a == b).count() as u64;
        let gt_fg = crate::boundary::multiclass_to_binary(gt);
        Ok(Self {
            counts,
            correct,
            pixels: gt.data().len() as u64,
            mae: mae(pred_prob, &gt_fg)?,
        })
    }
}

impl MetricsReport {
    /// Combines per-image evaluations given in a fixed order.
    pub fn aggregate(images: &[ImageEvaluation], classes: usize) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Data("no images to aggregate".into()));
        }
        let mut totals = vec![ConfusionCounts::default(); classes];
        let (mut correct, mut pixels, mut mae_sum) = (0u64, 0u64, 0.0);
        for img in images {
            if img.counts.len() != classes {
                return Err(Error::shape(classes, img.counts.len()));
            }
            for (t, c) in totals.iter_mut().zip(&img.counts) {
                *t += *c;
            }
            correct += img.correct;
            pixels += img.pixels;
            mae_sum += img.mae;
        }
        let iou_per_class: BTreeMap<usize, f64> = totals.iter().enumerate().map(|(c, k)| (c, iou(k))).collect();
        let ber_per_class: BTreeMap<usize, f64> = totals
            .iter()
            .enumerate()
            .filter_map(|(c, k)| ber(k).map(|b| (c, b)))
            .collect();
        let skipped = (0..classes).filter(|c| !ber_per_class.contains_key(c)).collect();
        Ok(Self {
            acc: 100.0 * correct as f64 / pixels as f64,
            miou: miou(&totals),
            iou_per_class,
            mae: mae_sum / images.len() as f64,
            mber: mber(&totals),
            ber_per_class,
            pixel_counts: totals.into_iter().enumerate().collect(),
            metadata: ReportMetadata {
                images: images.len(),
                classes,
                count_aggregation: "confusion counts summed over images".into(),
                mae_aggregation: "mean of per-image MAE".into(),
                accuracy_definition: "plain pixel accuracy over all pixels".into(),
                empty_class_iou: "100 when a class is absent from prediction and ground truth".into(),
                ber_skipped_classes: skipped,
            },
        })
    }
}

fn png_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

/// Reads a prediction PNG as `(class ids, foreground probability)`.
///
/// With two classes any nonzero gray value is foreground and the gray level
/// divided by 255 is the probability. With more classes the gray value is the
/// class id and the probability is the binarized prediction.
pub fn read_prediction(path: &Path, classes: usize) -> Result<(ClassMask, ImageTensor)> {
    let raw = read_class_png(path)?;
    let (h, w) = (raw.height(), raw.width());
    if classes == 2 {
        let gray = read_image_png(path)?.channel(0)?;
        let ids = ClassMask::from_fn(h, w, |y, x| u32::from(raw.get(y, x) != 0))?;
        Ok((ids, gray))
    } else {
        let prob = ImageTensor::from_fn(h, w, 1, |y, x, _| f64::from(u8::from(raw.get(y, x) != 0)))?;
        Ok((raw, prob))
    }
}

/// Reads a ground-truth PNG as class ids, binarizing when `classes == 2`.
pub fn read_ground_truth(path: &Path, classes: usize) -> Result<ClassMask> {
    let raw = read_class_png(path)?;
    if classes == 2 {
        ClassMask::from_fn(raw.height(), raw.width(), |y, x| u32::from(raw.get(y, x) != 0))
    } else {
        Ok(raw)
    }
}

/// Pairs `<stem>.png` files present in both directories and evaluates them in
/// stem order. Files present on one side only are an error, as is an empty
/// intersection.
pub fn evaluate_dataset(pred_dir: &Path, gt_dir: &Path, classes: usize) -> Result<MetricsReport> {
    let preds = png_stems(pred_dir)?;
    let gts = png_stems(gt_dir)?;
    let unpaired: Vec<&String> = preds.keys().filter(|k| !gts.contains_key(*k)).chain(gts.keys().filter(|k| !preds.contains_key(*k))).collect();
    if !unpaired.is_empty() {
        return Err(Error::Data(format!("unpaired files: {unpaired:?}")));
    }
    if preds.is_empty() {
        return Err(Error::Data(format!(
            "no prediction/ground-truth pairs in {} and {}",
            pred_dir.display(),
            gt_dir.display()
        )));
    }
    let evals = preds
        .iter()
        .map(|(stem, p)| {
            let (ids, prob) = read_prediction(p, classes)?;
            let gt = read_ground_truth(&gts[stem], classes)?;
            ImageEvaluation::compute(&ids, &gt, &prob, classes)
                .map_err(|e| Error::Data(format!("{stem}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::aggregate(&evals, classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::confusion_direct;
    use proptest::prelude::*;

    fn mask(v: &[u32]) -> ClassMask {
        ClassMask::from_vec(4, 4, v.to_vec()).unwrap()
    }

    #[test]
    fn identical_masks() {
        let gt = mask(&[0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 0, 1]);
        let c = confusion_counts(&gt, &gt, 2).unwrap();
        assert!(c.iter().all(|k| k.fp == 0 && k.fn_ == 0));
        assert_eq!(miou(&c), 100.0);
        assert_eq!(pixel_accuracy(&gt, &gt).unwrap(), 100.0);
        assert_eq!(mber(&c), Some(0.0));
    }

    #[test]
    fn complement_binary() {
        let gt = mask(&[0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 0, 0, 1]);
        let pred = ClassMask::from_vec(4, 4, gt.data().iter().map(|v| 1 - v).collect()).unwrap();
        let c = confusion_counts(&pred, &gt, 2).unwrap();
        assert!(c.iter().all(|k| k.tp == 0 && k.tn == 0));
        assert_eq!(pixel_accuracy(&pred, &gt).unwrap(), 0.0);
        assert_eq!(iou(&c[1]), 0.0);
    }

    // gt foreground: 3 pixels; pred foreground: 3 pixels, 2 shared.
    #[test]
    fn iou_fixture() {
        let mut gt = vec![0; 16];
        let mut pred = vec![0; 16];
        for i in [0, 1, 2] {
            gt[i] = 1;
        }
        for i in [1, 2, 3] {
            pred[i] = 1;
        }
        let c = confusion_counts(&mask(&pred), &mask(&gt), 2).unwrap();
        assert_eq!((c[1].tp, c[1].fp, c[1].fn_), (2, 1, 1));
        assert_eq!(iou(&c[1]), 50.0);
    }

    #[test]
    fn accuracy_fixture() {
        let gt = mask(&[1; 16]);
        let mut pred = vec![1; 16];
        for p in pred.iter_mut().take(4) {
            *p = 0;
        }
        assert_eq!(pixel_accuracy(&mask(&pred), &gt).unwrap(), 75.0);
    }

    #[test]
    fn mae_cases() {
        let gt = BinaryMask::from_fn(4, 4, |y, _| y < 2).unwrap();
        let exact = ImageTensor::from_fn(4, 4, 1, |y, _, _| f64::from(u8::from(y < 2))).unwrap();
        assert_eq!(mae(&exact, &gt).unwrap(), 0.0);
        assert_eq!(mae(&exact.map(|v| 1.0 - v), &gt).unwrap(), 1.0);
        assert_eq!(mae(&ImageTensor::filled(4, 4, 1, 0.5).unwrap(), &gt).unwrap(), 0.5);
    }

    #[test]
    fn ber_cases() {
        assert_eq!(ber(&ConfusionCounts::new(3, 2, 2, 1)), Some(37.5));
        // all-positive prediction on a balanced mask
        assert_eq!(ber(&ConfusionCounts::new(8, 0, 8, 0)), Some(50.0));
        assert_eq!(ber(&ConfusionCounts::new(8, 8, 0, 0)), Some(0.0));
        assert_eq!(ber(&ConfusionCounts::new(0, 16, 0, 0)), None);
        assert_eq!(mber(&[ConfusionCounts::new(0, 16, 0, 0)]), None);
    }

    #[test]
    fn absent_class_scores_full_iou() {
        let gt = mask(&[0; 16]);
        let c = confusion_counts(&gt, &gt, 3).unwrap();
        assert_eq!(iou(&c[2]), 100.0);
    }

    #[test]
    fn rejects_out_of_range_ids() {
        let gt = mask(&[0; 16]);
        let mut p = vec![0; 16];
        p[5] = 2;
        assert!(confusion_counts(&mask(&p), &gt, 2).is_err());
    }

    #[test]
    fn aggregate_two_images() {
        let gt1 = mask(&[1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0]);
        let pr1 = mask(&[1, 0, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 1]);
        let gt2 = mask(&[0; 16]);
        let pr2 = mask(&[0; 16]);
        let prob = |m: &ClassMask| ImageTensor::from_fn(4, 4, 1, |y, x, _| f64::from(m.get(y, x))).unwrap();
        let e1 = ImageEvaluation::compute(&pr1, &gt1, &prob(&pr1), 2).unwrap();
        let e2 = ImageEvaluation::compute(&pr2, &gt2, &prob(&pr2), 2).unwrap();
        let r = MetricsReport::aggregate(&[e1.clone(), e2.clone()], 2).unwrap();
        // summed counts for class 1: tp 7, fp 1, fn 1, tn 23
        assert_eq!(r.pixel_counts[&1], ConfusionCounts::new(7, 23, 1, 1));
        assert_eq!(r.acc, 100.0 * 30.0 / 32.0);
        assert_eq!(r.iou_per_class[&1], 100.0 * 7.0 / 9.0);
        assert_eq!(r.mae, (2.0 / 16.0 + 0.0) / 2.0);
        let swapped = MetricsReport::aggregate(&[e2, e1], 2).unwrap();
        assert_eq!(swapped, r);
    }

    fn arb_pair() -> impl Strategy<Value = (ClassMask, ClassMask)> {
        (
            proptest::collection::vec(0u32..3, 64),
            proptest::collection::vec(0u32..3, 64),
        )
            .prop_map(|(a, b)| (ClassMask::from_vec(8, 8, a).unwrap(), ClassMask::from_vec(8, 8, b).unwrap()))
    }

    proptest! {
        #[test]
        fn counts_match_tally_and_conserve((pred, gt) in arb_pair()) {
            let c = confusion_counts(&pred, &gt, 3).unwrap();
            let o = confusion_direct(&pred, &gt, 3);
            for (k, d) in c.iter().zip(&o) {
                prop_assert_eq!([k.tp, k.tn, k.fp, k.fn_], *d);
                prop_assert_eq!(k.total(), 64);
            }
            for k in &c {
                let v = iou(k);
                prop_assert!((0.0..=100.0).contains(&v));
                if let Some(b) = ber(k) {
                    prop_assert!((0.0..=100.0).contains(&b));
                }
            }
        }

        #[test]
        fn binary_iou_symmetric((pred, gt) in arb_pair()) {
            let bin = |m: &ClassMask| ClassMask::from_fn(8, 8, |y, x| u32::from(m.get(y, x) != 0)).unwrap();
            let (p, g) = (bin(&pred), bin(&gt));
            let a = confusion_counts(&p, &g, 2).unwrap();
            let b = confusion_counts(&g, &p, 2).unwrap();
            prop_assert_eq!(iou(&a[1]), iou(&b[1]));
        }
    }
}

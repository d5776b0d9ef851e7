//! Oracle suites run by the `selfcheck` command.

use std::fmt::Write as _;

use fakemix_core::augment::{fakemix, fakemix_once, DonorSource, FakeMixConfig, Sample};
use fakemix_core::boundary::{boundary_band, BoundaryBandConfig};
use fakemix_core::imagecore::{
    dilate, erode, BinaryMask, ClassMask, ImageTensor, SeededRng, Translate, TranslationVector,
};
use fakemix_core::metrics::{ber, confusion_counts, iou, mae, pixel_accuracy, ConfusionCounts};
use fakemix_core::neuralref::{
    cross_entropy_loss, dice_loss, dice_loss_grad, dilated_conv, enhance, finite_diff_check, importance_scores,
    importance_scores_vjp, ConvParams, ImportanceVector, TransformParams,
};
use fakemix_core::oracle::{conv_direct, importance_direct, morphology_direct, translate_direct};
use rand::Rng;

use crate::stats::{chi_square_rounded_uniform, CHI2_CRIT_DF31_ALPHA01};
use crate::synth::synth_sample;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(suite: &'static str, name: &'static str, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        suite,
        name,
        passed,
        detail: detail.into(),
    }
}

fn random_mask(rng: &mut SeededRng, h: usize, w: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(h, w, |_, _| rng.random_bool(density)).expect("positive dims")
}

fn morphology(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-morphology");
    let (mut dil_ok, mut ero_ok, mut band_ok) = (true, true, true);
    for _ in 0..200 {
        let (h, w) = (rng.random_range(1..=20), rng.random_range(1..=20));
        let density = rng.random_range(0.05..0.8);
        let m = random_mask(&mut rng, h, w, density);
        let r = rng.random_range(0..=4);
        dil_ok &= dilate(&m, r) == morphology_direct(&m, r, true);
        ero_ok &= erode(&m, r) == morphology_direct(&m, r, false);
        if r > 0 {
            let band = boundary_band(&m, BoundaryBandConfig::new(r).expect("r > 0"));
            let direct = morphology_direct(&m, r, true)
                .and_not(&morphology_direct(&m, r, false))
                .expect("same shape");
            band_ok &= band == direct;
        }
    }
    vec![
        result("morphology", "dilation matches window oracle", dil_ok, "200 random masks"),
        result("morphology", "erosion matches window oracle", ero_ok, "200 random masks"),
        result("morphology", "band = dilate AND NOT erode", band_ok, "200 random masks"),
    ]
}

fn translation(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-translation");
    let mut ok = true;
    for _ in 0..200 {
        let (h, w) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let img = ImageTensor::from_fn(h, w, 2, |_, _, _| rng.random::<f64>()).expect("positive dims");
        let d = TranslationVector::new(rng.random_range(-14..=14), rng.random_range(-14..=14));
        ok &= img.translate_zero_fill(d) == translate_direct(&img, d.dx, d.dy);
    }
    vec![result("translation", "zero-fill shift matches index oracle", ok, "200 random cases")]
}

fn convolution(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-conv");
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (h, w) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let (cin, cout) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let k = [1, 3, 5][rng.random_range(0..3)];
        let d = rng.random_range(1..=4);
        let x = ImageTensor::from_fn(h, w, cin, |_, _, _| rng.random_range(-1.0..1.0)).expect("positive dims");
        let p = ConvParams::random(cin, cout, k, d, &mut rng).expect("valid params");
        let fast = dilated_conv(&x, &p).expect("matching channels");
        let slow = conv_direct(&x, &p);
        for (a, b) in fast.data().iter().zip(slow.data()) {
            worst = worst.max((a - b).abs());
        }
    }
    vec![result(
        "convolution",
        "dilated conv matches direct summation",
        worst <= 1e-6,
        format!("200 cases, max abs error {worst:.2e}"),
    )]
}

fn synth_triple(seed: u64, i: u64, size: usize) -> Sample {
    let (image, fg) = synth_sample(seed, i, size).expect("positive size");
    let seg = ClassMask::from(&fg);
    Sample::with_generated_boundary(image, seg, BoundaryBandConfig::for_size(size, size)).expect("same shape")
}

fn composite(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-composite");
    let cfg = FakeMixConfig::default();
    let (mut exact, mut labels) = (true, true);
    for i in 0..200 {
        let base = synth_triple(seed, 2 * i, 32);
        let donor = synth_triple(seed, 2 * i + 1, 32);
        let step = fakemix_once(&base, &donor, &cfg, &mut rng).expect("valid config");
        for y in 0..32 {
            for x in 0..32 {
                let want = if step.layers.mask.get(y, x) {
                    step.layers.content.pixel(y, x)
                } else {
                    base.image.pixel(y, x)
                };
                exact &= step.sample.image.pixel(y, x) == want;
            }
        }
        labels &= step.sample.seg == base.seg && step.sample.boundary == base.boundary;
    }
    vec![
        result("composite", "output is base off-mask and pasted content on-mask", exact, "200 pairs, zero tolerance"),
        result("composite", "labels untouched", labels, "200 pairs"),
    ]
}

fn sampling(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-sampling");
    let n = 100_000;
    let (mut dxs, mut dys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let d = rng.translation(512, 512, 0.5).expect("valid lambda");
        dxs.push(d.dx);
        dys.push(d.dy);
    }
    let in_bounds = dxs.iter().chain(&dys).all(|v| v.abs() <= 256);
    let cx = chi_square_rounded_uniform(&dxs, 256.0, 32);
    let cy = chi_square_rounded_uniform(&dys, 256.0, 32);
    let uniform = cx < CHI2_CRIT_DF31_ALPHA01 && cy < CHI2_CRIT_DF31_ALPHA01;

    let base = synth_triple(seed, 0, 8);
    let pool = vec![synth_triple(seed, 1, 8)];
    let mut gate_rng = SeededRng::for_purpose(seed, 0, "selfcheck-gate");
    let kept_fraction = |p: f64, trials: usize, rng: &mut SeededRng| {
        let cfg = FakeMixConfig { p, repetitions: 1, ..Default::default() };
        let kept = (0..trials)
            .filter(|_| fakemix(&base, &DonorSource::new(&pool), &cfg, rng).expect("valid").trace.kept)
            .count();
        kept as f64 / trials as f64
    };
    let half = kept_fraction(0.5, 10_000, &mut gate_rng);
    let never = kept_fraction(0.0, 1_000, &mut gate_rng);
    let always = kept_fraction(1.0, 1_000, &mut gate_rng);
    vec![
        result("sampling", "offsets within ±256 at λ=0.5, 512px", in_bounds, format!("{n} draws")),
        result(
            "sampling",
            "offsets uniform (χ², 32 bins, α=0.01)",
            uniform,
            format!("χ²x={cx:.1} χ²y={cy:.1} crit={CHI2_CRIT_DF31_ALPHA01:.1}"),
        ),
        result(
            "sampling",
            "gate keeps original with probability p",
            (0.48..=0.52).contains(&half) && never == 0.0 && always == 1.0,
            format!("p=0.5: {half:.4}, p=0: {never}, p=1: {always}"),
        ),
    ]
}

fn pyramid(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-pyramid");
    let (mut range_ok, mut worst_oracle) = (true, 0.0f64);
    for _ in 0..1000 {
        let t = TransformParams::random(7, 7, rng.random_range(0.1..5.0), &mut rng);
        let y: Vec<f64> = (0..7).map(|_| rng.random_range(-3.0..3.0)).collect();
        let s = importance_scores(&y, &t).expect("matching sizes");
        range_ok &= s.values().iter().all(|v| (0.0..=1.0).contains(v));
        for (a, b) in s.values().iter().zip(importance_direct(&y, &t)) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
    }
    let (mut residual, mut double_err) = (true, 0.0f64);
    for _ in 0..100 {
        let (h, w) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let ys: Vec<ImageTensor> = (0..7)
            .map(|_| ImageTensor::from_fn(h, w, 2, |_, _, _| rng.random_range(-2.0..2.0)).expect("positive dims"))
            .collect();
        let concat = ImageTensor::concat_channels(&ys).expect("same sizes");
        residual &= enhance(&ys, &ImportanceVector::zeros(7)).expect("7 scores") == concat;
        let two = enhance(&ys, &ImportanceVector::ones(7)).expect("7 scores");
        for (a, b) in two.data().iter().zip(concat.data()) {
            double_err = double_err.max((a - 2.0 * b).abs());
        }
    }
    vec![
        result("pyramid", "importance scores in [0, 1]", range_ok, "1000 random transforms, N=7"),
        result(
            "pyramid",
            "importance scores match oracle",
            worst_oracle <= 1e-12,
            format!("max abs error {worst_oracle:.2e}"),
        ),
        result("pyramid", "enhance(ys, 0) == concat(ys)", residual, "100 fixtures, bitwise"),
        result(
            "pyramid",
            "enhance(ys, 1) == 2·ys",
            double_err <= 1e-12,
            format!("max abs error {double_err:.2e}"),
        ),
    ]
}

fn losses(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededRng::for_purpose(seed, 0, "selfcheck-loss");
    let gt = random_mask(&mut rng, 64, 64, 0.3);
    let pred = ImageTensor::from_fn(64, 64, 1, |y, x, _| f64::from(u8::from(gt.get(y, x)))).expect("dims");
    let dice_same = dice_loss(&pred, &gt).expect("same shape");
    let logits = ImageTensor::zeros(8, 8, 2).expect("dims");
    let labels = ClassMask::from_fn(8, 8, |y, x| ((y + x) % 2) as u32).expect("dims");
    let ce = cross_entropy_loss(&logits, &labels).expect("same shape");
    let ln2 = std::f64::consts::LN_2;

    let small = random_mask(&mut rng, 4, 4, 0.5);
    let point: Vec<f64> = (0..16).map(|_| rng.random_range(0.05..0.95)).collect();
    let as_map = |v: &[f64]| ImageTensor::from_vec(4, 4, 1, v.to_vec()).expect("16 values");
    let dice_check = finite_diff_check(
        |v| dice_loss(&as_map(v), &small).expect("same shape"),
        &dice_loss_grad(&as_map(&point), &small).expect("same shape"),
        &point,
        1e-6,
    )
    .expect("matching lengths");

    let t = TransformParams::random(7, 7, 1.0, &mut rng);
    let y: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
    let up: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (dy, _) = importance_scores_vjp(&y, &t, &up).expect("sizes");
    let transform_check = finite_diff_check(
        |v| {
            let s = importance_scores(v, &t).expect("sizes");
            s.values().iter().zip(&up).map(|(a, b)| a * b).sum()
        },
        &dy,
        &y,
        1e-6,
    )
    .expect("matching lengths");
    vec![
        result("losses", "dice(pred = gt) < 1e-3", dice_same < 1e-3, format!("{dice_same:.2e}")),
        result(
            "losses",
            "cross-entropy of uniform logits = ln 2",
            (ce - ln2).abs() <= 1e-6,
            format!("{ce:.12}"),
        ),
        result(
            "losses",
            "dice gradient matches central differences",
            dice_check.max_rel_error < 1e-4,
            format!("max rel error {:.2e}", dice_check.max_rel_error),
        ),
        result(
            "losses",
            "transform gradient matches central differences",
            transform_check.max_rel_error < 1e-4,
            format!("max rel error {:.2e}", transform_check.max_rel_error),
        ),
    ]
}

fn metric_fixtures() -> Vec<CheckResult> {
    let mask = |fg: &[usize]| ClassMask::from_fn(4, 4, |y, x| u32::from(fg.contains(&(y * 4 + x)))).expect("dims");
    let iou_c = confusion_counts(&mask(&[1, 2, 3]), &mask(&[0, 1, 2]), 2).expect("ids < 2");
    let all: Vec<usize> = (0..16).collect();
    let acc = pixel_accuracy(&mask(&all[4..]), &mask(&all)).expect("same shape");
    let gt_bin = BinaryMask::from_fn(4, 4, |y, _| y < 2).expect("dims");
    let m = mae(&ImageTensor::filled(4, 4, 1, 0.5).expect("dims"), &gt_bin).expect("same shape");
    let gt = mask(&all[..8]);
    let pred = mask(&[0, 1, 2, 3, 4, 5, 8, 9, 10, 11]);
    let b = confusion_counts(&pred, &gt, 2).expect("ids < 2")[1];
    vec![
        result("metrics", "IoU fixture = 50", iou(&iou_c[1]) == 50.0, format!("{}", iou(&iou_c[1]))),
        result("metrics", "accuracy fixture = 75", acc == 75.0, format!("{acc}")),
        result("metrics", "MAE fixture = 0.5", m == 0.5, format!("{m}")),
        result(
            "metrics",
            "BER fixture = 37.5",
            b == ConfusionCounts::new(6, 4, 4, 2) && ber(&b) == Some(37.5),
            format!("{:?}", ber(&b)),
        ),
    ]
}

/// Every suite, in display order.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    [
        morphology(seed),
        translation(seed),
        convolution(seed),
        composite(seed),
        sampling(seed),
        pyramid(seed),
        losses(seed),
        metric_fixtures(),
    ]
    .concat()
}

pub fn render_table(results: &[CheckResult]) -> String {
    let w_suite = results.iter().map(|r| r.suite.len()).max().unwrap_or(5).max(5);
    let w_name = results.iter().map(|r| r.name.chars().count()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(out, "{:<w_suite$}  {:<w_name$}  {:<6}  detail", "suite", "check", "result");
    for r in results {
        let pad = w_name - r.name.chars().count();
        let _ = writeln!(
            out,
            "{:<w_suite$}  {}{}  {:<6}  {}",
            r.suite,
            r.name,
            " ".repeat(pad),
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {} failed", results.len(), failed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_fixtures_pass() {
        assert!(metric_fixtures().iter().all(|r| r.passed));
    }

    #[test]
    fn table_lists_every_check() {
        let rows = vec![
            result("a", "x", true, "ok"),
            result("bb", "yy", false, "bad"),
        ];
        let t = render_table(&rows);
        assert!(t.contains("PASS") && t.contains("FAIL"));
        assert!(t.ends_with("2 checks, 1 failed\n"));
    }
}

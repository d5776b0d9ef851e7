//! Runs the adaptive pyramid on a JSON fixture and reports the importance
//! scores together with invariant checks against the reference oracles.

use std::path::Path;

use anyhow::{Context, Result};
use fakemix_core::imagecore::{ImageTensor, SeededRng};
use fakemix_core::neuralref::{
    adaptive_aspp_forward, enhance, AsppConfig, AsppParams, BranchConv, ImportanceVector, TransformParams,
};
use fakemix_core::oracle::{conv_direct, importance_direct};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsppFixture {
    pub config: AsppConfig,
    pub input: ImageTensor,
    pub params: AsppParams,
}

impl AsppFixture {
    /// 16×16×4 input, the default seven rates, eight channels per branch.
    pub fn generate(seed: u64) -> Result<Self> {
        let mut rng = SeededRng::for_purpose(seed, 0, "aspp-demo");
        let config = AsppConfig::default();
        let input = ImageTensor::from_fn(16, 16, 4, |_, _, _| rng.random_range(-1.0..1.0))?;
        let n = config.branch_count();
        let params = AsppParams::random(&config, 4, 8, n, false, &mut rng)?;
        Ok(Self { config, input, params })
    }

    /// Same as [`AsppFixture::generate`] but with all-zero transforms.
    pub fn zero_transforms(seed: u64) -> Result<Self> {
        let mut f = Self::generate(seed)?;
        let n = f.config.branch_count();
        f.params.transform_seg = TransformParams::zeros(n, n);
        f.params.transform_bnd = TransformParams::zeros(n, n);
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing fixture {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub pooled: Vec<f64>,
    pub scores_seg: Vec<f64>,
    pub scores_bnd: Vec<f64>,
    /// `[height, width, channels]` of the squeezed outputs.
    pub z_shape: [usize; 3],
    pub checks: Vec<InvariantCheck>,
}

impl DemoReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> InvariantCheck {
    InvariantCheck {
        name: name.into(),
        passed,
        detail,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn branch_direct(x: &ImageTensor, b: &BranchConv) -> Result<ImageTensor> {
    Ok(match b {
        BranchConv::Dense(p) => conv_direct(x, p),
        BranchConv::Separable { depthwise, pointwise } => conv_direct(&conv_direct(x, &depthwise.to_dense()?), pointwise),
    })
}

pub fn run_demo(fx: &AsppFixture) -> Result<DemoReport> {
    let out = adaptive_aspp_forward(&fx.input, &fx.config, &fx.params)?;
    let n = fx.config.branch_count();
    let mut checks = Vec::new();

    let all_scores = out.scores_seg.values().iter().chain(out.scores_bnd.values());
    let in_range = all_scores.clone().all(|s| (0.0..=1.0).contains(s));
    checks.push(check("scores_in_unit_interval", in_range, format!("{n} scores per modality")));

    let mut branch_err: f64 = 0.0;
    for (y, b) in out.branches.iter().zip(&fx.params.branches) {
        branch_err = branch_err.max(max_abs_diff(y.data(), branch_direct(&fx.input, b)?.data()));
    }
    checks.push(check(
        "branches_match_direct_convolution",
        branch_err <= 1e-6,
        format!("max abs error {branch_err:.3e}"),
    ));

    let oracle_seg = importance_direct(&out.pooled, &fx.params.transform_seg);
    let oracle_bnd = importance_direct(&out.pooled, &fx.params.transform_bnd);
    let score_err = max_abs_diff(out.scores_seg.values(), &oracle_seg).max(max_abs_diff(out.scores_bnd.values(), &oracle_bnd));
    checks.push(check(
        "scores_match_oracle",
        score_err <= 1e-12,
        format!("max abs error {score_err:.3e}"),
    ));

    let concat = ImageTensor::concat_channels(&out.branches)?;
    let residual = enhance(&out.branches, &ImportanceVector::zeros(n))?;
    checks.push(check(
        "residual_identity_at_zero_scores",
        residual == concat,
        "enhance(ys, 0) == concat(ys) bitwise".into(),
    ));
    let doubled = enhance(&out.branches, &ImportanceVector::ones(n))?;
    let double_err = max_abs_diff(doubled.data(), concat.scale(2.0).data());
    checks.push(check(
        "doubling_at_unit_scores",
        double_err <= 1e-12,
        format!("max abs error {double_err:.3e}"),
    ));

    if out.scores_seg.values().iter().all(|&s| s == 0.0) {
        checks.push(check(
            "zero_scores_leave_features_unscaled",
            out.enhanced_seg == concat,
            "segmentation enhancement equals the raw branches".into(),
        ));
    }

    // Changing the boundary transform must not move the segmentation path.
    let mut perturbed = fx.params.clone();
    for w in perturbed.transform_bnd.fc2_bias.iter_mut() {
        *w += 0.5;
    }
    let other = adaptive_aspp_forward(&fx.input, &fx.config, &perturbed)?;
    checks.push(check(
        "modalities_independent",
        other.scores_seg == out.scores_seg && other.z_seg == out.z_seg,
        "perturbing the boundary transform leaves segmentation outputs unchanged".into(),
    ));

    let (h, w, c) = out.z_seg.dims();
    Ok(DemoReport {
        pooled: out.pooled,
        scores_seg: out.scores_seg.into(),
        scores_bnd: out.scores_bnd.into(),
        z_shape: [h, w, c],
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fixture_passes() {
        let r = run_demo(&AsppFixture::generate(7).unwrap()).unwrap();
        assert!(r.all_passed(), "{:?}", r.checks);
        assert_eq!(r.scores_seg.len(), 7);
        assert_eq!(r.z_shape, [16, 16, 8]);
    }

    #[test]
    fn zero_transforms_report_zero_scores() {
        let r = run_demo(&AsppFixture::zero_transforms(7).unwrap()).unwrap();
        assert!(r.scores_seg.iter().chain(&r.scores_bnd).all(|&s| s == 0.0));
        assert!(r.checks.iter().any(|c| c.name == "zero_scores_leave_features_unscaled" && c.passed));
        assert!(r.all_passed());
    }

    #[test]
    fn fixture_round_trips_through_json() {
        let f = AsppFixture::generate(1).unwrap();
        let back: AsppFixture = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}

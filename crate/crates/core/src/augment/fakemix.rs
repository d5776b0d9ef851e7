//! FakeMix: paste translated boundary content from donor samples onto a base
//! image while leaving the base labels untouched.
//!
//! One repetition:
//!
//! 1. `RB₂ = GB₂ ⊙ I₂` ([`extract_t_boundary`])
//! 2. `GB₂′ = T_D(GB₂)`, `RB₂′ = T_D(RB₂)` with one shared `D` ([`paste_layers`])
//! 3. `I₁′ = (1 − GB₂′) ⊙ I₁ + RB₂′` ([`composite`])
//!
//! [`fakemix`] wraps this in a Bernoulli gate that keeps the original image
//! with probability `p`, and chains `repetitions` pastes otherwise.

use std::borrow::Cow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::imagecore::{
    elementwise_mul, validate_lambda, BinaryMask, ImageTensor, SeededRng, Translate, TranslationVector,
};
use crate::{Error, Result};

/// What gets written inside the translated boundary mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentMode {
    /// The donor's own boundary pixels.
    #[default]
    Boundary,
    Zero,
    /// Per-channel dataset mean.
    Mean,
    /// Pixels from a randomly offset (wrapped) region of the donor image.
    Random,
}

/// How donors are chosen across repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DonorPolicy {
    /// Each repetition draws a new donor and a new translation.
    #[default]
    FreshPerRepetition,
    /// One donor, `repetitions` independent translations.
    SingleDonor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FakeMixConfig {
    /// Translation range as a fraction of width/height.
    pub lambda: f64,
    /// Probability of keeping the original image.
    pub p: f64,
    pub repetitions: usize,
    pub content: ContentMode,
    pub donor_policy: DonorPolicy,
    /// Required for [`ContentMode::Mean`]; one value per image channel.
    pub channel_mean: Option<Vec<f64>>,
}

impl Default for FakeMixConfig {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            p: 0.5,
            repetitions: 3,
            content: ContentMode::Boundary,
            donor_policy: DonorPolicy::FreshPerRepetition,
            channel_mean: None,
        }
    }
}

impl FakeMixConfig {
    pub fn validate(&self) -> Result<()> {
        validate_lambda(self.lambda)?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::param("p", format!("{} is outside [0, 1]", self.p)));
        }
        if self.content == ContentMode::Mean {
            match &self.channel_mean {
                None => {
                    return Err(Error::param(
                        "channel_mean",
                        "content mode `mean` needs per-channel dataset means",
                    ))
                }
                Some(m) if m.iter().any(|v| !v.is_finite()) => {
                    return Err(Error::param("channel_mean", "values must be finite"))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Random-access collection of donor samples.
pub trait DonorPool: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn fetch(&self, index: usize) -> Result<Cow<'_, Sample>>;
}

impl DonorPool for [Sample] {
    fn len(&self) -> usize {
        <[Sample]>::len(self)
    }

    fn fetch(&self, index: usize) -> Result<Cow<'_, Sample>> {
        self.get(index)
            .map(Cow::Borrowed)
            .ok_or(Error::DonorOutOfRange {
                index,
                len: <[Sample]>::len(self),
            })
    }
}

impl DonorPool for Vec<Sample> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn fetch(&self, index: usize) -> Result<Cow<'_, Sample>> {
        self.as_slice().fetch(index)
    }
}

/// A donor pool, optionally excluding the base sample's own index so a
/// sample never donates to itself (unless it is the only candidate).
pub struct DonorSource<'a, P: DonorPool + ?Sized> {
    pool: &'a P,
    exclude: Option<usize>,
}

impl<'a, P: DonorPool + ?Sized> DonorSource<'a, P> {
    pub fn new(pool: &'a P) -> Self {
        Self { pool, exclude: None }
    }

    pub fn excluding(pool: &'a P, index: usize) -> Self {
        Self {
            pool,
            exclude: Some(index),
        }
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    fn effective_exclusion(&self) -> Option<usize> {
        self.exclude.filter(|&i| i < self.pool.len() && self.pool.len() > 1)
    }

    /// Uniform draw over the candidate indices.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let len = self.pool.len();
        if len == 0 {
            return Err(Error::EmptyDonorPool(1));
        }
        Ok(match self.effective_exclusion() {
            Some(skip) => {
                let i = rng.random_range(0..len - 1);
                if i >= skip {
                    i + 1
                } else {
                    i
                }
            }
            None => rng.random_range(0..len),
        })
    }

    /// Fetches a donor resized to `height × width`.
    pub fn fetch_sized(&self, index: usize, height: usize, width: usize) -> Result<Cow<'a, Sample>> {
        let s = self.pool.fetch(index)?;
        if s.image.same_spatial(height, width) {
            Ok(s)
        } else {
            Ok(Cow::Owned(s.resized_to(height, width)?))
        }
    }
}

/// One paste: which donor, where it moved, and (for random content) where
/// its fill was sampled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paste {
    pub donor: usize,
    pub shift: TranslationVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_offset: Option<TranslationVector>,
}

/// Everything needed to replay a [`fakemix`] call without its RNG.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FakeMixTrace {
    /// True when the Bernoulli gate kept the original image.
    pub kept: bool,
    pub pastes: Vec<Paste>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FakeMixOutcome {
    pub sample: Sample,
    pub trace: FakeMixTrace,
}

/// Concrete fill for one paste, resolved from a [`ContentMode`].
#[derive(Debug, Clone, PartialEq)]
pub enum ContentFill<'a> {
    Boundary,
    Zero,
    Mean(&'a [f64]),
    /// Donor image rolled by this offset (with wrap-around).
    Random(TranslationVector),
}

/// Translated mask `GB₂′` and translated content `RB₂′`.
#[derive(Debug, Clone, PartialEq)]
pub struct PasteLayers {
    pub mask: BinaryMask,
    pub content: ImageTensor,
}

/// `RB = GB ⊙ I` for a donor sample.
pub fn extract_t_boundary(donor: &Sample) -> Result<ImageTensor> {
    elementwise_mul(&donor.image, &donor.boundary)
}

fn rolled(img: &ImageTensor, offset: TranslationVector) -> ImageTensor {
    let (h, w, c) = img.dims();
    let (hi, wi) = (h as i64, w as i64);
    ImageTensor::from_fn(h, w, c, |y, x, ch| {
        let sy = (y as i64 - offset.dy).rem_euclid(hi) as usize;
        let sx = (x as i64 - offset.dx).rem_euclid(wi) as usize;
        img.get(sy, sx, ch)
    })
    .expect("dims come from a valid tensor")
}

/// Builds `GB₂′` and `RB₂′` for `donor` moved by `shift`. Mask and content are
/// moved by the same vector, so the content's support stays inside the mask.
pub fn paste_layers(donor: &Sample, shift: TranslationVector, fill: &ContentFill<'_>) -> Result<PasteLayers> {
    let mask = donor.boundary.translate_zero_fill(shift);
    let content = match fill {
        ContentFill::Boundary => extract_t_boundary(donor)?.translate_zero_fill(shift),
        ContentFill::Zero => ImageTensor::zeros(donor.height(), donor.width(), donor.image.channels())?,
        ContentFill::Mean(means) => {
            let c = donor.image.channels();
            if means.len() != c {
                return Err(Error::shape(format!("{c} channel means"), format!("{}", means.len())));
            }
            let flat = ImageTensor::from_fn(donor.height(), donor.width(), c, |_, _, ch| means[ch])?;
            elementwise_mul(&flat, &mask)?
        }
        ContentFill::Random(offset) => elementwise_mul(&rolled(&donor.image, *offset), &mask)?,
    };
    Ok(PasteLayers { mask, content })
}

/// `(1 − GB₂′) ⊙ I₁ + RB₂′`.
pub fn composite(base: &ImageTensor, layers: &PasteLayers) -> Result<ImageTensor> {
    base.ensure_same_shape(&layers.content)?;
    let kept = elementwise_mul(base, &layers.mask.complement())?;
    kept.add(&layers.content)
}

fn resolve_fill<'c, R: Rng + ?Sized>(
    cfg: &'c FakeMixConfig,
    height: usize,
    width: usize,
    rng: &mut R,
) -> (ContentFill<'c>, Option<TranslationVector>) {
    match cfg.content {
        ContentMode::Boundary => (ContentFill::Boundary, None),
        ContentMode::Zero => (ContentFill::Zero, None),
        ContentMode::Mean => (
            ContentFill::Mean(cfg.channel_mean.as_deref().unwrap_or_default()),
            None,
        ),
        ContentMode::Random => {
            let offset = TranslationVector::new(
                rng.random_range(0..width as i64),
                rng.random_range(0..height as i64),
            );
            (ContentFill::Random(offset), Some(offset))
        }
    }
}

fn fill_for<'c>(cfg: &'c FakeMixConfig, paste: &Paste) -> Result<ContentFill<'c>> {
    Ok(match cfg.content {
        ContentMode::Boundary => ContentFill::Boundary,
        ContentMode::Zero => ContentFill::Zero,
        ContentMode::Mean => ContentFill::Mean(cfg.channel_mean.as_deref().unwrap_or_default()),
        ContentMode::Random => ContentFill::Random(
            paste
                .content_offset
                .ok_or_else(|| Error::Data("random-content paste is missing its offset".into()))?,
        ),
    })
}

fn apply_paste(base: &Sample, donor: &Sample, shift: TranslationVector, fill: &ContentFill<'_>) -> Result<Sample> {
    Ok(apply_paste_layers(base, donor, shift, fill)?.0)
}

fn apply_paste_layers(
    base: &Sample,
    donor: &Sample,
    shift: TranslationVector,
    fill: &ContentFill<'_>,
) -> Result<(Sample, PasteLayers)> {
    base.ensure_same_size(donor)?;
    let layers = paste_layers(donor, shift, fill)?;
    let sample = Sample {
        image: composite(&base.image, &layers)?,
        seg: base.seg.clone(),
        boundary: base.boundary.clone(),
    };
    Ok((sample, layers))
}

/// Result of [`fakemix_once`], with the intermediate layers kept for
/// inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct PasteStep {
    pub sample: Sample,
    pub shift: TranslationVector,
    pub content_offset: Option<TranslationVector>,
    pub layers: PasteLayers,
}

/// Single paste of `donor` onto `base` with one freshly drawn translation.
/// The donor must already match the base size.
pub fn fakemix_once<R: Rng + ?Sized>(
    base: &Sample,
    donor: &Sample,
    cfg: &FakeMixConfig,
    rng: &mut R,
) -> Result<PasteStep> {
    cfg.validate()?;
    base.ensure_same_size(donor)?;
    let (h, w) = (base.height(), base.width());
    let shift = crate::imagecore::sample_translation(w, h, cfg.lambda, rng)?;
    let (fill, content_offset) = resolve_fill(cfg, h, w, rng);
    let (sample, layers) = apply_paste_layers(base, donor, shift, &fill)?;
    Ok(PasteStep {
        sample,
        shift,
        content_offset,
        layers,
    })
}

/// Full FakeMix with Bernoulli gating and chained repetitions.
///
/// Draw order on `rng`: gate, then per repetition donor index (fresh policy,
/// or once up front for a single donor), translation, content offset.
pub fn fakemix<P: DonorPool + ?Sized>(
    base: &Sample,
    donors: &DonorSource<'_, P>,
    cfg: &FakeMixConfig,
    rng: &mut SeededRng,
) -> Result<FakeMixOutcome> {
    cfg.validate()?;
    if cfg.repetitions > 0 && donors.is_empty() {
        return Err(Error::EmptyDonorPool(cfg.repetitions));
    }
    let kept = rng.random::<f64>() < cfg.p;
    if kept || cfg.repetitions == 0 {
        return Ok(FakeMixOutcome {
            sample: base.clone(),
            trace: FakeMixTrace {
                kept,
                pastes: Vec::new(),
            },
        });
    }

    let (h, w) = (base.height(), base.width());
    let single = match cfg.donor_policy {
        DonorPolicy::SingleDonor => Some(donors.pick(rng)?),
        DonorPolicy::FreshPerRepetition => None,
    };
    let mut current = base.clone();
    let mut pastes = Vec::with_capacity(cfg.repetitions);
    for _ in 0..cfg.repetitions {
        let index = match single {
            Some(i) => i,
            None => donors.pick(rng)?,
        };
        let donor = donors.fetch_sized(index, h, w)?;
        let shift = rng.translation(w, h, cfg.lambda)?;
        let (fill, content_offset) = resolve_fill(cfg, h, w, rng);
        current = apply_paste(&current, &donor, shift, &fill)?;
        pastes.push(Paste {
            donor: index,
            shift,
            content_offset,
        });
    }
    Ok(FakeMixOutcome {
        sample: current,
        trace: FakeMixTrace { kept: false, pastes },
    })
}

/// Re-applies a recorded trace. Produces the same sample as the original call.
pub fn replay_fakemix<P: DonorPool + ?Sized>(
    base: &Sample,
    pool: &P,
    cfg: &FakeMixConfig,
    trace: &FakeMixTrace,
) -> Result<Sample> {
    cfg.validate()?;
    let source = DonorSource::new(pool);
    let mut current = base.clone();
    for paste in &trace.pastes {
        let donor = source.fetch_sized(paste.donor, base.height(), base.width())?;
        current = apply_paste(&current, &donor, paste.shift, &fill_for(cfg, paste)?)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::ClassMask;

    fn sample(h: usize, w: usize, seed: u64) -> Sample {
        let mut rng = SeededRng::new(seed, 0);
        let image = ImageTensor::from_fn(h, w, 3, |_, _, _| rng.random::<f64>()).unwrap();
        let seg = ClassMask::from_fn(h, w, |y, x| u32::from((y + x) % 3 == 0)).unwrap();
        let boundary = BinaryMask::from_fn(h, w, |y, x| (y * w + x) % 4 == 1).unwrap();
        Sample::new(image, seg, boundary).unwrap()
    }

    fn with_boundary(s: &Sample, b: BinaryMask) -> Sample {
        Sample::new(s.image.clone(), s.seg.clone(), b).unwrap()
    }

    #[test]
    fn t_boundary_extremes() {
        let s = sample(4, 4, 1);
        let none = with_boundary(&s, BinaryMask::zeros(4, 4).unwrap());
        assert!(extract_t_boundary(&none).unwrap().data().iter().all(|&v| v == 0.0));
        let all = with_boundary(&s, BinaryMask::ones(4, 4).unwrap());
        assert_eq!(extract_t_boundary(&all).unwrap(), s.image);
    }

    #[test]
    fn t_boundary_fixture() {
        let s = sample(4, 4, 2);
        let rb = extract_t_boundary(&s).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                for c in 0..3 {
                    let expected = if s.boundary.get(y, x) { s.image.get(y, x, c) } else { 0.0 };
                    assert_eq!(rb.get(y, x, c), expected);
                }
            }
        }
    }

    #[test]
    fn empty_donor_boundary_leaves_base() {
        let base = sample(8, 8, 3);
        let donor = with_boundary(&sample(8, 8, 4), BinaryMask::zeros(8, 8).unwrap());
        let mut rng = SeededRng::new(0, 0);
        let step = fakemix_once(&base, &donor, &FakeMixConfig::default(), &mut rng).unwrap();
        assert_eq!(step.sample, base);
        assert!(step.layers.mask.is_empty());
    }

    #[test]
    fn full_mask_layers_replace_base() {
        let base = sample(5, 5, 5);
        let donor = sample(5, 5, 6);
        let layers = PasteLayers {
            mask: BinaryMask::ones(5, 5).unwrap(),
            content: donor.image.clone(),
        };
        assert_eq!(composite(&base.image, &layers).unwrap(), donor.image);
    }

    // 4×4, one-pixel band at (1,1), shifted right by one → only (1,2) changes.
    #[test]
    fn hand_computed_composite() {
        let base_img = ImageTensor::from_fn(4, 4, 1, |y, x, _| (y * 4 + x) as f64 / 16.0).unwrap();
        let donor_img = ImageTensor::filled(4, 4, 1, 0.9).unwrap();
        let seg = ClassMask::from_vec(4, 4, vec![0; 16]).unwrap();
        let base = Sample::new(base_img.clone(), seg.clone(), BinaryMask::zeros(4, 4).unwrap()).unwrap();
        let band = BinaryMask::from_fn(4, 4, |y, x| y == 1 && x == 1).unwrap();
        let donor = Sample::new(donor_img, seg, band).unwrap();
        let out = apply_paste(&base, &donor, TranslationVector::new(1, 0), &ContentFill::Boundary).unwrap();
        let mut expected = base_img.data().to_vec();
        expected[6] = 0.9;
        assert_eq!(out.image.data(), expected.as_slice());
        assert_eq!(out.seg, base.seg);
        assert_eq!(out.boundary, base.boundary);
    }

    #[test]
    fn content_modes_keep_geometry() {
        let base = sample(6, 6, 7);
        let donor = sample(6, 6, 8);
        let d = TranslationVector::new(-1, 2);
        let means = [0.25, 0.5, 0.75];
        for fill in [
            ContentFill::Zero,
            ContentFill::Mean(&means),
            ContentFill::Random(TranslationVector::new(3, 1)),
        ] {
            let layers = paste_layers(&donor, d, &fill).unwrap();
            assert_eq!(layers.mask, donor.boundary.translate_zero_fill(d));
            for y in 0..6 {
                for x in 0..6 {
                    let px = layers.content.pixel(y, x);
                    if !layers.mask.get(y, x) {
                        assert!(px.iter().all(|&v| v == 0.0));
                    } else if let ContentFill::Mean(m) = fill {
                        assert_eq!(px, m);
                    }
                }
            }
        }
        let random = paste_layers(&donor, d, &ContentFill::Random(TranslationVector::new(3, 1))).unwrap();
        // (y, x) takes donor pixel (y - 1, x - 3) mod 6.
        for y in 0..6 {
            for x in 0..6 {
                if random.mask.get(y, x) {
                    assert_eq!(random.content.pixel(y, x), donor.image.pixel((y + 5) % 6, (x + 3) % 6));
                }
            }
        }
        assert!(paste_layers(&donor, d, &ContentFill::Mean(&[0.1])).is_err());
        let _ = base;
    }

    #[test]
    fn config_validation() {
        let mut cfg = FakeMixConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.p = 1.5;
        assert!(cfg.validate().is_err());
        cfg.p = 0.5;
        cfg.lambda = -0.1;
        assert!(cfg.validate().is_err());
        cfg.lambda = 0.5;
        cfg.content = ContentMode::Mean;
        assert!(cfg.validate().is_err());
        cfg.channel_mean = Some(vec![0.5; 3]);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn empty_pool_rejected() {
        let base = sample(4, 4, 9);
        let pool: Vec<Sample> = Vec::new();
        let mut rng = SeededRng::new(0, 0);
        let err = fakemix(&base, &DonorSource::new(&pool), &FakeMixConfig::default(), &mut rng);
        assert!(matches!(err, Err(Error::EmptyDonorPool(3))));
        let cfg = FakeMixConfig {
            repetitions: 0,
            ..FakeMixConfig::default()
        };
        assert!(fakemix(&base, &DonorSource::new(&pool), &cfg, &mut rng).is_ok());
    }

    #[test]
    fn keep_probability_one_never_touches_donors() {
        struct Poisoned;
        impl DonorPool for Poisoned {
            fn len(&self) -> usize {
                4
            }
            fn fetch(&self, _: usize) -> Result<Cow<'_, Sample>> {
                panic!("donor read with p = 1")
            }
        }
        let base = sample(4, 4, 10);
        let cfg = FakeMixConfig {
            p: 1.0,
            ..FakeMixConfig::default()
        };
        for seed in 0..200 {
            let mut rng = SeededRng::new(seed, 0);
            let out = fakemix(&base, &DonorSource::new(&Poisoned), &cfg, &mut rng).unwrap();
            assert!(out.trace.kept);
            assert_eq!(out.sample, base);
        }
    }

    #[test]
    fn exclusion_skips_own_index() {
        let pool: Vec<Sample> = (0..3).map(|i| sample(4, 4, i)).collect();
        let src = DonorSource::excluding(&pool, 1);
        let mut rng = SeededRng::new(3, 0);
        let mut seen = [0usize; 3];
        for _ in 0..3000 {
            seen[src.pick(&mut rng).unwrap()] += 1;
        }
        assert_eq!(seen[1], 0);
        assert!(seen[0] > 1200 && seen[2] > 1200);

        let single = vec![sample(4, 4, 0)];
        assert_eq!(DonorSource::excluding(&single, 0).pick(&mut rng).unwrap(), 0);
    }

    #[test]
    fn policies_and_replay() {
        let pool: Vec<Sample> = (0..6).map(|i| sample(10, 12, 20 + i)).collect();
        let base = sample(10, 12, 99);
        for policy in [DonorPolicy::FreshPerRepetition, DonorPolicy::SingleDonor] {
            for content in [ContentMode::Boundary, ContentMode::Zero, ContentMode::Mean, ContentMode::Random] {
                let cfg = FakeMixConfig {
                    p: 0.0,
                    repetitions: 4,
                    donor_policy: policy,
                    content,
                    channel_mean: Some(vec![0.4, 0.5, 0.6]),
                    ..FakeMixConfig::default()
                };
                let mut rng = SeededRng::new(17, 5);
                let out = fakemix(&base, &DonorSource::new(&pool), &cfg, &mut rng).unwrap();
                assert!(!out.trace.kept);
                assert_eq!(out.trace.pastes.len(), 4);
                if policy == DonorPolicy::SingleDonor {
                    let d0 = out.trace.pastes[0].donor;
                    assert!(out.trace.pastes.iter().all(|p| p.donor == d0));
                }
                assert_eq!(out.trace.pastes.iter().any(|p| p.content_offset.is_some()), content == ContentMode::Random);
                let replayed = replay_fakemix(&base, &pool, &cfg, &out.trace).unwrap();
                assert_eq!(replayed, out.sample);
                assert_eq!(out.sample.seg, base.seg);
                assert_eq!(out.sample.boundary, base.boundary);
                assert!(out.sample.image.is_unit_range());
            }
        }
    }

    #[test]
    fn donors_of_other_sizes_are_resized() {
        let pool = vec![sample(5, 7, 1), sample(16, 16, 2)];
        let base = sample(8, 8, 3);
        let cfg = FakeMixConfig {
            p: 0.0,
            ..FakeMixConfig::default()
        };
        let mut rng = SeededRng::new(1, 1);
        let out = fakemix(&base, &DonorSource::new(&pool), &cfg, &mut rng).unwrap();
        assert_eq!(out.sample.image.dims(), (8, 8, 3));
    }

    #[test]
    fn deterministic_per_stream() {
        let pool: Vec<Sample> = (0..4).map(|i| sample(8, 8, i)).collect();
        let base = sample(8, 8, 50);
        let cfg = FakeMixConfig::default();
        let run = |stream| {
            let mut rng = SeededRng::new(11, stream);
            fakemix(&base, &DonorSource::new(&pool), &cfg, &mut rng).unwrap()
        };
        for s in 0..20 {
            assert_eq!(run(s), run(s));
        }
    }
}

//! Single-round masked inference and certification.
//!
//! Inference classifies every masked view once and aggregates the votes:
//! a unanimous label wins outright; otherwise a class holding exactly `k`
//! votes wins if it is the only such class; otherwise the plurality wins,
//! ties going to the smallest label id.
//!
//! Certification is a worst-case argument over every admissible anchor. The
//! masks that fully cover the patch at an anchor cast their clean votes (the
//! patch is invisible to them); every other vote is handed to the adversary.
//! An image is certified when no anchor admits an adversarial allocation that
//! changes the aggregate away from the true label.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{brute_force_attack, find_attack};
use crate::classifier::{Classifier, Label};
use crate::coverage::{covering_set, verify, CoverageReport};
use crate::dataset::Manifest;
use crate::error::{Error, Result};
use crate::geometry::{admissible_anchors, Anchor};
use crate::image::Image;
use crate::masking::{apply_mask, FillPolicy};
use crate::tiling::MaskSet;

/// Per-mask labels, index-aligned with the mask set's placements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionVector(pub Vec<Label>);

impl PredictionVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationRule {
    Unanimous,
    ExactK,
    Majority,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AggregationOutcome {
    pub label: Label,
    pub rule: AggregationRule,
    pub tie_broken: bool,
}

/// Aggregates per-mask votes.
///
/// # Panics
///
/// Panics on an empty vote list.
pub fn aggregate(votes: &[Label], k: u32) -> AggregationOutcome {
    assert!(!votes.is_empty(), "cannot aggregate an empty prediction vector");
    let mut counts: BTreeMap<Label, u32> = BTreeMap::new();
    for &l in votes {
        *counts.entry(l).or_insert(0) += 1;
    }
    if counts.len() == 1 {
        return AggregationOutcome { label: votes[0], rule: AggregationRule::Unanimous, tie_broken: false };
    }
    let mut at_k = counts.iter().filter(|(_, &c)| c == k);
    if let (Some((&label, _)), None) = (at_k.next(), at_k.next()) {
        return AggregationOutcome { label, rule: AggregationRule::ExactK, tie_broken: false };
    }
    let best = *counts.values().max().expect("non-empty");
    let mut leaders = counts.iter().filter(|(_, &c)| c == best).map(|(&l, _)| l);
    let label = leaders.next().expect("non-empty");
    AggregationOutcome { label, rule: AggregationRule::Majority, tie_broken: leaders.next().is_some() }
}

/// How free-vote allocations are searched during certification.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarySearch {
    /// Closed-form exact decision, any number of free votes.
    #[default]
    Exact,
    /// Every label assignment; limited to [`crate::adversary::BRUTE_FORCE_MAX_FREE`] free votes.
    BruteForce,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CertifyOptions {
    pub fill: FillPolicy,
    pub search: AdversarySearch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelCount {
    pub label: Label,
    pub count: u32,
}

/// Adversarial vote allocation at the failing anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteAllocation {
    /// Votes fixed by the covering masks.
    pub fixed: Vec<LabelCount>,
    /// How the adversary spends the free votes.
    pub adversarial: Vec<LabelCount>,
    pub outcome: AggregationOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub certified: bool,
    pub predicted: Label,
    pub rule: AggregationRule,
    pub failing_anchor: Option<Anchor>,
    pub failing_allocation: Option<VoteAllocation>,
    pub masks_evaluated: u64,
}

fn check_dims(image: &Image, mask_set: &MaskSet) -> Result<()> {
    let d = mask_set.config.domain;
    if image.width() != d.lx || image.height() != d.ly {
        return Err(Error::Image(format!(
            "image is {}x{}, mask set domain is {d}",
            image.width(),
            image.height()
        )));
    }
    Ok(())
}

/// Classifies each masked view once: exactly `mask_set.len()` classifier calls.
pub fn predict_all<C: Classifier + ?Sized>(
    image: &Image,
    mask_set: &MaskSet,
    classifier: &C,
    fill: &FillPolicy,
) -> Result<PredictionVector> {
    check_dims(image, mask_set)?;
    let mask = mask_set.config.mask;
    let one = |(index, &p): (usize, &crate::geometry::MaskPlacement)| {
        apply_mask(image, p, mask, fill)
            .and_then(|view| classifier.classify(&view))
            .map_err(|e| Error::AtIndex { index, source: Box::new(e) })
    };
    let labels = if classifier.concurrent() {
        mask_set.placements.par_iter().enumerate().map(one).collect::<Result<Vec<_>>>()?
    } else {
        mask_set.placements.iter().enumerate().map(one).collect::<Result<Vec<_>>>()?
    };
    Ok(PredictionVector(labels))
}

pub fn infer<C: Classifier + ?Sized>(
    image: &Image,
    mask_set: &MaskSet,
    classifier: &C,
    fill: &FillPolicy,
) -> Result<AggregationOutcome> {
    let preds = predict_all(image, mask_set, classifier, fill)?;
    Ok(aggregate(preds.labels(), mask_set.k()))
}

/// Coverage-checked mask set with its per-anchor covering sets, reusable
/// across images.
pub struct Certifier<'a> {
    mask_set: &'a MaskSet,
    coverage: CoverageReport,
    anchors: Vec<Anchor>,
    covering: Vec<Vec<u32>>,
}

impl<'a> Certifier<'a> {
    /// Verifies `min_multiplicity >= k` from scratch; fails otherwise.
    pub fn new(mask_set: &'a MaskSet) -> Result<Self> {
        mask_set.validate()?;
        let coverage = verify(mask_set);
        if !coverage.is_k_covered(mask_set.k()) {
            return Err(Error::InsufficientCoverage {
                min_multiplicity: coverage.min_multiplicity,
                k: mask_set.k(),
            });
        }
        let grid = admissible_anchors(mask_set.config.domain, mask_set.config.patch)?;
        let anchors: Vec<Anchor> = grid.iter().collect();
        let covering = anchors
            .par_iter()
            .map(|&a| covering_set(mask_set, a).into_iter().map(|i| i as u32).collect())
            .collect();
        Ok(Self { mask_set, coverage, anchors, covering })
    }

    pub fn coverage(&self) -> &CoverageReport {
        &self.coverage
    }

    pub fn mask_set(&self) -> &MaskSet {
        self.mask_set
    }

    /// Certifies from already computed clean predictions; makes no
    /// classifier calls.
    pub fn certify_predictions(
        &self,
        preds: &PredictionVector,
        truth: Label,
        classes: u32,
        search: AdversarySearch,
    ) -> Result<CertificationResult> {
        let n = self.mask_set.len();
        if preds.len() != n {
            return Err(Error::Classifier(format!("{} predictions for {n} masks", preds.len())));
        }
        if let Some(bad) = preds.labels().iter().find(|l| l.0 >= classes) {
            return Err(Error::Classifier(format!("label {bad} outside {classes} classes")));
        }
        let k = self.mask_set.k();
        let clean = aggregate(preds.labels(), k);

        // anchors sharing a fixed-vote profile share a verdict
        let mut profile_ids: HashMap<Vec<LabelCount>, usize> = HashMap::new();
        let mut profiles: Vec<(Vec<LabelCount>, u32)> = Vec::new();
        let mut anchor_profile = Vec::with_capacity(self.anchors.len());
        for cover in &self.covering {
            let mut counts: BTreeMap<Label, u32> = BTreeMap::new();
            for &i in cover {
                *counts.entry(preds.0[i as usize]).or_insert(0) += 1;
            }
            let key: Vec<LabelCount> = counts.into_iter().map(|(label, count)| LabelCount { label, count }).collect();
            let free = (n - cover.len()) as u32;
            let next = profiles.len();
            let id = *profile_ids.entry(key.clone()).or_insert_with(|| {
                profiles.push((key, free));
                next
            });
            anchor_profile.push(id);
        }

        let verdicts: Vec<Option<Vec<LabelCount>>> = profiles
            .par_iter()
            .map(|(fixed, free)| attack_for_profile(fixed, *free, k, truth, classes, search))
            .collect::<Result<_>>()?;

        let failing = anchor_profile.iter().position(|&p| verdicts[p].is_some());
        let (failing_anchor, failing_allocation) = match failing {
            None => (None, None),
            Some(idx) => {
                let (fixed, _) = &profiles[anchor_profile[idx]];
                let adversarial = verdicts[anchor_profile[idx]].clone().expect("failing profile");
                let votes: Vec<Label> = fixed
                    .iter()
                    .chain(&adversarial)
                    .flat_map(|lc| std::iter::repeat_n(lc.label, lc.count as usize))
                    .collect();
                let outcome = aggregate(&votes, k);
                assert_ne!(outcome.label, truth, "attack witness does not flip the aggregate");
                (
                    Some(self.anchors[idx]),
                    Some(VoteAllocation { fixed: fixed.clone(), adversarial, outcome }),
                )
            }
        };
        Ok(CertificationResult {
            certified: failing_anchor.is_none(),
            predicted: clean.label,
            rule: clean.rule,
            failing_anchor,
            failing_allocation,
            masks_evaluated: n as u64,
        })
    }

    pub fn certify<C: Classifier + ?Sized>(
        &self,
        image: &Image,
        truth: Label,
        classifier: &C,
        options: &CertifyOptions,
    ) -> Result<CertificationResult> {
        let preds = predict_all(image, self.mask_set, classifier, &options.fill)?;
        self.certify_predictions(&preds, truth, classifier.classes(), options.search)
    }
}

fn attack_for_profile(
    fixed: &[LabelCount],
    free: u32,
    k: u32,
    truth: Label,
    classes: u32,
    search: AdversarySearch,
) -> Result<Option<Vec<LabelCount>>> {
    let to_counts = |per_class: Vec<u32>| {
        per_class
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(l, count)| LabelCount { label: Label(l as u32), count })
            .collect::<Vec<_>>()
    };
    match search {
        AdversarySearch::Exact => {
            let mut dense = vec![0u32; classes as usize];
            for lc in fixed {
                dense[lc.label.0 as usize] = lc.count;
            }
            Ok(find_attack(&dense, free, k, truth).map(to_counts))
        }
        AdversarySearch::BruteForce => {
            let labels: Vec<Label> = fixed
                .iter()
                .flat_map(|lc| std::iter::repeat_n(lc.label, lc.count as usize))
                .collect();
            Ok(brute_force_attack(&labels, free, k, truth, classes)?.map(|assignment| {
                let mut per_class = vec![0u32; classes as usize];
                for l in assignment {
                    per_class[l.0 as usize] += 1;
                }
                to_counts(per_class)
            }))
        }
    }
}

/// One-shot certification: checks coverage, classifies each masked view
/// once and runs the worst-case search at every anchor.
pub fn certify<C: Classifier + ?Sized>(
    image: &Image,
    truth: Label,
    mask_set: &MaskSet,
    classifier: &C,
    options: &CertifyOptions,
) -> Result<CertificationResult> {
    Certifier::new(mask_set)?.certify(image, truth, classifier, options)
}

/// Classifier calls made by the two-round pattern: every single-masked view,
/// then every ordered pair of masks applied together. Returns the number of
/// forward passes issued.
pub fn double_masking_passes<C: Classifier + ?Sized>(
    image: &Image,
    mask_set: &MaskSet,
    classifier: &C,
    fill: &FillPolicy,
) -> Result<u64> {
    check_dims(image, mask_set)?;
    let mask = mask_set.config.mask;
    let mut passes = 0u64;
    for &first in &mask_set.placements {
        let once = apply_mask(image, first, mask, fill)?;
        classifier.classify(&once)?;
        passes += 1;
        for &second in &mask_set.placements {
            classifier.classify(&apply_mask(&once, second, mask, fill)?)?;
            passes += 1;
        }
    }
    Ok(passes)
}

/// Accuracy as an exact fraction, rendered with four decimals.
fn render_ratio(num: u64, den: u64) -> String {
    if den == 0 {
        return "0.0000".into();
    }
    // round half up at the fourth decimal
    let scaled = (u128::from(num) * 20_000 / u128::from(den)).div_ceil(2);
    format!("{}.{:04}", scaled / 10_000, scaled % 10_000)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedSample {
    pub index: usize,
    pub name: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub total: u64,
    pub clean_correct: u64,
    pub certified_count: u64,
    pub clean_accuracy: String,
    pub certified_accuracy: String,
    pub excluded: u64,
    pub exclusions: Vec<ExcludedSample>,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub name: String,
    pub image: Image,
    pub label: Label,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    total: u64,
    clean: u64,
    certified: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally { total: self.total + o.total, clean: self.clean + o.clean, certified: self.certified + o.certified }
    }
}

fn summarize(tally: Tally, mut exclusions: Vec<ExcludedSample>) -> EvalSummary {
    exclusions.sort_by_key(|e| e.index);
    EvalSummary {
        total: tally.total,
        clean_correct: tally.clean,
        certified_count: tally.certified,
        clean_accuracy: render_ratio(tally.clean, tally.total),
        certified_accuracy: render_ratio(tally.certified, tally.total),
        excluded: exclusions.len() as u64,
        exclusions,
    }
}

fn evaluate_items<C: Classifier + ?Sized>(
    items: Vec<(String, Result<Image>, Label)>,
    mask_set: &MaskSet,
    classifier: &C,
    options: &CertifyOptions,
) -> Result<EvalSummary> {
    let certifier = Certifier::new(mask_set)?;
    let k = mask_set.k();
    let one = |(index, (name, image, label)): (usize, &(String, Result<Image>, Label))| {
        let run = || -> Result<(bool, bool)> {
            let image = image.as_ref().map_err(|e| Error::Dataset(e.to_string()))?;
            let preds = predict_all(image, mask_set, classifier, &options.fill)?;
            let clean = aggregate(preds.labels(), k).label == *label;
            let cert = certifier.certify_predictions(&preds, *label, classifier.classes(), options.search)?;
            Ok((clean, cert.certified))
        };
        match run() {
            Ok((clean, certified)) => Ok(Tally { total: 1, clean: u64::from(clean), certified: u64::from(certified) }),
            Err(e) => Err(ExcludedSample { index, name: name.clone(), error: e.to_string() }),
        }
    };
    let outcomes: Vec<std::result::Result<Tally, ExcludedSample>> = if classifier.concurrent() {
        items.par_iter().enumerate().map(one).collect()
    } else {
        items.iter().enumerate().map(one).collect()
    };
    let mut tally = Tally::default();
    let mut exclusions = Vec::new();
    for o in outcomes {
        match o {
            Ok(t) => tally = tally.merge(t),
            Err(e) => exclusions.push(e),
        }
    }
    Ok(summarize(tally, exclusions))
}

/// Clean and certified accuracy over a dataset. Images that fail (wrong
/// size, classifier error) are excluded and listed, not fatal.
pub fn evaluate<C: Classifier + ?Sized>(
    samples: &[Sample],
    mask_set: &MaskSet,
    classifier: &C,
    options: &CertifyOptions,
) -> Result<EvalSummary> {
    let items = samples.iter().map(|s| (s.name.clone(), Ok(s.image.clone()), s.label)).collect();
    evaluate_items(items, mask_set, classifier, options)
}

/// [`evaluate`] over a `path,label` manifest; unreadable images are excluded.
pub fn evaluate_manifest<C: Classifier + ?Sized>(
    manifest: impl AsRef<Path>,
    mask_set: &MaskSet,
    classifier: &C,
    options: &CertifyOptions,
) -> Result<EvalSummary> {
    let manifest = Manifest::load(manifest)?;
    let items = manifest
        .entries
        .iter()
        .map(|e| (e.path.display().to_string(), Image::read(&e.path), e.label))
        .collect();
    evaluate_items(items, mask_set, classifier, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{CallCounter, Constant, LookupTable};
    use crate::geometry::{DomainSize, MaskPlacement, MaskSpec, PatchSpec};
    use crate::tiling::{offset_tiling, replicated_tiling, Strategy, TilingConfig};

    fn l(v: &[u32]) -> Vec<Label> {
        v.iter().map(|&x| Label(x)).collect()
    }

    #[test]
    fn aggregation_rules() {
        let o = aggregate(&l(&[5, 5, 5, 5]), 2);
        assert_eq!((o.label, o.rule, o.tie_broken), (Label(5), AggregationRule::Unanimous, false));

        let mut votes = vec![Label(0); 6];
        votes.extend(vec![Label(1); 30]);
        let o = aggregate(&votes, 6);
        assert_eq!((o.label, o.rule), (Label(0), AggregationRule::ExactK));

        let mut votes = vec![Label(0); 4];
        votes.extend(vec![Label(1); 9]);
        let o = aggregate(&votes, 6);
        assert_eq!((o.label, o.rule, o.tie_broken), (Label(1), AggregationRule::Majority, false));

        let o = aggregate(&l(&[0, 0, 0, 1, 1, 1, 2]), 3);
        assert_eq!((o.label, o.rule, o.tie_broken), (Label(0), AggregationRule::Majority, true));
    }

    #[test]
    fn ratio_rendering() {
        assert_eq!(render_ratio(1, 3), "0.3333");
        assert_eq!(render_ratio(2, 3), "0.6667");
        assert_eq!(render_ratio(1, 1), "1.0000");
        assert_eq!(render_ratio(0, 7), "0.0000");
        assert_eq!(render_ratio(1, 20_000), "0.0001");
        assert_eq!(render_ratio(0, 0), "0.0000");
    }

    fn universal() -> MaskSet {
        MaskSet {
            config: TilingConfig::new(DomainSize::square(8).unwrap(), MaskSpec::square(8).unwrap(), PatchSpec::square(3).unwrap(), 1),
            strategy: Strategy::Single,
            placements: vec![MaskPlacement::clipped(0, 0)],
            stride_x: None,
            stride_y: None,
        }
    }

    #[test]
    fn universal_mask_certifies() {
        let set = universal();
        let img = Image::filled(8, 8, 1, 40).unwrap();
        let c = Constant::new(Label(2), 4).unwrap();
        let r = certify(&img, Label(2), &set, &c, &CertifyOptions::default()).unwrap();
        assert!(r.certified);
        assert_eq!(r.masks_evaluated, 1);
        assert!(r.failing_anchor.is_none() && r.failing_allocation.is_none());
        let r = certify(&img, Label(1), &set, &c, &CertifyOptions::default()).unwrap();
        assert!(!r.certified);
    }

    #[test]
    fn certify_rejects_insufficient_coverage() {
        let cfg = TilingConfig::new(DomainSize::square(20).unwrap(), MaskSpec::square(8).unwrap(), PatchSpec::square(3).unwrap(), 2);
        let mut set = replicated_tiling(&cfg).unwrap();
        set.placements.remove(0);
        let img = Image::filled(20, 20, 1, 0).unwrap();
        let c = Constant::new(Label(0), 2).unwrap();
        let err = certify(&img, Label(0), &set, &c, &CertifyOptions::default()).unwrap_err();
        assert!(err.to_string().starts_with("mask set does not k-cover patch"));
    }

    #[test]
    fn exact_k_exploit_is_found() {
        // every view classified as y; some anchor leaves >= k free votes
        let cfg = TilingConfig::new(DomainSize::square(16).unwrap(), MaskSpec::square(8).unwrap(), PatchSpec::square(3).unwrap(), 2).with_folds(2, 1);
        let set = offset_tiling(&cfg).unwrap();
        let c = Constant::new(Label(1), 3).unwrap();
        let img = Image::filled(16, 16, 1, 10).unwrap();
        let r = certify(&img, Label(1), &set, &c, &CertifyOptions::default()).unwrap();
        assert!(!r.certified);
        let alloc = r.failing_allocation.unwrap();
        assert_ne!(alloc.outcome.label, Label(1));
        assert!(r.failing_anchor.is_some());
    }

    #[test]
    fn certify_makes_exactly_n_calls() {
        let cfg = TilingConfig::new(DomainSize::square(12).unwrap(), MaskSpec::square(6).unwrap(), PatchSpec::square(2).unwrap(), 1);
        let set = replicated_tiling(&cfg).unwrap();
        let counter = CallCounter::new(LookupTable::new(Label(0), 2).unwrap());
        let img = Image::filled(12, 12, 1, 3).unwrap();
        certify(&img, Label(0), &set, &counter, &CertifyOptions::default()).unwrap();
        assert_eq!(counter.calls(), set.len() as u64);
        counter.reset();
        assert_eq!(double_masking_passes(&img, &set, &counter, &FillPolicy::Zero).unwrap(), counter.calls());
        let n = set.len() as u64;
        assert_eq!(counter.calls(), n + n * n);
    }

    #[test]
    fn prediction_count_mismatch() {
        let set = universal();
        let cert = Certifier::new(&set).unwrap();
        let err = cert.certify_predictions(&PredictionVector(l(&[0, 0])), Label(0), 2, AdversarySearch::Exact);
        assert!(err.is_err());
        let err = cert.certify_predictions(&PredictionVector(l(&[5])), Label(0), 2, AdversarySearch::Exact);
        assert!(err.is_err());
    }

    #[test]
    fn evaluation_extremes() {
        let set = universal();
        let samples: Vec<Sample> = (0..4)
            .map(|i| Sample { name: format!("s{i}"), image: Image::filled(8, 8, 1, i * 10).unwrap(), label: Label(1) })
            .collect();
        let right = Constant::new(Label(1), 3).unwrap();
        let s = evaluate(&samples, &set, &right, &CertifyOptions::default()).unwrap();
        assert_eq!((s.total, s.clean_correct, s.certified_count), (4, 4, 4));
        assert_eq!((s.clean_accuracy.as_str(), s.certified_accuracy.as_str()), ("1.0000", "1.0000"));

        let wrong = Constant::new(Label(2), 3).unwrap();
        let s = evaluate(&samples, &set, &wrong, &CertifyOptions::default()).unwrap();
        assert_eq!((s.clean_accuracy.as_str(), s.certified_accuracy.as_str()), ("0.0000", "0.0000"));
    }

    #[test]
    fn evaluation_excludes_bad_images() {
        let set = universal();
        let samples = vec![
            Sample { name: "ok".into(), image: Image::filled(8, 8, 1, 0).unwrap(), label: Label(0) },
            Sample { name: "small".into(), image: Image::filled(7, 8, 1, 0).unwrap(), label: Label(0) },
        ];
        let c = Constant::new(Label(0), 2).unwrap();
        let s = evaluate(&samples, &set, &c, &CertifyOptions::default()).unwrap();
        assert_eq!((s.total, s.excluded), (1, 1));
        assert_eq!(s.exclusions[0].name, "small");
        assert_eq!(s.exclusions[0].index, 1);
    }
}

//! Small random instances and an exhaustive patch-attack simulator shared by
//! the soundness and acceptance suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use certmask::certify::{aggregate, infer};
use certmask::classifier::{image_digest, Label, LookupTable};
use certmask::coverage::{covering_set, verify};
use certmask::geometry::{admissible_anchors, DomainSize, MaskPlacement, MaskSpec, PatchSpec};
use certmask::image::Image;
use certmask::masking::{apply_patch, masked_views, FillPolicy};
use certmask::tiling::{MaskSet, Strategy, TilingConfig};
use rand::Rng;

pub struct Instance {
    pub set: MaskSet,
    pub image: Image,
    pub table: LookupTable,
    pub truth: Label,
    pub classes: u32,
    pub fill: FillPolicy,
}

fn noise(rng: &mut impl Rng, w: u32, h: u32) -> Image {
    Image::new(w, h, 1, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

/// Up to `max_masks` random placements over a domain of side <= 16; `k` is
/// whatever multiplicity the placements happen to reach (at least 1).
pub fn random_instance(rng: &mut impl Rng, max_masks: usize) -> Instance {
    loop {
        let domain = DomainSize::new(rng.gen_range(4..=16), rng.gen_range(4..=16)).unwrap();
        let patch = PatchSpec::new(rng.gen_range(1..=3.min(domain.lx)), rng.gen_range(1..=3.min(domain.ly))).unwrap();
        let mask = MaskSpec::new(
            rng.gen_range(patch.px..=domain.lx + 2),
            rng.gen_range(patch.py..=domain.ly + 2),
        )
        .unwrap();
        let wrap = rng.gen_bool(0.3);
        let n = rng.gen_range(1..=max_masks);
        let placements = (0..n)
            .map(|_| {
                let x = rng.gen_range(-2..domain.lx as i64);
                let y = rng.gen_range(-2..domain.ly as i64);
                if wrap { MaskPlacement::wrapped(x, y, domain) } else { MaskPlacement::clipped(x, y) }
            })
            .collect();
        let mut set = MaskSet {
            config: TilingConfig { domain, mask, patch, k: 1, m: 1, n: 1 },
            strategy: if wrap { Strategy::Offset } else { Strategy::Single },
            placements,
            stride_x: None,
            stride_y: None,
        };
        let report = verify(&set);
        if report.min_multiplicity == 0 {
            continue;
        }
        set.config.k = rng.gen_range(1..=report.min_multiplicity);
        set.config.m = set.config.k;

        let classes = rng.gen_range(2..=4);
        let truth = Label(rng.gen_range(0..classes));
        let image = noise(rng, domain.lx, domain.ly);
        let fill = match rng.gen_range(0..3) {
            0 => FillPolicy::Zero,
            1 => FillPolicy::Mean,
            _ => FillPolicy::Constant(vec![rng.gen()]),
        };
        let mut table = LookupTable::new(Label(rng.gen_range(0..classes)), classes).unwrap();
        let agree = rng.gen_range(0.5..=1.0);
        for view in masked_views(&image, &set, &fill).unwrap() {
            let digest = image_digest(&view);
            if table.get(digest).is_none() {
                let label = if rng.gen_bool(agree) { truth } else { Label(rng.gen_range(0..classes)) };
                table.insert_digest(digest, label).unwrap();
            }
        }
        return Instance { set, image, table, truth, classes, fill };
    }
}

pub struct AttackOutcome {
    /// Some patch position and lookup-table completion changes the output.
    pub broken: bool,
    pub anchors: u64,
    pub assignments: u64,
    pub full_pipeline_runs: u64,
    /// Largest number of independently labelled views at one anchor.
    pub max_free_views: usize,
}

/// Places a random patch at every admissible anchor and tries every label
/// the attacker's lookup table could give the views the patch changes.
/// Views the patch does not change keep their clean labels.
pub fn simulate_attacks(inst: &Instance, rng: &mut impl Rng) -> AttackOutcome {
    let cfg = inst.set.config;
    let clean_views = masked_views(&inst.image, &inst.set, &inst.fill).unwrap();
    let clean_digests: Vec<u64> = clean_views.iter().map(image_digest).collect();
    let known: HashMap<u64, Label> = clean_digests.iter().map(|&d| (d, inst.table.get(d).unwrap())).collect();
    let mut cache: HashMap<(Vec<u32>, Vec<u32>), bool> = HashMap::new();
    let mut out = AttackOutcome { broken: false, anchors: 0, assignments: 0, full_pipeline_runs: 0, max_free_views: 0 };

    for anchor in admissible_anchors(cfg.domain, cfg.patch).unwrap().iter() {
        out.anchors += 1;
        let content = noise(rng, cfg.patch.px, cfg.patch.py);
        let attacked = apply_patch(&inst.image, anchor, cfg.patch, &content).unwrap();
        let views = masked_views(&attacked, &inst.set, &inst.fill).unwrap();
        for i in covering_set(&inst.set, anchor) {
            assert_eq!(views[i], clean_views[i], "covering mask {i} leaks the patch at {anchor:?}");
        }

        // pinned votes: views whose bytes the table already answers
        let mut pinned = vec![0u32; inst.classes as usize];
        let mut free: BTreeMap<u64, u32> = BTreeMap::new();
        for v in &views {
            let d = image_digest(v);
            match known.get(&d) {
                Some(l) => pinned[l.0 as usize] += 1,
                None => *free.entry(d).or_insert(0) += 1,
            }
        }
        let free_digests: Vec<u64> = free.keys().copied().collect();
        out.max_free_views = out.max_free_views.max(free_digests.len());
        let weights: Vec<u32> = free.values().copied().collect();
        let mut key_weights = weights.clone();
        key_weights.sort_unstable();
        let key = (pinned.clone(), key_weights);
        if let Some(&broken) = cache.get(&key) {
            out.broken |= broken;
            continue;
        }

        let mut broken = false;
        let mut digits = vec![0u32; free_digests.len()];
        loop {
            out.assignments += 1;
            let mut votes = Vec::with_capacity(inst.set.len());
            for (c, &n) in pinned.iter().enumerate() {
                votes.extend(std::iter::repeat_n(Label(c as u32), n as usize));
            }
            for (&d, &w) in digits.iter().zip(&weights) {
                votes.extend(std::iter::repeat_n(Label(d), w as usize));
            }
            let flipped = aggregate(&votes, cfg.k).label != inst.truth;
            // run the real pipeline on a sample of completions
            if flipped || digits.iter().all(|&d| d == digits.first().copied().unwrap_or(0)) {
                let mut table = inst.table.clone();
                for (&digest, &label) in free_digests.iter().zip(&digits) {
                    table.insert_digest(digest, Label(label)).unwrap();
                }
                let got = infer(&attacked, &inst.set, &table, &inst.fill).unwrap().label;
                assert_eq!(got != inst.truth, flipped, "label-level and pipeline verdicts differ");
                out.full_pipeline_runs += 1;
            }
            if flipped {
                broken = true;
                break;
            }
            let mut i = digits.len();
            let done = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < inst.classes {
                    break false;
                }
                digits[i] = 0;
            };
            if done {
                break;
            }
        }
        cache.insert(key, broken);
        out.broken |= broken;
    }
    out
}

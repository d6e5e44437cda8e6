//! Mask-set construction (single cover, replicated tiling, offset tiling) and
//! the closed-form mask-count bounds.
//!
//! Constructions work on the discrete grid: a mask of extent `M` covers
//! `E = M - p + 1` consecutive anchors of a patch of extent `p`. The bounds in
//! [`theoretical_bounds`] use the continuous effective length `M - p` instead and
//! are reported alongside, never substituted for, the constructive counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{admissible_anchors, DomainSize, MaskPlacement, MaskSpec, PatchSpec};

pub const MASK_SET_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TilingConfig {
    pub domain: DomainSize,
    pub mask: MaskSpec,
    pub patch: PatchSpec,
    pub k: u32,
    pub m: u32,
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Single,
    Replicated,
    Offset,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Single => "single",
            Strategy::Replicated => "replicated",
            Strategy::Offset => "offset",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Strategy::Single),
            "replicated" => Ok(Strategy::Replicated),
            "offset" => Ok(Strategy::Offset),
            other => Err(Error::Geometry(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Splits `k` into `(m, n)` with `m` the largest divisor of `k` not above `sqrt(k)`.
pub fn default_folds(k: u32) -> (u32, u32) {
    let m = (1..=k)
        .take_while(|d| u64::from(*d) * u64::from(*d) <= u64::from(k))
        .filter(|d| k.is_multiple_of(*d))
        .last()
        .unwrap_or(1);
    (m, k / m.max(1))
}

impl TilingConfig {
    /// Config with the default `k = m * n` split.
    pub fn new(domain: DomainSize, mask: MaskSpec, patch: PatchSpec, k: u32) -> Self {
        let (m, n) = default_folds(k);
        Self { domain, mask, patch, k, m, n }
    }

    pub fn with_folds(mut self, m: u32, n: u32) -> Self {
        self.m = m;
        self.n = n;
        self
    }

    /// Discrete effective extents `(mx - px + 1, my - py + 1)`.
    pub fn effective_extent(&self) -> (u32, u32) {
        (
            (self.mask.mx + 1).saturating_sub(self.patch.px),
            (self.mask.my + 1).saturating_sub(self.patch.py),
        )
    }

    fn check_common(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.n == 0 {
            return Err(Error::Geometry("k, m and n must be positive".into()));
        }
        admissible_anchors(self.domain, self.patch)?;
        if self.mask.mx < self.patch.px || self.mask.my < self.patch.py {
            return Err(Error::MaskCannotCoverPatch);
        }
        Ok(())
    }

    /// Checks the invariants a strategy relies on.
    pub fn validate(&self, strategy: Strategy) -> Result<()> {
        self.check_common()?;
        if strategy == Strategy::Offset {
            if u64::from(self.m) * u64::from(self.n) != u64::from(self.k) {
                return Err(Error::Geometry(format!(
                    "offset tiling needs k = m * n, got k={} m={} n={}",
                    self.k, self.m, self.n
                )));
            }
            let (ex, ey) = self.effective_extent();
            if ex / self.m == 0 || ey / self.n == 0 {
                return Err(Error::StrideUnderflow);
            }
            // a mask wider than the image sees every offset once, so there
            // must be at least m (n) distinct offsets
            let (sx, sy) = self.offset_strides();
            if self.domain.lx.div_ceil(sx) < self.m || self.domain.ly.div_ceil(sy) < self.n {
                return Err(Error::Geometry(format!(
                    "offset tiling of {} needs at least {}x{} distinct offsets",
                    self.domain, self.m, self.n
                )));
            }
        }
        Ok(())
    }

    /// Integer offset strides `(floor(Ex / m), floor(Ey / n))`.
    pub fn offset_strides(&self) -> (u32, u32) {
        let (ex, ey) = self.effective_extent();
        (ex / self.m.max(1), ey / self.n.max(1))
    }
}

/// A constructed mask set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskSet {
    pub config: TilingConfig,
    pub strategy: Strategy,
    pub placements: Vec<MaskPlacement>,
    pub stride_x: Option<u32>,
    pub stride_y: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct MaskSetDoc {
    version: u32,
    domain: DomainSize,
    mask: MaskSpec,
    patch: PatchSpec,
    k: u32,
    m: u32,
    n: u32,
    strategy: Strategy,
    stride_x: Option<u32>,
    stride_y: Option<u32>,
    placements: Vec<MaskPlacement>,
}

impl MaskSet {
    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// Coverage multiplicity the set is meant to achieve.
    pub fn k(&self) -> u32 {
        self.config.k
    }

    /// Structural checks only: a file with a missing placement still loads
    /// (coverage is the verifier's business, not the loader's).
    pub fn validate(&self) -> Result<()> {
        if self.placements.is_empty() {
            return Err(Error::MaskSet("no placements".into()));
        }
        if self.config.k == 0 {
            return Err(Error::MaskSet("k must be positive".into()));
        }
        let want_wrap = self.strategy == Strategy::Offset;
        for (i, p) in self.placements.iter().enumerate() {
            if p.wrap != want_wrap {
                return Err(Error::MaskSet(format!(
                    "placement {i}: wrap={} does not match strategy {}",
                    p.wrap, self.strategy
                )));
            }
            if !p.is_canonical(self.config.domain) {
                return Err(Error::MaskSet(format!(
                    "placement {i}: wrapped coordinates ({}, {}) not canonical",
                    p.x0, p.y0
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.doc())?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: MaskSetDoc = serde_json::from_str(s)?;
        if doc.version != MASK_SET_VERSION {
            return Err(Error::MaskSet(format!("unsupported version {}", doc.version)));
        }
        let set = MaskSet {
            config: TilingConfig {
                domain: DomainSize::new(doc.domain.lx, doc.domain.ly)?,
                mask: MaskSpec::new(doc.mask.mx, doc.mask.my)?,
                patch: PatchSpec::new(doc.patch.px, doc.patch.py)?,
                k: doc.k,
                m: doc.m,
                n: doc.n,
            },
            strategy: doc.strategy,
            placements: doc.placements,
            stride_x: doc.stride_x,
            stride_y: doc.stride_y,
        };
        set.validate()?;
        Ok(set)
    }

    fn doc(&self) -> MaskSetDoc {
        let c = &self.config;
        MaskSetDoc {
            version: MASK_SET_VERSION,
            domain: c.domain,
            mask: c.mask,
            patch: c.patch,
            k: c.k,
            m: c.m,
            n: c.n,
            strategy: self.strategy,
            stride_x: self.stride_x,
            stride_y: self.stride_y,
            placements: self.placements.clone(),
        }
    }
}

/// Mask count each strategy's construction produces for `config`.
pub fn constructive_count(config: &TilingConfig, strategy: Strategy) -> Result<u64> {
    config.validate(strategy)?;
    let (ex, ey) = config.effective_extent();
    let single = |c: &TilingConfig| {
        u64::from((c.domain.lx - c.patch.px + 1).div_ceil(ex))
            * u64::from((c.domain.ly - c.patch.py + 1).div_ceil(ey))
    };
    Ok(match strategy {
        Strategy::Single => single(config),
        Strategy::Replicated => u64::from(config.k) * single(config),
        Strategy::Offset => {
            let (sx, sy) = config.offset_strides();
            u64::from(config.domain.lx.div_ceil(sx)) * u64::from(config.domain.ly.div_ceil(sy))
        }
    })
}

/// Start offsets of a 1-D single cover: `0, E, 2E, ...` with `E = M - p + 1`.
/// The last mask may overhang `L`.
pub fn single_cover_1d(len: u32, mask: u32, patch: u32) -> Result<Vec<u32>> {
    if mask < patch {
        return Err(Error::MaskCannotCoverPatch);
    }
    if patch == 0 || patch > len {
        return Err(Error::PatchExceedsDomain);
    }
    let step = mask - patch + 1;
    let count = (len - patch + 1).div_ceil(step);
    Ok((0..count).map(|i| i * step).collect())
}

fn single_cover_placements(config: &TilingConfig) -> Result<Vec<MaskPlacement>> {
    let xs = single_cover_1d(config.domain.lx, config.mask.mx, config.patch.px)?;
    let ys = single_cover_1d(config.domain.ly, config.mask.my, config.patch.py)?;
    Ok(ys
        .iter()
        .flat_map(|&y| {
            xs.iter()
                .map(move |&x| MaskPlacement::clipped(i64::from(x), i64::from(y)))
        })
        .collect())
}

/// Row-by-row single cover (`k = 1`). The returned set's config carries
/// `k = m = n = 1` regardless of the input.
pub fn single_cover_2d(config: &TilingConfig) -> Result<MaskSet> {
    let config = TilingConfig { k: 1, m: 1, n: 1, ..*config };
    config.validate(Strategy::Single)?;
    Ok(MaskSet {
        placements: single_cover_placements(&config)?,
        config,
        strategy: Strategy::Single,
        stride_x: None,
        stride_y: None,
    })
}

/// `k` stacked copies of the single cover.
pub fn replicated_tiling(config: &TilingConfig) -> Result<MaskSet> {
    config.validate(Strategy::Replicated)?;
    let base = single_cover_placements(config)?;
    let mut placements = Vec::with_capacity(base.len() * config.k as usize);
    for _ in 0..config.k {
        placements.extend_from_slice(&base);
    }
    Ok(MaskSet {
        config: *config,
        strategy: Strategy::Replicated,
        placements,
        stride_x: None,
        stride_y: None,
    })
}

/// Interleaved wrapped grids with strides `floor(Ex / m)`, `floor(Ey / n)`.
///
/// Every anchor is covered by at least `m` columns of masks and `n` rows of
/// masks, so by at least `k = m * n` masks.
pub fn offset_tiling(config: &TilingConfig) -> Result<MaskSet> {
    config.validate(Strategy::Offset)?;
    let (sx, sy) = config.offset_strides();
    let dom = config.domain;
    let mut placements: Vec<MaskPlacement> = (0..dom.ly.div_ceil(sy))
        .flat_map(|j| {
            (0..dom.lx.div_ceil(sx)).map(move |i| {
                MaskPlacement::wrapped(i64::from(i * sx), i64::from(j * sy), dom)
            })
        })
        .collect();
    placements.sort_by_key(|p| (p.y0, p.x0));
    placements.dedup();
    Ok(MaskSet {
        config: *config,
        strategy: Strategy::Offset,
        placements,
        stride_x: Some(sx),
        stride_y: Some(sy),
    })
}

pub fn build(config: &TilingConfig, strategy: Strategy) -> Result<MaskSet> {
    match strategy {
        Strategy::Single => single_cover_2d(config),
        Strategy::Replicated => replicated_tiling(config),
        Strategy::Offset => offset_tiling(config),
    }
}

/// Exact non-negative rational, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Closed-form mask-count bounds, with the patch extent standing in for `2r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub single_lb_1d_x: u64,
    pub single_lb_1d_y: u64,
    pub single_lb_2d: u64,
    pub kfold_lb: u64,
    pub replicated_count: u64,
    pub offset_count: u64,
    pub approx_ratio: Ratio,
}

pub fn theoretical_bounds(config: &TilingConfig) -> Result<BoundsReport> {
    let TilingConfig { domain, mask, patch, k, m, n } = *config;
    admissible_anchors(domain, patch)?;
    if mask.mx <= patch.px || mask.my <= patch.py {
        return Err(Error::MaskCannotCoverPatch);
    }
    if k == 0 || m == 0 || n == 0 {
        return Err(Error::Geometry("k, m and n must be positive".into()));
    }
    let (lx, ly) = (u64::from(domain.lx), u64::from(domain.ly));
    let wx = u64::from(mask.mx - patch.px);
    let wy = u64::from(mask.my - patch.py);
    let k = u64::from(k);

    let single_lb_1d_x = lx.div_ceil(wx);
    let single_lb_1d_y = ly.div_ceil(wy);
    let single_lb_2d = (lx * ly).div_ceil(wx * wy);
    let kfold_lb = k * single_lb_2d;
    let replicated_count = k * single_lb_1d_x * single_lb_1d_y;
    let offset_count = (u64::from(m) * lx).div_ceil(wx) * (u64::from(n) * ly).div_ceil(wy);
    Ok(BoundsReport {
        single_lb_1d_x,
        single_lb_1d_y,
        single_lb_2d,
        kfold_lb,
        replicated_count,
        offset_count,
        approx_ratio: Ratio::new(replicated_count, kfold_lb),
    })
}

/// Classifier forward passes for one certification: a single masking round
/// versus the two-round (first round plus all pairs) pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardPassCounts {
    pub certmask: u64,
    pub double_masking: u64,
}

pub fn forward_pass_counts(n: u64) -> ForwardPassCounts {
    ForwardPassCounts {
        certmask: n,
        double_masking: n + n * n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: u32, mask: u32, patch: u32, k: u32) -> TilingConfig {
        TilingConfig::new(
            DomainSize::square(l).unwrap(),
            MaskSpec::square(mask).unwrap(),
            PatchSpec::square(patch).unwrap(),
            k,
        )
    }

    fn imagenet() -> TilingConfig {
        cfg(224, 56, 39, 6).with_folds(3, 2)
    }

    #[test]
    fn bounds_for_imagenet_three_percent() {
        let b = theoretical_bounds(&imagenet()).unwrap();
        assert_eq!((b.single_lb_1d_x, b.single_lb_1d_y), (14, 14));
        assert_eq!(b.single_lb_2d, 174);
        assert_eq!(b.kfold_lb, 1044);
        assert_eq!(b.replicated_count, 1176);
        assert_eq!(b.offset_count, 1080);
        assert_eq!(b.approx_ratio, Ratio::new(1176, 1044));
    }

    #[test]
    fn bounds_exact_tiling_ratio_one() {
        let c = TilingConfig::new(
            DomainSize::square(100).unwrap(),
            MaskSpec::square(30).unwrap(),
            PatchSpec::square(10).unwrap(),
            1,
        );
        let b = theoretical_bounds(&c).unwrap();
        assert_eq!(b.single_lb_1d_x, 5);
        assert_eq!((b.replicated_count, b.kfold_lb), (25, 25));
        assert_eq!(b.approx_ratio, Ratio { num: 1, den: 1 });
    }

    #[test]
    fn bounds_worst_case_ratio_two() {
        // L / (M - p) = 18 / 17, just above one on both axes
        let b = theoretical_bounds(&cfg(18, 18, 1, 1)).unwrap();
        assert_eq!(b.replicated_count, 4);
        assert_eq!(b.kfold_lb, 2);
        assert_eq!(b.approx_ratio, Ratio { num: 2, den: 1 });
    }

    #[test]
    fn bounds_reject_mask_not_larger_than_patch() {
        let err = theoretical_bounds(&cfg(64, 10, 10, 1)).unwrap_err();
        assert_eq!(err.to_string(), "mask cannot cover patch");
    }

    #[test]
    fn one_dimensional_single_cover() {
        assert_eq!(single_cover_1d(10, 5, 3).unwrap(), vec![0, 3, 6]);
        assert_eq!(single_cover_1d(17, 17, 4).unwrap(), vec![0]);
        let xs = single_cover_1d(224, 56, 39).unwrap();
        assert_eq!(xs.len(), 11);
        assert_eq!(xs[1], 18);
        assert!(single_cover_1d(10, 2, 3).is_err());
    }

    #[test]
    fn constructive_counts_imagenet() {
        let c = imagenet();
        assert_eq!(single_cover_2d(&c).unwrap().len(), 121);
        assert_eq!(replicated_tiling(&c).unwrap().len(), 726);
        let off = offset_tiling(&c).unwrap();
        assert_eq!((off.stride_x, off.stride_y), (Some(6), Some(9)));
        assert_eq!(off.len(), 950);
        for s in [Strategy::Single, Strategy::Replicated, Strategy::Offset] {
            assert_eq!(constructive_count(&c, s).unwrap(), build(&c, s).unwrap().len() as u64);
        }
    }

    #[test]
    fn offset_rejects_too_few_distinct_offsets() {
        // 3-high masks on a 2-row image: only two row offsets exist
        let c = TilingConfig {
            domain: DomainSize::new(7, 2).unwrap(),
            mask: MaskSpec::new(1, 3).unwrap(),
            patch: PatchSpec::square(1).unwrap(),
            k: 3,
            m: 1,
            n: 3,
        };
        assert!(offset_tiling(&c).is_err());
        assert!(replicated_tiling(&c).is_ok());
    }

    #[test]
    fn replicated_k1_is_single_cover() {
        let c = cfg(40, 12, 5, 1);
        assert_eq!(
            replicated_tiling(&c).unwrap().placements,
            single_cover_2d(&c).unwrap().placements
        );
    }

    #[test]
    fn offset_unit_folds_use_effective_extent() {
        let c = cfg(40, 12, 5, 1);
        let off = offset_tiling(&c).unwrap();
        assert_eq!((off.stride_x, off.stride_y), (Some(8), Some(8)));
        assert_eq!(off.len(), 25);
        assert!(off.placements.iter().all(|p| p.wrap));
    }

    #[test]
    fn offset_stride_underflow() {
        // E = 2 per axis cannot host three interleaved columns
        let c = cfg(224, 16, 15, 6).with_folds(3, 2);
        assert_eq!(
            offset_tiling(&c).unwrap_err().to_string(),
            "k too large for mask/patch geometry"
        );
    }

    #[test]
    fn offset_requires_factorization() {
        let c = cfg(64, 20, 5, 6).with_folds(2, 2);
        assert!(offset_tiling(&c).is_err());
    }

    #[test]
    fn default_fold_split() {
        assert_eq!(default_folds(6), (2, 3));
        assert_eq!(default_folds(9), (3, 3));
        assert_eq!(default_folds(7), (1, 7));
        assert_eq!(default_folds(1), (1, 1));
        assert_eq!(default_folds(12), (3, 4));
    }

    #[test]
    fn forward_passes() {
        assert_eq!(
            forward_pass_counts(36),
            ForwardPassCounts { certmask: 36, double_masking: 1332 }
        );
        assert_eq!(forward_pass_counts(1), ForwardPassCounts { certmask: 1, double_masking: 2 });
        // ratio (n + n^2) / n = n + 1 grows linearly
        for n in 6..=100u64 {
            let c = forward_pass_counts(n);
            assert_eq!(c.double_masking / c.certmask, n + 1);
            assert_eq!(c.double_masking % c.certmask, 0);
        }
    }

    #[test]
    fn mask_set_json_shape() {
        let set = offset_tiling(&cfg(20, 8, 3, 4).with_folds(2, 2)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&set.to_json().unwrap()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        for key in [
            "version", "domain", "mask", "patch", "k", "m", "n", "strategy", "stride_x",
            "stride_y", "placements",
        ] {
            assert!(keys.contains(&key), "missing {key}");
        }
        assert_eq!(v["domain"]["lx"], 20);
        assert_eq!(v["strategy"], "offset");
        assert_eq!(v["placements"][0], serde_json::json!({"x0": 0, "y0": 0, "wrap": true}));
        assert_eq!(MaskSet::from_json(&set.to_json().unwrap()).unwrap(), set);
    }

    #[test]
    fn loader_rejects_structural_corruption() {
        let set = offset_tiling(&cfg(20, 8, 3, 4).with_folds(2, 2)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&set.to_json().unwrap()).unwrap();
        v["placements"][0]["x0"] = serde_json::json!(25);
        assert!(MaskSet::from_json(&v.to_string()).is_err());
        v["placements"] = serde_json::json!([]);
        assert!(MaskSet::from_json(&v.to_string()).is_err());

        // a missing placement is structurally fine
        let mut short = set.clone();
        short.placements.pop();
        assert!(MaskSet::from_json(&short.to_json().unwrap()).is_ok());
    }
}

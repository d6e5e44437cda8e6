//! Exhaustive coverage oracle.
//!
//! For every admissible anchor the verifier counts the masks that fully cover
//! the patch there, using nothing but [`fully_covers`]. It never trusts the
//! strategy metadata of the set it checks.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{admissible_anchors, fully_covers, Anchor};
use crate::tiling::MaskSet;

pub const DEFAULT_GAP_LIMIT: usize = 128;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub min_multiplicity: u32,
    pub max_multiplicity: u32,
    /// multiplicity -> number of anchors with that multiplicity
    pub histogram: BTreeMap<u32, u64>,
    /// First anchors (row-major) with multiplicity below `k`, capped.
    pub gaps: Vec<Anchor>,
    /// Exact number of anchors below `k`, regardless of the cap.
    pub gap_count: u64,
    pub anchors_checked: u64,
}

impl CoverageReport {
    pub fn is_k_covered(&self, k: u32) -> bool {
        self.anchors_checked > 0 && self.min_multiplicity >= k
    }
}

/// Multiplicity of one anchor.
pub fn multiplicity(mask_set: &MaskSet, anchor: Anchor) -> u32 {
    let c = &mask_set.config;
    mask_set
        .placements
        .iter()
        .filter(|&&p| fully_covers(p, c.mask, anchor, c.patch, c.domain))
        .count() as u32
}

/// Indices of the masks that fully cover the patch at `anchor`, ascending.
pub fn covering_set(mask_set: &MaskSet, anchor: Anchor) -> Vec<usize> {
    let c = &mask_set.config;
    mask_set
        .placements
        .iter()
        .enumerate()
        .filter(|(_, &p)| fully_covers(p, c.mask, anchor, c.patch, c.domain))
        .map(|(i, _)| i)
        .collect()
}

pub fn verify(mask_set: &MaskSet) -> CoverageReport {
    verify_with_limit(mask_set, DEFAULT_GAP_LIMIT)
}

pub fn verify_with_limit(mask_set: &MaskSet, gap_limit: usize) -> CoverageReport {
    let k = mask_set.k();
    let Ok(grid) = admissible_anchors(mask_set.config.domain, mask_set.config.patch) else {
        return CoverageReport {
            min_multiplicity: 0,
            max_multiplicity: 0,
            histogram: BTreeMap::new(),
            gaps: Vec::new(),
            gap_count: 0,
            anchors_checked: 0,
        };
    };

    let rows: Vec<Vec<u32>> = (0..grid.rows())
        .into_par_iter()
        .map(|ay| grid.row(ay).map(|a| multiplicity(mask_set, a)).collect())
        .collect();

    let mut histogram = BTreeMap::new();
    let mut gaps = Vec::new();
    let mut gap_count = 0u64;
    for (ay, row) in rows.iter().enumerate() {
        for (ax, &mult) in row.iter().enumerate() {
            *histogram.entry(mult).or_insert(0u64) += 1;
            if mult < k {
                gap_count += 1;
                if gaps.len() < gap_limit {
                    gaps.push(Anchor { ax: ax as u32, ay: ay as u32 });
                }
            }
        }
    }
    CoverageReport {
        min_multiplicity: histogram.keys().next().copied().unwrap_or(0),
        max_multiplicity: histogram.keys().next_back().copied().unwrap_or(0),
        histogram,
        gaps,
        gap_count,
        anchors_checked: grid.count(),
    }
}

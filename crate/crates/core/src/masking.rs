//! Patch application and mask application.
//!
//! The core property is neutralization: if a placement fully covers the patch
//! at some anchor, masking the patched image gives exactly the same bytes as
//! masking the clean one. Every fill policy here is chosen so that property
//! holds, which is why [`FillPolicy::Mean`] averages only the pixels the mask
//! leaves visible.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{admissible_anchors, mask_pixel_set, Anchor, DomainSize, MaskPlacement, MaskSpec, PatchSpec};
use crate::image::Image;
use crate::tiling::MaskSet;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "values")]
pub enum FillPolicy {
    #[default]
    Zero,
    /// One value per channel, or a single value for all channels.
    Constant(Vec<u8>),
    /// Rounded per-channel mean of the pixels outside the mask.
    Mean,
}

impl FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(FillPolicy::Zero),
            "mean" => Ok(FillPolicy::Mean),
            _ => {
                let values = s
                    .strip_prefix("constant:")
                    .ok_or_else(|| Error::Image(format!("unknown fill {s:?}")))?;
                let values = values
                    .split(',')
                    .map(|v| v.trim().parse::<u8>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Image(format!("fill values must be 0..=255: {s:?}")))?;
                if values.is_empty() {
                    return Err(Error::Image("constant fill needs a value".into()));
                }
                Ok(FillPolicy::Constant(values))
            }
        }
    }
}

impl FillPolicy {
    fn values_for(&self, image: &Image, masked: &[crate::geometry::Rect]) -> Result<Vec<u8>> {
        let c = image.channels() as usize;
        match self {
            FillPolicy::Zero => Ok(vec![0; c]),
            FillPolicy::Constant(v) if v.len() == 1 => Ok(vec![v[0]; c]),
            FillPolicy::Constant(v) if v.len() == c => Ok(v.clone()),
            FillPolicy::Constant(v) => Err(Error::Image(format!(
                "constant fill has {} values for a {c}-channel image",
                v.len()
            ))),
            FillPolicy::Mean => {
                // rects are disjoint, so visible = whole image minus each rect
                let mut sums = vec![0u64; c];
                for px in image.pixels().chunks_exact(c) {
                    for (s, &v) in sums.iter_mut().zip(px) {
                        *s += u64::from(v);
                    }
                }
                let mut count = u64::from(image.width()) * u64::from(image.height());
                for r in masked {
                    count -= r.area();
                    for y in r.y0..r.y1 {
                        let start = image.offset(r.x0, y);
                        let row = &image.pixels()[start..start + r.width() as usize * c];
                        for px in row.chunks_exact(c) {
                            for (s, &v) in sums.iter_mut().zip(px) {
                                *s -= u64::from(v);
                            }
                        }
                    }
                }
                if count == 0 {
                    return Ok(vec![0; c]);
                }
                Ok(sums.iter().map(|s| ((2 * s + count) / (2 * count)) as u8).collect())
            }
        }
    }
}

/// Overwrites the `px x py` region at `anchor` with `content`.
pub fn apply_patch(image: &Image, anchor: Anchor, patch: PatchSpec, content: &Image) -> Result<Image> {
    if content.width() != patch.px || content.height() != patch.py || content.channels() != image.channels() {
        return Err(Error::Image(format!(
            "patch content is {}x{}x{}, expected {}x{}x{}",
            content.width(),
            content.height(),
            content.channels(),
            patch.px,
            patch.py,
            image.channels()
        )));
    }
    let grid = admissible_anchors(DomainSize::new(image.width(), image.height())?, patch)?;
    if !grid.contains(anchor) {
        return Err(Error::Image(format!("anchor ({}, {}) not admissible", anchor.ax, anchor.ay)));
    }
    let mut out = image.clone();
    let row_len = patch.px as usize * image.channels() as usize;
    for dy in 0..patch.py {
        let dst = out.offset(anchor.ax, anchor.ay + dy);
        let src = content.offset(0, dy);
        out.pixels_mut()[dst..dst + row_len].copy_from_slice(&content.pixels()[src..src + row_len]);
    }
    Ok(out)
}

pub fn apply_mask(image: &Image, placement: MaskPlacement, mask: MaskSpec, fill: &FillPolicy) -> Result<Image> {
    let domain = DomainSize::new(image.width(), image.height())?;
    let rects = mask_pixel_set(placement, mask, domain);
    let values = fill.values_for(image, &rects)?;
    let mut out = image.clone();
    let c = image.channels() as usize;
    for r in &rects {
        for y in r.y0..r.y1 {
            let start = out.offset(r.x0, y);
            let row = &mut out.pixels_mut()[start..start + r.width() as usize * c];
            for px in row.chunks_exact_mut(c) {
                px.copy_from_slice(&values);
            }
        }
    }
    Ok(out)
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

/// Lazily produced masked views, in placement order.
pub fn masked_views_iter<'a>(
    image: &'a Image,
    mask_set: &'a MaskSet,
    fill: &'a FillPolicy,
) -> Result<impl Iterator<Item = Result<Image>> + 'a> {
    check_dims(image, mask_set)?;
    let mask = mask_set.config.mask;
    Ok(mask_set
        .placements
        .iter()
        .map(move |&p| apply_mask(image, p, mask, fill)))
}

pub fn masked_views(image: &Image, mask_set: &MaskSet, fill: &FillPolicy) -> Result<Vec<Image>> {
    masked_views_iter(image, mask_set, fill)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fully_covers;
    use crate::tiling::{replicated_tiling, TilingConfig};

    fn noise(w: u32, h: u32, c: u8, seed: u32) -> Image {
        let n = w as usize * h as usize * c as usize;
        let mut s = seed.wrapping_mul(2_654_435_761).wrapping_add(1);
        let px = (0..n)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 17;
                s ^= s << 5;
                (s >> 3) as u8
            })
            .collect();
        Image::new(w, h, c, px).unwrap()
    }

    #[test]
    fn identical_content_is_a_no_op() {
        let img = noise(10, 8, 3, 1);
        let patch = PatchSpec::new(4, 3).unwrap();
        let a = Anchor { ax: 5, ay: 2 };
        let content = img.crop(5, 2, 4, 3).unwrap();
        assert_eq!(apply_patch(&img, a, patch, &content).unwrap(), img);
    }

    #[test]
    fn full_domain_patch_replaces_everything() {
        let img = noise(6, 5, 1, 2);
        let content = noise(6, 5, 1, 3);
        let out = apply_patch(&img, Anchor { ax: 0, ay: 0 }, PatchSpec::new(6, 5).unwrap(), &content).unwrap();
        assert_eq!(out, content);
    }

    #[test]
    fn patch_changes_only_its_region() {
        let img = noise(12, 9, 3, 4);
        let content = Image::filled(5, 4, 3, 0).unwrap();
        let out = apply_patch(&img, Anchor { ax: 3, ay: 4 }, PatchSpec::new(5, 4).unwrap(), &content).unwrap();
        let differing = img.pixels().iter().zip(out.pixels()).filter(|(a, b)| a != b).count();
        assert!(differing <= 5 * 4 * 3);
        for y in 0..9 {
            for x in 0..12 {
                let inside = (3..8).contains(&x) && (4..8).contains(&y);
                if inside {
                    assert_eq!(out.pixel(x, y), &[0, 0, 0]);
                } else {
                    assert_eq!(out.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }

    #[test]
    fn patch_errors() {
        let img = noise(8, 8, 1, 5);
        let patch = PatchSpec::new(3, 3).unwrap();
        assert!(apply_patch(&img, Anchor { ax: 0, ay: 0 }, patch, &noise(3, 2, 1, 0)).is_err());
        assert!(apply_patch(&img, Anchor { ax: 0, ay: 0 }, patch, &noise(3, 3, 3, 0)).is_err());
        assert!(apply_patch(&img, Anchor { ax: 6, ay: 0 }, patch, &noise(3, 3, 1, 0)).is_err());
    }

    #[test]
    fn whole_domain_zero_mask() {
        let img = noise(7, 7, 3, 6);
        let out = apply_mask(&img, MaskPlacement::clipped(0, 0), MaskSpec::square(7).unwrap(), &FillPolicy::Zero).unwrap();
        assert!(out.pixels().iter().all(|&v| v == 0));
    }

    #[test]
    fn wrapped_mask_fills_all_pieces() {
        let img = Image::filled(10, 10, 1, 9).unwrap();
        let dom = DomainSize::square(10).unwrap();
        let out = apply_mask(&img, MaskPlacement::wrapped(8, 8, dom), MaskSpec::square(5).unwrap(), &FillPolicy::Constant(vec![1])).unwrap();
        let ones = out.pixels().iter().filter(|&&v| v == 1).count();
        assert_eq!(ones, 25);
        assert_eq!(out.pixel(0, 0), &[1]);
        assert_eq!(out.pixel(9, 2), &[1]);
        assert_eq!(out.pixel(5, 5), &[9]);
    }

    #[test]
    fn constant_fill_channel_mismatch() {
        let img = noise(4, 4, 3, 7);
        let fill = FillPolicy::Constant(vec![1, 2]);
        assert!(apply_mask(&img, MaskPlacement::clipped(0, 0), MaskSpec::square(2).unwrap(), &fill).is_err());
    }

    #[test]
    fn fill_parsing() {
        assert_eq!("zero".parse::<FillPolicy>().unwrap(), FillPolicy::Zero);
        assert_eq!("mean".parse::<FillPolicy>().unwrap(), FillPolicy::Mean);
        assert_eq!("constant:1,2,3".parse::<FillPolicy>().unwrap(), FillPolicy::Constant(vec![1, 2, 3]));
        assert!("constant:300".parse::<FillPolicy>().is_err());
        assert!("blur".parse::<FillPolicy>().is_err());
    }

    #[test]
    fn neutralization_for_every_fill() {
        let dom = DomainSize::new(14, 11).unwrap();
        let mask = MaskSpec::new(6, 5).unwrap();
        let patch = PatchSpec::new(3, 2).unwrap();
        let img = noise(14, 11, 3, 8);
        let content = noise(3, 2, 3, 9);
        let grid = admissible_anchors(dom, patch).unwrap();
        for fill in [FillPolicy::Zero, FillPolicy::Constant(vec![77]), FillPolicy::Mean] {
            for pl in [MaskPlacement::clipped(4, 3), MaskPlacement::clipped(-2, 8), MaskPlacement::wrapped(11, 9, dom)] {
                for a in grid.iter().filter(|&a| fully_covers(pl, mask, a, patch, dom)) {
                    let adv = apply_patch(&img, a, patch, &content).unwrap();
                    assert_eq!(apply_mask(&adv, pl, mask, &fill).unwrap(), apply_mask(&img, pl, mask, &fill).unwrap());
                }
            }
        }
    }

    #[test]
    fn non_covering_mask_leaks_the_patch() {
        let dom = DomainSize::square(12).unwrap();
        let mask = MaskSpec::square(5).unwrap();
        let patch = PatchSpec::square(3).unwrap();
        let img = Image::filled(12, 12, 1, 100).unwrap();
        let content = Image::filled(3, 3, 1, 200).unwrap();
        let pl = MaskPlacement::clipped(0, 0);
        let a = Anchor { ax: 3, ay: 3 };
        assert!(!fully_covers(pl, mask, a, patch, dom));
        let adv = apply_patch(&img, a, patch, &content).unwrap();
        assert_ne!(apply_mask(&adv, pl, mask, &FillPolicy::Zero).unwrap(), apply_mask(&img, pl, mask, &FillPolicy::Zero).unwrap());
    }

    #[test]
    fn mask_is_idempotent_and_patch_restorable() {
        let img = noise(9, 9, 1, 10);
        let pl = MaskPlacement::clipped(2, 2);
        let mask = MaskSpec::square(4).unwrap();
        for fill in [FillPolicy::Zero, FillPolicy::Mean] {
            let once = apply_mask(&img, pl, mask, &fill).unwrap();
            assert_eq!(apply_mask(&once, pl, mask, &fill).unwrap(), once);
        }
        let patch = PatchSpec::square(3).unwrap();
        let a = Anchor { ax: 4, ay: 1 };
        let original = img.crop(4, 1, 3, 3).unwrap();
        let adv = apply_patch(&img, a, patch, &noise(3, 3, 1, 11)).unwrap();
        assert_eq!(apply_patch(&adv, a, patch, &original).unwrap(), img);
    }

    #[test]
    fn views_of_replicated_tiling_repeat() {
        let cfg = TilingConfig::new(DomainSize::square(20).unwrap(), MaskSpec::square(8).unwrap(), PatchSpec::square(3).unwrap(), 3);
        let set = replicated_tiling(&cfg).unwrap();
        let img = noise(20, 20, 3, 12);
        let views = masked_views(&img, &set, &FillPolicy::Zero).unwrap();
        assert_eq!(views.len(), set.len());
        let block = set.len() / 3;
        for i in 0..block {
            assert_eq!(views[i], views[i + block]);
            assert_eq!(views[i], views[i + 2 * block]);
        }
        let streamed: Vec<Image> = masked_views_iter(&img, &set, &FillPolicy::Zero).unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(streamed, views);
        assert!(masked_views(&noise(19, 20, 3, 0), &set, &FillPolicy::Zero).is_err());
    }
}

//! Discrete pixel-grid geometry: domains, patches, masks, anchors and the
//! full-coverage predicate.
//!
//! A patch is located by its top-left pixel (its *anchor*). A mask placed at
//! `(x0, y0)` fully covers the patch at `(ax, ay)` iff, on each axis,
//! `x0 <= ax` and `ax + px <= x0 + mx`. The effective anchor region of a mask
//! therefore spans `mx - px + 1` anchor positions per axis.
//!
//! Wrapped placements use toroidal semantics: the pixels a mask would put past
//! the right (bottom) edge reappear at the left (top) edge. Patches never wrap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Image domain, `lx` columns by `ly` rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainSize {
    pub lx: u32,
    pub ly: u32,
}

/// Adversarial patch extent in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchSpec {
    pub px: u32,
    pub py: u32,
}

/// Mask extent in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskSpec {
    pub mx: u32,
    pub my: u32,
}

/// Top-left pixel of a patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Anchor {
    pub ax: u32,
    pub ay: u32,
}

/// Position of one mask. With `wrap` set the coordinates are canonical,
/// `0 <= x0 < lx` and `0 <= y0 < ly`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskPlacement {
    pub x0: i64,
    pub y0: i64,
    pub wrap: bool,
}

/// Half-open rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.x0 <= x && x < self.x1 && self.y0 <= y && y < self.y1
    }
}

macro_rules! wxh_type {
    ($ty:ident, $a:ident, $b:ident, $what:literal) => {
        impl $ty {
            pub fn new($a: u32, $b: u32) -> Result<Self> {
                if $a == 0 || $b == 0 {
                    return Err(Error::Geometry(format!(
                        concat!($what, " must be at least 1x1, got {}x{}"),
                        $a, $b
                    )));
                }
                Ok(Self { $a, $b })
            }

            pub fn square(side: u32) -> Result<Self> {
                Self::new(side, side)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}x{}", self.$a, self.$b)
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let (w, h) = parse_wxh(s)?;
                Self::new(w, h)
            }
        }
    };
}

wxh_type!(DomainSize, lx, ly, "domain");
wxh_type!(PatchSpec, px, py, "patch");
wxh_type!(MaskSpec, mx, my, "mask");

/// Parses `WxH` (or a bare `N`, meaning `NxN`).
pub fn parse_wxh(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Geometry(format!("expected WxH, got {s:?}"));
    let s = s.trim();
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((
            w.trim().parse().map_err(|_| bad())?,
            h.trim().parse().map_err(|_| bad())?,
        )),
        None => {
            let side = s.parse().map_err(|_| bad())?;
            Ok((side, side))
        }
    }
}

impl DomainSize {
    pub fn pixels(&self) -> u64 {
        u64::from(self.lx) * u64::from(self.ly)
    }
}

impl MaskPlacement {
    pub fn clipped(x0: i64, y0: i64) -> Self {
        Self { x0, y0, wrap: false }
    }

    /// Wrapped placement, reduced to canonical coordinates.
    pub fn wrapped(x0: i64, y0: i64, domain: DomainSize) -> Self {
        Self {
            x0: x0.rem_euclid(i64::from(domain.lx)),
            y0: y0.rem_euclid(i64::from(domain.ly)),
            wrap: true,
        }
    }

    pub fn is_canonical(&self, domain: DomainSize) -> bool {
        !self.wrap
            || ((0..i64::from(domain.lx)).contains(&self.x0)
                && (0..i64::from(domain.ly)).contains(&self.y0))
    }
}

/// Inclusive range of admissible anchors, `[0, lx - px] x [0, ly - py]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorGrid {
    pub ax_max: u32,
    pub ay_max: u32,
}

impl AnchorGrid {
    pub fn columns(&self) -> u32 {
        self.ax_max + 1
    }

    pub fn rows(&self) -> u32 {
        self.ay_max + 1
    }

    pub fn count(&self) -> u64 {
        u64::from(self.columns()) * u64::from(self.rows())
    }

    pub fn contains(&self, anchor: Anchor) -> bool {
        anchor.ax <= self.ax_max && anchor.ay <= self.ay_max
    }

    /// Row-major iteration.
    pub fn iter(&self) -> impl Iterator<Item = Anchor> + Clone {
        let (ax_max, ay_max) = (self.ax_max, self.ay_max);
        (0..=ay_max).flat_map(move |ay| (0..=ax_max).map(move |ax| Anchor { ax, ay }))
    }

    pub fn row(&self, ay: u32) -> impl Iterator<Item = Anchor> {
        (0..=self.ax_max).map(move |ax| Anchor { ax, ay })
    }
}

pub fn admissible_anchors(domain: DomainSize, patch: PatchSpec) -> Result<AnchorGrid> {
    if patch.px > domain.lx || patch.py > domain.ly {
        return Err(Error::PatchExceedsDomain);
    }
    Ok(AnchorGrid {
        ax_max: domain.lx - patch.px,
        ay_max: domain.ly - patch.py,
    })
}

/// Masked pixel intervals of one placement along one axis: at most two
/// disjoint half-open spans inside `[0, len)`.
fn axis_pieces(start: i64, extent: u32, len: u32, wrap: bool) -> ([(u32, u32); 2], usize) {
    let mut out = [(0, 0); 2];
    let len_i = i64::from(len);
    if !wrap {
        let lo = start.clamp(0, len_i);
        let hi = (start + i64::from(extent)).clamp(0, len_i);
        if lo < hi {
            out[0] = (lo as u32, hi as u32);
            return (out, 1);
        }
        return (out, 0);
    }
    if extent >= len {
        out[0] = (0, len);
        return (out, 1);
    }
    let s = start.rem_euclid(len_i) as u32;
    let e = s + extent;
    if e <= len {
        out[0] = (s, e);
        (out, 1)
    } else {
        out[0] = (s, len);
        out[1] = (0, e - len);
        (out, 2)
    }
}

/// Whether the patch span `[a, a + p)` lies inside the masked pixels of one axis.
#[inline]
fn axis_covers(start: i64, extent: u32, len: u32, wrap: bool, a: u32, p: u32) -> bool {
    if !wrap {
        let a = i64::from(a);
        return start <= a && a + i64::from(p) <= start + i64::from(extent);
    }
    if extent >= len {
        return a + p <= len;
    }
    let s = start.rem_euclid(i64::from(len)) as u32;
    let e = s + extent;
    if e <= len {
        s <= a && a + p <= e
    } else {
        (s <= a && a + p <= len) || a + p <= e - len
    }
}

/// Pixels zeroed by a placement, as up to four disjoint rectangles clipped to
/// the domain. An unwrapped mask lying entirely outside the domain yields no
/// rectangles.
pub fn mask_pixel_set(placement: MaskPlacement, mask: MaskSpec, domain: DomainSize) -> Vec<Rect> {
    let (xs, nx) = axis_pieces(placement.x0, mask.mx, domain.lx, placement.wrap);
    let (ys, ny) = axis_pieces(placement.y0, mask.my, domain.ly, placement.wrap);
    let mut rects = Vec::with_capacity(nx * ny);
    for &(y0, y1) in &ys[..ny] {
        for &(x0, x1) in &xs[..nx] {
            rects.push(Rect { x0, y0, x1, y1 });
        }
    }
    rects
}

/// Whether the mask at `placement` fully covers the patch anchored at `anchor`.
pub fn fully_covers(
    placement: MaskPlacement,
    mask: MaskSpec,
    anchor: Anchor,
    patch: PatchSpec,
    domain: DomainSize,
) -> bool {
    axis_covers(placement.x0, mask.mx, domain.lx, placement.wrap, anchor.ax, patch.px)
        && axis_covers(placement.y0, mask.my, domain.ly, placement.wrap, anchor.ay, patch.py)
}

fn axis_anchor_spans(
    start: i64,
    extent: u32,
    len: u32,
    wrap: bool,
    p: u32,
) -> ([(u32, u32); 2], usize) {
    let mut out = [(0, 0); 2];
    let mut n = 0;
    if p > len {
        return (out, 0);
    }
    let amax = len - p;
    let (pieces, np) = axis_pieces(start, extent, len, wrap);
    for &(lo, hi) in &pieces[..np] {
        if hi - lo >= p {
            let last = (hi - p).min(amax);
            if lo <= last {
                out[n] = (lo, last + 1);
                n += 1;
            }
        }
    }
    (out, n)
}

/// Anchors fully covered by one placement, as at most four disjoint
/// rectangles in anchor coordinates (half-open). Empty when the mask is
/// smaller than the patch on either axis.
pub fn effective_anchor_region(
    placement: MaskPlacement,
    mask: MaskSpec,
    patch: PatchSpec,
    domain: DomainSize,
) -> Vec<Rect> {
    if mask.mx < patch.px || mask.my < patch.py {
        return Vec::new();
    }
    let (xs, nx) = axis_anchor_spans(placement.x0, mask.mx, domain.lx, placement.wrap, patch.px);
    let (ys, ny) = axis_anchor_spans(placement.y0, mask.my, domain.ly, placement.wrap, patch.py);
    let mut rects = Vec::with_capacity(nx * ny);
    for &(y0, y1) in &ys[..ny] {
        for &(x0, x1) in &xs[..nx] {
            rects.push(Rect { x0, y0, x1, y1 });
        }
    }
    rects
}

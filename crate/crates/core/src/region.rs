//! Exact dyadic plane geometry.
//!
//! Open regions are finite unions of open axis-parallel rectangles; compact
//! support sets are finite unions of closed rectangles, closed segments and
//! points. Every corner is dyadic, so all the geometry used by the
//! multiplicity queries is exact.
//!
//! Topological questions (interior, connectivity of the complement,
//! inclusion) are answered on an [`Overlay`]: the coordinate-compressed grid
//! spanned by all the coordinates involved. Each open cell, open edge and
//! vertex of that grid lies entirely inside or entirely outside every set
//! in play, so set relations reduce to finitely many stratum checks.

use std::collections::VecDeque;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, FRAC_BITS, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("dilation radius must be positive, got {0}")]
    NonpositiveRadius(Dyadic),
    #[error("support set is not contained in the open frame {0}")]
    FrameTooSmall(Rect),
    #[error("segment from {0} to {1} is neither horizontal nor vertical")]
    SkewSegment(DyadicPoint, DyadicPoint),
    #[error("refining the grid ran out of dyadic precision")]
    PrecisionExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicPoint {
    pub x: Dyadic,
    pub y: Dyadic,
}

impl DyadicPoint {
    pub fn new(x: Dyadic, y: Dyadic) -> Self {
        DyadicPoint { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        DyadicPoint::new(Dyadic::from_int(x), Dyadic::from_int(y))
    }

    /// Sup-norm distance.
    pub fn sup_dist(&self, other: &DyadicPoint) -> Dyadic {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-parallel rectangle `[x0, x1] × [y0, y1]` (or its interior, depending
/// on the container).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: Dyadic,
    pub y0: Dyadic,
    pub x1: Dyadic,
    pub y1: Dyadic,
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]×[{}, {}]", self.x0, self.x1, self.y0, self.y1)
    }
}

impl Rect {
    pub fn new(x0: Dyadic, y0: Dyadic, x1: Dyadic, y1: Dyadic) -> Self {
        Rect {
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn ints(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Rect::new(
            Dyadic::from_int(x0),
            Dyadic::from_int(y0),
            Dyadic::from_int(x1),
            Dyadic::from_int(y1),
        )
    }

    /// Sup-norm square of radius `r` about `c`.
    pub fn square(c: DyadicPoint, r: Dyadic) -> Self {
        Rect::new(c.x - r, c.y - r, c.x + r, c.y + r)
    }

    pub fn width(&self) -> Dyadic {
        self.x1 - self.x0
    }

    pub fn height(&self) -> Dyadic {
        self.y1 - self.y0
    }

    /// True when the interior is empty.
    pub fn is_thin(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn area_raw(&self) -> i128 {
        if self.is_thin() {
            0
        } else {
            self.width().mul_raw(self.height())
        }
    }

    pub fn area(&self) -> Q {
        raw_area_to_q(self.area_raw())
    }

    pub fn contains_open(&self, p: &DyadicPoint) -> bool {
        self.x0 < p.x && p.x < self.x1 && self.y0 < p.y && p.y < self.y1
    }

    pub fn contains_closed(&self, p: &DyadicPoint) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }

    /// Intersection of two rectangles viewed as closed or open sets alike.
    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (r.x0 <= r.x1 && r.y0 <= r.y1).then_some(r)
    }

    /// Whether the interior of `self` meets the closed rectangle `other`.
    pub fn open_meets_closed(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// Whether the interior of `self` meets the closed segment `seg`.
    pub fn open_meets_segment(&self, seg: &Segment) -> bool {
        self.open_meets_closed(&seg.as_rect())
            || (seg.is_horizontal()
                && self.y0 < seg.a.y
                && seg.a.y < self.y1
                && self.x0 < seg.b.x
                && seg.a.x < self.x1)
            || (!seg.is_horizontal()
                && self.x0 < seg.a.x
                && seg.a.x < self.x1
                && self.y0 < seg.b.y
                && seg.a.y < self.y1)
    }

    pub fn expand(&self, r: Dyadic) -> Rect {
        Rect {
            x0: self.x0 - r,
            y0: self.y0 - r,
            x1: self.x1 + r,
            y1: self.y1 + r,
        }
    }

    pub fn corners(&self) -> [DyadicPoint; 4] {
        [
            DyadicPoint::new(self.x0, self.y0),
            DyadicPoint::new(self.x1, self.y0),
            DyadicPoint::new(self.x1, self.y1),
            DyadicPoint::new(self.x0, self.y1),
        ]
    }

    /// Union bounding box.
    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Four closed segments forming the boundary.
    /// Open squares of side `2^-level` with corners on the `2^-(level+1)`
    /// lattice, contained in this rectangle.
    pub fn lattice_squares(&self, level: u32) -> Vec<Rect> {
        let side = Dyadic::pow2_neg(level);
        let step = side.half();
        let first = |lo: Dyadic| {
            let n = lo.raw().div_euclid(step.raw());
            let mut d = Dyadic::from_raw(n * step.raw());
            if d < lo {
                d = d + step;
            }
            d
        };
        let mut out = Vec::new();
        let mut x = first(self.x0);
        while x + side <= self.x1 {
            let mut y = first(self.y0);
            while y + side <= self.y1 {
                out.push(Rect::new(x, y, x + side, y + side));
                y = y + step;
            }
            x = x + step;
        }
        out
    }

    pub fn boundary(&self) -> [Segment; 4] {
        let [a, b, c, d] = self.corners();
        [
            Segment::new_unchecked(a, b),
            Segment::new_unchecked(b, c),
            Segment::new_unchecked(d, c),
            Segment::new_unchecked(a, d),
        ]
    }
}

pub(crate) fn raw_area_to_q(raw: i128) -> Q {
    Q::new(raw, 1i128 << (2 * FRAC_BITS))
}

/// Closed horizontal or vertical segment with `a <= b` coordinatewise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub a: DyadicPoint,
    pub b: DyadicPoint,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}–{}", self.a, self.b)
    }
}

impl Segment {
    pub fn new(p: DyadicPoint, q: DyadicPoint) -> Result<Self, RegionError> {
        if p.x != q.x && p.y != q.y {
            return Err(RegionError::SkewSegment(p, q));
        }
        Ok(Segment::new_unchecked(p, q))
    }

    fn new_unchecked(p: DyadicPoint, q: DyadicPoint) -> Self {
        let (a, b) = if p <= q { (p, q) } else { (q, p) };
        Segment { a, b }
    }

    pub fn horizontal(x0: Dyadic, x1: Dyadic, y: Dyadic) -> Self {
        Segment::new_unchecked(DyadicPoint::new(x0, y), DyadicPoint::new(x1, y))
    }

    pub fn vertical(x: Dyadic, y0: Dyadic, y1: Dyadic) -> Self {
        Segment::new_unchecked(DyadicPoint::new(x, y0), DyadicPoint::new(x, y1))
    }

    pub fn is_horizontal(&self) -> bool {
        self.a.y == self.b.y
    }

    pub fn is_point(&self) -> bool {
        self.a == self.b
    }

    pub fn length(&self) -> Dyadic {
        (self.b.x - self.a.x) + (self.b.y - self.a.y)
    }

    pub fn as_rect(&self) -> Rect {
        Rect::new(self.a.x, self.a.y, self.b.x, self.b.y)
    }

    pub fn contains(&self, p: &DyadicPoint) -> bool {
        self.as_rect().contains_closed(p)
    }
}

/// Finite union of open rectangles.
///
/// Alongside the generating rectangles a disjoint half-open decomposition
/// is kept; it has the same area as the region and is what measure
/// computations integrate over.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OpenRegion {
    rects: Vec<Rect>,
    #[serde(skip)]
    pieces: OnceLock<Vec<Rect>>,
}

/// Presentation equality of the canonical rectangle lists; see
/// [`OpenRegion::same_set`] for set equality.
impl PartialEq for OpenRegion {
    fn eq(&self, other: &Self) -> bool {
        self.rects == other.rects
    }
}

impl Eq for OpenRegion {}

impl<'de> Deserialize<'de> for OpenRegion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rects: Vec<Rect>,
        }
        Ok(OpenRegion::from_rects(Raw::deserialize(d)?.rects))
    }
}

impl fmt::Display for OpenRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rects.is_empty() {
            return f.write_str("∅");
        }
        for (i, r) in self.rects.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "({}, {})×({}, {})", r.x0, r.x1, r.y0, r.y1)?;
        }
        Ok(())
    }
}

impl OpenRegion {
    pub fn empty() -> Self {
        OpenRegion::default()
    }

    /// Union of the interiors of `rects`; rectangles with empty interior
    /// are dropped.
    pub fn from_rects<I: IntoIterator<Item = Rect>>(rects: I) -> Self {
        let mut rects: Vec<Rect> = rects.into_iter().filter(|r| !r.is_thin()).collect();
        rects.sort();
        rects.dedup();
        OpenRegion {
            rects,
            pieces: OnceLock::new(),
        }
    }

    pub fn rect(r: Rect) -> Self {
        OpenRegion::from_rects([r])
    }

    /// Open sup-norm ball `B_r(c)`.
    pub fn square(c: DyadicPoint, r: Dyadic) -> Self {
        OpenRegion::rect(Rect::square(c, r))
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// Disjoint half-open pieces with the same area as the region.
    pub fn pieces(&self) -> &[Rect] {
        self.pieces.get_or_init(|| disjoint_pieces(&self.rects))
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn union(&self, other: &OpenRegion) -> OpenRegion {
        OpenRegion::from_rects(self.rects.iter().chain(other.rects.iter()).copied())
    }

    pub fn intersect(&self, other: &OpenRegion) -> OpenRegion {
        let mut out = Vec::new();
        for a in &self.rects {
            for b in &other.rects {
                if let Some(r) = a.intersect(b) {
                    out.push(r);
                }
            }
        }
        OpenRegion::from_rects(out)
    }

    pub fn contains_point(&self, p: &DyadicPoint) -> bool {
        self.rects.iter().any(|r| r.contains_open(p))
    }

    pub fn area_raw(&self) -> i128 {
        self.pieces().iter().map(Rect::area_raw).sum()
    }

    pub fn area(&self) -> Q {
        raw_area_to_q(self.area_raw())
    }

    /// Area of the intersection with a closed rectangle, in raw units.
    pub fn area_within_raw(&self, shape: &Rect) -> i128 {
        self.pieces()
            .iter()
            .filter_map(|p| p.intersect(shape))
            .map(|r| r.area_raw())
            .sum()
    }

    /// Length of the intersection with a closed segment, in raw units.
    pub fn length_within_raw(&self, seg: &Segment) -> i64 {
        let mut spans: Vec<(i64, i64)> = Vec::new();
        for r in &self.rects {
            let (lo, hi) = if seg.is_horizontal() {
                if !(r.y0 < seg.a.y && seg.a.y < r.y1) {
                    continue;
                }
                (r.x0.max(seg.a.x), r.x1.min(seg.b.x))
            } else {
                if !(r.x0 < seg.a.x && seg.a.x < r.x1) {
                    continue;
                }
                (r.y0.max(seg.a.y), r.y1.min(seg.b.y))
            };
            if lo < hi {
                spans.push((lo.raw(), hi.raw()));
            }
        }
        union_length(&mut spans)
    }

    pub fn meets_closed_rect(&self, shape: &Rect) -> bool {
        self.rects.iter().any(|r| r.open_meets_closed(shape))
    }

    pub fn meets_segment(&self, seg: &Segment) -> bool {
        self.rects.iter().any(|r| r.open_meets_segment(seg))
    }

    /// Minkowski sum with the open sup-norm ball of radius `r`.
    pub fn dilate(&self, r: Dyadic) -> Result<OpenRegion, RegionError> {
        if !r.is_positive() {
            return Err(RegionError::NonpositiveRadius(r));
        }
        Ok(self.dilate_unchecked(r))
    }

    pub(crate) fn dilate_unchecked(&self, r: Dyadic) -> OpenRegion {
        OpenRegion::from_rects(self.rects.iter().map(|q| q.expand(r)))
    }

    /// Shrinks every generating rectangle by `t` on each side.
    pub fn shrink(&self, t: Dyadic) -> OpenRegion {
        OpenRegion::from_rects(self.rects.iter().map(|q| q.expand(-t)))
    }

    pub fn bbox(&self) -> Option<Rect> {
        self.rects.iter().copied().reduce(|a, b| a.hull(&b))
    }

    /// Set equality, decided stratum by stratum on the joint overlay.
    pub fn same_set(&self, other: &OpenRegion) -> bool {
        let mut ov = OverlayBuilder::default();
        for r in self.rects.iter().chain(other.rects.iter()) {
            ov.add_rect(r);
        }
        let ov = ov.build();
        let same = ov
            .strata()
            .all(|s| self.contains_half(&ov.rep(s)) == other.contains_half(&ov.rep(s)));
        same
    }

    fn contains_half(&self, p: &HalfPoint) -> bool {
        self.rects.iter().any(|r| p.in_open(r))
    }
}

fn union_length(spans: &mut [(i64, i64)]) -> i64 {
    spans.sort_unstable();
    let mut total = 0i64;
    let mut cur: Option<(i64, i64)> = None;
    for &(lo, hi) in spans.iter() {
        cur = match cur {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    total
}

/// Row-merged half-open cells covering a union of open rectangles.
fn disjoint_pieces(rects: &[Rect]) -> Vec<Rect> {
    if rects.len() <= 1 {
        return rects.to_vec();
    }
    let mut xs: Vec<Dyadic> = rects.iter().flat_map(|r| [r.x0, r.x1]).collect();
    let mut ys: Vec<Dyadic> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut out: Vec<Rect> = Vec::new();
    // Runs of the previous row that can still grow upward: (x0, x1, index in out).
    let mut open_runs: Vec<(Dyadic, Dyadic, usize)> = Vec::new();
    for yw in ys.windows(2) {
        let (ya, yb) = (yw[0], yw[1]);
        let mut runs: Vec<(Dyadic, Dyadic)> = Vec::new();
        for xw in xs.windows(2) {
            let (xa, xb) = (xw[0], xw[1]);
            let covered = rects
                .iter()
                .any(|r| r.x0 <= xa && xb <= r.x1 && r.y0 <= ya && yb <= r.y1);
            if covered {
                match runs.last_mut() {
                    Some(last) if last.1 == xa => last.1 = xb,
                    _ => runs.push((xa, xb)),
                }
            }
        }
        let mut next_runs = Vec::with_capacity(runs.len());
        for (xa, xb) in runs {
            if let Some(&(_, _, idx)) = open_runs.iter().find(|(a, b, _)| *a == xa && *b == xb) {
                out[idx].y1 = yb;
                next_runs.push((xa, xb, idx));
            } else {
                out.push(Rect {
                    x0: xa,
                    y0: ya,
                    x1: xb,
                    y1: yb,
                });
                next_runs.push((xa, xb, out.len() - 1));
            }
        }
        open_runs = next_runs;
    }
    out
}

/// Compact set given as a finite union of closed rectangles, closed
/// segments and points.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub cells: Vec<Rect>,
    pub segs: Vec<Segment>,
    pub pts: Vec<DyadicPoint>,
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self
            .cells
            .iter()
            .map(|c| c.to_string())
            .chain(self.segs.iter().map(|s| s.to_string()))
            .chain(self.pts.iter().map(|p| p.to_string()))
            .collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

impl SupportSet {
    /// Builds a support set, demoting degenerate rectangles to segments or
    /// points and degenerate segments to points.
    pub fn new(cells: Vec<Rect>, segs: Vec<Segment>, pts: Vec<DyadicPoint>) -> Self {
        let mut s = SupportSet::default();
        for c in cells {
            s.push_rect(c);
        }
        for g in segs {
            s.push_segment(g);
        }
        for p in pts {
            s.push_point(p);
        }
        s.normalize();
        s
    }

    pub fn empty() -> Self {
        SupportSet::default()
    }

    pub fn point(p: DyadicPoint) -> Self {
        SupportSet::new(vec![], vec![], vec![p])
    }

    pub fn push_rect(&mut self, c: Rect) {
        if c.is_thin() {
            self.push_segment(Segment::new_unchecked(
                DyadicPoint::new(c.x0, c.y0),
                DyadicPoint::new(c.x1, c.y1),
            ));
        } else {
            self.cells.push(c);
        }
    }

    pub fn push_segment(&mut self, g: Segment) {
        if g.is_point() {
            self.pts.push(g.a);
        } else {
            self.segs.push(g);
        }
    }

    pub fn push_point(&mut self, p: DyadicPoint) {
        self.pts.push(p);
    }

    fn normalize(&mut self) {
        self.cells.sort();
        self.cells.dedup();
        self.segs.sort();
        self.segs.dedup();
        self.pts.sort();
        self.pts.dedup();
        let (cells, segs) = (&self.cells, &self.segs);
        self.pts.retain(|p| {
            !cells.iter().any(|c| c.contains_closed(p)) && !segs.iter().any(|g| g.contains(p))
        });
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut s = self.clone();
        s.cells.extend_from_slice(&other.cells);
        s.segs.extend_from_slice(&other.segs);
        s.pts.extend_from_slice(&other.pts);
        s.normalize();
        s
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.segs.is_empty() && self.pts.is_empty()
    }

    pub fn has_interior(&self) -> bool {
        !self.cells.is_empty()
    }

    /// Countable means: no cells and no segments.
    pub fn is_finite_set(&self) -> bool {
        self.cells.is_empty() && self.segs.is_empty()
    }

    pub fn contains_point(&self, p: &DyadicPoint) -> bool {
        self.cells.iter().any(|c| c.contains_closed(p))
            || self.segs.iter().any(|s| s.contains(p))
            || self.pts.contains(p)
    }

    fn contains_half(&self, p: &HalfPoint) -> bool {
        self.cells.iter().any(|c| p.in_closed(c))
            || self.segs.iter().any(|s| p.in_closed(&s.as_rect()))
            || self.pts.iter().any(|q| p.is_point(q))
    }

    pub fn bbox(&self) -> Option<Rect> {
        self.cells
            .iter()
            .copied()
            .chain(self.segs.iter().map(Segment::as_rect))
            .chain(self.pts.iter().map(|p| Rect::new(p.x, p.y, p.x, p.y)))
            .reduce(|a, b| a.hull(&b))
    }

    /// Bounding box inflated by one unit; the unit square about the origin
    /// for the empty set.
    pub fn default_frame(&self) -> Rect {
        self.bbox()
            .unwrap_or_else(|| Rect::ints(0, 0, 0, 0))
            .expand(Dyadic::ONE)
    }

    /// `K + B_r(0)` with the open sup-norm ball; the result is open.
    pub fn dilate(&self, r: Dyadic) -> Result<OpenRegion, RegionError> {
        if !r.is_positive() {
            return Err(RegionError::NonpositiveRadius(r));
        }
        Ok(OpenRegion::from_rects(
            self.cells
                .iter()
                .copied()
                .chain(self.segs.iter().map(Segment::as_rect))
                .chain(self.pts.iter().map(|p| Rect::new(p.x, p.y, p.x, p.y)))
                .map(|c| c.expand(r)),
        ))
    }

    fn overlay_with(&self, others: &[&SupportSet], frame: Option<&Rect>) -> Overlay {
        let mut b = OverlayBuilder::default();
        for s in std::iter::once(self).chain(others.iter().copied()) {
            b.add_support(s);
        }
        if let Some(f) = frame {
            b.add_rect(f);
        }
        b.build()
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        let ov = self.overlay_with(&[other], None);
        let inside = ov.strata().all(|s| {
            let p = ov.rep(s);
            !self.contains_half(&p) || other.contains_half(&p)
        });
        inside
    }

    pub fn same_set(&self, other: &SupportSet) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// Number of connected components of the complement of the set.
    ///
    /// The count is taken inside the closed `frame`; the frame's boundary
    /// ring always belongs to the unbounded component. `refinements`
    /// midpoint subdivisions are applied to the grid first.
    pub fn complement_components_at(
        &self,
        frame: &Rect,
        refinements: u32,
    ) -> Result<usize, RegionError> {
        if let Some(bb) = self.bbox() {
            let inside =
                frame.x0 < bb.x0 && bb.x1 < frame.x1 && frame.y0 < bb.y0 && bb.y1 < frame.y1;
            if !inside {
                return Err(RegionError::FrameTooSmall(*frame));
            }
        } else if frame.is_thin() {
            return Err(RegionError::FrameTooSmall(*frame));
        }
        let mut ov = self.overlay_with(&[], Some(frame));
        for _ in 0..refinements {
            ov = ov.refine().ok_or(RegionError::PrecisionExhausted)?;
        }
        let (w, h) = ov.dims();
        let blocked: Vec<bool> = (0..w * h)
            .map(|idx| self.contains_half(&ov.rep((idx % w, idx / w))))
            .collect();
        Ok(count_components(&blocked, w, h))
    }

    /// Complement components counted on the default-refined grid.
    pub fn complement_components(&self, frame: &Rect) -> Result<usize, RegionError> {
        self.complement_components_at(frame, 1)
    }

    /// A compact set is small when it has no interior and a connected
    /// complement.
    pub fn is_small(&self, frame: &Rect) -> Result<bool, RegionError> {
        let components = self.complement_components(frame)?;
        Ok(!self.has_interior() && components == 1)
    }
}

/// 4-connected flood fill over the unblocked entries of a `w × h` array.
fn count_components(blocked: &[bool], w: usize, h: usize) -> usize {
    let mut seen = vec![false; blocked.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..blocked.len() {
        if blocked[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            let (x, y) = (idx % w, idx / w);
            let mut visit = |nx: usize, ny: usize| {
                let n = ny * w + nx;
                if !blocked[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < w {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < h {
                visit(x, y + 1);
            }
        }
    }
    count
}

/// A point with coordinates in units of `2^-(FRAC_BITS+1)`, enough to
/// represent midpoints of grid intervals exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct HalfPoint {
    pub x: i128,
    pub y: i128,
}

fn half(d: Dyadic) -> i128 {
    2 * d.raw() as i128
}

impl HalfPoint {
    pub fn in_open(&self, r: &Rect) -> bool {
        half(r.x0) < self.x && self.x < half(r.x1) && half(r.y0) < self.y && self.y < half(r.y1)
    }

    pub fn in_closed(&self, r: &Rect) -> bool {
        half(r.x0) <= self.x && self.x <= half(r.x1) && half(r.y0) <= self.y && self.y <= half(r.y1)
    }

    pub fn is_point(&self, p: &DyadicPoint) -> bool {
        self.x == half(p.x) && self.y == half(p.y)
    }
}

/// Kind of a stratum of an [`Overlay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StratumKind {
    Cell,
    Edge,
    Vertex,
}

/// Coordinate-compressed grid.
///
/// Strata are addressed in doubled coordinates `(i, j)`: an even index is a
/// grid line, an odd index the open interval between two lines. Both odd
/// is an open cell, both even a vertex, otherwise an open edge.
#[derive(Debug, Clone)]
pub struct Overlay {
    xs: Vec<Dyadic>,
    ys: Vec<Dyadic>,
}

#[derive(Debug, Default)]
pub struct OverlayBuilder {
    xs: Vec<Dyadic>,
    ys: Vec<Dyadic>,
}

impl OverlayBuilder {
    pub fn add_x(&mut self, x: Dyadic) {
        self.xs.push(x);
    }

    pub fn add_y(&mut self, y: Dyadic) {
        self.ys.push(y);
    }

    pub fn add_point(&mut self, p: &DyadicPoint) {
        self.xs.push(p.x);
        self.ys.push(p.y);
    }

    pub fn add_rect(&mut self, r: &Rect) {
        self.xs.extend([r.x0, r.x1]);
        self.ys.extend([r.y0, r.y1]);
    }

    pub fn add_support(&mut self, s: &SupportSet) {
        for c in &s.cells {
            self.add_rect(c);
        }
        for g in &s.segs {
            self.add_rect(&g.as_rect());
        }
        for p in &s.pts {
            self.add_point(p);
        }
    }

    pub fn build(mut self) -> Overlay {
        self.xs.sort_unstable();
        self.xs.dedup();
        self.ys.sort_unstable();
        self.ys.dedup();
        if self.xs.is_empty() {
            self.xs.push(Dyadic::ZERO);
        }
        if self.ys.is_empty() {
            self.ys.push(Dyadic::ZERO);
        }
        Overlay {
            xs: self.xs,
            ys: self.ys,
        }
    }
}

pub type StratumId = (usize, usize);

impl Overlay {
    pub fn xs(&self) -> &[Dyadic] {
        &self.xs
    }

    pub fn ys(&self) -> &[Dyadic] {
        &self.ys
    }

    /// Size of the doubled index grid.
    pub fn dims(&self) -> (usize, usize) {
        (2 * self.xs.len() - 1, 2 * self.ys.len() - 1)
    }

    pub fn strata(&self) -> impl Iterator<Item = StratumId> + '_ {
        let (w, h) = self.dims();
        (0..h).flat_map(move |j| (0..w).map(move |i| (i, j)))
    }

    pub fn kind(&self, (i, j): StratumId) -> StratumKind {
        match (i % 2, j % 2) {
            (1, 1) => StratumKind::Cell,
            (0, 0) => StratumKind::Vertex,
            _ => StratumKind::Edge,
        }
    }

    fn coord_half(v: &[Dyadic], i: usize) -> i128 {
        if i.is_multiple_of(2) {
            half(v[i / 2])
        } else {
            v[i / 2].raw() as i128 + v[i / 2 + 1].raw() as i128
        }
    }

    pub(crate) fn rep(&self, (i, j): StratumId) -> HalfPoint {
        HalfPoint {
            x: Self::coord_half(&self.xs, i),
            y: Self::coord_half(&self.ys, j),
        }
    }

    /// Closed extent of a stratum along one axis.
    fn span(v: &[Dyadic], i: usize) -> (Dyadic, Dyadic) {
        if i.is_multiple_of(2) {
            (v[i / 2], v[i / 2])
        } else {
            (v[i / 2], v[i / 2 + 1])
        }
    }

    /// Closure of a stratum as a (possibly degenerate) closed rectangle.
    pub fn closure_rect(&self, (i, j): StratumId) -> Rect {
        let (x0, x1) = Self::span(&self.xs, i);
        let (y0, y1) = Self::span(&self.ys, j);
        Rect { x0, y0, x1, y1 }
    }

    /// Strata in the closure of `s` (including `s`).
    pub fn closure(&self, (i, j): StratumId) -> Vec<StratumId> {
        let around = |k: usize| -> Vec<usize> {
            if k.is_multiple_of(2) {
                vec![k]
            } else {
                vec![k - 1, k, k + 1]
            }
        };
        let mut out = Vec::with_capacity(9);
        for a in around(i) {
            for b in around(j) {
                out.push((a, b));
            }
        }
        out
    }

    /// Strata whose closure contains `s` (including `s`).
    pub fn star(&self, (i, j): StratumId) -> Vec<StratumId> {
        let (w, h) = self.dims();
        let around = |k: usize, n: usize| -> Vec<usize> {
            if k % 2 == 1 {
                vec![k]
            } else {
                let mut v = vec![k];
                if k > 0 {
                    v.push(k - 1);
                }
                if k + 1 < n {
                    v.push(k + 1);
                }
                v
            }
        };
        let mut out = Vec::with_capacity(9);
        for a in around(i, w) {
            for b in around(j, h) {
                out.push((a, b));
            }
        }
        out
    }

    /// Smallest positive gap between neighbouring grid lines on either axis.
    pub fn min_gap(&self) -> Option<Dyadic> {
        self.xs
            .windows(2)
            .chain(self.ys.windows(2))
            .map(|w| w[1] - w[0])
            .min()
    }

    /// Open neighbourhood of a stratum of "size" `t`: the open cell itself,
    /// a tube of half-width `t` about an open edge, or the open square of
    /// radius `t` about a vertex. For `t` below half the neighbouring gaps
    /// it meets only the strata of the star of `s`.
    pub fn probe(&self, s: StratumId, t: Dyadic) -> OpenRegion {
        let c = self.closure_rect(s);
        let r = match self.kind(s) {
            StratumKind::Cell => c,
            StratumKind::Vertex => c.expand(t),
            StratumKind::Edge => {
                if c.x0 == c.x1 {
                    Rect::new(c.x0 - t, c.y0, c.x1 + t, c.y1)
                } else {
                    Rect::new(c.x0, c.y0 - t, c.x1, c.y1 + t)
                }
            }
        };
        OpenRegion::rect(r)
    }

    /// Largest probe size that stays inside the star of `s`.
    pub fn probe_size(&self, (i, j): StratumId) -> Dyadic {
        let gap = |v: &[Dyadic], k: usize| -> Option<Dyadic> {
            if k % 2 == 1 {
                return None;
            }
            let m = k / 2;
            let left = (m > 0).then(|| v[m] - v[m - 1]);
            let right = (m + 1 < v.len()).then(|| v[m + 1] - v[m]);
            match (left, right) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            }
        };
        let g = [gap(&self.xs, i), gap(&self.ys, j)]
            .into_iter()
            .flatten()
            .min()
            .unwrap_or(Dyadic::ONE);
        g.checked_half().unwrap_or(g)
    }

    /// Inserts the midpoint of every interval; `None` if a midpoint is not
    /// representable.
    pub fn refine(&self) -> Option<Overlay> {
        let split = |v: &[Dyadic]| -> Option<Vec<Dyadic>> {
            let mut out = Vec::with_capacity(2 * v.len());
            for w in v.windows(2) {
                out.push(w[0]);
                let sum = w[0].raw() as i128 + w[1].raw() as i128;
                if sum % 2 != 0 {
                    return None;
                }
                out.push(Dyadic::from_raw((sum / 2) as i64));
            }
            out.extend(v.last());
            Some(out)
        };
        Some(Overlay {
            xs: split(&self.xs)?,
            ys: split(&self.ys)?,
        })
    }
}

//! Finite spectral data of a normal operator in a factor.
//!
//! A [`SpectralMeasure`] lists atoms (a point carrying the class of the
//! eigenprojection) and uniform blocks (a closed rectangle or segment whose
//! spectral mass is spread evenly over it). The crude multiplicity
//! `M_h(O) = [χ_O(h)]` of an open region is then an exact finite sum.

use std::fmt;

use serde::Serialize;

use crate::dimlat::{add_unchecked, cmp_unchecked, DimError, DimValue, FactorType};
use crate::dyadic::Q;
use crate::region::{DyadicPoint, OpenRegion, Rect, Segment, SupportSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error(transparent)]
    Dim(#[from] DimError),
    #[error("two atoms sit at {0}")]
    DuplicateAtom(DyadicPoint),
    #[error("factor {0} admits no blocks: finite rank forces an atomic spectral measure")]
    BlockInFiniteFactor(FactorType),
    #[error("block value {0} is finite; a nonatomic piece in a type I factor has infinite rank")]
    FiniteBlockValue(DimValue),
    #[error("block shape {0} is a single point; use an atom")]
    PointBlock(DyadicPoint),
    #[error("total mass is {got}, but the identity of {factor} has class {expected}")]
    TotalMass {
        factor: FactorType,
        expected: DimValue,
        got: DimValue,
    },
}

/// Closed solid shape carrying a uniform block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Shape {
    Rect(Rect),
    Seg(Segment),
}

impl Shape {
    /// Rectangles with empty interior become segments; `None` for a point.
    pub fn normalized(self) -> Option<Shape> {
        match self {
            Shape::Rect(r) if r.is_thin() => {
                let seg = Segment {
                    a: DyadicPoint::new(r.x0, r.y0),
                    b: DyadicPoint::new(r.x1, r.y1),
                };
                Shape::Seg(seg).normalized()
            }
            Shape::Seg(s) if s.is_point() => None,
            other => Some(other),
        }
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Shape::Rect(r) => *r,
            Shape::Seg(s) => s.as_rect(),
        }
    }

    /// Whether the open region meets the shape.
    pub fn met_by(&self, o: &OpenRegion) -> bool {
        match self {
            Shape::Rect(r) => o.meets_closed_rect(r),
            Shape::Seg(s) => o.meets_segment(s),
        }
    }

    /// Fraction of the shape's area (or length) covered by `o`.
    pub fn fraction_in(&self, o: &OpenRegion) -> Q {
        match self {
            Shape::Rect(r) => Q::new(o.area_within_raw(r), r.area_raw()),
            Shape::Seg(s) => Q::new(o.length_within_raw(s) as i128, s.length().raw() as i128),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Rect(r) => write!(f, "rect {r}"),
            Shape::Seg(s) => write!(f, "seg {s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub pt: DyadicPoint,
    pub val: DimValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub shape: Shape,
    pub val: DimValue,
}

/// Validated finite spectral data of a normal operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectralMeasure {
    factor: FactorType,
    atoms: Vec<Atom>,
    blocks: Vec<Block>,
}

impl SpectralMeasure {
    /// Validates and canonicalizes a presentation: zero-valued parts are
    /// dropped, atoms and blocks are sorted, and the total mass must be the
    /// identity class of the factor.
    pub fn new(
        factor: FactorType,
        atoms: Vec<Atom>,
        blocks: Vec<Block>,
    ) -> Result<Self, SpecError> {
        let mut clean_atoms = Vec::with_capacity(atoms.len());
        for a in atoms {
            factor.check(&a.val)?;
            if !a.val.is_zero() {
                clean_atoms.push(a);
            }
        }
        clean_atoms.sort_by_key(|a| a.pt);
        if let Some(w) = clean_atoms.windows(2).find(|w| w[0].pt == w[1].pt) {
            return Err(SpecError::DuplicateAtom(w[0].pt));
        }

        let mut clean_blocks = Vec::with_capacity(blocks.len());
        for b in blocks {
            factor.check(&b.val)?;
            if b.val.is_zero() {
                continue;
            }
            if factor.is_type_one() {
                if let FactorType::IFin(_) = factor {
                    return Err(SpecError::BlockInFiniteFactor(factor));
                }
                if b.val.is_finite() {
                    return Err(SpecError::FiniteBlockValue(b.val));
                }
            }
            let shape = b
                .shape
                .normalized()
                .ok_or(SpecError::PointBlock(b.shape.bbox().corners()[0]))?;
            clean_blocks.push(Block { shape, val: b.val });
        }
        clean_blocks.sort_by(|a, b| a.shape.cmp(&b.shape).then(cmp_unchecked(&a.val, &b.val)));

        let total = factor.sum(
            clean_atoms
                .iter()
                .map(|a| &a.val)
                .chain(clean_blocks.iter().map(|b| &b.val)),
        );
        let expected = factor.identity();
        match total {
            Ok(got) if got == expected => {}
            Ok(got) => {
                return Err(SpecError::TotalMass {
                    factor,
                    expected,
                    got,
                })
            }
            Err(DimError::Overflow(_)) => {
                return Err(SpecError::TotalMass {
                    factor,
                    expected,
                    got: add_all(
                        clean_atoms
                            .iter()
                            .map(|a| a.val)
                            .chain(clean_blocks.iter().map(|b| b.val)),
                    ),
                })
            }
            Err(e) => return Err(e.into()),
        }

        Ok(SpectralMeasure {
            factor,
            atoms: clean_atoms,
            blocks: clean_blocks,
        })
    }

    /// The scalar operator `λ·1`.
    pub fn scalar(factor: FactorType, pt: DyadicPoint) -> Self {
        SpectralMeasure::new(
            factor,
            vec![Atom {
                pt,
                val: factor.identity(),
            }],
            vec![],
        )
        .expect("the identity class is a valid total mass")
    }

    pub fn factor(&self) -> FactorType {
        self.factor
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn atom_at(&self, pt: &DyadicPoint) -> Option<&Atom> {
        self.atoms
            .binary_search_by_key(pt, |a| a.pt)
            .ok()
            .map(|i| &self.atoms[i])
    }

    /// `M_h(O) = [χ_O(h)]`.
    pub fn crude_multiplicity(&self, o: &OpenRegion) -> DimValue {
        self.crude_excluding(o, None)
    }

    /// `M^c_h(O)`: the crude multiplicity with cardinals capped at `aleph_0`.
    pub fn cruder_multiplicity(&self, o: &OpenRegion) -> DimValue {
        self.factor.cruder(&self.crude_multiplicity(o))
    }

    /// Crude multiplicity of `O ∖ {p}`.
    pub fn crude_excluding(&self, o: &OpenRegion, deleted: Option<&DyadicPoint>) -> DimValue {
        let mut acc = self.factor.zero();
        for a in &self.atoms {
            if Some(&a.pt) != deleted && o.contains_point(&a.pt) {
                acc = add_unchecked(&acc, &a.val);
            }
        }
        for b in &self.blocks {
            let part = match self.factor {
                FactorType::II1 | FactorType::IIInf => {
                    self.factor.scale(&b.val, &b.shape.fraction_in(o))
                }
                _ if b.shape.met_by(o) => b.val,
                _ => continue,
            };
            acc = add_unchecked(&acc, &part);
        }
        acc
    }

    /// `[χ_{B_r(λ) ∖ {λ}}(h)]` with the open sup-norm ball.
    pub fn deleted_neighborhood_class(
        &self,
        center: &DyadicPoint,
        r: crate::dyadic::Dyadic,
    ) -> Result<DimValue, crate::region::RegionError> {
        if !r.is_positive() {
            return Err(crate::region::RegionError::NonpositiveRadius(r));
        }
        Ok(self.crude_excluding(&OpenRegion::square(*center, r), Some(center)))
    }

    /// The spectrum `sp(h)`.
    pub fn support(&self) -> SupportSet {
        self.parts_support(|_| true)
    }

    /// Essential spectrum: the union of the infinite-valued parts. Empty in
    /// finite factors.
    pub fn essential_spectrum(&self) -> SupportSet {
        if self.factor.is_finite() {
            return SupportSet::empty();
        }
        self.parts_support(DimValue::is_infinite)
    }

    fn parts_support(&self, keep: impl Fn(&DimValue) -> bool) -> SupportSet {
        let mut s = SupportSet::empty();
        for a in self.atoms.iter().filter(|a| keep(&a.val)) {
            s.push_point(a.pt);
        }
        for b in self.blocks.iter().filter(|b| keep(&b.val)) {
            match b.shape {
                Shape::Rect(r) => s.push_rect(r),
                Shape::Seg(g) => s.push_segment(g),
            }
        }
        SupportSet::new(s.cells, s.segs, s.pts)
    }

    /// Atomic spectral measure.
    pub fn is_diagonal(&self) -> bool {
        self.blocks.is_empty()
    }

    /// A single atom carrying the identity: `h = λ·1` is central.
    pub fn is_scalar(&self) -> bool {
        self.blocks.is_empty() && self.atoms.len() == 1
    }

    /// Bounding box of the support.
    pub fn bbox(&self) -> Option<Rect> {
        self.support().bbox()
    }

    /// Largest dyadic level among all coordinates.
    pub fn coordinate_level(&self) -> u32 {
        let pts = self.atoms.iter().map(|a| a.pt).chain(
            self.blocks
                .iter()
                .flat_map(|b| b.shape.bbox().corners().into_iter()),
        );
        pts.map(|p| p.x.level().max(p.y.level())).max().unwrap_or(0)
    }

    /// Same operator up to presentation: equal atoms and equal block lists.
    pub fn same_presentation(&self, other: &SpectralMeasure) -> bool {
        self == other
    }
}

fn add_all(values: impl Iterator<Item = DimValue>) -> DimValue {
    values
        .reduce(|a, b| add_unchecked(&a, &b))
        .expect("an overflowing sum has at least one term")
}

impl fmt::Display for SpectralMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.factor)?;
        for a in &self.atoms {
            write!(f, " {}@{}", a.val, a.pt)?;
        }
        for b in &self.blocks {
            write!(f, " {}@{}", b.val, b.shape)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn p(x: &str, y: &str) -> DyadicPoint {
        DyadicPoint::new(d(x), d(y))
    }

    fn unit_segment() -> Shape {
        Shape::Seg(Segment::horizontal(d("0"), d("1"), d("0")))
    }

    #[test]
    fn segment_block_length_fraction() {
        let h = SpectralMeasure::new(
            FactorType::II1,
            vec![],
            vec![Block {
                shape: unit_segment(),
                val: DimValue::rat(1, 1),
            }],
        )
        .unwrap();
        let o = OpenRegion::rect(Rect::new(d("0"), d("-1"), d("1/2"), d("1")));
        assert_eq!(h.crude_multiplicity(&o), DimValue::rat(1, 2));
    }

    #[test]
    fn type_iii_corner_touch_is_infinite() {
        let h = SpectralMeasure::new(
            FactorType::III,
            vec![],
            vec![Block {
                shape: Shape::Rect(Rect::ints(0, 0, 1, 1)),
                val: DimValue::III_INF,
            }],
        )
        .unwrap();
        let corner = OpenRegion::square(p("1", "1"), d("1/8"));
        assert_eq!(h.crude_multiplicity(&corner), DimValue::III_INF);
        let away = OpenRegion::square(p("2", "2"), d("1/8"));
        assert_eq!(h.crude_multiplicity(&away), DimValue::III_ZERO);
    }

    #[test]
    fn cruder_caps_alephs() {
        let f = FactorType::IInf(1);
        let h = SpectralMeasure::new(
            f,
            vec![],
            vec![Block {
                shape: Shape::Rect(Rect::ints(0, 0, 1, 1)),
                val: DimValue::aleph(1),
            }],
        )
        .unwrap();
        let o = OpenRegion::rect(Rect::ints(-1, -1, 2, 2));
        assert_eq!(h.crude_multiplicity(&o), DimValue::aleph(1));
        assert_eq!(h.cruder_multiplicity(&o), DimValue::aleph(0));
        assert_eq!(
            h.cruder_multiplicity(&OpenRegion::empty()),
            DimValue::fin(0)
        );
    }

    #[test]
    fn tail_atoms_count_up() {
        let f = FactorType::IInf(0);
        let mut atoms: Vec<Atom> = (1..=6)
            .map(|j| Atom {
                pt: DyadicPoint::new(Dyadic::pow2_neg(j), Dyadic::ZERO),
                val: DimValue::fin(1),
            })
            .collect();
        atoms.push(Atom {
            pt: p("5", "5"),
            val: DimValue::aleph(0),
        });
        let h = SpectralMeasure::new(f, atoms, vec![]).unwrap();
        for r in 1..=6u32 {
            let o = OpenRegion::square(p("0", "0"), Dyadic::pow2_neg(r));
            // Atoms at 2^-j with 2^-j < 2^-r, i.e. j > r.
            assert_eq!(h.crude_multiplicity(&o), DimValue::fin(6 - r as u64));
        }
    }

    #[test]
    fn validation_errors() {
        let ii1 = FactorType::II1;
        let half = Block {
            shape: Shape::Rect(Rect::ints(0, 0, 1, 1)),
            val: DimValue::rat(1, 2),
        };
        assert!(matches!(
            SpectralMeasure::new(ii1, vec![], vec![half]),
            Err(SpecError::TotalMass { .. })
        ));
        let fin = FactorType::IFin(2);
        assert_eq!(
            SpectralMeasure::new(
                fin,
                vec![],
                vec![Block {
                    shape: unit_segment(),
                    val: DimValue::fin(2)
                }]
            ),
            Err(SpecError::BlockInFiniteFactor(fin))
        );
        let atom = |x: &str| Atom {
            pt: p(x, "0"),
            val: DimValue::rat(1, 2),
        };
        assert_eq!(
            SpectralMeasure::new(ii1, vec![atom("0"), atom("0")], vec![]),
            Err(SpecError::DuplicateAtom(p("0", "0")))
        );
        assert!(matches!(
            SpectralMeasure::new(
                FactorType::IInf(0),
                vec![],
                vec![Block {
                    shape: unit_segment(),
                    val: DimValue::fin(3)
                }]
            ),
            Err(SpecError::FiniteBlockValue(_))
        ));
    }

    #[test]
    fn essential_spectrum_examples() {
        let h = SpectralMeasure::new(
            FactorType::IIInf,
            vec![Atom {
                pt: p("0", "0"),
                val: DimValue::INFINITE_TRACE,
            }],
            vec![Block {
                shape: Shape::Rect(Rect::ints(1, 1, 2, 2)),
                val: DimValue::trace(3, 2),
            }],
        )
        .unwrap();
        assert_eq!(h.essential_spectrum(), SupportSet::point(p("0", "0")));

        let g = SpectralMeasure::new(
            FactorType::II1,
            vec![Atom {
                pt: p("0", "0"),
                val: DimValue::rat(1, 1),
            }],
            vec![],
        )
        .unwrap();
        assert!(g.essential_spectrum().is_empty());
        assert!(g.is_diagonal());
        assert!(!h.is_diagonal());
    }

    #[test]
    fn zero_blocks_are_stripped() {
        let h = SpectralMeasure::new(
            FactorType::II1,
            vec![Atom {
                pt: p("0", "0"),
                val: DimValue::rat(1, 1),
            }],
            vec![Block {
                shape: unit_segment(),
                val: DimValue::rat(0, 1),
            }],
        )
        .unwrap();
        assert!(h.is_diagonal());
    }

    #[test]
    fn deleted_neighborhoods() {
        let isolated = SpectralMeasure::scalar(FactorType::IIInf, p("0", "0"));
        assert_eq!(
            isolated
                .deleted_neighborhood_class(&p("0", "0"), d("1/4"))
                .unwrap(),
            DimValue::trace(0, 1)
        );

        let inside = SpectralMeasure::new(
            FactorType::IInf(0),
            vec![Atom {
                pt: p("1/2", "1/2"),
                val: DimValue::fin(3),
            }],
            vec![Block {
                shape: Shape::Rect(Rect::ints(0, 0, 1, 1)),
                val: DimValue::aleph(0),
            }],
        )
        .unwrap();
        assert_eq!(
            inside
                .deleted_neighborhood_class(&p("1/2", "1/2"), d("1/64"))
                .unwrap(),
            DimValue::aleph(0)
        );
    }
}

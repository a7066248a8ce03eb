//! Decisions about closed unitary orbits.
//!
//! Two normal operators have the same norm-closed unitary orbit exactly
//! when their crude multiplicity functions agree on every open set, and
//! `k` lies in the strong (equivalently, for normal limits, strong*)
//! closure of the orbit of `h` exactly when the cruder functions satisfy
//! `M^c_k <= M^c_h` on every open set.
//!
//! Both questions quantify over all open sets; for finite presentations
//! they reduce to finitely many checks on the joint [`Overlay`]. Each
//! stratum `s` gets a local value: the atom sitting on a vertex, the linear
//! density of segment blocks along an edge, the area density of
//! rectangular blocks over a cell (or the block classes themselves in
//! type I and III, where any open set meeting a block sees all of it).
//! Writing `J_ℓ(h)` for the closure of the strata where `h` has value at
//! least the infinite class `ℓ`, `M_k <= M_h` everywhere iff
//!
//! * `J_ℓ(k) ⊆ J_ℓ(h)` for every infinite value `ℓ` taken by `k`, and
//! * `v_k(s) <= v_h(s)` on every stratum outside the closure of the
//!   infinite strata of `h`.
//!
//! Every failure is turned into an explicit open region on which the two
//! multiplicities are recomputed directly, so a negative verdict never
//! rests on the criterion alone.
//!
//! Spectral data cannot decide unitary equivalence itself: distinct masas
//! can carry operators with identical spectral data that no automorphism
//! relates. Only the closures are decided here.

use std::cmp::Ordering;

use serde::Serialize;

use crate::dimlat::{add_unchecked, cmp_unchecked, DimValue, FactorType};
use crate::dyadic::{Dyadic, Q};
use crate::region::{
    DyadicPoint, OpenRegion, Overlay, OverlayBuilder, RegionError, StratumId, StratumKind,
    SupportSet,
};
use crate::specmeas::{Shape, SpectralMeasure};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrbitError {
    #[error("operators live in different factors: {0} and {1}")]
    FactorMismatch(FactorType, FactorType),
    #[error("the strong*/strong comparison needs a separable predual; {0} is too large")]
    NonSeparablePredual(FactorType),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("no confirming region found near {0}; precision exhausted")]
    WitnessNotFound(String),
    #[error("one-sided domination without equality in the finite factor {0}")]
    RigidityViolated(FactorType),
}

/// Which closure relation a verdict is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `M_h = M_k`: equal norm-closed orbits.
    SameNormClosure,
    /// `M^c_h = M^c_k`: equal strong- (and strong*-) closed orbits.
    SameStrongClosure,
    /// `M^c_k <= M^c_h`: `k` in the strong closure of the orbit of `h`.
    MemberStrongClosure,
}

/// An open region on which the multiplicity functions disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub region: OpenRegion,
    /// Multiplicity of `h` on the region (capped when `capped`).
    pub m_h: DimValue,
    /// Multiplicity of `k` on the region (capped when `capped`).
    pub m_k: DimValue,
    pub capped: bool,
}

impl Witness {
    /// Recomputes both multiplicities and checks that they witness the
    /// failure of `relation`.
    pub fn verify(&self, relation: Relation, h: &SpectralMeasure, k: &SpectralMeasure) -> bool {
        let eval = |m: &SpectralMeasure| {
            if self.capped {
                m.cruder_multiplicity(&self.region)
            } else {
                m.crude_multiplicity(&self.region)
            }
        };
        let (mh, mk) = (eval(h), eval(k));
        if mh != self.m_h || mk != self.m_k {
            return false;
        }
        match relation {
            Relation::SameNormClosure | Relation::SameStrongClosure => mh != mk,
            Relation::MemberStrongClosure => cmp_unchecked(&mk, &mh) == Ordering::Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitVerdict {
    pub relation: Relation,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl OrbitVerdict {
    /// A verdict is sound when it holds, or when its witness re-verifies.
    pub fn verify(&self, h: &SpectralMeasure, k: &SpectralMeasure) -> bool {
        self.holds
            || self
                .witness
                .as_ref()
                .is_some_and(|w| w.verify(self.relation, h, k))
    }
}

fn same_factor(h: &SpectralMeasure, k: &SpectralMeasure) -> Result<FactorType, OrbitError> {
    if h.factor() == k.factor() {
        Ok(h.factor())
    } else {
        Err(OrbitError::FactorMismatch(h.factor(), k.factor()))
    }
}

/// Joint overlay of several presentations.
pub fn joint_overlay(measures: &[&SpectralMeasure]) -> Overlay {
    let mut b = OverlayBuilder::default();
    for m in measures {
        for a in m.atoms() {
            b.add_point(&a.pt);
        }
        for blk in m.blocks() {
            b.add_rect(&blk.shape.bbox());
        }
    }
    b.build()
}

/// Local values of a measure on every stratum of an overlay that contains
/// all of its coordinates, indexed like [`Overlay::strata`].
pub fn stratum_values(m: &SpectralMeasure, ov: &Overlay, capped: bool) -> Vec<DimValue> {
    let f = m.factor();
    let (w, _) = ov.dims();
    let zero = f.zero();
    let mut vals: Vec<DimValue> = ov.strata().map(|_| zero).collect();
    let index = |(i, j): StratumId| j * w + i;
    let xs = ov.xs();
    let ys = ov.ys();
    let pos = |v: &[Dyadic], c: Dyadic| 2 * v.binary_search(&c).expect("coordinate in overlay");

    for a in m.atoms() {
        let s = (pos(xs, a.pt.x), pos(ys, a.pt.y));
        vals[index(s)] = add_unchecked(&vals[index(s)], &a.val);
    }
    for b in m.blocks() {
        let bb = b.shape.bbox();
        let (i0, i1) = (pos(xs, bb.x0), pos(xs, bb.x1));
        let (j0, j1) = (pos(ys, bb.y0), pos(ys, bb.y1));
        let density = match f {
            FactorType::II1 | FactorType::IIInf => {
                let measure = match b.shape {
                    Shape::Rect(r) => r.area(),
                    Shape::Seg(s) => s.length().to_q(),
                };
                f.scale(&b.val, &(Q::from_integer(1) / measure))
            }
            _ => b.val,
        };
        // Only the top-dimensional strata of the shape carry its mass.
        let stride_i: Vec<usize> = if i0 == i1 {
            vec![i0]
        } else {
            (i0 + 1..i1).step_by(2).collect()
        };
        let stride_j: Vec<usize> = if j0 == j1 {
            vec![j0]
        } else {
            (j0 + 1..j1).step_by(2).collect()
        };
        for &i in &stride_i {
            for &j in &stride_j {
                let k = index((i, j));
                vals[k] = add_unchecked(&vals[k], &density);
            }
        }
    }
    if capped {
        for v in &mut vals {
            *v = f.cruder(v);
        }
    }
    vals
}

/// Closure of the set of strata selected by `pick`, as a mask.
fn closure_mask(ov: &Overlay, pick: impl Fn(usize) -> bool) -> Vec<bool> {
    let (w, h) = ov.dims();
    let mut mask = vec![false; w * h];
    for (idx, s) in ov.strata().enumerate() {
        if pick(idx) {
            for (a, b) in ov.closure(s) {
                mask[b * w + a] = true;
            }
        }
    }
    mask
}

/// Stratum where `M_y <= M_x` fails, if any.
fn domination_failure(ov: &Overlay, vx: &[DimValue], vy: &[DimValue]) -> Option<StratumId> {
    let strata: Vec<StratumId> = ov.strata().collect();
    let mut levels: Vec<DimValue> = vy.iter().filter(|v| v.is_infinite()).copied().collect();
    levels.sort_by(cmp_unchecked);
    levels.dedup();
    for level in &levels {
        let jx = closure_mask(ov, |i| cmp_unchecked(&vx[i], level) != Ordering::Less);
        for (i, v) in vy.iter().enumerate() {
            if cmp_unchecked(v, level) != Ordering::Less && !jx[i] {
                return Some(strata[i]);
            }
        }
    }
    let jmin = closure_mask(ov, |i| vx[i].is_infinite());
    for i in 0..vy.len() {
        if !jmin[i] && cmp_unchecked(&vy[i], &vx[i]) == Ordering::Greater {
            return Some(strata[i]);
        }
    }
    None
}

/// Shrinks a probe around `s` until the direct multiplicities confirm the
/// failure of `relation`.
fn confirm(
    relation: Relation,
    h: &SpectralMeasure,
    k: &SpectralMeasure,
    ov: &Overlay,
    s: StratumId,
) -> Result<Witness, OrbitError> {
    let capped = relation != Relation::SameNormClosure;
    let mut t = ov.probe_size(s);
    loop {
        let region = ov.probe(s, t);
        let (m_h, m_k) = if capped {
            (
                h.cruder_multiplicity(&region),
                k.cruder_multiplicity(&region),
            )
        } else {
            (h.crude_multiplicity(&region), k.crude_multiplicity(&region))
        };
        let w = Witness {
            region,
            m_h,
            m_k,
            capped,
        };
        if w.verify(relation, h, k) {
            return Ok(w);
        }
        if ov.kind(s) == StratumKind::Cell {
            return Err(OrbitError::WitnessNotFound(format!(
                "{:?}",
                ov.closure_rect(s)
            )));
        }
        t = t
            .checked_half()
            .ok_or_else(|| OrbitError::WitnessNotFound(format!("{:?}", ov.closure_rect(s))))?;
    }
}

/// `M_k <= M_h` (capped or not), with a confirmed witness on failure.
fn dominates(
    relation: Relation,
    h: &SpectralMeasure,
    k: &SpectralMeasure,
    capped: bool,
    swap: bool,
) -> Result<Option<Witness>, OrbitError> {
    let ov = joint_overlay(&[h, k]);
    let vh = stratum_values(h, &ov, capped);
    let vk = stratum_values(k, &ov, capped);
    let failure = if swap {
        domination_failure(&ov, &vk, &vh)
    } else {
        domination_failure(&ov, &vh, &vk)
    };
    match failure {
        None => Ok(None),
        Some(s) => confirm(relation, h, k, &ov, s).map(Some),
    }
}

fn equality(
    relation: Relation,
    h: &SpectralMeasure,
    k: &SpectralMeasure,
) -> Result<OrbitVerdict, OrbitError> {
    same_factor(h, k)?;
    let capped = relation == Relation::SameStrongClosure;
    let witness = match dominates(relation, h, k, capped, false)? {
        Some(w) => Some(w),
        None => dominates(relation, h, k, capped, true)?,
    };
    Ok(OrbitVerdict {
        relation,
        holds: witness.is_none(),
        witness,
        notes: Vec::new(),
    })
}

/// Whether `h` and `k` have the same norm-closed unitary orbit.
pub fn same_norm_closure(
    h: &SpectralMeasure,
    k: &SpectralMeasure,
) -> Result<OrbitVerdict, OrbitError> {
    equality(Relation::SameNormClosure, h, k)
}

/// Whether `h` and `k` have the same strong-closed (equivalently
/// strong*-closed) unitary orbit.
pub fn same_strong_closure(
    h: &SpectralMeasure,
    k: &SpectralMeasure,
) -> Result<OrbitVerdict, OrbitError> {
    equality(Relation::SameStrongClosure, h, k)
}

/// Whether `k` lies in the strong closure of the unitary orbit of `h`.
///
/// In finite factors one-sided domination forces equality; this is checked
/// on every positive answer.
pub fn member_strong_closure(
    k: &SpectralMeasure,
    h: &SpectralMeasure,
) -> Result<OrbitVerdict, OrbitError> {
    let f = same_factor(h, k)?;
    let witness = dominates(Relation::MemberStrongClosure, h, k, true, false)?;
    let mut notes = Vec::new();
    if witness.is_none() && f.is_finite() {
        if dominates(Relation::MemberStrongClosure, h, k, true, true)?.is_some() {
            return Err(OrbitError::RigidityViolated(f));
        }
        notes.push("finite factor: membership is two-sided, the orbits coincide".to_string());
    }
    Ok(OrbitVerdict {
        relation: Relation::MemberStrongClosure,
        holds: witness.is_none(),
        witness,
        notes,
    })
}

/// Spectra compared against the orbit verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectraReport {
    pub sp_equal: bool,
    pub sp_k_in_sp_h: bool,
    pub same_norm_closure: bool,
    pub member_strong_closure: bool,
    /// Norm equality forces equal spectra; membership forces inclusion.
    pub consistent: bool,
    /// In type III the spectra decide both relations; `None` elsewhere.
    pub type_iii_converse: Option<bool>,
}

pub fn spectra_relations(
    h: &SpectralMeasure,
    k: &SpectralMeasure,
) -> Result<SpectraReport, OrbitError> {
    let f = same_factor(h, k)?;
    let (sh, sk) = (h.support(), k.support());
    let sp_k_in_sp_h = sk.is_subset(&sh);
    let sp_equal = sp_k_in_sp_h && sh.is_subset(&sk);
    let norm = same_norm_closure(h, k)?.holds;
    let member = member_strong_closure(k, h)?.holds;
    let consistent = (!norm || sp_equal) && (!member || sp_k_in_sp_h);
    let type_iii_converse =
        (f == FactorType::III).then_some(norm == sp_equal && member == sp_k_in_sp_h);
    Ok(SpectraReport {
        sp_equal,
        sp_k_in_sp_h,
        same_norm_closure: norm,
        member_strong_closure: member,
        consistent,
        type_iii_converse,
    })
}

/// Scalars in the strong-closed unitary orbit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralMeet {
    pub points: SupportSet,
    /// In a finite factor the orbit meets the center only when `h` is
    /// itself a scalar.
    pub finite_factor: bool,
}

pub fn central_meet(h: &SpectralMeasure) -> CentralMeet {
    if h.factor().is_finite() {
        let points = if h.is_scalar() {
            SupportSet::point(h.atoms()[0].pt)
        } else {
            SupportSet::empty()
        };
        CentralMeet {
            points,
            finite_factor: true,
        }
    } else {
        CentralMeet {
            points: h.essential_spectrum(),
            finite_factor: false,
        }
    }
}

/// Whether the norm closure of the orbit is already strong*-closed: the
/// factor is finite or `h` is central.
pub fn norm_eq_strongstar(h: &SpectralMeasure) -> bool {
    h.factor().is_finite() || h.is_scalar()
}

/// Whether the strong*-closed orbit is strong-closed: the essential
/// spectrum is small.
pub fn strongstar_eq_strong(h: &SpectralMeasure) -> Result<bool, OrbitError> {
    if !h.factor().is_sigma_finite() {
        return Err(OrbitError::NonSeparablePredual(h.factor()));
    }
    let ess = h.essential_spectrum();
    Ok(ess.is_small(&ess.default_frame())?)
}

/// Outcome of the deleted-neighbourhood test at one infinite atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomCheck {
    pub point: DyadicPoint,
    pub value: DimValue,
    /// Smallest radius tried (the first that succeeded, if any).
    pub radius: Dyadic,
    pub deleted_class: DimValue,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormClosedness {
    pub closed: bool,
    pub diagonal: bool,
    pub countable_essential_spectrum: bool,
    pub atoms: Vec<AtomCheck>,
}

/// Number of radii tried below the feature scale around each atom.
const RADIUS_LADDER: u32 = 3;

/// Whether the unitary orbit is norm-closed: `h` is diagonal, its
/// essential spectrum is countable, and every infinite atom strictly
/// outweighs some deleted neighbourhood of it.
pub fn orbit_norm_closed(h: &SpectralMeasure) -> NormClosedness {
    let diagonal = h.is_diagonal();
    let countable = h.essential_spectrum().is_finite_set();
    let ov = joint_overlay(&[h]);
    let mut atoms = Vec::new();
    for a in h.atoms().iter().filter(|a| a.val.is_infinite()) {
        let xi = 2 * ov.xs().binary_search(&a.pt.x).expect("atom in overlay");
        let yi = 2 * ov.ys().binary_search(&a.pt.y).expect("atom in overlay");
        let mut r = ov.probe_size((xi, yi));
        let mut check = None;
        for _ in 0..RADIUS_LADDER {
            let deleted = h
                .deleted_neighborhood_class(&a.pt, r)
                .expect("ladder radii are positive");
            let ok = cmp_unchecked(&deleted, &a.val) == Ordering::Less;
            check = Some(AtomCheck {
                point: a.pt,
                value: a.val,
                radius: r,
                deleted_class: deleted,
                ok,
            });
            if ok {
                break;
            }
            match r.checked_half() {
                Some(next) => r = next,
                None => break,
            }
        }
        atoms.extend(check);
    }
    let closed = diagonal && countable && atoms.iter().all(|c| c.ok);
    NormClosedness {
        closed,
        diagonal,
        countable_essential_spectrum: countable,
        atoms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{Rect, Segment};
    use crate::specmeas::{Atom, Block};

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn p(x: &str, y: &str) -> DyadicPoint {
        DyadicPoint::new(d(x), d(y))
    }

    fn atom(x: &str, y: &str, val: DimValue) -> Atom {
        Atom { pt: p(x, y), val }
    }

    fn block(shape: Shape, val: DimValue) -> Block {
        Block { shape, val }
    }

    fn seg01() -> Shape {
        Shape::Seg(Segment::horizontal(d("0"), d("1"), d("0")))
    }

    #[test]
    fn infinite_deleted_class_absorbs_atom() {
        let f = FactorType::IInf(0);
        let h = SpectralMeasure::new(f, vec![], vec![block(seg01(), DimValue::aleph(0))]).unwrap();
        let k = SpectralMeasure::new(
            f,
            vec![atom("0", "0", DimValue::fin(1))],
            vec![block(seg01(), DimValue::aleph(0))],
        )
        .unwrap();
        assert!(same_norm_closure(&h, &k).unwrap().holds);
    }

    #[test]
    fn segment_versus_two_atoms() {
        let f = FactorType::II1;
        let h = SpectralMeasure::new(f, vec![], vec![block(seg01(), DimValue::rat(1, 1))]).unwrap();
        let k = SpectralMeasure::new(
            f,
            vec![
                atom("0", "0", DimValue::rat(1, 2)),
                atom("1", "0", DimValue::rat(1, 2)),
            ],
            vec![],
        )
        .unwrap();
        let v = same_norm_closure(&h, &k).unwrap();
        assert!(!v.holds);
        assert!(v.verify(&h, &k));
        let spec_witness = OpenRegion::square(p("0", "0"), d("1/4"));
        assert_eq!(h.crude_multiplicity(&spec_witness), DimValue::rat(1, 4));
        assert_eq!(k.crude_multiplicity(&spec_witness), DimValue::rat(1, 2));
        let rel = spectra_relations(&h, &k).unwrap();
        assert!(rel.sp_k_in_sp_h && !rel.sp_equal && rel.consistent);
    }

    #[test]
    fn reordered_presentation_is_same_orbit() {
        let f = FactorType::II1;
        let a = vec![
            atom("0", "0", DimValue::rat(1, 3)),
            atom("1", "0", DimValue::rat(2, 3)),
        ];
        let mut b = a.clone();
        b.reverse();
        let h = SpectralMeasure::new(f, a, vec![]).unwrap();
        let k = SpectralMeasure::new(f, b, vec![]).unwrap();
        assert!(same_norm_closure(&h, &k).unwrap().holds);
    }

    #[test]
    fn caps_equalize_large_alephs() {
        let f = FactorType::IInf(1);
        let sq = Shape::Rect(Rect::ints(0, 0, 1, 1));
        let k = SpectralMeasure::new(f, vec![], vec![block(sq, DimValue::aleph(1))]).unwrap();
        let h = SpectralMeasure::new(
            f,
            vec![atom("5", "5", DimValue::aleph(1))],
            vec![block(sq, DimValue::aleph(0))],
        )
        .unwrap();
        assert!(member_strong_closure(&k, &h).unwrap().holds);
        assert!(!same_norm_closure(&h, &k).unwrap().holds);
    }

    #[test]
    fn infinite_atom_not_dominated_by_finite() {
        let f = FactorType::IIInf;
        let k = SpectralMeasure::new(f, vec![atom("0", "0", DimValue::INFINITE_TRACE)], vec![])
            .unwrap();
        let h = SpectralMeasure::new(
            f,
            vec![
                atom("0", "0", DimValue::trace(3, 1)),
                atom("5", "0", DimValue::INFINITE_TRACE),
            ],
            vec![],
        )
        .unwrap();
        let v = member_strong_closure(&k, &h).unwrap();
        assert!(!v.holds);
        let w = v.witness.as_ref().unwrap();
        assert!(w.region.contains_point(&p("0", "0")));
        assert!(!w.region.contains_point(&p("5", "0")));
        assert!(v.verify(&h, &k));
        assert!(member_strong_closure(&h, &h).unwrap().holds);
    }

    #[test]
    fn type_iii_support_inclusion() {
        let f = FactorType::III;
        let h = SpectralMeasure::new(
            f,
            vec![],
            vec![block(
                Shape::Rect(Rect::ints(0, 0, 1, 1)),
                DimValue::III_INF,
            )],
        )
        .unwrap();
        let k = SpectralMeasure::new(
            f,
            vec![],
            vec![block(
                Shape::Rect(Rect::new(d("0"), d("0"), d("1/2"), d("1"))),
                DimValue::III_INF,
            )],
        )
        .unwrap();
        assert!(member_strong_closure(&k, &h).unwrap().holds);
        assert!(!same_norm_closure(&h, &k).unwrap().holds);
        let halves = SpectralMeasure::new(
            f,
            vec![],
            vec![
                block(
                    Shape::Rect(Rect::new(d("0"), d("0"), d("1/2"), d("1"))),
                    DimValue::III_INF,
                ),
                block(
                    Shape::Rect(Rect::new(d("1/2"), d("0"), d("1"), d("1"))),
                    DimValue::III_INF,
                ),
            ],
        )
        .unwrap();
        assert!(same_norm_closure(&h, &halves).unwrap().holds);
        assert_eq!(
            spectra_relations(&h, &k).unwrap().type_iii_converse,
            Some(true)
        );
    }

    #[test]
    fn factor_mismatch_is_an_error() {
        let h = SpectralMeasure::scalar(FactorType::II1, p("0", "0"));
        let k = SpectralMeasure::scalar(FactorType::IIInf, p("0", "0"));
        assert_eq!(
            same_norm_closure(&h, &k).unwrap_err(),
            OrbitError::FactorMismatch(FactorType::II1, FactorType::IIInf)
        );
    }

    #[test]
    fn classifiers() {
        let ii1 = SpectralMeasure::new(
            FactorType::II1,
            vec![
                atom("0", "0", DimValue::rat(1, 2)),
                atom("1", "0", DimValue::rat(1, 2)),
            ],
            vec![],
        )
        .unwrap();
        assert!(norm_eq_strongstar(&ii1));
        assert!(strongstar_eq_strong(&ii1).unwrap());
        assert!(central_meet(&ii1).points.is_empty());

        let scalar = SpectralMeasure::scalar(FactorType::IIInf, p("0", "0"));
        assert!(norm_eq_strongstar(&scalar));
        assert_eq!(central_meet(&scalar).points, SupportSet::point(p("0", "0")));

        let blocky = SpectralMeasure::new(
            FactorType::IIInf,
            vec![],
            vec![block(
                Shape::Rect(Rect::ints(0, 0, 1, 1)),
                DimValue::INFINITE_TRACE,
            )],
        )
        .unwrap();
        assert!(!norm_eq_strongstar(&blocky));
        assert!(!strongstar_eq_strong(&blocky).unwrap());

        let seg = SpectralMeasure::new(
            FactorType::IInf(0),
            vec![],
            vec![block(seg01(), DimValue::aleph(0))],
        )
        .unwrap();
        assert!(strongstar_eq_strong(&seg).unwrap());

        let big = SpectralMeasure::scalar(FactorType::IInf(1), p("0", "0"));
        assert_eq!(
            strongstar_eq_strong(&big).unwrap_err(),
            OrbitError::NonSeparablePredual(FactorType::IInf(1))
        );
    }

    #[test]
    fn norm_closedness() {
        let atoms: Vec<Atom> = (1..=4)
            .map(|n| Atom {
                pt: DyadicPoint::new(Dyadic::pow2_neg(n), Dyadic::ZERO),
                val: DimValue::rat(1, 1 << n),
            })
            .chain(std::iter::once(atom("3", "0", DimValue::rat(1, 16))))
            .collect();
        let h = SpectralMeasure::new(FactorType::II1, atoms, vec![]).unwrap();
        assert!(orbit_norm_closed(&h).closed);

        let scalar = SpectralMeasure::scalar(FactorType::IInf(0), p("0", "0"));
        assert!(orbit_norm_closed(&scalar).closed);

        let touching = SpectralMeasure::new(
            FactorType::IIInf,
            vec![atom("0", "0", DimValue::INFINITE_TRACE)],
            vec![block(
                Shape::Rect(Rect::ints(0, 0, 1, 1)),
                DimValue::INFINITE_TRACE,
            )],
        )
        .unwrap();
        let report = orbit_norm_closed(&touching);
        assert!(!report.closed);
        assert!(!report.atoms[0].ok);
        assert_eq!(report.atoms[0].deleted_class, DimValue::INFINITE_TRACE);
    }
}

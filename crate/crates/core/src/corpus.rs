//! Seeded random presentations and pairs for cross-checking.
//!
//! Pairs come in four flavours so that both answers of every relation are
//! exercised: an equivalent rewrite of the same operator, a dominated
//! operator (mass removed where the factor allows it), a small
//! perturbation, and an independent draw.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dimlat::{DimValue, FactorType};
use crate::dyadic::{Dyadic, Q};
use crate::region::{DyadicPoint, Rect, Segment};
use crate::specmeas::{Atom, Block, Shape, SpectralMeasure};

/// Factor types covered by the corpus.
pub const FACTORS: [FactorType; 6] = [
    FactorType::IFin(3),
    FactorType::IInf(0),
    FactorType::IInf(1),
    FactorType::II1,
    FactorType::IIInf,
    FactorType::III,
];

/// Coordinates are multiples of `2^-GRID_LEVEL` in `[0, 1]`.
pub const GRID_LEVEL: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Rewrite,
    Dominated,
    Perturbed,
    Independent,
}

#[derive(Debug, Clone)]
pub struct Pair {
    pub kind: PairKind,
    pub h: SpectralMeasure,
    pub k: SpectralMeasure,
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn coord<R: Rng>(rng: &mut R) -> Dyadic {
    Dyadic::new(rng.gen_range(0..=(1i64 << GRID_LEVEL)), GRID_LEVEL)
}

fn point<R: Rng>(rng: &mut R) -> DyadicPoint {
    DyadicPoint::new(coord(rng), coord(rng))
}

fn shape<R: Rng>(rng: &mut R) -> Shape {
    let step = Dyadic::pow2_neg(GRID_LEVEL);
    let max = 1i64 << GRID_LEVEL;
    let lo = |rng: &mut R| rng.gen_range(0..max);
    if rng.gen_bool(0.5) {
        let (x0, y0) = (lo(rng), lo(rng));
        let x1 = rng.gen_range(x0 + 1..=max);
        let y1 = rng.gen_range(y0 + 1..=max);
        Shape::Rect(Rect::new(
            step.mul_int(x0),
            step.mul_int(y0),
            step.mul_int(x1),
            step.mul_int(y1),
        ))
    } else {
        let (a, b) = (lo(rng), lo(rng));
        let c = rng.gen_range(a + 1..=max);
        let fixed = step.mul_int(b);
        if rng.gen_bool(0.5) {
            Shape::Seg(Segment::horizontal(step.mul_int(a), step.mul_int(c), fixed))
        } else {
            Shape::Seg(Segment::vertical(fixed, step.mul_int(a), step.mul_int(c)))
        }
    }
}

/// Random positive weights summing to `total` (integers).
fn split_integer<R: Rng>(rng: &mut R, total: u64, parts: usize) -> Vec<u64> {
    let mut cuts: Vec<u64> = (0..parts - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

fn distinct_points<R: Rng>(rng: &mut R, n: usize) -> Vec<DyadicPoint> {
    let mut pts: Vec<DyadicPoint> = Vec::new();
    while pts.len() < n {
        let p = point(rng);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

/// A random valid presentation in `factor`.
pub fn random_measure<R: Rng>(factor: FactorType, rng: &mut R) -> SpectralMeasure {
    let n_atoms = rng.gen_range(1..=3);
    let n_blocks = if factor.is_type_one() && factor.is_finite() {
        0
    } else {
        rng.gen_range(0..=2)
    };
    let pts = distinct_points(rng, n_atoms);
    let shapes: Vec<Shape> = (0..n_blocks).map(|_| shape(rng)).collect();
    let parts = n_atoms + n_blocks;

    let values: Vec<DimValue> = match factor {
        FactorType::IFin(n) => {
            let w = split_integer(rng, n, parts);
            w.into_iter().map(DimValue::fin).collect()
        }
        FactorType::II1 => {
            let den = 8;
            let w = split_integer(rng, den, parts);
            w.into_iter()
                .map(|x| DimValue::rat(x as i128, den as i128))
                .collect()
        }
        FactorType::IIInf => {
            let mut v: Vec<DimValue> = (0..parts)
                .map(|_| {
                    if rng.gen_bool(0.35) {
                        DimValue::INFINITE_TRACE
                    } else {
                        DimValue::trace(rng.gen_range(0..=6), 4)
                    }
                })
                .collect();
            let i = rng.gen_range(0..parts);
            v[i] = DimValue::INFINITE_TRACE;
            v
        }
        FactorType::IInf(top) => {
            let mut v: Vec<DimValue> = (0..parts)
                .map(|i| {
                    let is_block = i >= n_atoms;
                    if is_block || rng.gen_bool(0.3) {
                        DimValue::aleph(rng.gen_range(0..=top))
                    } else {
                        DimValue::fin(rng.gen_range(0..=3))
                    }
                })
                .collect();
            let i = rng.gen_range(0..parts);
            v[i] = DimValue::aleph(top);
            v
        }
        FactorType::III => vec![DimValue::III_INF; parts],
    };

    let atoms = pts
        .into_iter()
        .zip(&values)
        .map(|(pt, val)| Atom { pt, val: *val })
        .collect();
    let blocks = shapes
        .into_iter()
        .zip(&values[n_atoms..])
        .map(|(shape, val)| Block { shape, val: *val })
        .collect();
    SpectralMeasure::new(factor, atoms, blocks).expect("generated presentation is valid")
}

fn halves(shape: Shape) -> Option<(Shape, Shape)> {
    match shape {
        Shape::Rect(r) => {
            let mid = Dyadic::midpoint(r.x0, r.x1);
            Some((
                Shape::Rect(Rect::new(r.x0, r.y0, mid, r.y1)),
                Shape::Rect(Rect::new(mid, r.y0, r.x1, r.y1)),
            ))
        }
        Shape::Seg(s) => {
            let m = DyadicPoint::new(
                Dyadic::midpoint(s.a.x, s.b.x),
                Dyadic::midpoint(s.a.y, s.b.y),
            );
            Some((
                Shape::Seg(Segment::new(s.a, m).ok()?),
                Shape::Seg(Segment::new(m, s.b).ok()?),
            ))
        }
    }
}

/// The same operator written differently: a block split in two halves,
/// finite atoms on infinite blocks rescaled (absorbed), parts reordered.
pub fn rewrite<R: Rng>(m: &SpectralMeasure, rng: &mut R) -> SpectralMeasure {
    let f = m.factor();
    let mut blocks: Vec<Block> = Vec::new();
    for b in m.blocks() {
        match halves(b.shape) {
            Some((p, q)) if rng.gen_bool(0.7) => {
                let half = f.scale(&b.val, &Q::new(1, 2));
                blocks.push(Block {
                    shape: p,
                    val: half,
                });
                blocks.push(Block {
                    shape: q,
                    val: half,
                });
            }
            _ => blocks.push(*b),
        }
    }
    let mut atoms: Vec<Atom> = m.atoms().to_vec();
    if let FactorType::IInf(_) = f {
        // A finite atom on an infinite block is absorbed by every open set
        // around it; any finite value gives the same norm closure.
        for a in &mut atoms {
            let covered = m.blocks().iter().any(|b| match b.shape {
                Shape::Rect(r) => r.contains_closed(&a.pt),
                Shape::Seg(s) => s.contains(&a.pt),
            });
            if covered && a.val.is_finite() {
                a.val = DimValue::fin(rng.gen_range(0..=4));
            }
        }
    }
    atoms.shuffle(rng);
    blocks.shuffle(rng);
    SpectralMeasure::new(f, atoms, blocks).expect("rewrite preserves validity")
}

/// An operator whose multiplicities are dominated by those of `m`, when
/// the factor leaves room (finite atoms and finite blocks can be dropped
/// while an infinite part keeps the total).
pub fn dominated<R: Rng>(m: &SpectralMeasure, rng: &mut R) -> SpectralMeasure {
    let f = m.factor();
    if f.is_finite() {
        return rewrite(m, rng);
    }
    let keep_inf = |v: &DimValue| v.is_infinite();
    let mut atoms: Vec<Atom> = m
        .atoms()
        .iter()
        .copied()
        .filter(|a| keep_inf(&a.val) || rng.gen_bool(0.5))
        .collect();
    let mut blocks: Vec<Block> = m
        .blocks()
        .iter()
        .copied()
        .filter(|b| keep_inf(&b.val) || rng.gen_bool(0.5))
        .collect();
    if atoms.len() == m.atoms().len() && blocks.len() == m.blocks().len() {
        if let Some(i) = atoms.iter().position(|a| !keep_inf(&a.val)) {
            atoms.remove(i);
        } else if let Some(i) = blocks.iter().position(|b| !keep_inf(&b.val)) {
            blocks.remove(i);
        }
    }
    if f == FactorType::III {
        // Keep a nonempty sub-collection of the parts.
        if atoms.len() + blocks.len() > 1 && rng.gen_bool(0.5) {
            if !blocks.is_empty() && rng.gen_bool(0.5) {
                blocks.pop();
            } else if !atoms.is_empty() {
                atoms.pop();
            }
        }
        if atoms.is_empty() && blocks.is_empty() {
            atoms.push(m.atoms().first().copied().unwrap_or(Atom {
                pt: m.blocks()[0].shape.bbox().corners()[0],
                val: DimValue::III_INF,
            }));
        }
    } else if let FactorType::IInf(top) = f {
        // Lower an infinite class when a larger one keeps the total.
        if top > 0 {
            if let Some(a) = atoms.iter_mut().find(|a| a.val == DimValue::aleph(0)) {
                a.val = DimValue::fin(rng.gen_range(0..=2));
            }
        }
    }
    match SpectralMeasure::new(f, atoms, blocks) {
        Ok(k) => k,
        Err(_) => m.clone(),
    }
}

/// A nearby operator: one atom moved by a grid step (unchanged if no move
/// is valid).
pub fn perturbed<R: Rng>(m: &SpectralMeasure, rng: &mut R) -> SpectralMeasure {
    let f = m.factor();
    let step = Dyadic::pow2_neg(GRID_LEVEL);
    let atoms = m.atoms().to_vec();
    let blocks = m.blocks().to_vec();
    for _ in 0..8 {
        if atoms.is_empty() {
            break;
        }
        let i = rng.gen_range(0..atoms.len());
        let mut moved = atoms.clone();
        let delta = if rng.gen_bool(0.5) { step } else { -step };
        if rng.gen_bool(0.5) {
            moved[i].pt.x = moved[i].pt.x + delta;
        } else {
            moved[i].pt.y = moved[i].pt.y + delta;
        }
        if let Ok(k) = SpectralMeasure::new(f, moved, blocks.clone()) {
            return k;
        }
    }
    m.clone()
}

/// `count` seeded pairs in `factor`, cycling through the four kinds.
pub fn pairs(factor: FactorType, count: usize, seed: u64) -> Vec<Pair> {
    let stream = FACTORS.iter().position(|f| *f == factor).unwrap_or(99) as u64;
    let mut rng = rng(seed, stream);
    (0..count)
        .map(|i| {
            let h = random_measure(factor, &mut rng);
            let (kind, k) = match i % 4 {
                0 => (PairKind::Rewrite, rewrite(&h, &mut rng)),
                1 => (PairKind::Dominated, dominated(&h, &mut rng)),
                2 => (PairKind::Perturbed, perturbed(&h, &mut rng)),
                _ => (PairKind::Independent, random_measure(factor, &mut rng)),
            };
            Pair { kind, h, k }
        })
        .collect()
}

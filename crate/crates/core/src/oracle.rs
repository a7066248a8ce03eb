//! Brute-force comparison of multiplicity functions.
//!
//! Independent of the stratified decision procedure: the two crude
//! multiplicity functions are evaluated directly on a large explicit family
//! of open sets — every open dyadic square down to a fixed level inside
//! the frame, deleted squares around every atom, and random unions of
//! squares — and compared value by value.

use std::cmp::Ordering;

use rand::Rng;

use crate::corpus;
use crate::dimlat::{cmp_unchecked, DimValue};
use crate::dyadic::Dyadic;
use crate::orbits::joint_overlay;
use crate::region::{DyadicPoint, OpenRegion};
use crate::specmeas::SpectralMeasure;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Squares go down to side `2^-(coordinate level + extra_levels)`.
    pub extra_levels: u32,
    pub random_unions: usize,
    pub max_union: usize,
    pub deleted_radii: u32,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            extra_levels: 2,
            random_unions: 10_000,
            max_union: 6,
            deleted_radii: 3,
            seed: 0,
        }
    }
}

/// Which relations survived the whole family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOutcome {
    /// `M_h(O) = M_k(O)` on every probed `O`.
    pub equal: bool,
    /// `M^c_h(O) = M^c_k(O)` on every probed `O`.
    pub equal_capped: bool,
    /// `M^c_k(O) <= M^c_h(O)` on every probed `O`.
    pub k_below_h: bool,
    /// `M^c_h(O) <= M^c_k(O)` on every probed `O`.
    pub h_below_k: bool,
    pub regions: usize,
}

struct Tally {
    equal: bool,
    equal_capped: bool,
    k_below_h: bool,
    h_below_k: bool,
    regions: usize,
}

impl Tally {
    fn record(&mut self, h: &SpectralMeasure, mh: DimValue, mk: DimValue) {
        let f = h.factor();
        let (ch, ck) = (f.cruder(&mh), f.cruder(&mk));
        self.equal &= mh == mk;
        self.equal_capped &= ch == ck;
        let ord = cmp_unchecked(&ck, &ch);
        self.k_below_h &= ord != Ordering::Greater;
        self.h_below_k &= ord != Ordering::Less;
        self.regions += 1;
    }

    fn all_failed(&self) -> bool {
        !self.equal && !self.equal_capped && !self.k_below_h && !self.h_below_k
    }
}

/// Compares the multiplicity functions of `h` and `k` on the full family.
pub fn compare(h: &SpectralMeasure, k: &SpectralMeasure, cfg: &OracleConfig) -> OracleOutcome {
    let mut tally = Tally {
        equal: true,
        equal_capped: true,
        k_below_h: true,
        h_below_k: true,
        regions: 0,
    };
    let frame = h.support().union(&k.support()).default_frame();
    let level = h.coordinate_level().max(k.coordinate_level()) + cfg.extra_levels;

    let mut squares = Vec::new();
    for l in 0..=level {
        squares.extend(frame.lattice_squares(l));
    }
    for sq in &squares {
        let o = OpenRegion::rect(*sq);
        tally.record(h, h.crude_multiplicity(&o), k.crude_multiplicity(&o));
        if tally.all_failed() {
            return finish(tally);
        }
    }

    let ov = joint_overlay(&[h, k]);
    let gap = ov.min_gap().unwrap_or(Dyadic::ONE);
    let atoms: Vec<DyadicPoint> = h.atoms().iter().chain(k.atoms()).map(|a| a.pt).collect();
    for pt in &atoms {
        let mut r = gap.checked_half().unwrap_or(gap);
        for _ in 0..cfg.deleted_radii {
            let o = OpenRegion::square(*pt, r);
            tally.record(
                h,
                h.crude_excluding(&o, Some(pt)),
                k.crude_excluding(&o, Some(pt)),
            );
            match r.checked_half() {
                Some(next) => r = next,
                None => break,
            }
        }
    }

    let mut rng = corpus::rng(cfg.seed, 0x0ac1e);
    for _ in 0..cfg.random_unions {
        if tally.all_failed() {
            break;
        }
        let n = rng.gen_range(1..=cfg.max_union);
        let o = OpenRegion::from_rects((0..n).map(|_| squares[rng.gen_range(0..squares.len())]));
        tally.record(h, h.crude_multiplicity(&o), k.crude_multiplicity(&o));
    }
    finish(tally)
}

fn finish(t: Tally) -> OracleOutcome {
    OracleOutcome {
        equal: t.equal,
        equal_capped: t.equal_capped,
        k_below_h: t.k_below_h,
        h_below_k: t.h_below_k,
        regions: t.regions,
    }
}

//! The invariant corpus: ten criteria, each checked against an independent
//! computation (brute-force open-set comparison, permutation enumeration,
//! direct eigenvalue counts, region-level support comparison).

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{self, Pair};
use crate::dimlat::{DimValue, FactorType};
use crate::distance::linalg::{conjugation_gap, permutation_matrix, random_unitary};
use crate::distance::{
    construct_unitary_grid, cycle_permutation, delta_matrix, delta_presentation, dist_upper_bound,
    harmonic_pair, DistanceError, GridCell, NormalMatrix,
};
use crate::dyadic::Dyadic;
use crate::oracle::{self, OracleConfig};
use crate::orbits::{
    member_strong_closure, norm_eq_strongstar, orbit_norm_closed, same_norm_closure,
    same_strong_closure, strongstar_eq_strong,
};
use crate::region::{DyadicPoint, Rect, Segment, SupportSet};
use crate::specmeas::{Atom, Block, Shape, SpectralMeasure};

#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub seed: u64,
    pub pairs_per_factor: usize,
    pub oracle: OracleConfig,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            seed: 0,
            pairs_per_factor: 200,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "oracle equivalence of orbit decisions"),
    (2, "finite-factor rigidity"),
    (3, "truncated harmonic pair"),
    (4, "Weyl equality for Hermitian matrices"),
    (5, "distance bounded by spectral distance"),
    (6, "grid construction contract"),
    (7, "smallness suite"),
    (8, "closure classifier fixtures"),
    (9, "type III support theorems"),
    (10, "spectral distance bracket consistency"),
];

/// Runs one criterion.
pub fn run(id: u8, cfg: &SelftestConfig) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => oracle_equivalence(cfg),
        2 => finite_rigidity(cfg),
        3 => harmonic(),
        4 => weyl(cfg),
        5 => distance_bound(cfg),
        6 => grid_contract(cfg),
        7 => smallness(cfg),
        8 => classifiers(cfg),
        9 => type_iii(cfg),
        10 => delta_consistency(cfg),
        _ => Err(format!("unknown criterion {id}")),
    };
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown", |c| c.1);
    let (pass, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionResult {
        id,
        name,
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every criterion in order.
pub fn run_all(cfg: &SelftestConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|(id, _)| run(*id, cfg)).collect()
}

type Outcome = Result<String, String>;

fn corpus_pairs(f: FactorType, cfg: &SelftestConfig) -> Vec<Pair> {
    corpus::pairs(f, cfg.pairs_per_factor, cfg.seed)
}

fn describe(p: &Pair) -> String {
    format!("{:?} pair\nh = {:?}\nk = {:?}", p.kind, p.h, p.k)
}

fn oracle_equivalence(cfg: &SelftestConfig) -> Outcome {
    let mut checked = 0;
    let mut holds = [0usize; 2];
    for f in corpus::FACTORS {
        let pairs = corpus_pairs(f, cfg);
        let results: Vec<Result<(bool, bool), String>> = pairs
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let ocfg = OracleConfig {
                    seed: cfg.seed ^ (i as u64) << 8,
                    ..cfg.oracle
                };
                let o = oracle::compare(&p.h, &p.k, &ocfg);
                let norm = same_norm_closure(&p.h, &p.k).map_err(|e| e.to_string())?;
                let member = member_strong_closure(&p.k, &p.h).map_err(|e| e.to_string())?;
                let strong = same_strong_closure(&p.h, &p.k).map_err(|e| e.to_string())?;
                for v in [&norm, &member, &strong] {
                    if !v.verify(&p.h, &p.k) {
                        return Err(format!("witness does not re-verify: {v:?}"));
                    }
                }
                if norm.holds != o.equal
                    || member.holds != o.k_below_h
                    || strong.holds != o.equal_capped
                {
                    return Err(format!(
                        "decision (norm {}, member {}, strong {}) vs oracle {o:?}",
                        norm.holds, member.holds, strong.holds
                    ));
                }
                Ok((norm.holds, member.holds))
            })
            .collect();
        for (p, r) in pairs.iter().zip(results) {
            match r {
                Ok((n, m)) => {
                    checked += 1;
                    holds[0] += n as usize;
                    holds[1] += m as usize;
                }
                Err(e) => return Err(format!("{f}: {e}\n{}", describe(p))),
            }
        }
    }
    Ok(format!(
        "{checked} pairs agree ({} equal norm closures, {} memberships)",
        holds[0], holds[1]
    ))
}

fn finite_rigidity(cfg: &SelftestConfig) -> Outcome {
    let mut checked = 0;
    let mut one_sided = 0;
    for f in [FactorType::II1, FactorType::IFin(3)] {
        for p in corpus_pairs(f, cfg) {
            let fwd = member_strong_closure(&p.k, &p.h).map_err(|e| format!("{f}: {e}"))?;
            let bwd = member_strong_closure(&p.h, &p.k).map_err(|e| format!("{f}: {e}"))?;
            let norm = same_norm_closure(&p.h, &p.k).map_err(|e| format!("{f}: {e}"))?;
            if (fwd.holds && bwd.holds) != norm.holds || fwd.holds != bwd.holds {
                return Err(format!(
                    "{f}: member {} / {} but norm {}\n{}",
                    fwd.holds,
                    bwd.holds,
                    norm.holds,
                    describe(&p)
                ));
            }
            one_sided += fwd.holds as usize;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} pairs, {one_sided} memberships, all two-sided"
    ))
}

fn harmonic() -> Outcome {
    let mut mins = Vec::new();
    for n in [10usize, 50, 200] {
        let (h, k) = harmonic_pair(n);
        let mut min = f64::INFINITY;
        for j in 1..=n {
            let u = permutation_matrix(&cycle_permutation(n, j));
            let gap = conjugation_gap(&u, h.matrix(), k.matrix());
            if gap > 2.0 / j as f64 + 1e-12 {
                return Err(format!("n={n}, j={j}: gap {gap} > 2/j"));
            }
            min = min.min(gap);
        }
        let delta = delta_matrix(&h, &k).map_err(|e| e.to_string())?;
        if delta > 2.0 / n as f64 + 1e-12 {
            return Err(format!("n={n}: delta {delta} > 2/n"));
        }
        if min > 2.0 / n as f64 + 1e-12 {
            return Err(format!("n={n}: best cycle gap {min} > 2/n"));
        }
        let zeros = |m: &NormalMatrix| m.eigenvalues().iter().filter(|z| z.norm() == 0.0).count();
        let (zh, zk) = (zeros(&h), zeros(&k));
        if zh == zk {
            return Err(format!("n={n}: atom at 0 has equal multiplicity {zh}"));
        }
        mins.push(format!(
            "n={n}: min gap {min:.3e}, delta {delta:.3e}, atoms at 0: {zh} vs {zk}"
        ));
    }
    Ok(mins.join("; "))
}

fn random_normal(
    rng: &mut ChaCha8Rng,
    n: usize,
    hermitian: bool,
) -> (Vec<Complex64>, NormalMatrix) {
    let values: Vec<Complex64> = (0..n)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if hermitian {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            };
            Complex64::new(re, im)
        })
        .collect();
    let u = random_unitary(n, rng);
    let m = NormalMatrix::from_spectrum(&values, &u).expect("unitary conjugate of a diagonal");
    (values, m)
}

/// Minimum over all permutations of the largest eigenvalue displacement.
fn brute_force_delta(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn go(
        a: &[Complex64],
        b: &[Complex64],
        used: &mut Vec<bool>,
        i: usize,
        cur: f64,
        best: &mut f64,
    ) {
        if cur >= *best {
            return;
        }
        if i == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(a, b, used, i + 1, cur.max((a[i] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

fn weyl(cfg: &SelftestConfig) -> Outcome {
    let mut rng = corpus::rng(cfg.seed, 40);
    let mut worst_dist = 0.0f64;
    for case in 0..50 {
        let n = rng.gen_range(1..=6);
        let (a, h) = random_normal(&mut rng, n, true);
        let (b, k) = random_normal(&mut rng, n, true);
        let delta = delta_matrix(&h, &k).map_err(|e| e.to_string())?;
        let mut sa: Vec<f64> = a.iter().map(|z| z.re).collect();
        let mut sb: Vec<f64> = b.iter().map(|z| z.re).collect();
        sa.sort_by(f64::total_cmp);
        sb.sort_by(f64::total_cmp);
        let sorted = sa
            .iter()
            .zip(&sb)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let brute = brute_force_delta(&a, &b);
        if (delta - sorted).abs() > 1e-12 || (delta - brute).abs() > 1e-12 {
            return Err(format!(
                "case {case}: delta {delta}, sorted formula {sorted}, permutations {brute}"
            ));
        }
        let rep = dist_upper_bound(&h, &k, 8, cfg.seed + case).map_err(|e| e.to_string())?;
        let diff = (rep.dist_ub - delta).abs();
        if diff > 1e-6 {
            return Err(format!(
                "case {case}: dist_ub {} vs delta {delta}",
                rep.dist_ub
            ));
        }
        worst_dist = worst_dist.max(diff);
    }
    Ok(format!(
        "50 pairs, max |dist_ub - delta| = {worst_dist:.2e}"
    ))
}

fn distance_bound(cfg: &SelftestConfig) -> Outcome {
    let mut rng = corpus::rng(cfg.seed, 50);
    let mut worst = f64::NEG_INFINITY;
    for case in 0..100 {
        let n = rng.gen_range(1..=6);
        let (_, h) = random_normal(&mut rng, n, false);
        let (_, k) = random_normal(&mut rng, n, false);
        let rep = dist_upper_bound(&h, &k, 4, cfg.seed + case).map_err(|e| e.to_string())?;
        let slack = rep.dist_ub - rep.delta_exact;
        if slack > 1e-9 {
            return Err(format!(
                "case {case}: dist_ub {} > delta {}",
                rep.dist_ub, rep.delta_exact
            ));
        }
        worst = worst.max(slack);
    }
    Ok(format!("100 pairs, max dist_ub - delta = {worst:.2e}"))
}

fn grid_contract(cfg: &SelftestConfig) -> Outcome {
    let mut rng = corpus::rng(cfg.seed, 60);
    let mut mismatches = 0;
    for mesh in [0.25, 1.0 / 16.0, 1.0 / 64.0] {
        let side = mesh / std::f64::consts::SQRT_2;
        let in_cell = |rng: &mut ChaCha8Rng, (i, j): (i64, i64)| {
            Complex64::new(
                (i as f64 + rng.gen_range(0.05..0.95)) * side,
                (j as f64 + rng.gen_range(0.05..0.95)) * side,
            )
        };
        for case in 0..50 {
            let n = rng.gen_range(1..=6);
            let cells: Vec<(i64, i64)> = (0..n)
                .map(|_| (rng.gen_range(-6..6), rng.gen_range(-6..6)))
                .collect();
            let hv: Vec<Complex64> = cells.iter().map(|c| in_cell(&mut rng, *c)).collect();
            let kv: Vec<Complex64> = cells.iter().map(|c| in_cell(&mut rng, *c)).collect();
            let h = NormalMatrix::from_spectrum(&hv, &random_unitary(n, &mut rng))
                .map_err(|e| e.to_string())?;
            let k = NormalMatrix::from_spectrum(&kv, &random_unitary(n, &mut rng))
                .map_err(|e| e.to_string())?;
            let g = construct_unitary_grid(&h, &k, mesh)
                .map_err(|e| format!("mesh {mesh}, case {case}: {e}"))?;
            let check = conjugation_gap(&g.unitary, h.matrix(), k.matrix());
            if g.achieved_norm > mesh || check > mesh {
                return Err(format!(
                    "mesh {mesh}, case {case}: achieved {} (recomputed {check})",
                    g.achieved_norm
                ));
            }

            // Move one eigenvalue of k far away: some cell must now disagree.
            let mut bad = kv.clone();
            bad[0] = in_cell(&mut rng, (40, 40));
            let kb = NormalMatrix::diagonal(&bad);
            match construct_unitary_grid(&h, &kb, mesh) {
                Err(DistanceError::MultiplicityMismatch {
                    cell,
                    h_count,
                    k_count,
                }) => {
                    let replay = GridCell::of(cell.center(), side);
                    if replay != cell
                        || cell.count(&h) != h_count
                        || cell.count(&kb) != k_count
                        || h_count == k_count
                    {
                        return Err(format!(
                            "mesh {mesh}, case {case}: witness {cell:?} does not replay"
                        ));
                    }
                    mismatches += 1;
                }
                other => {
                    return Err(format!(
                        "mesh {mesh}, case {case}: expected a mismatch, got {other:?}"
                    ))
                }
            }
        }
    }
    Ok(format!(
        "150 constructions within mesh, {mismatches} mismatches re-verified"
    ))
}

fn d(n: i64, e: u32) -> Dyadic {
    Dyadic::new(n, e)
}

fn smallness(cfg: &SelftestConfig) -> Outcome {
    let frame = Rect::ints(-2, -2, 3, 3);
    let seg = SupportSet::new(
        vec![],
        vec![Segment::horizontal(d(0, 0), d(1, 0), d(0, 0))],
        vec![],
    );
    let square = SupportSet::new(vec![Rect::ints(0, 0, 1, 1)], vec![], vec![]);
    let ring = SupportSet::new(vec![], Rect::ints(0, 0, 1, 1).boundary().to_vec(), vec![]);
    let small = |s: &SupportSet| s.is_small(&frame).map_err(|e| e.to_string());
    if !small(&seg)? {
        return Err("segment reported not small".into());
    }
    if small(&square)? {
        return Err("filled square reported small".into());
    }
    if small(&ring)? {
        return Err("square boundary reported small".into());
    }

    // Random small sets: segments and points on the quarter grid, kept
    // when small; every sub-collection must stay small.
    let mut rng = corpus::rng(cfg.seed, 70);
    let mut subsets = 0;
    let mut tries = 0;
    while subsets < 100 {
        tries += 1;
        if tries > 100_000 {
            return Err("could not generate enough small sets".into());
        }
        let mut segs = Vec::new();
        let mut pts = Vec::new();
        for _ in 0..rng.gen_range(1..=6) {
            let a = rng.gen_range(0..4);
            let b = rng.gen_range(a + 1..=4);
            let c = rng.gen_range(0..=4);
            if rng.gen_bool(0.2) {
                pts.push(DyadicPoint::new(d(a, 2), d(c, 2)));
            } else if rng.gen_bool(0.5) {
                segs.push(Segment::horizontal(d(a, 2), d(b, 2), d(c, 2)));
            } else {
                segs.push(Segment::vertical(d(c, 2), d(a, 2), d(b, 2)));
            }
        }
        let set = SupportSet::new(vec![], segs.clone(), pts.clone());
        if !small(&set)? {
            continue;
        }
        let keep_segs: Vec<Segment> = segs.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let keep_pts: Vec<DyadicPoint> =
            pts.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let sub = SupportSet::new(vec![], keep_segs, keep_pts);
        if !sub.is_subset(&set) {
            return Err("generated subset is not a subset".into());
        }
        if !small(&sub)? {
            return Err(format!(
                "subset of a small set is not small: {sub:?} of {set:?}"
            ));
        }
        subsets += 1;
    }

    // Component counts do not change under refinement.
    let mut sets = 0;
    for f in corpus::FACTORS {
        for p in corpus_pairs(f, cfg) {
            for m in [&p.h, &p.k] {
                for s in [m.support(), m.essential_spectrum()] {
                    let fr = s.default_frame();
                    let counts: Result<Vec<usize>, _> =
                        (0..3).map(|r| s.complement_components_at(&fr, r)).collect();
                    let counts = counts.map_err(|e| e.to_string())?;
                    if counts.windows(2).any(|w| w[0] != w[1]) {
                        return Err(format!(
                            "refinement changed component counts {counts:?} for {s:?}"
                        ));
                    }
                    sets += 1;
                }
            }
        }
    }
    Ok(format!(
        "fixtures ok, 100 subsets of small sets small, {sets} sets refinement-stable"
    ))
}

fn classifiers(cfg: &SelftestConfig) -> Outcome {
    for p in corpus_pairs(FactorType::II1, cfg) {
        if !norm_eq_strongstar(&p.h) {
            return Err(format!(
                "II_1 operator with norm closure != strong* closure: {:?}",
                p.h
            ));
        }
    }

    // II_inf: norm = strong* exactly for scalars.
    let scalar = SpectralMeasure::scalar(FactorType::IIInf, DyadicPoint::ints(1, 0));
    let nonscalar = SpectralMeasure::new(
        FactorType::IIInf,
        vec![
            Atom {
                pt: DyadicPoint::ints(0, 0),
                val: DimValue::INFINITE_TRACE,
            },
            Atom {
                pt: DyadicPoint::ints(1, 0),
                val: DimValue::trace(1, 1),
            },
        ],
        vec![],
    )
    .map_err(|e| e.to_string())?;
    if !norm_eq_strongstar(&scalar) || norm_eq_strongstar(&nonscalar) {
        return Err("II_inf scalar/nonscalar classification wrong".into());
    }

    // II_1, atoms 1/2, 1/4, ... on dyadic points (truncated so the total is 1).
    let n = 6;
    let atoms: Vec<Atom> = (0..n)
        .map(|i| Atom {
            pt: DyadicPoint::new(d(i as i64, 3), d(0, 0)),
            val: DimValue::rat(1, 1i128 << (i + 1).min(n - 1)),
        })
        .collect();
    let rational =
        SpectralMeasure::new(FactorType::II1, atoms, vec![]).map_err(|e| e.to_string())?;
    let nc = orbit_norm_closed(&rational);
    let expected = rational.is_diagonal() && rational.essential_spectrum().is_finite_set();
    if !nc.closed || nc.closed != expected {
        return Err(format!("II_1 rational-atoms orbit reported {nc:?}"));
    }

    // II_inf with an infinite-trace block: essential spectrum has interior.
    let block = SpectralMeasure::new(
        FactorType::IIInf,
        vec![],
        vec![Block {
            shape: Shape::Rect(Rect::ints(0, 0, 1, 1)),
            val: DimValue::INFINITE_TRACE,
        }],
    )
    .map_err(|e| e.to_string())?;
    let ss = strongstar_eq_strong(&block).map_err(|e| e.to_string())?;
    if ss || block.essential_spectrum().has_interior() == ss {
        return Err("II_inf block operator reported strong* = strong".into());
    }

    // A segment block instead: the essential spectrum is small.
    let seg = SpectralMeasure::new(
        FactorType::IIInf,
        vec![],
        vec![Block {
            shape: Shape::Seg(Segment::horizontal(d(0, 0), d(1, 0), d(0, 0))),
            val: DimValue::INFINITE_TRACE,
        }],
    )
    .map_err(|e| e.to_string())?;
    if !strongstar_eq_strong(&seg).map_err(|e| e.to_string())? {
        return Err("II_inf segment operator reported strong* != strong".into());
    }
    Ok("II_1 corpus, II_inf scalar/nonscalar, rational atoms, block and segment fixtures".into())
}

fn type_iii(cfg: &SelftestConfig) -> Outcome {
    let pairs = corpus::pairs(FactorType::III, 50, cfg.seed ^ 0x3);
    let mut member_count = 0;
    for p in &pairs {
        let (sh, sk) = (p.h.support(), p.k.support());
        let member = member_strong_closure(&p.k, &p.h).map_err(|e| e.to_string())?;
        let norm = same_norm_closure(&p.h, &p.k).map_err(|e| e.to_string())?;
        let inclusion = sk.is_subset(&sh);
        let equal = inclusion && sh.is_subset(&sk);
        if member.holds != inclusion || norm.holds != equal {
            return Err(format!(
                "member {} vs inclusion {inclusion}, norm {} vs equality {equal}\n{}",
                member.holds,
                norm.holds,
                describe(p)
            ));
        }
        member_count += member.holds as usize;
    }
    Ok(format!(
        "{} pairs, {member_count} support inclusions",
        pairs.len()
    ))
}

fn delta_consistency(cfg: &SelftestConfig) -> Outcome {
    let tol = Dyadic::pow2_neg(8);
    let mut checked = 0;
    let mut zero = 0;
    for f in corpus::FACTORS {
        let pairs = corpus_pairs(f, cfg);
        let results: Vec<Result<bool, String>> = pairs
            .par_iter()
            .map(|p| {
                let b = delta_presentation(&p.h, &p.k, tol).map_err(|e| e.to_string())?;
                let norm = same_norm_closure(&p.h, &p.k).map_err(|e| e.to_string())?;
                let lo_zero = b.lo == Dyadic::ZERO;
                if lo_zero != norm.holds || b.lo > b.hi {
                    return Err(format!(
                        "bracket {b:?} but norm closure equality {}",
                        norm.holds
                    ));
                }
                Ok(lo_zero)
            })
            .collect();
        for (p, r) in pairs.iter().zip(results) {
            match r {
                Ok(z) => {
                    checked += 1;
                    zero += z as usize;
                }
                Err(e) => return Err(format!("{f}: {e}\n{}", describe(p))),
            }
        }
    }
    Ok(format!("{checked} brackets, {zero} with lower end 0"))
}

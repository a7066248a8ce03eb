use std::cmp::Ordering;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orbitlab::corpus::{self, FACTORS};
use orbitlab::distance::linalg::random_unitary;
use orbitlab::distance::{construct_unitary_grid, delta_matrix, dist_upper_bound, NormalMatrix};
use orbitlab::format::{parse_spec, serialize, Operator};
use orbitlab::orbits::{member_strong_closure, same_norm_closure, same_strong_closure};
use orbitlab::specmeas::SpectralMeasure;
use orbitlab::{DimValue, Dyadic, DyadicPoint, FactorType, OpenRegion, Rect};

fn factor() -> impl Strategy<Value = FactorType> {
    prop::sample::select(FACTORS.to_vec())
}

fn measure_in(f: FactorType, seed: u64) -> SpectralMeasure {
    corpus::random_measure(f, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A value of the factor's dimension range.
fn value_in(f: FactorType) -> BoxedStrategy<DimValue> {
    match f {
        FactorType::IFin(n) => (0..=n).prop_map(DimValue::fin).boxed(),
        FactorType::IInf(k) => prop_oneof![
            (0u64..6).prop_map(DimValue::fin),
            (0..=k).prop_map(DimValue::aleph)
        ]
        .boxed(),
        FactorType::II1 => (0i128..=8).prop_map(|p| DimValue::rat(p, 8)).boxed(),
        FactorType::IIInf => prop_oneof![
            (0i128..40).prop_map(|p| DimValue::trace(p, 8)),
            Just(DimValue::INFINITE_TRACE)
        ]
        .boxed(),
        FactorType::III => prop_oneof![Just(DimValue::III_ZERO), Just(DimValue::III_INF)].boxed(),
    }
}

fn factor_and_values(n: usize) -> impl Strategy<Value = (FactorType, Vec<DimValue>)> {
    factor().prop_flat_map(move |f| (Just(f), prop::collection::vec(value_in(f), n)))
}

fn quarter() -> impl Strategy<Value = Dyadic> {
    (-4i64..=8).prop_map(|n| Dyadic::new(n, 2))
}

fn rect() -> impl Strategy<Value = Rect> {
    (quarter(), quarter(), 1i64..6, 1i64..6)
        .prop_map(|(x, y, w, h)| Rect::new(x, y, x + Dyadic::new(w, 2), y + Dyadic::new(h, 2)))
}

fn region() -> impl Strategy<Value = OpenRegion> {
    prop::collection::vec(rect(), 0..4).prop_map(OpenRegion::from_rects)
}

/// Points on the eighth lattice, so both lattice and off-lattice
/// positions relative to quarter-grid regions are hit.
fn sample_points() -> Vec<DyadicPoint> {
    let mut v = Vec::new();
    for i in -8..=24 {
        for j in -8..=24 {
            v.push(DyadicPoint::new(Dyadic::new(i, 3), Dyadic::new(j, 3)));
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dimension_order_is_total_and_addition_monotone((f, v) in factor_and_values(3)) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let ab = f.compare(a, b).unwrap();
        prop_assert_eq!(ab, f.compare(b, a).unwrap().reverse());
        if f.leq(a, b).unwrap() && f.leq(b, c).unwrap() {
            prop_assert!(f.leq(a, c).unwrap());
        }
        if let (Ok(x), Ok(y)) = (f.add(a, b), f.add(b, a)) {
            prop_assert_eq!(x, y);
            prop_assert!(f.leq(a, &x).unwrap());
        }
        if let (Ok(ab), Ok(bc)) = (f.add(a, b), f.add(b, c)) {
            if let (Ok(l), Ok(r)) = (f.add(&ab, c), f.add(a, &bc)) {
                prop_assert_eq!(l, r);
            }
        }
        prop_assert_eq!(f.add(a, &f.zero()).unwrap(), *a);
    }

    #[test]
    fn cruder_is_monotone_and_idempotent((f, v) in factor_and_values(2)) {
        let (a, b) = (&v[0], &v[1]);
        let ca = f.cruder(a);
        prop_assert_eq!(f.cruder(&ca), ca);
        if f.leq(a, b).unwrap() {
            prop_assert!(f.leq(&ca, &f.cruder(b)).unwrap());
        }
        prop_assert!(f.closure_member(a, a).unwrap());
    }

    #[test]
    fn region_boolean_operations_are_pointwise(a in region(), b in region()) {
        let (u, i) = (a.union(&b), a.intersect(&b));
        for p in sample_points() {
            let (x, y) = (a.contains_point(&p), b.contains_point(&p));
            prop_assert_eq!(u.contains_point(&p), x || y);
            prop_assert_eq!(i.contains_point(&p), x && y);
        }
        prop_assert_eq!(u.area() + i.area(), a.area() + b.area());
    }

    #[test]
    fn dilation_and_shrinking_bracket_the_region(a in region(), k in 1i64..4) {
        let t = Dyadic::new(k, 3);
        let grown = a.dilate(t).unwrap();
        let inner = a.shrink(t);
        let back = inner.dilate(t).unwrap();
        for p in sample_points() {
            if a.contains_point(&p) {
                prop_assert!(grown.contains_point(&p));
            }
            if inner.contains_point(&p) {
                prop_assert!(a.contains_point(&p));
            }
            if back.contains_point(&p) {
                prop_assert!(a.contains_point(&p), "{} not in {}", p, a);
            }
        }
        prop_assert!(grown.area() >= a.area());
    }

    #[test]
    fn multiplicity_is_monotone_and_additive(f in factor(), seed in any::<u64>(), a in region(), b in region()) {
        let m = measure_in(f, seed);
        let (ma, mu) = (m.crude_multiplicity(&a), m.crude_multiplicity(&a.union(&b)));
        prop_assert_ne!(f.compare(&ma, &mu).unwrap(), Ordering::Greater);
        // The rectangles of `b` that avoid `a` form a disjoint open set.
        let disjoint: Vec<Rect> = b
            .rects()
            .iter()
            .filter(|r| !a.rects().iter().any(|q| q.intersect(r).is_some()))
            .copied()
            .collect();
        let d = OpenRegion::from_rects(disjoint);
        let sum = f.add(&ma, &m.crude_multiplicity(&d)).unwrap();
        prop_assert_eq!(m.crude_multiplicity(&a.union(&d)), sum);
        prop_assert_eq!(m.crude_multiplicity(&OpenRegion::rect(m.support().default_frame())), f.identity());
    }

    #[test]
    fn orbit_relations_are_equivalences_and_preorders(f in factor(), s in any::<u64>()) {
        let mut rng = corpus::rng(s, 1);
        let h = corpus::random_measure(f, &mut rng);
        let k = corpus::dominated(&h, &mut rng);
        let j = corpus::dominated(&k, &mut rng);
        let w = corpus::rewrite(&h, &mut rng);

        prop_assert!(same_norm_closure(&h, &h).unwrap().holds);
        prop_assert!(same_norm_closure(&h, &w).unwrap().holds);
        prop_assert_eq!(
            same_norm_closure(&h, &k).unwrap().holds,
            same_norm_closure(&k, &h).unwrap().holds
        );
        prop_assert!(member_strong_closure(&h, &h).unwrap().holds);
        let hk = member_strong_closure(&k, &h).unwrap().holds;
        let kj = member_strong_closure(&j, &k).unwrap().holds;
        if hk && kj {
            prop_assert!(member_strong_closure(&j, &h).unwrap().holds);
        }
        let norm = same_norm_closure(&h, &k).unwrap();
        let strong = same_strong_closure(&h, &k).unwrap();
        if norm.holds {
            prop_assert!(strong.holds);
        }
        prop_assert!(norm.verify(&h, &k));
        prop_assert!(strong.verify(&h, &k));
    }

    #[test]
    fn operators_round_trip_through_text(f in factor(), seed in any::<u64>()) {
        let op = Operator::Measure(measure_in(f, seed));
        prop_assert_eq!(parse_spec(&serialize(&op)).unwrap(), op);
    }
}

fn spectrum(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    use rand::Rng;
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_distance_is_a_unitarily_invariant_metric(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (spectrum(&mut rng, n), spectrum(&mut rng, n), spectrum(&mut rng, n));
        let u = random_unitary(n, &mut rng);
        let h = NormalMatrix::from_spectrum(&a, &u).unwrap();
        let k = NormalMatrix::diagonal(&b);
        let j = NormalMatrix::diagonal(&c);
        let hk = delta_matrix(&h, &k).unwrap();
        prop_assert!((hk - delta_matrix(&k, &h).unwrap()).abs() < 1e-12);
        prop_assert!(delta_matrix(&h, &h).unwrap() < 1e-9);
        prop_assert!(hk <= delta_matrix(&h, &j).unwrap() + delta_matrix(&j, &k).unwrap() + 1e-9);
        let v = random_unitary(n, &mut rng);
        let hv = h.conjugate(&v).unwrap();
        prop_assert!((delta_matrix(&hv, &k).unwrap() - hk).abs() < 1e-9);

        let rep = dist_upper_bound(&h, &k, 2, seed).unwrap();
        prop_assert!(rep.dist_ub <= hk + 1e-9);
    }

    #[test]
    fn grid_construction_is_monotone_on_nested_meshes(seed in any::<u64>(), n in 1usize..6, e in 2u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = spectrum(&mut rng, n);
        // k: h's eigenvalues nudged slightly, then scrambled by a unitary.
        let b: Vec<Complex64> = a.iter().map(|z| z + Complex64::new(1e-3, -1e-3)).collect();
        let h = NormalMatrix::diagonal(&a);
        let k = NormalMatrix::from_spectrum(&b, &random_unitary(n, &mut rng)).unwrap();
        let fine = (0.5f64).powi(e as i32);
        if let Ok(g) = construct_unitary_grid(&h, &k, fine) {
            prop_assert!(g.achieved_norm <= fine + 1e-9);
            // Cells of the coarser mesh are unions of finer cells.
            let coarse = construct_unitary_grid(&h, &k, 2.0 * fine).unwrap();
            prop_assert!(coarse.achieved_norm <= 2.0 * fine + 1e-9);
        }
    }
}

#[test]
fn whole_corpus_round_trips() {
    for f in FACTORS {
        for p in corpus::pairs(f, 50, 3) {
            for m in [p.h, p.k] {
                let op = Operator::Measure(m);
                assert_eq!(parse_spec(&serialize(&op)).unwrap(), op);
            }
        }
    }
}

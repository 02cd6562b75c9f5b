//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL line; the test
//! fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use coxwo::catalog;
use coxwo::convexity::{classify, cone_closure, in_cone, in_hull, Exactness, Membership, Target};
use coxwo::coxsys::{CoxeterSystem, Element};
use coxwo::imagcone::{build_k, k_vertices, limit_root_sample, orbit_sample, probe_orbit_vs_roots};
use coxwo::infwords::{compare, word_prefix_of, InfWord, Order};
use coxwo::linalg::Vector;
use coxwo::rootstore::{subsystem, RootSet, RootStore, Subsystem};
use coxwo::scalar::Scalar;
use coxwo::weakorder::{
    concat_inversions, decide_join, finite_group_join, inversion_sequence, inversion_set, meet,
    peel, reduced_word_from, JoinConfig, JoinOracle, JoinVerdict, NonJoinWitness,
    OracleVerdict,
};
use coxwo::windowindex::{small_subsets, MaskPeel, WindowIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(xs: &[i64]) -> Vector {
    Vector::from_ints(xs)
}

fn set(xs: &[&[i64]]) -> RootSet {
    xs.iter().map(|x| v(x)).collect()
}

fn word(sys: &CoxeterSystem, text: &str) -> Vec<usize> {
    sys.parse_word(text).unwrap()
}

fn within(start: Instant, limit: Duration) {
    let spent = start.elapsed();
    assert!(spent < limit, "took {spent:?}, limit {limit:?}");
}

fn a2_lattice() {
    let start = Instant::now();
    let sys = catalog::a2();
    let mut elements = std::collections::HashSet::new();
    let mut frontier = vec![Element::identity(2)];
    while let Some(g) = frontier.pop() {
        if elements.insert(g.matrix.clone()) {
            frontier.extend((0..2).map(|s| g.times_simple(&sys, s)));
        }
    }
    assert_eq!(elements.len(), 6);

    let lattice: [(&str, RootSet); 6] = [
        ("", set(&[])),
        ("1", set(&[&[1, 0]])),
        ("2", set(&[&[0, 1]])),
        ("1.2", set(&[&[1, 0], &[1, 1]])),
        ("2.1", set(&[&[0, 1], &[1, 1]])),
        ("1.2.1", set(&[&[1, 0], &[0, 1], &[1, 1]])),
    ];
    for (w, n) in &lattice {
        assert_eq!(&inversion_set(&sys, &word(&sys, w)).unwrap(), n, "N({w})");
    }

    for (x, _) in &lattice {
        for (y, _) in &lattice {
            let xs = vec![word(&sys, x), word(&sys, y)];
            let expected = inversion_set(&sys, &finite_group_join(&sys, &xs).unwrap()).unwrap();
            match decide_join(&sys, &xs, JoinConfig::default()).unwrap() {
                JoinVerdict::Exists { word, .. } => {
                    assert_eq!(inversion_set(&sys, &word).unwrap(), expected, "{x} v {y}")
                }
                other => panic!("{x} v {y}: {other:?}"),
            }
        }
    }

    assert!(meet(&sys, &[word(&sys, "1.2"), word(&sys, "2.1")]).is_empty());

    let mut store = RootStore::with_depth(sys.clone(), 2);
    let sub = Subsystem::full(&sys);
    let middle = set(&[&[1, 1]]);
    let c = classify(&mut store, Target { set: &middle, finite: true, sub: &sub, imaginary: &[] }, 2);
    assert!(c.closed.value && c.closed.exactness == Exactness::Exact);
    assert!(!c.coclosed.value && c.coclosed.exactness == Exactness::Exact);
    within(start, Duration::from_secs(1));
}

fn affine_c2_joins() {
    let start = Instant::now();
    let sys = catalog::affine_c2();
    let x = [word(&sys, "a"), word(&sys, "g.b")];
    let JoinVerdict::Exists { word: w, inversions } = decide_join(&sys, &x, JoinConfig::default()).unwrap() else {
        panic!("a v g.b should exist");
    };
    assert_eq!(inversions.len(), 5);
    let expected = inversion_set(&sys, &word(&sys, "g.a.b.a.b")).unwrap();
    assert_eq!(inversion_set(&sys, &w).unwrap(), expected);
    assert_eq!(Element::from_word(&sys, &w), Element::from_word(&sys, &word(&sys, "g.a.b.a.b")));

    let y = [word(&sys, "a"), word(&sys, "b.g")];
    let verdict = decide_join(&sys, &y, JoinConfig::default()).unwrap();
    let JoinVerdict::NotExists {
        witness: NonJoinWitness::ImaginaryPoint { point, roots, coefficients, .. },
    } = verdict
    else {
        panic!("a v b.g: {verdict:?}");
    };
    let sqrt2 = Scalar::surd(1, 1, 2);
    let delta = Vector(vec![Scalar::one(), sqrt2, Scalar::one()]);
    for s in 0..3 {
        assert!(sys.pair_simple(s, &delta).is_zero());
    }
    let delta_hat = delta.normalized().unwrap();
    assert_eq!(point, delta_hat);
    let hull: Vec<Vector> = y
        .iter()
        .flat_map(|w| inversion_set(&sys, w).unwrap())
        .map(|r| r.normalized().unwrap())
        .collect();
    let mut combo = Vector::zero(3);
    let mut total = Scalar::zero();
    for (r, c) in roots.iter().zip(&coefficients) {
        assert!(hull.contains(r) && !c.is_negative());
        combo = combo.axpy(c, r);
        total = total + c.clone();
    }
    assert!(total.is_one());
    assert_eq!(combo, delta_hat);
    within(start, Duration::from_secs(5));
}

fn infinite_dihedral() {
    let start = Instant::now();
    let sys = catalog::dihedral_inf();
    let st = InfWord::parse(&sys, "|(s.t)", 64).unwrap();
    let ts = InfWord::parse(&sys, "|(t.s)", 64).unwrap();
    for n in 0..=50 {
        let expected: Vec<Vector> = (0..n as i64)
            .map(|k| Vector(vec![Scalar::int(k + 1), Scalar::int(k)]))
            .collect();
        let mut got = st.truncate_inversions(&sys, n).unwrap();
        let mut want = expected;
        got.sort();
        want.sort();
        assert_eq!(got, want, "n = {n}");
    }
    let verdict = decide_join(&sys, &[word(&sys, "s"), word(&sys, "t")], JoinConfig::default()).unwrap();
    assert!(verdict.is_not_exists(), "{verdict:?}");
    let c = compare(&sys, &st, &ts, 32).unwrap();
    assert_eq!(c.order, Order::Incomparable);
    assert!(c.exact);
    within(start, Duration::from_secs(1));
}

fn universal_rank3_counterexample() {
    let start = Instant::now();
    let sys = catalog::universal3();
    let (r, s, t) = (0, 1, 2);
    let ar = sys.simple_root(r);
    let at = sys.simple_root(t);
    let sr = sys.reflect_simple(s, &ar);
    let st = sys.reflect_simple(s, &at);
    let delta_prime = [sr.clone(), st.clone(), ar.clone(), at.clone()];
    let sub_prime = subsystem(&sys, &delta_prime, 2).unwrap();
    let mut simple = sub_prime.simple.clone();
    simple.sort();
    let mut expected_simple = delta_prime.to_vec();
    expected_simple.sort();
    assert_eq!(simple, expected_simple);
    let minus = |k: i64| Scalar::int(-k);
    assert_eq!(sys.bilinear(&ar, &at), minus(1));
    assert_eq!(sys.bilinear(&sr, &st), minus(1));
    assert_eq!(sys.bilinear(&ar, &sr), minus(1));
    assert_eq!(sys.bilinear(&at, &st), minus(1));
    assert_eq!(sys.bilinear(&ar, &st), minus(3));
    assert_eq!(sys.bilinear(&sr, &at), minus(3));

    let tsr = sys.apply_word(&[t, s], &ar);
    assert_eq!(tsr, v(&[1, 2, 6]));
    assert_eq!(ar.add(&at.scale(&Scalar::int(5))).add(&st), tsr);

    let sub_i = subsystem(&sys, &[at.clone(), ar.clone(), st.clone()], 2).unwrap();
    let depth = 8;
    let mut store = RootStore::with_depth(sys.clone(), depth);
    let phi_i: RootSet = store
        .window(depth, &sub_i)
        .into_iter()
        .map(|i| store.root(i).vec.clone())
        .collect();
    assert!(!phi_i.contains(&tsr) && sub_prime.contains(&sys, &tsr));
    let c = classify(&mut store, Target { set: &phi_i, finite: false, sub: &sub_prime, imaginary: &[] }, depth);
    assert!(c.closed.value && c.coclosed.value, "window biclosed: {c:?}");
    assert!(!c.convex.value && c.convex.exactness == Exactness::Exact);
    let gens: Vec<Vector> = phi_i.iter().cloned().collect();
    let Membership::Member(coeffs) = in_cone(&tsr, &gens) else {
        panic!("ts(alpha_r) should lie in cone(Phi_I)");
    };
    let rebuilt = gens
        .iter()
        .zip(&coeffs)
        .fold(Vector::zero(3), |acc, (g, c)| acc.axpy(c, g));
    assert_eq!(rebuilt, tsr);
    within(start, Duration::from_secs(10));
}

fn affine_a3_not_separable() {
    let start = Instant::now();
    let sys = catalog::affine_a3();
    let delta = v(&[1, 1, 1, 1]);
    for s in 0..4 {
        assert!(sys.pair_simple(s, &delta).is_zero());
    }
    let delta_hat = delta.normalized().unwrap();
    let x = [word(&sys, "2.1.3.2.1"), word(&sys, "2.1.4")];
    let nx: RootSet = x.iter().flat_map(|w| inversion_set(&sys, w).unwrap()).collect();
    let nx_hat: Vec<Vector> = nx.iter().map(|r| r.normalized().unwrap()).collect();
    assert!(in_hull(&delta_hat, &nx_hat).is_member());

    let depth = 8;
    let mut store = RootStore::with_depth(sys.clone(), depth);
    let full = Subsystem::full(&sys);
    let a = cone_closure(&nx, &mut store, depth, &full);
    let complement: Vec<Vector> = store
        .up_to(depth)
        .iter()
        .filter(|r| !a.contains(&r.vec))
        .map(|r| r.vec.normalized().unwrap())
        .collect();
    assert!(in_hull(&delta_hat, &complement).is_member());

    let c = classify(&mut store, Target { set: &a, finite: false, sub: &full, imaginary: &[] }, depth);
    assert!(c.convex.value && c.coconvex.value, "window biconvex: {c:?}");
    assert!(!c.separable.value && c.separable.exactness == Exactness::Exact);

    let verdict = decide_join(&sys, &x, JoinConfig::default()).unwrap();
    match &verdict {
        JoinVerdict::NotExists { .. } | JoinVerdict::Unknown { .. } => {}
        JoinVerdict::Exists { .. } => panic!("join reported for a non-separable closure"),
    }
    within(start, Duration::from_secs(30));
}

fn affine_a2_infinite_words() {
    let start = Instant::now();
    let sys = catalog::affine_a2();
    let omega = InfWord::parse(&sys, "|(a.b.c)", 64).unwrap();
    let omega_b = InfWord::parse(&sys, "b|(a.b.c)", 64).unwrap();
    let c = compare(&sys, &omega, &omega_b, 32).unwrap();
    assert_eq!(c.order, Order::Less);
    let b = sys.generator("b").unwrap();
    let p = word_prefix_of(&sys, &[b], &omega, 64).unwrap();
    assert!(!p.value && p.exact);
    for n in 0..=40 {
        let base = omega.truncate_inversions(&sys, n).unwrap();
        let shifted = omega_b.truncate_inversions(&sys, n + 1).unwrap();
        assert_eq!(shifted[0], sys.simple_root(b));
        for (i, beta) in base.iter().enumerate() {
            assert_eq!(shifted[i + 1], sys.reflect_simple(b, beta), "n = {n}, i = {i}");
        }
    }
    within(start, Duration::from_secs(1));
}

fn random_word(sys: &CoxeterSystem, rng: &mut ChaCha8Rng, max_len: usize) -> Vec<usize> {
    let len = rng.gen_range(0..=max_len);
    reduced_word_from(sys, len, |k| rng.gen_range(0..k))
}

fn imaginary_sample(sys: &CoxeterSystem) -> Vec<Vector> {
    let k = build_k(sys);
    if k.point.is_none() {
        return Vec::new();
    }
    orbit_sample(sys, &k, 2).unwrap().into_iter().map(|p| p.point).collect()
}

struct SuiteStats {
    subsets: usize,
    inversion_sets: usize,
    decided_joins: usize,
}

fn property_suite_on(name: &str, sys: &CoxeterSystem, rng: &mut ChaCha8Rng) -> SuiteStats {
    // (a) peeling inverts N.
    for _ in 0..200 {
        let w = random_word(sys, rng, 12);
        let n = inversion_set(sys, &w).unwrap();
        let back = peel(sys, &n).unwrap();
        assert_eq!(inversion_set(sys, &back).unwrap(), n, "{name}: peel of N({w:?})");
    }

    // (b) N(uv) = N(u) ⊔ u N(v) along reduced factorizations.
    for _ in 0..200 {
        let w = random_word(sys, rng, 12);
        let k = rng.gen_range(0..=w.len());
        let (u, rest) = w.split_at(k);
        let glued = concat_inversions(sys, u, rest).unwrap();
        let nu = inversion_set(sys, u).unwrap();
        let g = Element::from_word(sys, u);
        let moved: RootSet = inversion_sequence(sys, rest).unwrap().iter().map(|r| g.apply(r)).collect();
        assert!(nu.is_disjoint(&moved), "{name}: overlap in {w:?} at {k}");
        assert_eq!(glued, inversion_set(sys, &w).unwrap(), "{name}: {w:?} at {k}");
        assert_eq!(glued.len(), nu.len() + moved.len());
    }

    // (c) finite subsets of the depth-4 window: peeling succeeds exactly when the set is
    // biclosed, biconvex and separable.
    let mut store = RootStore::new(sys.clone());
    let extra = imaginary_sample(sys);
    let index = WindowIndex::new(&mut store, 4, &extra);
    let subsets = small_subsets(index.len(), 4);
    let mut inversion_sets = 0;
    for &mask in &subsets {
        let peeled = match index.peel(mask) {
            MaskPeel::Success => true,
            MaskPeel::Failure => false,
            MaskPeel::LeftWindow => peel(sys, &index.set_of(mask).into_iter().collect()).is_ok(),
        };
        let f = index.flags(mask);
        if peeled {
            inversion_sets += 1;
            assert!(
                f.biclosed() && f.biconvex() && f.separable,
                "{name}: inversion set {:?} with violation {f:?}",
                index.set_of(mask)
            );
        } else {
            // Exact refutation of biclosedness, which also refutes the stronger properties.
            assert!(
                !f.closed || !f.coclosed,
                "{name}: {:?} fails to peel but no violation found",
                index.set_of(mask)
            );
        }
    }

    // (d) the join decision against the enumeration oracle.
    let mut decided = 0;
    let config = JoinConfig { budget: 20_000, orbit_depth: 8 };
    let oracle = JoinOracle::new(sys, 10);
    for _ in 0..100 {
        let xs = vec![random_word(sys, rng, 5), random_word(sys, rng, 5)];
        let oracle = oracle.join(sys, &xs).unwrap();
        match (decide_join(sys, &xs, config).unwrap(), oracle) {
            (JoinVerdict::Exists { word, .. }, OracleVerdict::Exists(expected)) => {
                decided += 1;
                assert_eq!(
                    inversion_set(sys, &word).unwrap(),
                    inversion_set(sys, &expected).unwrap(),
                    "{name}: join of {xs:?}"
                );
            }
            (JoinVerdict::Exists { word, .. }, OracleVerdict::Undecided) => {
                assert!(word.len() > 10, "{name}: oracle missed a short join of {xs:?}");
            }
            (JoinVerdict::NotExists { witness }, OracleVerdict::Exists(w)) => {
                panic!("{name}: {xs:?} refuted by {witness:?} but {w:?} is a join")
            }
            (JoinVerdict::NotExists { .. }, OracleVerdict::Undecided) => decided += 1,
            (JoinVerdict::Unknown { .. }, _) => {}
        }
    }

    SuiteStats {
        subsets: subsets.len(),
        inversion_sets,
        decided_joins: decided,
    }
}

fn property_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let systems = [
        ("A2", catalog::a2()),
        ("dihedral", catalog::dihedral_inf()),
        ("affine A2", catalog::affine_a2()),
        ("affine C2", catalog::affine_c2()),
        ("universal rank 3", catalog::universal3()),
        ("labels -6/5", catalog::lorentz_six_fifths()),
    ];
    for (name, sys) in &systems {
        let t = Instant::now();
        let stats = property_suite_on(name, sys, &mut rng);
        println!(
            "    {name}: {} subsets ({} inversion sets), {}/100 joins decided, {:.1?}",
            stats.subsets,
            stats.inversion_sets,
            stats.decided_joins,
            t.elapsed()
        );
    }
    within(start, Duration::from_secs(300));
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn limit_probes() {
    let start = Instant::now();
    let mut store = RootStore::new(catalog::dihedral_inf());
    let clusters = limit_root_sample(&mut store, 30, 2, 0.1);
    assert_eq!(clusters.len(), 1);
    assert!(dist(&clusters[0].estimate, &[0.5, 0.5]) < 1e-6, "{:?}", clusters[0]);

    let aa2 = catalog::affine_a2();
    let k = build_k(&aa2);
    let third = Vector(vec![Scalar::rational(1, 3); 3]);
    assert!(k.singleton);
    assert_eq!(k.point.as_ref(), Some(&third));
    assert_eq!(k_vertices(&aa2), vec![third]);

    let lor = catalog::lorentz_six_fifths();
    let k = build_k(&lor);
    assert!(k.strict);
    let z = k.point.clone().unwrap();
    for s in 0..3 {
        assert_eq!(lor.pair_simple(s, &z), Scalar::rational(-7, 15));
        assert!(z.0[s].is_positive());
    }

    let w = InfWord::parse(&lor, "|(a.b)", 64).unwrap();
    let report = probe_orbit_vs_roots(&lor, &w, &k, 1000).unwrap();
    let limit = report.exact_limit.expect("rank-2 period has an exact limit");
    assert!(limit.isotropic);
    assert!(limit.orbit_distance < 1e-4, "{limit:?}");
    assert!(limit.root_distance < 1e-4, "{limit:?}");
    within(start, Duration::from_secs(60));
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn()); 8] = [
        ("1 A2 lattice", a2_lattice),
        ("2 affine C2 joins", affine_c2_joins),
        ("3 infinite dihedral", infinite_dihedral),
        ("4 biclosed but not biconvex", universal_rank3_counterexample),
        ("5 biconvex but not separable", affine_a3_not_separable),
        ("6 affine A2 infinite words", affine_a2_infinite_words),
        ("7 property suite", property_suite),
        ("8 limit and imaginary probes", limit_probes),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        println!("{status} criterion {name} ({:.2?})", t.elapsed());
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}

//! Cross-checks between independent code paths.

use coxwo::catalog;
use coxwo::convexity::{classify, Exactness, Target};
use coxwo::coxsys::CoxeterSystem;
use coxwo::imagcone::{build_k, orbit_sample};
use coxwo::infwords::{compare, InfWord, Order};
use coxwo::rootstore::{RootSet, RootStore, Subsystem};
use coxwo::weakorder::{decide_join, inversion_set, is_prefix, reduced_word_from, JoinConfig, JoinVerdict};
use coxwo::windowindex::{small_subsets, MaskPeel, WindowIndex};
use proptest::prelude::*;
use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn imaginary(sys: &CoxeterSystem) -> Vec<coxwo::Vector> {
    let k = build_k(sys);
    match k.point {
        Some(_) => orbit_sample(sys, &k, 2).unwrap().into_iter().map(|p| p.point).collect(),
        None => Vec::new(),
    }
}

/// Every violation the index reports is one the LP classifier reports as well, and
/// inversion sets are accepted by both.
fn index_agrees_with_classify(sys: CoxeterSystem, depth: usize, samples: usize) {
    let extra = imaginary(&sys);
    let mut store = RootStore::new(sys.clone());
    let index = WindowIndex::new(&mut store, depth, &extra);
    let sub = Subsystem::full(&sys);
    let mut masks = small_subsets(index.len(), 4);
    masks.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    for &mask in masks.iter().take(samples) {
        let set: RootSet = index.set_of(mask).into_iter().collect();
        let f = index.flags(mask);
        let c = classify(&mut store, Target { set: &set, finite: true, sub: &sub, imaginary: &extra }, depth);
        assert_eq!(f.closed, c.closed.value, "{set:?}");
        let peeled = c.peel.as_ref().is_some_and(Result::is_ok);
        match index.peel(mask) {
            MaskPeel::Success => assert!(peeled),
            MaskPeel::Failure => assert!(!peeled),
            MaskPeel::LeftWindow => {}
        }
        for (window, lp) in [
            (f.coclosed, &c.coclosed),
            (f.convex, &c.convex),
            (f.coconvex, &c.coconvex),
            (f.separable, &c.separable),
        ] {
            if !window {
                assert!(!lp.value && lp.exactness == Exactness::Exact, "{set:?}: {f:?} vs {c:?}");
            }
        }
        if peeled {
            assert!(c.biclosed() && c.biconvex() && c.separable.value);
        }
    }
}

#[test]
fn window_index_matches_classify_on_universal_rank3() {
    index_agrees_with_classify(catalog::universal3(), 3, 400);
}

#[test]
fn window_index_matches_classify_on_affine_c2() {
    index_agrees_with_classify(catalog::affine_c2(), 4, 400);
}

#[test]
fn shifted_infinite_words_compare_both_ways() {
    let sys = catalog::affine_a2();
    let omega = InfWord::parse(&sys, "|(a.b.c)", 64).unwrap();
    let shifted = InfWord::parse(&sys, "b|(a.b.c)", 64).unwrap();
    assert_eq!(compare(&sys, &shifted, &omega, 32).unwrap().order, Order::Greater);
    let same = compare(&sys, &omega, &omega, 32).unwrap();
    assert_eq!(same.order, Order::Equivalent);
    assert!(same.exact);
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = (usize, Vec<usize>)> {
    (0..=max_len, prop::collection::vec(0usize..64, max_len))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn join_of_a_chain_is_its_top((len, picks) in word_strategy(8), cut in 0usize..=8) {
        let sys = catalog::affine_c2();
        let mut it = picks.into_iter();
        let w = reduced_word_from(&sys, len, |k| it.next().unwrap_or(0) % k);
        let u = w[..cut.min(w.len())].to_vec();
        prop_assert!(is_prefix(&sys, &u, &w));
        match decide_join(&sys, &[u, w.clone()], JoinConfig::default()).unwrap() {
            JoinVerdict::Exists { word, .. } => {
                prop_assert_eq!(inversion_set(&sys, &word).unwrap(), inversion_set(&sys, &w).unwrap());
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn joins_are_upper_bounds((l1, p1) in word_strategy(5), (l2, p2) in word_strategy(5)) {
        let sys = catalog::universal3();
        let mut i1 = p1.into_iter();
        let mut i2 = p2.into_iter();
        let x = reduced_word_from(&sys, l1, |k| i1.next().unwrap_or(0) % k);
        let y = reduced_word_from(&sys, l2, |k| i2.next().unwrap_or(0) % k);
        if let JoinVerdict::Exists { word, .. } = decide_join(&sys, &[x.clone(), y.clone()], JoinConfig::default()).unwrap() {
            prop_assert!(is_prefix(&sys, &x, &word));
            prop_assert!(is_prefix(&sys, &y, &word));
        }
    }
}

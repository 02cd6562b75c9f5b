//! Words, inversion sets and the right weak order: prefixes, meets, peeling of finite
//! biclosed sets, and a join decision procedure with certificates.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::convexity::{self, Membership, PolyCone};
use crate::coxsys::{CoxeterSystem, Element};
use crate::imagcone::{self, OrbitSampler};
use crate::linalg::{Matrix, Vector};
use crate::par;
use crate::rootstore::{RootSet, Subsystem};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("word is not reduced: letter {position} produces a negative root")]
    NotReduced { position: usize },
    #[error("inversion sets overlap at {0}; the product is not reduced")]
    Overlap(Vector),
    #[error("the group is infinite")]
    Infinite,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PeelError {
    #[error("no simple root in {}", fmt_roots(.0))]
    NoSimpleRoot(Vec<Vector>),
    #[error("reflection produced the negative root {0}")]
    NegativeRoot(Vector),
}

fn fmt_roots(v: &[Vector]) -> String {
    let parts: Vec<String> = v.iter().map(|r| r.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// The roots `s_1 ... s_{i-1}(alpha_{s_i})` in order.
pub fn inversion_sequence(sys: &CoxeterSystem, word: &[usize]) -> Result<Vec<Vector>, WordError> {
    let mut g = Element::identity(sys.rank());
    let mut out = Vec::with_capacity(word.len());
    for (i, &s) in word.iter().enumerate() {
        let beta = g.image_of_simple(s);
        if !beta.is_positive() {
            return Err(WordError::NotReduced { position: i });
        }
        out.push(beta);
        g = g.times_simple(sys, s);
    }
    Ok(out)
}

pub fn inversion_set(sys: &CoxeterSystem, word: &[usize]) -> Result<RootSet, WordError> {
    Ok(inversion_sequence(sys, word)?.into_iter().collect())
}

/// `N(uv) = N(u) ⊔ u(N(v))`, failing on overlap.
pub fn concat_inversions(sys: &CoxeterSystem, u: &[usize], v: &[usize]) -> Result<RootSet, WordError> {
    let mut out = inversion_set(sys, u)?;
    let g = Element::from_word(sys, u);
    for beta in inversion_sequence(sys, v)? {
        let image = g.apply(&beta);
        if !image.is_positive() {
            return Err(WordError::Overlap(image.neg()));
        }
        if !out.insert(image.clone()) {
            return Err(WordError::Overlap(image));
        }
    }
    Ok(out)
}

/// A reduced word for the same element: at the first letter producing a negative root,
/// delete it together with the earlier letter whose root it negates, and repeat.
pub fn reduce(sys: &CoxeterSystem, word: &[usize]) -> Vec<usize> {
    let mut w = word.to_vec();
    'outer: loop {
        let mut g = Element::identity(sys.rank());
        let mut seen: Vec<Vector> = Vec::new();
        for i in 0..w.len() {
            let beta = g.image_of_simple(w[i]);
            if beta.is_negative() {
                let j = seen
                    .iter()
                    .position(|r| *r == beta.neg())
                    .expect("a negative image is minus an earlier inversion");
                w.remove(i);
                w.remove(j);
                continue 'outer;
            }
            seen.push(beta);
            g = g.times_simple(sys, w[i]);
        }
        return w;
    }
}

pub fn length(sys: &CoxeterSystem, word: &[usize]) -> usize {
    reduce(sys, word).len()
}

pub fn is_reduced(sys: &CoxeterSystem, word: &[usize]) -> bool {
    inversion_sequence(sys, word).is_ok()
}

pub fn inverse(word: &[usize]) -> Vec<usize> {
    word.iter().rev().copied().collect()
}

/// `u <= w` in the right weak order.
pub fn is_prefix(sys: &CoxeterSystem, u: &[usize], w: &[usize]) -> bool {
    let mut uw = inverse(u);
    uw.extend_from_slice(w);
    length(sys, u) + length(sys, &uw) == length(sys, w)
}

/// Greatest common prefix of a nonempty set of reduced words.
pub fn meet(sys: &CoxeterSystem, xs: &[Vec<usize>]) -> Vec<usize> {
    let mut g: Vec<usize> = Vec::new();
    let mut elem = Element::identity(sys.rank());
    'grow: loop {
        for s in 0..sys.rank() {
            if elem.has_right_descent(s) {
                continue;
            }
            let mut gs = g.clone();
            gs.push(s);
            if xs.iter().all(|x| is_prefix(sys, &gs, x)) {
                g = gs;
                elem = elem.times_simple(sys, s);
                continue 'grow;
            }
        }
        return g;
    }
}

/// Reconstruct `w` from `N(w)` by repeatedly removing the first simple root present.
pub fn peel(sys: &CoxeterSystem, set: &RootSet) -> Result<Vec<usize>, PeelError> {
    peel_in(sys, &Subsystem::full(sys), set)
}

/// `peel` inside a reflection subsystem; letters index `sub.simple`.
pub fn peel_in(sys: &CoxeterSystem, sub: &Subsystem, set: &RootSet) -> Result<Vec<usize>, PeelError> {
    let mut current: Vec<Vector> = set.iter().cloned().collect();
    let mut word = Vec::new();
    while !current.is_empty() {
        let Some(i) = (0..sub.simple.len()).find(|&i| current.contains(&sub.simple[i])) else {
            current.sort();
            return Err(PeelError::NoSimpleRoot(current));
        };
        let delta = &sub.simple[i];
        let mut next = Vec::with_capacity(current.len() - 1);
        for v in current.iter().filter(|v| *v != delta) {
            let r = sub.reflect(sys, i, v);
            if !r.is_positive() {
                return Err(PeelError::NegativeRoot(r));
            }
            next.push(r);
        }
        word.push(i);
        current = next;
    }
    Ok(word)
}

/// Build a reduced word of length `len` (or shorter, if the group runs out) by asking
/// `pick(k)` for an index among the `k` currently available right ascents.
pub fn reduced_word_from(sys: &CoxeterSystem, len: usize, mut pick: impl FnMut(usize) -> usize) -> Vec<usize> {
    let mut g = Element::identity(sys.rank());
    let mut word = Vec::with_capacity(len);
    for _ in 0..len {
        let ascents: Vec<usize> = (0..sys.rank()).filter(|&s| !g.has_right_descent(s)).collect();
        if ascents.is_empty() {
            break;
        }
        let s = ascents[pick(ascents.len()) % ascents.len()];
        g = g.times_simple(sys, s);
        word.push(s);
    }
    word
}

/// Longest element of a finite group.
pub fn longest_element(sys: &CoxeterSystem) -> Result<Vec<usize>, WordError> {
    if !sys.is_finite() {
        return Err(WordError::Infinite);
    }
    let mut g = Element::identity(sys.rank());
    let mut word = Vec::new();
    while let Some(s) = (0..sys.rank()).find(|&s| !g.has_right_descent(s)) {
        g = g.times_simple(sys, s);
        word.push(s);
    }
    Ok(word)
}

/// Join in a finite group: `(meet of x w0) w0`.
pub fn finite_group_join(sys: &CoxeterSystem, xs: &[Vec<usize>]) -> Result<Vec<usize>, WordError> {
    let w0 = longest_element(sys)?;
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let times_w0 = |x: &[usize]| {
        let mut y = x.to_vec();
        y.extend_from_slice(&w0);
        reduce(sys, &y)
    };
    let flipped: Vec<Vec<usize>> = xs.iter().map(|x| times_w0(x)).collect();
    Ok(times_w0(&meet(sys, &flipped)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JoinConfig {
    /// Maximum number of elements explored below the cone.
    pub budget: usize,
    /// Maximum word length of orbit points of the imaginary domain.
    pub orbit_depth: usize,
}

impl Default for JoinConfig {
    fn default() -> Self {
        JoinConfig {
            budget: 100_000,
            orbit_depth: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonJoinWitness {
    /// The elements whose inversion sets lie in `cone(N(X))` form a finite set without
    /// an element above all of `X`; these are its maximal elements.
    MultipleMaxima { maxima: Vec<Vec<usize>> },
    /// `point = word . z` lies in the imaginary convex body and in `conv(N^(X))`, with
    /// convex coefficients over the normalized roots `roots`.
    ImaginaryPoint {
        word: Vec<usize>,
        point: Vector,
        roots: Vec<Vector>,
        coefficients: Vec<Scalar>,
    },
    /// Two roots of `cone(N(X))` with `B(alpha, beta) <= -1`, so the cone holds infinitely
    /// many roots and cannot be a finite inversion set.
    LimitRoot { alpha: Vector, beta: Vector, form: Scalar },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub nodes: usize,
    pub max_length: usize,
    pub orbit_depth: usize,
    pub cone_roots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum JoinVerdict {
    Exists { word: Vec<usize>, inversions: Vec<Vector> },
    NotExists { witness: NonJoinWitness },
    Unknown { report: SearchReport },
}

impl JoinVerdict {
    pub fn is_exists(&self) -> bool {
        matches!(self, JoinVerdict::Exists { .. })
    }

    pub fn is_not_exists(&self) -> bool {
        matches!(self, JoinVerdict::NotExists { .. })
    }
}

struct Node {
    elem: Element,
    word: Vec<usize>,
    count: usize,
}

struct ConeSearch<'a> {
    sys: &'a CoxeterSystem,
    cone: PolyCone,
    targets: HashSet<Vector>,
    memo: HashMap<Vector, bool>,
    cone_roots: Vec<Vector>,
    /// First pair of cone roots with form `<= -1`.
    limit: Option<NonJoinWitness>,
}

impl ConeSearch<'_> {
    fn in_cone(&mut self, v: &Vector) -> bool {
        if let Some(&b) = self.memo.get(v) {
            return b;
        }
        let b = self.cone.contains(v);
        self.memo.insert(v.clone(), b);
        b
    }

    /// Record a root of the cone, noting the first pair with form `<= -1`.
    fn add_root(&mut self, v: Vector) {
        if self.cone_roots.contains(&v) || self.limit.is_some() {
            if !self.cone_roots.contains(&v) {
                self.cone_roots.push(v);
            }
            return;
        }
        let minus_one = Scalar::int(-1);
        let sys = self.sys;
        let hit = par::find_map_first(&self.cone_roots, |a| {
            let f = sys.bilinear(a, &v);
            (f <= minus_one).then(|| (a.clone(), f))
        });
        self.limit = hit.map(|(a, f)| NonJoinWitness::LimitRoot {
            alpha: a,
            beta: v.clone(),
            form: f,
        });
        self.cone_roots.push(v);
    }
}

/// Decide whether the join of a finite set of reduced words exists.
///
/// Elements `g` with `N(g)` inside `cone(N(X))` are explored breadth first; the first one
/// whose inversion set contains `N(X)` is the join. Interleaved with each level, orbit
/// points of the imaginary domain are tested against `conv(N^(X))`, and pairs of cone
/// roots with form `<= -1` are detected; either certifies that no join exists.
pub fn decide_join(sys: &CoxeterSystem, xs: &[Vec<usize>], config: JoinConfig) -> Result<JoinVerdict, WordError> {
    let mut nx = RootSet::new();
    for x in xs {
        nx.extend(inversion_set(sys, x)?);
    }
    if nx.is_empty() {
        return Ok(JoinVerdict::Exists {
            word: Vec::new(),
            inversions: Vec::new(),
        });
    }
    let gens: Vec<Vector> = nx.iter().cloned().collect();
    let mut search = ConeSearch {
        sys,
        cone: PolyCone::new(&gens),
        targets: nx.iter().cloned().collect(),
        memo: HashMap::new(),
        cone_roots: Vec::new(),
        limit: None,
    };
    for g in &gens {
        search.add_root(g.clone());
    }
    let normalized: Vec<Vector> = gens.iter().map(|g| g.normalized().expect("positive root")).collect();

    let domain = imagcone::build_k(sys);
    let mut orbit = domain.point.clone().map(|z| OrbitSampler::new(sys, z));
    let orbit_step = |orbit: &mut Option<OrbitSampler>, search: &ConeSearch<'_>| -> Option<NonJoinWitness> {
        let sampler = orbit.as_mut()?;
        if sampler.level() > config.orbit_depth {
            return None;
        }
        let frontier = sampler.frontier().to_vec();
        let hit = par::find_map_first(&frontier, |p| {
            if !search.cone.contains(&p.point) {
                return None;
            }
            match convexity::in_hull(&p.point, &normalized) {
                Membership::Member(c) => Some(NonJoinWitness::ImaginaryPoint {
                    word: p.word.clone(),
                    point: p.point.clone(),
                    roots: normalized.clone(),
                    coefficients: c,
                }),
                Membership::Outside { .. } => None,
            }
        });
        if hit.is_none() {
            if sampler.level() < config.orbit_depth {
                sampler.advance();
            } else {
                *orbit = None;
            }
        }
        hit
    };

    let total = search.targets.len();
    let mut seen: HashSet<Matrix> = HashSet::new();
    let identity = Element::identity(sys.rank());
    seen.insert(identity.matrix.clone());
    let mut level = vec![Node {
        elem: identity,
        word: Vec::new(),
        count: 0,
    }];
    let mut maxima: Vec<Vec<usize>> = Vec::new();
    let mut nodes = 1usize;
    let mut length = 0usize;

    loop {
        // Imaginary points are preferred over limit pairs found on the same level.
        if let Some(w) = orbit_step(&mut orbit, &search).or_else(|| search.limit.take()) {
            return Ok(JoinVerdict::NotExists { witness: w });
        }
        // Candidate extensions g -> gs with g(alpha_s) a positive root in the cone.
        let ascents: Vec<Vec<(usize, Vector)>> = par::map(&level, |node| {
            (0..sys.rank())
                .filter_map(|s| {
                    let beta = node.elem.image_of_simple(s);
                    beta.is_positive().then_some((s, beta))
                })
                .collect()
        });
        let mut next: Vec<Node> = Vec::new();
        for (node, cands) in level.iter().zip(ascents) {
            let mut extended = false;
            for (s, beta) in cands {
                if !search.in_cone(&beta) {
                    continue;
                }
                extended = true;
                search.add_root(beta.clone());
                let elem = node.elem.times_simple(sys, s);
                if !seen.insert(elem.matrix.clone()) {
                    continue;
                }
                let mut word = node.word.clone();
                word.push(s);
                let count = node.count + usize::from(search.targets.contains(&beta));
                next.push(Node { elem, word, count });
            }
            if !extended {
                maxima.push(node.word.clone());
            }
        }
        let full: Vec<&Node> = next.iter().filter(|n| n.count == total).collect();
        if let Some(first) = full.first() {
            assert_eq!(full.len(), 1, "two minimal upper bounds of the same length");
            let inversions = inversion_sequence(sys, &first.word)?;
            return Ok(JoinVerdict::Exists {
                word: first.word.clone(),
                inversions,
            });
        }
        if next.is_empty() {
            maxima.sort();
            return Ok(JoinVerdict::NotExists {
                witness: NonJoinWitness::MultipleMaxima { maxima },
            });
        }
        nodes += next.len();
        length += 1;
        level = next;
        if nodes > config.budget {
            break;
        }
    }
    while orbit.is_some() {
        if let Some(w) = orbit_step(&mut orbit, &search) {
            return Ok(JoinVerdict::NotExists { witness: w });
        }
    }
    Ok(JoinVerdict::Unknown {
        report: SearchReport {
            nodes,
            max_length: length,
            orbit_depth: config.orbit_depth,
            cone_roots: search.cone_roots.len(),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    /// The minimal upper bound, unique among upper bounds of its length.
    Exists(Vec<usize>),
    /// No upper bound of length `<= L`.
    Undecided,
}

/// All elements of length `<= max_len` with their inversion sets, for repeated join
/// queries by enumeration.
pub struct JoinOracle {
    /// Elements by length: a reduced word and its sorted inversion root ids.
    levels: Vec<Vec<(Vec<usize>, Vec<usize>)>>,
    ids: HashMap<Vector, usize>,
}

impl JoinOracle {
    pub fn new(sys: &CoxeterSystem, max_len: usize) -> Self {
        let mut ids: HashMap<Vector, usize> = HashMap::new();
        let identity = Element::identity(sys.rank());
        let mut seen: HashSet<Matrix> = HashSet::from([identity.matrix.clone()]);
        let mut frontier: Vec<(Element, Vec<usize>, Vec<usize>)> = vec![(identity, Vec::new(), Vec::new())];
        let mut levels = Vec::with_capacity(max_len + 1);
        for len in 0..=max_len {
            let mut next = Vec::new();
            if len < max_len {
                for (g, w, n) in &frontier {
                    for s in 0..sys.rank() {
                        let beta = g.image_of_simple(s);
                        if !beta.is_positive() {
                            continue;
                        }
                        let h = g.times_simple(sys, s);
                        if seen.insert(h.matrix.clone()) {
                            let fresh = ids.len();
                            let id = *ids.entry(beta).or_insert(fresh);
                            let mut w2 = w.clone();
                            w2.push(s);
                            let mut n2 = n.clone();
                            let at = n2.binary_search(&id).unwrap_err();
                            n2.insert(at, id);
                            next.push((h, w2, n2));
                        }
                    }
                }
            }
            levels.push(frontier.into_iter().map(|(_, w, n)| (w, n)).collect());
            frontier = next;
        }
        JoinOracle { levels, ids }
    }

    pub fn max_len(&self) -> usize {
        self.levels.len() - 1
    }

    /// The shortest upper bound of `xs`, asserted unique among bounds of its length.
    pub fn join(&self, sys: &CoxeterSystem, xs: &[Vec<usize>]) -> Result<OracleVerdict, WordError> {
        let mut need: Vec<usize> = Vec::new();
        for x in xs {
            for r in inversion_set(sys, x)? {
                match self.ids.get(&r) {
                    Some(&id) => need.push(id),
                    None => return Ok(OracleVerdict::Undecided),
                }
            }
        }
        need.sort_unstable();
        need.dedup();
        for (len, level) in self.levels.iter().enumerate() {
            let bounds: Vec<&Vec<usize>> = level
                .iter()
                .filter(|(_, n)| need.iter().all(|id| n.binary_search(id).is_ok()))
                .map(|(w, _)| w)
                .collect();
            if let Some(first) = bounds.first() {
                assert_eq!(bounds.len(), 1, "two upper bounds of minimal length {len}");
                return Ok(OracleVerdict::Exists((*first).clone()));
            }
        }
        Ok(OracleVerdict::Undecided)
    }
}

/// Enumerate all elements of length `<= max_len` and look for upper bounds of `xs`.
pub fn brute_force_join(sys: &CoxeterSystem, xs: &[Vec<usize>], max_len: usize) -> Result<OracleVerdict, WordError> {
    JoinOracle::new(sys, max_len).join(sys, xs)
}

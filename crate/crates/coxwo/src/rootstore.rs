//! Positive roots enumerated by depth, rank-2 intervals and reflection subsystems.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::convexity;
use crate::coxsys::CoxeterSystem;
use crate::linalg::Vector;
use crate::par;
use crate::scalar::Scalar;

/// A finite set of positive roots, ordered by coordinates.
pub type RootSet = BTreeSet<Vector>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub vec: Vector,
    pub depth: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootError {
    #[error("{0} is not a root")]
    NotARoot(Vector),
    #[error("reflection subsystem did not stabilise within depth {0}")]
    Unstable(usize),
    #[error("subsystem needs at least one positive generating root")]
    NoGenerators,
}

/// Roots of `cone(alpha, beta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Interval {
    /// Complete list.
    Finite(Vec<Vector>),
    /// Members up to the requested height; the full interval is infinite.
    Infinite(Vec<Vector>),
}

impl Interval {
    pub fn roots(&self) -> &[Vector] {
        match self {
            Interval::Finite(v) | Interval::Infinite(v) => v,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Interval::Finite(_))
    }
}

/// Every positive root of height at most `bound`, grown by ascents.
#[derive(Clone, Debug, Default)]
struct HeightCache {
    bound: f64,
    roots: Vec<Vector>,
    seen: HashSet<Vector>,
    pending: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct RootStore {
    sys: CoxeterSystem,
    roots: Vec<Root>,
    lookup: HashMap<Vector, usize>,
    level_starts: Vec<usize>,
    heights: HeightCache,
}

/// Descending lexicographic order puts the simple roots in generator order.
fn level_order(a: &Vector, b: &Vector) -> std::cmp::Ordering {
    b.cmp(a)
}

impl RootStore {
    pub fn new(sys: CoxeterSystem) -> Self {
        let n = sys.rank();
        let roots: Vec<Root> = (0..n)
            .map(|s| Root {
                vec: sys.simple_root(s),
                depth: 0,
            })
            .collect();
        let lookup = roots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.vec.clone(), i))
            .collect();
        let heights = HeightCache {
            bound: 0.0,
            roots: Vec::new(),
            seen: roots.iter().map(|r| r.vec.clone()).collect(),
            pending: roots.iter().map(|r| r.vec.clone()).collect(),
        };
        RootStore {
            sys,
            roots,
            lookup,
            level_starts: vec![0],
            heights,
        }
    }

    pub fn with_depth(sys: CoxeterSystem, depth: usize) -> Self {
        let mut s = Self::new(sys);
        s.generate(depth);
        s
    }

    pub fn system(&self) -> &CoxeterSystem {
        &self.sys
    }

    /// Deepest complete level.
    pub fn depth(&self) -> usize {
        self.level_starts.len() - 1
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root(&self, i: usize) -> &Root {
        &self.roots[i]
    }

    pub fn index_of(&self, v: &Vector) -> Option<usize> {
        self.lookup.get(v).copied()
    }

    /// Roots of depth at most `depth` (a prefix of the store).
    pub fn up_to(&self, depth: usize) -> &[Root] {
        let end = self
            .level_starts
            .get(depth + 1)
            .copied()
            .unwrap_or(self.roots.len());
        &self.roots[..end]
    }

    /// Extend breadth-first until every positive root of depth `<= depth_limit` is stored.
    pub fn generate(&mut self, depth_limit: usize) {
        while self.depth() < depth_limit {
            let start = *self.level_starts.last().expect("level 0");
            let frontier: Vec<Vector> = self.roots[start..].iter().map(|r| r.vec.clone()).collect();
            let sys = &self.sys;
            let images: Vec<Vec<Vector>> = par::map(&frontier, |v| {
                (0..sys.rank())
                    .filter(|&s| sys.pair_simple(s, v).is_negative())
                    .map(|s| sys.reflect_simple(s, v))
                    .collect()
            });
            let mut next: Vec<Vector> = images
                .into_iter()
                .flatten()
                .filter(|v| !self.lookup.contains_key(v))
                .collect();
            next.sort_by(level_order);
            next.dedup();
            let depth = self.depth() + 1;
            self.level_starts.push(self.roots.len());
            for v in next {
                self.lookup.insert(v.clone(), self.roots.len());
                self.roots.push(Root { vec: v, depth });
            }
        }
    }

    /// Depth of a root by greedy descent; `None` if `v` is not a root.
    pub fn depth_of(&self, v: &Vector) -> Option<usize> {
        depth_of(&self.sys, v)
    }

    pub fn normalize(v: &Vector) -> Option<Vector> {
        v.normalized()
    }

    /// Every positive root of height at most `bound` (plus possibly a few more).
    pub fn roots_below_height(&mut self, bound: f64) -> &[Vector] {
        self.grow_heights(bound);
        &self.heights.roots
    }

    fn grow_heights(&mut self, bound: f64) {
        let h = &mut self.heights;
        if bound <= h.bound && !h.roots.is_empty() {
            return;
        }
        h.bound = h.bound.max(bound);
        let limit = h.bound;
        let (mut work, rest): (Vec<Vector>, Vec<Vector>) = std::mem::take(&mut h.pending)
            .into_iter()
            .partition(|v| v.height().to_f64() <= limit);
        h.pending = rest;
        while let Some(v) = work.pop() {
            for s in 0..self.sys.rank() {
                if self.sys.pair_simple(s, &v).is_negative() {
                    let w = self.sys.reflect_simple(s, &v);
                    if h.seen.insert(w.clone()) {
                        if w.height().to_f64() <= limit {
                            work.push(w);
                        } else {
                            h.pending.push(w);
                        }
                    }
                }
            }
            h.roots.push(v);
        }
        h.roots.sort_by(|a, b| {
            a.height()
                .cmp(&b.height())
                .then_with(|| level_order(a, b))
        });
    }

    /// All roots in `cone(alpha, beta)`. Complete when `B(alpha, beta) > -1`; otherwise
    /// truncated at coordinate sum `infinite_height`.
    pub fn dihedral_interval(&mut self, alpha: &Vector, beta: &Vector, infinite_height: f64) -> Interval {
        let c = self.sys.bilinear(alpha, beta);
        let finite = c > Scalar::int(-1);
        let bound = if finite {
            let cf = c.to_f64();
            let stretch = if cf < 0.0 { 1.0 / (1.0 - cf * cf).sqrt() } else { 1.0 };
            (alpha.height().to_f64() + beta.height().to_f64()) * stretch.max(1.0) * (1.0 + 1e-9) + 1e-9
        } else {
            infinite_height
        };
        self.grow_heights(bound);
        let plane = Plane::new(alpha, beta);
        let mut out: Vec<Vector> = self
            .heights
            .roots
            .iter()
            .filter(|v| v.height().to_f64() <= bound && plane.contains_in_cone(v))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.height().cmp(&b.height()).then_with(|| level_order(a, b)));
        if finite {
            Interval::Finite(out)
        } else {
            Interval::Infinite(out)
        }
    }

    /// Indices of stored roots of depth `<= depth` that belong to `sub`.
    pub fn window(&mut self, depth: usize, sub: &Subsystem) -> Vec<usize> {
        self.generate(depth);
        let sys = &self.sys;
        let roots = self.up_to(depth);
        let idx: Vec<usize> = (0..roots.len()).collect();
        par::filter_map(&idx, |&i| sub.contains(sys, &roots[i].vec).then_some(i))
    }
}

/// Greedy descent depth; `None` for non-roots.
pub fn depth_of(sys: &CoxeterSystem, v: &Vector) -> Option<usize> {
    let mut v = if v.is_negative() { v.neg() } else { v.clone() };
    let mut steps = 0;
    loop {
        if !v.is_positive() {
            return None;
        }
        if simple_index(&v).is_some() {
            return Some(steps);
        }
        let s = (0..sys.rank()).find(|&s| sys.pair_simple(s, &v).is_positive())?;
        v = sys.reflect_simple(s, &v);
        steps += 1;
        if steps > 100_000 {
            return None;
        }
    }
}

fn simple_index(v: &Vector) -> Option<usize> {
    let mut hit = None;
    for (i, x) in v.0.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        if !x.is_one() || hit.is_some() {
            return None;
        }
        hit = Some(i);
    }
    hit
}

pub fn is_root(sys: &CoxeterSystem, v: &Vector) -> bool {
    depth_of(sys, v).is_some()
}

/// Exact test for membership of `cone(alpha, beta)`, with a float pre-check.
#[derive(Clone, Debug)]
pub struct Plane {
    a: Vector,
    b: Vector,
    a_hat: Vec<f64>,
    b_hat: Vec<f64>,
    /// Coordinates `(i, j)` where `alpha`, `beta` are independent, and the determinant.
    pivot: Option<(usize, usize, Scalar)>,
}

impl Plane {
    pub fn new(a: &Vector, b: &Vector) -> Self {
        let n = a.dim();
        let mut pivot = None;
        'outer: for i in 0..n {
            for j in i + 1..n {
                let det = &a.0[i] * &b.0[j] - &a.0[j] * &b.0[i];
                if !det.is_zero() {
                    pivot = Some((i, j, det));
                    break 'outer;
                }
            }
        }
        Plane {
            a: a.clone(),
            b: b.clone(),
            a_hat: a.normalized_f64(),
            b_hat: b.normalized_f64(),
            pivot,
        }
    }

    /// Coefficients `(x, y)` with `v = x alpha + y beta`, if `v` is in the plane.
    pub fn coefficients(&self, v: &Vector) -> Option<(Scalar, Scalar)> {
        let (i, j, det) = self.pivot.as_ref()?;
        let x = (&v.0[*i] * &self.b.0[*j] - &v.0[*j] * &self.b.0[*i]) / det;
        let y = (&self.a.0[*i] * &v.0[*j] - &self.a.0[*j] * &v.0[*i]) / det;
        let back = self.a.scale(&x).add(&self.b.scale(&y));
        (back == *v).then_some((x, y))
    }

    /// Cheap necessary condition: the normalized point is near the segment.
    pub fn near_segment(&self, v_hat: &[f64]) -> bool {
        let d: Vec<f64> = self.b_hat.iter().zip(&self.a_hat).map(|(b, a)| b - a).collect();
        let dd: f64 = d.iter().map(|x| x * x).sum();
        let t = if dd == 0.0 {
            0.0
        } else {
            v_hat
                .iter()
                .zip(&self.a_hat)
                .zip(&d)
                .map(|((v, a), d)| (v - a) * d)
                .sum::<f64>()
                / dd
        };
        if !(-1e-7..=1.0 + 1e-7).contains(&t) {
            return false;
        }
        v_hat
            .iter()
            .zip(&self.a_hat)
            .zip(&d)
            .all(|((v, a), d)| (v - a - t * d).abs() < 1e-7)
    }

    pub fn contains_in_cone(&self, v: &Vector) -> bool {
        if !self.near_segment(&v.normalized_f64()) {
            return false;
        }
        match self.coefficients(v) {
            Some((x, y)) => !x.is_negative() && !y.is_negative() && !(x.is_zero() && y.is_zero()),
            None => false,
        }
    }
}

/// A reflection subsystem given by its simple system inside the ambient root system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub simple: Vec<Vector>,
}

impl Subsystem {
    pub fn full(sys: &CoxeterSystem) -> Self {
        Subsystem {
            simple: (0..sys.rank()).map(|s| sys.simple_root(s)).collect(),
        }
    }

    /// Is the ambient root `v` a positive root of this subsystem? Descends along simple
    /// reflections of the subsystem that lower the height.
    pub fn contains(&self, sys: &CoxeterSystem, v: &Vector) -> bool {
        let mut v = v.clone();
        for _ in 0..100_000 {
            if !v.is_positive() {
                return false;
            }
            if self.simple.contains(&v) {
                return true;
            }
            let Some(d) = self
                .simple
                .iter()
                .find(|d| sys.bilinear(d, &v).is_positive())
            else {
                return false;
            };
            v = sys.reflect(d, &v).expect("simple roots are not isotropic");
        }
        false
    }

    /// Reflect by the `i`-th simple root of the subsystem.
    pub fn reflect(&self, sys: &CoxeterSystem, i: usize, v: &Vector) -> Vector {
        sys.reflect(&self.simple[i], v).expect("simple roots are not isotropic")
    }

    /// Gram matrix of the subsystem's simple roots.
    pub fn gram(&self, sys: &CoxeterSystem) -> Vec<Vec<Scalar>> {
        self.simple
            .iter()
            .map(|a| self.simple.iter().map(|b| sys.bilinear(a, b)).collect())
            .collect()
    }
}

/// Simple system of the reflection subgroup generated by reflections in `generators`.
///
/// Reflections are closed under conjugation among roots of ambient depth at most
/// `max(depth of generators) + budget`; the simple system is the set of extreme rays of
/// the resulting cone. The answer is accepted once it is the same at `budget` and
/// `budget + 1`, and its Gram matrix has nonpositive off-diagonal entries.
pub fn subsystem(sys: &CoxeterSystem, generators: &[Vector], budget: usize) -> Result<Subsystem, RootError> {
    if generators.is_empty() {
        return Err(RootError::NoGenerators);
    }
    let mut base = 0;
    for g in generators {
        if !g.is_positive() {
            return Err(RootError::NotARoot(g.clone()));
        }
        base = base.max(depth_of(sys, g).ok_or_else(|| RootError::NotARoot(g.clone()))?);
    }
    let at = |limit: usize| -> Vec<Vector> {
        let mut set: RootSet = generators.iter().cloned().collect();
        loop {
            let current: Vec<Vector> = set.iter().cloned().collect();
            let mut added = false;
            for a in &current {
                for b in &current {
                    if a == b {
                        continue;
                    }
                    let r = sys.reflect(a, b).expect("roots are not isotropic");
                    let r = if r.is_negative() { r.neg() } else { r };
                    if depth_of(sys, &r).is_some_and(|d| d <= limit) && set.insert(r) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        let all: Vec<Vector> = set.into_iter().collect();
        let extreme: Vec<Vector> = par::filter_map(&all, |v| {
            let others: Vec<Vector> = all.iter().filter(|w| *w != v).cloned().collect();
            (!convexity::in_cone(v, &others).is_member()).then(|| v.clone())
        });
        extreme
    };
    let first = at(base + budget);
    let second = at(base + budget + 1);
    if first != second {
        return Err(RootError::Unstable(base + budget));
    }
    for (i, a) in first.iter().enumerate() {
        for b in &first[i + 1..] {
            if sys.bilinear(a, b).is_positive() {
                return Err(RootError::Unstable(base + budget));
            }
        }
    }
    Ok(Subsystem { simple: first })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    #[test]
    fn a2_has_three_positive_roots() {
        let mut st = RootStore::new(catalog::a2());
        st.generate(6);
        assert_eq!(st.len(), 3);
        assert_eq!(st.up_to(1).len(), 3);
        assert_eq!(st.root(2).vec, v(&[1, 1]));
        assert!(st.roots().iter().all(|r| st.system().bilinear(&r.vec, &r.vec).is_one()));
    }

    #[test]
    fn dihedral_levels_follow_the_two_families() {
        let st = RootStore::with_depth(catalog::dihedral_inf(), 3);
        let got: Vec<Vector> = st.roots().iter().map(|r| r.vec.clone()).collect();
        assert_eq!(
            got,
            vec![
                v(&[1, 0]),
                v(&[0, 1]),
                v(&[2, 1]),
                v(&[1, 2]),
                v(&[3, 2]),
                v(&[2, 3]),
                v(&[4, 3]),
                v(&[3, 4])
            ]
        );
        assert_eq!(st.depth_of(&v(&[4, 3])), Some(3));
        assert_eq!(st.depth_of(&v(&[4, 4])), None);
    }

    #[test]
    fn normalized_points() {
        let sys = catalog::universal3();
        let x = sys.reflect_simple(1, &v(&[1, 0, 1]));
        assert_eq!(x, v(&[1, 4, 1]));
        assert_eq!(
            RootStore::normalize(&x).unwrap(),
            Vector(vec![Scalar::rational(1, 6), Scalar::rational(2, 3), Scalar::rational(1, 6)])
        );
        assert!(sys.bilinear(&x, &x).is_zero());
    }

    #[test]
    fn intervals() {
        let mut a2 = RootStore::new(catalog::a2());
        assert_eq!(
            a2.dihedral_interval(&v(&[1, 0]), &v(&[0, 1]), 10.0),
            Interval::Finite(vec![v(&[1, 0]), v(&[0, 1]), v(&[1, 1])])
        );
        let mut dih = RootStore::new(catalog::dihedral_inf());
        let Interval::Infinite(part) = dih.dihedral_interval(&v(&[1, 0]), &v(&[0, 1]), 6.0) else {
            panic!()
        };
        assert_eq!(part.len(), 6);
        // Non-canonical pair with form 1: 2a+b lies between a and 3a+2b.
        let Interval::Finite(part) = dih.dihedral_interval(&v(&[1, 0]), &v(&[3, 2]), 30.0) else {
            panic!()
        };
        assert!(part.contains(&v(&[2, 1])));

        let c2 = catalog::affine_c2();
        let (a, b, g) = (c2.simple_root(0), c2.simple_root(1), c2.simple_root(2));
        let gb = c2.reflect_simple(2, &b);
        assert_eq!(c2.bilinear(&g, &gb), Scalar::surd(1, 2, 2));
        let mut st = RootStore::new(c2.clone());
        let Interval::Finite(roots) = st.dihedral_interval(&g, &b, 0.0) else { panic!() };
        assert_eq!(roots.len(), 4);
        assert!(roots.contains(&gb) && roots.contains(&c2.reflect_simple(1, &g)));
        // An acute pair spans no other root.
        let Interval::Finite(roots) = st.dihedral_interval(&g, &gb, 0.0) else { panic!() };
        assert_eq!(roots, vec![g.clone(), gb.clone()]);
        // Orthogonal pair in the C2 parabolic: the bisector s_a(alpha_b) is not produced by
        // the two reflections but does lie in the cone.
        let ba = c2.reflect_simple(1, &a);
        assert!(c2.bilinear(&a, &ba).is_zero());
        let Interval::Finite(rs) = st.dihedral_interval(&a, &ba, 0.0) else { panic!() };
        assert_eq!(rs.len(), 3);
        assert!(rs.contains(&c2.reflect_simple(0, &b)));
    }

    #[test]
    fn finiteness_matches_order_of_the_rotation() {
        let sys = catalog::affine_c2();
        let st = RootStore::with_depth(sys.clone(), 4);
        let roots: Vec<Vector> = st.roots().iter().map(|r| r.vec.clone()).collect();
        let mut st = st;
        for (i, a) in roots.iter().enumerate().take(12) {
            for b in roots.iter().skip(i + 1).take(12) {
                let rot = |x: &Vector| sys.reflect(a, &sys.reflect(b, x).unwrap()).unwrap();
                let probe = a.add(&b.scale(&Scalar::int(3)));
                let mut x = rot(&probe);
                let mut finite = false;
                for _ in 0..24 {
                    if x == probe {
                        finite = true;
                        break;
                    }
                    x = rot(&x);
                }
                let interval = st.dihedral_interval(a, b, 20.0);
                if sys.bilinear(a, b) >= Scalar::one() {
                    // Translation-like pairs: infinite order, yet no isotropic point between.
                    assert!(interval.is_finite() && !finite);
                } else {
                    assert_eq!(interval.is_finite(), finite, "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn universal_subsystem_of_rank_four() {
        let sys = catalog::universal3();
        let (r, t) = (sys.simple_root(0), sys.simple_root(2));
        let sr = sys.reflect_simple(1, &r);
        let st = sys.reflect_simple(1, &t);
        let sub = subsystem(&sys, &[sr.clone(), st.clone(), r.clone(), t.clone()], 2).unwrap();
        let want: BTreeSet<Vector> = [sr.clone(), st.clone(), r.clone(), t.clone()].into_iter().collect();
        assert_eq!(sub.simple.iter().cloned().collect::<BTreeSet<_>>(), want);
        assert_eq!(sys.bilinear(&r, &t), Scalar::int(-1));
        assert_eq!(sys.bilinear(&sr, &st), Scalar::int(-1));
        assert_eq!(sys.bilinear(&r, &sr), Scalar::int(-1));
        assert_eq!(sys.bilinear(&r, &st), Scalar::int(-3));
        assert_eq!(sys.bilinear(&sr, &t), Scalar::int(-3));
        let tsr = sys.reflect_simple(2, &sr);
        assert!(sub.contains(&sys, &tsr));
        assert!(!sub.contains(&sys, &sys.simple_root(1)));
        let single = subsystem(&sys, std::slice::from_ref(&r), 1).unwrap();
        assert_eq!(single.simple, vec![r]);
    }

    #[test]
    fn windows_respect_membership() {
        let sys = catalog::universal3();
        let (r, t) = (sys.simple_root(0), sys.simple_root(2));
        let sub = Subsystem {
            simple: vec![
                sys.reflect_simple(1, &r),
                sys.reflect_simple(1, &t),
                r,
                t,
            ],
        };
        let mut st = RootStore::new(sys.clone());
        let w = st.window(4, &sub);
        assert!(w.len() > 4);
        assert!(w.iter().all(|&i| st.root(i).depth <= 4));
        assert!(w.iter().all(|&i| sub.contains(&sys, &st.root(i).vec)));
        let alpha_s = st.index_of(&sys.simple_root(1)).unwrap();
        assert!(!w.contains(&alpha_s));
    }
}

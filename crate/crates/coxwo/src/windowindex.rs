//! Precomputed exact incidence data on a window of roots, answering closure, convexity
//! and separability questions about small subsets with bit operations.
//!
//! Cone membership is reduced to independent pairs and triples of generators, and hull
//! intersection of two planar point sets to a point in a triangle or segment, or two
//! crossing segments. Families of obstructions are then stored through their small
//! hitting sets, so a subset query never touches a scalar.

use std::cell::OnceCell;
use std::collections::{HashMap, HashSet};

use crate::coxsys::CoxeterSystem;
use crate::linalg::Vector;
use crate::par;
use crate::rootstore::{Interval, Plane, RootStore};
use crate::scalar::Scalar;

pub type Mask = u128;

/// Window flags of a subset; `closed` uses complete dihedral intervals and is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowFlags {
    pub closed: bool,
    pub coclosed: bool,
    pub convex: bool,
    pub coconvex: bool,
    pub separable: bool,
}

impl WindowFlags {
    pub fn biclosed(&self) -> bool {
        self.closed && self.coclosed
    }

    pub fn biconvex(&self) -> bool {
        self.convex && self.coconvex
    }
}

pub struct WindowIndex {
    roots: Vec<Vector>,
    extra: Vec<Vector>,
    rank: usize,
    /// For `i < j`: roots of `cone(r_i, r_j)` when the interval is finite and inside the
    /// window.
    pair_closed: HashMap<(usize, usize), Option<Mask>>,
    /// Window items inside `cone(r_i, r_j)` / `cone(r_i, r_j, r_k)`.
    pair_cone: HashMap<(usize, usize), Mask>,
    triple_cone: HashMap<(usize, usize, usize), Mask>,
    /// Hitting sets (over roots, at most three) of the obstructions for each root.
    co_pair: Vec<Vec<Mask>>,
    co_cone: Vec<Vec<Mask>>,
    co_cone_extra: Vec<Vec<Mask>>,
    /// Hitting sets (at most two) of segments crossing `[r_i, r_j]`.
    cross: HashMap<(usize, usize), Vec<Mask>>,
    /// Window position of each simple root, and `s(r_j)` for every generator `s`.
    simple: Vec<Option<usize>>,
    reflect: Vec<Vec<Slot>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Root(usize),
    Negative,
    Outside,
}

/// Outcome of peeling a subset through the window's reflection table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskPeel {
    Success,
    Failure,
    /// A reflected root left the window; peel the set exactly instead.
    LeftWindow,
}

fn bit(i: usize) -> Mask {
    1 << i
}

pub fn bits(mut mask: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            i
        })
    })
}

fn det3(a: &[Scalar], b: &[Scalar], c: &[Scalar]) -> Scalar {
    &a[0] * &(&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * &(&b[0] * &c[2] - &b[2] * &c[0])
        + &a[2] * &(&b[0] * &c[1] - &b[1] * &c[0])
}

fn det3f(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

const SLACK: f64 = 1e-9;
/// Float Cramer coefficients are trusted only for triples this far from degenerate.
const WELL_CONDITIONED: f64 = 1e-6;
/// Absolute error bound for determinants of unit vectors.
const ROUNDOFF: f64 = 1e-12;

fn cross(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn crossf(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

/// Three generators with their cofactors; `x = sum_k (x . cof_k / det) t_k`.
struct Triple<'a> {
    t: [&'a Vector; 3],
    det_f: f64,
    cof_f: [[f64; 3]; 3],
    exact: OnceCell<(Scalar, [Vec<Scalar>; 3])>,
}

impl<'a> Triple<'a> {
    fn new(t: [&'a Vector; 3], tf: [&[f64]; 3]) -> Self {
        let cof_f = [crossf(tf[1], tf[2]), crossf(tf[2], tf[0]), crossf(tf[0], tf[1])];
        let det_f = tf[0].iter().zip(&cof_f[0]).map(|(a, b)| a * b).sum();
        Triple { t, det_f, cof_f, exact: OnceCell::new() }
    }

    fn exact(&self) -> &(Scalar, [Vec<Scalar>; 3]) {
        self.exact.get_or_init(|| {
            let t = self.t;
            let cof = [cross(&t[1].0, &t[2].0), cross(&t[2].0, &t[0].0), cross(&t[0].0, &t[1].0)];
            (dot(&t[0].0, &cof[0]), cof)
        })
    }

    /// Float determinant of unit vectors decides clear cases; near zero it is exact.
    fn independent(&self) -> bool {
        self.det_f.abs() > SLACK || !self.exact().0.is_zero()
    }

    /// Is `x` in the cone of an independent triple?
    fn contains(&self, x: &Vector, xf: &[f64]) -> bool {
        if self.det_f.abs() > WELL_CONDITIONED {
            let l = self.cof_f.map(|c| c.iter().zip(xf).map(|(a, b)| a * b).sum::<f64>() / self.det_f);
            let scale = l.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if l.iter().any(|&v| v < -SLACK * scale) {
                return false;
            }
            if l.iter().all(|&v| v > SLACK * scale) {
                return true;
            }
        }
        let (d, cof) = self.exact();
        let s = d.sign();
        cof.iter().all(|c| dot(c, &x.0).sign() * s >= 0)
    }
}

/// Do `cone(a, b)` and `cone(c, d)` share a nonzero vector, with all four spanning space?
///
/// The null vector of the four generators has cofactor coordinates; `degenerate` names
/// the triples whose determinant is exactly zero.
fn segments_cross(
    idx: [usize; 4],
    items: &[Vector],
    floats: &[Vec<f64>],
    degenerate: &HashSet<(usize, usize, usize)>,
) -> bool {
    let sorted3 = |a: usize, b: usize, c: usize| {
        let mut t = [a, b, c];
        t.sort_unstable();
        (t[0], t[1], t[2])
    };
    // Drop generator k; the sign flips with k.
    let signs: [i8; 4] = std::array::from_fn(|k| {
        let rest: Vec<usize> = (0..4).filter(|&x| x != k).map(|x| idx[x]).collect();
        let flip = if k % 2 == 0 { -1.0 } else { 1.0 };
        let d = flip * det3f(&floats[rest[0]], &floats[rest[1]], &floats[rest[2]]);
        if d > ROUNDOFF {
            1
        } else if d < -ROUNDOFF {
            -1
        } else if degenerate.contains(&sorted3(rest[0], rest[1], rest[2])) {
            0
        } else {
            let e = det3(&items[rest[0]].0, &items[rest[1]].0, &items[rest[2]].0);
            e.sign() * flip as i8
        }
    });
    if signs.iter().all(|&x| x == 0) {
        return false;
    }
    let ok = |s: i8| {
        signs[0] * s >= 0 && signs[1] * s >= 0 && signs[2] * s <= 0 && signs[3] * s <= 0 && !(signs[0] == 0 && signs[1] == 0)
    };
    ok(1) || ok(-1)
}

/// Minimal sets of at most `budget` allowed items meeting every member of `family`.
fn hitting_sets(family: &[Mask], allowed: Mask, budget: usize) -> Vec<Mask> {
    fn go(family: &[Mask], allowed: Mask, chosen: Mask, budget: usize, out: &mut Vec<Mask>) {
        match family.iter().find(|&&t| t & chosen == 0) {
            None => out.push(chosen),
            Some(&t) => {
                if budget == 0 {
                    return;
                }
                for e in bits(t & allowed) {
                    go(family, allowed, chosen | bit(e), budget - 1, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(family, allowed, 0, budget, &mut out);
    out.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<Mask> = Vec::new();
    for m in out {
        if !minimal.iter().any(|&h| h & !m == 0) {
            minimal.push(m);
        }
    }
    minimal
}

fn hits(sets: &[Mask], rest: Mask) -> bool {
    sets.iter().any(|&h| h & !rest == 0)
}

impl WindowIndex {
    /// Index the stored roots of depth `<= depth` together with extra points (normally an
    /// imaginary sample) that can never belong to a subset.
    pub fn new(store: &mut RootStore, depth: usize, extra: &[Vector]) -> Self {
        store.generate(depth);
        let sys: CoxeterSystem = store.system().clone();
        let rank = sys.rank();
        assert!((2..=3).contains(&rank), "window index supports ranks 2 and 3");
        let roots: Vec<Vector> = store.up_to(depth).iter().map(|r| r.vec.clone()).collect();
        let m = roots.len();
        assert!(m + extra.len() <= 128, "window too large for a 128-bit mask");
        let items: Vec<Vector> = roots.iter().chain(extra).cloned().collect();
        let itemsf: Vec<Vec<f64>> = items.iter().map(Vector::normalized_f64_signed).collect();
        let total = items.len();
        let root_bits: Mask = if m == 128 { Mask::MAX } else { bit(m) - 1 };

        let all_pairs: Vec<(usize, usize)> = (0..total)
            .flat_map(|i| (i + 1..total).map(move |j| (i, j)))
            .collect();
        let pair_cone: HashMap<(usize, usize), Mask> = par::map(&all_pairs, |&(i, j)| {
            let plane = Plane::new(&items[i], &items[j]);
            let mask = (0..total)
                .filter(|&k| k != i && k != j && plane.contains_in_cone(&items[k]))
                .fold(0, |acc, k| acc | bit(k));
            ((i, j), mask)
        })
        .into_iter()
        .collect();

        let root_pairs: Vec<(usize, usize)> = all_pairs.iter().copied().filter(|&(_, j)| j < m).collect();
        let mut pair_closed = HashMap::new();
        for &(i, j) in &root_pairs {
            let entry = match store.dihedral_interval(&roots[i], &roots[j], 0.0) {
                Interval::Infinite(_) => None,
                Interval::Finite(rs) => rs
                    .iter()
                    .map(|r| roots.iter().position(|x| x == r).map(bit))
                    .collect::<Option<Vec<Mask>>>()
                    .map(|v| v.into_iter().fold(0, |a, b| a | b)),
            };
            pair_closed.insert((i, j), entry);
        }

        let mut triple_cone = HashMap::new();
        let mut degenerate = HashSet::new();
        if rank == 3 {
            let triples: Vec<(usize, usize, usize)> = (0..total)
                .flat_map(|i| (i + 1..total).flat_map(move |j| (j + 1..total).map(move |k| (i, j, k))))
                .collect();
            triple_cone = par::map(&triples, |&(i, j, k)| {
                let triple = Triple::new(
                    [&items[i], &items[j], &items[k]],
                    [itemsf[i].as_slice(), &itemsf[j], &itemsf[k]],
                );
                if !triple.independent() {
                    return ((i, j, k), None);
                }
                let mask = (0..total)
                    .filter(|&x| x != i && x != j && x != k && triple.contains(&items[x], &itemsf[x]))
                    .fold(0, |acc, x| acc | bit(x));
                ((i, j, k), Some(mask))
            })
            .into_iter()
            .map(|(key, mask)| {
                if mask.is_none() {
                    degenerate.insert(key);
                }
                (key, mask.unwrap_or(0))
            })
            .collect();
        }

        let idx: Vec<usize> = (0..m).collect();
        let families: Vec<(Vec<Mask>, Vec<Mask>, Vec<Mask>)> = par::map(&idx, |&a| {
            let mut pairs_r = Vec::new();
            let mut cone_r = Vec::new();
            let mut cone_x = Vec::new();
            for (&(i, j), &mask) in &pair_cone {
                if mask & bit(a) != 0 {
                    let t = bit(i) | bit(j);
                    cone_x.push(t);
                    if t & !root_bits == 0 {
                        pairs_r.push(t);
                        cone_r.push(t);
                    }
                }
            }
            for (&(i, j, k), &mask) in &triple_cone {
                if mask & bit(a) != 0 {
                    let t = bit(i) | bit(j) | bit(k);
                    cone_x.push(t);
                    if t & !root_bits == 0 {
                        cone_r.push(t);
                    }
                }
            }
            let allowed = root_bits & !bit(a);
            (
                hitting_sets(&sorted(pairs_r), allowed, 3),
                hitting_sets(&sorted(cone_r), allowed, 3),
                hitting_sets(&sorted(cone_x), allowed, 3),
            )
        });
        let mut co_pair = Vec::with_capacity(m);
        let mut co_cone = Vec::with_capacity(m);
        let mut co_cone_extra = Vec::with_capacity(m);
        for (p, c, x) in families {
            co_pair.push(p);
            co_cone.push(c);
            co_cone_extra.push(x);
        }

        let mut cross = HashMap::new();
        if rank == 3 {
            cross = par::map(&root_pairs, |&(i, j)| {
                let family: Vec<Mask> = all_pairs
                    .iter()
                    .filter(|&&(k, l)| k != i && k != j && l != i && l != j)
                    .filter(|&&(k, l)| segments_cross([i, j, k, l], &items, &itemsf, &degenerate))
                    .map(|&(k, l)| bit(k) | bit(l))
                    .collect();
                let allowed = root_bits & !bit(i) & !bit(j);
                ((i, j), hitting_sets(&sorted(family), allowed, 2))
            })
            .into_iter()
            .collect();
        }

        let simple = (0..rank)
            .map(|s| roots.iter().position(|r| *r == sys.simple_root(s)))
            .collect();
        let reflect = (0..rank)
            .map(|s| {
                roots
                    .iter()
                    .map(|r| {
                        let image = sys.reflect_simple(s, r);
                        if !image.is_positive() {
                            Slot::Negative
                        } else {
                            roots.iter().position(|x| *x == image).map_or(Slot::Outside, Slot::Root)
                        }
                    })
                    .collect()
            })
            .collect();

        WindowIndex {
            simple,
            reflect,
            roots,
            extra: extra.to_vec(),
            rank,
            pair_closed,
            pair_cone,
            triple_cone,
            co_pair,
            co_cone,
            co_cone_extra,
            cross,
        }
    }

    pub fn roots(&self) -> &[Vector] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn mask_of(&self, set: &[Vector]) -> Option<Mask> {
        set.iter()
            .map(|v| self.roots.iter().position(|r| r == v).map(bit))
            .try_fold(0, |acc, b| b.map(|b| acc | b))
    }

    pub fn set_of(&self, mask: Mask) -> Vec<Vector> {
        bits(mask).map(|i| self.roots[i].clone()).collect()
    }

    /// Items of the window (roots and extra points) in `cone(A)`.
    fn cone_mask(&self, members: &[usize]) -> Mask {
        let mut mask = 0;
        for (x, &i) in members.iter().enumerate() {
            for (y, &j) in members.iter().enumerate().skip(x + 1) {
                mask |= self.pair_cone[&(i, j)];
                if self.rank == 3 {
                    for &k in &members[y + 1..] {
                        mask |= self.triple_cone[&(i, j, k)];
                    }
                }
            }
        }
        mask
    }

    /// Flags of a subset of at most four window roots.
    pub fn flags(&self, a: Mask) -> WindowFlags {
        let members: Vec<usize> = bits(a).collect();
        assert!(members.len() <= 4, "subsets of at most four roots");
        let m = self.roots.len();
        let root_bits: Mask = if m == 128 { Mask::MAX } else { bit(m) - 1 };
        let mut closed = true;
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                match self.pair_closed[&(i, j)] {
                    Some(interval) if interval & !a == 0 => {}
                    _ => closed = false,
                }
            }
        }
        let rest = |i: usize| a & !bit(i);
        let coclosed = members.iter().all(|&i| hits(&self.co_pair[i], rest(i)));
        let coconvex = members.iter().all(|&i| hits(&self.co_cone[i], rest(i)));
        let cone = self.cone_mask(&members);
        let convex = cone & root_bits & !a == 0;
        let mut separable = convex
            && cone & !root_bits == 0
            && members.iter().all(|&i| hits(&self.co_cone_extra[i], rest(i)));
        if separable && self.rank == 3 {
            'pairs: for (x, &i) in members.iter().enumerate() {
                for &j in &members[x + 1..] {
                    if !hits(&self.cross[&(i, j)], a & !bit(i) & !bit(j)) {
                        separable = false;
                        break 'pairs;
                    }
                }
            }
        }
        WindowFlags {
            closed,
            coclosed,
            convex,
            coconvex,
            separable,
        }
    }

    /// Peel `a`, always removing the lowest-index simple root present.
    pub fn peel(&self, mut a: Mask) -> MaskPeel {
        while a != 0 {
            let Some((s, i)) = self
                .simple
                .iter()
                .enumerate()
                .find_map(|(s, i)| i.filter(|&i| a & bit(i) != 0).map(|i| (s, i)))
            else {
                return MaskPeel::Failure;
            };
            let mut next = 0;
            for j in bits(a & !bit(i)) {
                match self.reflect[s][j] {
                    Slot::Root(k) => next |= bit(k),
                    Slot::Negative => return MaskPeel::Failure,
                    Slot::Outside => return MaskPeel::LeftWindow,
                }
            }
            a = next;
        }
        MaskPeel::Success
    }

    pub fn extra(&self) -> &[Vector] {
        &self.extra
    }
}

fn sorted(mut v: Vec<Mask>) -> Vec<Mask> {
    v.sort_unstable();
    v.dedup();
    v
}

/// All masks of subsets of `{0..m}` of size at most `k`, in increasing size.
pub fn small_subsets(m: usize, k: usize) -> Vec<Mask> {
    let mut out = vec![0];
    let mut layer = vec![(0 as Mask, 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for &(mask, start) in &layer {
            for i in start..m {
                next.push((mask | bit(i), i + 1));
            }
        }
        out.extend(next.iter().map(|p| p.0));
        layer = next;
    }
    out
}

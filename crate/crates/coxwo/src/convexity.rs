//! Exact cone and hull membership, strict separation, closure operators and the
//! closed / convex / separable classification of root sets.
//!
//! The LPs are solved on a growing subset of the generators: a Farkas certificate found for
//! the subset is checked against every generator, and violated ones join the subset. The
//! final answer is always certified on the full input.

use std::collections::HashSet;

use serde::Serialize;

use crate::linalg::{self, Vector};
use crate::lp::{Lp, LpResult, Sense};
use crate::par;
use crate::rootstore::{Interval, Plane, RootSet, RootStore, Subsystem};
use crate::scalar::Scalar;
use crate::weakorder::{self, PeelError};

/// Outcome of a cone or hull membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Nonnegative coefficients, one per generator, reproducing the target.
    Member(Vec<Scalar>),
    /// Affine functional `x -> normal.x + offset`, nonnegative on every generator and
    /// negative on the target. `offset` is zero for cone queries.
    Outside { normal: Vector, offset: Scalar },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

const SEED: usize = 12;
const BATCH: usize = 8;

fn seed_subset(k: usize) -> Vec<usize> {
    (0..k.min(SEED)).collect()
}

fn pick_violators(violations: Vec<(usize, f64)>, into: &mut Vec<usize>) {
    let mut v = violations;
    v.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    into.extend(v.into_iter().take(BATCH).map(|(i, _)| i));
    into.sort_unstable();
}

fn membership(target: &Vector, gens: &[Vector], affine: bool) -> Membership {
    let n = target.dim();
    let mut active = seed_subset(gens.len());
    loop {
        let mut lp = Lp::new();
        let lam = lp.vars(active.len(), false);
        for i in 0..n {
            let terms: Vec<(usize, Scalar)> = active
                .iter()
                .zip(&lam)
                .filter(|(g, _)| !gens[**g].0[i].is_zero())
                .map(|(g, &l)| (l, gens[*g].0[i].clone()))
                .collect();
            lp.constraint(&terms, Sense::Eq, target.0[i].clone());
        }
        if affine {
            let terms: Vec<(usize, Scalar)> = lam.iter().map(|&l| (l, Scalar::one())).collect();
            lp.constraint(&terms, Sense::Eq, Scalar::one());
        }
        match lp.solve() {
            LpResult::Optimal { x, .. } => {
                let mut coeffs = vec![Scalar::zero(); gens.len()];
                for (g, v) in active.iter().zip(x) {
                    coeffs[*g] = v;
                }
                return Membership::Member(coeffs);
            }
            LpResult::Infeasible { farkas } => {
                let normal = Vector(farkas[..n].to_vec());
                let offset = if affine { farkas[n].clone() } else { Scalar::zero() };
                let idx: Vec<usize> = (0..gens.len()).filter(|i| !active.contains(i)).collect();
                let bad: Vec<(usize, f64)> = par::filter_map(&idx, |&i| {
                    let val = normal.dot(&gens[i]) + &offset;
                    val.is_negative().then(|| (i, val.to_f64()))
                });
                if bad.is_empty() {
                    return Membership::Outside { normal, offset };
                }
                pick_violators(bad, &mut active);
            }
            LpResult::Unbounded => unreachable!("feasibility problems have a zero objective"),
        }
    }
}

/// Is `target` a nonnegative combination of `gens`?
pub fn in_cone(target: &Vector, gens: &[Vector]) -> Membership {
    if target.is_zero() {
        return Membership::Member(vec![Scalar::zero(); gens.len()]);
    }
    membership(target, gens, false)
}

/// Is `target` a convex combination of `points`?
pub fn in_hull(target: &Vector, points: &[Vector]) -> Membership {
    membership(target, points, true)
}

/// Affine functional `x -> normal.x - offset` that is `>= gap` on one side and `<= -gap`
/// on the other, with `gap > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Separator {
    pub normal: Vector,
    pub offset: Scalar,
    pub gap: Scalar,
}

impl Separator {
    pub fn eval(&self, x: &Vector) -> Scalar {
        self.normal.dot(x) - &self.offset
    }

    /// Linear functional agreeing with [`Separator::eval`] on the slice `height = 1`.
    pub fn homogeneous(&self) -> Vector {
        Vector(self.normal.0.iter().map(|c| c - &self.offset).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Separation {
    Hyperplane(Separator),
    /// A point of `conv(P) ∩ conv(Q)`.
    Intersect(Vector),
}

/// Strict hyperplane separation of two finite point sets, or a common hull point.
pub fn strictly_separate(p: &[Vector], q: &[Vector]) -> Separation {
    let Some(n) = p.first().or(q.first()).map(Vector::dim) else {
        return Separation::Hyperplane(Separator {
            normal: Vector::zero(0),
            offset: Scalar::zero(),
            gap: Scalar::one(),
        });
    };
    let mut ap = seed_subset(p.len());
    let mut aq = seed_subset(q.len());
    loop {
        let mut lp = Lp::new();
        let lam = lp.vars(ap.len(), false);
        let mu = lp.vars(aq.len(), false);
        for i in 0..n {
            let mut terms: Vec<(usize, Scalar)> = Vec::new();
            for (k, &l) in ap.iter().zip(&lam) {
                if !p[*k].0[i].is_zero() {
                    terms.push((l, p[*k].0[i].clone()));
                }
            }
            for (k, &m) in aq.iter().zip(&mu) {
                if !q[*k].0[i].is_zero() {
                    terms.push((m, -&q[*k].0[i]));
                }
            }
            lp.constraint(&terms, Sense::Eq, Scalar::zero());
        }
        lp.constraint(&lam.iter().map(|&l| (l, Scalar::one())).collect::<Vec<_>>(), Sense::Eq, Scalar::one());
        lp.constraint(&mu.iter().map(|&m| (m, Scalar::one())).collect::<Vec<_>>(), Sense::Eq, Scalar::one());
        match lp.solve() {
            LpResult::Optimal { x, .. } => {
                let mut point = Vector::zero(n);
                for (k, l) in ap.iter().zip(&x) {
                    point = point.axpy(l, &p[*k]);
                }
                return Separation::Intersect(point);
            }
            LpResult::Infeasible { farkas } => {
                // rho.p + a >= 0 on P, -rho.q + b >= 0 on Q, a + b < 0.
                let rho = Vector(farkas[..n].to_vec());
                let (a, b) = (&farkas[n], &farkas[n + 1]);
                let offset = (b - a) / Scalar::int(2);
                let gap = -(a + b) / Scalar::int(2);
                let sep = Separator { normal: rho, offset, gap };
                let ip: Vec<usize> = (0..p.len()).filter(|i| !ap.contains(i)).collect();
                let iq: Vec<usize> = (0..q.len()).filter(|i| !aq.contains(i)).collect();
                let bad_p: Vec<(usize, f64)> = par::filter_map(&ip, |&i| {
                    let v = sep.eval(&p[i]) - &sep.gap;
                    v.is_negative().then(|| (i, v.to_f64()))
                });
                let bad_q: Vec<(usize, f64)> = par::filter_map(&iq, |&i| {
                    let v = -(sep.eval(&q[i]) + &sep.gap);
                    v.is_negative().then(|| (i, v.to_f64()))
                });
                if bad_p.is_empty() && bad_q.is_empty() {
                    debug_assert!(p.iter().all(|x| sep.eval(x) >= sep.gap));
                    debug_assert!(q.iter().all(|x| sep.eval(x) <= -&sep.gap));
                    return Separation::Hyperplane(sep);
                }
                pick_violators(bad_p, &mut ap);
                pick_violators(bad_q, &mut aq);
            }
            LpResult::Unbounded => unreachable!("feasibility problems have a zero objective"),
        }
    }
}

/// Polyhedral cone in halfspace form, for many membership queries against one generator
/// set. Falls back to LP queries when facet enumeration would be too large.
#[derive(Clone, Debug)]
pub struct PolyCone {
    gens: Vec<Vector>,
    equalities: Vec<Vector>,
    facets: Option<Vec<Vector>>,
    facet_floats: Vec<Vec<f64>>,
}

fn combinations(k: usize, n: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Unit normal to the given rows when they leave a one-dimensional null space.
fn float_normal(rows: &[&[f64]], n: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..m.len()).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())) else {
            break;
        };
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(row, p);
        let pivot = m[row][col];
        for k in 0..m.len() {
            if k != row {
                let f = m[k][col] / pivot;
                for c in 0..n {
                    m[k][c] -= f * m[row][c];
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() + 1 != n {
        return None;
    }
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut h = vec![0.0; n];
    h[free] = 1.0;
    for (r, &c) in pivots.iter().enumerate() {
        h[c] = -m[r][free] / m[r][c];
    }
    let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    Some(h.into_iter().map(|x| x / norm).collect())
}

/// Sign of an exact dot product, read from floats unless it is near zero.
fn sign_with_prefilter(hf: &[f64], gf: &[f64], exact: impl FnOnce() -> Scalar) -> i8 {
    let d: f64 = hf.iter().zip(gf).map(|(a, b)| a * b).sum();
    if d > 1e-9 {
        1
    } else if d < -1e-9 {
        -1
    } else {
        exact().sign()
    }
}

fn scale_to_unit_lead(v: Vector) -> Vector {
    match v.0.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let k = Scalar::one() / lead.abs();
            v.scale(&k)
        }
        None => v,
    }
}

impl PolyCone {
    pub fn new(gens: &[Vector]) -> Self {
        let mut uniq: Vec<Vector> = Vec::new();
        for g in gens {
            if g.is_zero() {
                continue;
            }
            let u = scale_to_unit_lead(g.clone());
            if !uniq.contains(&u) {
                uniq.push(u);
            }
        }
        let n = gens.first().map_or(0, Vector::dim);
        let equalities = linalg::orthogonal_complement(&uniq, n);
        let r = n - equalities.len();
        let facets = if r == 0 {
            Some(Vec::new())
        } else if combinations(r - 1, uniq.len()) <= 2_000_000 {
            let floats: Vec<Vec<f64>> = uniq.iter().map(Vector::normalized_f64_signed).collect();
            let eq_floats: Vec<Vec<f64>> = equalities.iter().map(Vector::to_f64).collect();
            let mut facets: Vec<Vector> = Vec::new();
            let mut seen: HashSet<Vector> = HashSet::new();
            let mut subset = Vec::with_capacity(r - 1);
            enumerate_subsets(uniq.len(), r - 1, 0, &mut subset, &mut |idx| {
                let mut frows: Vec<&[f64]> = idx.iter().map(|&i| floats[i].as_slice()).collect();
                frows.extend(eq_floats.iter().map(Vec::as_slice));
                if let Some(h) = float_normal(&frows, n) {
                    let dots = floats.iter().map(|g| g.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>());
                    let (mut lo, mut hi) = (0.0f64, 0.0f64);
                    for d in dots {
                        lo = lo.min(d);
                        hi = hi.max(d);
                        if lo < -1e-9 && hi > 1e-9 {
                            return;
                        }
                    }
                }
                let mut rows: Vec<Vector> = idx.iter().map(|&i| uniq[i].clone()).collect();
                if linalg::rank(&rows) != r - 1 {
                    return;
                }
                rows.extend(equalities.iter().cloned());
                let normal = linalg::orthogonal_complement(&rows, n);
                let Some(h) = normal.into_iter().next() else { return };
                let hf = h.normalized_f64_signed();
                let signs: Vec<i8> = uniq
                    .iter()
                    .zip(&floats)
                    .map(|(g, gf)| sign_with_prefilter(&hf, gf, || h.dot(g)))
                    .collect();
                let h = if signs.iter().all(|&s| s >= 0) {
                    h
                } else if signs.iter().all(|&s| s <= 0) {
                    h.neg()
                } else {
                    return;
                };
                let h = scale_to_unit_lead(h);
                if seen.insert(h.clone()) {
                    facets.push(h);
                }
            });
            Some(facets)
        } else {
            None
        };
        let facet_floats = facets
            .iter()
            .flatten()
            .map(Vector::normalized_f64_signed)
            .collect();
        PolyCone {
            gens: uniq,
            equalities,
            facets,
            facet_floats,
        }
    }

    pub fn contains(&self, v: &Vector) -> bool {
        if !self.equalities.iter().all(|e| e.dot(v).is_zero()) {
            return false;
        }
        match &self.facets {
            Some(f) => {
                let vf = v.normalized_f64_signed();
                f.iter()
                    .zip(&self.facet_floats)
                    .all(|(h, hf)| sign_with_prefilter(hf, &vf, || h.dot(v)) >= 0)
            }
            None => in_cone(v, &self.gens).is_member(),
        }
    }

    pub fn generators(&self) -> &[Vector] {
        &self.gens
    }

    pub fn facets(&self) -> Option<&[Vector]> {
        self.facets.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.gens.first().map_or(0, |g| g.dim() - self.equalities.len())
    }
}

fn enumerate_subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        enumerate_subsets(n, k, i + 1, cur, f);
        cur.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    Closure(RootSet),
    /// Two members whose interval is infinite, so the closure is infinite.
    InfiniteClosure(Vector, Vector),
}

/// Smallest closed set containing `set`, or a pair forcing infinitely many roots.
pub fn two_closure(set: &RootSet, store: &mut RootStore) -> Closure {
    let mut closed: Vec<Vector> = Vec::new();
    let mut queue: Vec<Vector> = set.iter().cloned().collect();
    let mut all: RootSet = set.clone();
    while let Some(x) = queue.pop() {
        for y in closed.clone() {
            match store.dihedral_interval(&y, &x, 0.0) {
                Interval::Infinite(_) => return Closure::InfiniteClosure(y, x),
                Interval::Finite(roots) => {
                    for r in roots {
                        if all.insert(r.clone()) {
                            queue.push(r);
                        }
                    }
                }
            }
        }
        closed.push(x);
    }
    Closure::Closure(all)
}

/// Stored roots of depth `<= depth` lying in `cone(set)` (and in `sub`).
pub fn cone_closure(set: &RootSet, store: &mut RootStore, depth: usize, sub: &Subsystem) -> RootSet {
    let gens: Vec<Vector> = set.iter().cloned().collect();
    if gens.is_empty() {
        return RootSet::new();
    }
    let cone = PolyCone::new(&gens);
    let window = store.window(depth, sub);
    let roots = store.up_to(depth);
    let hits = par::filter_map(&window, |&i| {
        let v = &roots[i].vec;
        cone.contains(v).then(|| v.clone())
    });
    hits.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Window,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `root` lies in `cone(alpha, beta)` on the wrong side.
    Interval { alpha: Vector, beta: Vector, root: Vector },
    /// `alpha`, `beta` span an infinite interval.
    InfiniteInterval { alpha: Vector, beta: Vector },
    /// `root` lies in the cone of the other side.
    ConeMember { root: Vector },
    /// Common point of the two hulls.
    HullPoint { point: Vector },
    Separator { separator: Separator },
    Peel { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub value: bool,
    pub exactness: Exactness,
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub closed: Flag,
    pub coclosed: Flag,
    pub convex: Flag,
    pub coconvex: Flag,
    pub separable: Flag,
    /// Outcome of peeling when the set is finite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peel: Option<Result<Vec<usize>, String>>,
}

impl Classification {
    pub fn biclosed(&self) -> bool {
        self.closed.value && self.coclosed.value
    }

    pub fn biconvex(&self) -> bool {
        self.convex.value && self.coconvex.value
    }
}

/// What is being classified.
#[derive(Clone, Copy, Debug)]
pub struct Target<'a> {
    pub set: &'a RootSet,
    /// The set is exactly `set` (otherwise `set` is the window part of a larger set).
    pub finite: bool,
    pub sub: &'a Subsystem,
    /// Points of the imaginary convex body, used for the separation side condition on
    /// finite sets.
    pub imaginary: &'a [Vector],
}

struct Normalized {
    exact: Vec<Vector>,
    float: Vec<Vec<f64>>,
}

impl Normalized {
    fn new(vs: &[Vector]) -> Self {
        Normalized {
            exact: vs.to_vec(),
            float: vs.iter().map(Vector::normalized_f64).collect(),
        }
    }
}

/// First `target` lying in `cone(a, b)` for a pair of `from`.
fn pair_hit(from: &Normalized, targets: &Normalized) -> Option<Witness> {
    let idx: Vec<usize> = (0..targets.exact.len()).collect();
    par::find_map_first(&idx, |&t| {
        let tf = &targets.float[t];
        for i in 0..from.exact.len() {
            for j in i + 1..from.exact.len() {
                if !on_segment(&from.float[i], &from.float[j], tf) {
                    continue;
                }
                let plane = Plane::new(&from.exact[i], &from.exact[j]);
                if plane.contains_in_cone(&targets.exact[t]) {
                    return Some(Witness::Interval {
                        alpha: from.exact[i].clone(),
                        beta: from.exact[j].clone(),
                        root: targets.exact[t].clone(),
                    });
                }
            }
        }
        None
    })
}

fn on_segment(a: &[f64], b: &[f64], x: &[f64]) -> bool {
    let mut t_num = 0.0;
    let mut dd = 0.0;
    for k in 0..a.len() {
        let d = b[k] - a[k];
        t_num += (x[k] - a[k]) * d;
        dd += d * d;
    }
    let t = if dd == 0.0 { 0.0 } else { t_num / dd };
    if !(-1e-7..=1.0 + 1e-7).contains(&t) {
        return false;
    }
    (0..a.len()).all(|k| (x[k] - a[k] - t * (b[k] - a[k])).abs() < 1e-7)
}

fn cone_hit(gens: &[Vector], targets: &[Vector]) -> Option<Witness> {
    if gens.is_empty() {
        return None;
    }
    let cone = PolyCone::new(gens);
    par::find_map_first(targets, |t| {
        cone.contains(t).then(|| Witness::ConeMember { root: t.clone() })
    })
}

fn flag(value: bool, exact: bool, depth: usize, witness: Option<Witness>) -> Flag {
    Flag {
        value,
        exactness: if exact { Exactness::Exact } else { Exactness::Window },
        depth,
        witness,
    }
}

/// Classify `target.set` against the window of roots of depth `<= depth` in `target.sub`.
///
/// A violation found inside the window is exact. A property that holds on the window is
/// exact only for finite sets that peel successfully.
pub fn classify(store: &mut RootStore, target: Target<'_>, depth: usize) -> Classification {
    let sys = store.system().clone();
    let set = target.set;
    let window: Vec<Vector> = store
        .window(depth, target.sub)
        .into_iter()
        .map(|i| store.root(i).vec.clone())
        .collect();
    let inside: Vec<Vector> = set.iter().cloned().collect();
    let outside: Vec<Vector> = window.iter().filter(|v| !set.contains(*v)).cloned().collect();
    let a_norm = Normalized::new(&inside);
    let c_norm = Normalized::new(&outside);

    let peel = target
        .finite
        .then(|| weakorder::peel_in(&sys, target.sub, set).map_err(|e: PeelError| e.to_string()));
    let peeled = matches!(peel, Some(Ok(_)));

    // Closed.
    let closed = if target.finite {
        let mut witness = None;
        'pairs: for (i, a) in inside.iter().enumerate() {
            for b in &inside[i + 1..] {
                match store.dihedral_interval(a, b, 0.0) {
                    Interval::Infinite(_) => {
                        witness = Some(Witness::InfiniteInterval { alpha: a.clone(), beta: b.clone() });
                        break 'pairs;
                    }
                    Interval::Finite(roots) => {
                        if let Some(r) = roots
                            .iter()
                            .find(|r| !set.contains(*r) && target.sub.contains(&sys, r))
                        {
                            witness = Some(Witness::Interval {
                                alpha: a.clone(),
                                beta: b.clone(),
                                root: r.clone(),
                            });
                            break 'pairs;
                        }
                    }
                }
            }
        }
        flag(witness.is_none(), true, depth, witness)
    } else {
        let w = pair_hit(&a_norm, &c_norm);
        let found = w.is_some();
        flag(!found, found, depth, w)
    };

    // Coclosed.
    let coclosed = {
        let w = pair_hit(&c_norm, &a_norm);
        match (w, &peel) {
            (Some(w), _) => flag(false, true, depth, Some(w)),
            (None, Some(Ok(_))) => flag(true, true, depth, None),
            (None, Some(Err(reason))) if closed.value && closed.exactness == Exactness::Exact => flag(
                false,
                true,
                depth,
                Some(Witness::Peel { reason: reason.clone() }),
            ),
            (None, _) => flag(true, false, depth, None),
        }
    };

    // Convex and coconvex. A convex set is closed, so a refuted closure refutes convexity.
    let implied = |f: &Flag| (!f.value && f.exactness == Exactness::Exact).then(|| f.clone());
    let convex = match cone_hit(&inside, &outside) {
        Some(w) => flag(false, true, depth, Some(w)),
        None => implied(&closed).unwrap_or_else(|| flag(true, peeled, depth, None)),
    };
    let coconvex = match cone_hit(&outside, &inside) {
        Some(w) => flag(false, true, depth, Some(w)),
        None => implied(&coclosed).unwrap_or_else(|| flag(true, peeled, depth, None)),
    };

    // Separable.
    let p: Vec<Vector> = inside.iter().filter_map(Vector::normalized).collect();
    let mut q: Vec<Vector> = outside.iter().filter_map(Vector::normalized).collect();
    let complement_only = q.len();
    if target.finite {
        q.extend(target.imaginary.iter().cloned());
    }
    let separable = match strictly_separate(&p, &q) {
        Separation::Intersect(point) => {
            // A common point with the window complement alone refutes separability; with
            // imaginary points it refutes it for finite sets.
            let exact = target.finite || complement_only == q.len();
            flag(false, exact, depth, Some(Witness::HullPoint { point }))
        }
        Separation::Hyperplane(separator) => {
            // Separable sets are biconvex.
            match implied(&convex).or_else(|| implied(&coconvex)) {
                Some(refuted) => refuted,
                None => flag(true, peeled, depth, Some(Witness::Separator { separator })),
            }
        }
    };

    Classification {
        closed,
        coclosed,
        convex,
        coconvex,
        separable,
        peel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vector {
        Vector::from_ints(xs)
    }

    #[test]
    fn cone_certificates() {
        let gens = [v(&[1, 0]), v(&[0, 1])];
        assert_eq!(
            in_cone(&v(&[1, 1]), &gens),
            Membership::Member(vec![Scalar::one(), Scalar::one()])
        );
        let Membership::Outside { normal, .. } = in_cone(&v(&[0, 1]), &[v(&[1, 0])]) else {
            panic!()
        };
        assert!(normal.dot(&v(&[0, 1])).is_negative());
        assert!(!normal.dot(&v(&[1, 0])).is_negative());
    }

    #[test]
    fn universal_witness_is_in_the_parabolic_cone() {
        let sys = catalog::universal3();
        let (r, t) = (sys.simple_root(0), sys.simple_root(2));
        let st = sys.reflect_simple(1, &t);
        let tsr = sys.apply_word(&[2, 1], &r);
        let Membership::Member(c) = in_cone(&tsr, &[r.clone(), t.clone(), st.clone()]) else {
            panic!()
        };
        let rebuilt = r.scale(&c[0]).add(&t.scale(&c[1])).add(&st.scale(&c[2]));
        assert_eq!(rebuilt, tsr);
        assert_eq!(r.add(&t.scale(&Scalar::int(5))).add(&st), tsr);
    }

    #[test]
    fn delta_against_the_two_triangles() {
        let sys = catalog::affine_c2();
        let (a, b, g) = (sys.simple_root(0), sys.simple_root(1), sys.simple_root(2));
        let delta = {
            // Radical of the affine C2 form.
            let mut k = linalg::orthogonal_complement(
                &(0..3).map(|s| Vector(sys.gram_row(s).to_vec())).collect::<Vec<_>>(),
                3,
            );
            k.pop().unwrap()
        };
        let delta = if delta.height().is_negative() { delta.neg() } else { delta };
        let dh = delta.normalized().unwrap();
        let hat = |x: &Vector| x.normalized().unwrap();
        let sb_g = sys.reflect_simple(1, &g);
        let sg_b = sys.reflect_simple(2, &b);
        assert!(in_hull(&dh, &[hat(&b), hat(&a), hat(&sb_g)]).is_member());
        assert!(!in_hull(&dh, &[hat(&a), hat(&g), hat(&sg_b)]).is_member());
        assert!(in_hull(&hat(&a), &[hat(&a)]).is_member());
        match strictly_separate(&[hat(&a), hat(&g), hat(&sg_b)], std::slice::from_ref(&dh)) {
            Separation::Hyperplane(h) => {
                assert!(h.eval(&dh) <= -&h.gap);
                assert!(h.gap.is_positive());
            }
            Separation::Intersect(_) => panic!(),
        }
        assert!(matches!(
            strictly_separate(std::slice::from_ref(&dh), std::slice::from_ref(&dh)),
            Separation::Intersect(_)
        ));
    }

    #[test]
    fn poly_cone_matches_lp() {
        let gens = vec![v(&[1, 0, 0]), v(&[1, 1, 0]), v(&[0, 1, 1]), v(&[1, 2, 1])];
        let pc = PolyCone::new(&gens);
        for x in [v(&[2, 1, 0]), v(&[0, 0, 1]), v(&[3, 3, 1]), v(&[1, 3, 2]), v(&[0, 1, 0])] {
            assert_eq!(pc.contains(&x), in_cone(&x, &gens).is_member(), "{x:?}");
        }
    }

    #[test]
    fn closures() {
        let mut a2 = RootStore::new(catalog::a2());
        let set: RootSet = [v(&[1, 0]), v(&[0, 1])].into_iter().collect();
        assert_eq!(
            two_closure(&set, &mut a2),
            Closure::Closure([v(&[1, 0]), v(&[0, 1]), v(&[1, 1])].into_iter().collect())
        );
        let single: RootSet = [v(&[1, 0])].into_iter().collect();
        assert_eq!(two_closure(&single, &mut a2), Closure::Closure(single.clone()));
        let mut dih = RootStore::new(catalog::dihedral_inf());
        assert!(matches!(two_closure(&set, &mut dih), Closure::InfiniteClosure(..)));
        let full = Subsystem::full(dih.system());
        assert_eq!(cone_closure(&set, &mut dih, 5, &full).len(), dih.up_to(5).len());
    }

    #[test]
    fn a2_remark_set_is_closed_but_not_coclosed() {
        let mut st = RootStore::with_depth(catalog::a2(), 2);
        let sub = Subsystem::full(st.system());
        let set: RootSet = [v(&[1, 1])].into_iter().collect();
        let c = classify(&mut st, Target { set: &set, finite: true, sub: &sub, imaginary: &[] }, 2);
        assert!(c.closed.value && c.closed.exactness == Exactness::Exact);
        assert!(!c.coclosed.value && c.coclosed.exactness == Exactness::Exact);
        assert!(!c.separable.value);
    }

    proptest! {
        #[test]
        fn separation_is_dual_to_hull_intersection(
            p in prop::collection::vec(prop::collection::vec(0i64..6, 3), 1..5),
            q in prop::collection::vec(prop::collection::vec(0i64..6, 3), 1..5),
        ) {
            let norm = |xs: &Vec<Vec<i64>>| -> Vec<Vector> {
                xs.iter().map(|x| Vector::from_ints(x)).filter_map(|x| x.normalized()).collect()
            };
            let (p, q) = (norm(&p), norm(&q));
            prop_assume!(!p.is_empty() && !q.is_empty());
            match strictly_separate(&p, &q) {
                Separation::Hyperplane(h) => {
                    prop_assert!(p.iter().all(|x| h.eval(x) >= h.gap));
                    prop_assert!(q.iter().all(|x| h.eval(x) <= -&h.gap));
                    for x in &q {
                        prop_assert!(!in_hull(x, &p).is_member());
                    }
                }
                Separation::Intersect(pt) => {
                    prop_assert!(in_hull(&pt, &p).is_member());
                    prop_assert!(in_hull(&pt, &q).is_member());
                }
            }
        }

        #[test]
        fn cone_certificates_are_valid(
            gens in prop::collection::vec(prop::collection::vec(-3i64..4, 3), 1..7),
            t in prop::collection::vec(-3i64..4, 3),
        ) {
            let gens: Vec<Vector> = gens.iter().map(|g| Vector::from_ints(g)).collect();
            let t = Vector::from_ints(&t);
            match in_cone(&t, &gens) {
                Membership::Member(c) => {
                    prop_assert!(c.iter().all(|x| !x.is_negative()));
                    let mut acc = Vector::zero(3);
                    for (g, k) in gens.iter().zip(&c) {
                        acc = acc.axpy(k, g);
                    }
                    prop_assert_eq!(acc, t.clone());
                }
                Membership::Outside { normal, .. } => {
                    prop_assert!(normal.dot(&t).is_negative());
                    prop_assert!(gens.iter().all(|g| !normal.dot(g).is_negative()));
                }
            }
            prop_assert_eq!(PolyCone::new(&gens).contains(&t), in_cone(&t, &gens).is_member());
        }
    }
}

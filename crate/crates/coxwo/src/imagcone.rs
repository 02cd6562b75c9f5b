//! The fundamental domain `K` of the imaginary cone, the projective action of the group
//! on it, orbit samples, and float probes of limit roots.

use std::collections::HashSet;

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::coxsys::CoxeterSystem;
use crate::infwords::InfWord;
use crate::linalg::{self, Vector};
use crate::lp::{Lp, LpResult, Sense};
use crate::par;
use crate::rootstore::RootStore;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImagError {
    #[error("{0} has nonpositive coordinate sum after acting; it is outside the imaginary cone")]
    LeavesCone(Vector),
    #[error("the imaginary cone is empty")]
    Empty,
}

/// `K = { u in conv(simple roots) : B(u, alpha_s) <= 0 for all s }` and a chosen point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImaginaryDomain {
    /// Point maximizing the uniform slack; `None` when `K` is empty.
    pub point: Option<Vector>,
    /// The slack `min(-B(z, alpha_s), z_s)` attained at `point`.
    pub slack: Scalar,
    /// `B(z, alpha_s) < 0` for every `s` and `z` lies in the open simplex.
    pub strict: bool,
    /// `K` is a single point.
    pub singleton: bool,
}

fn k_program(sys: &CoxeterSystem, slack: Option<&Scalar>) -> (Lp, Vec<usize>, usize) {
    let n = sys.rank();
    let mut lp = Lp::new();
    let u = lp.vars(n, false);
    let eps = lp.var(false);
    lp.constraint(&u.iter().map(|&j| (j, Scalar::one())).collect::<Vec<_>>(), Sense::Eq, Scalar::one());
    for s in 0..n {
        let mut terms: Vec<(usize, Scalar)> = (0..n)
            .filter(|&j| !sys.gram(s, j).is_zero())
            .map(|j| (u[j], sys.gram(s, j).clone()))
            .collect();
        terms.push((eps, Scalar::one()));
        lp.constraint(&terms, Sense::Le, Scalar::zero());
        lp.constraint(&[(u[s], Scalar::one()), (eps, Scalar::int(-1))], Sense::Ge, Scalar::zero());
    }
    if let Some(e) = slack {
        lp.constraint(&[(eps, Scalar::one())], Sense::Eq, e.clone());
    }
    (lp, u, eps)
}

/// Find a point of `K` maximizing the slack by an exact LP.
pub fn build_k(sys: &CoxeterSystem) -> ImaginaryDomain {
    let (mut lp, u, eps) = k_program(sys, None);
    lp.maximize(&[(eps, Scalar::one())]);
    let LpResult::Optimal { x, value } = lp.solve() else {
        return ImaginaryDomain {
            point: None,
            slack: Scalar::zero(),
            strict: false,
            singleton: false,
        };
    };
    let z = Vector(u.iter().map(|&j| x[j].clone()).collect());
    let strict = value.is_positive();
    let singleton = !strict && {
        let (mut pin, pu, _) = k_program(sys, Some(&Scalar::zero()));
        (0..sys.rank()).all(|j| {
            let mut lo = f_opt(&mut pin, pu[j], false);
            let hi = f_opt(&mut pin, pu[j], true);
            lo.take().zip(hi).is_some_and(|(a, b)| a == b)
        })
    };
    ImaginaryDomain {
        point: Some(z),
        slack: value,
        strict,
        singleton,
    }
}

fn f_opt(lp: &mut Lp, var: usize, max: bool) -> Option<Scalar> {
    let k = if max { Scalar::one() } else { Scalar::int(-1) };
    lp.maximize(&[(var, k.clone())]);
    match lp.solve() {
        LpResult::Optimal { value, .. } => Some(value * k),
        _ => None,
    }
}

/// Vertices of `K`, by intersecting `rank - 1` of its bounding hyperplanes with the slice.
pub fn k_vertices(sys: &CoxeterSystem) -> Vec<Vector> {
    let n = sys.rank();
    let mut planes: Vec<Vector> = (0..n).map(|s| Vector(sys.gram_row(s).to_vec())).collect();
    planes.extend((0..n).map(|j| Vector::basis(n, j)));
    let inside = |u: &Vector| {
        u.0.iter().all(|x| !x.is_negative()) && (0..n).all(|s| !sys.pair_simple(s, u).is_positive())
    };
    let ones = Vector(vec![Scalar::one(); n]);
    let mut out: Vec<Vector> = Vec::new();
    let mut pick = Vec::new();
    choose(planes.len(), n - 1, 0, &mut pick, &mut |idx| {
        let mut rows: Vec<Vector> = idx.iter().map(|&i| planes[i].clone()).collect();
        rows.push(ones.clone());
        // Solve rows * u = (0, ..., 0, 1).
        let transposed: Vec<Vector> = (0..n)
            .map(|j| Vector(rows.iter().map(|r| r.0[j].clone()).collect()))
            .collect();
        if linalg::rank(&rows) < n {
            return;
        }
        let mut rhs = Vector::zero(n);
        rhs.0[n - 1] = Scalar::one();
        if let Some(u) = linalg::solve_in_span(&transposed, &rhs) {
            let u = Vector(u);
            if inside(&u) && !out.contains(&u) {
                out.push(u);
            }
        }
    });
    out.sort();
    out
}

fn choose(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        choose(n, k, i + 1, cur, f);
        cur.pop();
    }
}

/// `w . x`: apply `w` and rescale to coordinate sum 1.
pub fn act(sys: &CoxeterSystem, word: &[usize], x: &Vector) -> Result<Vector, ImagError> {
    let y = sys.apply_word(word, x);
    y.normalized().ok_or(ImagError::LeavesCone(y))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitPoint {
    pub word: Vec<usize>,
    pub point: Vector,
}

/// Breadth-first orbit of a point under left multiplication, deduplicated exactly.
#[derive(Clone, Debug)]
pub struct OrbitSampler {
    sys: CoxeterSystem,
    seen: HashSet<Vector>,
    frontier: Vec<OrbitPoint>,
    level: usize,
}

impl OrbitSampler {
    pub fn new(sys: &CoxeterSystem, z: Vector) -> Self {
        let start = OrbitPoint {
            word: Vec::new(),
            point: z.clone(),
        };
        OrbitSampler {
            sys: sys.clone(),
            seen: [z].into_iter().collect(),
            frontier: vec![start],
            level: 0,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Points first reached at the current level.
    pub fn frontier(&self) -> &[OrbitPoint] {
        &self.frontier
    }

    pub fn advance(&mut self) -> &[OrbitPoint] {
        let sys = &self.sys;
        let images: Vec<Vec<OrbitPoint>> = par::map(&self.frontier, |p| {
            (0..sys.rank())
                .filter_map(|s| {
                    let mut word = vec![s];
                    word.extend_from_slice(&p.word);
                    let y = sys.reflect_simple(s, &p.point).normalized()?;
                    Some(OrbitPoint { word, point: y })
                })
                .collect()
        });
        let mut next = Vec::new();
        for q in images.into_iter().flatten() {
            if self.seen.insert(q.point.clone()) {
                next.push(q);
            }
        }
        self.frontier = next;
        self.level += 1;
        &self.frontier
    }
}

/// All `w . z` with `l(w) <= depth`.
pub fn orbit_sample(sys: &CoxeterSystem, domain: &ImaginaryDomain, depth: usize) -> Result<Vec<OrbitPoint>, ImagError> {
    let z = domain.point.clone().ok_or(ImagError::Empty)?;
    let mut sampler = OrbitSampler::new(sys, z);
    let mut out = sampler.frontier().to_vec();
    for _ in 0..depth {
        let level = sampler.advance();
        if level.is_empty() {
            break;
        }
        out.extend_from_slice(level);
    }
    Ok(out)
}

/// Float Gram matrix.
pub fn gram_f64(sys: &CoxeterSystem) -> Vec<Vec<f64>> {
    (0..sys.rank())
        .map(|s| sys.gram_row(s).iter().map(Scalar::to_f64).collect())
        .collect()
}

pub fn form_f64(g: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in 0..y.len() {
            acc += x[i] * g[i][j] * y[j];
        }
    }
    acc
}

fn normalize_f64(v: &mut [f64]) {
    let h: f64 = v.iter().sum();
    if h != 0.0 {
        v.iter_mut().for_each(|x| *x /= h);
    }
}

/// Float reflection in a simple root.
pub fn reflect_simple_f64(g: &[Vec<f64>], s: usize, v: &mut [f64]) {
    let b: f64 = g[s].iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    v[s] -= 2.0 * b;
}

/// Point of the line through `p` and `q` where `B(x, x)` vanishes (the one nearer `q`),
/// or where it is smallest when the line misses the isotropic cone. Also returns
/// `|B(x, x)|` of the normalized estimate.
pub fn isotropic_extrapolate(g: &[Vec<f64>], p: &[f64], q: &[f64]) -> (Vec<f64>, f64) {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let a = form_f64(g, &d, &d);
    let b = 2.0 * form_f64(g, q, &d);
    let c = form_f64(g, q, q);
    // x(t) = q + t d
    let t = if a.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            0.0
        } else {
            -c / b
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        // A tangent line has a double root; rounding makes the discriminant noisy.
        if disc < 1e-12 * b * b {
            -b / (2.0 * a)
        } else {
            let r = disc.sqrt();
            let t1 = (-b + r) / (2.0 * a);
            let t2 = (-b - r) / (2.0 * a);
            if t1.abs() <= t2.abs() {
                t1
            } else {
                t2
            }
        }
    };
    let mut x: Vec<f64> = q.iter().zip(&d).map(|(qi, di)| qi + t * di).collect();
    normalize_f64(&mut x);
    let res = form_f64(g, &x, &x).abs();
    (x, res)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Single-linkage clusters of float points at threshold `tol`.
pub fn clusters(points: &[Vec<f64>], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist(&points[i], &points[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCluster {
    /// Float estimate of the limit root.
    pub estimate: Vec<f64>,
    /// `|B(x, x)|` at the estimate.
    pub residual: f64,
    pub size: usize,
    pub diameter: f64,
    /// Mean of the cluster members (no extrapolation).
    pub centroid: Vec<f64>,
}

/// Normalized roots of depth in `[depth - band, depth]`, clustered at `tol`, each cluster
/// with an isotropic extrapolation through its two deepest members.
pub fn limit_root_sample(store: &mut RootStore, depth: usize, band: usize, tol: f64) -> Vec<LimitCluster> {
    store.generate(depth);
    let g = gram_f64(store.system());
    let lo = depth.saturating_sub(band);
    let members: Vec<(usize, Vec<f64>)> = store
        .up_to(depth)
        .iter()
        .filter(|r| r.depth >= lo)
        .map(|r| (r.depth, r.vec.normalized_f64()))
        .collect();
    let pts: Vec<Vec<f64>> = members.iter().map(|m| m.1.clone()).collect();
    clusters(&pts, tol)
        .into_iter()
        .map(|idx| {
            let mut by_depth = idx.clone();
            by_depth.sort_by(|&a, &b| members[b].0.cmp(&members[a].0).then(a.cmp(&b)));
            let dim = pts[0].len();
            let mut centroid = vec![0.0; dim];
            for &i in &idx {
                for k in 0..dim {
                    centroid[k] += pts[i][k] / idx.len() as f64;
                }
            }
            let (estimate, residual) = if by_depth.len() >= 2 {
                isotropic_extrapolate(&g, &pts[by_depth[1]], &pts[by_depth[0]])
            } else {
                let p = pts[by_depth[0]].clone();
                let r = form_f64(&g, &p, &p).abs();
                (p, r)
            };
            let mut diameter: f64 = 0.0;
            for &i in &idx {
                for &j in &idx {
                    diameter = diameter.max(dist(&pts[i], &pts[j]));
                }
            }
            LimitCluster {
                estimate,
                residual,
                size: idx.len(),
                diameter,
                centroid,
            }
        })
        .collect()
}

/// Exact isotropic vector `alpha + t beta` (with `t` the smaller root of
/// `1 + 2 t B(alpha, beta) + t^2 = 0`) when `B(alpha, beta) <= -1` and the entry is rational.
pub fn dihedral_isotropic_point(sys: &CoxeterSystem, s: usize, t: usize) -> Option<Vector> {
    let c = sys.gram(s, t);
    if !c.is_rational() || c > &Scalar::int(-1) {
        return None;
    }
    let cr: BigRational = c.rational_part().clone();
    let disc = &cr * &cr - BigRational::from_integer(1.into());
    let root = Scalar::sqrt_of_rational(&disc)?;
    let tt = -c.clone() - root;
    let mut v = Vector::zero(sys.rank());
    v.0[s] = Scalar::one();
    v.0[t] = tt.clone();
    let h = Scalar::one() + tt;
    Some(v.scale(&(Scalar::one() / h)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub n: usize,
    pub connected: bool,
    /// `w_n . z`.
    pub orbit_point: Vec<f64>,
    /// Normalized `beta_n`.
    pub root_point: Vec<f64>,
    pub distance: f64,
    /// Distance between the orbit points at `n` and `n / 2`.
    pub orbit_drift: f64,
    /// Distance between the normalized roots at `n` and `n / 2`.
    pub root_drift: f64,
    /// `|B(x, x)|` at the orbit point.
    pub orbit_isotropy: f64,
    /// Exact isotropic limit direction when the period alternates two generators of
    /// infinite order.
    pub exact_limit: Option<ExactLimit>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactLimit {
    pub literal: Vec<String>,
    /// `B(x, x) == 0` holds exactly.
    pub isotropic: bool,
    pub orbit_distance: f64,
    pub root_distance: f64,
}

fn orbit_and_root_f64(sys: &CoxeterSystem, g: &[Vec<f64>], z: &[f64], word: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = word.len();
    let mut x = z.to_vec();
    for &s in word.iter().rev() {
        reflect_simple_f64(g, s, &mut x);
        normalize_f64(&mut x);
    }
    let mut b = vec![0.0; sys.rank()];
    b[word[n - 1]] = 1.0;
    for &s in word[..n - 1].iter().rev() {
        reflect_simple_f64(g, s, &mut b);
        normalize_f64(&mut b);
    }
    (x, b)
}

/// Float evidence for convergence of `w_n . z` and of the normalized inversion roots to a
/// common limit root. Never a proof.
pub fn probe_orbit_vs_roots(sys: &CoxeterSystem, word: &InfWord, domain: &ImaginaryDomain, n: usize) -> Result<ProbeReport, ImagError> {
    let z = domain.point.as_ref().ok_or(ImagError::Empty)?;
    let g = gram_f64(sys);
    let zf = z.to_f64();
    let connected = word.is_connected(sys);
    let letters = word.letters(n.max(2));
    let half = letters[..(n / 2).max(1)].to_vec();
    let (x, b) = orbit_and_root_f64(sys, &g, &zf, &letters);
    let (xh, bh) = orbit_and_root_f64(sys, &g, &zf, &half);
    let mut period: Vec<usize> = word.period.clone();
    period.sort_unstable();
    period.dedup();
    let exact_limit = if period.len() == 2 && word.prefix.is_empty() {
        dihedral_isotropic_point(sys, word.period[0], word.period[1]).map(|p| {
            let pf = p.to_f64();
            ExactLimit {
                isotropic: sys.bilinear(&p, &p).is_zero(),
                orbit_distance: dist(&pf, &x),
                root_distance: dist(&pf, &b),
                literal: p.literal(),
            }
        })
    } else {
        None
    };
    let note = if connected {
        "connected word: both sequences are expected to share one limit".into()
    } else {
        "disconnected word: the inversion set may have several accumulation points, so no single limit is claimed".into()
    };
    Ok(ProbeReport {
        n,
        connected,
        orbit_isotropy: form_f64(&g, &x, &x).abs(),
        distance: dist(&x, &b),
        orbit_drift: dist(&x, &xh),
        root_drift: dist(&b, &bh),
        orbit_point: x,
        root_point: b,
        exact_limit,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use proptest::prelude::*;

    #[test]
    fn affine_domain_is_the_imaginary_root() {
        let sys = catalog::affine_a2();
        let k = build_k(&sys);
        let third = Scalar::rational(1, 3);
        assert_eq!(k.point, Some(Vector(vec![third.clone(), third.clone(), third])));
        assert!(!k.strict && k.singleton);
        let z = k.point.clone().unwrap();
        assert_eq!(act(&sys, &[0, 1, 2, 0], &z).unwrap(), z);
        assert_eq!(orbit_sample(&sys, &k, 5).unwrap().len(), 1);
        assert_eq!(k_vertices(&sys), vec![z]);
    }

    #[test]
    fn lorentzian_centroid_is_strictly_inside() {
        let sys = catalog::lorentz_six_fifths();
        let k = build_k(&sys);
        let z = k.point.clone().unwrap();
        assert_eq!(z, Vector(vec![Scalar::rational(1, 3); 3]));
        assert!(k.strict && !k.singleton);
        for s in 0..3 {
            assert_eq!(sys.pair_simple(s, &z), Scalar::rational(-7, 15));
        }
        let a = act(&sys, &[0], &z).unwrap();
        let ab = act(&sys, &[0, 1], &z).unwrap();
        assert!(a != z && ab != z && ab != a);
        let orbit = orbit_sample(&sys, &k, 4).unwrap();
        assert_eq!(orbit.len(), 1 + 3 + 6 + 12 + 24);
        for p in &orbit {
            assert!(!sys.bilinear(&p.point, &p.point).is_positive());
            assert!(p.point.is_positive());
        }
    }

    #[test]
    fn finite_group_has_no_imaginary_cone() {
        let k = build_k(&catalog::a2());
        assert!(k.point.is_none());
        assert!(orbit_sample(&catalog::a2(), &k, 2).is_err());
    }

    #[test]
    fn dihedral_limit_roots() {
        let mut st = RootStore::new(catalog::dihedral_inf());
        let cl = limit_root_sample(&mut st, 30, 2, 0.1);
        assert_eq!(cl.len(), 1);
        assert!((cl[0].estimate[0] - 0.5).abs() < 1e-9);
        assert!(cl[0].residual < 1e-9);
    }

    #[test]
    fn exact_isotropic_direction() {
        let sys = catalog::lorentz_six_fifths();
        let p = dihedral_isotropic_point(&sys, 0, 1).unwrap();
        assert!(sys.bilinear(&p, &p).is_zero());
        let t = 1.2 - 11f64.sqrt() / 5.0;
        assert!((p.to_f64()[1] - t / (1.0 + t)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn action_is_a_left_action(
            u in prop::collection::vec(0usize..3, 0..5),
            v in prop::collection::vec(0usize..3, 0..5),
        ) {
            let sys = catalog::lorentz_six_fifths();
            let z = build_k(&sys).point.unwrap();
            let mut uv = u.clone();
            uv.extend_from_slice(&v);
            let lhs = act(&sys, &uv, &z).unwrap();
            let rhs = act(&sys, &u, &act(&sys, &v, &z).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}

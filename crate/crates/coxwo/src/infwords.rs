//! Eventually periodic infinite reduced words, their inversion streams, prefix tests,
//! comparison in the limit weak order, and accumulation estimates.

use serde::Serialize;
use thiserror::Error;

use crate::convexity;
use crate::coxsys::{CoxeterSystem, Element, SystemError};
use crate::imagcone::{self, gram_f64};
use crate::linalg::{self, Vector};
use crate::rootstore::RootSet;
use crate::weakorder::{self, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InfWordError {
    #[error("malformed infinite word {0:?}; expected \"prefix|(period)\"")]
    Malformed(String),
    #[error("the period is empty")]
    EmptyPeriod,
    #[error("{0}")]
    System(String),
    #[error("truncation is not reduced at letter {0}")]
    NotReduced(usize),
}

impl From<SystemError> for InfWordError {
    fn from(e: SystemError) -> Self {
        InfWordError::System(e.to_string())
    }
}

/// `prefix · period^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InfWord {
    pub prefix: Vec<usize>,
    pub period: Vec<usize>,
}

impl InfWord {
    /// Build and check reducedness of the first `max(2 |period| |S|, horizon)` letters.
    pub fn new(sys: &CoxeterSystem, prefix: Vec<usize>, period: Vec<usize>, horizon: usize) -> Result<Self, InfWordError> {
        if period.is_empty() {
            return Err(InfWordError::EmptyPeriod);
        }
        let w = InfWord { prefix, period };
        w.verify(sys, horizon)?;
        Ok(w)
    }

    /// Parse `"b|(a.b.c)"`; the prefix may be empty.
    pub fn parse(sys: &CoxeterSystem, text: &str, horizon: usize) -> Result<Self, InfWordError> {
        let bad = || InfWordError::Malformed(text.to_string());
        let (pre, rest) = text.split_once('|').ok_or_else(bad)?;
        let body = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let prefix = if pre.is_empty() { Vec::new() } else { sys.parse_word(pre)? };
        let period = sys.parse_word(body)?;
        Self::new(sys, prefix, period, horizon)
    }

    pub fn format(&self, sys: &CoxeterSystem) -> String {
        let pre = if self.prefix.is_empty() {
            String::new()
        } else {
            sys.format_word(&self.prefix)
        };
        format!("{pre}|({})", sys.format_word(&self.period))
    }

    /// Number of letters checked for reducedness.
    pub fn certificate_horizon(&self, sys: &CoxeterSystem, horizon: usize) -> usize {
        (2 * self.period.len() * sys.rank()).max(horizon).max(self.prefix.len() + self.period.len())
    }

    fn verify(&self, sys: &CoxeterSystem, horizon: usize) -> Result<usize, InfWordError> {
        let h = self.certificate_horizon(sys, horizon);
        match weakorder::inversion_sequence(sys, &self.letters(h)) {
            Ok(_) => Ok(h),
            Err(WordError::NotReduced { position }) => Err(InfWordError::NotReduced(position)),
            Err(_) => unreachable!("inversion_sequence only reports reducedness"),
        }
    }

    /// The first `n` letters.
    pub fn letters(&self, n: usize) -> Vec<usize> {
        self.prefix
            .iter()
            .chain(self.period.iter().cycle())
            .take(n)
            .copied()
            .collect()
    }

    /// Letters appearing infinitely often induce a connected subgraph.
    pub fn is_connected(&self, sys: &CoxeterSystem) -> bool {
        let mut letters = self.period.clone();
        letters.sort_unstable();
        letters.dedup();
        sys.induces_connected(&letters)
    }

    /// `beta_1, ..., beta_n`.
    pub fn truncate_inversions(&self, sys: &CoxeterSystem, n: usize) -> Result<Vec<Vector>, InfWordError> {
        weakorder::inversion_sequence(sys, &self.letters(n)).map_err(|e| match e {
            WordError::NotReduced { position } => InfWordError::NotReduced(position),
            _ => unreachable!("inversion_sequence only reports reducedness"),
        })
    }

    pub fn truncate_set(&self, sys: &CoxeterSystem, n: usize) -> Result<RootSet, InfWordError> {
        Ok(self.truncate_inversions(sys, n)?.into_iter().collect())
    }

    /// Is the positive root `r` in `N(self)`? Iterates `y -> P^{-1} y` from
    /// `y = x^{-1} r` (prefix `x`, period `P`): `r` is an inversion exactly when some
    /// iterate turns negative. A repeated iterate, or an iterate lying in a cone that the
    /// inverse period maps into itself inside the positive orthant, proves it never does.
    pub fn contains_root(&self, sys: &CoxeterSystem, r: &Vector, steps: usize) -> Membership {
        let xinv = Element::from_word(sys, &weakorder::inverse(&self.prefix));
        let pinv = Element::from_word(sys, &weakorder::inverse(&self.period));
        if !r.is_positive() {
            return Membership::No;
        }
        let y0 = xinv.apply(r);
        if y0.is_negative() {
            return Membership::Yes;
        }
        let fixed = positive_fixed_vectors(sys, &pinv);
        let mut ys = vec![y0];
        for _ in 0..steps {
            let next = pinv.apply(ys.last().expect("nonempty"));
            if next.is_negative() {
                return Membership::Yes;
            }
            if ys.contains(&next) {
                return Membership::No;
            }
            ys.push(next);
            if invariant_cone(&ys, &fixed) {
                return Membership::No;
            }
        }
        Membership::Unknown
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

/// Positive vectors fixed by `g`, when its fixed space is spanned by such vectors.
fn positive_fixed_vectors(sys: &CoxeterSystem, g: &Element) -> Vec<Vector> {
    let n = sys.rank();
    let rows: Vec<Vector> = (0..n)
        .map(|i| {
            Vector(
                (0..n)
                    .map(|j| {
                        let e = g.matrix.get(i, j).clone();
                        if i == j {
                            e - crate::scalar::Scalar::one()
                        } else {
                            e
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    linalg::orthogonal_complement(&rows, n)
        .into_iter()
        .filter_map(|f| {
            if f.is_positive() {
                Some(f)
            } else if f.is_negative() {
                Some(f.neg())
            } else {
                None
            }
        })
        .collect()
}

/// The last iterate lies in the cone of up to four previous ones together with fixed
/// vectors; that cone is then mapped into itself and stays positive.
fn invariant_cone(ys: &[Vector], fixed: &[Vector]) -> bool {
    let k = ys.len();
    if k < 2 {
        return false;
    }
    let lo = k.saturating_sub(5);
    let mut gens: Vec<Vector> = ys[lo..k - 1].to_vec();
    gens.extend_from_slice(fixed);
    convexity::in_cone(&ys[k - 1], &gens).is_member()
}

/// Prefix test with its exactness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Answer {
    pub value: bool,
    pub exact: bool,
}

/// Is the reduced word `u` a prefix of `w`, i.e. `N(u)` inside `N(w)`?
pub fn word_prefix_of(sys: &CoxeterSystem, u: &[usize], w: &InfWord, horizon: usize) -> Result<Answer, WordError> {
    let mut unknown = false;
    for r in weakorder::inversion_sequence(sys, u)? {
        match w.contains_root(sys, &r, horizon) {
            Membership::Yes => {}
            Membership::No => return Ok(Answer { value: false, exact: true }),
            Membership::Unknown => unknown = true,
        }
    }
    Ok(Answer {
        value: !unknown,
        exact: !unknown,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Less,
    Greater,
    Equivalent,
    Incomparable,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub order: Order,
    /// Containments are checked on the first `horizon` inversions only; non-containment is
    /// always exact, witnessed below.
    pub horizon: usize,
    pub exact: bool,
    /// A root of the left word that the right word never inverts.
    pub left_only: Option<Vector>,
    pub right_only: Option<Vector>,
}

enum Containment {
    Holds,
    Fails(Vector),
    Unknown,
}

fn contained(sys: &CoxeterSystem, a: &InfWord, b: &InfWord, horizon: usize) -> Result<Containment, InfWordError> {
    let mut unknown = false;
    for r in a.truncate_inversions(sys, horizon)? {
        match b.contains_root(sys, &r, 2 * horizon + 4 * sys.rank()) {
            Membership::Yes => {}
            Membership::No => return Ok(Containment::Fails(r)),
            Membership::Unknown => unknown = true,
        }
    }
    Ok(if unknown { Containment::Unknown } else { Containment::Holds })
}

/// Compare `N(a)` and `N(b)` by containment of their first `horizon` inversions.
pub fn compare(sys: &CoxeterSystem, a: &InfWord, b: &InfWord, horizon: usize) -> Result<Comparison, InfWordError> {
    let ab = contained(sys, a, b, horizon)?;
    let ba = contained(sys, b, a, horizon)?;
    let wit = |c: &Containment| match c {
        Containment::Fails(r) => Some(r.clone()),
        _ => None,
    };
    let (left_only, right_only) = (wit(&ab), wit(&ba));
    let (order, exact) = match (&ab, &ba) {
        (Containment::Holds, Containment::Holds) => (Order::Equivalent, a == b),
        (Containment::Holds, Containment::Fails(_)) => (Order::Less, false),
        (Containment::Fails(_), Containment::Holds) => (Order::Greater, false),
        (Containment::Fails(_), Containment::Fails(_)) => (Order::Incomparable, true),
        _ => (Order::Unknown, false),
    };
    Ok(Comparison {
        order,
        horizon,
        exact,
        left_only,
        right_only,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccumulationCluster {
    pub point: Vec<f64>,
    /// `|B(x, x)|` at the point.
    pub residual: f64,
    /// Positions in the period whose roots accumulate here.
    pub classes: Vec<usize>,
    /// Largest distance between the estimates merged into this cluster.
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccumulationReport {
    pub n: usize,
    pub clusters: Vec<AccumulationCluster>,
    /// Diameter of the last period's worth of normalized roots.
    pub tail_diameter: f64,
}

/// Float estimate of the accumulation points of the normalized inversion roots. Roots are
/// split by their position in the period; each class is extrapolated to the isotropic
/// cone along the line through its two last members, and estimates are merged at `tol`.
pub fn accumulation_estimate(sys: &CoxeterSystem, w: &InfWord, n: usize, tol: f64) -> Result<AccumulationReport, InfWordError> {
    let p = w.period.len();
    let n = n.max(w.prefix.len() + 2 * p);
    let g = gram_f64(sys);
    let letters = w.letters(n);
    // Float stream; exact roots grow too quickly for long truncations.
    let mut hats: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut frame: Vec<Vec<f64>> = (0..sys.rank())
        .map(|s| {
            let mut e = vec![0.0; sys.rank()];
            e[s] = 1.0;
            e
        })
        .collect();
    for &s in &letters {
        let col = frame[s].clone();
        let h: f64 = col.iter().sum();
        hats.push(col.iter().map(|x| x / h).collect());
        // frame <- frame * s, then rescale to keep magnitudes bounded.
        for j in 0..sys.rank() {
            if j == s || g[s][j] == 0.0 {
                continue;
            }
            let k = 2.0 * g[s][j];
            for i in 0..sys.rank() {
                frame[j][i] -= k * col[i];
            }
        }
        frame[s].iter_mut().for_each(|x| *x = -*x);
        let scale = frame.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale > 1e100 {
            frame.iter_mut().flatten().for_each(|x| *x /= scale);
        }
    }
    let start = w.prefix.len();
    let mut estimates: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for j in 0..p {
        let class: Vec<usize> = (start..n).filter(|i| (i - start) % p == j).collect();
        // Far-apart members keep the extrapolation well conditioned.
        let (a, b) = (class[class.len() / 2], class[class.len() - 1]);
        let (x, res) = imagcone::isotropic_extrapolate(&g, &hats[a], &hats[b]);
        estimates.push((j, x, res));
    }
    let pts: Vec<Vec<f64>> = estimates.iter().map(|e| e.1.clone()).collect();
    let clusters = imagcone::clusters(&pts, tol)
        .into_iter()
        .map(|idx| {
            let dim = pts[0].len();
            let mut point = vec![0.0; dim];
            for &i in &idx {
                for k in 0..dim {
                    point[k] += pts[i][k] / idx.len() as f64;
                }
            }
            let mut spread: f64 = 0.0;
            for &i in &idx {
                for &k in &idx {
                    spread = spread.max(dist(&pts[i], &pts[k]));
                }
            }
            AccumulationCluster {
                residual: imagcone::form_f64(&g, &point, &point).abs(),
                point,
                classes: idx.iter().map(|&i| estimates[i].0).collect(),
                spread,
            }
        })
        .collect();
    let tail = &hats[n - p..];
    let mut tail_diameter: f64 = 0.0;
    for a in tail {
        for b in tail {
            tail_diameter = tail_diameter.max(dist(a, b));
        }
    }
    Ok(AccumulationReport {
        n,
        clusters,
        tail_diameter,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn parse_and_format() {
        let aa = catalog::affine_a2();
        let w = InfWord::parse(&aa, "b|(a.b.c)", 0).unwrap();
        assert_eq!(w.prefix, vec![1]);
        assert_eq!(w.period, vec![0, 1, 2]);
        assert_eq!(w.format(&aa), "b|(a.b.c)");
        assert_eq!(InfWord::parse(&aa, "|(a.b.c)", 0).unwrap().format(&aa), "|(a.b.c)");
        assert!(InfWord::parse(&aa, "a.b.c", 0).is_err());
        assert_eq!(InfWord::parse(&aa, "|()", 0), Err(InfWordError::EmptyPeriod));
        assert!(matches!(InfWord::parse(&aa, "|(a.a)", 0), Err(InfWordError::NotReduced(1))));
        let d = catalog::dihedral_inf();
        assert!(matches!(InfWord::parse(&d, "|(s)", 0), Err(InfWordError::NotReduced(1))));
    }

    #[test]
    fn dihedral_stream() {
        let d = catalog::dihedral_inf();
        let w = InfWord::parse(&d, "|(s.t)", 0).unwrap();
        let roots = w.truncate_inversions(&d, 4).unwrap();
        let want: Vec<Vector> = (0..4).map(|k| Vector::from_ints(&[k + 1, k])).collect();
        assert_eq!(roots, want);
        assert!(w.truncate_inversions(&d, 0).unwrap().is_empty());
        assert_eq!(w.contains_root(&d, &Vector::from_ints(&[0, 1]), 50), Membership::No);
        assert_eq!(w.contains_root(&d, &Vector::from_ints(&[40, 39]), 50), Membership::Yes);
    }

    #[test]
    fn connectedness() {
        let aa = catalog::affine_a2();
        assert!(InfWord::parse(&aa, "|(a.b.c)", 0).unwrap().is_connected(&aa));
        let p5 = catalog::path5();
        let w = InfWord::parse(&p5, "|(1.2.4.5)", 0).unwrap();
        assert!(!w.is_connected(&p5));
    }

    #[test]
    fn accumulation_of_disconnected_word() {
        let p5 = catalog::path5();
        let w = InfWord::parse(&p5, "|(1.2.4.5)", 0).unwrap();
        let rep = accumulation_estimate(&p5, &w, 400, 1e-3).unwrap();
        assert_eq!(rep.clusters.len(), 2);
        let d = catalog::dihedral_inf();
        let w = InfWord::parse(&d, "|(s.t)", 0).unwrap();
        let rep = accumulation_estimate(&d, &w, 200, 1e-6).unwrap();
        assert_eq!(rep.clusters.len(), 1);
        assert!((rep.clusters[0].point[0] - 0.5).abs() < 1e-7, "{rep:?}");
    }
}

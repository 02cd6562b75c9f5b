//! Coxeter systems in their classical geometric representation.
//!
//! The ambient space has the simple roots as its standard basis, the bilinear form is
//! given by a Gram matrix over a single quadratic field, and group elements act as exact
//! matrices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Vector};
use crate::scalar::{is_square_free, Scalar, ScalarError};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("system needs at least one generator")]
    Empty,
    #[error("duplicate generator name {0:?}")]
    DuplicateName(String),
    #[error("bad generator name {0:?}: names must be nonempty and avoid '.', ',', '|', '(', ')'")]
    BadName(String),
    #[error("coxeter matrix must be {0}x{0} and symmetric with 1 on the diagonal")]
    BadMatrix(usize),
    #[error("label {0} is not supported; use 2..=6 or \"inf\"")]
    BadLabel(String),
    #[error("labels need both sqrt({0}) and sqrt({1}); only one quadratic extension is allowed")]
    MixedExtensions(u32, u32),
    #[error("-cos(pi/{m}) is not representable with field_d = {d}")]
    Unrepresentable { m: u32, d: u32 },
    #[error("gram entry for {0},{1} is positive")]
    PositiveEntry(String, String),
    #[error("gram entry for {0},{1} lies in (-1, 0) but is not -cos(pi/m) for m in 3..=6")]
    NotACosine(String, String),
    #[error("gram override key {0:?} must name two distinct generators as \"s,t\"")]
    BadOverrideKey(String),
    #[error("field_d = {0} is not square-free")]
    NotSquareFree(u32),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("root literal has {got} coordinates, expected {want}")]
    WrongDimension { got: usize, want: usize },
    #[error("vector {0} is isotropic, it has no reflection")]
    Isotropic(Vector),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("malformed system file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A Coxeter-matrix entry as written in system files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Finite(u32),
    Named(String),
}

/// On-disk description of a system.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_d: Option<u32>,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coxeter_matrix: Option<Vec<Vec<Label>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gram_overrides: BTreeMap<String, String>,
}

/// Order of `st`; `None` is infinite.
pub type Order = Option<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterSystem {
    name: Option<String>,
    names: Vec<String>,
    gram: Vec<Vec<Scalar>>,
    orders: Vec<Vec<Order>>,
    field_d: u32,
}

fn extension_for(m: u32) -> u32 {
    match m {
        4 => 2,
        5 => 5,
        6 => 3,
        _ => 1,
    }
}

/// `-cos(pi/m)` in the field of `d`, when it lives there.
pub fn minus_cos_pi_over(m: u32, d: u32) -> Option<Scalar> {
    if m == 2 {
        return Some(Scalar::zero());
    }
    let e = extension_for(m);
    if !(2..=6).contains(&m) || (e != 1 && e != d) {
        return None;
    }
    Scalar::cos_pi_fraction(1, m as i64, d).map(|c| -c)
}

fn parse_label(l: &Label) -> Result<Order, SystemError> {
    match l {
        Label::Finite(m) if (1..=6).contains(m) => Ok(Some(*m)),
        Label::Finite(m) => Err(SystemError::BadLabel(m.to_string())),
        Label::Named(s) => match s.as_str() {
            "inf" | "infinity" | "∞" => Ok(None),
            other => other
                .parse::<u32>()
                .ok()
                .filter(|m| (1..=6).contains(m))
                .map(Some)
                .ok_or_else(|| SystemError::BadLabel(other.to_string())),
        },
    }
}

impl CoxeterSystem {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self, SystemError> {
        let n = spec.generators.len();
        if n == 0 {
            return Err(SystemError::Empty);
        }
        for (i, g) in spec.generators.iter().enumerate() {
            if g.is_empty() || g == "e" || g.contains(['.', ',', '|', '(', ')', ' ']) {
                return Err(SystemError::BadName(g.clone()));
            }
            if spec.generators[..i].contains(g) {
                return Err(SystemError::DuplicateName(g.clone()));
            }
        }
        let index = |name: &str| spec.generators.iter().position(|g| g == name);

        let mut orders: Vec<Vec<Order>> = vec![vec![Some(2); n]; n];
        for (i, row) in orders.iter_mut().enumerate() {
            row[i] = Some(1);
        }
        if let Some(m) = &spec.coxeter_matrix {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(SystemError::BadMatrix(n));
            }
            for i in 0..n {
                for j in 0..n {
                    let o = parse_label(&m[i][j])?;
                    if (i == j) != (o == Some(1)) || o != parse_label(&m[j][i])? {
                        return Err(SystemError::BadMatrix(n));
                    }
                    orders[i][j] = o;
                }
            }
        }

        let mut overrides = BTreeMap::new();
        let mut override_d = 1;
        for (key, lit) in &spec.gram_overrides {
            let parts: Vec<&str> = key.split(',').map(str::trim).collect();
            let (Some(i), Some(j)) = (
                parts.first().and_then(|p| index(p)),
                parts.get(1).and_then(|p| index(p)),
            ) else {
                return Err(SystemError::BadOverrideKey(key.clone()));
            };
            if parts.len() != 2 || i == j {
                return Err(SystemError::BadOverrideKey(key.clone()));
            }
            overrides.insert((i.min(j), i.max(j)), lit.clone());
            if lit.contains("rt") {
                override_d = spec.field_d.unwrap_or(0);
            }
        }

        let mut needed = 1;
        for i in 0..n {
            for j in i + 1..n {
                if overrides.contains_key(&(i, j)) {
                    continue;
                }
                if let Some(m) = orders[i][j] {
                    let e = extension_for(m);
                    if e != 1 {
                        if needed != 1 && needed != e {
                            return Err(SystemError::MixedExtensions(needed, e));
                        }
                        needed = e;
                    }
                }
            }
        }
        let d = match spec.field_d {
            Some(d) => d,
            None if override_d == 0 => {
                return Err(SystemError::Scalar(ScalarError::RootInRationalField(
                    "gram override uses rt but field_d is not given".into(),
                )))
            }
            None => needed,
        };
        if d == 0 || !is_square_free(d) {
            return Err(SystemError::NotSquareFree(d));
        }

        let mut gram = vec![vec![Scalar::zero(); n]; n];
        for i in 0..n {
            gram[i][i] = Scalar::one();
            for j in i + 1..n {
                let entry = match overrides.get(&(i, j)) {
                    Some(lit) => Scalar::parse(lit, d)?,
                    None => match orders[i][j] {
                        None => Scalar::int(-1),
                        Some(m) => minus_cos_pi_over(m, d)
                            .ok_or(SystemError::Unrepresentable { m, d })?,
                    },
                };
                let (a, b) = (&spec.generators[i], &spec.generators[j]);
                if entry.is_positive() {
                    return Err(SystemError::PositiveEntry(a.clone(), b.clone()));
                }
                let order = if entry <= Scalar::int(-1) {
                    None
                } else {
                    Some(
                        (2..=6)
                            .find(|&m| minus_cos_pi_over(m, d).as_ref() == Some(&entry))
                            .ok_or_else(|| SystemError::NotACosine(a.clone(), b.clone()))?,
                    )
                };
                orders[i][j] = order;
                orders[j][i] = order;
                gram[j][i] = entry.clone();
                gram[i][j] = entry;
            }
        }
        Ok(CoxeterSystem {
            name: spec.name.clone(),
            names: spec.generators.clone(),
            gram,
            orders,
            field_d: d,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, SystemError> {
        Self::from_spec(&serde_json::from_str(text)?)
    }

    /// Build from generator names and a Coxeter matrix (`None` = infinite order).
    pub fn from_orders(names: &[&str], orders: &[Vec<Order>]) -> Result<Self, SystemError> {
        let spec = SystemSpec {
            generators: names.iter().map(|s| s.to_string()).collect(),
            coxeter_matrix: Some(
                orders
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|o| match o {
                                Some(m) => Label::Finite(*m),
                                None => Label::Named("inf".into()),
                            })
                            .collect()
                    })
                    .collect(),
            ),
            ..Default::default()
        };
        Self::from_spec(&spec)
    }

    /// Round-trippable description (all off-diagonal values written explicitly when not
    /// implied by the label).
    pub fn to_spec(&self) -> SystemSpec {
        let n = self.rank();
        let mut overrides = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let implied = match self.orders[i][j] {
                    None => Scalar::int(-1),
                    Some(m) => minus_cos_pi_over(m, self.field_d).expect("validated"),
                };
                if implied != self.gram[i][j] {
                    overrides.insert(
                        format!("{},{}", self.names[i], self.names[j]),
                        self.gram[i][j].to_string(),
                    );
                }
            }
        }
        SystemSpec {
            name: self.name.clone(),
            field_d: Some(self.field_d),
            generators: self.names.clone(),
            coxeter_matrix: Some(
                self.orders
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|o| match o {
                                Some(m) => Label::Finite(*m),
                                None => Label::Named("inf".into()),
                            })
                            .collect()
                    })
                    .collect(),
            ),
            gram_overrides: overrides,
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn field(&self) -> u32 {
        self.field_d
    }

    pub fn gram(&self, s: usize, t: usize) -> &Scalar {
        &self.gram[s][t]
    }

    pub fn gram_row(&self, s: usize) -> &[Scalar] {
        &self.gram[s]
    }

    pub fn order(&self, s: usize, t: usize) -> Order {
        self.orders[s][t]
    }

    pub fn generator(&self, name: &str) -> Result<usize, SystemError> {
        self.names
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| SystemError::UnknownGenerator(name.to_string()))
    }

    pub fn simple_root(&self, s: usize) -> Vector {
        Vector::basis(self.rank(), s)
    }

    pub fn bilinear(&self, u: &Vector, v: &Vector) -> Scalar {
        let n = self.rank();
        let mut acc = Scalar::zero();
        for i in 0..n {
            if u.0[i].is_zero() {
                continue;
            }
            let row: Scalar = (0..n)
                .filter(|&j| !v.0[j].is_zero() && !self.gram[i][j].is_zero())
                .map(|j| &self.gram[i][j] * &v.0[j])
                .sum();
            acc = acc + &u.0[i] * &row;
        }
        acc
    }

    /// `B(alpha_s, v)`.
    pub fn pair_simple(&self, s: usize, v: &Vector) -> Scalar {
        self.gram[s]
            .iter()
            .zip(&v.0)
            .filter(|(g, x)| !g.is_zero() && !x.is_zero())
            .map(|(g, x)| g * x)
            .sum()
    }

    pub fn reflect(&self, alpha: &Vector, v: &Vector) -> Result<Vector, SystemError> {
        let aa = self.bilinear(alpha, alpha);
        if aa.is_zero() {
            return Err(SystemError::Isotropic(alpha.clone()));
        }
        let k = Scalar::int(-2) * self.bilinear(alpha, v) / aa;
        Ok(v.axpy(&k, alpha))
    }

    /// Reflection in a simple root: only coordinate `s` moves.
    pub fn reflect_simple(&self, s: usize, v: &Vector) -> Vector {
        let mut out = v.clone();
        let k = Scalar::int(2) * self.pair_simple(s, v);
        out.0[s] = &out.0[s] - &k;
        out
    }

    /// Apply `w = s_1 ... s_k` to `v`, i.e. `s_1(s_2(...s_k(v)))`.
    pub fn apply_word(&self, word: &[usize], v: &Vector) -> Vector {
        word.iter()
            .rev()
            .fold(v.clone(), |acc, &s| self.reflect_simple(s, &acc))
    }

    /// Inertia `(n_plus, n_zero, n_minus)` of the Gram matrix.
    pub fn signature(&self) -> (usize, usize, usize) {
        inertia(self.gram.clone())
    }

    /// Positive definite form, i.e. finite group.
    pub fn is_finite(&self) -> bool {
        let (_, z, m) = self.signature();
        z == 0 && m == 0
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.rank();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && !self.gram[i][j].is_zero() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    /// Connectivity of the Coxeter graph restricted to `letters`.
    pub fn induces_connected(&self, letters: &[usize]) -> bool {
        let mut set: Vec<usize> = letters.to_vec();
        set.sort_unstable();
        set.dedup();
        let Some(&first) = set.first() else {
            return true;
        };
        let mut seen = vec![first];
        let mut stack = vec![first];
        while let Some(i) = stack.pop() {
            for &j in &set {
                if !seen.contains(&j) && !self.gram[i][j].is_zero() {
                    seen.push(j);
                    stack.push(j);
                }
            }
        }
        seen.len() == set.len()
    }

    /// Word literal: names joined by `.`; `e` or the empty string is the identity.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>, SystemError> {
        let t = text.trim();
        if t.is_empty() || t == "e" {
            return Ok(Vec::new());
        }
        t.split('.').map(|p| self.generator(p.trim())).collect()
    }

    pub fn format_word(&self, word: &[usize]) -> String {
        if word.is_empty() {
            return "e".into();
        }
        word.iter()
            .map(|&s| self.names[s].as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse_vector<S: AsRef<str>>(&self, coords: &[S]) -> Result<Vector, SystemError> {
        if coords.len() != self.rank() {
            return Err(SystemError::WrongDimension {
                got: coords.len(),
                want: self.rank(),
            });
        }
        Ok(Vector(
            coords
                .iter()
                .map(|c| Scalar::parse(c.as_ref(), self.field_d))
                .collect::<Result<_, _>>()?,
        ))
    }

    /// The matrix of a single simple reflection.
    pub fn reflection_matrix(&self, s: usize) -> Matrix {
        Element::identity(self.rank()).times_simple(self, s).matrix
    }
}

impl fmt::Display for CoxeterSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name.as_deref().unwrap_or("system"))?;
        write!(f, " [{}]", self.names.join(", "))
    }
}

fn inertia(mut a: Vec<Vec<Scalar>>) -> (usize, usize, usize) {
    let (mut plus, mut minus) = (0, 0);
    let mut live: Vec<usize> = (0..a.len()).collect();
    while !live.is_empty() {
        let pivot = live.iter().copied().find(|&i| !a[i][i].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                let pair = live.iter().find_map(|&i| {
                    live.iter()
                        .copied()
                        .find(|&j| j != i && !a[i][j].is_zero())
                        .map(|j| (i, j))
                });
                let Some((i, j)) = pair else { break };
                // Congruence: row/col i += row/col j makes the diagonal 2 a_ij.
                for k in 0..a.len() {
                    let v = &a[i][k] + &a[j][k];
                    a[i][k] = v;
                }
                for k in 0..a.len() {
                    let v = &a[k][i] + &a[k][j];
                    a[k][i] = v;
                }
                i
            }
        };
        let d = a[p][p].clone();
        if d.is_positive() {
            plus += 1;
        } else {
            minus += 1;
        }
        live.retain(|&i| i != p);
        for &i in &live {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &d;
            for &k in &live {
                let v = &a[i][k] - &(&f * &a[p][k]);
                a[i][k] = v;
            }
        }
        for &i in &live {
            a[i][p] = Scalar::zero();
            a[p][i] = Scalar::zero();
        }
    }
    let zero = a.len() - plus - minus;
    (plus, zero, minus)
}

/// A group element stored as its exact matrix on the ambient space.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Element {
    pub matrix: Matrix,
}

impl Element {
    pub fn identity(n: usize) -> Self {
        Element {
            matrix: Matrix::identity(n),
        }
    }

    pub fn from_word(sys: &CoxeterSystem, word: &[usize]) -> Self {
        word.iter()
            .fold(Self::identity(sys.rank()), |g, &s| g.times_simple(sys, s))
    }

    /// `g * s`: column `j` becomes `col_j - 2 B(alpha_s, alpha_j) col_s`.
    pub fn times_simple(&self, sys: &CoxeterSystem, s: usize) -> Self {
        let n = self.matrix.n;
        let mut m = self.matrix.clone();
        let two = Scalar::int(2);
        for j in 0..n {
            let g = sys.gram(s, j);
            if g.is_zero() {
                continue;
            }
            let k = &two * g;
            for i in 0..n {
                let v = &m.data[i * n + j] - &(&k * &self.matrix.data[i * n + s]);
                m.data[i * n + j] = v;
            }
        }
        Element { matrix: m }
    }

    /// `s * g`: only row `s` changes.
    pub fn simple_times(&self, sys: &CoxeterSystem, s: usize) -> Self {
        let n = self.matrix.n;
        let mut m = self.matrix.clone();
        for j in 0..n {
            let col = self.matrix.column(j);
            let k = Scalar::int(2) * sys.pair_simple(s, &col);
            m.data[s * n + j] = &m.data[s * n + j] - &k;
        }
        Element { matrix: m }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        self.matrix.apply(v)
    }

    /// `g(alpha_s)`.
    pub fn image_of_simple(&self, s: usize) -> Vector {
        self.matrix.column(s)
    }

    pub fn has_right_descent(&self, s: usize) -> bool {
        self.image_of_simple(s).is_negative()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == Matrix::identity(self.matrix.n)
    }

    /// A reduced word, peeling the smallest right descent each step.
    pub fn reduced_word(&self, sys: &CoxeterSystem) -> Vec<usize> {
        let mut g = self.clone();
        let mut rev = Vec::new();
        while let Some(s) = (0..sys.rank()).find(|&s| g.has_right_descent(s)) {
            rev.push(s);
            g = g.times_simple(sys, s);
        }
        rev.reverse();
        rev
    }

    pub fn length(&self, sys: &CoxeterSystem) -> usize {
        self.reduced_word(sys).len()
    }
}

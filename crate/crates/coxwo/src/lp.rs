//! Exact two-phase simplex over [`Scalar`] with Bland's anti-cycling rule.
//!
//! The core solves `max c.x` subject to `A x = b`, `x >= 0`. When that system is
//! infeasible it returns a Farkas certificate `y` with `y.A >= 0` componentwise and
//! `y.b < 0`. [`Lp`] layers free variables and inequality rows on top.

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Optimal { x: Vec<Scalar>, value: Scalar },
    /// `y` with `y.A >= 0` and `y.b < 0` (one entry per row).
    Infeasible { farkas: Vec<Scalar> },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B^-1 A_j`; the last cell is unused.
    cost: Vec<Scalar>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Scalar {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Scalar::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let prow = self.rows[r].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&k| !prow[k].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &k in &nz {
                row[k] = &row[k] - &(&f * &prow[k]);
            }
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for &k in &nz {
                self.cost[k] = &self.cost[k] - &(&f * &prow[k]);
            }
        }
        self.basis[r] = c;
    }

    /// Run simplex iterations over the allowed columns; `false` means unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.cost[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Scalar)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Solve `max c.x, A x = b, x >= 0` exactly.
pub fn solve_standard(a: &[Vec<Scalar>], b: &[Scalar], c: &[Scalar]) -> Outcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut flipped = vec![false; m];
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let neg = b[i].is_negative();
        flipped[i] = neg;
        let mut row = Vec::with_capacity(width + 1);
        for j in 0..n {
            row.push(if neg { -&a[i][j] } else { a[i][j].clone() });
        }
        for k in 0..m {
            row.push(if k == i { Scalar::one() } else { Scalar::zero() });
        }
        row.push(if neg { -&b[i] } else { b[i].clone() });
        rows.push(row);
    }
    let mut cost = vec![Scalar::zero(); width + 1];
    for (j, cj) in cost.iter_mut().enumerate().take(n) {
        *cj = rows.iter().map(|r| r[j].clone()).sum();
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cost,
        width,
    };
    t.optimize(width);

    let infeasibility: Scalar = (0..m)
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs(i).clone())
        .sum();
    if infeasibility.is_positive() {
        let farkas = (0..m)
            .map(|i| {
                let y = Scalar::int(-1) - &t.cost[n + i];
                if flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        return Outcome::Infeasible { farkas };
    }

    // Drive remaining (zero-level) artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
                i += 1;
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }

    let mut cost = vec![Scalar::zero(); width + 1];
    cost[..n].clone_from_slice(c);
    for (i, &bv) in t.basis.iter().enumerate() {
        if c[bv].is_zero() {
            continue;
        }
        for k in 0..n {
            if !t.rows[i][k].is_zero() {
                cost[k] = &cost[k] - &(&c[bv] * &t.rows[i][k]);
            }
        }
    }
    t.cost = cost;
    if !t.optimize(n) {
        return Outcome::Unbounded;
    }
    let mut x = vec![Scalar::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        x[bv] = t.rhs(i).clone();
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Outcome::Optimal { x, value }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Linear program with named rows and free or nonnegative variables.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    free: Vec<bool>,
    rows: Vec<(Vec<Scalar>, Sense, Scalar)>,
    objective: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<Scalar>, value: Scalar },
    /// Row multipliers `y` (one per constraint) proving infeasibility: the combination
    /// `sum y_i row_i` has zero coefficients on free variables, nonnegative ones on
    /// nonnegative variables, right-hand side negative, and `y_i >= 0` on `<=` rows,
    /// `y_i <= 0` on `>=` rows.
    Infeasible { farkas: Vec<Scalar> },
    Unbounded,
}

impl Lp {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a variable, returning its index.
    pub fn var(&mut self, free: bool) -> usize {
        self.free.push(free);
        self.objective.push(Scalar::zero());
        self.free.len() - 1
    }

    pub fn vars(&mut self, k: usize, free: bool) -> Vec<usize> {
        (0..k).map(|_| self.var(free)).collect()
    }

    /// Add `sum coeffs.0 * x[coeffs.1] (sense) rhs`.
    pub fn constraint(&mut self, terms: &[(usize, Scalar)], sense: Sense, rhs: Scalar) {
        let mut row = vec![Scalar::zero(); self.free.len()];
        for (j, v) in terms {
            row[*j] = &row[*j] + v;
        }
        self.rows.push((row, sense, rhs));
    }

    pub fn maximize(&mut self, terms: &[(usize, Scalar)]) {
        self.objective = vec![Scalar::zero(); self.free.len()];
        for (j, v) in terms {
            self.objective[*j] = v.clone();
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn solve(&self) -> LpResult {
        let nv = self.free.len();
        // Column layout: for each variable its `+` part, then a `-` part when free, then
        // one slack per inequality row.
        let mut col_of = Vec::with_capacity(nv);
        let mut ncols = 0;
        for &f in &self.free {
            col_of.push(ncols);
            ncols += if f { 2 } else { 1 };
        }
        let slack_base = ncols;
        let nslack = self.rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let total = ncols + nslack;
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = Vec::with_capacity(self.rows.len());
        let mut k = 0;
        for (row, sense, rhs) in &self.rows {
            let mut r = vec![Scalar::zero(); total];
            for j in 0..nv {
                let v = row.get(j).cloned().unwrap_or_else(Scalar::zero);
                if v.is_zero() {
                    continue;
                }
                if self.free[j] {
                    r[col_of[j] + 1] = -&v;
                }
                r[col_of[j]] = v;
            }
            match sense {
                Sense::Le => {
                    r[slack_base + k] = Scalar::one();
                    k += 1;
                }
                Sense::Ge => {
                    r[slack_base + k] = Scalar::int(-1);
                    k += 1;
                }
                Sense::Eq => {}
            }
            a.push(r);
            b.push(rhs.clone());
        }
        let mut c = vec![Scalar::zero(); total];
        for j in 0..nv {
            let v = self.objective.get(j).cloned().unwrap_or_else(Scalar::zero);
            if self.free[j] {
                c[col_of[j] + 1] = -&v;
            }
            c[col_of[j]] = v;
        }
        match solve_standard(&a, &b, &c) {
            Outcome::Optimal { x, value } => {
                let vals = (0..nv)
                    .map(|j| {
                        if self.free[j] {
                            &x[col_of[j]] - &x[col_of[j] + 1]
                        } else {
                            x[col_of[j]].clone()
                        }
                    })
                    .collect();
                LpResult::Optimal { x: vals, value }
            }
            Outcome::Infeasible { farkas } => LpResult::Infeasible { farkas },
            Outcome::Unbounded => LpResult::Unbounded,
        }
    }
}

//! Coordinate vectors and small dense exact linear algebra.

use std::fmt;

use crate::scalar::Scalar;

/// A vector of the ambient space, in the basis of simple roots.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(pub Vec<Scalar>);

impl Vector {
    pub fn zero(n: usize) -> Self {
        Vector(vec![Scalar::zero(); n])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = Scalar::one();
        v
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Vector(xs.iter().map(|&x| Scalar::int(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn add(&self, o: &Vector) -> Vector {
        Vector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Vector) -> Vector {
        Vector(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &Scalar) -> Vector {
        Vector(self.0.iter().map(|a| a * k).collect())
    }

    /// `self + k * o`.
    pub fn axpy(&self, k: &Scalar, o: &Vector) -> Vector {
        if k.is_zero() {
            return self.clone();
        }
        Vector(self.0.iter().zip(&o.0).map(|(a, b)| a + &(k * b)).collect())
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }

    /// Coordinatewise pairing `sum x_i y_i` (not the bilinear form).
    pub fn dot(&self, o: &Vector) -> Scalar {
        self.0.iter().zip(&o.0).map(|(a, b)| a * b).sum()
    }

    /// Sum of coordinates; the affine hyperplane `height = 1` is the normalizing slice.
    pub fn height(&self) -> Scalar {
        self.0.iter().cloned().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    /// All coordinates nonnegative and not all zero.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|x| !x.is_negative()) && !self.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg().is_positive()
    }

    /// Rescale to coordinate sum 1; `None` when the sum is not positive.
    pub fn normalized(&self) -> Option<Vector> {
        let h = self.height();
        if !h.is_positive() {
            return None;
        }
        if h.is_one() {
            return Some(self.clone());
        }
        Some(Vector(self.0.iter().map(|x| x / &h).collect()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Scalar::to_f64).collect()
    }

    /// Float shadow rescaled to coordinate sum 1.
    pub fn normalized_f64(&self) -> Vec<f64> {
        let v = self.to_f64();
        let h: f64 = v.iter().sum();
        v.into_iter().map(|x| x / h).collect()
    }

    /// Float shadow rescaled to Euclidean length 1 (zero stays zero).
    pub fn normalized_f64_signed(&self) -> Vec<f64> {
        let v = self.to_f64();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return v;
        }
        v.into_iter().map(|x| x / n).collect()
    }

    pub fn literal(&self) -> Vec<String> {
        self.0.iter().map(|x| x.to_string()).collect()
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Serialized as a root literal: an array of scalar literals.
impl serde::Serialize for Vector {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(self.0.iter())
    }
}

/// Square matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix {
    pub n: usize,
    pub data: Vec<Scalar>,
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Scalar::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Scalar::one();
        }
        Matrix { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.n).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        Vector(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| self.get(i, j) * &v.0[j]).sum())
                .collect(),
        )
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push((0..n).map(|k| self.get(i, k) * o.get(k, j)).sum());
            }
        }
        Matrix { n, data }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(Scalar::to_f64).collect()
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Scalar>>) -> Vec<usize> {
    let m = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Scalar::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..ncols {
                    let delta = &f * &rows[r][k];
                    rows[i][k] = &rows[i][k] - &delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(vectors: &[Vector]) -> usize {
    let mut rows: Vec<Vec<Scalar>> = vectors.iter().map(|v| v.0.clone()).collect();
    rref(&mut rows).len()
}

/// Basis of `{y : y.v = 0 for every v in vectors}` (coordinatewise pairing).
pub fn orthogonal_complement(vectors: &[Vector], n: usize) -> Vec<Vector> {
    let mut rows: Vec<Vec<Scalar>> = vectors.iter().map(|v| v.0.clone()).collect();
    if rows.is_empty() {
        return (0..n).map(|i| Vector::basis(n, i)).collect();
    }
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut y = Vector::zero(n);
            y.0[f] = Scalar::one();
            for (r, &p) in pivots.iter().enumerate() {
                y.0[p] = -&rows[r][f];
            }
            y
        })
        .collect()
}

/// Coefficients `c` with `sum c_i gens_i = target`, if the target lies in the span.
pub fn solve_in_span(gens: &[Vector], target: &Vector) -> Option<Vec<Scalar>> {
    let n = target.dim();
    let k = gens.len();
    let mut rows: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            let mut row: Vec<Scalar> = gens.iter().map(|g| g.0[i].clone()).collect();
            row.push(target.0[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.contains(&k) {
        return None;
    }
    let mut c = vec![Scalar::zero(); k];
    for (r, &p) in pivots.iter().enumerate() {
        c[p] = rows[r][k].clone();
    }
    Some(c)
}

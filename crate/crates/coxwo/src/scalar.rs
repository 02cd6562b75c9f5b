//! Exact arithmetic in a real quadratic field Q(sqrt d).
//!
//! A [`Scalar`] stores `a + b*sqrt(d)` with arbitrary-precision rationals. Values with
//! `b = 0` are stored with `d = 1`, so plain rationals combine freely with values from
//! any field; combining two irrational values from different fields is an error.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot combine sqrt({0}) with sqrt({1})")]
    FieldMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed scalar literal `{0}`")]
    Malformed(String),
    #[error("literal `{0}` uses rt but the field is the rationals")]
    RootInRationalField(String),
    #[error("{0} is not square-free")]
    NotSquareFree(u32),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
    d: u32,
}

pub fn is_square_free(d: u32) -> bool {
    if d == 0 {
        return false;
    }
    let mut k = 2u32;
    while k.saturating_mul(k) <= d {
        if d.is_multiple_of(k * k) {
            return false;
        }
        k += 1;
    }
    true
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl Scalar {
    fn canon(a: BigRational, b: BigRational, d: u32) -> Self {
        if b.is_zero() || d == 1 {
            Scalar { a: a + b, b: BigRational::zero(), d: 1 }
        } else {
            Scalar { a, b, d }
        }
    }

    /// `a + b*sqrt(d)`; panics unless `d` is square-free.
    pub fn new(a: BigRational, b: BigRational, d: u32) -> Self {
        assert!(is_square_free(d), "{d} is not square-free");
        if d == 1 {
            return Self::canon(a + b, BigRational::zero(), 1);
        }
        Self::canon(a, b, d)
    }

    pub fn zero() -> Self {
        Self::canon(BigRational::zero(), BigRational::zero(), 1)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Self::canon(ratio(p, q), BigRational::zero(), 1)
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Self::canon(r, BigRational::zero(), 1)
    }

    /// `p/q * sqrt(d)`.
    pub fn surd(p: i64, q: i64, d: u32) -> Self {
        Self::new(BigRational::zero(), ratio(p, q), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    /// The radicand; 1 for rational values.
    pub fn field(&self) -> u32 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.b.is_zero() && self.a.is_one()
    }

    fn joint_field(&self, other: &Self) -> Result<u32, ScalarError> {
        match (self.d, other.d) {
            (1, d) | (d, 1) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(ScalarError::FieldMismatch(x, y)),
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, ScalarError> {
        let d = self.joint_field(o)?;
        Ok(Self::canon(&self.a + &o.a, &self.b + &o.b, d))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, ScalarError> {
        let d = self.joint_field(o)?;
        Ok(Self::canon(&self.a - &o.a, &self.b - &o.b, d))
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, ScalarError> {
        let d = self.joint_field(o)?;
        if self.b.is_zero() {
            return Ok(Self::canon(&self.a * &o.a, &self.a * &o.b, d));
        }
        if o.b.is_zero() {
            return Ok(Self::canon(&self.a * &o.a, &self.b * &o.a, d));
        }
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &o.a + &self.b * &o.b * dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        Ok(Self::canon(a, b, d))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, ScalarError> {
        if o.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let d = self.joint_field(o)?;
        if o.b.is_zero() {
            return Ok(Self::canon(&self.a / &o.a, &self.b / &o.a, d));
        }
        let dd = BigRational::from_integer(BigInt::from(d));
        let norm = &o.a * &o.a - &o.b * &o.b * dd;
        let conj = Self::canon(o.a.clone(), -o.b.clone(), d);
        let num = self.checked_mul(&conj)?;
        Ok(Self::canon(num.a / &norm, num.b / &norm, d))
    }

    /// Exact sign of `a + b*sqrt(d)`.
    pub fn sign(&self) -> i8 {
        fn sg(r: &BigRational) -> i8 {
            if r.is_zero() {
                0
            } else if r.is_positive() {
                1
            } else {
                -1
            }
        }
        let (sa, sb) = (sg(&self.a), sg(&self.b));
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Floating-point shadow; for rendering and estimates only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        a + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    /// Parse `p/q`, `p/q+r/s*rt` or `p/q-r/s*rt`; `rt` stands for sqrt(d).
    pub fn parse(text: &str, d: u32) -> Result<Self, ScalarError> {
        let bad = || ScalarError::Malformed(text.to_string());
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            return Err(bad());
        }
        if !is_square_free(d) {
            return Err(ScalarError::NotSquareFree(d));
        }
        let Some(body) = text.strip_suffix("rt") else {
            return Ok(Self::from_ratio(parse_rational(text).ok_or_else(bad)?));
        };
        if d == 1 {
            return Err(ScalarError::RootInRationalField(text.to_string()));
        }
        let body = body.strip_suffix('*').unwrap_or(body);
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (a, b) = match split {
            Some(i) => (parse_rational(&body[..i]).ok_or_else(bad)?, &body[i..]),
            None => (BigRational::zero(), body),
        };
        let b = match b {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            s => parse_rational(s.strip_prefix('+').unwrap_or(s)).ok_or_else(bad)?,
        };
        Ok(Self::new(a, b, d))
    }

    /// `cos(p*pi/q)` when it lies in Q(sqrt d) (or in Q).
    pub fn cos_pi_fraction(p: i64, q: i64, d: u32) -> Option<Self> {
        let g = num_integer::gcd(p, q).max(1);
        let (mut p, q) = (p / g, q / g);
        p = p.rem_euclid(2 * q);
        let mut flip = false;
        if p > q {
            p = 2 * q - p;
        }
        if 2 * p > q {
            p = q - p;
            flip = true;
        }
        // now 0 <= p/q <= 1/2
        let g = num_integer::gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        let v = match (p, q) {
            (0, _) => Some(Self::one()),
            (1, 2) => Some(Self::zero()),
            (1, 3) => Some(Self::rational(1, 2)),
            (1, 4) if d == 2 => Some(Self::surd(1, 2, 2)),
            (1, 6) if d == 3 => Some(Self::surd(1, 2, 3)),
            (1, 5) if d == 5 => Some(Self::new(ratio(1, 4), ratio(1, 4), 5)),
            (2, 5) if d == 5 => Some(Self::new(ratio(-1, 4), ratio(1, 4), 5)),
            _ => None,
        }?;
        Some(if flip { -v } else { v })
    }

    /// Square root of a nonnegative rational, as an element of Q(sqrt d') for the
    /// appropriate square-free d'.
    pub fn sqrt_of_rational(r: &BigRational) -> Option<Self> {
        if r.is_negative() {
            return None;
        }
        if r.is_zero() {
            return Some(Self::zero());
        }
        // sqrt(p/q) = sqrt(p*q)/q
        let pq = r.numer() * r.denom();
        let n = pq.to_u64()?;
        let (mut square, mut free) = (1u64, 1u64);
        let mut rest = n;
        let mut k = 2u64;
        while k * k <= rest {
            while rest % (k * k) == 0 {
                rest /= k * k;
                square *= k;
            }
            if rest % k == 0 {
                rest /= k;
                free *= k;
            }
            k += 1;
        }
        free *= rest;
        let coef = BigRational::new(BigInt::from(square), r.denom().clone());
        let free = u32::try_from(free).ok()?;
        Some(Self::new(BigRational::zero(), coef, free))
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num_val = parse_decimal(num)?;
    let den_val = match den {
        Some(d) => {
            if d.starts_with(['+', '-']) {
                return None;
            }
            parse_decimal(d)?
        }
        None => BigRational::one(),
    };
    if den_val.is_zero() {
        return None;
    }
    Some(num_val / den_val)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(all, scale);
    Some(if neg { -v } else { v })
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&fmt_rational(&self.a));
        }
        let sign = if self.b.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}*rt", fmt_rational(&self.a), sign, fmt_rational(&self.b.abs()))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{self}")
        } else {
            write!(f, "{self}[d={}]", self.d)
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;
    /// Parses a rational literal; use [`Scalar::parse`] for literals containing `rt`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scalar::parse(s, 1)
    }
}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
        self.d.hash(state);
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    /// Numeric order; panics when the two values live in different fields.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b.is_zero() && other.b.is_zero() {
            return self.a.cmp(&other.a);
        }
        (self - other).sign().cmp(&0)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::one()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a.clone(), b: -self.b.clone(), d: self.d }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a, b: -self.b, d: self.d }
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(t: &str, d: u32) -> Scalar {
        Scalar::parse(t, d).unwrap()
    }

    #[test]
    fn field_operations() {
        let x = s("1/2", 2) + s("0+1/2*rt", 2);
        assert_eq!(x, Scalar::new(ratio(1, 2), ratio(1, 2), 2));
        assert_eq!(Scalar::surd(1, 1, 2) * Scalar::surd(1, 1, 2), Scalar::int(2));
        let y = s("1+1*rt", 2);
        assert_eq!(&y / &y, Scalar::one());
        assert_eq!(
            Scalar::surd(1, 1, 2).checked_div(&Scalar::zero()),
            Err(ScalarError::DivisionByZero)
        );
        assert!(matches!(
            Scalar::surd(1, 1, 2).checked_add(&Scalar::surd(1, 1, 3)),
            Err(ScalarError::FieldMismatch(2, 3))
        ));
    }

    #[test]
    fn signs() {
        assert_eq!(s("1-1/2*rt", 2).sign(), 1);
        assert_eq!((Scalar::one() - Scalar::one()).sign(), 0);
        assert_eq!(s("-3/5", 2).sign(), -1);
        assert_eq!(s("1-1*rt", 2).sign(), -1);
        assert_eq!(s("-3/2+1*rt", 2).sign(), -1);
        assert_eq!(s("-1/1+1*rt", 2).sign(), 1);
    }

    #[test]
    fn parsing_and_formatting() {
        assert_eq!(s("-6/5", 1), Scalar::rational(-6, 5));
        assert_eq!(s("0-1/2*rt", 2), Scalar::surd(-1, 2, 2));
        assert_eq!(s("3/1", 1), Scalar::int(3));
        assert_eq!(s("-1.2", 1), Scalar::rational(-6, 5));
        assert_eq!(s("3/1", 1).to_string(), "3");
        assert_eq!(Scalar::surd(-1, 2, 2).to_string(), "0-1/2*rt");
        assert_eq!(s("1/3+2/7*rt", 5).to_string(), "1/3+2/7*rt");
        assert!(matches!(Scalar::parse("1+rt", 1), Err(ScalarError::RootInRationalField(_))));
        for bad in ["", "1/", "a", "1 /2", "1/0", "--1", "1/-2"] {
            assert!(Scalar::parse(bad, 2).is_err(), "{bad}");
        }
        assert_eq!(s("-1/2*rt", 3), Scalar::surd(-1, 2, 3));
    }

    #[test]
    fn cosines() {
        assert_eq!(Scalar::cos_pi_fraction(1, 3, 1), Some(Scalar::rational(1, 2)));
        assert_eq!(Scalar::cos_pi_fraction(2, 3, 1), Some(Scalar::rational(-1, 2)));
        assert_eq!(Scalar::cos_pi_fraction(3, 4, 2), Some(Scalar::surd(-1, 2, 2)));
        assert_eq!(Scalar::cos_pi_fraction(1, 4, 1), None);
        assert_eq!(Scalar::cos_pi_fraction(5, 6, 3), Some(Scalar::surd(-1, 2, 3)));
        let c = Scalar::cos_pi_fraction(1, 5, 5).unwrap();
        assert!((c.to_f64() - (std::f64::consts::PI / 5.0).cos()).abs() < 1e-12);
        let c = Scalar::cos_pi_fraction(3, 5, 5).unwrap();
        assert!((c.to_f64() - (3.0 * std::f64::consts::PI / 5.0).cos()).abs() < 1e-12);
        assert_eq!(Scalar::cos_pi_fraction(2, 2, 1), Some(-Scalar::one()));
    }

    #[test]
    fn square_roots() {
        let r = Scalar::sqrt_of_rational(&ratio(11, 25)).unwrap();
        assert_eq!(r, Scalar::surd(1, 5, 11));
        assert_eq!(Scalar::sqrt_of_rational(&ratio(9, 4)).unwrap(), Scalar::rational(3, 2));
        assert_eq!(Scalar::sqrt_of_rational(&ratio(1, 2)).unwrap(), Scalar::surd(1, 2, 2));
        assert!(Scalar::sqrt_of_rational(&ratio(-1, 2)).is_none());
    }

    fn arb() -> impl Strategy<Value = (i64, i64, i64, i64)> {
        (-40i64..40, 1i64..12, -40i64..40, 1i64..12)
    }

    fn mk((p, q, r, t): (i64, i64, i64, i64), d: u32) -> Scalar {
        Scalar::new(ratio(p, q), ratio(r, t), d)
    }

    proptest! {
        #[test]
        fn field_axioms(d in prop::sample::select(vec![1u32, 2, 3, 5]),
                        x in arb(), y in arb(), z in arb()) {
            let (x, y, z) = (mk(x, d), mk(y, d), mk(z, d));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            if !y.is_zero() {
                prop_assert_eq!(&(&x / &y) * &y, x.clone());
            }
        }

        #[test]
        fn sign_is_multiplicative_and_matches_floats(
            p in -50i64..50, q in 1i64..9, r in -50i64..50, t in 1i64..9,
            p2 in -50i64..50, r2 in -50i64..50,
            d in prop::sample::select(vec![1u32, 2, 3, 5, 7, 11]))
        {
            let x = Scalar::new(ratio(p, q), ratio(r, t), d);
            let y = Scalar::new(ratio(p2, 3), ratio(r2, 5), d);
            prop_assert_eq!((&x * &y).sign(), x.sign() * y.sign());
            let f = x.to_f64();
            if f.abs() > 1e-6 {
                prop_assert_eq!(x.sign(), if f > 0.0 { 1 } else { -1 });
            }
        }

        #[test]
        fn format_parse_round_trip(p in -99i64..99, q in 1i64..20, r in -99i64..99, t in 1i64..20,
                                   d in prop::sample::select(vec![1u32, 2, 3, 5])) {
            let x = Scalar::new(ratio(p, q), ratio(r, t), d);
            prop_assert_eq!(Scalar::parse(&x.to_string(), d).unwrap(), x);
        }
    }
}

//! Exact rational scalars, vectors and matrices.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn is_integer(x: &Rational) -> bool {
    x.denom().is_one()
}

/// Parses "p/q", "p" or a decimal literal such as "1.25".
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let num = BigInt::from_str(&digits).map_err(|_| Error::ParseRational(s.into()))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let v = Rational::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    Rational::from_str(t).map_err(|_| Error::ParseRational(s.into()))
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Serde adapters writing rationals as strings.
pub mod serde_rational {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Str(String),
        Int(i64),
    }

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Str(s) => parse_rational(&s).map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(int(i)),
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            xs: &[Rational],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(format_rational))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational>, D::Error> {
            let raw: Vec<Repr> = Vec::deserialize(d)?;
            raw.into_iter()
                .map(|r| match r {
                    Repr::Str(s) => parse_rational(&s).map_err(serde::de::Error::custom),
                    Repr::Int(i) => Ok(int(i)),
                })
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            x: &Option<Rational>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&format_rational(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Rational>, D::Error> {
            let raw: Option<Repr> = Option::deserialize(d)?;
            raw.map(|r| match r {
                Repr::Str(s) => parse_rational(&s).map_err(serde::de::Error::custom),
                Repr::Int(i) => Ok(int(i)),
            })
            .transpose()
        }
    }
}

/// Dense vector of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RatVector(pub Vec<Rational>);

impl Deref for RatVector {
    type Target = Vec<Rational>;
    fn deref(&self) -> &Vec<Rational> {
        &self.0
    }
}

impl DerefMut for RatVector {
    fn deref_mut(&mut self) -> &mut Vec<Rational> {
        &mut self.0
    }
}

impl From<Vec<Rational>> for RatVector {
    fn from(v: Vec<Rational>) -> Self {
        RatVector(v)
    }
}

impl FromIterator<Rational> for RatVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RatVector(iter.into_iter().collect())
    }
}

impl Serialize for RatVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_rational::vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for RatVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        serde_rational::vec::deserialize(d).map(RatVector)
    }
}

impl fmt::Display for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(x))?;
        }
        write!(f, ")")
    }
}

impl RatVector {
    pub fn zeros(n: usize) -> Self {
        RatVector(vec![Rational::zero(); n])
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Rational::one();
        v
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        xs.iter().map(|&x| int(x)).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.len(), other.len(), "vector dimension mismatch");
    }

    pub fn dot(&self, other: &Self) -> Rational {
        self.check(other);
        dot(&self.0, &other.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        self.iter().zip(other.iter()).map(|(a, b)| a + b).collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        self.iter().zip(other.iter()).map(|(a, b)| a - b).collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.iter().map(|a| a * c).collect()
    }

    pub fn neg(&self) -> Self {
        self.iter().map(|a| -a).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.iter().all(is_integer)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.iter().map(to_f64).collect()
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    cols: usize,
    rows: Vec<RatVector>,
}

impl RatMatrix {
    pub fn new(cols: usize, rows: Vec<RatVector>) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Dimension { expected: cols, found: r.len() });
            }
        }
        Ok(RatMatrix { cols, rows })
    }

    /// Builds from nonempty rows, taking the column count from the first row.
    pub fn from_rows(rows: Vec<RatVector>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::new(cols, rows)
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let rows: Vec<_> = rows.iter().map(|r| RatVector::from_ints(r)).collect();
        Self::from_rows(rows).expect("ragged integer matrix")
    }

    pub fn identity(n: usize) -> Self {
        RatMatrix { cols: n, rows: (0..n).map(|k| RatVector::unit(n, k)).collect() }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[RatVector] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let rows = (0..self.cols)
            .map(|j| self.rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        RatMatrix { cols: self.rows.len(), rows }
    }

    pub fn mul_vec(&self, v: &RatVector) -> RatVector {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        self.rows.iter().map(|r| r.dot(v)).collect()
    }
}

/// Clears denominators of a rational row, returning a primitive integer row.
pub fn primitive_integer_row(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Exact rank via fraction-free (Bareiss) elimination on integer-scaled rows.
pub fn rank(m: &RatMatrix) -> usize {
    let mut a: Vec<Vec<BigInt>> = m.rows.iter().map(|r| primitive_integer_row(r)).collect();
    let (nr, nc) = (a.len(), m.cols);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..nc {
        if r == nr {
            break;
        }
        let Some(p) = (r..nr).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..nr {
            for j in c + 1..nc {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(rows: &mut Vec<RatVector>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in c..cols {
                    if !rows[r][j].is_zero() {
                        let t = &f * &rows[r][j];
                        rows[i][j] -= t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Basis of {x : Mx = 0}.
pub fn nullspace_basis(m: &RatMatrix) -> Vec<RatVector> {
    let cols = m.cols;
    let mut rows = m.rows.clone();
    let pivots = rref(&mut rows, cols);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = RatVector::zeros(cols);
        v[free] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -rows[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Equations a·x = β cutting out aff(points), and the hull dimension.
pub fn affine_hull(points: &[RatVector]) -> (Vec<(RatVector, Rational)>, usize) {
    assert!(!points.is_empty(), "affine hull of no points");
    let p0 = &points[0];
    let diffs: Vec<RatVector> = points[1..].iter().map(|p| p.sub(p0)).collect();
    let m = RatMatrix::new(p0.len(), diffs).expect("points of mixed dimension");
    let eqs: Vec<_> = nullspace_basis(&m)
        .into_iter()
        .map(|a| {
            let beta = a.dot(p0);
            (a, beta)
        })
        .collect();
    let dim = p0.len() - eqs.len();
    (eqs, dim)
}

/// Scales `v` so that its first nonzero entry is +1.
pub fn canonical_direction(v: &RatVector) -> Result<RatVector> {
    let lead = v.iter().find(|x| !x.is_zero()).ok_or(Error::ZeroVector)?;
    Ok(v.scale(&lead.recip()))
}

/// Scales `v` by a positive factor so that its first nonzero entry is ±1.
pub fn positive_direction(v: &RatVector) -> Result<RatVector> {
    let lead = v.iter().find(|x| !x.is_zero()).ok_or(Error::ZeroVector)?;
    Ok(v.scale(&lead.abs().recip()))
}

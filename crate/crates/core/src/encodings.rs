//! Code generators (Gray, zig-zag, moment curve, exotic) and the convex
//! position and hole-free predicates.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Constraint, LpStatus, Polyhedron};
use crate::numerics::{int, rat, RatVector, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingKind {
    Gray,
    Zigzag,
    Moment,
    Exotic,
    Custom,
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EncodingKind::Gray => "gray",
            EncodingKind::Zigzag => "zigzag",
            EncodingKind::Moment => "moment",
            EncodingKind::Exotic => "exotic",
            EncodingKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// An ordered list of distinct codes, one per alternative.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "EncodingDoc", into = "EncodingDoc")]
pub struct Encoding {
    kind: EncodingKind,
    codes: Vec<RatVector>,
    index: HashMap<RatVector, usize>,
    convex: OnceLock<bool>,
    hole_free: OnceLock<Option<bool>>,
}

#[derive(Serialize, Deserialize)]
struct EncodingDoc {
    kind: EncodingKind,
    codes: Vec<RatVector>,
}

impl TryFrom<EncodingDoc> for Encoding {
    type Error = Error;
    fn try_from(doc: EncodingDoc) -> Result<Self> {
        Encoding::new(doc.kind, doc.codes)
    }
}

impl From<Encoding> for EncodingDoc {
    fn from(e: Encoding) -> Self {
        EncodingDoc { kind: e.kind, codes: e.codes }
    }
}

impl PartialEq for Encoding {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.codes == other.codes
    }
}

impl Encoding {
    pub fn new(kind: EncodingKind, codes: Vec<RatVector>) -> Result<Self> {
        let Some(first) = codes.first() else {
            return Err(Error::Encoding("an encoding needs at least one code".into()));
        };
        let r = first.len();
        let mut index = HashMap::with_capacity(codes.len());
        for (i, h) in codes.iter().enumerate() {
            if h.len() != r {
                return Err(Error::Dimension { expected: r, found: h.len() });
            }
            if index.insert(h.clone(), i).is_some() {
                return Err(Error::Encoding(format!("code {} repeats {}", i + 1, h)));
            }
        }
        Ok(Encoding { kind, codes, index, convex: OnceLock::new(), hole_free: OnceLock::new() })
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn codes(&self) -> &[RatVector] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> &RatVector {
        &self.codes[i]
    }

    /// Number of codes.
    pub fn d(&self) -> usize {
        self.codes.len()
    }

    /// Dimension of the code space.
    pub fn r(&self) -> usize {
        self.codes[0].len()
    }

    /// 0-based position of `z` among the codes.
    pub fn position(&self, z: &RatVector) -> Option<usize> {
        self.index.get(z).copied()
    }

    pub fn contains(&self, z: &RatVector) -> bool {
        self.index.contains_key(z)
    }

    pub fn is_integral(&self) -> bool {
        self.codes.iter().all(RatVector::is_integral)
    }

    /// First `d` codes, keeping the kind.
    pub fn truncate(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.d() {
            return Err(Error::Encoding(format!("cannot take {d} of {} codes", self.d())));
        }
        Encoding::new(self.kind, self.codes[..d].to_vec())
    }

    pub fn is_convex_position(&self) -> bool {
        *self.convex.get_or_init(|| is_convex_position(&self.codes))
    }

    pub fn is_hole_free(&self) -> Result<bool> {
        self.hole_free
            .get_or_init(|| is_hole_free(&self.codes).ok())
            .ok_or_else(|| Error::Encoding("hole-freeness needs integer codes".into()))
    }
}

/// Rows of `K^r`, the reflected binary Gray code.
pub fn gray_code(r: usize) -> Result<Encoding> {
    if r == 0 {
        return Err(Error::Encoding("Gray code needs r ≥ 1".into()));
    }
    let mut k: Vec<RatVector> = vec![RatVector::from_ints(&[0]), RatVector::from_ints(&[1])];
    for _ in 1..r {
        let mut next = Vec::with_capacity(2 * k.len());
        for row in &k {
            let mut v = row.clone();
            v.push(Rational::zero());
            next.push(v);
        }
        for row in k.iter().rev() {
            let mut v = row.clone();
            v.push(Rational::one());
            next.push(v);
        }
        k = next;
    }
    Encoding::new(EncodingKind::Gray, k)
}

/// Rows of `C^r`, the zig-zag code.
pub fn zigzag_code(r: usize) -> Result<Encoding> {
    if r == 0 {
        return Err(Error::Encoding("zig-zag code needs r ≥ 1".into()));
    }
    let mut c: Vec<RatVector> = vec![RatVector::from_ints(&[0]), RatVector::from_ints(&[1])];
    for _ in 1..r {
        let last = c.last().expect("nonempty").clone();
        let mut next = Vec::with_capacity(2 * c.len());
        for row in &c {
            let mut v = row.clone();
            v.push(Rational::zero());
            next.push(v);
        }
        for row in &c {
            let mut v = row.add(&last);
            v.push(Rational::one());
            next.push(v);
        }
        c = next;
    }
    Encoding::new(EncodingKind::Zigzag, c)
}

fn log2_ceil(d: usize) -> usize {
    (usize::BITS - (d.max(2) - 1).leading_zeros()) as usize
}

/// First `d` Gray codes in dimension ⌈log₂ d⌉ (at least 1).
pub fn gray_code_d(d: usize) -> Result<Encoding> {
    gray_code(log2_ceil(d))?.truncate(d)
}

/// First `d` zig-zag codes in dimension ⌈log₂ d⌉ (at least 1).
pub fn zigzag_code_d(d: usize) -> Result<Encoding> {
    zigzag_code(log2_ceil(d))?.truncate(d)
}

/// Codes `(i, i²)` for `i = 1..=d`.
pub fn moment_code(d: usize) -> Result<Encoding> {
    if d == 0 {
        return Err(Error::Encoding("moment code needs d ≥ 1".into()));
    }
    let codes = (1..=d as i64).map(|i| RatVector::from_ints(&[i, i * i])).collect();
    Encoding::new(EncodingKind::Moment, codes)
}

/// The two-dimensional exotic code with `d = 4r` codes.
pub fn exotic_code(d: usize) -> Result<Encoding> {
    if d == 0 || !d.is_multiple_of(4) {
        return Err(Error::Encoding(format!("exotic code needs d divisible by 4, got {d}")));
    }
    let r = (d / 4) as i64;
    let mut codes = Vec::with_capacity(d);
    for k in 1..=r {
        let low = rat((k - 1) * (k - 2 * r - 2), 2);
        let high = rat(-k * (k - 2 * r - 1), 2);
        codes.push(RatVector(vec![int(k - r - 1), low.clone()]));
        codes.push(RatVector(vec![int(r - k + 1), low]));
        codes.push(RatVector(vec![int(r - k + 1), high.clone()]));
        codes.push(RatVector(vec![int(k - r), high]));
    }
    Encoding::new(EncodingKind::Exotic, codes)
}

/// Whether `z` is a convex combination of `points`, by one exact LP.
pub fn in_convex_hull(points: &[RatVector], z: &RatVector) -> bool {
    if points.is_empty() {
        return false;
    }
    let k = points.len();
    let mut p = Polyhedron::new(k);
    for j in 0..k {
        p.nonneg(j);
    }
    p.push(Constraint::eq(RatVector(vec![Rational::one(); k]), Rational::one()));
    for c in 0..z.len() {
        let row = points.iter().map(|h| h[c].clone()).collect();
        p.push(Constraint::eq(row, z[c].clone()));
    }
    p.maximize(RatVector::zeros(k)).status == LpStatus::Optimal
}

/// Every code is a vertex of the hull of the codes.
pub fn is_convex_position(codes: &[RatVector]) -> bool {
    (0..codes.len()).all(|i| {
        let others: Vec<RatVector> =
            codes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, h)| h.clone()).collect();
        !in_convex_hull(&others, &codes[i])
    })
}

/// Every integer point in the hull of the codes is a code.
pub fn is_hole_free(codes: &[RatVector]) -> Result<bool> {
    if !codes.iter().all(RatVector::is_integral) {
        return Err(Error::Encoding("hole-freeness needs integer codes".into()));
    }
    let r = codes[0].len();
    let lo: Vec<i64> = (0..r)
        .map(|c| codes.iter().map(|h| h[c].to_integer()).min().expect("nonempty").try_into().unwrap())
        .collect();
    let hi: Vec<i64> = (0..r)
        .map(|c| codes.iter().map(|h| h[c].to_integer()).max().expect("nonempty").try_into().unwrap())
        .collect();
    let known: std::collections::HashSet<&RatVector> = codes.iter().collect();
    let mut cur = lo.clone();
    loop {
        let z = RatVector::from_ints(&cur);
        if !known.contains(&z) && in_convex_hull(codes, &z) {
            return Ok(false);
        }
        let mut c = 0;
        loop {
            if c == r {
                return Ok(true);
            }
            if cur[c] < hi[c] {
                cur[c] += 1;
                break;
            }
            cur[c] = lo[c];
            c += 1;
        }
    }
}

/// Inequalities `c^i·z ≤ b^i` valid for every exotic code except `h^i`,
/// which violates it strictly. Each certificate is checked before returning.
pub fn separation_certificates_exotic(r: usize) -> Result<Vec<(RatVector, Rational)>> {
    if r < 2 {
        return Err(Error::Encoding("separation certificates need r ≥ 2".into()));
    }
    let enc = exotic_code(4 * r)?;
    let ri = r as i64;
    let mut dirs = Vec::with_capacity(4 * r);
    for k in 1..=ri {
        let a = (ri - k + 2) + (ri - k + 1);
        let b = (ri - k + 1) + (ri - k);
        dirs.push(RatVector::from_ints(&[-a, -2]));
        dirs.push(RatVector::from_ints(&[a, -2]));
        dirs.push(RatVector::from_ints(&[b, 2]));
        dirs.push(RatVector::from_ints(&[-b, 2]));
    }
    let mut out = Vec::with_capacity(4 * r);
    for (i, c) in dirs.into_iter().enumerate() {
        let partner = if i < 4 { i + 4 } else { i - 4 };
        let b = c.dot(enc.code(partner));
        if c.dot(enc.code(i)) <= b {
            return Err(Error::Certificate { index: i + 1, reason: "own code is not cut off".into() });
        }
        if let Some(j) = (0..enc.d()).find(|&j| j != i && c.dot(enc.code(j)) > b) {
            return Err(Error::Certificate { index: i + 1, reason: format!("code {} violates it", j + 1) });
        }
        out.push((c, b));
    }
    Ok(out)
}

//! Branching schemes over the control variables.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::encodings::{exotic_code, moment_code, Encoding, EncodingKind};
use crate::error::{Error, Result};
use crate::lp::{convex_hull, Cmp, Constraint, Polyhedron};
use crate::numerics::{int, is_integer, RatVector, Rational};

/// A polyhedron in code space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRelaxation {
    pub r: usize,
    pub constraints: Vec<Constraint>,
    /// `(ℓ, u)` when this is `Ψ_d(ℓ, u)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(usize, usize)>,
}

impl CodeRelaxation {
    pub fn whole(r: usize) -> Self {
        CodeRelaxation { r, constraints: Vec::new(), interval: None }
    }

    pub fn contains(&self, z: &RatVector) -> bool {
        z.len() == self.r && self.constraints.iter().all(|c| c.holds(z))
    }

    /// This relaxation with extra constraints.
    pub fn with(&self, extra: impl IntoIterator<Item = Constraint>) -> Self {
        let mut constraints = self.constraints.clone();
        constraints.extend(extra);
        CodeRelaxation { r: self.r, constraints, interval: None }
    }

    pub fn polyhedron(&self) -> Polyhedron {
        let mut p = Polyhedron::new(self.r);
        for c in &self.constraints {
            p.push(c.clone());
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        !self.polyhedron().is_feasible()
    }

    pub fn codes_inside<'a>(&self, h: &'a Encoding) -> Vec<&'a RatVector> {
        h.codes().iter().filter(|c| self.contains(c)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    Variable,
    Wide,
    TwoTerm,
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchKind::Variable => "variable",
            BranchKind::Wide => "wide",
            BranchKind::TwoTerm => "two-term",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchOutcome {
    Verified,
    Split { q1: CodeRelaxation, q2: CodeRelaxation, kind: BranchKind },
}

fn axis(r: usize, k: usize, cmp: Cmp, rhs: Rational) -> Constraint {
    Constraint { coeffs: RatVector::unit(r, k), cmp, rhs }
}

fn floor(x: &Rational) -> Rational {
    x.floor()
}

/// Rounds the lowest-index fractional component of `ẑ`.
pub fn branch_variable(q: &CodeRelaxation, h: &Encoding, zhat: &RatVector) -> Result<BranchOutcome> {
    if !q.contains(zhat) {
        return Err(Error::Branching(format!("{zhat} lies outside the code relaxation")));
    }
    if h.contains(zhat) {
        return Ok(BranchOutcome::Verified);
    }
    let Some(k) = zhat.iter().position(|x| !is_integer(x)) else {
        return Err(Error::Branching(format!("integral point {zhat} is not a code")));
    };
    let lo = floor(&zhat[k]);
    let hi = &lo + Rational::one();
    Ok(BranchOutcome::Split {
        q1: q.with([axis(q.r, k, Cmp::Le, lo)]),
        q2: q.with([axis(q.r, k, Cmp::Ge, hi)]),
        kind: BranchKind::Variable,
    })
}

/// `Ψ_d(ℓ, u)`: the hull of the moment codes with `ℓ ≤ z₁ ≤ u`.
///
/// The explicit bounds on `z₁` matter when `u = ℓ + 1`, where the tangent
/// and chord rows coincide.
pub fn psi(d: usize, l: usize, u: usize) -> Result<CodeRelaxation> {
    if l == 0 || l > u || u > d {
        return Err(Error::Branching(format!("Ψ needs 1 ≤ ℓ ≤ u ≤ d, got ℓ={l} u={u} d={d}")));
    }
    let (li, ui) = (l as i64, u as i64);
    let mut cs = Vec::new();
    if l == u {
        cs.push(axis(2, 0, Cmp::Eq, int(li)));
        cs.push(axis(2, 1, Cmp::Eq, int(li * li)));
    } else {
        for i in li..ui {
            // z₂ − i² ≥ (2i+1)(z₁ − i)
            cs.push(Constraint::ge(RatVector::from_ints(&[-(2 * i + 1), 1]), int(-i * i - i)));
        }
        // (u−ℓ)(z₂ − ℓ²) ≤ (u²−ℓ²)(z₁ − ℓ), divided by u − ℓ.
        cs.push(Constraint::le(RatVector::from_ints(&[-(ui + li), 1]), int(-ui * li)));
        cs.push(axis(2, 0, Cmp::Ge, int(li)));
        cs.push(axis(2, 0, Cmp::Le, int(ui)));
    }
    Ok(CodeRelaxation { r: 2, constraints: cs, interval: Some((l, u)) })
}

/// Splits `Ψ_d(ℓ, u)` at `⌊ẑ₁⌋`.
pub fn branch_moment(q: &CodeRelaxation, d: usize, zhat: &RatVector) -> Result<BranchOutcome> {
    let (l, u) = q.interval.ok_or_else(|| Error::Branching("moment branching needs a Ψ relaxation".into()))?;
    if zhat.len() != 2 {
        return Err(Error::Dimension { expected: 2, found: zhat.len() });
    }
    if is_integer(&zhat[0]) && zhat[1] == &zhat[0] * &zhat[0] && zhat[0] >= int(l as i64) && zhat[0] <= int(u as i64)
    {
        return Ok(BranchOutcome::Verified);
    }
    let f = floor(&zhat[0]);
    if f < int(l as i64) || f >= int(u as i64) {
        return Err(Error::Branching(format!("⌊ẑ₁⌋ = {f} falls outside [{l}, {u})")));
    }
    let f: usize = f.to_integer().try_into().expect("small index");
    Ok(BranchOutcome::Split { q1: psi(d, l, f)?, q2: psi(d, f + 1, u)?, kind: BranchKind::TwoTerm })
}

/// `Conv(H)` as facet inequalities and equations.
pub fn hull_relaxation(h: &Encoding) -> CodeRelaxation {
    let hd = convex_hull(h.codes());
    let mut cs: Vec<Constraint> = hd.facets.into_iter().map(|(a, b)| Constraint::le(a, b)).collect();
    cs.extend(hd.equations.into_iter().map(|(a, b)| Constraint::eq(a, b)));
    CodeRelaxation { r: h.r(), constraints: cs, interval: None }
}

/// Per-level lookups for the exotic code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExoticTables {
    /// `(level, west, east)` sorted by level; each level holds exactly two codes.
    levels: Vec<(Rational, Rational, Rational)>,
    hull: CodeRelaxation,
}

impl ExoticTables {
    pub fn new(h: &Encoding) -> Result<Self> {
        if h.r() != 2 {
            return Err(Error::Dimension { expected: 2, found: h.r() });
        }
        let mut levels: Vec<(Rational, Rational, Rational)> = Vec::new();
        let mut sorted: Vec<&RatVector> = h.codes().iter().collect();
        sorted.sort_by(|a, b| (&a[1], &a[0]).cmp(&(&b[1], &b[0])));
        for c in sorted {
            match levels.last_mut() {
                Some((y, _, east)) if *y == c[1] => *east = c[0].clone(),
                _ => levels.push((c[1].clone(), c[0].clone(), c[0].clone())),
            }
        }
        Ok(ExoticTables { levels, hull: hull_relaxation(h) })
    }

    /// `Conv(H)` as facet inequalities.
    pub fn hull(&self) -> &CodeRelaxation {
        &self.hull
    }

    /// Sorted second-coordinate values of the codes.
    pub fn levels(&self) -> Vec<Rational> {
        self.levels.iter().map(|(y, _, _)| y.clone()).collect()
    }
}

/// Line through `p` and `q`; keeps the side `(q₁−p₁)(z₂−p₂) ≥ (q₂−p₂)(z₁−p₁)`.
fn half_plane(p: (&Rational, &Rational), q: (&Rational, &Rational)) -> Constraint {
    let dx = q.0 - p.0;
    let dy = q.1 - p.1;
    let rhs = &dx * p.1 - &dy * p.0;
    Constraint::ge(RatVector(vec![-dy, dx]), rhs)
}

/// The three-case scheme for the exotic code.
pub fn branch_exotic(
    q: &CodeRelaxation,
    tables: &ExoticTables,
    h: &Encoding,
    zhat: &RatVector,
) -> Result<BranchOutcome> {
    if !tables.hull.contains(zhat) {
        return Err(Error::Branching(format!("{zhat} lies outside the hull of the codes")));
    }
    if h.contains(zhat) {
        return Ok(BranchOutcome::Verified);
    }
    let (z1, z2) = (&zhat[0], &zhat[1]);
    if !is_integer(z1) {
        let lo = floor(z1);
        let hi = &lo + Rational::one();
        return Ok(BranchOutcome::Split {
            q1: q.with([axis(2, 0, Cmp::Le, lo)]),
            q2: q.with([axis(2, 0, Cmp::Ge, hi)]),
            kind: BranchKind::Variable,
        });
    }
    let pos = tables.levels.partition_point(|(y, _, _)| y < z2);
    let on_level = pos < tables.levels.len() && &tables.levels[pos].0 == z2;
    if !on_level {
        if pos == 0 || pos == tables.levels.len() {
            return Err(Error::Branching(format!("{zhat} has no code level on both sides")));
        }
        let below = tables.levels[pos - 1].0.clone();
        let above = tables.levels[pos].0.clone();
        return Ok(BranchOutcome::Split {
            q1: q.with([axis(2, 1, Cmp::Le, below)]),
            q2: q.with([axis(2, 1, Cmp::Ge, above)]),
            kind: BranchKind::Wide,
        });
    }
    let (level, west, east) = &tables.levels[pos];
    let Some((above, _, ne)) = tables.levels.get(pos + 1) else {
        return Err(Error::Branching(format!("{zhat} sits on the top level, which has no holes")));
    };
    // NE is the eastern code one level up; SW the western code one level down.
    let q1 = q.with([half_plane((west, level), (ne, above))]);
    let q2 = if pos > 0 {
        let (below, sw, _) = &tables.levels[pos - 1];
        q.with([half_plane((east, level), (sw, below))])
    } else {
        // Bottom level: nothing lies below, so the eastern code is cut out on its own.
        q.with([axis(2, 1, Cmp::Le, level.clone()), axis(2, 0, Cmp::Ge, east.clone())])
    };
    Ok(BranchOutcome::Split { q1, q2, kind: BranchKind::TwoTerm })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Variable,
    Moment,
    Exotic,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Variable => "variable",
            SchemeKind::Moment => "moment",
            SchemeKind::Exotic => "exotic",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variable" => Ok(SchemeKind::Variable),
            "moment" => Ok(SchemeKind::Moment),
            "exotic" => Ok(SchemeKind::Exotic),
            other => Err(Error::Io(format!("unknown scheme {other:?}"))),
        }
    }
}

/// A scheme bound to an encoding it is valid for.
#[derive(Clone, Debug)]
pub enum Scheme {
    /// Holds `Conv(H)`, whose integer points are exactly the codes.
    Variable(Box<CodeRelaxation>),
    Moment { d: usize },
    Exotic(Box<ExoticTables>),
}

impl Scheme {
    pub fn new(kind: SchemeKind, h: &Encoding) -> Result<Self> {
        let reject = |scheme: &'static str, reason: String| Err(Error::IncompatibleScheme { scheme, reason });
        match kind {
            SchemeKind::Variable => {
                if !h.is_integral() {
                    return reject("variable", "codes must be integral".into());
                }
                if !h.is_hole_free()? {
                    return reject("variable", "codes must be hole-free".into());
                }
                Ok(Scheme::Variable(Box::new(hull_relaxation(h))))
            }
            SchemeKind::Moment => {
                if h.codes() != moment_code(h.d())?.codes() {
                    return reject("moment", format!("codes must be (i, i²) for i = 1..{}", h.d()));
                }
                Ok(Scheme::Moment { d: h.d() })
            }
            SchemeKind::Exotic => {
                let want = exotic_code(h.d()).map_err(|e| Error::IncompatibleScheme {
                    scheme: "exotic",
                    reason: e.to_string(),
                })?;
                if h.codes() != want.codes() {
                    return reject("exotic", "codes must be the exotic code of the same size".into());
                }
                Ok(Scheme::Exotic(Box::new(ExoticTables::new(h)?)))
            }
        }
    }

    /// The scheme naturally paired with an encoding kind.
    pub fn default_for(h: &Encoding) -> Result<Self> {
        let kind = match h.kind() {
            EncodingKind::Moment => SchemeKind::Moment,
            EncodingKind::Exotic => SchemeKind::Exotic,
            _ => SchemeKind::Variable,
        };
        Scheme::new(kind, h)
    }

    pub fn kind(&self) -> SchemeKind {
        match self {
            Scheme::Variable(_) => SchemeKind::Variable,
            Scheme::Moment { .. } => SchemeKind::Moment,
            Scheme::Exotic(_) => SchemeKind::Exotic,
        }
    }

    /// Starting code relaxation: `Conv(H)`, or `Ψ_d(1, d)` for the moment scheme.
    pub fn root(&self, _h: &Encoding) -> CodeRelaxation {
        match self {
            Scheme::Variable(hull) => (**hull).clone(),
            Scheme::Moment { d } => psi(*d, 1, *d).expect("d ≥ 1"),
            Scheme::Exotic(t) => t.hull.clone(),
        }
    }

    pub fn branch(&self, q: &CodeRelaxation, h: &Encoding, zhat: &RatVector) -> Result<BranchOutcome> {
        match self {
            Scheme::Variable(_) => branch_variable(q, h, zhat),
            Scheme::Moment { d } => branch_moment(q, *d, zhat),
            Scheme::Exotic(t) => branch_exotic(q, t, h, zhat),
        }
    }
}

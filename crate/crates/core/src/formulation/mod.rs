//! LP relaxations of embedding formulations as explicit constraint systems.

mod bigm;
mod builders;
mod export;

pub use bigm::{build_bigm_moment, compute_bigm, BigMSystem};
pub use builders::{build_2d, build_annulus, build_moment_curve, build_sos2_exotic};
pub use export::{export, import_json, ExportFormat};

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cdc::{edge_set, CdcFamily};
use crate::encodings::{Encoding, EncodingKind};
use crate::error::{Error, Result};
use crate::lp::{Constraint, Polyhedron};
use crate::numerics::{
    affine_hull, canonical_direction, nullspace_basis, rank, rref, serde_rational, RatMatrix, RatVector,
    Rational,
};

/// `Σ lower_v λ_v ≤ direction·z ≤ Σ upper_v λ_v`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSidedRow {
    pub direction: RatVector,
    pub lower: RatVector,
    pub upper: RatVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One side of a row as `coeffs·(λ, z) ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneSided {
    pub row: usize,
    pub side: Side,
    pub coeffs: RatVector,
}

impl TwoSidedRow {
    /// Builds the row whose λ-coefficients are min/max of `direction·h^s` over the sets containing each component.
    pub fn from_direction(fam: &CdcFamily, codes: &[RatVector], direction: RatVector) -> Self {
        let vals: Vec<Rational> = codes.iter().map(|h| direction.dot(h)).collect();
        let mut lower = RatVector::zeros(fam.n());
        let mut upper = RatVector::zeros(fam.n());
        for v in 0..fam.n() {
            let ms = fam.members(v);
            lower[v] = ms.iter().map(|&s| &vals[s]).min().expect("component in some set").clone();
            upper[v] = ms.iter().map(|&s| &vals[s]).max().expect("component in some set").clone();
        }
        TwoSidedRow { direction, lower, upper, label: None }
    }

    pub fn side(&self, side: Side) -> RatVector {
        let (lam, z) = match side {
            Side::Lower => (self.lower.neg(), self.direction.clone()),
            Side::Upper => (self.upper.clone(), self.direction.neg()),
        };
        let mut c = lam;
        c.extend(z.0);
        c
    }

    /// Number of nonzero coefficients on each side, over (λ, z).
    fn support(&self, side: Side) -> usize {
        self.side(side).iter().filter(|x| !x.is_zero()).count()
    }
}

/// Relaxation over `(λ, z) ∈ R^n × R^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearFormulation {
    pub n: usize,
    pub r: usize,
    pub rows: Vec<TwoSidedRow>,
    pub hull_equations: Vec<HullEquation>,
    pub has_simplex: bool,
    /// λ components forced to zero (artificial components for disconnected families).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_components: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_bounds: Option<Vec<ZBound>>,
    pub builder: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<EncodingKind>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullEquation {
    pub a: RatVector,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZBound {
    #[serde(with = "serde_rational::option")]
    pub lower: Option<Rational>,
    #[serde(with = "serde_rational::option")]
    pub upper: Option<Rational>,
}

impl LinearFormulation {
    pub fn new(n: usize, r: usize, builder: &str) -> Self {
        LinearFormulation {
            n,
            r,
            rows: Vec::new(),
            hull_equations: Vec::new(),
            has_simplex: true,
            zero_components: Vec::new(),
            z_bounds: None,
            builder: builder.to_string(),
            encoding: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.r
    }

    /// Both sides of every row, in row order.
    pub fn one_sided(&self) -> Vec<OneSided> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                [Side::Lower, Side::Upper].map(|side| OneSided { row: i, side, coeffs: row.side(side) })
            })
            .collect()
    }

    /// One-sided inequalities with at least two nonzero coefficients.
    pub fn general_inequality_count(&self) -> usize {
        self.rows.iter().map(|r| [Side::Lower, Side::Upper].iter().filter(|&&s| r.support(s) >= 2).count()).sum()
    }

    /// The relaxation as a polyhedron over `(λ, z)`.
    pub fn polyhedron(&self) -> Polyhedron {
        let dim = self.dim();
        let mut p = Polyhedron::new(dim);
        for row in &self.rows {
            for side in [Side::Lower, Side::Upper] {
                p.push(Constraint::ge(row.side(side), Rational::zero()));
            }
        }
        if self.has_simplex {
            let mut ones = RatVector::zeros(dim);
            for j in 0..self.n {
                ones[j] = Rational::one();
                p.nonneg(j);
            }
            p.push(Constraint::eq(ones, Rational::one()));
        }
        for &v in &self.zero_components {
            p.upper[v] = Some(Rational::zero());
        }
        for eq in &self.hull_equations {
            p.push(Constraint::eq(eq.a.clone(), eq.beta.clone()).embed(dim, self.n));
        }
        if let Some(bounds) = &self.z_bounds {
            for (k, b) in bounds.iter().enumerate() {
                p.lower[self.n + k] = b.lower.clone();
                p.upper[self.n + k] = b.upper.clone();
            }
        }
        p
    }

    fn set_hull(&mut self, codes: &[RatVector]) {
        self.hull_equations =
            affine_hull(codes).0.into_iter().map(|(a, beta)| HullEquation { a, beta }).collect();
    }
}

/// One normal per hyperplane of `span(L_basis)` spanned by members of `c`.
///
/// When `dim L = 1` the only such hyperplane is `{0}`, spanned by the empty
/// set, and its normal within `L` is the generator of `L`.
pub fn spanned_hyperplane_normals(c: &[RatVector], l_basis: &[RatVector]) -> Result<Vec<RatVector>> {
    let Some(first) = l_basis.first().or(c.first()) else {
        return Ok(Vec::new());
    };
    let r = first.len();
    let mut basis = l_basis.to_vec();
    rref(&mut basis, r);
    let k = basis.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let dirs: Vec<RatVector> = c
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| canonical_direction(v).expect("nonzero"))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lm = RatMatrix::new(r, basis.clone())?;
    for v in &dirs {
        let mut ext = basis.clone();
        ext.push(v.clone());
        if rank(&RatMatrix::new(r, ext)?) != k {
            return Err(Error::Formulation(format!("{v} lies outside the given span")));
        }
    }
    if rank(&RatMatrix::new(r, dirs.clone())?) != k {
        return Err(Error::Formulation("differences do not span the given space".into()));
    }

    let normal_to = |subset: &[&RatVector]| -> Option<RatVector> {
        // b = Σ α_j ℓ_j with b·s = 0 for every s in the subset.
        let gram: Vec<RatVector> = subset.iter().map(|s| lm.mul_vec(s)).collect();
        let ns = if gram.is_empty() {
            vec![RatVector::unit(k, 0)]
        } else {
            nullspace_basis(&RatMatrix::new(k, gram).ok()?)
        };
        if ns.len() != 1 {
            return None;
        }
        let mut b = RatVector::zeros(r);
        for (j, a) in ns[0].iter().enumerate() {
            b = b.add(&basis[j].scale(a));
        }
        Some(canonical_direction(&b).expect("nonzero normal"))
    };

    let mut out = BTreeSet::new();
    let mut idx: Vec<usize> = (0..k - 1).collect();
    if k - 1 > dirs.len() {
        return Ok(Vec::new());
    }
    loop {
        let subset: Vec<&RatVector> = idx.iter().map(|&i| &dirs[i]).collect();
        let independent =
            subset.is_empty() || rank(&RatMatrix::new(r, subset.iter().map(|v| (*v).clone()).collect())?) == k - 1;
        if independent {
            if let Some(b) = normal_to(&subset) {
                out.insert(b);
            }
        }
        // Next (k−1)-combination in lexicographic order.
        let m = idx.len();
        let mut i = m;
        while i > 0 && idx[i - 1] == dirs.len() - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out.into_iter().collect())
}

fn check_sizes(fam: &CdcFamily, h: &Encoding) -> Result<()> {
    if fam.d() != h.d() {
        return Err(Error::Dimension { expected: fam.d(), found: h.d() });
    }
    Ok(())
}

fn check_convex(h: &Encoding) -> Result<()> {
    if h.is_convex_position() {
        return Ok(());
    }
    let index = (0..h.d())
        .find(|&i| {
            let others: Vec<_> = (0..h.d()).filter(|&j| j != i).map(|j| h.code(j).clone()).collect();
            crate::encodings::in_convex_hull(&others, h.code(i))
        })
        .unwrap_or(0);
    Err(Error::NotConvexPosition { index: index + 1 })
}

/// The general construction for any family and any encoding in convex position.
pub fn build_general(fam: &CdcFamily, h: &Encoding) -> Result<LinearFormulation> {
    check_sizes(fam, h)?;
    check_convex(h)?;
    let (_, connected) = edge_set(fam);
    let work = if connected { fam.clone() } else { fam.with_artificial_component() };
    let (edges, _) = edge_set(&work);
    let c: Vec<RatVector> = edges.iter().map(|&(i, j)| h.code(j).sub(h.code(i))).collect();
    let mut basis = c.clone();
    rref(&mut basis, h.r());
    let normals = spanned_hyperplane_normals(&c, &basis)?;

    let mut f = LinearFormulation::new(work.n(), h.r(), "general");
    f.encoding = Some(h.kind());
    f.rows = normals.into_iter().map(|b| TwoSidedRow::from_direction(&work, h.codes(), b)).collect();
    f.set_hull(h.codes());
    if !connected {
        f.zero_components.push(fam.n());
    }
    Ok(f)
}

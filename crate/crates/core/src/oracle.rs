//! Brute-force checks of formulations and optima.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cdc::{CdcFamily, HRepDisjunction, VertexMap};
use crate::encodings::Encoding;
use crate::error::{Error, Result};
use crate::formulation::{LinearFormulation, Side};
use crate::lp::{enumerate_vertices, LpStatus, Sense};
use crate::numerics::{affine_hull, RatVector, Rational};

/// An extreme point `(e^v, h^i)` of the embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingPoint {
    pub vertex: usize,
    pub alternative: usize,
    pub point: RatVector,
}

pub fn embedding_points(fam: &CdcFamily, h: &Encoding) -> Vec<EmbeddingPoint> {
    let n = fam.n();
    let mut out = Vec::new();
    for (i, set) in fam.sets().iter().enumerate() {
        for &v in set {
            let mut p = RatVector::unit(n, v);
            p.extend(h.code(i).iter().cloned());
            out.push(EmbeddingPoint { vertex: v, alternative: i, point: p });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub detail: String,
    pub point: RatVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

impl VerificationReport {
    fn from_witnesses(check: &str, witnesses: Vec<Witness>) -> Self {
        VerificationReport { check: check.into(), passed: witnesses.is_empty(), witnesses }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, if self.passed { "pass" } else { "fail" })?;
        for w in &self.witnesses {
            write!(f, "\n  {} at {}", w.detail, w.point)?;
        }
        Ok(())
    }
}

/// Pads a point of the original family to the formulation's λ width.
fn lift(f: &LinearFormulation, p: &RatVector, fam_n: usize) -> RatVector {
    let mut out = RatVector::zeros(f.dim());
    for j in 0..fam_n {
        out[j] = p[j].clone();
    }
    for k in 0..f.r {
        out[f.n + k] = p[fam_n + k].clone();
    }
    out
}

/// Every row of `f` holds at every embedding point.
pub fn check_valid(f: &LinearFormulation, fam: &CdcFamily, h: &Encoding) -> VerificationReport {
    let poly = f.polyhedron();
    let mut witnesses = Vec::new();
    for ep in embedding_points(fam, h) {
        let p = lift(f, &ep.point, fam.n());
        if let Some(k) = poly.constraints.iter().position(|c| !c.holds(&p)) {
            witnesses.push(Witness {
                detail: format!("constraint {} fails at vertex {} of alternative {}", k + 1, ep.vertex + 1, ep.alternative + 1),
                point: p,
            });
        } else if !poly.contains(&p) {
            witnesses.push(Witness { detail: "a variable bound fails".into(), point: p });
        }
    }
    VerificationReport::from_witnesses("valid", witnesses)
}

/// Every vertex of the relaxation carries a code.
pub fn check_ideal(f: &LinearFormulation, h: &Encoding) -> VerificationReport {
    let witnesses = match enumerate_vertices(&f.polyhedron()) {
        Ok(vs) => vs
            .into_iter()
            .filter(|v| !h.contains(&RatVector(v[f.n..].to_vec())))
            .map(|v| Witness { detail: "vertex with a non-code control value".into(), point: v })
            .collect(),
        Err(e) => vec![Witness { detail: format!("vertex enumeration failed: {e}"), point: RatVector::zeros(f.dim()) }],
    };
    VerificationReport::from_witnesses("ideal", witnesses)
}

/// Each code slice `{λ : (λ, h^i) ∈ F}` equals the face `P(T^i)`.
pub fn check_projection(f: &LinearFormulation, fam: &CdcFamily, h: &Encoding) -> VerificationReport {
    let mut witnesses = Vec::new();
    for i in 0..fam.d() {
        let mut slice = f.polyhedron();
        for k in 0..f.r {
            let v = h.code(i)[k].clone();
            slice.bound(f.n + k, Some(v.clone()), Some(v));
        }
        for &v in fam.set(i) {
            let mut p = RatVector::unit(f.dim(), v);
            for k in 0..f.r {
                p[f.n + k] = h.code(i)[k].clone();
            }
            if !slice.contains(&p) {
                witnesses.push(Witness {
                    detail: format!("slice {} misses vertex {}", i + 1, v + 1),
                    point: p,
                });
            }
        }
        let members = fam.set(i);
        let outside: Vec<usize> = (0..fam.n()).filter(|w| !members.contains(w)).collect();
        if f.has_simplex && !outside.is_empty() {
            // With λ ≥ 0 the outside components all vanish iff their sum does.
            let mut sum = RatVector::zeros(f.dim());
            for &w in &outside {
                sum[w] = Rational::one();
            }
            let res = slice.maximize(sum);
            if res.status == LpStatus::Optimal && res.value.as_ref().is_some_and(|v| v.is_zero()) {
                continue;
            }
        }
        for w in outside {
            let res = slice.maximize(RatVector::unit(f.dim(), w));
            match res.status {
                LpStatus::Optimal if res.value.as_ref().is_some_and(|v| v.is_zero()) => {}
                LpStatus::Infeasible => {}
                LpStatus::Optimal => witnesses.push(Witness {
                    detail: format!("slice {} reaches λ{} = {}", i + 1, w + 1, res.value.expect("value")),
                    point: res.point.expect("point"),
                }),
                LpStatus::Unbounded => witnesses.push(Witness {
                    detail: format!("slice {} is unbounded in λ{}", i + 1, w + 1),
                    point: RatVector::zeros(f.dim()),
                }),
            }
        }
    }
    VerificationReport::from_witnesses("projection", witnesses)
}

/// Runs the three formulation checks.
pub fn verify_formulation(f: &LinearFormulation, fam: &CdcFamily, h: &Encoding) -> Vec<VerificationReport> {
    vec![check_valid(f, fam, h), check_ideal(f, h), check_projection(f, fam, h)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowClass {
    Facet,
    TightNonfacet,
    NeverTight,
}

/// Where a classified inequality came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowOrigin {
    Row { row: usize, side: Side },
    Bound { variable: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedRow {
    pub origin: RowOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// `coeffs · (λ, z) ≥ 0`.
    pub coeffs: RatVector,
    pub class: RowClass,
}

/// Classifies every one-sided row and `λ ≥ 0` bound by its tight set.
pub fn classify_rows(f: &LinearFormulation) -> Result<Vec<ClassifiedRow>> {
    let vs = enumerate_vertices(&f.polyhedron())?;
    if vs.is_empty() {
        return Err(Error::Formulation("relaxation is empty".into()));
    }
    let dim_q = affine_hull(&vs).1;
    let classify = |coeffs: &RatVector| -> RowClass {
        let tight: Vec<RatVector> = vs.iter().filter(|v| coeffs.dot(v).is_zero()).cloned().collect();
        if tight.is_empty() {
            RowClass::NeverTight
        } else if tight.len() == vs.len() {
            // An implicit equation is tight everywhere.
            RowClass::TightNonfacet
        } else if affine_hull(&tight).1 + 1 == dim_q {
            RowClass::Facet
        } else {
            RowClass::TightNonfacet
        }
    };
    let mut out: Vec<ClassifiedRow> = f
        .one_sided()
        .into_iter()
        .map(|s| {
            let class = classify(&s.coeffs);
            ClassifiedRow {
                origin: RowOrigin::Row { row: s.row, side: s.side },
                label: f.rows[s.row].label.clone(),
                coeffs: s.coeffs,
                class,
            }
        })
        .collect();
    if f.has_simplex {
        for v in 0..f.n {
            let coeffs = RatVector::unit(f.dim(), v);
            let class = classify(&coeffs);
            out.push(ClassifiedRow { origin: RowOrigin::Bound { variable: v }, label: None, coeffs, class });
        }
    }
    Ok(out)
}

fn pick(sense: Sense, a: Option<Rational>, b: Rational) -> Rational {
    match (a, sense) {
        (None, _) => b,
        (Some(a), Sense::Max) => a.max(b),
        (Some(a), Sense::Min) => a.min(b),
    }
}

/// Optimum of `c_λ·λ + c_z·z` over the embedding, face by face.
///
/// `objective` is laid out as `(λ, z)` over the family's `n` components.
pub fn brute_force_optimum(fam: &CdcFamily, h: &Encoding, objective: &RatVector, sense: Sense) -> Result<Rational> {
    let n = fam.n();
    if objective.len() != n + h.r() {
        return Err(Error::Dimension { expected: n + h.r(), found: objective.len() });
    }
    let cz = RatVector(objective[n..].to_vec());
    let mut best = None;
    for (i, set) in fam.sets().iter().enumerate() {
        let base = cz.dot(h.code(i));
        for &v in set {
            best = Some(pick(sense, best, &base + &objective[v]));
        }
    }
    best.ok_or_else(|| Error::Family("no alternatives".into()))
}

/// Optimum of `c·x` over the union of polytopes given by vertices.
pub fn brute_force_vertices(fam: &CdcFamily, vm: &VertexMap, c: &RatVector, sense: Sense) -> Result<Rational> {
    if c.len() != vm.dim() {
        return Err(Error::Dimension { expected: vm.dim(), found: c.len() });
    }
    let mut best = None;
    for set in fam.sets() {
        for &v in set {
            best = Some(pick(sense, best, c.dot(&vm.vertices[v])));
        }
    }
    best.ok_or_else(|| Error::Family("no alternatives".into()))
}

/// Optimum of `c·x` over a union of H-polyhedra, one LP per piece.
pub fn brute_force_hrep(p: &HRepDisjunction, c: &RatVector, sense: Sense) -> Result<Option<Rational>> {
    let mut best = None;
    for piece in &p.pieces {
        let res = piece.polyhedron().optimize(c.clone(), sense);
        match res.status {
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Optimal => best = Some(pick(sense, best, res.value.expect("value"))),
        }
    }
    Ok(best)
}

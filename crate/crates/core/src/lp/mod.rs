//! Exact rational linear programming and vertex enumeration.

mod dd;
mod simplex;

pub use dd::{cone_generators, convex_hull, enumerate_vertices, ConeGenerators, HullDescription};
pub use simplex::solve_lp;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::numerics::{serde_rational, RatVector, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// `coeffs · x (cmp) rhs`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: RatVector,
    pub cmp: Cmp,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
}

impl Constraint {
    pub fn le(coeffs: RatVector, rhs: Rational) -> Self {
        Constraint { coeffs, cmp: Cmp::Le, rhs }
    }

    pub fn ge(coeffs: RatVector, rhs: Rational) -> Self {
        Constraint { coeffs, cmp: Cmp::Ge, rhs }
    }

    pub fn eq(coeffs: RatVector, rhs: Rational) -> Self {
        Constraint { coeffs, cmp: Cmp::Eq, rhs }
    }

    pub fn holds(&self, x: &RatVector) -> bool {
        let lhs = self.coeffs.dot(x);
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }

    pub fn is_tight(&self, x: &RatVector) -> bool {
        self.coeffs.dot(x) == self.rhs
    }

    /// The same constraint written over a wider variable vector, placed at `offset`.
    pub fn embed(&self, width: usize, offset: usize) -> Self {
        let mut c = RatVector::zeros(width);
        for (k, a) in self.coeffs.iter().enumerate() {
            c[offset + k] = a.clone();
        }
        Constraint { coeffs: c, cmp: self.cmp, rhs: self.rhs.clone() }
    }
}

/// `{x : constraints, lower ≤ x ≤ upper}` with `None` meaning unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    pub dim: usize,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

impl Polyhedron {
    pub fn new(dim: usize) -> Self {
        Polyhedron { dim, constraints: Vec::new(), lower: vec![None; dim], upper: vec![None; dim] }
    }

    pub fn push(&mut self, c: Constraint) {
        assert_eq!(c.coeffs.len(), self.dim, "constraint dimension mismatch");
        self.constraints.push(c);
    }

    pub fn nonneg(&mut self, j: usize) {
        self.lower[j] = Some(Rational::zero());
    }

    pub fn bound(&mut self, j: usize, lo: Option<Rational>, hi: Option<Rational>) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn contains(&self, x: &RatVector) -> bool {
        x.len() == self.dim
            && self.constraints.iter().all(|c| c.holds(x))
            && self.lower.iter().zip(x.iter()).all(|(l, v)| l.as_ref().is_none_or(|l| v >= l))
            && self.upper.iter().zip(x.iter()).all(|(u, v)| u.as_ref().is_none_or(|u| v <= u))
    }

    /// All constraints and finite bounds as `a·x ≤ b` and `a·x = b` rows.
    pub fn rows(&self) -> (Vec<(RatVector, Rational)>, Vec<(RatVector, Rational)>) {
        let mut le = Vec::new();
        let mut eq = Vec::new();
        for c in &self.constraints {
            match c.cmp {
                Cmp::Le => le.push((c.coeffs.clone(), c.rhs.clone())),
                Cmp::Ge => le.push((c.coeffs.neg(), -c.rhs.clone())),
                Cmp::Eq => eq.push((c.coeffs.clone(), c.rhs.clone())),
            }
        }
        for j in 0..self.dim {
            match (&self.lower[j], &self.upper[j]) {
                (Some(l), Some(u)) if l == u => eq.push((RatVector::unit(self.dim, j), l.clone())),
                (l, u) => {
                    if let Some(l) = l {
                        le.push((RatVector::unit(self.dim, j).neg(), -l.clone()));
                    }
                    if let Some(u) = u {
                        le.push((RatVector::unit(self.dim, j), u.clone()));
                    }
                }
            }
        }
        (le, eq)
    }

    pub fn optimize(&self, objective: RatVector, sense: Sense) -> LpResult {
        solve_lp(&LpProblem { region: self.clone(), objective, sense })
    }

    pub fn maximize(&self, objective: RatVector) -> LpResult {
        self.optimize(objective, Sense::Max)
    }

    pub fn is_feasible(&self) -> bool {
        self.optimize(RatVector::zeros(self.dim), Sense::Max).status != LpStatus::Infeasible
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    pub region: Polyhedron,
    pub objective: RatVector,
    pub sense: Sense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    pub point: Option<RatVector>,
    pub value: Option<Rational>,
    /// Indices of constraints holding with equality at `point`.
    pub tight: Vec<usize>,
}

impl LpResult {
    pub fn status_only(status: LpStatus) -> Self {
        LpResult { status, point: None, value: None, tight: Vec::new() }
    }
}

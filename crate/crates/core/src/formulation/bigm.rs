//! Big-M formulation over `(x, z)` with moment-curve control codes.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::branching::psi;
use crate::cdc::HRepDisjunction;
use crate::error::{Error, Result};
use crate::lp::{Constraint, LpStatus, Polyhedron};
use crate::numerics::{int, RatVector, Rational};

/// Fills `M^i_s` with the largest value of row `s` of piece `i` over the other pieces.
///
/// Pieces that are empty are skipped with a warning. With a single piece
/// every `M^i` is left empty.
pub fn compute_bigm(p: &HRepDisjunction) -> Result<HRepDisjunction> {
    let polys: Vec<Polyhedron> = p.pieces.iter().map(|q| q.polyhedron()).collect();
    let empty: Vec<bool> = polys.iter().map(|q| !q.is_feasible()).collect();
    for (k, &e) in empty.iter().enumerate() {
        if e {
            log::warn!("piece {} is empty and is skipped", k + 1);
        }
    }
    let mut out = p.clone();
    for i in 0..p.d() {
        let mut m = RatVector::zeros(0);
        if p.d() > 1 {
            for (s, row) in p.pieces[i].a.iter().enumerate() {
                let mut best: Option<Rational> = None;
                for k in (0..p.d()).filter(|&k| k != i && !empty[k]) {
                    let res = polys[k].maximize(row.clone());
                    match res.status {
                        LpStatus::Unbounded => return Err(Error::Unbounded),
                        LpStatus::Infeasible => continue,
                        LpStatus::Optimal => {
                            let v = res.value.expect("optimal value");
                            best = Some(best.map_or(v.clone(), |b| b.max(v)));
                        }
                    }
                }
                m.push(best.unwrap_or_else(|| p.pieces[i].b[s].clone()));
            }
        }
        out.pieces[i].m = Some(m);
    }
    Ok(out)
}

/// `A^i x ≤ b^i + (M^i − b^i)(i² − 2i z₁ + z₂)` for every piece, plus `z ∈ Ψ_d(1, d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigMSystem {
    /// Dimension of x; z occupies the two coordinates after it.
    pub m: usize,
    pub d: usize,
    pub blocks: Vec<Vec<Constraint>>,
    pub code_rows: Vec<Constraint>,
}

impl BigMSystem {
    pub fn dim(&self) -> usize {
        self.m + 2
    }

    pub fn z_offset(&self) -> usize {
        self.m
    }

    pub fn general_inequality_count(&self) -> usize {
        self.blocks
            .iter()
            .flatten()
            .chain(&self.code_rows)
            .filter(|c| c.coeffs.iter().filter(|x| !x.is_zero()).count() >= 2)
            .count()
    }

    pub fn polyhedron(&self) -> Polyhedron {
        let mut p = Polyhedron::new(self.dim());
        for c in self.blocks.iter().flatten().chain(&self.code_rows) {
            p.push(c.clone());
        }
        p
    }

    /// The x-slice at a fixed control value.
    pub fn slice(&self, z: &RatVector) -> Polyhedron {
        let mut p = self.polyhedron();
        for k in 0..2 {
            p.bound(self.m + k, Some(z[k].clone()), Some(z[k].clone()));
        }
        p
    }
}

pub fn build_bigm_moment(p: &HRepDisjunction) -> Result<BigMSystem> {
    let m = p.dim();
    let d = p.d();
    let width = m + 2;
    let mut blocks = Vec::with_capacity(d);
    for (idx, piece) in p.pieces.iter().enumerate() {
        let bigm = piece.m.as_ref().ok_or_else(|| Error::Formulation(format!("piece {} has no M", idx + 1)))?;
        let i = int(idx as i64 + 1);
        let mut block = Vec::with_capacity(piece.a.len());
        for (s, row) in piece.a.iter().enumerate() {
            let b = &piece.b[s];
            // Validity needs M ≥ b; the raw value can fall below b when pieces are far apart.
            let delta = bigm.get(s).map_or(Rational::zero(), |mv| (mv.clone().max(b.clone())) - b);
            let mut coeffs = RatVector::zeros(width);
            for (j, a) in row.iter().enumerate() {
                coeffs[j] = a.clone();
            }
            coeffs[m] = &delta * &i * int(2);
            coeffs[m + 1] = -delta.clone();
            block.push(Constraint::le(coeffs, b + &delta * &i * &i));
        }
        blocks.push(block);
    }
    let code_rows = psi(d, 1, d)?.constraints.iter().map(|c| c.embed(width, m)).collect();
    Ok(BigMSystem { m, d, blocks, code_rows })
}

//! Double description: extreme rays of `{x : Hx ≥ 0}`, and the vertex and
//! facet enumerations built on it.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Polyhedron;
use crate::error::{Error, Result};
use crate::numerics::{nullspace_basis, primitive_integer_row, rref, RatMatrix, RatVector, Rational};

#[derive(Clone, Debug, Default)]
pub struct ConeGenerators {
    pub lineality: Vec<RatVector>,
    pub rays: Vec<RatVector>,
}

struct Ray {
    v: Vec<BigInt>,
    zero: FixedBitSet,
}

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// `a·x − b·y` componentwise, normalized.
fn combine(a: &BigInt, x: &[BigInt], b: &BigInt, y: &[BigInt]) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = x.iter().zip(y).map(|(p, q)| a * p - b * q).collect();
    normalize(&mut v);
    v
}

fn to_rat(v: &[BigInt]) -> RatVector {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Generators of the cone `{x ∈ R^dim : h·x ≥ 0 for every row h}`.
///
/// Rays are returned up to positive scaling as primitive integer vectors and
/// are extreme modulo the lineality space.
pub fn cone_generators(dim: usize, rows: &[RatVector]) -> ConeGenerators {
    let h: Vec<Vec<BigInt>> = rows.iter().map(|r| primitive_integer_row(r)).collect();
    let m = h.len();
    let mut lin: Vec<Vec<BigInt>> = (0..dim)
        .map(|k| (0..dim).map(|j| if j == k { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (k, hk) in h.iter().enumerate() {
        if hk.iter().all(Zero::is_zero) {
            for r in rays.iter_mut() {
                r.zero.insert(k);
            }
            continue;
        }
        if let Some(pos) = lin.iter().position(|l| !idot(hk, l).is_zero()) {
            let mut l = lin.swap_remove(pos);
            let mut hl = idot(hk, &l);
            if hl.is_negative() {
                l.iter_mut().for_each(|x| *x = -x.clone());
                hl = -hl;
            }
            for other in lin.iter_mut() {
                let ho = idot(hk, other);
                if !ho.is_zero() {
                    *other = combine(&hl, other, &ho, &l);
                }
            }
            for r in rays.iter_mut() {
                let hr = idot(hk, &r.v);
                if !hr.is_zero() {
                    r.v = combine(&hl, &r.v, &hr, &l);
                }
                r.zero.insert(k);
            }
            let mut zero = FixedBitSet::with_capacity(m);
            zero.insert_range(..k);
            normalize(&mut l);
            rays.push(Ray { v: l, zero });
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| idot(hk, &r.v)).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                if vals[i].is_zero() {
                    r.zero.insert(k);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let need = (dim - lin.len()).saturating_sub(2);
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let mut common = rays[p].zero.clone();
                common.intersect_with(&rays[q].zero);
                if common.count_ones(..) < need {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(i, r)| i != p && i != q && common.is_subset(&r.zero));
                if blocked {
                    continue;
                }
                let v = combine(&vals[p], &rays[q].v, &vals[q], &rays[p].v);
                common.insert(k);
                fresh.push(Ray { v, zero: common });
            }
        }
        let mut next = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_negative() {
                continue;
            }
            if vals[i].is_zero() {
                r.zero.insert(k);
            }
            next.push(r);
        }
        next.extend(fresh);
        rays = next;
    }

    ConeGenerators {
        lineality: lin.iter().map(|l| to_rat(l)).collect(),
        rays: rays.iter().map(|r| to_rat(&r.v)).collect(),
    }
}

/// Solves `E x = f`; returns a particular solution and a nullspace basis, or
/// `None` when inconsistent.
fn solve_equalities(dim: usize, eqs: &[(RatVector, Rational)]) -> Option<(RatVector, Vec<RatVector>)> {
    if eqs.is_empty() {
        return Some((RatVector::zeros(dim), (0..dim).map(|k| RatVector::unit(dim, k)).collect()));
    }
    let mut aug: Vec<RatVector> = eqs
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, dim + 1);
    if pivots.last() == Some(&dim) {
        return None;
    }
    let mut x0 = RatVector::zeros(dim);
    for (i, &p) in pivots.iter().enumerate() {
        x0[p] = aug[i][dim].clone();
    }
    let m = RatMatrix::new(dim, eqs.iter().map(|(a, _)| a.clone()).collect()).expect("equality rows");
    Some((x0, nullspace_basis(&m)))
}

/// All extreme points of a bounded polyhedron; empty when infeasible.
pub fn enumerate_vertices(p: &Polyhedron) -> Result<Vec<RatVector>> {
    let (le, eq) = p.rows();
    let Some((x0, basis)) = solve_equalities(p.dim, &eq) else {
        return Ok(Vec::new());
    };
    let k = basis.len();
    // Inequalities over (y, t): (b − a·x0) t − (a N) y ≥ 0, plus t ≥ 0.
    let mut rows = Vec::with_capacity(le.len() + 1);
    for (a, b) in &le {
        let mut r: RatVector = basis.iter().map(|col| -a.dot(col)).collect();
        r.push(b - a.dot(&x0));
        rows.push(r);
    }
    rows.push(RatVector::unit(k + 1, k));
    let gens = cone_generators(k + 1, &rows);

    let mut verts = Vec::new();
    let mut recession = !gens.lineality.is_empty();
    for ray in &gens.rays {
        let t = &ray[k];
        if t.is_zero() {
            recession = true;
            continue;
        }
        let mut x = x0.clone();
        for (j, col) in basis.iter().enumerate() {
            let yj = &ray[j] / t;
            if yj.is_zero() {
                continue;
            }
            for (xi, ci) in x.iter_mut().zip(col.iter()) {
                if !ci.is_zero() {
                    *xi += &yj * ci;
                }
            }
        }
        verts.push(x);
    }
    if recession && !verts.is_empty() {
        return Err(Error::Unbounded);
    }
    verts.sort();
    verts.dedup();
    Ok(verts)
}

/// Outer description of the convex hull of a finite point set.
#[derive(Clone, Debug, Default)]
pub struct HullDescription {
    /// `a·z = β` cutting out the affine hull.
    pub equations: Vec<(RatVector, Rational)>,
    /// `a·z ≤ β`, one per facet.
    pub facets: Vec<(RatVector, Rational)>,
}

impl HullDescription {
    pub fn contains(&self, z: &RatVector) -> bool {
        self.equations.iter().all(|(a, b)| &a.dot(z) == b) && self.facets.iter().all(|(a, b)| &a.dot(z) <= b)
    }
}

/// Facets of `Conv(points)` via the cone `{(a, β) : β − a·p ≥ 0}`.
pub fn convex_hull(points: &[RatVector]) -> HullDescription {
    assert!(!points.is_empty(), "convex hull of no points");
    let r = points[0].len();
    let rows: Vec<RatVector> = points
        .iter()
        .map(|p| {
            let mut row = p.neg();
            row.push(Rational::one());
            row
        })
        .collect();
    let gens = cone_generators(r + 1, &rows);
    let split = |v: &RatVector| (RatVector(v[..r].to_vec()), v[r].clone());
    let equations = gens.lineality.iter().map(split).collect();
    let facets = gens.rays.iter().map(split).filter(|(a, _)| !a.is_zero()).collect();
    HullDescription { equations, facets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Constraint;
    use crate::numerics::int;

    fn v(xs: &[i64]) -> RatVector {
        RatVector::from_ints(xs)
    }

    #[test]
    fn simplex_vertices() {
        let mut p = Polyhedron::new(3);
        p.push(Constraint::eq(v(&[1, 1, 1]), int(1)));
        for j in 0..3 {
            p.nonneg(j);
        }
        let vs = enumerate_vertices(&p).unwrap();
        assert_eq!(vs, vec![v(&[0, 0, 1]), v(&[0, 1, 0]), v(&[1, 0, 0])]);
    }

    #[test]
    fn unit_square() {
        let mut p = Polyhedron::new(2);
        p.bound(0, Some(int(0)), Some(int(1)));
        p.bound(1, Some(int(0)), Some(int(1)));
        assert_eq!(enumerate_vertices(&p).unwrap().len(), 4);
    }

    #[test]
    fn psi_four_vertices() {
        let mut p = Polyhedron::new(2);
        for i in 1..4 {
            p.push(Constraint::ge(v(&[-(2 * i + 1), 1]), int(i * i - (2 * i + 1) * i)));
        }
        // (4−1)(z₂ − 1) ≤ (16−1)(z₁ − 1)
        p.push(Constraint::le(v(&[-15, 3]), int(-12)));
        let vs = enumerate_vertices(&p).unwrap();
        assert_eq!(vs, vec![v(&[1, 1]), v(&[2, 4]), v(&[3, 9]), v(&[4, 16])]);
    }

    #[test]
    fn unbounded_and_empty() {
        let mut p = Polyhedron::new(2);
        p.nonneg(0);
        p.nonneg(1);
        assert_eq!(enumerate_vertices(&p), Err(Error::Unbounded));

        let mut q = Polyhedron::new(1);
        q.push(Constraint::ge(v(&[1]), int(2)));
        q.push(Constraint::le(v(&[1]), int(1)));
        assert!(enumerate_vertices(&q).unwrap().is_empty());

        let mut e = Polyhedron::new(2);
        e.push(Constraint::eq(v(&[1, 0]), int(1)));
        e.push(Constraint::eq(v(&[1, 0]), int(2)));
        assert!(enumerate_vertices(&e).unwrap().is_empty());
    }

    #[test]
    fn hull_of_square_and_segment() {
        let sq = [v(&[0, 0]), v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[1, 1])];
        let h = convex_hull(&sq);
        assert!(h.equations.is_empty());
        assert_eq!(h.facets.len(), 4);
        assert!(h.contains(&v(&[1, 1])));
        assert!(!h.contains(&v(&[2, 0])));

        let seg = [v(&[0, 0]), v(&[2, 2]), v(&[1, 1])];
        let h = convex_hull(&seg);
        assert_eq!(h.equations.len(), 1);
        assert_eq!(h.facets.len(), 2);
        assert!(h.contains(&v(&[1, 1])));
        assert!(!h.contains(&v(&[1, 0])));
        assert!(!h.contains(&v(&[3, 3])));
    }
}

//! Dense-tableau two-phase simplex with Bland's rule.

use num_traits::{One, Signed, Zero};

use super::{Cmp, LpProblem, LpResult, LpStatus, Sense};
use crate::numerics::{RatVector, Rational};

/// How an original variable is expressed through nonnegative columns.
enum VarMap {
    Fixed { value: Rational },
    Shift { col: usize, lo: Rational },
    Reflect { col: usize, hi: Rational },
    Split { pos: usize, neg: usize },
}

struct Row {
    coeffs: Vec<Rational>,
    cmp: Cmp,
    rhs: Rational,
}

struct Tableau {
    a: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs; `obj_rhs` holds minus the current objective.
    cost: Vec<Rational>,
    obj_rhs: Rational,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.a[r][c].recip();
        if !inv.is_one() {
            for x in self.a[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let prow = std::mem::take(&mut self.a[r]);
        let prhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for &j in &nz {
                let t = &f * &prow[j];
                self.a[i][j] -= t;
            }
            let t = &f * &prhs;
            self.rhs[i] -= t;
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for &j in &nz {
                let t = &f * &prow[j];
                self.cost[j] -= t;
            }
            self.obj_rhs -= &f * &prhs;
        }
        self.a[r] = prow;
        self.basis[r] = c;
    }

    /// Minimizes over columns where `allowed` holds.
    ///
    /// Uses the most negative reduced cost, switching to Bland's rule for
    /// good after a run of degenerate pivots so cycling cannot occur.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Phase {
        const DEGENERATE_RUN: usize = 50;
        let mut bland = false;
        let mut degenerate = 0;
        loop {
            let entering = if bland {
                (0..self.cost.len()).find(|&j| allowed(j) && self.cost[j].is_negative())
            } else {
                (0..self.cost.len())
                    .filter(|&j| allowed(j) && self.cost[j].is_negative())
                    .min_by(|&a, &b| self.cost[a].cmp(&self.cost[b]))
            };
            let Some(c) = entering else {
                return Phase::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.a[i][c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        degenerate += 1;
                        bland |= degenerate >= DEGENERATE_RUN;
                    } else {
                        degenerate = 0;
                    }
                    self.pivot(r, c)
                }
                None => return Phase::Unbounded,
            }
        }
    }

    fn set_costs(&mut self, c: &[Rational]) {
        self.cost = c.to_vec();
        self.obj_rhs = Rational::zero();
        for i in 0..self.a.len() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, x) in self.a[i].iter().enumerate() {
                if !x.is_zero() {
                    self.cost[j] -= cb * x;
                }
            }
            self.obj_rhs -= cb * &self.rhs[i];
        }
    }
}

/// Exact optimum of `p`; statuses cover every outcome.
pub fn solve_lp(p: &LpProblem) -> LpResult {
    let reg = &p.region;
    let n = reg.dim;
    assert_eq!(p.objective.len(), n, "objective dimension mismatch");

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut rows: Vec<Row> = Vec::new();
    for j in 0..n {
        match (&reg.lower[j], &reg.upper[j]) {
            (Some(l), Some(u)) if l == u => maps.push(VarMap::Fixed { value: l.clone() }),
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return LpResult::status_only(LpStatus::Infeasible);
                    }
                }
                maps.push(VarMap::Shift { col: ncols, lo: l.clone() });
                ncols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Reflect { col: ncols, hi: u.clone() });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    for (j, m) in maps.iter().enumerate() {
        if let (VarMap::Shift { col, lo }, Some(u)) = (m, &reg.upper[j]) {
            let mut coeffs = vec![Rational::zero(); ncols];
            coeffs[*col] = Rational::one();
            rows.push(Row { coeffs, cmp: Cmp::Le, rhs: u - lo });
        }
    }
    for c in &reg.constraints {
        let mut coeffs = vec![Rational::zero(); ncols];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Fixed { value } => rhs -= a * value,
                VarMap::Shift { col, lo } => {
                    coeffs[*col] += a;
                    rhs -= a * lo;
                }
                VarMap::Reflect { col, hi } => {
                    coeffs[*col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        if coeffs.iter().all(|x| x.is_zero()) {
            let ok = match c.cmp {
                Cmp::Le => !rhs.is_negative(),
                Cmp::Ge => !rhs.is_positive(),
                Cmp::Eq => rhs.is_zero(),
            };
            if !ok {
                return LpResult::status_only(LpStatus::Infeasible);
            }
            continue;
        }
        rows.push(Row { coeffs, cmp: c.cmp, rhs });
    }

    // Normalize to rhs ≥ 0 and lay out slack and artificial columns.
    for r in rows.iter_mut() {
        if r.rhs.is_negative() {
            r.rhs = -r.rhs.clone();
            for x in r.coeffs.iter_mut() {
                *x = -x.clone();
            }
            r.cmp = match r.cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
        }
    }
    let nslack = rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
    let nart = rows.iter().filter(|r| r.cmp != Cmp::Le).count();
    let width = ncols + nslack + nart;
    let art_start = ncols + nslack;
    let mut tab = Tableau {
        a: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        cost: Vec::new(),
        obj_rhs: Rational::zero(),
    };
    let (mut s, mut t) = (ncols, art_start);
    for r in rows {
        let mut line = r.coeffs;
        line.resize(width, Rational::zero());
        match r.cmp {
            Cmp::Le => {
                line[s] = Rational::one();
                tab.basis.push(s);
                s += 1;
            }
            Cmp::Ge => {
                line[s] = -Rational::one();
                s += 1;
                line[t] = Rational::one();
                tab.basis.push(t);
                t += 1;
            }
            Cmp::Eq => {
                line[t] = Rational::one();
                tab.basis.push(t);
                t += 1;
            }
        }
        tab.a.push(line);
        tab.rhs.push(r.rhs);
    }

    if nart > 0 {
        let mut c1 = vec![Rational::zero(); width];
        for x in c1.iter_mut().skip(art_start) {
            *x = Rational::one();
        }
        tab.set_costs(&c1);
        tab.run(&|_| true);
        if !tab.obj_rhs.is_zero() {
            return LpResult::status_only(LpStatus::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.a.len() {
            if tab.basis[i] >= art_start {
                if let Some(c) = (0..art_start).find(|&j| !tab.a[i][j].is_zero()) {
                    tab.pivot(i, c);
                } else {
                    tab.a.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    let mut c2 = vec![Rational::zero(); width];
    for (j, a) in p.objective.iter().enumerate() {
        let a = match p.sense {
            Sense::Min => a.clone(),
            Sense::Max => -a.clone(),
        };
        match &maps[j] {
            VarMap::Fixed { .. } => {}
            VarMap::Shift { col, .. } => c2[*col] += &a,
            VarMap::Reflect { col, .. } => c2[*col] -= &a,
            VarMap::Split { pos, neg } => {
                c2[*pos] += &a;
                c2[*neg] -= &a;
            }
        }
    }
    tab.set_costs(&c2);
    if let Phase::Unbounded = tab.run(&|j| j < art_start) {
        return LpResult::status_only(LpStatus::Unbounded);
    }

    let mut y = vec![Rational::zero(); width];
    for (i, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs[i].clone();
    }
    let x: RatVector = maps
        .iter()
        .map(|m| match m {
            VarMap::Fixed { value } => value.clone(),
            VarMap::Shift { col, lo } => lo + &y[*col],
            VarMap::Reflect { col, hi } => hi - &y[*col],
            VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
        })
        .collect();
    let value = p.objective.dot(&x);
    let tight = reg
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_tight(&x))
        .map(|(i, _)| i)
        .collect();
    LpResult { status: LpStatus::Optimal, point: Some(x), value: Some(value), tight }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Constraint, Polyhedron};
    use crate::numerics::{int, rat};

    fn v(xs: &[i64]) -> RatVector {
        RatVector::from_ints(xs)
    }

    #[test]
    fn single_bound() {
        let mut p = Polyhedron::new(1);
        p.push(Constraint::le(v(&[1]), int(1)));
        let r = p.maximize(v(&[1]));
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(int(1)));
        assert_eq!(r.tight, vec![0]);
    }

    #[test]
    fn simplex_face() {
        let mut p = Polyhedron::new(3);
        p.push(Constraint::eq(v(&[1, 1, 1]), int(1)));
        for j in 0..3 {
            p.nonneg(j);
        }
        let r = p.maximize(v(&[0, 0, 1]));
        assert_eq!(r.value, Some(int(1)));
        assert_eq!(r.point, Some(v(&[0, 0, 1])));
    }

    #[test]
    fn psi_seven_max_z1() {
        // Tangents z₂ − i² ≥ (2i+1)(z₁ − i), i = 1..6, and the chord through (1,1),(7,49).
        let mut p = Polyhedron::new(2);
        for i in 1..7 {
            p.push(Constraint::ge(v(&[-(2 * i + 1), 1]), int(i * i - (2 * i + 1) * i)));
        }
        p.push(Constraint::le(v(&[-48, 6]), int(-48 + 6)));
        let r = p.maximize(v(&[1, 0]));
        assert_eq!(r.value, Some(int(7)));
        assert_eq!(r.point, Some(v(&[7, 49])));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = Polyhedron::new(1);
        p.push(Constraint::ge(v(&[1]), int(2)));
        p.push(Constraint::le(v(&[1]), int(1)));
        assert_eq!(p.maximize(v(&[1])).status, LpStatus::Infeasible);

        let mut q = Polyhedron::new(2);
        q.push(Constraint::ge(v(&[1, -1]), int(0)));
        assert_eq!(q.maximize(v(&[1, 1])).status, LpStatus::Unbounded);
        assert_eq!(q.optimize(v(&[0, 0]), Sense::Min).value, Some(int(0)));
    }

    #[test]
    fn mixed_bounds() {
        let mut p = Polyhedron::new(2);
        p.bound(0, None, Some(int(-2)));
        p.bound(1, Some(rat(1, 2)), Some(rat(3, 2)));
        p.push(Constraint::ge(v(&[1, 1]), int(-3)));
        let r = p.optimize(v(&[1, 0]), Sense::Min);
        assert_eq!(r.value, Some(rat(-9, 2)));
        let r = p.maximize(v(&[1, 1]));
        assert_eq!(r.value, Some(rat(-1, 2)));
    }

    #[test]
    fn redundant_equalities() {
        let mut p = Polyhedron::new(2);
        p.push(Constraint::eq(v(&[1, 1]), int(1)));
        p.push(Constraint::eq(v(&[2, 2]), int(2)));
        p.nonneg(0);
        p.nonneg(1);
        let r = p.maximize(v(&[3, 1]));
        assert_eq!(r.value, Some(int(3)));
    }

    #[test]
    fn degenerate_cycling_fixture() {
        // Classic instance on which the largest-coefficient rule cycles.
        let mut p = Polyhedron::new(4);
        p.push(Constraint::le(RatVector(vec![rat(1, 2), rat(-11, 2), rat(-5, 2), int(9)]), int(0)));
        p.push(Constraint::le(RatVector(vec![rat(1, 2), rat(-3, 2), rat(-1, 2), int(1)]), int(0)));
        p.push(Constraint::le(v(&[1, 0, 0, 0]), int(1)));
        for j in 0..4 {
            p.nonneg(j);
        }
        let r = p.maximize(v(&[10, -57, -9, -24]));
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(int(1)));
    }
}

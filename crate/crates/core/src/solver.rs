//! Best-bound branch-and-bound over an LP relaxation with a code block.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branching::{BranchKind, BranchOutcome, CodeRelaxation, Scheme};
use crate::encodings::Encoding;
use crate::error::{Error, Result};
use crate::formulation::{BigMSystem, LinearFormulation};
use crate::lp::{enumerate_vertices, Cmp, LpResult, LpStatus, Polyhedron, Sense};
use crate::numerics::{serde_rational, RatVector, Rational};

/// A polyhedron whose coordinates `z_offset..z_offset + r` hold the code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relaxation {
    pub region: Polyhedron,
    pub z_offset: usize,
    pub r: usize,
}

impl Relaxation {
    pub fn dim(&self) -> usize {
        self.region.dim
    }

    pub fn z_of(&self, point: &RatVector) -> RatVector {
        RatVector(point[self.z_offset..self.z_offset + self.r].to_vec())
    }

    /// The region cut down by a code relaxation.
    pub fn restrict(&self, q: &CodeRelaxation) -> Polyhedron {
        let mut p = self.region.clone();
        for c in &q.constraints {
            p.push(c.embed(self.dim(), self.z_offset));
        }
        p
    }
}

impl From<&LinearFormulation> for Relaxation {
    fn from(f: &LinearFormulation) -> Self {
        Relaxation { region: f.polyhedron(), z_offset: f.n, r: f.r }
    }
}

impl From<&BigMSystem> for Relaxation {
    fn from(s: &BigMSystem) -> Self {
        Relaxation { region: s.polyhedron(), z_offset: s.z_offset(), r: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub node_cap: usize,
    /// Check every split against the four branching conditions.
    pub check_soundness: bool,
    /// Nodes expanded concurrently; 1 is fully deterministic.
    pub threads: usize,
    pub timing: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { node_cap: 1_000_000, check_soundness: cfg!(debug_assertions), threads: 1, timing: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<RatVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<RatVector>,
    #[serde(default, with = "serde_rational::option", skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    pub nodes: usize,
    pub branches: BTreeMap<BranchKind, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

/// An open subproblem.
#[derive(Clone, Debug)]
pub struct BbNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub q: CodeRelaxation,
    pub bound: Rational,
    pub point: RatVector,
}

enum Expansion {
    Verified,
    Split { kind: BranchKind, children: Vec<(CodeRelaxation, LpResult)> },
}

struct Ctx<'a> {
    rel: &'a Relaxation,
    h: &'a Encoding,
    scheme: &'a Scheme,
    objective: &'a RatVector,
    sense: Sense,
    check: bool,
}

impl Ctx<'_> {
    fn lp(&self, q: &CodeRelaxation) -> LpResult {
        self.rel.restrict(q).optimize(self.objective.clone(), self.sense)
    }

    fn expand(&self, node: &BbNode) -> Result<Expansion> {
        let zhat = self.rel.z_of(&node.point);
        match self.scheme.branch(&node.q, self.h, &zhat)? {
            BranchOutcome::Verified => Ok(Expansion::Verified),
            BranchOutcome::Split { q1, q2, kind } => {
                if self.check {
                    let report = check_split(&node.q, &q1, &q2, self.h, &zhat);
                    if let Some(c) = report.first_failure() {
                        return Err(Error::Branching(format!(
                            "{} split at {zhat} violates {}: {}",
                            kind,
                            c.condition,
                            c.witness.as_deref().unwrap_or("")
                        )));
                    }
                }
                let children = [q1, q2].into_iter().map(|q| {
                    let res = self.lp(&q);
                    (q, res)
                });
                Ok(Expansion::Split { kind, children: children.collect() })
            }
        }
    }

    /// Whether `a` is strictly better than `b` for the sense.
    fn better(&self, a: &Rational, b: &Rational) -> bool {
        match self.sense {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }

    fn key(&self, bound: &Rational) -> Rational {
        match self.sense {
            Sense::Max => bound.clone(),
            Sense::Min => -bound.clone(),
        }
    }
}

/// Optimizes `objective` over the relaxation restricted to codes in `h`.
pub fn solve(
    rel: &Relaxation,
    h: &Encoding,
    scheme: &Scheme,
    objective: &RatVector,
    sense: Sense,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    if objective.len() != rel.dim() {
        return Err(Error::Dimension { expected: rel.dim(), found: objective.len() });
    }
    if h.r() != rel.r {
        return Err(Error::Dimension { expected: rel.r, found: h.r() });
    }
    let start = Instant::now();
    let ctx = Ctx { rel, h, scheme, objective, sense, check: opts.check_soundness };
    let pool = if opts.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .map_err(|e| Error::Io(e.to_string()))?,
        )
    } else {
        None
    };

    let mut report = SolveReport {
        status: SolveStatus::Infeasible,
        scheme: scheme.kind().to_string(),
        point: None,
        z: None,
        value: None,
        nodes: 1,
        branches: BTreeMap::new(),
        seconds: None,
    };
    let finish = |mut r: SolveReport| {
        if opts.timing {
            r.seconds = Some(start.elapsed().as_secs_f64());
        }
        r
    };

    let root_q = scheme.root(h);
    let root = ctx.lp(&root_q);
    match root.status {
        LpStatus::Infeasible => return Ok(finish(report)),
        LpStatus::Unbounded => {
            report.status = SolveStatus::Unbounded;
            return Ok(finish(report));
        }
        LpStatus::Optimal => {}
    }

    let mut arena: Vec<Option<BbNode>> = Vec::new();
    let mut heap: BinaryHeap<(Rational, Reverse<usize>)> = BinaryHeap::new();
    let push = |arena: &mut Vec<Option<BbNode>>,
                heap: &mut BinaryHeap<(Rational, Reverse<usize>)>,
                parent: Option<&BbNode>,
                q: CodeRelaxation,
                res: LpResult| {
        let id = arena.len();
        let bound = res.value.expect("optimal value");
        heap.push((ctx.key(&bound), Reverse(id)));
        arena.push(Some(BbNode {
            id,
            parent: parent.map(|p| p.id),
            depth: parent.map_or(0, |p| p.depth + 1),
            q,
            bound,
            point: res.point.expect("optimal point"),
        }));
    };
    push(&mut arena, &mut heap, None, root_q, root);

    let batch_size = opts.threads.max(1);
    let mut incumbent: Option<(Rational, RatVector)> = None;
    let mut capped = false;
    loop {
        let mut batch = Vec::with_capacity(batch_size);
        while batch.len() < batch_size {
            let Some((_, Reverse(id))) = heap.pop() else { break };
            let node = arena[id].take().expect("node queued once");
            if incumbent.as_ref().is_some_and(|(v, _)| !ctx.better(&node.bound, v)) {
                continue;
            }
            batch.push(node);
        }
        if batch.is_empty() {
            break;
        }
        if report.nodes >= opts.node_cap {
            capped = true;
            break;
        }
        let expansions: Vec<Result<Expansion>> = match &pool {
            Some(pool) => pool.install(|| batch.par_iter().map(|n| ctx.expand(n)).collect()),
            None => batch.iter().map(|n| ctx.expand(n)).collect(),
        };
        for (node, exp) in batch.iter().zip(expansions) {
            match exp? {
                Expansion::Verified => {
                    if incumbent.as_ref().is_none_or(|(v, _)| ctx.better(&node.bound, v)) {
                        incumbent = Some((node.bound.clone(), node.point.clone()));
                    }
                }
                Expansion::Split { kind, children } => {
                    *report.branches.entry(kind).or_default() += 1;
                    for (q, res) in children {
                        report.nodes += 1;
                        match res.status {
                            LpStatus::Infeasible => {}
                            LpStatus::Unbounded => {
                                report.status = SolveStatus::Unbounded;
                                return Ok(finish(report));
                            }
                            LpStatus::Optimal => {
                                let b = res.value.as_ref().expect("optimal value");
                                if incumbent.as_ref().is_none_or(|(v, _)| ctx.better(b, v)) {
                                    push(&mut arena, &mut heap, Some(node), q, res);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if let Some((value, point)) = incumbent {
        let z = rel.z_of(&point);
        debug_assert!(h.contains(&z), "incumbent code {z} is not in the encoding");
        report.z = Some(z);
        report.point = Some(point);
        report.value = Some(value);
        report.status = SolveStatus::Optimal;
    }
    if capped {
        report.status = SolveStatus::NodeCap;
    }
    Ok(finish(report))
}

/// The four conditions a split must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// A verified point really is a code.
    VerifiedCode,
    /// Neither child contains `ẑ`.
    ExcludesPoint,
    /// Both children lie inside `Q`.
    ChildrenInside,
    /// Every code in `Q` survives in a child, and none appear from outside `Q`.
    CodesPreserved,
    /// The children do not intersect.
    Disjoint,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::VerifiedCode => "verified-code",
            Condition::ExcludesPoint => "excludes-point",
            Condition::ChildrenInside => "children-inside",
            Condition::CodesPreserved => "codes-preserved",
            Condition::Disjoint => "disjoint",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub z_hat: RatVector,
    pub z_hat_in_q: bool,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<BranchKind>,
    pub conditions: Vec<ConditionResult>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn first_failure(&self) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| !c.holds)
    }

    pub fn holds(&self, c: Condition) -> Option<bool> {
        self.conditions.iter().find(|r| r.condition == c).map(|r| r.holds)
    }
}

fn result(condition: Condition, witness: Option<String>) -> ConditionResult {
    ConditionResult { condition, holds: witness.is_none(), witness }
}

/// A constraint of `outer` that `inner` violates somewhere, if any.
fn escape(outer: &CodeRelaxation, inner: &CodeRelaxation) -> Option<String> {
    let p = inner.polyhedron();
    if !p.is_feasible() {
        return None;
    }
    for (k, c) in outer.constraints.iter().enumerate() {
        let senses: &[(Sense, bool)] = match c.cmp {
            Cmp::Le => &[(Sense::Max, true)],
            Cmp::Ge => &[(Sense::Min, false)],
            Cmp::Eq => &[(Sense::Max, true), (Sense::Min, false)],
        };
        for &(sense, upper) in senses {
            let res = p.optimize(c.coeffs.clone(), sense);
            match res.status {
                LpStatus::Unbounded => return Some(format!("row {} is unbounded over the child", k + 1)),
                LpStatus::Infeasible => return None,
                LpStatus::Optimal => {
                    let v = res.value.expect("optimal value");
                    if (upper && v > c.rhs) || (!upper && v < c.rhs) {
                        return Some(format!("row {} reaches {} at {}", k + 1, v, res.point.expect("point")));
                    }
                }
            }
        }
    }
    None
}

/// Checks a proposed split of `q` at `ẑ` without consulting any scheme.
pub fn check_split(
    q: &CodeRelaxation,
    q1: &CodeRelaxation,
    q2: &CodeRelaxation,
    h: &Encoding,
    zhat: &RatVector,
) -> SoundnessReport {
    let excludes = [q1, q2]
        .iter()
        .position(|c| c.contains(zhat))
        .map(|j| format!("{zhat} lies in child {}", j + 1));
    let inside = [q1, q2]
        .iter()
        .enumerate()
        .find_map(|(j, c)| escape(q, c).map(|w| format!("child {}: {w}", j + 1)));
    let mut codes = None;
    for code in h.codes() {
        let (in_q, in_1, in_2) = (q.contains(code), q1.contains(code), q2.contains(code));
        if in_q && !in_1 && !in_2 {
            codes = Some(format!("code {code} is lost"));
            break;
        }
        if !in_q && (in_1 || in_2) {
            codes = Some(format!("code {code} appears from outside Q"));
            break;
        }
    }
    let both = q1.with(q2.constraints.iter().cloned());
    let disjoint = both
        .polyhedron()
        .optimize(RatVector::zeros(q.r), Sense::Max)
        .point
        .map(|p| format!("both children contain {p}"));
    SoundnessReport {
        z_hat: zhat.clone(),
        z_hat_in_q: q.contains(zhat),
        verified: false,
        kind: None,
        conditions: vec![
            result(Condition::ExcludesPoint, excludes),
            result(Condition::ChildrenInside, inside),
            result(Condition::CodesPreserved, codes),
            result(Condition::Disjoint, disjoint),
        ],
    }
}

/// Runs the scheme at `ẑ` and checks what it returns.
pub fn check_branch_soundness(
    scheme: &Scheme,
    q: &CodeRelaxation,
    h: &Encoding,
    zhat: &RatVector,
) -> Result<SoundnessReport> {
    match scheme.branch(q, h, zhat)? {
        BranchOutcome::Verified => {
            let witness = (!h.contains(zhat)).then(|| format!("{zhat} is not a code"));
            Ok(SoundnessReport {
                z_hat: zhat.clone(),
                z_hat_in_q: q.contains(zhat),
                verified: true,
                kind: None,
                conditions: vec![result(Condition::VerifiedCode, witness)],
            })
        }
        BranchOutcome::Split { q1, q2, kind } => {
            let mut report = check_split(q, &q1, &q2, h, zhat);
            report.kind = Some(kind);
            Ok(report)
        }
    }
}

/// Whether every vertex of `q` is a code, i.e. `Conv(Q ∩ H) = Q` for bounded `Q`.
pub fn is_hull_preserving(q: &CodeRelaxation, h: &Encoding) -> bool {
    match enumerate_vertices(&q.polyhedron()) {
        Ok(vs) => vs.iter().all(|v| h.contains(v)),
        Err(_) => false,
    }
}

/// Objective over the full relaxation from λ coefficients.
pub fn lambda_objective(c: &RatVector, dim: usize) -> RatVector {
    let mut out = RatVector::zeros(dim);
    for (j, v) in c.iter().enumerate() {
        out[j] = v.clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{psi, SchemeKind};
    use crate::cdc::{grid_triangulation_fixture, sos2_family};
    use crate::encodings::{exotic_code, gray_code, moment_code};
    use crate::formulation::{build_general, build_moment_curve};
    use crate::lp::Constraint;
    use crate::numerics::{int, rat};

    fn rv(xs: &[Rational]) -> RatVector {
        RatVector(xs.to_vec())
    }

    #[test]
    fn sos2_single_node() {
        let fam = sos2_family(4).unwrap();
        let h = exotic_code(4).unwrap();
        let f = build_general(&fam, &h).unwrap();
        let rel = Relaxation::from(&f);
        let scheme = Scheme::new(SchemeKind::Exotic, &h).unwrap();
        let c = lambda_objective(&RatVector::unit(5, 2), rel.dim());
        let rep = solve(&rel, &h, &scheme, &c, Sense::Max, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert_eq!(rep.value, Some(int(1)));
        assert_eq!(rep.nodes, 1);
    }

    #[test]
    fn grid_moment_hits_a_code() {
        let (fam, _) = grid_triangulation_fixture();
        let f = build_moment_curve(&fam).unwrap();
        let h = moment_code(8).unwrap();
        let scheme = Scheme::new(SchemeKind::Moment, &h).unwrap();
        let rel = Relaxation::from(&f);
        // Reward λ₁ and λ₉, which share no triangle.
        let mut c = RatVector::zeros(9);
        c[0] = int(1);
        c[8] = int(1);
        let c = lambda_objective(&c, rel.dim());
        let rep = solve(&rel, &h, &scheme, &c, Sense::Max, &SolveOptions::default()).unwrap();
        assert_eq!(rep.value, Some(int(1)));
        assert!(h.contains(rep.z.as_ref().unwrap()));
        let par = SolveOptions { threads: 3, ..SolveOptions::default() };
        assert_eq!(solve(&rel, &h, &scheme, &c, Sense::Max, &par).unwrap().value, Some(int(1)));
    }

    #[test]
    fn node_cap_is_reported() {
        let (fam, _) = grid_triangulation_fixture();
        let f = build_moment_curve(&fam).unwrap();
        let h = moment_code(8).unwrap();
        let scheme = Scheme::new(SchemeKind::Moment, &h).unwrap();
        let rel = Relaxation::from(&f);
        let mut c = RatVector::zeros(9);
        c[0] = int(1);
        c[8] = int(1);
        let c = lambda_objective(&c, rel.dim());
        let opts = SolveOptions { node_cap: 1, ..SolveOptions::default() };
        let rep = solve(&rel, &h, &scheme, &c, Sense::Max, &opts).unwrap();
        assert!(rep.status == SolveStatus::NodeCap || rep.nodes == 1);
    }

    #[test]
    fn moment_soundness_at_hole() {
        let h = moment_code(7).unwrap();
        let scheme = Scheme::new(SchemeKind::Moment, &h).unwrap();
        let q = psi(7, 1, 7).unwrap();
        let rep = check_branch_soundness(&scheme, &q, &h, &RatVector::from_ints(&[2, 5])).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let BranchOutcome::Split { q1, q2, .. } = scheme.branch(&q, &h, &RatVector::from_ints(&[2, 5])).unwrap()
        else {
            panic!()
        };
        assert_eq!(q1.codes_inside(&h).len(), 2);
        assert_eq!(q2.codes_inside(&h).len(), 5);
        assert!(is_hull_preserving(&q1, &h) && is_hull_preserving(&q2, &h));
    }

    #[test]
    fn pathological_point_outside_q() {
        let h = moment_code(7).unwrap();
        let scheme = Scheme::new(SchemeKind::Moment, &h).unwrap();
        let q = psi(7, 1, 7).unwrap();
        let rep = check_branch_soundness(&scheme, &q, &h, &rv(&[int(4), rat(25, 4)])).unwrap();
        assert!(!rep.z_hat_in_q);
        assert!(rep.passed());
    }

    #[test]
    fn corrupted_split_fails_first_condition() {
        let h = gray_code(3).unwrap();
        let q = Scheme::new(SchemeKind::Variable, &h).unwrap().root(&h);
        let zhat = rv(&[rat(1, 2), int(0), int(0)]);
        let rep = check_split(&q, &q, &q, &h, &zhat);
        assert_eq!(rep.first_failure().unwrap().condition, Condition::ExcludesPoint);
        assert_eq!(rep.holds(Condition::Disjoint), Some(false));

        let loose = q.with([Constraint::le(RatVector::unit(3, 0), int(0))]);
        let leaky = CodeRelaxation::whole(3).with([Constraint::ge(RatVector::unit(3, 0), int(1))]);
        let rep = check_split(&q, &loose, &leaky, &h, &zhat);
        assert_eq!(rep.holds(Condition::ChildrenInside), Some(false));
    }

    #[test]
    fn variable_scheme_exhaustive_grid() {
        let h = gray_code(3).unwrap();
        let scheme = Scheme::new(SchemeKind::Variable, &h).unwrap();
        let q = scheme.root(&h);
        for a in 0..=4 {
            for b in 0..=2 {
                for c in 0..=2 {
                    let z = rv(&[rat(a, 4), rat(b, 2), rat(c, 2)]);
                    let rep = check_branch_soundness(&scheme, &q, &h, &z).unwrap();
                    assert!(rep.passed(), "{z}: {rep:?}");
                }
            }
        }
    }

    #[test]
    fn report_serializes() {
        let rep = SolveReport {
            status: SolveStatus::Optimal,
            scheme: "moment".into(),
            point: None,
            z: Some(RatVector::from_ints(&[1, 1])),
            value: Some(rat(3, 2)),
            nodes: 3,
            branches: [(BranchKind::TwoTerm, 1)].into_iter().collect(),
            seconds: None,
        };
        let s = serde_json::to_string(&rep).unwrap();
        assert!(s.contains(r#""value":"3/2""#) && s.contains(r#""two-term":1"#), "{s}");
        let back: SolveReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
    }
}

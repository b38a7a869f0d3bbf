//! Combinatorial disjunctive constraint instances.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{int, serde_rational, to_f64, RatVector, Rational};

/// Index sets `T^i ⊆ {0..n}` (0-based in memory, 1-based on disk).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CdcFamily {
    n: usize,
    sets: Vec<Vec<usize>>,
}

impl CdcFamily {
    /// Validates sets (distinct, nonempty, covering `0..n`) and sorts each set.
    pub fn new(n: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Family("no alternatives".into()));
        }
        let mut covered = vec![false; n];
        let mut clean = Vec::with_capacity(sets.len());
        for (i, s) in sets.into_iter().enumerate() {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::Family(format!("set {} is empty", i + 1)));
            }
            if let Some(&v) = s.iter().find(|&&v| v >= n) {
                return Err(Error::Family(format!("set {} names component {} > n = {n}", i + 1, v + 1)));
            }
            for &v in &s {
                covered[v] = true;
            }
            if clean.contains(&s) {
                return Err(Error::Family(format!("set {} repeats an earlier set", i + 1)));
            }
            clean.push(s);
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::Family(format!("component {} belongs to no set", v + 1)));
        }
        Ok(CdcFamily { n, sets: clean })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    /// Alternatives containing component `v`.
    pub fn members(&self, v: usize) -> Vec<usize> {
        (0..self.d()).filter(|&i| self.sets[i].binary_search(&v).is_ok()).collect()
    }

    /// No set is contained in another.
    pub fn is_non_nested(&self) -> bool {
        self.sets.iter().enumerate().all(|(i, a)| {
            self.sets
                .iter()
                .enumerate()
                .all(|(j, b)| i == j || !a.iter().all(|v| b.binary_search(v).is_ok()))
        })
    }

    /// Adds component `n` to every set.
    pub fn with_artificial_component(&self) -> Self {
        let sets = self
            .sets
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.push(self.n);
                s
            })
            .collect();
        CdcFamily { n: self.n + 1, sets }
    }
}

/// Points `v^j` such that `x = Σ λ_j v^j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexMap {
    pub vertices: Vec<RatVector>,
}

impl VertexMap {
    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.len())
    }

    /// λ-space coefficients of the x-space objective `c`.
    pub fn pull_back(&self, c: &RatVector) -> RatVector {
        self.vertices.iter().map(|v| v.dot(c)).collect()
    }

    pub fn apply(&self, lambda: &RatVector) -> RatVector {
        let mut x = RatVector::zeros(self.dim());
        for (l, v) in lambda.iter().zip(&self.vertices) {
            x = x.add(&v.scale(l));
        }
        x
    }
}

/// `{x : A x ≤ b}` with optional big-M vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HPolyhedron {
    #[serde(rename = "A")]
    pub a: Vec<RatVector>,
    #[serde(with = "serde_rational::vec")]
    pub b: Vec<Rational>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<RatVector>,
}

impl HPolyhedron {
    pub fn new(a: Vec<RatVector>, b: Vec<Rational>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension { expected: a.len(), found: b.len() });
        }
        Ok(HPolyhedron { a, b, m: None })
    }

    pub fn dim(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    pub fn contains(&self, x: &RatVector) -> bool {
        self.a.iter().zip(&self.b).all(|(row, b)| &row.dot(x) <= b)
    }

    pub fn polyhedron(&self) -> crate::lp::Polyhedron {
        let mut p = crate::lp::Polyhedron::new(self.dim());
        for (row, b) in self.a.iter().zip(&self.b) {
            p.push(crate::lp::Constraint::le(row.clone(), b.clone()));
        }
        p
    }
}

/// Disjunction of H-represented polyhedra in a common space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HRepDisjunction {
    pub pieces: Vec<HPolyhedron>,
}

impl HRepDisjunction {
    pub fn new(pieces: Vec<HPolyhedron>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Family("no polyhedra".into()));
        };
        let m = first.dim();
        for p in &pieces {
            if p.dim() != m {
                return Err(Error::Dimension { expected: m, found: p.dim() });
            }
        }
        Ok(HRepDisjunction { pieces })
    }

    pub fn d(&self) -> usize {
        self.pieces.len()
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }
}

/// On-disk instance document.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<RatVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hrep: Option<Vec<HPolyhedron>>,
}

impl Instance {
    pub fn from_family(tag: &str, fam: &CdcFamily, vm: Option<&VertexMap>) -> Self {
        Instance {
            family: Some(tag.to_string()),
            n: fam.n(),
            sets: fam.sets().iter().map(|s| s.iter().map(|v| v + 1).collect()).collect(),
            vertices: vm.map(|m| m.vertices.clone()),
            hrep: None,
        }
    }

    pub fn family(&self) -> Result<CdcFamily> {
        let sets = self
            .sets
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&v| v.checked_sub(1).ok_or_else(|| Error::Family("components are numbered from 1".into())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CdcFamily::new(self.n, sets)
    }

    pub fn vertex_map(&self) -> Result<Option<VertexMap>> {
        match &self.vertices {
            None => Ok(None),
            Some(vs) if vs.len() != self.n => Err(Error::Dimension { expected: self.n, found: vs.len() }),
            Some(vs) => Ok(Some(VertexMap { vertices: vs.clone() })),
        }
    }

    pub fn hrep(&self) -> Result<Option<HRepDisjunction>> {
        self.hrep.clone().map(HRepDisjunction::new).transpose()
    }
}

/// `({i, i+1})` for `i = 1..=d` on `n = d + 1` components.
pub fn sos2_family(d: usize) -> Result<CdcFamily> {
    if d == 0 {
        return Err(Error::Family("SOS2 needs d ≥ 1".into()));
    }
    CdcFamily::new(d + 1, (0..d).map(|i| vec![i, i + 1]).collect())
}

/// Rounds to a multiple of 2⁻⁴⁰ and converts exactly.
fn rationalize(x: f64) -> Rational {
    let scale = (1u64 << 40) as f64;
    Rational::new(((x * scale).round() as i64).into(), (1i64 << 40).into())
}

/// The quadrilateral relaxation of `{x : s ≤ ‖x‖ ≤ S}` with `d` pieces.
pub fn annulus_instance(s: &Rational, big_s: &Rational, d: usize) -> Result<(CdcFamily, VertexMap)> {
    if d <= 4 {
        return Err(Error::Family(format!("annulus needs d ≥ 5, got {d}")));
    }
    if s.is_negative() || !big_s.is_positive() || s > big_s {
        return Err(Error::Family("annulus radii need 0 ≤ s ≤ S, S > 0".into()));
    }
    let (sf, bf) = (to_f64(s), to_f64(big_s));
    let outer = bf / (2.0 * PI / d as f64).cos();
    let mut vertices = Vec::with_capacity(2 * d);
    for i in 1..=d {
        let theta = 2.0 * PI * (i % d) as f64 / d as f64;
        let (sin, cos) = theta.sin_cos();
        vertices.push(RatVector(vec![rationalize(sf * cos), rationalize(sf * sin)]));
        vertices.push(RatVector(vec![rationalize(outer * cos), rationalize(outer * sin)]));
    }
    let n = 2 * d;
    // T^i = {2i−3, 2i−2, 2i−1, 2i} (1-based) wrapping mod 2d.
    let sets = (1..=d).map(|i| (0..4).map(|k| (2 * i + n - 4 + k) % n).collect()).collect();
    Ok((CdcFamily::new(n, sets)?, VertexMap { vertices }))
}

/// Outer radius `S·sec(2π/d)` as rationalized by [`annulus_instance`].
pub fn annulus_outer_radius(big_s: &Rational, d: usize) -> Rational {
    rationalize(to_f64(big_s) / (2.0 * PI / d as f64).cos())
}

/// The eight triangles of the 3×3 grid; node `j` sits at `((j−1) mod 3, (j−1) div 3)`.
pub fn grid_triangulation_fixture() -> (CdcFamily, VertexMap) {
    let sets: [[usize; 3]; 8] =
        [[1, 2, 4], [5, 6, 8], [3, 5, 6], [4, 5, 7], [5, 7, 8], [2, 3, 5], [2, 4, 5], [6, 8, 9]];
    let fam = CdcFamily::new(9, sets.iter().map(|s| s.iter().map(|v| v - 1).collect()).collect())
        .expect("fixture is well formed");
    let vertices = (0..9).map(|j| RatVector(vec![int(j % 3), int(j / 3)])).collect();
    (fam, VertexMap { vertices })
}

/// Shares vertices among polytopes given by their vertex lists.
pub fn from_vrep(polys: &[Vec<RatVector>]) -> Result<(CdcFamily, VertexMap)> {
    let mut index: HashMap<RatVector, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut sets = Vec::with_capacity(polys.len());
    for (i, p) in polys.iter().enumerate() {
        if p.is_empty() {
            return Err(Error::Family(format!("polytope {} has no vertices", i + 1)));
        }
        let set = p
            .iter()
            .map(|v| {
                *index.entry(v.clone()).or_insert_with(|| {
                    vertices.push(v.clone());
                    vertices.len() - 1
                })
            })
            .collect();
        sets.push(set);
    }
    Ok((CdcFamily::new(vertices.len(), sets)?, VertexMap { vertices }))
}

/// Vertex lists of each alternative, the inverse of [`from_vrep`].
pub fn to_vrep(fam: &CdcFamily, vm: &VertexMap) -> Vec<Vec<RatVector>> {
    fam.sets().iter().map(|s| s.iter().map(|&v| vm.vertices[v].clone()).collect()).collect()
}

/// Pairs `{i, j}` (i < j) whose sets intersect, and whether they connect all alternatives.
pub fn edge_set(fam: &CdcFamily) -> (Vec<(usize, usize)>, bool) {
    let d = fam.d();
    let mut edges = Vec::new();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..d {
        for j in i + 1..d {
            let (a, b) = (fam.set(i), fam.set(j));
            if a.iter().any(|v| b.binary_search(v).is_ok()) {
                edges.push((i, j));
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let root = find(&mut parent, 0);
    let connected = (0..d).all(|i| find(&mut parent, i) == root);
    (edges, connected)
}

//! Dual Δ-complexes, the Stanley–Reisner vertex ring built on them, and the combinatorial
//! checks on orientations and links.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, Rat};
use crate::geometry::Fan;
use crate::theta::{Table, TableKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VertexError {
    #[error("cell {dim}:{index}: {reason}")]
    BadCell { dim: usize, index: usize, reason: String },
    #[error("orientation list has {got} entries for {expected} maximal simplices")]
    Orientations { expected: usize, got: usize },
    #[error("cone {0:?} is not unimodular")]
    NotUnimodular(Vec<usize>),
    #[error("point {0:?} is not in the support")]
    OutsideSupport(Vec<i64>),
    #[error("product {a} * {b} leaves the span of the quotient basis at {at}")]
    NotClosed { a: String, b: String, at: String },
}

pub type Result<T> = std::result::Result<T, VertexError>;

/// A d-simplex of a Δ-complex: its vertex labels after gluing and its faces, face `i`
/// omitting vertex `i` and indexing the (d-1)-cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub vertices: Vec<usize>,
    #[serde(default)]
    pub faces: Vec<usize>,
}

/// Simplices with attaching maps. Before gluing, each maximal simplex is a separate copy;
/// its faces are sent to cells of lower dimension by the face maps, which is the quotient
/// map onto the glued complex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualComplex {
    /// `cells[d]` are the d-simplices; `cells[0][v]` is vertex `v`.
    pub cells: Vec<Vec<Cell>>,
    /// Sign for each top-dimensional simplex, in the order of `cells[n]`.
    pub orientations: Vec<i8>,
}

/// A cell addressed by dimension and index.
pub type CellId = (usize, usize);

impl DualComplex {
    pub fn empty() -> DualComplex {
        DualComplex {
            cells: vec![],
            orientations: vec![],
        }
    }

    /// Checks shapes and the simplicial identities `∂_i ∂_j = ∂_{j-1} ∂_i` for `i < j`.
    pub fn new(cells: Vec<Vec<Cell>>, orientations: Vec<i8>) -> Result<DualComplex> {
        let k = DualComplex { cells, orientations };
        k.validate()?;
        Ok(k)
    }

    /// Simplicial complex from its maximal simplices, oriented by the given vertex order
    /// (or the sorted order when `orientations` is empty).
    pub fn from_simplices(maximal: &[Vec<usize>], orientations: &[i8]) -> Result<DualComplex> {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![];
        for s in maximal {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.len() || s.is_empty() {
                return Err(VertexError::BadCell {
                    dim: s.len().saturating_sub(1),
                    index: 0,
                    reason: format!("{s:?} does not have distinct vertices"),
                });
            }
            for mask in 1u64..(1 << sorted.len()) {
                let face: Vec<usize> = (0..sorted.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| sorted[i])
                    .collect();
                let d = face.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize(d + 1, BTreeSet::new());
                }
                by_dim[d].insert(face);
            }
        }
        if let Some(zero) = by_dim.first() {
            let nv = zero.iter().map(|v| v[0]).max().map_or(0, |m| m + 1);
            if zero.len() != nv {
                return Err(VertexError::BadCell {
                    dim: 0,
                    index: nv,
                    reason: "vertex labels must be 0..n without gaps".into(),
                });
            }
        }
        let index: Vec<BTreeMap<Vec<usize>, usize>> = by_dim
            .iter()
            .map(|s| s.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect())
            .collect();
        let mut cells = vec![];
        for (d, set) in by_dim.iter().enumerate() {
            let layer: Vec<Cell> = set
                .iter()
                .map(|v| Cell {
                    vertices: v.clone(),
                    faces: if d == 0 {
                        vec![]
                    } else {
                        (0..v.len())
                            .map(|i| {
                                let mut f = v.clone();
                                f.remove(i);
                                index[d - 1][&f]
                            })
                            .collect()
                    },
                })
                .collect();
            cells.push(layer);
        }
        let mut k = DualComplex {
            cells,
            orientations: vec![],
        };
        let n = k.dim().unwrap_or(0);
        let top: Vec<&Vec<usize>> = maximal.iter().filter(|s| s.len() == n + 1).collect();
        if !orientations.is_empty() && orientations.len() != top.len() {
            return Err(VertexError::Orientations {
                expected: top.len(),
                got: orientations.len(),
            });
        }
        let mut signs = vec![1i8; k.cells.get(n).map_or(0, Vec::len)];
        for (j, s) in top.iter().enumerate() {
            let mut sorted = (*s).clone();
            sorted.sort_unstable();
            let sign = permutation_sign(s) * orientations.get(j).copied().unwrap_or(1);
            signs[index[n][&sorted]] = sign;
        }
        k.orientations = signs;
        k.validate()?;
        Ok(k)
    }

    /// Dual complex of a simplicial fan: one vertex per ray, one simplex per cone, top
    /// simplices oriented by the sign of the ray determinant.
    pub fn from_fan(fan: &Fan) -> Result<DualComplex> {
        let mut maximal = vec![];
        let mut signs = vec![];
        for cone in &fan.maximal_cones {
            let mut c = cone.clone();
            c.sort_unstable();
            if c.len() == fan.rank {
                let m: Vec<Vec<i64>> = c.iter().map(|&r| fan.rays[r].clone()).collect();
                signs.push(arith::det(&m).signum() as i8);
            }
            maximal.push(c);
        }
        if signs.len() != maximal.len() {
            signs.clear();
        }
        DualComplex::from_simplices(&maximal, &signs)
    }

    /// Dimension of the highest simplices; `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.cells.iter().rposition(|l| !l.is_empty())
    }

    pub fn vertex_count(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.0][id.1]
    }

    fn validate(&self) -> Result<()> {
        let bad = |dim, index, reason: String| VertexError::BadCell { dim, index, reason };
        let nv = self.vertex_count();
        for (d, layer) in self.cells.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                if c.vertices.len() != d + 1 {
                    return Err(bad(d, i, format!("has {} vertices", c.vertices.len())));
                }
                if c.vertices.iter().any(|v| *v >= nv) {
                    return Err(bad(d, i, "unknown vertex".into()));
                }
                if d == 0 {
                    if c.vertices[0] != i {
                        return Err(bad(d, i, "vertex cells must be listed in label order".into()));
                    }
                    continue;
                }
                if c.faces.len() != d + 1 {
                    return Err(bad(d, i, format!("has {} faces", c.faces.len())));
                }
                for (j, &f) in c.faces.iter().enumerate() {
                    let Some(face) = self.cells[d - 1].get(f) else {
                        return Err(bad(d, i, format!("face {j} is missing")));
                    };
                    let mut want = c.vertices.clone();
                    want.remove(j);
                    if face.vertices != want {
                        return Err(bad(d, i, format!("face {j} has vertices {:?}", face.vertices)));
                    }
                }
                if d >= 2 {
                    for j in 0..=d {
                        for i2 in 0..j {
                            let a = self.cells[d - 1][c.faces[j]].faces[i2];
                            let b = self.cells[d - 1][c.faces[i2]].faces[j - 1];
                            if a != b {
                                return Err(bad(d, i, format!("faces {i2} and {j} are glued inconsistently")));
                            }
                        }
                    }
                }
            }
        }
        let top = self.dim().map_or(0, |n| self.cells[n].len());
        if self.orientations.len() != top {
            return Err(VertexError::Orientations {
                expected: top,
                got: self.orientations.len(),
            });
        }
        if self.orientations.iter().any(|s| *s != 1 && *s != -1) {
            return Err(bad(self.dim().unwrap_or(0), 0, "orientations must be +1 or -1".into()));
        }
        Ok(())
    }

    /// Face of `id` keeping only the vertex positions in `keep` (sorted).
    pub fn sub_face(&self, id: CellId, keep: &[usize]) -> CellId {
        let (mut d, mut i) = id;
        for pos in (0..=id.0).rev() {
            if !keep.contains(&pos) {
                i = self.cells[d][i].faces[pos];
                d -= 1;
            }
        }
        (d, i)
    }

    /// Cells that are not faces of anything else: the simplices before gluing.
    pub fn maximal_cells(&self) -> Vec<CellId> {
        let mut covered: BTreeSet<CellId> = BTreeSet::new();
        for (d, layer) in self.cells.iter().enumerate().skip(1) {
            for c in layer {
                for &f in &c.faces {
                    covered.insert((d - 1, f));
                }
            }
        }
        let mut out = vec![];
        for (d, layer) in self.cells.iter().enumerate() {
            for i in 0..layer.len() {
                if !covered.contains(&(d, i)) {
                    out.push((d, i));
                }
            }
        }
        out
    }

    /// The cone in the simplicial sense: a new last vertex joined to every cell.
    pub fn cone(&self) -> DualComplex {
        let apex = self.vertex_count();
        let n = self.dim().map_or(0, |d| d + 1);
        let mut cells: Vec<Vec<Cell>> = vec![vec![]; n + 1];
        // old cells keep their indices; cone(c) of dim d+1 comes after them
        for (d, layer) in self.cells.iter().enumerate() {
            cells[d].extend(layer.iter().cloned());
        }
        cells[0].push(Cell {
            vertices: vec![apex],
            faces: vec![],
        });
        let base: Vec<usize> = (0..=n).map(|d| self.cells.get(d).map_or(0, Vec::len)).collect();
        for (d, layer) in self.cells.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                let mut vertices = c.vertices.clone();
                vertices.push(apex);
                let mut faces: Vec<usize> = if d == 0 {
                    vec![apex]
                } else {
                    c.faces.iter().map(|&f| base[d] + f).collect()
                };
                faces.push(i);
                cells[d + 1].push(Cell { vertices, faces });
            }
        }
        let orientations = if self.cells.is_empty() {
            vec![1]
        } else {
            let mut o = vec![1i8; cells[n].len()];
            for (j, s) in self.orientations.iter().enumerate() {
                o[base[n] + j] = *s;
            }
            o
        };
        DualComplex { cells, orientations }
    }

    pub fn reversed(&self) -> DualComplex {
        let mut k = self.clone();
        for s in &mut k.orientations {
            *s = -*s;
        }
        k
    }
}

fn permutation_sign(v: &[usize]) -> i8 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// A codimension-one simplex where the pseudomanifold condition fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationViolation {
    pub cell: CellId,
    pub vertices: Vec<usize>,
    /// `(top simplex, face position, induced sign)` for every incidence.
    pub cofaces: Vec<(usize, usize, i8)>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudomanifoldReport {
    pub dimension: Option<usize>,
    pub pure: bool,
    /// Codimension-one simplices bounding exactly one top simplex.
    pub boundary: Vec<CellId>,
    pub violations: Vec<OrientationViolation>,
}

impl PseudomanifoldReport {
    pub fn passed(&self) -> bool {
        self.pure && self.violations.is_empty()
    }
}

/// Every codimension-one simplex must bound one or two top simplices, and two with
/// opposite induced orientations. The ones bounding exactly one span the subcomplex `L`.
pub fn check_pseudomanifold(k: &DualComplex) -> PseudomanifoldReport {
    let Some(n) = k.dim() else {
        return PseudomanifoldReport {
            dimension: None,
            pure: true,
            boundary: vec![],
            violations: vec![],
        };
    };
    let pure = k.maximal_cells().iter().all(|(d, _)| *d == n);
    if n == 0 {
        return PseudomanifoldReport {
            dimension: Some(0),
            pure,
            boundary: vec![],
            violations: vec![],
        };
    }
    let mut incidences: Vec<Vec<(usize, usize, i8)>> = vec![vec![]; k.cells[n - 1].len()];
    for (s, c) in k.cells[n].iter().enumerate() {
        for (pos, &f) in c.faces.iter().enumerate() {
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            incidences[f].push((s, pos, k.orientations[s] * sign));
        }
    }
    let mut boundary = vec![];
    let mut violations = vec![];
    for (t, inc) in incidences.into_iter().enumerate() {
        let reason = match inc.len() {
            1 => {
                boundary.push((n - 1, t));
                continue;
            }
            2 if inc[0].2 != inc[1].2 => continue,
            2 => "both cofaces induce the same orientation".to_string(),
            0 => "not a face of a top simplex".to_string(),
            m => format!("face of {m} top simplices"),
        };
        violations.push(OrientationViolation {
            cell: (n - 1, t),
            vertices: k.cells[n - 1][t].vertices.clone(),
            cofaces: inc,
            reason,
        });
    }
    PseudomanifoldReport {
        dimension: Some(n),
        pure,
        boundary,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkHomology {
    pub cell: CellId,
    pub vertices: Vec<usize>,
    /// Reduced Betti numbers from degree -1 upwards.
    pub reduced_betti: Vec<usize>,
    /// Degrees below the bound with nonzero reduced homology.
    pub violations: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    pub links: Vec<LinkHomology>,
}

impl LinkReport {
    pub fn passed(&self) -> bool {
        self.links.iter().all(|l| l.violations.is_empty())
    }

    pub fn failures(&self) -> impl Iterator<Item = &LinkHomology> {
        self.links.iter().filter(|l| !l.violations.is_empty())
    }
}

/// Link of a cell as a Δ-complex: its cells are pairs of a cell `σ` and positions of `σ`
/// forming `τ`, and faces delete one of the remaining positions.
fn link_chain_ranks(k: &DualComplex, tau: CellId) -> Vec<usize> {
    let n = k.dim().unwrap_or(0);
    let t = tau.0 + 1;
    // link cells per link dimension e = dim σ - dim τ - 1
    let mut cells: Vec<Vec<(usize, Vec<usize>)>> = vec![vec![]; n - tau.0];
    let mut index: Vec<BTreeMap<(usize, Vec<usize>), usize>> = vec![BTreeMap::new(); n - tau.0];
    for d in tau.0 + 1..=n {
        for s in 0..k.cells[d].len() {
            for keep in subsets(d + 1, t) {
                if k.sub_face((d, s), &keep) == tau {
                    let e = d - tau.0 - 1;
                    index[e].insert((s, keep.clone()), cells[e].len());
                    cells[e].push((s, keep));
                }
            }
        }
    }
    let dims: Vec<usize> = cells.iter().map(Vec::len).collect();
    // boundary matrices; the first is the augmentation
    let mut ranks = vec![];
    let aug_rank = usize::from(dims.first().is_some_and(|c| *c > 0));
    ranks.push(aug_rank);
    for e in 1..cells.len() {
        let mut m = vec![vec![Rat::zero(); dims[e]]; dims[e - 1]];
        for (col, (s, keep)) in cells[e].iter().enumerate() {
            let d = tau.0 + 1 + e;
            let rest: Vec<usize> = (0..=d).filter(|p| !keep.contains(p)).collect();
            for (j, &pos) in rest.iter().enumerate() {
                let face = k.cells[d][*s].faces[pos];
                let shifted: Vec<usize> = keep.iter().map(|&p| if p > pos { p - 1 } else { p }).collect();
                let row = index[e - 1][&(face, shifted)];
                let sign = if j % 2 == 0 { 1 } else { -1 };
                m[row][col] += Rat::from_integer(BigInt::from(sign));
            }
        }
        ranks.push(arith::rank_rat(&m));
    }
    // reduced Betti numbers in degrees -1..=top
    let mut betti = vec![usize::from(dims.first().is_none_or(|c| *c == 0))];
    for e in 0..dims.len() {
        let out_rank = ranks[e];
        let in_rank = ranks.get(e + 1).copied().unwrap_or(0);
        betti.push(dims[e] - out_rank - in_rank);
    }
    betti
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    go(0, n, r, &mut cur, &mut out);
    out
}

/// Reduced rational homology of every link must vanish below `n - dim τ - 1`.
pub fn link_homology_check(k: &DualComplex) -> LinkReport {
    let Some(n) = k.dim() else {
        return LinkReport { links: vec![] };
    };
    let ids: Vec<CellId> = (0..=n).flat_map(|d| (0..k.cells[d].len()).map(move |i| (d, i))).collect();
    let links = ids
        .par_iter()
        .map(|&tau| {
            let betti = link_chain_ranks(k, tau);
            let bound = n as i64 - tau.0 as i64 - 1;
            let violations = betti
                .iter()
                .enumerate()
                .map(|(j, b)| (j as i64 - 1, *b))
                .filter(|(deg, b)| *deg < bound && *b > 0)
                .map(|(deg, _)| deg)
                .collect();
            LinkHomology {
                cell: tau,
                vertices: k.cell(tau).vertices.clone(),
                reduced_betti: betti,
                violations,
            }
        })
        .collect();
    LinkReport { links }
}

/// Integer point of the cone over a complex: the cell whose interior holds it and its
/// positive coordinates on that cell's vertex positions. `cell == None` is the origin.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConePoint {
    pub cell: Option<CellId>,
    pub coords: Vec<u64>,
}

impl ConePoint {
    pub fn origin() -> ConePoint {
        ConePoint {
            cell: None,
            coords: vec![],
        }
    }

    pub fn degree(&self) -> u64 {
        self.coords.iter().sum()
    }
}

impl std::fmt::Display for ConePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.cell {
            None => write!(f, "0"),
            Some((d, i)) => write!(f, "{d}:{i}{:?}", self.coords),
        }
    }
}

/// Product expansion in the quotient basis.
pub type VertexProduct = BTreeMap<ConePoint, i64>;

/// Quotient-basis subring of the Stanley–Reisner ring of the unglued simplices.
#[derive(Debug, Clone)]
pub struct VertexAlgebra {
    pub complex: DualComplex,
    /// Basis points, with the origin first.
    pub basis: Vec<ConePoint>,
    /// Products of basis pairs `i <= j`.
    pub table: BTreeMap<(ConePoint, ConePoint), VertexProduct>,
    /// Lattice realisation when built from a fan.
    fan: Option<Fan>,
}

/// Point of an unglued simplex: the simplex and coordinates on all its positions.
type Preimage = (CellId, Vec<u64>);

impl VertexAlgebra {
    /// Basis of all points up to coordinate sum `degree`.
    pub fn from_complex(complex: DualComplex, degree: u64) -> Result<VertexAlgebra> {
        let mut basis = vec![ConePoint::origin()];
        if let Some(n) = complex.dim() {
            for d in 0..=n {
                for i in 0..complex.cells[d].len() {
                    for coords in positive_vectors(d + 1, degree) {
                        basis.push(ConePoint {
                            cell: Some((d, i)),
                            coords,
                        });
                    }
                }
            }
        }
        VertexAlgebra::with_basis(complex, basis, None)
    }

    /// Vertex of a unimodular simplicial fan on its lattice points of L∞ norm at most
    /// `bound`.
    pub fn from_fan(fan: &Fan, bound: i64) -> Result<VertexAlgebra> {
        for (c, cone) in fan.maximal_cones.iter().enumerate() {
            if !fan.is_unimodular(c) {
                return Err(VertexError::NotUnimodular(cone.clone()));
            }
        }
        let complex = DualComplex::from_fan(fan)?;
        let mut va = VertexAlgebra {
            complex,
            basis: vec![],
            table: BTreeMap::new(),
            fan: Some(fan.clone()),
        };
        let mut basis = vec![];
        for a in -bound..=bound {
            for b in -bound..=bound {
                if let Ok(p) = va.to_cone_point(&[a, b]) {
                    basis.push(p);
                }
            }
        }
        basis.sort();
        let complex = va.complex.clone();
        va = VertexAlgebra::with_basis(complex, basis, Some(fan.clone()))?;
        Ok(va)
    }

    fn with_basis(complex: DualComplex, basis: Vec<ConePoint>, fan: Option<Fan>) -> Result<VertexAlgebra> {
        let mut va = VertexAlgebra {
            complex,
            basis,
            table: BTreeMap::new(),
            fan,
        };
        let pairs: Vec<(ConePoint, ConePoint)> = va
            .basis
            .iter()
            .enumerate()
            .flat_map(|(i, a)| va.basis[i..].iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        let products: Vec<((ConePoint, ConePoint), VertexProduct)> = pairs
            .into_par_iter()
            .map(|(a, b)| {
                let p = vertex_multiply(&va, &a, &b)?;
                Ok(((a, b), p))
            })
            .collect::<Result<_>>()?;
        va.table = products.into_iter().collect();
        Ok(va)
    }

    /// Canonical form of a point given on some cell with possibly zero coordinates.
    pub fn normalize(&self, cell: CellId, coords: &[u64]) -> ConePoint {
        let keep: Vec<usize> = (0..coords.len()).filter(|&p| coords[p] > 0).collect();
        if keep.is_empty() {
            return ConePoint::origin();
        }
        ConePoint {
            cell: Some(self.complex.sub_face(cell, &keep)),
            coords: keep.iter().map(|&p| coords[p]).collect(),
        }
    }

    /// All preimages of a point in the unglued simplices.
    pub fn preimages(&self, p: &ConePoint) -> Vec<Preimage> {
        let maximal = self.complex.maximal_cells();
        let mut out = vec![];
        for m in maximal {
            match p.cell {
                None => out.push((m, vec![0; m.0 + 1])),
                Some(c) => {
                    if c.0 > m.0 {
                        continue;
                    }
                    for keep in subsets(m.0 + 1, c.0 + 1) {
                        if self.complex.sub_face(m, &keep) == c {
                            let mut coords = vec![0; m.0 + 1];
                            for (k, &pos) in keep.iter().enumerate() {
                                coords[pos] = p.coords[k];
                            }
                            out.push((m, coords));
                        }
                    }
                }
            }
        }
        out
    }

    /// Lattice point of a fan realisation as a cone point.
    pub fn to_cone_point(&self, p: &[i64]) -> Result<ConePoint> {
        let fan = self.fan.as_ref().ok_or_else(|| VertexError::OutsideSupport(p.to_vec()))?;
        if p.iter().all(|x| *x == 0) {
            return Ok(ConePoint::origin());
        }
        let pr = arith::rat_vec(p);
        let cones = self.complex.maximal_cells();
        for m in cones {
            let verts = &self.complex.cell(m).vertices;
            let cols: Vec<Vec<Rat>> = verts.iter().map(|&r| arith::rat_vec(&fan.rays[r])).collect();
            let Some(c) = arith::solve_columns(&cols, &pr) else {
                continue;
            };
            if c.iter().any(|x| x.is_negative() || !x.is_integer()) {
                continue;
            }
            let coords: Vec<u64> = c
                .iter()
                .map(|x| u64::try_from(x.to_integer()).expect("nonnegative"))
                .collect();
            return Ok(self.normalize(m, &coords));
        }
        Err(VertexError::OutsideSupport(p.to_vec()))
    }

    /// Lattice point of a cone point in the fan realisation.
    pub fn to_lattice(&self, p: &ConePoint) -> Option<Vec<i64>> {
        let fan = self.fan.as_ref()?;
        let mut out = vec![0i64; fan.rank];
        if let Some(c) = p.cell {
            for (v, a) in self.complex.cell(c).vertices.iter().zip(&p.coords) {
                for (o, r) in out.iter_mut().zip(&fan.rays[*v]) {
                    *o += r * (*a as i64);
                }
            }
        }
        Some(out)
    }

    pub fn product(&self, a: &ConePoint, b: &ConePoint) -> Option<&VertexProduct> {
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        self.table.get(&key)
    }

    /// Product of lattice points of the fan realisation, as lattice points.
    pub fn multiply_lattice(&self, a: &[i64], b: &[i64]) -> Result<BTreeMap<Vec<i64>, i64>> {
        let pa = self.to_cone_point(a)?;
        let pb = self.to_cone_point(b)?;
        let prod = vertex_multiply(self, &pa, &pb)?;
        Ok(prod
            .into_iter()
            .map(|(p, c)| (self.to_lattice(&p).expect("fan realisation"), c))
            .collect())
    }
}

/// Coordinate vectors of length `n` with positive entries summing to at most `degree`.
fn positive_vectors(n: usize, degree: u64) -> Vec<Vec<u64>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn go(n: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let rest = (n - cur.len() - 1) as u64;
        if left < rest + 1 {
            return;
        }
        for a in 1..=left - rest {
            cur.push(a);
            go(n, left - a, cur, out);
            cur.pop();
        }
    }
    go(n, degree, &mut cur, &mut out);
    out
}

/// Stanley–Reisner product on one unglued simplex: coordinatewise sum if both points
/// live on the same simplex, zero otherwise.
pub fn sr_multiply(a: &Preimage, b: &Preimage) -> Option<Preimage> {
    (a.0 == b.0).then(|| (a.0, a.1.iter().zip(&b.1).map(|(x, y)| x + y).collect()))
}

/// `θ_a θ_b` computed upstairs on the unglued simplices, then collected back into the
/// quotient basis. Fails if the upstairs product is not a combination of basis sums.
pub fn vertex_multiply(va: &VertexAlgebra, a: &ConePoint, b: &ConePoint) -> Result<VertexProduct> {
    let mut upstairs: BTreeMap<Preimage, i64> = BTreeMap::new();
    for pa in va.preimages(a) {
        for pb in va.preimages(b) {
            if let Some(p) = sr_multiply(&pa, &pb) {
                *upstairs.entry(p).or_insert(0) += 1;
            }
        }
    }
    let mut out = VertexProduct::new();
    let mut seen: BTreeSet<Preimage> = BTreeSet::new();
    for (p, c) in &upstairs {
        if seen.contains(p) {
            continue;
        }
        let image = va.normalize(p.0, &p.1);
        for pre in va.preimages(&image) {
            let other = upstairs.get(&pre).copied().unwrap_or(0);
            if other != *c {
                return Err(VertexError::NotClosed {
                    a: a.to_string(),
                    b: b.to_string(),
                    at: image.to_string(),
                });
            }
            seen.insert(pre);
        }
        out.insert(image, *c);
    }
    Ok(out)
}

/// A table entry modulo curve classes that disagrees with the vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibreMismatch {
    pub inputs: Vec<Vec<i64>>,
    pub target: Vec<i64>,
    pub mirror: BigInt,
    pub vertex: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibreReport {
    pub compared: usize,
    pub mismatches: Vec<FibreMismatch>,
}

impl FibreReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// The structure constants with every curve class sent to zero against the vertex
/// products, over all pairs of basis points known to both.
pub fn compare_central_fibre(table: &Table, va: &VertexAlgebra) -> Result<FibreReport> {
    let reduced = table.mod_classes();
    let shared: Vec<&Vec<i64>> = table.basis.iter().filter(|p| va.to_cone_point(p).is_ok()).collect();
    let mut compared = 0;
    let mut mismatches = vec![];
    for (i, a) in shared.iter().enumerate() {
        for b in &shared[i..] {
            let vert = va.multiply_lattice(a, b)?;
            let inputs = vec![(*a).clone(), (*b).clone()];
            let mut targets: BTreeSet<Vec<i64>> = vert.keys().cloned().collect();
            let key_of = |q: &Vec<i64>| -> TableKey { Table::key(&inputs, q) };
            for (k, _) in reduced.range(key_of(&vec![i64::MIN, i64::MIN])..) {
                if k.0 != Table::key(&inputs, &[]).0 {
                    break;
                }
                targets.insert(k.1.clone());
            }
            for q in targets {
                compared += 1;
                let m = reduced.get(&key_of(&q)).cloned().unwrap_or_default();
                let v = vert.get(&q).copied().unwrap_or(0);
                if m != BigInt::from(v) {
                    mismatches.push(FibreMismatch {
                        inputs: inputs.clone(),
                        target: q,
                        mirror: m,
                        vertex: v,
                    });
                }
            }
        }
    }
    Ok(FibreReport { compared, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> DualComplex {
        DualComplex::from_simplices(&[vec![0, 1], vec![1, 2], vec![2, 0]], &[]).unwrap()
    }

    fn p2_fan() -> Fan {
        Fan::from_cyclic_rays(vec![vec![1, 0], vec![0, 1], vec![-1, -1]]).unwrap()
    }

    #[test]
    fn triangle_is_a_closed_pseudomanifold() {
        let r = check_pseudomanifold(&triangle());
        assert!(r.passed(), "{r:?}");
        assert!(r.boundary.is_empty());
        assert!(check_pseudomanifold(&triangle().reversed()).passed());
        let cone = triangle().cone();
        let r = check_pseudomanifold(&cone);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.boundary.len(), 3);
        assert!(link_homology_check(&cone).passed());
        assert!(link_homology_check(&triangle()).passed());
    }

    #[test]
    fn misoriented_edge_is_located() {
        let k = DualComplex::from_simplices(&[vec![0, 1], vec![1, 2], vec![0, 2]], &[]).unwrap();
        let r = check_pseudomanifold(&k);
        assert!(!r.passed());
        assert_eq!(r.violations.len(), 2);
        assert!(r.violations.iter().all(|v| v.reason.contains("same orientation")));
    }

    #[test]
    fn single_simplex_is_its_own_boundary() {
        let k = DualComplex::from_simplices(&[vec![0, 1, 2]], &[]).unwrap();
        let r = check_pseudomanifold(&k);
        assert!(r.passed());
        assert_eq!(r.boundary.len(), 3);
        assert!(link_homology_check(&k).passed());
        assert!(check_pseudomanifold(&DualComplex::empty()).passed());
        assert!(link_homology_check(&DualComplex::empty()).passed());
    }

    #[test]
    fn bowtie_link_is_disconnected() {
        let k = DualComplex::from_simplices(&[vec![0, 1, 2], vec![0, 3, 4]], &[]).unwrap();
        let r = link_homology_check(&k);
        assert!(!r.passed());
        let bad: Vec<_> = r.failures().collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].vertices, vec![0]);
        assert_eq!(bad[0].violations, vec![0]);
        assert_eq!(bad[0].reduced_betti, vec![0, 1, 0]);
    }

    #[test]
    fn apex_link_of_cone_over_cycle() {
        let cone = triangle().cone();
        let r = link_homology_check(&cone);
        let apex = r.links.iter().find(|l| l.vertices == vec![3]).unwrap();
        assert_eq!(apex.reduced_betti, vec![0, 0, 1]);
    }

    #[test]
    fn loop_and_two_gon_are_delta_complexes() {
        // one vertex with a loop edge
        let lp = DualComplex::new(
            vec![
                vec![Cell { vertices: vec![0], faces: vec![] }],
                vec![Cell { vertices: vec![0, 0], faces: vec![0, 0] }],
            ],
            vec![1],
        )
        .unwrap();
        assert!(check_pseudomanifold(&lp).passed());
        assert!(link_homology_check(&lp).passed());
        // two edges between the same two vertices
        let v = |i| Cell { vertices: vec![i], faces: vec![] };
        let e = || Cell { vertices: vec![0, 1], faces: vec![1, 0] };
        let bigon = DualComplex::new(vec![vec![v(0), v(1)], vec![e(), e()]], vec![1, -1]).unwrap();
        assert!(check_pseudomanifold(&bigon).passed());
        let va = VertexAlgebra::from_complex(bigon, 3).unwrap();
        let d1 = ConePoint { cell: Some((0, 0)), coords: vec![1] };
        let d2 = ConePoint { cell: Some((0, 1)), coords: vec![1] };
        let prod = vertex_multiply(&va, &d1, &d2).unwrap();
        assert_eq!(prod.len(), 2);
        assert!(prod.values().all(|c| *c == 1));
    }

    #[test]
    fn p2_vertex_products() {
        let va = VertexAlgebra::from_fan(&p2_fan(), 2).unwrap();
        let one = |p: &[i64]| BTreeMap::from([(p.to_vec(), 1i64)]);
        assert_eq!(va.multiply_lattice(&[1, 0], &[0, 1]).unwrap(), one(&[1, 1]));
        assert_eq!(va.multiply_lattice(&[1, 0], &[-1, -1]).unwrap(), one(&[0, -1]));
        assert_eq!(va.multiply_lattice(&[0, 0], &[2, 1]).unwrap(), one(&[2, 1]));
        assert!(va.multiply_lattice(&[1, 2], &[-1, -2]).unwrap().is_empty());
        assert_eq!(va.basis.len(), 25);
    }

    #[test]
    fn disjoint_cones_multiply_to_zero() {
        let fan = Fan::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![vec![0, 1], vec![2, 3]]).unwrap();
        let va = VertexAlgebra::from_fan(&fan, 2).unwrap();
        assert!(va.multiply_lattice(&[1, 1], &[-1, -1]).unwrap().is_empty());
        assert_eq!(va.multiply_lattice(&[1, 0], &[1, 1]).unwrap(), BTreeMap::from([(vec![2, 1], 1)]));
    }

    #[test]
    fn vertex_ring_is_commutative_and_associative() {
        let va = VertexAlgebra::from_fan(&p2_fan(), 1).unwrap();
        let mul = |x: &BTreeMap<Vec<i64>, i64>, p: &[i64]| {
            let mut out: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
            for (q, c) in x {
                for (r, d) in va.multiply_lattice(q, p).unwrap() {
                    *out.entry(r).or_insert(0) += c * d;
                }
            }
            out.retain(|_, c| *c != 0);
            out
        };
        let pts: Vec<Vec<i64>> = va.basis.iter().map(|p| va.to_lattice(p).unwrap()).collect();
        for a in &pts {
            for b in &pts {
                assert_eq!(va.multiply_lattice(a, b).unwrap(), va.multiply_lattice(b, a).unwrap());
                for c in &pts {
                    let left = mul(&va.multiply_lattice(a, b).unwrap(), c);
                    let right = mul(&va.multiply_lattice(b, c).unwrap(), a);
                    assert_eq!(left, right, "{a:?} {b:?} {c:?}");
                }
            }
        }
    }

    #[test]
    fn central_fibre_matches_vertex() {
        use crate::geometry::{build_affine_structure_dim2, PLSection};
        use crate::scattering::{ScatteringDiagram, Wall};
        use crate::series::TruncatedSeries;
        use crate::series::CurveClassMonoid;
        use crate::theta::{AlgebraOptions, MirrorAlgebra};
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        let phi = PLSection::from_kinks(&am, &[vec![1], vec![1], vec![1]], None).unwrap();
        let va = VertexAlgebra::from_fan(&am.fan, 2).unwrap();
        let mut d = ScatteringDiagram::new(am.clone(), CurveClassMonoid::new(&["t"]), 2).unwrap();
        // without a PL section nothing degenerates: the table mod classes is the group ring
        let flat = MirrorAlgebra::new(d.clone(), AlgebraOptions::default()).unwrap().table().unwrap();
        assert!(!compare_central_fibre(&flat, &va).unwrap().passed());
        d.phi = Some(phi.clone());
        let p2_table = MirrorAlgebra::new(d, AlgebraOptions::default()).unwrap().table().unwrap();
        let r = compare_central_fibre(&p2_table, &va).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
        assert!(r.compared > 0);
        // a wall along two fan rays of P1 x P1; crossing the kinked horizontal rays raises
        // the class of z^(0,1) by one, so the lower half carries t^2
        let q = build_affine_structure_dim2(&[0, 0, 0, 0]).unwrap();
        let mut one = ScatteringDiagram::new(q.clone(), CurveClassMonoid::new(&["t"]), 3).unwrap();
        for (dir, cls) in [([0, 1], 1), ([0, -1], 2)] {
            let mut f = TruncatedSeries::one(&one.ctx);
            f.add_term(BigInt::from(1), vec![cls], vec![0, 1]);
            let mut w = Wall::ray(arith::rat_vec(&[0, 0]), dir.to_vec(), f);
            w.normal = vec![1, 0];
            one.add_wall(w).unwrap();
        }
        one.phi = Some(PLSection::from_kinks(&q, &[vec![1], vec![1], vec![1], vec![1]], None).unwrap());
        assert!(crate::theta::check_consistency(&one, 2, 0).unwrap().iter().all(|j| j.ok != Some(false)));
        let table = MirrorAlgebra::new(one, AlgebraOptions::default()).unwrap().table().unwrap();
        assert!(table.entries.values().any(|v| v.min_order() == Some(1) && v.constant_term().is_zero()));
        let r = compare_central_fibre(&table, &VertexAlgebra::from_fan(&q.fan, 2).unwrap()).unwrap();
        assert!(r.passed(), "{:?}", r.mismatches);
        let mut broken = p2_table.clone();
        let key = Table::key(&[vec![1, 0], vec![0, 1]], &[1, 1]);
        broken.entries.remove(&key);
        let r = compare_central_fibre(&broken, &va).unwrap();
        assert_eq!(r.mismatches.len(), 1);
        assert_eq!(r.mismatches[0].target, vec![1, 1]);
    }
}

//! Tropical trees mapped into the skeleton.
//!
//! Positions and derivatives live in one global chart (the fan's ambient coordinates).
//! Each edge stores its derivative at the tail; read from the head it is the negative.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{self, IMat, Rat};
use crate::geometry::{combinations, AffineManifold};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpineError {
    #[error("tree is not connected and acyclic")]
    NotATree,
    #[error("edge {0} refers to a missing vertex")]
    BadEdge(usize),
    #[error("marked vertex {0} is not 1-valent")]
    MarkedNotLeaf(usize),
    #[error("edge {0} has infinite length but does not end at a boundary marker")]
    StrayInfiniteEdge(usize),
    #[error("edge {0} has non-positive length")]
    BadLength(usize),
    #[error("edge {0}: endpoint positions disagree with length times derivative")]
    EdgeMismatch(usize),
    #[error("boundary leg at vertex {0} has derivative {1:?} but weight {2:?}")]
    LegWeight(usize, Vec<i64>, Vec<i64>),
    #[error("vertex {0} maps to the singular locus")]
    Singular(usize),
    #[error("vertex {0} sits at the boundary")]
    AtBoundary(usize),
    #[error("images differ at the gluing points")]
    ImageMismatch,
    #[error("weights {0:?} and {1:?} are not opposite")]
    NotOpposite(Vec<i64>, Vec<i64>),
    #[error("vertex {0} is not a finite 1-valent vertex")]
    NotFiniteLeaf(usize),
    #[error("point is not inside an edge")]
    NotInterior,
    #[error("spine meets a codim-1 cone non-transversally near {0:?}")]
    NotTransverse(Vec<String>),
    #[error("bend data is inconsistent at vertex {0}")]
    Inconsistent(usize),
    #[error("vertex {0} is not a 1-valent free leaf")]
    BadFreeLeaf(usize),
    #[error("missing bend data for vertex {0}")]
    MissingData(usize),
}

type Result<T> = std::result::Result<T, SpineError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Length {
    Finite(Rat),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Marker {
    /// Ends of the spine.
    F(usize),
    /// Points mapping to the boundary at infinity.
    B(usize),
    /// Interior marked points.
    I(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub tail: usize,
    pub head: usize,
    pub length: Length,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricTree {
    pub vertices: usize,
    pub edges: Vec<TreeEdge>,
    pub markers: BTreeMap<usize, Marker>,
}

impl MetricTree {
    pub fn new(vertices: usize, edges: Vec<TreeEdge>, markers: BTreeMap<usize, Marker>) -> Result<Self> {
        let t = MetricTree {
            vertices,
            edges,
            markers,
        };
        t.validate()?;
        Ok(t)
    }

    /// A path `0 - 1 - ... - n` with the given finite lengths.
    pub fn path(lengths: &[Rat]) -> Self {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, l)| TreeEdge {
                tail: i,
                head: i + 1,
                length: Length::Finite(l.clone()),
            })
            .collect();
        MetricTree {
            vertices: lengths.len() + 1,
            edges,
            markers: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail >= self.vertices || e.head >= self.vertices || e.tail == e.head {
                return Err(SpineError::BadEdge(i));
            }
            match &e.length {
                Length::Finite(l) if !l.is_positive() => return Err(SpineError::BadLength(i)),
                Length::Infinite => {
                    let b = |v: usize| matches!(self.markers.get(&v), Some(Marker::B(_)));
                    if !(b(e.tail) || b(e.head)) {
                        return Err(SpineError::StrayInfiniteEdge(i));
                    }
                }
                _ => {}
            }
        }
        if self.vertices == 0 || self.edges.len() + 1 != self.vertices {
            return Err(SpineError::NotATree);
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(_, u) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(SpineError::NotATree);
        }
        for (&v, _) in &self.markers {
            if v >= self.vertices || adj[v].len() != 1 {
                return Err(SpineError::MarkedNotLeaf(v));
            }
        }
        Ok(())
    }

    /// `(edge, neighbour)` pairs per vertex.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![vec![]; self.vertices];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.tail].push((i, e.head));
            adj[e.head].push((i, e.tail));
        }
        adj
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.tail == v || e.head == v).count()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        matches!(self.markers.get(&v), Some(Marker::B(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Position {
    Point(Vec<Rat>),
    /// The image is at infinity in the given direction.
    Boundary(Vec<i64>),
}

impl Position {
    pub fn point(&self) -> Option<&[Rat]> {
        match self {
            Position::Point(p) => Some(p),
            Position::Boundary(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spine {
    pub tree: MetricTree,
    pub positions: Vec<Position>,
    pub derivatives: Vec<Vec<i64>>,
    /// Assigned weight for each boundary-marked vertex.
    pub b_weights: BTreeMap<usize, Vec<i64>>,
}

impl Spine {
    pub fn new(
        tree: MetricTree,
        positions: Vec<Position>,
        derivatives: Vec<Vec<i64>>,
        b_weights: BTreeMap<usize, Vec<i64>>,
    ) -> Result<Self> {
        let s = Spine {
            tree,
            positions,
            derivatives,
            b_weights,
        };
        s.validate()?;
        Ok(s)
    }

    /// Places a tree by integrating derivatives from vertex 0 at `start`.
    pub fn from_tree(tree: MetricTree, start: Vec<Rat>, derivatives: Vec<Vec<i64>>) -> Result<Self> {
        let n = tree.vertices;
        let mut pos: Vec<Option<Position>> = vec![None; n];
        pos[0] = Some(Position::Point(start));
        let adj = tree.adjacency();
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &(ei, u) in &adj[v] {
                if pos[u].is_some() {
                    continue;
                }
                let e = &tree.edges[ei];
                let d = if e.tail == v {
                    derivatives[ei].clone()
                } else {
                    arith::neg(&derivatives[ei])
                };
                let here = pos[v].as_ref().and_then(Position::point).map(<[Rat]>::to_vec);
                pos[u] = Some(match (&e.length, here) {
                    (Length::Finite(l), Some(p)) => Position::Point(
                        p.iter()
                            .zip(&d)
                            .map(|(x, di)| x + l * Rat::from_integer((*di).into()))
                            .collect(),
                    ),
                    _ => Position::Boundary(d.clone()),
                });
                queue.push_back(u);
            }
        }
        let mut b_weights = BTreeMap::new();
        for (&v, m) in &tree.markers {
            if let Marker::B(_) = m {
                if let Some(Position::Boundary(d)) = &pos[v] {
                    b_weights.insert(v, d.clone());
                }
            }
        }
        Spine::new(
            tree,
            pos.into_iter().map(|p| p.expect("tree is connected")).collect(),
            derivatives,
            b_weights,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        for (i, e) in self.tree.edges.iter().enumerate() {
            let d = &self.derivatives[i];
            match (&e.length, &self.positions[e.tail], &self.positions[e.head]) {
                (Length::Finite(l), Position::Point(p), Position::Point(q)) => {
                    let ok = p
                        .iter()
                        .zip(q)
                        .zip(d)
                        .all(|((a, b), di)| b - a == l * Rat::from_integer((*di).into()));
                    if !ok {
                        return Err(SpineError::EdgeMismatch(i));
                    }
                }
                (Length::Infinite, _, _) => {}
                _ => return Err(SpineError::EdgeMismatch(i)),
            }
        }
        for (&v, w) in &self.b_weights {
            let out = self.toward(v).ok_or(SpineError::MarkedNotLeaf(v))?;
            if out != *w {
                return Err(SpineError::LegWeight(v, out, w.clone()));
            }
        }
        Ok(())
    }

    /// Derivative pointing along vertex `v`'s single edge towards `v`.
    fn toward(&self, v: usize) -> Option<Vec<i64>> {
        let (ei, e) = self
            .tree
            .edges
            .iter()
            .enumerate()
            .find(|(_, e)| e.tail == v || e.head == v)?;
        Some(if e.head == v {
            self.derivatives[ei].clone()
        } else {
            arith::neg(&self.derivatives[ei])
        })
    }

    /// Derivative of edge `e` read from vertex `v`.
    pub fn outgoing(&self, e: usize, v: usize) -> Vec<i64> {
        if self.tree.edges[e].tail == v {
            self.derivatives[e].clone()
        } else {
            arith::neg(&self.derivatives[e])
        }
    }

    /// Sum of outgoing derivatives at `v`.
    pub fn nb_vertex(&self, v: usize, am: &AffineManifold) -> Result<Vec<i64>> {
        if let Some(p) = self.positions[v].point() {
            if am.is_singular_point(p) {
                return Err(SpineError::Singular(v));
            }
        }
        Ok(self.nb_raw(v))
    }

    fn nb_raw(&self, v: usize) -> Vec<i64> {
        let mut s = vec![0; self.rank()];
        for (ei, e) in self.tree.edges.iter().enumerate() {
            if e.tail == v || e.head == v {
                s = arith::add(&s, &self.outgoing(ei, v));
            }
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.derivatives.first().map_or(0, Vec::len)
    }

    /// Interior points of edges are always balanced.
    pub fn is_balanced(&self, v: usize, am: &AffineManifold) -> Result<bool> {
        Ok(self.nb_vertex(v, am)?.iter().all(|x| *x == 0))
    }

    pub fn is_wall_spine(&self, walls: &WallSet, am: &AffineManifold) -> bool {
        for v in 0..self.tree.vertices {
            // marked legs end where the curve is pinned, so no balancing is asked there
            if self.tree.markers.contains_key(&v) {
                continue;
            }
            let Some(p) = self.positions[v].point() else {
                return false;
            };
            let nb = match self.nb_vertex(v, am) {
                Ok(nb) => nb,
                Err(_) => continue,
            };
            if nb.iter().all(|x| *x == 0) {
                continue;
            }
            if !walls.walls.iter().any(|w| w.vector == nb && w.contains(p)) {
                return false;
            }
        }
        self.b_weights
            .iter()
            .all(|(&v, w)| self.toward(v).as_ref() == Some(w))
    }

    /// Parametrised image of edge `e`: start, direction, and length (`None` if unbounded).
    fn segment(&self, e: usize) -> Option<(Vec<Rat>, Vec<i64>, Option<Rat>)> {
        let ed = &self.tree.edges[e];
        let d = self.derivatives[e].clone();
        match (&self.positions[ed.tail], &self.positions[ed.head], &ed.length) {
            (Position::Point(p), _, Length::Finite(l)) => Some((p.clone(), d, Some(l.clone()))),
            (Position::Point(p), Position::Boundary(_), Length::Infinite) => Some((p.clone(), d, None)),
            (Position::Boundary(_), Position::Point(q), Length::Infinite) => {
                Some((q.clone(), arith::neg(&d), None))
            }
            _ => None,
        }
    }

    pub fn is_transverse(&self, walls: &WallSet, am: &AffineManifold) -> bool {
        self.transversality_failure(walls, am).is_none()
    }

    /// First violated condition, if any.
    pub fn transversality_failure(&self, walls: &WallSet, am: &AffineManifold) -> Option<String> {
        let rank = self.rank();
        for (e, _) in self.tree.edges.iter().enumerate() {
            let Some((p, d, len)) = self.segment(e) else {
                return Some(format!("edge {e} joins two boundary points"));
            };
            if touches_singular(am, &p, &d, len.as_ref()) {
                return Some(format!("edge {e} meets the singular locus"));
            }
            for (wi, w) in walls.walls.iter().enumerate() {
                match segment_meets_hyperplane(&p, &d, len.as_ref(), &w.normal) {
                    Meet::None => {}
                    Meet::Inside => {
                        if segment_meets_cone(&p, &d, len.as_ref(), w) {
                            return Some(format!("edge {e} runs inside wall {wi}"));
                        }
                    }
                    Meet::At(x) => {
                        if w.contains(&x) && w.on_lower_stratum(&x, rank) {
                            return Some(format!("edge {e} meets a codim-2 stratum of wall {wi}"));
                        }
                    }
                }
            }
        }
        for v in 0..self.tree.vertices {
            let Some(p) = self.positions[v].point() else {
                continue;
            };
            if walls.walls.iter().any(|w| w.contains(p)) && self.tree.valence(v) != 2 {
                return Some(format!("vertex {v} on a wall is not 2-valent"));
            }
            if let Some(Marker::F(_)) = self.tree.markers.get(&v) {
                match am.locate(p) {
                    Ok(l) if l.generic => {}
                    _ => return Some(format!("end {v} lies on a codim-1 cone")),
                }
            }
            if am.is_singular_point(p) {
                return Some(format!("vertex {v} maps to the singular locus"));
            }
        }
        None
    }

    /// Splits edge `e` at parameter `t` (measured from the tail) and returns the new vertex.
    pub fn subdivide(&self, e: usize, t: &Rat) -> Result<(Spine, usize)> {
        let ed = &self.tree.edges[e];
        let inside = match &ed.length {
            Length::Finite(l) => t.is_positive() && t < l,
            Length::Infinite => t.is_positive(),
        };
        if !inside {
            return Err(SpineError::NotInterior);
        }
        let (p, d, _) = self.segment(e).ok_or(SpineError::NotInterior)?;
        // segment() starts at the finite end; for a leg pointing into its tail flip t
        let start_is_tail = self.positions[ed.tail].point().is_some();
        if !start_is_tail {
            return Err(SpineError::NotInterior);
        }
        let x: Vec<Rat> = p
            .iter()
            .zip(&d)
            .map(|(a, di)| a + t * Rat::from_integer((*di).into()))
            .collect();
        let mut s = self.clone();
        let nv = s.tree.vertices;
        s.tree.vertices += 1;
        s.positions.push(Position::Point(x));
        let old_head = ed.head;
        let rest = match &ed.length {
            Length::Finite(l) => Length::Finite(l - t),
            Length::Infinite => Length::Infinite,
        };
        s.tree.edges[e] = TreeEdge {
            tail: ed.tail,
            head: nv,
            length: Length::Finite(t.clone()),
        };
        s.tree.edges.push(TreeEdge {
            tail: nv,
            head: old_head,
            length: rest,
        });
        s.derivatives.push(self.derivatives[e].clone());
        Ok((s, nv))
    }

    /// Merges endpoints of an edge with zero derivative.
    pub fn contract_edge(&self, e: usize) -> Result<Spine> {
        if self.derivatives[e].iter().any(|x| *x != 0) {
            return Err(SpineError::Inconsistent(self.tree.edges[e].tail));
        }
        let TreeEdge { tail, head, .. } = self.tree.edges[e].clone();
        let remap = |v: usize| -> usize {
            let v = if v == head { tail } else { v };
            if v > head {
                v - 1
            } else {
                v
            }
        };
        let mut edges = vec![];
        let mut derivs = vec![];
        for (i, ed) in self.tree.edges.iter().enumerate() {
            if i == e {
                continue;
            }
            edges.push(TreeEdge {
                tail: remap(ed.tail),
                head: remap(ed.head),
                length: ed.length.clone(),
            });
            derivs.push(self.derivatives[i].clone());
        }
        let positions = (0..self.tree.vertices)
            .filter(|&v| v != head)
            .map(|v| self.positions[v].clone())
            .collect();
        let markers = self
            .tree
            .markers
            .iter()
            .filter(|(v, _)| **v != head && **v != tail)
            .map(|(v, m)| (remap(*v), *m))
            .collect();
        let b_weights = self
            .b_weights
            .iter()
            .filter(|(v, _)| **v != head && **v != tail)
            .map(|(v, w)| (remap(*v), w.clone()))
            .collect();
        Ok(Spine {
            tree: MetricTree {
                vertices: self.tree.vertices - 1,
                edges,
                markers,
            },
            positions,
            derivatives: derivs,
            b_weights,
        })
    }

    /// Disjoint union with `other`, then identifies vertex `a` of self with vertex `b` of
    /// other (shifted).
    fn join(&self, a: usize, other: &Spine, b: usize) -> Spine {
        let off = self.tree.vertices;
        let map = |v: usize| -> usize {
            let v = v + off;
            let bb = b + off;
            if v == bb {
                a
            } else if v > bb {
                v - 1
            } else {
                v
            }
        };
        let mut s = self.clone();
        for ed in &other.tree.edges {
            s.tree.edges.push(TreeEdge {
                tail: map(ed.tail),
                head: map(ed.head),
                length: ed.length.clone(),
            });
        }
        s.derivatives.extend(other.derivatives.iter().cloned());
        for (v, p) in other.positions.iter().enumerate() {
            if v != b {
                s.positions.push(p.clone());
            }
        }
        for (v, m) in &other.tree.markers {
            if *v != b {
                s.tree.markers.insert(map(*v), *m);
            }
        }
        for (v, w) in &other.b_weights {
            if *v != b {
                s.b_weights.insert(map(*v), w.clone());
            }
        }
        s.tree.vertices += other.tree.vertices - 1;
        s
    }
}

/// Glues two spines at edge-interior points with equal images; the junction is 4-valent.
pub fn glue(s1: &Spine, p1: (usize, Rat), s2: &Spine, p2: (usize, Rat)) -> Result<Spine> {
    let (a, va) = s1.subdivide(p1.0, &p1.1)?;
    let (b, vb) = s2.subdivide(p2.0, &p2.1)?;
    if a.positions[va] != b.positions[vb] {
        return Err(SpineError::ImageMismatch);
    }
    Ok(a.join(va, &b, vb))
}

/// Concatenates at finite 1-valent vertices with equal images and opposite weights.
pub fn concat(s1: &Spine, v1: usize, s2: &Spine, v2: usize) -> Result<Spine> {
    for (s, v) in [(s1, v1), (s2, v2)] {
        if s.tree.valence(v) != 1 || s.positions[v].point().is_none() {
            return Err(SpineError::NotFiniteLeaf(v));
        }
    }
    if s1.positions[v1] != s2.positions[v2] {
        return Err(SpineError::ImageMismatch);
    }
    let w1 = s1.nb_raw(v1);
    let w2 = s2.nb_raw(v2);
    if arith::add(&w1, &w2).iter().any(|x| *x != 0) {
        return Err(SpineError::NotOpposite(w1, w2));
    }
    let mut s = s1.join(v1, s2, v2);
    s.tree.markers.remove(&v1);
    Ok(s)
}

/// Transverse crossings of the codim-1 cones of the fan, weighted by `|<e, d>|`.
pub fn z_cycle(s: &Spine, am: &AffineManifold) -> Result<BTreeMap<Vec<usize>, i64>> {
    let fan = &am.fan;
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for c in &fan.maximal_cones {
        for f in combinations(c.len(), fan.rank - 1) {
            let mut face: Vec<usize> = f.iter().map(|&i| c[i]).collect();
            face.sort_unstable();
            faces.insert(face);
        }
    }
    let mut out: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
    for face in &faces {
        let rows: IMat = face.iter().map(|&i| fan.rays[i].clone()).collect();
        let e = arith::primitive_from_rat(&arith::kernel(&rows, fan.rank)[0]);
        let cone = WallPair::new(rows.clone(), vec![0; fan.rank]);
        let mut add = |x: &[Rat], d: &[i64]| -> Result<()> {
            if cone.on_lower_stratum(x, fan.rank) {
                return Err(SpineError::NotTransverse(x.iter().map(arith::fmt_rat).collect()));
            }
            let c = arith::dot(&e, d).abs();
            if c == 0 {
                return Err(SpineError::NotTransverse(x.iter().map(arith::fmt_rat).collect()));
            }
            *out.entry(face.clone()).or_default() += c;
            Ok(())
        };
        for (ei, ed) in s.tree.edges.iter().enumerate() {
            let Some((p, d, len)) = s.segment(ei) else {
                continue;
            };
            match segment_meets_hyperplane(&p, &d, len.as_ref(), &e) {
                Meet::None => {}
                Meet::Inside => {
                    if segment_meets_cone(&p, &d, len.as_ref(), &cone) {
                        return Err(SpineError::NotTransverse(p.iter().map(arith::fmt_rat).collect()));
                    }
                }
                Meet::At(x) => {
                    if !cone.contains(&x) {
                        continue;
                    }
                    // endpoints are handled once per vertex below
                    let at_start = x == p;
                    let at_end = len
                        .as_ref()
                        .is_some_and(|l| x.iter().zip(&p).zip(&d).all(|((xi, pi), di)| *xi == pi + l * Rat::from_integer((*di).into())));
                    if !(at_start || at_end) {
                        add(&x, &d)?;
                    }
                    let _ = ed;
                }
            }
        }
        for v in 0..s.tree.vertices {
            let Some(p) = s.positions[v].point() else {
                continue;
            };
            if !cone.contains(p) {
                continue;
            }
            if s.tree.valence(v) != 2 || s.nb_raw(v).iter().any(|x| *x != 0) {
                return Err(SpineError::NotTransverse(p.iter().map(arith::fmt_rat).collect()));
            }
            let (ei, _) = s
                .tree
                .edges
                .iter()
                .enumerate()
                .find(|(_, e)| e.tail == v || e.head == v)
                .expect("2-valent");
            add(p, &s.outgoing(ei, v))?;
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// Recovers edge derivatives from bends at every vertex but the free leaf.
pub fn solve_weights(
    tree: &MetricTree,
    nb: &BTreeMap<usize, Vec<i64>>,
    free_leaf: Option<usize>,
    rank: usize,
) -> Result<Vec<Vec<i64>>> {
    tree.validate()?;
    let adj = tree.adjacency();
    let root = match free_leaf {
        Some(r) => {
            if r >= tree.vertices || adj[r].len() != 1 {
                return Err(SpineError::BadFreeLeaf(r));
            }
            r
        }
        None => 0,
    };
    // BFS order from the root, then process in reverse
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; tree.vertices];
    let mut order = vec![root];
    let mut seen = vec![false; tree.vertices];
    seen[root] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for &(e, u) in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some((e, v));
                order.push(u);
            }
        }
        i += 1;
    }
    // up[v] = derivative at v pointing to its parent
    let mut up: Vec<Vec<i64>> = vec![vec![0; rank]; tree.vertices];
    let mut derivs = vec![vec![0; rank]; tree.edges.len()];
    for &v in order.iter().rev() {
        let mut children_sum = vec![0; rank];
        for &(e, u) in &adj[v] {
            if parent[u] == Some((e, v)) {
                children_sum = arith::sub(&children_sum, &up[u]);
            }
        }
        match parent[v] {
            Some((e, _)) => {
                let data = nb.get(&v).ok_or(SpineError::MissingData(v))?;
                up[v] = arith::sub(data, &children_sum);
                derivs[e] = if tree.edges[e].tail == v {
                    up[v].clone()
                } else {
                    arith::neg(&up[v])
                };
            }
            None => {
                if free_leaf.is_none() {
                    let data = nb.get(&v).ok_or(SpineError::MissingData(v))?;
                    if *data != children_sum {
                        return Err(SpineError::Inconsistent(v));
                    }
                }
            }
        }
    }
    Ok(derivs)
}

/// A codim-1 cone with an attached bend vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WallPair {
    pub generators: Vec<Vec<i64>>,
    pub vector: Vec<i64>,
    /// Primitive conormal of the span, first nonzero entry positive.
    pub normal: Vec<i64>,
    /// Maximal cone the wall was generated in, if known.
    pub maximal: Option<usize>,
}

impl WallPair {
    pub fn new(generators: Vec<Vec<i64>>, vector: Vec<i64>) -> Self {
        let rank = vector.len();
        let normal = hyperplane_normal(&generators, rank).unwrap_or_else(|| vec![0; rank]);
        WallPair {
            generators,
            vector,
            normal,
            maximal: None,
        }
    }

    pub fn dim(&self) -> usize {
        arith::rank(&self.generators)
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        in_cone(&self.generators, x)
    }

    /// True if `x` lies in the cone spanned by fewer than `rank - 1` independent generators.
    pub fn on_lower_stratum(&self, x: &[Rat], rank: usize) -> bool {
        if rank < 2 {
            return false;
        }
        let k = rank - 2;
        if k == 0 {
            return x.iter().all(Zero::is_zero);
        }
        combinations(self.generators.len(), k).iter().any(|sub| {
            let g: Vec<Vec<i64>> = sub.iter().map(|&i| self.generators[i].clone()).collect();
            in_cone(&g, x)
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WallSet {
    pub walls: Vec<WallPair>,
}

impl WallSet {
    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    fn key(w: &WallPair) -> (Option<usize>, Vec<i64>, Vec<i64>) {
        (w.maximal, w.normal.clone(), w.vector.clone())
    }

    pub fn keys(&self) -> BTreeSet<(Option<usize>, Vec<i64>, Vec<i64>)> {
        self.walls.iter().map(Self::key).collect()
    }
}

/// Membership in the cone generated by `gens`, by trying simplicial sub-cones.
pub fn in_cone(gens: &[Vec<i64>], x: &[Rat]) -> bool {
    if x.iter().all(Zero::is_zero) {
        return true;
    }
    let d = arith::rank(&gens.to_vec());
    for size in 1..=d {
        for sub in combinations(gens.len(), size) {
            let cols: Vec<Vec<Rat>> = sub.iter().map(|&i| arith::rat_vec(&gens[i])).collect();
            if let Some(c) = arith::solve_columns(&cols, x) {
                if c.iter().all(|v| !v.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

fn hyperplane_normal(gens: &[Vec<i64>], rank: usize) -> Option<Vec<i64>> {
    let ker = arith::kernel(&gens.to_vec(), rank);
    if ker.len() != 1 {
        return None;
    }
    let mut n = arith::primitive_from_rat(&ker[0]);
    if n.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
        n = arith::neg(&n);
    }
    Some(n)
}

/// Intersection of the cone on `gens` with the hyperplane `<n, .> = 0`.
pub fn cut(gens: &[Vec<i64>], n: &[i64]) -> Vec<Vec<i64>> {
    let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
    for g in gens {
        if arith::dot(n, g) == 0 {
            out.insert(g.clone());
        }
    }
    for a in gens {
        let pa = arith::dot(n, a);
        if pa <= 0 {
            continue;
        }
        for b in gens {
            let pb = arith::dot(n, b);
            if pb >= 0 {
                continue;
            }
            let v = arith::sub(&arith::scale(b, pa), &arith::scale(a, pb));
            out.insert(arith::primitive(&v).0);
        }
    }
    reduce_extreme(out.into_iter().collect())
}

/// Drops redundant generators of cones of dimension at most two.
fn reduce_extreme(gens: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let gens: Vec<Vec<i64>> = gens.into_iter().filter(|g| g.iter().any(|x| *x != 0)).collect();
    let d = arith::rank(&gens);
    if d == 0 {
        return vec![];
    }
    if d > 2 {
        return gens;
    }
    gens.iter()
        .filter(|g| {
            let others: Vec<Vec<i64>> = gens.iter().filter(|h| h != g).cloned().collect();
            // a generator is extreme unless it is a non-negative combination of the others
            // while not being a positive multiple of another
            !in_cone(&others, &arith::rat_vec(g)) || others.iter().any(|h| arith::scale(h, -1) == **g)
        })
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Walls spanned by codim-2 cones of the fan and vectors of `v`, closed up `steps` times
/// under the intersection rule.
pub fn generate_walls(am: &AffineManifold, v: &[Vec<i64>], steps: usize) -> WallSet {
    let fan = &am.fan;
    let rank = fan.rank;
    let mut set = WallSet::default();
    let mut keys: BTreeSet<(Option<usize>, Vec<i64>, Vec<i64>)> = BTreeSet::new();
    if rank < 2 || v.is_empty() {
        return set;
    }
    let mut push = |set: &mut WallSet, span: &[Vec<i64>], vec: &[i64]| -> bool {
        let mut basis = span.to_vec();
        basis.push(vec.to_vec());
        let Some(n) = hyperplane_normal(&basis, rank) else {
            return false;
        };
        let mut added = false;
        for (ci, c) in fan.maximal_cones.iter().enumerate() {
            let gens: Vec<Vec<i64>> = c.iter().map(|&i| fan.rays[i].clone()).collect();
            let d = cut(&gens, &n);
            if d.is_empty() || arith::rank(&d) != rank - 1 {
                continue;
            }
            let key = (Some(ci), n.clone(), vec.to_vec());
            if keys.insert(key) {
                set.walls.push(WallPair {
                    generators: d,
                    vector: vec.to_vec(),
                    normal: n.clone(),
                    maximal: Some(ci),
                });
                added = true;
            }
        }
        added
    };
    let mut codim2: BTreeSet<Vec<usize>> = BTreeSet::new();
    for c in &fan.maximal_cones {
        for sub in combinations(c.len(), rank - 2) {
            let mut f: Vec<usize> = sub.iter().map(|&i| c[i]).collect();
            f.sort_unstable();
            codim2.insert(f);
        }
    }
    for tau in &codim2 {
        let span: Vec<Vec<i64>> = tau.iter().map(|&i| fan.rays[i].clone()).collect();
        for vec in v {
            push(&mut set, &span, vec);
        }
    }
    for _ in 0..steps {
        let snapshot = set.walls.clone();
        let mut grew = false;
        for i in 0..snapshot.len() {
            for j in i + 1..snapshot.len() {
                let (a, b) = (&snapshot[i], &snapshot[j]);
                if a.maximal != b.maximal || a.normal == b.normal {
                    continue;
                }
                let inter = cut(&a.generators, &b.normal);
                let dim = arith::rank(&inter);
                if dim + 2 != rank {
                    continue;
                }
                for vec in v {
                    grew |= push(&mut set, &inter, vec);
                }
            }
        }
        if !grew {
            break;
        }
    }
    set
}

enum Meet {
    None,
    Inside,
    At(Vec<Rat>),
}

fn segment_meets_hyperplane(p: &[Rat], d: &[i64], len: Option<&Rat>, n: &[i64]) -> Meet {
    let np = arith::dot_rat(n, p);
    let nd = arith::dot(n, d);
    if nd == 0 {
        return if np.is_zero() { Meet::Inside } else { Meet::None };
    }
    let t = -np / Rat::from_integer(nd.into());
    if t.is_negative() || len.is_some_and(|l| &t > l) {
        return Meet::None;
    }
    Meet::At(
        p.iter()
            .zip(d)
            .map(|(a, di)| a + &t * Rat::from_integer((*di).into()))
            .collect(),
    )
}

/// For a segment inside the span of the wall: does it touch the wall cone? Checked at
/// both ends and at the crossings of the cone's facet hyperplanes inside the span.
fn segment_meets_cone(p: &[Rat], d: &[i64], len: Option<&Rat>, w: &WallPair) -> bool {
    if w.contains(p) {
        return true;
    }
    let end: Option<Vec<Rat>> = len.map(|l| {
        p.iter()
            .zip(d)
            .map(|(a, di)| a + l * Rat::from_integer((*di).into()))
            .collect()
    });
    if end.as_ref().is_some_and(|e| w.contains(e)) {
        return true;
    }
    // far point stands in for an unbounded leg
    let probe_far = |t: Rat| -> Vec<Rat> {
        p.iter()
            .zip(d)
            .map(|(a, di)| a + &t * Rat::from_integer((*di).into()))
            .collect()
    };
    for g in &w.generators {
        // hyperplanes through the origin spanned by facets are hard to list in general;
        // sample where the segment crosses each generator's orthogonal complement
        let nd = arith::dot(g, d);
        if nd == 0 {
            continue;
        }
        let t = -arith::dot_rat(g, p) / Rat::from_integer(nd.into());
        if t.is_negative() || len.is_some_and(|l| &t > l) {
            continue;
        }
        if w.contains(&probe_far(t)) {
            return true;
        }
    }
    if len.is_none() {
        return w.contains(&probe_far(Rat::from_integer(1_000_000.into())));
    }
    false
}

fn touches_singular(am: &AffineManifold, p: &[Rat], d: &[i64], len: Option<&Rat>) -> bool {
    if am.singular_cones.is_empty() {
        return false;
    }
    if am.is_singular_point(p) {
        return true;
    }
    // the singular locus here is the origin of a rank-2 structure or a union of cones;
    // test the point of the segment closest to each singular cone's span
    for cone in &am.singular_cones {
        let gens: Vec<Vec<i64>> = cone.iter().map(|&i| am.fan.rays[i].clone()).collect();
        // p + t d = sum c_i g_i
        let mut cols: Vec<Vec<Rat>> = gens.iter().map(|g| arith::rat_vec(g)).collect();
        cols.push(arith::rat_vec(&arith::neg(d)));
        let sol = arith::solve_columns(&cols, p);
        if let Some(sol) = sol {
            let t = sol.last().cloned().unwrap_or_else(Rat::one);
            let x: Vec<Rat> = p
                .iter()
                .zip(d)
                .map(|(a, di)| a + &t * Rat::from_integer((*di).into()))
                .collect();
            let in_range = !t.is_negative() && len.map_or(true, |l| &t <= l);
            if in_range && in_cone(&gens, &x) {
                return true;
            }
        }
    }
    false
}

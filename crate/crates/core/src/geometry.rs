//! Fans, the integral affine structure on their support, and piecewise-linear data on it.
//!
//! Every maximal cone uses the ambient coordinates of the fan as its chart. Crossing an
//! interior codim-1 cone applies a transition matrix that fixes the shared face, so a
//! non-toric structure is the same fan with non-identity transitions.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, IMat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("self-intersection sequence has length {0}; at least 3 entries are needed")]
    CycleTooShort(usize),
    #[error("ray {0:?} is not primitive")]
    NotPrimitive(Vec<i64>),
    #[error("ray {0:?} has length {1}, expected {2}")]
    BadRayLength(Vec<i64>, usize, usize),
    #[error("cone {0:?} refers to a missing ray")]
    BadRayIndex(Vec<usize>),
    #[error("cone {0:?} is not simplicial and full-dimensional")]
    DegenerateCone(Vec<usize>),
    #[error("cone {0:?} is not unimodular")]
    NotUnimodular(Vec<usize>),
    #[error("maximal cones {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
    #[error("point {0:?} lies outside the support of the fan")]
    OutsideSupport(Vec<String>),
    #[error("codim-1 cone between {0} and {1} is on the boundary")]
    BoundaryWall(usize, usize),
    #[error("rank-2 structure expects rays in strictly counter-clockwise order")]
    NotCyclic,
    #[error("value {0} is not integral")]
    NonIntegral(String),
    #[error("piecewise-linear data does not close up around the origin")]
    KinksDoNotClose,
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("only available when all transitions are the identity")]
    NeedsTrivialMonodromy,
}

type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub maximal_cones: Vec<Vec<usize>>,
    pub complete: bool,
    pub simplicial: bool,
}

impl Fan {
    pub fn new(rank: usize, rays: Vec<Vec<i64>>, mut maximal_cones: Vec<Vec<usize>>) -> Result<Fan> {
        for r in &rays {
            if r.len() != rank {
                return Err(GeometryError::BadRayLength(r.clone(), r.len(), rank));
            }
            if !arith::is_primitive(r) {
                return Err(GeometryError::NotPrimitive(r.clone()));
            }
        }
        let mut simplicial = true;
        for c in maximal_cones.iter_mut() {
            if c.iter().any(|&i| i >= rays.len()) {
                return Err(GeometryError::BadRayIndex(c.clone()));
            }
            let gens: IMat = c.iter().map(|&i| rays[i].clone()).collect();
            if arith::rank(&gens) != c.len() {
                simplicial = false;
            }
        }
        let mut fan = Fan {
            rank,
            rays,
            maximal_cones,
            complete: false,
            simplicial,
        };
        fan.complete = fan.detect_complete();
        Ok(fan)
    }

    /// Complete rank-2 fan from rays, ordered counter-clockwise.
    pub fn from_cyclic_rays(rays: Vec<Vec<i64>>) -> Result<Fan> {
        let k = rays.len();
        if k < 3 {
            return Err(GeometryError::CycleTooShort(k));
        }
        for i in 0..k {
            if arith::cross2(&rays[i], &rays[(i + 1) % k]) <= 0 {
                return Err(GeometryError::NotCyclic);
            }
        }
        if winding(&rays) != 1 {
            return Err(GeometryError::NotCyclic);
        }
        let cones = (0..k).map(|i| vec![i, (i + 1) % k]).collect();
        Fan::new(2, rays, cones)
    }

    fn detect_complete(&self) -> bool {
        if !self.simplicial || self.maximal_cones.iter().any(|c| c.len() != self.rank) {
            return false;
        }
        if self.rank == 1 {
            let mut signs: BTreeSet<i64> = BTreeSet::new();
            for c in &self.maximal_cones {
                signs.insert(self.rays[c[0]][0].signum());
            }
            return signs.len() == 2;
        }
        // every facet shared by exactly two cones
        let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for c in &self.maximal_cones {
            for f in facets(c) {
                *count.entry(f).or_default() += 1;
            }
        }
        count.values().all(|&n| n == 2)
    }

    /// Pairs of maximal cones sharing a codim-1 face, with that face.
    pub fn interior_walls(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let mut by_face: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, c) in self.maximal_cones.iter().enumerate() {
            if c.len() != self.rank {
                continue;
            }
            for f in facets(c) {
                by_face.entry(f).or_default().push(ci);
            }
        }
        let mut out = vec![];
        for (f, cs) in by_face {
            if cs.len() == 2 {
                out.push((cs[0], cs[1], f));
            }
        }
        out
    }

    pub fn shared_face(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let ca: BTreeSet<usize> = self.maximal_cones[a].iter().copied().collect();
        let cb: BTreeSet<usize> = self.maximal_cones[b].iter().copied().collect();
        let common: Vec<usize> = ca.intersection(&cb).copied().collect();
        (a != b && common.len() + 1 == self.rank && ca.len() == self.rank && cb.len() == self.rank)
            .then_some(common)
    }

    /// Coefficients of `p` in the generators of cone `c`, when it lies in their span.
    pub fn cone_coords(&self, c: usize, p: &[Rat]) -> Option<Vec<Rat>> {
        let cols: Vec<Vec<Rat>> = self.maximal_cones[c]
            .iter()
            .map(|&i| arith::rat_vec(&self.rays[i]))
            .collect();
        arith::solve_columns(&cols, p)
    }

    pub fn is_unimodular(&self, c: usize) -> bool {
        let cone = &self.maximal_cones[c];
        let gens: IMat = cone.iter().map(|&i| self.rays[i].clone()).collect();
        if cone.len() == self.rank {
            return arith::det(&gens).abs() == 1;
        }
        // a lower-dimensional cone is unimodular if its generators extend to a basis;
        // checked via gcd of maximal minors being 1
        max_minor_gcd(&gens) == 1
    }

    /// Self-intersection numbers of a complete smooth rank-2 fan given in cyclic order.
    pub fn cyclic_self_intersections(&self) -> Option<Vec<i64>> {
        if self.rank != 2 || !self.complete {
            return None;
        }
        let k = self.rays.len();
        let cyclic = (0..k).all(|i| self.maximal_cones.get(i) == Some(&vec![i, (i + 1) % k]));
        if !cyclic {
            return None;
        }
        let mut d = vec![];
        for i in 0..k {
            let prev = &self.rays[(i + k - 1) % k];
            let next = &self.rays[(i + 1) % k];
            let s = arith::add(prev, next);
            let v = &self.rays[i];
            // s must be a multiple of v
            if arith::cross2(&s, v) != 0 {
                return None;
            }
            let idx = if v[0] != 0 { 0 } else { 1 };
            if s[idx] % v[idx] != 0 {
                return None;
            }
            d.push(-s[idx] / v[idx]);
        }
        Some(d)
    }
}

fn facets(c: &[usize]) -> Vec<Vec<usize>> {
    (0..c.len())
        .map(|skip| {
            let mut f: Vec<usize> = c
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != skip)
                .map(|(_, &x)| x)
                .collect();
            f.sort_unstable();
            f
        })
        .collect()
}

fn max_minor_gcd(rows: &IMat) -> i64 {
    let k = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if k == 0 {
        return 1;
    }
    let mut g = 0;
    for cols in combinations(n, k) {
        let m: IMat = rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
        g = num_integer::gcd(g, arith::det(&m));
    }
    g
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    go(0, n, k, &mut vec![], &mut out);
    out
}

/// Number of full turns made by a closed sequence of rank-2 vectors, assuming each step
/// turns strictly counter-clockwise by less than a half-turn.
fn winding(v: &[Vec<i64>]) -> usize {
    let k = v.len();
    (0..k)
        .filter(|&i| arith::angle_cmp_int(&v[(i + 1) % k], &v[i]) != std::cmp::Ordering::Greater)
        .count()
}

/// Unfolds `v_{i+1} = -d_i v_i - v_{i-1}` from `(1,0), (0,1)`, returning `k + 2` vectors.
pub fn unfold(d: &[i64]) -> Vec<Vec<i64>> {
    let k = d.len();
    let mut v = vec![vec![1, 0], vec![0, 1]];
    for i in 1..=k {
        let di = d[i % k];
        let next = arith::sub(&arith::scale(&v[i], -di), &v[i - 1]);
        v.push(next);
    }
    v
}

/// Smooth complete fan with `k` rays used to host a non-toric structure.
fn standard_fan(k: usize) -> Vec<Vec<i64>> {
    if k == 3 {
        return vec![vec![1, 0], vec![0, 1], vec![-1, -1]];
    }
    let mut rays = vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]];
    let mut i = 0;
    while rays.len() < k {
        let j = (i + 1) % rays.len();
        let mid = arith::add(&rays[i], &rays[j]);
        rays.insert(i + 1, mid);
        i = (i + 2) % rays.len();
    }
    rays
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineManifold {
    pub fan: Fan,
    /// `(from, to) -> T` with `T` taking `from`-chart coordinates to `to`-chart coordinates.
    pub transitions: BTreeMap<(usize, usize), IMat>,
    /// Codim ≥ 2 cones (ray-index sets; the empty set is the origin) where the structure is
    /// singular.
    pub singular_cones: Vec<Vec<usize>>,
    pub self_intersections: Option<Vec<i64>>,
}

impl AffineManifold {
    /// The fan's own linear structure: every transition is the identity.
    pub fn toric(fan: Fan) -> AffineManifold {
        let id = arith::identity(fan.rank);
        let mut transitions = BTreeMap::new();
        for (a, b, _) in fan.interior_walls() {
            transitions.insert((a, b), id.clone());
            transitions.insert((b, a), id.clone());
        }
        let self_intersections = fan.cyclic_self_intersections();
        AffineManifold {
            fan,
            transitions,
            singular_cones: vec![],
            self_intersections,
        }
    }

    /// Rank-2 structure with `v_{i-1} + v_{i+1} = -d_i v_i` in the chart around each ray,
    /// hosted on the given cyclic fan.
    pub fn with_self_intersections(fan: Fan, d: &[i64]) -> Result<AffineManifold> {
        let k = d.len();
        if k < 3 {
            return Err(GeometryError::CycleTooShort(k));
        }
        if fan.rank != 2 || fan.rays.len() != k || !fan.complete {
            return Err(GeometryError::NotCyclic);
        }
        for i in 0..k {
            if fan.maximal_cones[i] != vec![i, (i + 1) % k] {
                return Err(GeometryError::NotCyclic);
            }
            if !fan.is_unimodular(i) {
                return Err(GeometryError::NotUnimodular(fan.maximal_cones[i].clone()));
            }
        }
        let r = &fan.rays;
        let mut transitions = BTreeMap::new();
        for i in 0..k {
            let prev = (i + k - 1) % k;
            let next = (i + 1) % k;
            // from chart C_i into chart C_{i-1}: r_i fixed, r_{i+1} lands where the
            // relation around ray i puts it
            let image = arith::sub(&arith::scale(&r[i], -d[i]), &r[prev]);
            let target = arith::from_columns(&[r[i].clone(), image]);
            let source = arith::from_columns(&[r[i].clone(), r[next].clone()]);
            let src_inv = arith::unimodular_inverse(&source)
                .ok_or_else(|| GeometryError::NotUnimodular(vec![i, next]))?;
            let a = arith::mat_mul(&target, &src_inv);
            let t = arith::unimodular_inverse(&a)
                .ok_or_else(|| GeometryError::NotUnimodular(vec![prev, i]))?;
            transitions.insert((i, prev), a);
            transitions.insert((prev, i), t);
        }
        let mut am = AffineManifold {
            fan,
            transitions,
            singular_cones: vec![],
            self_intersections: Some(d.to_vec()),
        };
        if am.monodromy(0)? != arith::identity(2) {
            am.singular_cones = vec![vec![]];
        }
        Ok(am)
    }

    pub fn rank(&self) -> usize {
        self.fan.rank
    }

    pub fn is_toric(&self) -> bool {
        let id = arith::identity(self.fan.rank);
        self.transitions.values().all(|t| *t == id)
    }

    pub fn transition(&self, from: usize, to: usize) -> Result<&IMat> {
        self.transitions
            .get(&(from, to))
            .ok_or(GeometryError::NotAdjacent(from, to))
    }

    /// Transports `v` along a sequence of adjacent maximal cones, returning it in the
    /// chart of the last one.
    pub fn parallel_transport(&self, path: &[usize], v: &[i64]) -> Result<Vec<i64>> {
        let mut out = v.to_vec();
        for w in path.windows(2) {
            out = arith::mat_vec(self.transition(w[0], w[1])?, &out);
        }
        Ok(out)
    }

    /// Rank 2: the matrix of transport once counter-clockwise around the origin starting
    /// and ending in maximal cone `base`.
    pub fn monodromy(&self, base: usize) -> Result<IMat> {
        let k = self.fan.maximal_cones.len();
        if self.fan.rank != 2 || !self.fan.complete {
            return Err(GeometryError::NotCyclic);
        }
        let mut m = arith::identity(2);
        for step in 0..k {
            let from = (base + step) % k;
            let to = (base + step + 1) % k;
            m = arith::mat_mul(self.transition(from, to)?, &m);
        }
        Ok(m)
    }

    pub fn locate(&self, p: &[Rat]) -> Result<Location> {
        if p.len() != self.fan.rank {
            return Err(GeometryError::Shape {
                expected: self.fan.rank,
                got: p.len(),
            });
        }
        let mut containing = vec![];
        let mut smallest: Option<Vec<usize>> = None;
        for (ci, cone) in self.fan.maximal_cones.iter().enumerate() {
            let Some(coords) = self.fan.cone_coords(ci, p) else {
                continue;
            };
            if coords.iter().any(|c| c.is_negative()) {
                continue;
            }
            containing.push(ci);
            let support: Vec<usize> = cone
                .iter()
                .zip(&coords)
                .filter(|(_, c)| c.is_positive())
                .map(|(&r, _)| r)
                .collect();
            let mut support = support;
            support.sort_unstable();
            smallest = Some(match smallest {
                Some(s) if s.len() <= support.len() => s,
                _ => support,
            });
        }
        let Some(cone) = smallest else {
            return Err(GeometryError::OutsideSupport(p.iter().map(arith::fmt_rat).collect()));
        };
        let generic = cone.len() == self.fan.rank;
        Ok(Location {
            generic,
            cone,
            maximal: containing,
        })
    }

    /// Maximal cone containing the point in its interior or on its boundary, preferring
    /// interiors.
    pub fn chart_of(&self, p: &[Rat]) -> Result<usize> {
        Ok(self.locate(p)?.maximal[0])
    }

    pub fn is_singular_point(&self, p: &[Rat]) -> bool {
        if self.singular_cones.is_empty() {
            return false;
        }
        match self.locate(p) {
            Ok(loc) => self.singular_cones.iter().any(|s| {
                let set: BTreeSet<usize> = s.iter().copied().collect();
                loc.cone.iter().all(|r| set.contains(r))
            }),
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    /// Rays spanning the smallest cone containing the point.
    pub cone: Vec<usize>,
    /// All maximal cones containing the point.
    pub maximal: Vec<usize>,
    /// True when the point is in the interior of a maximal cone.
    pub generic: bool,
}

/// Builds the rank-2 structure from a cyclic self-intersection sequence. If the sequence
/// is toric the unfolded rays are used and all transitions are trivial.
pub fn build_affine_structure_dim2(d: &[i64]) -> Result<AffineManifold> {
    let k = d.len();
    if k < 3 {
        return Err(GeometryError::CycleTooShort(k));
    }
    let v = unfold(d);
    let closes = v[k] == v[0] && v[k + 1] == v[1];
    let convex = (0..k).all(|i| arith::cross2(&v[i], &v[i + 1]) > 0);
    let rays = if closes && convex && winding(&v[..k]) == 1 {
        v[..k].to_vec()
    } else {
        standard_fan(k)
    };
    let fan = Fan::from_cyclic_rays(rays)?;
    AffineManifold::with_self_intersections(fan, d)
}

/// Integer values on the rays of a fan, extended linearly over each cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLFunction {
    pub values: Vec<i64>,
}

impl PLFunction {
    pub fn new(values: Vec<i64>) -> Self {
        PLFunction { values }
    }

    pub fn zero(n: usize) -> Self {
        PLFunction { values: vec![0; n] }
    }

    /// Value at a point given in the chart of maximal cone `c`.
    pub fn eval_in(&self, fan: &Fan, c: usize, p: &[Rat]) -> Option<Rat> {
        let coords = fan.cone_coords(c, p)?;
        Some(
            fan.maximal_cones[c]
                .iter()
                .zip(&coords)
                .map(|(&r, x)| x * Rat::from_integer(self.values[r].into()))
                .fold(Rat::zero(), |a, b| a + b),
        )
    }

    pub fn eval(&self, am: &AffineManifold, p: &[Rat]) -> Result<Rat> {
        let c = am.chart_of(p)?;
        Ok(self.eval_in(&am.fan, c, p).expect("located cone contains the point"))
    }

    pub fn eval_int(&self, am: &AffineManifold, p: &[i64]) -> Result<Rat> {
        self.eval(am, &arith::rat_vec(p))
    }

    /// Kink across the interior codim-1 cone between maximal cones `a` and `b`: the value
    /// at the extra ray of `b` minus the linear extension from `a`, transported into `a`'s
    /// chart.
    pub fn bend(&self, am: &AffineManifold, a: usize, b: usize) -> Result<i64> {
        if am.fan.shared_face(a, b).is_none() {
            return Err(GeometryError::BoundaryWall(a, b));
        }
        let ca: BTreeSet<usize> = am.fan.maximal_cones[a].iter().copied().collect();
        let u = *am.fan.maximal_cones[b]
            .iter()
            .find(|r| !ca.contains(r))
            .expect("adjacent cones differ by one ray");
        let moved = arith::mat_vec(am.transition(b, a)?, &am.fan.rays[u]);
        let lin = self
            .eval_in(&am.fan, a, &arith::rat_vec(&moved))
            .ok_or_else(|| GeometryError::DegenerateCone(am.fan.maximal_cones[a].clone()))?;
        let k = Rat::from_integer(self.values[u].into()) - lin;
        if !k.is_integer() {
            return Err(GeometryError::NonIntegral(arith::fmt_rat(&k)));
        }
        Ok(i64::try_from(k.to_integer()).expect("bend fits in i64"))
    }

    /// Bend across ray `i` of a cyclic rank-2 fan, going counter-clockwise.
    pub fn bend_at_ray(&self, am: &AffineManifold, i: usize) -> Result<i64> {
        let k = am.fan.rays.len();
        self.bend(am, (i + k - 1) % k, i)
    }

    pub fn is_nef(&self, am: &AffineManifold) -> Result<bool> {
        for (a, b, _) in am.fan.interior_walls() {
            if self.bend(am, a, b)? < 0 || self.bend(am, b, a)? < 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A piecewise-linear map from the support into the curve-class lattice, given by its
/// derivative on each maximal cone (rows are classes, columns lattice coordinates).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLSection {
    pub dphi: Vec<IMat>,
}

impl PLSection {
    /// Rank 2, trivial transitions: starting from `base` on cone 0, crossing ray `i`
    /// counter-clockwise adds `kinks[i] ⊗ n_i` with `n_i` the conormal positive on cone `i`.
    pub fn from_kinks(am: &AffineManifold, kinks: &[Vec<i64>], base: Option<IMat>) -> Result<PLSection> {
        if !am.is_toric() {
            return Err(GeometryError::NeedsTrivialMonodromy);
        }
        let k = am.fan.rays.len();
        if am.fan.rank != 2 || kinks.len() != k {
            return Err(GeometryError::Shape {
                expected: k,
                got: kinks.len(),
            });
        }
        let ncls = kinks.first().map_or(0, Vec::len);
        let mut cur = base.unwrap_or_else(|| vec![vec![0, 0]; ncls]);
        let mut dphi = vec![cur.clone()];
        for step in 1..=k {
            let i = step % k;
            let n = arith::ccw_normal(&am.fan.rays[i]);
            for (row, kc) in cur.iter_mut().zip(&kinks[i]) {
                row[0] += kc * n[0];
                row[1] += kc * n[1];
            }
            if step < k {
                dphi.push(cur.clone());
            }
        }
        if cur != dphi[0] {
            return Err(GeometryError::KinksDoNotClose);
        }
        Ok(PLSection { dphi })
    }

    pub fn classes(&self) -> usize {
        self.dphi.first().map_or(0, Vec::len)
    }

    pub fn d_in(&self, cone: usize, u: &[i64]) -> Vec<i64> {
        arith::mat_vec(&self.dphi[cone], u)
    }

    /// Curve-class part of a torsor tangent vector `(u, a)` at a point of maximal cone `cone`.
    pub fn height(&self, cone: usize, u: &[i64], a: &[i64]) -> Vec<i64> {
        arith::sub(a, &self.d_in(cone, u))
    }

    pub fn is_above(&self, cone: usize, u: &[i64], a: &[i64]) -> bool {
        self.height(cone, u, a).iter().all(|x| *x >= 0)
    }

    /// Kink class across the wall between `a` and `b`, oriented positive on `b`, if the
    /// jump in derivative is of the form `κ ⊗ n`.
    pub fn kink(&self, am: &AffineManifold, a: usize, b: usize) -> Result<Vec<i64>> {
        let face = am.fan.shared_face(a, b).ok_or(GeometryError::BoundaryWall(a, b))?;
        let t = am.transition(a, b)?;
        // dphi_b ∘ T_{a→b} - dphi_a
        let jump = arith::mat_mul(&self.dphi[b], t);
        let jump: IMat = jump.iter().zip(&self.dphi[a]).map(|(x, y)| arith::sub(x, y)).collect();
        let n = conormal_towards(&am.fan, &face, b);
        let mut kappa = vec![];
        for row in &jump {
            let idx = n.iter().position(|x| *x != 0).expect("nonzero conormal");
            if row[idx] % n[idx] != 0 {
                return Err(GeometryError::KinksDoNotClose);
            }
            let c = row[idx] / n[idx];
            if arith::scale(&n, c) != *row {
                return Err(GeometryError::KinksDoNotClose);
            }
            kappa.push(c);
        }
        Ok(kappa)
    }

    /// Every kink is a nonzero effective class.
    pub fn is_convex(&self, am: &AffineManifold) -> Result<bool> {
        for (a, b, _) in am.fan.interior_walls() {
            for (x, y) in [(a, b), (b, a)] {
                let k = self.kink(am, x, y)?;
                if k.iter().any(|c| *c < 0) || k.iter().all(|c| *c == 0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Primitive conormal to the span of `face`, positive on the rays of maximal cone `side`.
pub fn conormal_towards(fan: &Fan, face: &[usize], side: usize) -> Vec<i64> {
    let rows: IMat = face.iter().map(|&i| fan.rays[i].clone()).collect();
    let ker = arith::kernel(&rows, fan.rank);
    let mut n = arith::primitive_from_rat(&ker[0]);
    let extra = fan.maximal_cones[side]
        .iter()
        .find(|r| !face.contains(r))
        .expect("cone has a ray off the face");
    if arith::dot(&n, &fan.rays[*extra]) < 0 {
        n = arith::neg(&n);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64]) -> Vec<Rat> {
        arith::rat_vec(v)
    }

    #[test]
    fn projective_plane_is_toric() {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        assert_eq!(am.fan.rays, vec![vec![1, 0], vec![0, 1], vec![-1, -1]]);
        assert!(am.is_toric());
        assert!(am.singular_cones.is_empty());
        for i in 0..3 {
            let s = arith::add(&am.fan.rays[(i + 2) % 3], &am.fan.rays[(i + 1) % 3]);
            assert_eq!(s, arith::scale(&am.fan.rays[i], -1));
        }
    }

    #[test]
    fn minus_ones_have_monodromy() {
        let am = build_affine_structure_dim2(&[-1, -1, -1]).unwrap();
        let m = am.monodromy(0).unwrap();
        assert_ne!(m, arith::identity(2));
        assert_eq!(am.singular_cones, vec![Vec::<usize>::new()]);
        // unfolding matrix is -I here, so the monodromy is conjugate to it
        assert_eq!(m[0][0] + m[1][1], -2);
        assert_eq!(arith::det(&m), 1);
        let v = am.parallel_transport(&[0, 1, 2, 0], &[1, 0]).unwrap();
        assert_ne!(v, vec![1, 0]);
    }

    #[test]
    fn short_cycles_rejected() {
        assert_eq!(
            build_affine_structure_dim2(&[0, 0]).unwrap_err(),
            GeometryError::CycleTooShort(2)
        );
    }

    #[test]
    fn hirzebruch_and_blowups_are_toric() {
        for d in [vec![0, 0, 0, 0], vec![1, 0, -1, 0], vec![-1, -1, -1, 0, 0]] {
            let am = build_affine_structure_dim2(&d).unwrap();
            assert!(am.is_toric(), "{d:?}");
        }
        // a non-toric cycle of length 5
        let am = build_affine_structure_dim2(&[-2, -2, -2, -2, -2]).unwrap();
        assert!(!am.singular_cones.is_empty());
    }

    #[test]
    fn transitions_fix_the_shared_ray_and_invert() {
        let am = build_affine_structure_dim2(&[-1, -2, -3, 0]).unwrap();
        for (&(a, b), t) in &am.transitions {
            let face = am.fan.shared_face(a, b).unwrap();
            for &ri in &face {
                assert_eq!(arith::mat_vec(t, &am.fan.rays[ri]), am.fan.rays[ri]);
            }
            let back = &am.transitions[&(b, a)];
            assert_eq!(arith::mat_mul(back, t), arith::identity(2));
        }
    }

    #[test]
    fn bends_on_projective_plane() {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        let f = PLFunction::new(vec![1, 0, 0]);
        assert_eq!(f.bend_at_ray(&am, 0).unwrap(), 1);
        assert_eq!(f.bend_at_ray(&am, 1).unwrap(), 1);
        assert_eq!(f.bend_at_ray(&am, 2).unwrap(), 1);
        let lin = PLFunction::new(vec![2, -1, -1]);
        for i in 0..3 {
            assert_eq!(lin.bend_at_ray(&am, i).unwrap(), 0);
        }
    }

    #[test]
    fn bend_formula_in_non_toric_charts() {
        let d = vec![-1, -1, -1];
        let am = build_affine_structure_dim2(&d).unwrap();
        let f = PLFunction::new(vec![3, -2, 5]);
        for i in 0..3 {
            let a = &f.values;
            let want = a[(i + 2) % 3] + d[i] * a[i] + a[(i + 1) % 3];
            assert_eq!(f.bend_at_ray(&am, i).unwrap(), want);
        }
    }

    #[test]
    fn locating_points() {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        let l = am.locate(&r(&[2, 1])).unwrap();
        assert!(l.generic);
        assert_eq!(l.cone, vec![0, 1]);
        let l = am.locate(&r(&[1, 0])).unwrap();
        assert!(!l.generic);
        assert_eq!(l.cone, vec![0]);
        let half = Fan::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1]]).unwrap();
        let am = AffineManifold::toric(half);
        assert!(am.locate(&r(&[-1, 0])).is_err());
    }

    #[test]
    fn section_from_kinks_closes() {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        let phi = PLSection::from_kinks(&am, &[vec![1], vec![1], vec![1]], None).unwrap();
        assert!(phi.is_convex(&am).unwrap());
        assert_eq!(phi.kink(&am, 2, 0).unwrap(), vec![1]);
        assert!(PLSection::from_kinks(&am, &[vec![1], vec![0], vec![0]], None).is_err());
        assert_eq!(phi.height(0, &[1, 0], &[2]), vec![2]);
    }
}

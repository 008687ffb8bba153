//! Walls, wall-crossing automorphisms, consistency around joints and rank-2 completion.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{self, Rat};
use crate::geometry::{AffineManifold, PLSection};
use crate::series::{Context, CurveClassMonoid, SeriesError, TruncatedSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScatteringError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("wall {0}: {1}")]
    BadWall(usize, String),
    #[error("diagram must have rank 2, got {0}")]
    Rank(usize),
    #[error("completion needs trivial transitions and no PL section")]
    NotToric,
    #[error("deviation at joint {joint:?} has a term z^0 at order {order}")]
    ZeroExponent { joint: Vec<String>, order: u32 },
    #[error("deviation at joint {joint:?} has a term of order {found} below {order}")]
    LowerOrder { joint: Vec<String>, order: u32, found: u32 },
    #[error("cannot cancel the order-{order} term t^{q:?} z^{m:?} at joint {joint:?}")]
    FailedToCancel {
        joint: Vec<String>,
        order: u32,
        q: Vec<u32>,
        m: Vec<i64>,
    },
    #[error("wall {0} leaves its maximal cone in a structure with non-trivial transitions")]
    CrossesCones(usize),
}

type Result<T> = std::result::Result<T, ScatteringError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WallKind {
    Line,
    Ray,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    /// Apex of a ray, or any point of a line.
    pub apex: Vec<Rat>,
    /// Primitive direction.
    pub direction: Vec<i64>,
    pub kind: WallKind,
    /// Primitive conormal; its sign is only a reference orientation.
    pub normal: Vec<i64>,
    pub function: TruncatedSeries,
    /// Added by completion rather than given as input.
    pub inserted: bool,
}

impl Wall {
    pub fn line(apex: Vec<Rat>, direction: Vec<i64>, function: TruncatedSeries) -> Wall {
        let normal = arith::ccw_normal(&direction);
        Wall {
            apex,
            direction,
            kind: WallKind::Line,
            normal,
            function,
            inserted: false,
        }
    }

    pub fn ray(apex: Vec<Rat>, direction: Vec<i64>, function: TruncatedSeries) -> Wall {
        let normal = arith::ccw_normal(&direction);
        Wall {
            apex,
            direction,
            kind: WallKind::Ray,
            normal,
            function,
            inserted: false,
        }
    }

    pub fn validate(&self, idx: usize) -> Result<()> {
        let bad = |s: &str| Err(ScatteringError::BadWall(idx, s.to_string()));
        if self.direction.len() != 2 || self.apex.len() != 2 || self.normal.len() != 2 {
            return bad("walls are rank-2 objects");
        }
        if !arith::is_primitive(&self.direction) {
            return bad("direction must be primitive");
        }
        if !arith::is_primitive(&self.normal) || arith::dot(&self.normal, &self.direction) != 0 {
            return bad("normal must be primitive and vanish on the direction");
        }
        if !self.function.constant_term().is_one() {
            return bad("function must have constant term 1");
        }
        for (k, _) in self.function.terms() {
            if arith::dot(&self.normal, &k.m) != 0 {
                return bad("function exponents must lie in the kernel of the normal");
            }
            if k.ord == 0 && k.m.iter().any(|x| *x != 0) {
                return bad("function must be 1 modulo the curve-class ideal");
            }
        }
        Ok(())
    }

    /// Exact membership of a point in the support.
    pub fn contains(&self, p: &[Rat]) -> bool {
        let rel: Vec<Rat> = p.iter().zip(&self.apex).map(|(a, b)| a - b).collect();
        if !arith::cross2_rat(&arith::rat_vec(&self.direction), &rel).is_zero() {
            return false;
        }
        match self.kind {
            WallKind::Line => true,
            WallKind::Ray => !arith::dot_rat(&self.direction, &rel).is_negative(),
        }
    }

    /// Point of the support at parameter `s` along the direction.
    pub fn at(&self, s: &Rat) -> Vec<Rat> {
        self.apex
            .iter()
            .zip(&self.direction)
            .map(|(a, d)| a + s * Rat::from_integer((*d).into()))
            .collect()
    }

    /// Parameter of a point known to lie on the supporting line.
    pub fn param(&self, p: &[Rat]) -> Rat {
        let rel: Vec<Rat> = p.iter().zip(&self.apex).map(|(a, b)| a - b).collect();
        let dd = arith::dot(&self.direction, &self.direction);
        arith::dot_rat(&self.direction, &rel) / Rat::from_integer(dd.into())
    }

    fn same_support(&self, other: &Wall) -> bool {
        self.kind == other.kind
            && self.direction == other.direction
            && match self.kind {
                WallKind::Ray => self.apex == other.apex,
                WallKind::Line => other.contains(&self.apex),
            }
    }
}

/// Intersection point of two wall supports, if they meet in exactly one point.
pub fn intersect(a: &Wall, b: &Wall) -> Option<Vec<Rat>> {
    let da = arith::rat_vec(&a.direction);
    let db = arith::rat_vec(&b.direction);
    let den = arith::cross2_rat(&da, &db);
    if den.is_zero() {
        return None;
    }
    let rel: Vec<Rat> = b.apex.iter().zip(&a.apex).map(|(x, y)| x - y).collect();
    let s = arith::cross2_rat(&rel, &db) / &den;
    let p = a.at(&s);
    (a.contains(&p) && b.contains(&p)).then_some(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatteringDiagram {
    pub ambient: AffineManifold,
    pub monoid: CurveClassMonoid,
    pub ctx: Arc<Context>,
    pub walls: Vec<Wall>,
    pub phi: Option<PLSection>,
}

impl ScatteringDiagram {
    pub fn new(ambient: AffineManifold, monoid: CurveClassMonoid, order: u32) -> Result<Self> {
        if ambient.rank() != 2 {
            return Err(ScatteringError::Rank(ambient.rank()));
        }
        let ctx = Context::new(&monoid, 2, order);
        Ok(ScatteringDiagram {
            ambient,
            monoid,
            ctx,
            walls: vec![],
            phi: None,
        })
    }

    pub fn order(&self) -> u32 {
        self.ctx.order
    }

    /// Adds a wall after validating it; walls with function 1 are dropped.
    pub fn add_wall(&mut self, mut w: Wall) -> Result<()> {
        w.function = w.function.recontext(&self.ctx)?;
        let idx = self.walls.len();
        w.validate(idx)?;
        if !self.ambient.is_toric() && !self.wall_in_one_cone(&w) {
            return Err(ScatteringError::CrossesCones(idx));
        }
        if !w.function.is_one() {
            self.walls.push(w);
        }
        Ok(())
    }

    fn wall_in_one_cone(&self, w: &Wall) -> bool {
        if w.kind == WallKind::Line {
            return false;
        }
        let fan = &self.ambient.fan;
        // apex and direction in the same closed maximal cone
        (0..fan.maximal_cones.len()).any(|c| {
            let inside = |p: &[Rat]| {
                fan.cone_coords(c, p)
                    .is_some_and(|co| co.iter().all(|x| !x.is_negative()))
            };
            inside(&w.apex) && inside(&arith::rat_vec(&w.direction))
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.walls.iter().enumerate() {
            w.validate(i)?;
            if *w.function.ctx() != self.ctx {
                w.function.recontext(&self.ctx)?;
            }
        }
        Ok(())
    }

    /// Same walls re-truncated at another order.
    pub fn truncated(&self, order: u32) -> ScatteringDiagram {
        let ctx = self.ctx.with_order(order);
        let walls = self
            .walls
            .iter()
            .map(|w| Wall {
                function: w.function.truncate(order),
                ..w.clone()
            })
            .filter(|w| !w.function.is_one())
            .collect();
        ScatteringDiagram {
            ambient: self.ambient.clone(),
            monoid: self.monoid.clone(),
            ctx,
            walls,
            phi: self.phi.clone(),
        }
    }

    /// Trivial transitions and no PL section: the whole plane is one chart.
    pub fn is_flat(&self) -> bool {
        self.ambient.is_toric() && self.phi.is_none()
    }

    /// Apexes of rays and isolated intersections of supports, without repeats.
    pub fn joints(&self) -> Vec<Vec<Rat>> {
        let mut pts: Vec<Vec<Rat>> = vec![];
        let mut push = |p: Vec<Rat>| {
            if !pts.contains(&p) {
                pts.push(p);
            }
        };
        for w in &self.walls {
            if w.kind == WallKind::Ray {
                push(w.apex.clone());
            }
        }
        for i in 0..self.walls.len() {
            for j in i + 1..self.walls.len() {
                if let Some(p) = intersect(&self.walls[i], &self.walls[j]) {
                    push(p);
                }
            }
        }
        pts.sort_by(|a, b| a.cmp(b));
        pts
    }

    /// Crossing half-rays of a small counter-clockwise loop around `p`, in order, as
    /// `(wall index, outgoing direction)`.
    pub fn crossings_around(&self, p: &[Rat]) -> Vec<(usize, Vec<i64>)> {
        let mut out = vec![];
        for (i, w) in self.walls.iter().enumerate() {
            if !w.contains(p) {
                continue;
            }
            let at_apex = w.kind == WallKind::Ray && w.apex == p;
            out.push((i, w.direction.clone()));
            if !at_apex {
                out.push((i, arith::neg(&w.direction)));
            }
        }
        out.sort_by(|a, b| arith::angle_cmp_int(&a.1, &b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Images of `z^{e_1}, z^{e_2}` under the composite of wall crossings met by a small
    /// counter-clockwise loop around `p`.
    pub fn path_ordered_product(&self, p: &[Rat]) -> Result<Vec<TruncatedSeries>> {
        let crossings = self.crossings_around(p);
        let mut cache = PowerCache::default();
        let mut images = vec![];
        for i in 0..2 {
            let mut e = vec![0, 0];
            e[i] = 1;
            let mut s = TruncatedSeries::character(&self.ctx, &e);
            for (wi, u) in &crossings {
                let n = vec![u[1], -u[0]];
                s = cache.apply(*wi, &self.walls[*wi].function, &n, &s)?;
            }
            images.push(s);
        }
        Ok(images)
    }

    /// `z^{-e_i} Θ(z^{e_i}) - 1` for both basis characters.
    pub fn deviation(&self, p: &[Rat]) -> Result<Vec<TruncatedSeries>> {
        let images = self.path_ordered_product(p)?;
        let one = TruncatedSeries::one(&self.ctx);
        let mut out = vec![];
        for (i, img) in images.iter().enumerate() {
            let mut e = vec![0i64, 0];
            e[i] = -1;
            let q0 = self.ctx.zero_q();
            out.push(img.mul_monomial(&BigInt::one(), &q0, &e).sub(&one)?);
        }
        Ok(out)
    }

    /// Joints whose consistency cannot be phrased as an automorphism identity: the
    /// singular point, and with a PL section or non-trivial transitions any joint on a
    /// codim-1 cone of the fan.
    pub fn needs_theta_check(&self, p: &[Rat]) -> bool {
        if self.ambient.is_singular_point(p) {
            return true;
        }
        if self.is_flat() {
            return false;
        }
        match self.ambient.locate(p) {
            Ok(l) => !l.generic,
            Err(_) => true,
        }
    }

    /// Automorphism check at every joint. Joints that need theta functions are returned
    /// with `method = Theta` and `ok = None`; see `theta::check_consistency`.
    pub fn automorphism_report(&self) -> Result<Vec<JointReport>> {
        let joints = self.joints();
        joints
            .par_iter()
            .map(|p| {
                if self.needs_theta_check(p) {
                    return Ok(JointReport {
                        point: p.clone(),
                        method: JointMethod::Theta,
                        ok: None,
                        first_failure_order: None,
                        detail: String::new(),
                    });
                }
                let dev = self.deviation(p)?;
                let first = dev.iter().filter_map(TruncatedSeries::min_order).min();
                let detail = match first {
                    Some(_) => {
                        let names = &self.monoid.generators;
                        format!(
                            "z^-e1 Θ(z^e1) - 1 = {}; z^-e2 Θ(z^e2) - 1 = {}",
                            dev[0].display_with(names),
                            dev[1].display_with(names)
                        )
                    }
                    None => String::new(),
                };
                Ok(JointReport {
                    point: p.clone(),
                    method: JointMethod::Automorphism,
                    ok: Some(first.is_none()),
                    first_failure_order: first,
                    detail,
                })
            })
            .collect()
    }

    /// Walls sorted by support, then normal, then function.
    pub fn canonicalize(&mut self) {
        self.walls.sort_by(|a, b| {
            (a.kind, &a.direction, &a.apex, &a.normal, a.inserted)
                .cmp(&(b.kind, &b.direction, &b.apex, &b.normal, b.inserted))
                .then_with(|| a.function.to_records().cmp(&b.function.to_records()))
        });
    }
}

impl PartialOrd for crate::series::TermRecord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for crate::series::TermRecord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.q, &self.m, &self.c).cmp(&(&other.q, &other.m, &other.c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMethod {
    Automorphism,
    Theta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointReport {
    pub point: Vec<Rat>,
    pub method: JointMethod,
    /// `None` until a theta check has been run for this joint.
    pub ok: Option<bool>,
    pub first_failure_order: Option<u32>,
    pub detail: String,
}

/// `Ψ` for one wall: `z^v ↦ z^v f^{<n, v>}`, where `n` is positive on the side the
/// crossing starts from.
pub fn wall_cross(w: &Wall, v: &[i64], from_positive_side: bool) -> Result<TruncatedSeries> {
    let n = if from_positive_side {
        w.normal.clone()
    } else {
        arith::neg(&w.normal)
    };
    let p = arith::dot(&n, v);
    let base = TruncatedSeries::character(w.function.ctx(), v);
    Ok(base.mul(&w.function.pow(p)?)?)
}

/// Applies `z^v ↦ z^v f^{<n, v>}` to a whole series.
pub fn cross_series(f: &TruncatedSeries, n: &[i64], s: &TruncatedSeries) -> Result<TruncatedSeries> {
    PowerCache::default().apply(0, f, n, s)
}

/// Memoised powers of wall functions, keyed by wall index and exponent.
#[derive(Default)]
pub struct PowerCache {
    powers: HashMap<(usize, i64), TruncatedSeries>,
}

impl PowerCache {
    pub fn power(&mut self, key: usize, f: &TruncatedSeries, p: i64) -> Result<&TruncatedSeries> {
        if !self.powers.contains_key(&(key, p)) {
            let v = f.pow(p)?;
            self.powers.insert((key, p), v);
        }
        Ok(&self.powers[&(key, p)])
    }

    pub fn apply(
        &mut self,
        key: usize,
        f: &TruncatedSeries,
        n: &[i64],
        s: &TruncatedSeries,
    ) -> Result<TruncatedSeries> {
        let ctx = s.ctx().clone();
        let mut out = TruncatedSeries::zero(&ctx);
        for (k, c) in s.terms() {
            let p = arith::dot(n, &k.m);
            let term = if p == 0 {
                TruncatedSeries::monomial(&ctx, c.clone(), k.q.clone(), k.m.clone())
            } else {
                let fp = self.power(key, f, p)?.recontext(&ctx)?;
                fp.mul_monomial(c, &k.q, &k.m)
            };
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

fn fmt_point(p: &[Rat]) -> Vec<String> {
    p.iter().map(arith::fmt_rat).collect()
}

/// Adds rays order by order until every joint is consistent modulo `I^k`.
pub fn complete(initial: &ScatteringDiagram) -> Result<ScatteringDiagram> {
    if !initial.is_flat() {
        return Err(ScatteringError::NotToric);
    }
    let k = initial.order();
    let mut d = initial.clone();
    for j in 1..k {
        let view = d.truncated(j + 1);
        let joints = view.joints();
        let spawned: Vec<Vec<Wall>> = joints
            .par_iter()
            .map(|p| spawn_at(&view, p, j))
            .collect::<Result<_>>()?;
        for w in spawned.into_iter().flatten() {
            let f = w.function.recontext(&d.ctx)?;
            insert_merging(&mut d, Wall { function: f, ..w })?;
        }
    }
    d.canonicalize();
    Ok(d)
}

fn spawn_at(view: &ScatteringDiagram, p: &[Rat], j: u32) -> Result<Vec<Wall>> {
    let dev = view.deviation(p)?;
    let mut terms: BTreeMap<(Vec<u32>, Vec<i64>), [BigInt; 2]> = BTreeMap::new();
    for (i, s) in dev.iter().enumerate() {
        for (key, c) in s.terms() {
            if key.ord < j {
                return Err(ScatteringError::LowerOrder {
                    joint: fmt_point(p),
                    order: j,
                    found: key.ord,
                });
            }
            if key.ord == j {
                let slot = terms
                    .entry((key.q.clone(), key.m.clone()))
                    .or_insert_with(|| [BigInt::zero(), BigInt::zero()]);
                slot[i] = c.clone();
            }
        }
    }
    let mut out = vec![];
    for ((q, m), dv) in terms {
        if m.iter().all(|x| *x == 0) {
            return Err(ScatteringError::ZeroExponent {
                joint: fmt_point(p),
                order: j,
            });
        }
        let (r, _) = arith::primitive(&arith::neg(&m));
        let n = vec![r[1], -r[0]];
        let fail = || ScatteringError::FailedToCancel {
            joint: fmt_point(p),
            order: j,
            q: q.clone(),
            m: m.clone(),
        };
        // d_i + c n_i = 0 for both i
        let mut c: Option<BigInt> = None;
        for i in 0..2 {
            if n[i] == 0 {
                if !dv[i].is_zero() {
                    return Err(fail());
                }
                continue;
            }
            let ni = BigInt::from(n[i]);
            let (quo, rem) = (-&dv[i]).div_rem(&ni);
            if !rem.is_zero() {
                return Err(fail());
            }
            match &c {
                Some(prev) if *prev != quo => return Err(fail()),
                _ => c = Some(quo),
            }
        }
        let c = c.ok_or_else(fail)?;
        if c.is_zero() {
            continue;
        }
        let one = TruncatedSeries::one(&view.ctx);
        let f = one.add(&TruncatedSeries::monomial(&view.ctx, c, q, m))?;
        out.push(Wall {
            apex: p.to_vec(),
            direction: r,
            kind: WallKind::Ray,
            normal: n,
            function: f,
            inserted: true,
        });
    }
    Ok(out)
}

fn insert_merging(d: &mut ScatteringDiagram, w: Wall) -> Result<()> {
    if let Some(existing) = d
        .walls
        .iter_mut()
        .find(|x| x.inserted && x.same_support(&w) && x.normal == w.normal)
    {
        existing.function = existing.function.mul(&w.function)?;
        return Ok(());
    }
    d.walls.push(w);
    d.walls.retain(|x| !x.function.is_one());
    Ok(())
}

/// Curve-class part of the torsor lift of `t^q z^m` read in maximal cone `cone`.
pub fn height(phi: &PLSection, cone: usize, u: &[i64], a: &[i64]) -> Vec<i64> {
    phi.height(cone, u, a)
}

/// Every wall monomial lifts above the section, i.e. has effective height.
pub fn walls_above_section(d: &ScatteringDiagram) -> Result<bool> {
    let Some(phi) = &d.phi else {
        return Ok(true);
    };
    for w in &d.walls {
        let cone = d
            .ambient
            .chart_of(&w.apex)
            .map_err(|e| ScatteringError::BadWall(0, e.to_string()))?;
        for (k, _) in w.function.terms() {
            let q: Vec<i64> = k.q.iter().map(|x| i64::from(*x)).collect();
            let lift = arith::add(&phi.d_in(cone, &k.m), &q);
            if !phi.is_above(cone, &k.m, &lift) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Integer value of a `BigInt` coefficient, for display and small checks.
pub fn small(c: &BigInt) -> Option<i64> {
    if c.abs() > BigInt::from(i64::MAX) {
        None
    } else {
        c.to_i64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_vec;
    use crate::geometry::build_affine_structure_dim2;

    fn plane(gens: &[&str], k: u32) -> ScatteringDiagram {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        ScatteringDiagram::new(am, CurveClassMonoid::new(gens), k).unwrap()
    }

    fn f(ctx: &Arc<Context>, terms: &[(&[u32], [i64; 2], i64)]) -> TruncatedSeries {
        let mut s = TruncatedSeries::one(ctx);
        for (q, m, c) in terms {
            s.add_term(BigInt::from(*c), q.to_vec(), m.to_vec());
        }
        s
    }

    fn commutator(k: u32) -> ScatteringDiagram {
        let mut d = plane(&["t1", "t2"], k);
        let ctx = d.ctx.clone();
        d.add_wall(Wall::line(rat_vec(&[0, 0]), vec![1, 0], f(&ctx, &[(&[1, 0], [1, 0], 1)])))
            .unwrap();
        d.add_wall(Wall::line(rat_vec(&[0, 0]), vec![0, 1], f(&ctx, &[(&[0, 1], [0, 1], 1)])))
            .unwrap();
        d
    }

    #[test]
    fn crossing_examples() {
        let d = plane(&["t"], 3);
        let ctx = d.ctx.clone();
        let mut w = Wall::line(rat_vec(&[0, 0]), vec![0, 1], f(&ctx, &[(&[1], [0, 1], 1)]));
        w.normal = vec![1, 0];
        let a = wall_cross(&w, &[1, 0], true).unwrap();
        assert_eq!(a, f(&ctx, &[]).mul_monomial(&BigInt::one(), &[0], &[1, 0]).add(&TruncatedSeries::monomial(&ctx, BigInt::one(), vec![1], vec![1, 1])).unwrap());
        assert_eq!(wall_cross(&w, &[0, 1], true).unwrap(), TruncatedSeries::character(&ctx, &[0, 1]));
        let b = wall_cross(&w, &[-1, 0], true).unwrap();
        let want = f(&ctx, &[(&[1], [0, 1], -1), (&[2], [0, 2], 1)]).mul_monomial(&BigInt::one(), &[0], &[-1, 0]);
        assert_eq!(b, want);
        // crossing back undoes it
        let there = wall_cross(&w, &[1, 0], true).unwrap();
        let back = cross_series(&w.function, &arith::neg(&w.normal), &there).unwrap();
        assert_eq!(back, TruncatedSeries::character(&ctx, &[1, 0]));
    }

    #[test]
    fn two_lines_are_inconsistent_at_order_two() {
        let d = commutator(3);
        let rep = d.automorphism_report().unwrap();
        assert_eq!(rep.len(), 1);
        assert_eq!(rep[0].ok, Some(false));
        assert_eq!(rep[0].first_failure_order, Some(2));
    }

    #[test]
    fn commutator_completion() {
        let d = complete(&commutator(4)).unwrap();
        let inserted: Vec<&Wall> = d.walls.iter().filter(|w| w.inserted).collect();
        assert_eq!(inserted.len(), 1);
        let w = inserted[0];
        assert_eq!(w.direction, vec![-1, -1]);
        assert_eq!(w.apex, rat_vec(&[0, 0]));
        assert_eq!(w.function, f(&d.ctx, &[(&[1, 1], [1, 1], 1)]));
        assert!(d.automorphism_report().unwrap().iter().all(|r| r.ok == Some(true)));
        assert_eq!(complete(&d).unwrap(), d);
    }

    #[test]
    fn order_one_and_empty_completion() {
        let d = commutator(1);
        assert!(d.walls.is_empty());
        let e = plane(&["t"], 4);
        assert_eq!(complete(&e).unwrap().walls.len(), 0);
    }

    #[test]
    fn walls_must_be_unital_and_orthogonal() {
        let mut d = plane(&["t"], 3);
        let ctx = d.ctx.clone();
        let bad = Wall::line(rat_vec(&[0, 0]), vec![1, 0], f(&ctx, &[(&[1], [0, 1], 1)]));
        assert!(d.add_wall(bad).is_err());
    }

    #[test]
    fn squared_commutator_needs_several_rays() {
        let mut d = plane(&["t1", "t2"], 4);
        let ctx = d.ctx.clone();
        d.add_wall(Wall::line(rat_vec(&[0, 0]), vec![1, 0], f(&ctx, &[(&[1, 0], [1, 0], 1)])))
            .unwrap();
        let g = f(&ctx, &[(&[0, 1], [0, 1], 1)]).pow(2).unwrap();
        d.add_wall(Wall::line(rat_vec(&[0, 0]), vec![0, 1], g)).unwrap();
        let c = complete(&d).unwrap();
        assert!(c.automorphism_report().unwrap().iter().all(|r| r.ok == Some(true)));
        let dirs: Vec<Vec<i64>> = c.walls.iter().filter(|w| w.inserted).map(|w| w.direction.clone()).collect();
        assert!(dirs.contains(&vec![-1, -1]));
        assert!(dirs.contains(&vec![-1, -2]));
    }
}

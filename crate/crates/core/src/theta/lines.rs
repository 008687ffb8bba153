use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Result, ThetaError};
use crate::arith::{self, Rat};
use crate::scattering::{ScatteringDiagram, WallKind};
use crate::series::TruncatedSeries;

/// One straight piece of a broken line with the monomial it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Maximal cone whose chart the exponent is written in; `None` for a flat diagram.
    pub cone: Option<usize>,
    pub exponent: Vec<i64>,
    pub coefficient: BigInt,
    pub class: Vec<u32>,
    /// Where the segment stops: a bend, a fan ray, or the endpoint.
    pub end: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bend {
    pub point: Vec<Rat>,
    pub walls: Vec<usize>,
    /// The term of the wall function power that was picked.
    pub coefficient: BigInt,
    pub class: Vec<u32>,
    pub exponent: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrokenLine {
    pub direction: Vec<i64>,
    pub endpoint: Vec<Rat>,
    /// In the order they are travelled, starting with the unbounded one.
    pub segments: Vec<Segment>,
    pub bends: Vec<Bend>,
}

impl BrokenLine {
    pub fn final_segment(&self) -> &Segment {
        self.segments.last().expect("a broken line has a segment")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaFunction {
    pub basepoint: Vec<Rat>,
    pub direction: Vec<i64>,
    pub cone: Option<usize>,
    pub value: TruncatedSeries,
}

#[derive(Debug, Clone)]
enum Event {
    Bend {
        point: Vec<Rat>,
        walls: Vec<usize>,
        c: BigInt,
        q: Vec<u32>,
        m: Vec<i64>,
    },
    /// Backward trace leaves `from` for `to` through a fan ray.
    Cross {
        point: Vec<Rat>,
        from: usize,
        to: usize,
        delta: Vec<u32>,
    },
}

#[derive(Clone)]
struct State {
    p: Vec<Rat>,
    m: Vec<i64>,
    cone: usize,
    coef: BigInt,
    class: Vec<u32>,
    ord: u32,
    events: Vec<Event>,
}

struct Found {
    coef: BigInt,
    class: Vec<u32>,
    exponent: Vec<i64>,
    cone: usize,
    events: Vec<Event>,
}

struct Exit {
    s: Rat,
    ray: usize,
    point: Vec<Rat>,
}

/// Terms of a product of wall function powers that a bend can pick.
type Choices = Arc<Vec<(u32, Vec<u32>, Vec<i64>, BigInt)>>;

/// Backward ray tracer over a fixed diagram. Wall powers are cached across traces.
pub(crate) struct Tracer {
    d: Arc<ScatteringDiagram>,
    flat: bool,
    toric: bool,
    cones: Vec<BTreeSet<usize>>,
    neighbours: BTreeMap<(usize, usize), usize>,
    /// Reachable sums of wall exponents with the least order reaching them.
    offsets: HashMap<Vec<i64>, u32>,
    choices: Mutex<HashMap<(Vec<usize>, i64), Choices>>,
}

fn nongeneric(what: &str, p: &[Rat]) -> ThetaError {
    let pt: Vec<String> = p.iter().map(arith::fmt_rat).collect();
    ThetaError::NonGeneric(format!("{what} at ({})", pt.join(", ")))
}

fn add_rat(p: &[Rat], s: &Rat, m: &[i64]) -> Vec<Rat> {
    p.iter()
        .zip(m)
        .map(|(a, b)| a + s * Rat::from_integer((*b).into()))
        .collect()
}

fn add_classes(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl Tracer {
    pub(crate) fn new(d: &ScatteringDiagram) -> Tracer {
        Tracer::shared(Arc::new(d.clone()))
    }

    pub(crate) fn shared(d: Arc<ScatteringDiagram>) -> Tracer {
        let fan = &d.ambient.fan;
        let toric = d.ambient.is_toric();
        let cones = d
            .walls
            .iter()
            .map(|w| {
                (0..fan.maximal_cones.len())
                    .filter(|&c| {
                        toric || {
                            let inside = |p: &[Rat]| {
                                fan.cone_coords(c, p)
                                    .is_some_and(|co| co.iter().all(|x| !x.is_negative()))
                            };
                            inside(&w.apex) && inside(&arith::rat_vec(&w.direction))
                        }
                    })
                    .collect()
            })
            .collect();
        let mut neighbours = BTreeMap::new();
        for (a, b, face) in fan.interior_walls() {
            if let [r] = face[..] {
                neighbours.insert((a, r), b);
                neighbours.insert((b, r), a);
            }
        }
        let offsets = reachable_offsets(&d);
        Tracer {
            flat: d.is_flat(),
            d,
            toric,
            cones,
            neighbours,
            offsets,
            choices: Mutex::new(HashMap::new()),
        }
    }


    pub(crate) fn diagram(&self) -> &ScatteringDiagram {
        &self.d
    }

    fn order(&self) -> u32 {
        self.d.order()
    }

    /// Sums of wall exponents that fit in the order budget: final exponents minus the
    /// direction, when transitions are trivial.
    pub(crate) fn final_offsets(&self) -> BTreeSet<Vec<i64>> {
        self.offsets.keys().cloned().collect()
    }

    /// With trivial transitions a trace carrying `m` can still end with exponent `p_dir`
    /// only if `m - p_dir` is a sum of wall exponents affordable with what is left.
    fn feasible(&self, m: &[i64], ord: u32, p_dir: &[i64]) -> bool {
        !self.toric
            || self
                .offsets
                .get(&arith::sub(m, p_dir))
                .is_some_and(|o| ord + o < self.order())
    }

    /// Final exponents worth trying at the endpoint.
    fn candidates(&self, p_dir: &[i64]) -> Result<Vec<Vec<i64>>> {
        if self.toric {
            return Ok(self
                .offsets
                .keys()
                .map(|a| arith::add(p_dir, a))
                .filter(|m| m.iter().any(|x| *x != 0))
                .collect());
        }
        let r = self.box_radius(arith::linf(p_dir));
        let mut out = vec![];
        for a in -r..=r {
            for b in -r..=r {
                if a != 0 || b != 0 {
                    out.push(vec![a, b]);
                }
            }
        }
        Ok(out)
    }

    /// Box containing every final exponent when transitions are non-trivial: wall
    /// exponents and the direction can be moved by transition products winding at most
    /// twice around the origin.
    pub(crate) fn box_radius(&self, p_norm: i64) -> i64 {
        let k = self.order() as i64;
        let amax = self
            .d
            .walls
            .iter()
            .flat_map(|w| w.function.terms().map(|(key, _)| arith::linf(&key.m)))
            .max()
            .unwrap_or(0);
        let am = &self.d.ambient;
        let n = am.fan.maximal_cones.len();
        let mut lmax = 1i64;
        for start in 0..n {
            for dir in [1usize, n - 1] {
                let mut m = arith::identity(2);
                let mut c = start;
                for _ in 0..2 * n {
                    let next = (c + dir) % n;
                    if let Ok(t) = am.transition(c, next) {
                        m = arith::mat_mul(t, &m);
                    }
                    c = next;
                    let norm = m.iter().map(|row| row.iter().map(|x| x.abs()).sum::<i64>()).max().unwrap_or(1);
                    lmax = lmax.max(norm);
                }
            }
        }
        (p_norm + (k - 1).max(0) * amax) * lmax
    }

    fn check_endpoint(&self, x: &[Rat]) -> Result<usize> {
        for w in &self.d.walls {
            if w.contains(x) {
                return Err(nongeneric("endpoint lies on a wall", x));
            }
        }
        let loc = self.d.ambient.locate(x)?;
        if !self.flat && !loc.generic {
            return Err(nongeneric("endpoint lies on a fan ray", x));
        }
        Ok(loc.maximal[0])
    }

    fn exit(&self, p: &[Rat], m: &[i64], cone: usize) -> Result<Option<Exit>> {
        let fan = &self.d.ambient.fan;
        let mut best: Option<Exit> = None;
        for &r in &fan.maximal_cones[cone] {
            let rv = &fan.rays[r];
            let den = arith::cross2(m, rv);
            if den == 0 {
                continue;
            }
            let s = -arith::cross2_rat(p, &arith::rat_vec(rv)) / Rat::from_integer(den.into());
            if !s.is_positive() {
                continue;
            }
            let pt = add_rat(p, &s, m);
            let lam = arith::dot_rat(rv, &pt);
            if lam.is_negative() {
                continue;
            }
            if lam.is_zero() {
                return Err(nongeneric("broken line passes through the origin", &pt));
            }
            if best.as_ref().is_none_or(|b| s < b.s) {
                best = Some(Exit { s, ray: r, point: pt });
            }
        }
        Ok(best)
    }

    fn relevant(&self, wi: usize, cone: usize) -> bool {
        self.flat || self.cones[wi].contains(&cone)
    }

    fn walk(
        &self,
        st: State,
        p_dir: &[i64],
                out: &mut Vec<Found>,
    ) -> Result<()> {
        if !self.feasible(&st.m, st.ord, p_dir) {
            return Ok(());
        }
        let exit = if self.flat {
            None
        } else {
            self.exit(&st.p, &st.m, st.cone)?
        };
        let mut best: Option<Rat> = None;
        let mut group: Vec<usize> = vec![];
        let mut parallel_apexes: Vec<(Rat, usize)> = vec![];
        for (wi, w) in self.d.walls.iter().enumerate() {
            if !self.relevant(wi, st.cone) {
                continue;
            }
            let nm = arith::dot(&w.normal, &st.m);
            let rel: Vec<Rat> = w.apex.iter().zip(&st.p).map(|(a, b)| a - b).collect();
            if nm == 0 {
                if w.kind == WallKind::Ray && arith::cross2_rat(&arith::rat_vec(&st.m), &rel).is_zero() {
                    let mm = arith::dot(&st.m, &st.m);
                    let s = arith::dot_rat(&st.m, &rel) / Rat::from_integer(mm.into());
                    if s.is_positive() {
                        parallel_apexes.push((s, wi));
                    }
                }
                continue;
            }
            let s = arith::dot_rat(&w.normal, &rel) / Rat::from_integer(nm.into());
            if !s.is_positive() {
                continue;
            }
            if let Some(e) = &exit {
                if s > e.s {
                    continue;
                }
            }
            if w.kind == WallKind::Ray {
                let hit = add_rat(&st.p, &s, &st.m);
                let t = w.param(&hit);
                if t.is_negative() {
                    continue;
                }
                if t.is_zero() {
                    return Err(nongeneric("broken line passes through a wall apex", &hit));
                }
            }
            match &best {
                Some(b) if s > *b => {}
                Some(b) if s == *b => group.push(wi),
                _ => {
                    best = Some(s);
                    group = vec![wi];
                }
            }
        }
        let s_next = match (&best, &exit) {
            (Some(b), _) => Some(b.clone()),
            (None, Some(e)) => Some(e.s.clone()),
            (None, None) => None,
        };
        for (s, _) in &parallel_apexes {
            if s_next.as_ref().is_none_or(|n| s <= n) {
                return Err(nongeneric("broken line runs into a wall apex", &add_rat(&st.p, s, &st.m)));
            }
        }

        match (best, exit) {
            (None, None) => {
                let in_cone = self.flat
                    || self
                        .d
                        .ambient
                        .fan
                        .cone_coords(st.cone, &arith::rat_vec(p_dir))
                        .is_some_and(|c| c.iter().all(|x| !x.is_negative()));
                if st.m == p_dir && in_cone {
                    out.push(Found {
                        coef: st.coef,
                        class: st.class,
                        exponent: vec![],
                        cone: st.cone,
                        events: st.events,
                    });
                }
                Ok(())
            }
            (Some(s), e) => {
                let crossing = match e {
                    Some(e) if e.s == s => Some(e),
                    _ => None,
                };
                self.bend(st, &s, &group, crossing, p_dir, out)
            }
            (None, Some(e)) => self.cross(st, e, p_dir, out),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn bend(
        &self,
        st: State,
        s: &Rat,
        group: &[usize],
        crossing: Option<Exit>,
        p_dir: &[i64],
                out: &mut Vec<Found>,
    ) -> Result<()> {
        let hit = add_rat(&st.p, s, &st.m);
        let n0 = self.d.walls[group[0]].normal.clone();
        for &wi in group {
            let n = &self.d.walls[wi].normal;
            if *n != n0 && arith::neg(n) != n0 {
                return Err(nongeneric("broken line passes through a joint", &hit));
            }
        }
        for (wi, w) in self.d.walls.iter().enumerate() {
            if !group.contains(&wi) && self.relevant(wi, st.cone) && w.contains(&hit) {
                return Err(nongeneric("broken line passes through a joint", &hit));
            }
        }
        if let Some(e) = &crossing {
            let ray = &self.d.ambient.fan.rays[e.ray];
            if group.iter().any(|&wi| arith::cross2(&self.d.walls[wi].direction, ray) != 0) {
                return Err(nongeneric("wall meets a fan ray", &hit));
            }
        }
        if !self.flat && self.d.ambient.is_singular_point(&hit) {
            return Err(nongeneric("broken line meets the singular point", &hit));
        }
        let pw = arith::dot(&n0, &st.m).abs();
        let choices = self.choices(group, pw)?;
        let k = self.order();
        for (ord, q, m, c) in choices.iter() {
            if st.ord + ord >= k {
                continue;
            }
            let mut next = st.clone();
            next.p = hit.clone();
            if *ord > 0 || m.iter().any(|x| *x != 0) {
                next.m = arith::sub(&st.m, m);
                if !self.feasible(&next.m, st.ord + ord, p_dir) {
                    continue;
                }
                next.coef = &st.coef * c;
                next.class = add_classes(&st.class, q);
                next.ord = st.ord + ord;
                next.events.push(Event::Bend {
                    point: hit.clone(),
                    walls: group.to_vec(),
                    c: c.clone(),
                    q: q.clone(),
                    m: m.clone(),
                });
                if next.m.iter().all(|x| *x == 0) {
                    continue;
                }
            }
            match &crossing {
                Some(e) => self.cross(
                    next,
                    Exit {
                        s: Rat::zero(),
                        ray: e.ray,
                        point: e.point.clone(),
                    },
                    p_dir,
                    out,
                )?,
                None => self.walk(next, p_dir, out)?,
            }
        }
        Ok(())
    }

    fn choices(&self, group: &[usize], pw: i64) -> Result<Choices> {
        let key = (group.to_vec(), pw);
        if let Some(c) = self.choices.lock().expect("power cache").get(&key) {
            return Ok(c.clone());
        }
        let mut f = self.d.walls[group[0]].function.pow(pw)?;
        for &wi in &group[1..] {
            f = f.mul(&self.d.walls[wi].function.pow(pw)?)?;
        }
        let c: Choices = Arc::new(
            f.terms()
                .map(|(key, c)| (key.ord, key.q.clone(), key.m.clone(), c.clone()))
                .collect(),
        );
        self.choices.lock().expect("power cache").insert(key, c.clone());
        Ok(c)
    }

    fn cross(
        &self,
        mut st: State,
        e: Exit,
        p_dir: &[i64],
                out: &mut Vec<Found>,
    ) -> Result<()> {
        if self.d.ambient.is_singular_point(&e.point) {
            return Err(nongeneric("broken line meets the singular point", &e.point));
        }
        let Some(&next) = self.neighbours.get(&(st.cone, e.ray)) else {
            // leaves the support
            return Ok(());
        };
        let t = self.d.ambient.transition(st.cone, next)?;
        let m2 = arith::mat_vec(t, &st.m);
        let mut delta = vec![0u32; self.d.ctx.degrees.len()];
        if let Some(phi) = &self.d.phi {
            let dv = arith::sub(&phi.d_in(next, &m2), &phi.d_in(st.cone, &st.m));
            for (slot, v) in delta.iter_mut().zip(&dv) {
                *slot = u32::try_from(*v).map_err(|_| ThetaError::NonConvexSection)?;
            }
        }
        let dord = self.d.ctx.q_order(&delta);
        if st.ord + dord >= self.order() {
            return Ok(());
        }
        st.ord += dord;
        st.class = add_classes(&st.class, &delta);
        st.events.push(Event::Cross {
            point: e.point.clone(),
            from: st.cone,
            to: next,
            delta,
        });
        st.p = e.point;
        st.m = m2;
        st.cone = next;
        self.walk(st, p_dir, out)
    }

    fn run(&self, p_dir: &[i64], x: &[Rat]) -> Result<(usize, Vec<Found>)> {
        let cone = self.check_endpoint(x)?;
        if self.d.ambient.locate(&arith::rat_vec(p_dir)).is_err() {
            return Err(ThetaError::OutsideSupport(p_dir.to_vec()));
        }
        let mut out = vec![];
        let ncls = self.d.ctx.degrees.len();
        for m in self.candidates(p_dir)? {
            let st = State {
                p: x.to_vec(),
                m: m.clone(),
                cone,
                coef: BigInt::one(),
                class: vec![0; ncls],
                ord: 0,
                events: vec![],
            };
            let before = out.len();
            self.walk(st, p_dir, &mut out)?;
            for f in &mut out[before..] {
                f.exponent = m.clone();
            }
        }
        Ok((cone, out))
    }

    /// Sum of the final monomials of all broken lines for `p_dir` ending at `x`.
    pub(crate) fn theta(&self, p_dir: &[i64], x: &[Rat]) -> Result<(usize, TruncatedSeries)> {
        if p_dir.iter().all(|v| *v == 0) {
            let cone = self.check_endpoint(x)?;
            return Ok((cone, TruncatedSeries::one(&self.d.ctx)));
        }
        let (cone, found) = self.run(p_dir, x)?;
        let mut s = TruncatedSeries::zero(&self.d.ctx);
        for f in found {
            s.add_term(f.coef, f.class, f.exponent);
        }
        Ok((cone, s))
    }

    fn lines(&self, p_dir: &[i64], x: &[Rat]) -> Result<Vec<BrokenLine>> {
        if p_dir.iter().all(|v| *v == 0) {
            return Ok(vec![]);
        }
        let (_, found) = self.run(p_dir, x)?;
        let ncls = self.d.ctx.degrees.len();
        let flat = self.flat;
        let mut lines = vec![];
        for f in found {
            let mut m = p_dir.to_vec();
            let mut coef = BigInt::one();
            let mut class = vec![0u32; ncls];
            let mut cone = f.cone;
            let mut segments = vec![];
            let mut bends = vec![];
            let seg = |cone: usize, m: &[i64], coef: &BigInt, class: &[u32], end: &[Rat]| Segment {
                cone: (!flat).then_some(cone),
                exponent: m.to_vec(),
                coefficient: coef.clone(),
                class: class.to_vec(),
                end: end.to_vec(),
            };
            for ev in f.events.iter().rev() {
                match ev {
                    Event::Cross { point, from, to, delta } => {
                        segments.push(seg(cone, &m, &coef, &class, point));
                        m = arith::mat_vec(self.d.ambient.transition(*to, *from)?, &m);
                        class = add_classes(&class, delta);
                        cone = *from;
                    }
                    Event::Bend { point, walls, c, q, m: mb } => {
                        segments.push(seg(cone, &m, &coef, &class, point));
                        m = arith::add(&m, mb);
                        coef *= c;
                        class = add_classes(&class, q);
                        bends.push(Bend {
                            point: point.clone(),
                            walls: walls.clone(),
                            coefficient: c.clone(),
                            class: q.clone(),
                            exponent: mb.clone(),
                        });
                    }
                }
            }
            debug_assert_eq!(m, f.exponent);
            segments.push(seg(cone, &m, &coef, &class, x));
            lines.push(BrokenLine {
                direction: p_dir.to_vec(),
                endpoint: x.to_vec(),
                segments,
                bends,
            });
        }
        Ok(lines)
    }
}

fn reachable_offsets(d: &ScatteringDiagram) -> HashMap<Vec<i64>, u32> {
    let k = d.order();
    let mut atoms: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
    for w in &d.walls {
        for (key, _) in w.function.terms() {
            if key.ord > 0 && key.ord < k {
                let e = atoms.entry(key.m.clone()).or_insert(key.ord);
                *e = (*e).min(key.ord);
            }
        }
    }
    let mut reach: HashMap<Vec<i64>, u32> = HashMap::from([(vec![0, 0], 0)]);
    let mut frontier: Vec<(Vec<i64>, u32)> = vec![(vec![0, 0], 0)];
    while let Some((v, o)) = frontier.pop() {
        for (a, oa) in &atoms {
            let no = o + oa;
            if no >= k {
                continue;
            }
            let nv = arith::add(&v, a);
            if reach.get(&nv).is_none_or(|old| no < *old) {
                reach.insert(nv.clone(), no);
                frontier.push((nv, no));
            }
        }
    }
    reach
}

/// All broken lines of order below the truncation, found by tracing backwards from `x`.
pub fn enumerate_broken_lines(d: &ScatteringDiagram, p_dir: &[i64], x: &[Rat]) -> Result<Vec<BrokenLine>> {
    Tracer::new(d).lines(p_dir, x)
}

/// Local theta function at a generic point, in the chart of the cone containing it.
pub fn theta_local(d: &ScatteringDiagram, p_dir: &[i64], x: &[Rat]) -> Result<ThetaFunction> {
    let tracer = Tracer::new(d);
    let (cone, value) = tracer.theta(p_dir, x)?;
    Ok(ThetaFunction {
        basepoint: x.to_vec(),
        direction: p_dir.to_vec(),
        cone: (!d.is_flat()).then_some(cone),
        value,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::arith::rat_vec;
    use crate::geometry::build_affine_structure_dim2;
    use crate::scattering::Wall;
    use crate::series::CurveClassMonoid;

    pub(crate) fn one_wall(k: u32) -> ScatteringDiagram {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        let mut d = ScatteringDiagram::new(am, CurveClassMonoid::new(&["t"]), k).unwrap();
        let mut f = TruncatedSeries::one(&d.ctx);
        f.add_term(BigInt::one(), vec![1], vec![0, 1]);
        let mut w = Wall::line(rat_vec(&[0, 0]), vec![0, 1], f);
        w.normal = vec![1, 0];
        d.add_wall(w).unwrap();
        d
    }

    #[test]
    fn straight_line_in_empty_diagram() {
        let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
        let d = ScatteringDiagram::new(am, CurveClassMonoid::new(&["t"]), 3).unwrap();
        let lines = enumerate_broken_lines(&d, &[1, 0], &rat_vec(&[2, 1])).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].bends.is_empty());
        let th = theta_local(&d, &[2, -1], &rat_vec(&[-3, 5])).unwrap();
        assert_eq!(th.value, TruncatedSeries::character(&d.ctx, &[2, -1]));
        assert!(theta_local(&d, &[0, 0], &rat_vec(&[1, 1])).unwrap().value.is_one());
    }

    #[test]
    fn one_wall_bends_on_the_far_side() {
        let d = one_wall(2);
        let near = enumerate_broken_lines(&d, &[1, 0], &rat_vec(&[2, 1])).unwrap();
        assert_eq!(near.len(), 1);
        let far = enumerate_broken_lines(&d, &[1, 0], &rat_vec(&[-2, 1])).unwrap();
        assert_eq!(far.len(), 2);
        let bent = far.iter().find(|l| !l.bends.is_empty()).unwrap();
        assert_eq!(bent.bends[0].point, rat_vec(&[0, 3]));
        assert_eq!(bent.final_segment().exponent, vec![1, 1]);
        assert_eq!(bent.final_segment().class, vec![1]);
        let th = theta_local(&d, &[1, 0], &rat_vec(&[-2, 1])).unwrap();
        let mut want = TruncatedSeries::character(&d.ctx, &[1, 0]);
        want.add_term(BigInt::one(), vec![1], vec![1, 1]);
        assert_eq!(th.value, want);
    }

    #[test]
    fn endpoint_on_wall_is_rejected() {
        let d = one_wall(3);
        assert!(matches!(
            theta_local(&d, &[1, 0], &rat_vec(&[0, 1])),
            Err(ThetaError::NonGeneric(_))
        ));
    }
}

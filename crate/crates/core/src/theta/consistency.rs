use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::algebra::support_points;
use super::lines::Tracer;
use super::{Result, ThetaError};
use crate::arith::{self, Rat};
use crate::scattering::{cross_series, JointMethod, JointReport, ScatteringDiagram, WallKind};
use crate::series::TruncatedSeries;

/// Outcome of comparing theta functions on the two sides of one wall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaConsistency {
    pub wall: usize,
    pub direction: Vec<i64>,
    pub a: Vec<Rat>,
    pub b: Vec<Rat>,
    /// Crossing from `a` carries the positive part of `θ_a` to that of `θ_b`.
    pub plus: bool,
    /// Crossing back from `b` carries the negative part of `θ_b` to that of `θ_a`.
    pub minus: bool,
    /// Both identities on the parts with `<n, e> = 0`.
    pub zero: bool,
}

impl ThetaConsistency {
    pub fn holds(&self) -> bool {
        self.plus && self.minus && self.zero
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Plus,
    Zero,
    Minus,
}

fn part(s: &TruncatedSeries, n: &[i64], which: Part) -> TruncatedSeries {
    let mut out = TruncatedSeries::zero(s.ctx());
    for (k, c) in s.terms() {
        let v = arith::dot(n, &k.m);
        let keep = match which {
            Part::Plus => v > 0,
            Part::Zero => v == 0,
            Part::Minus => v < 0,
        };
        if keep {
            out.add_term(c.clone(), k.q.clone(), k.m.clone());
        }
    }
    out
}

/// Rewrites a series from the chart of `from` in the chart of the adjacent cone `to`,
/// moving the class along with the PL section. Only monomials pointing out of `from`
/// are guaranteed to stay effective.
fn transfer(d: &ScatteringDiagram, s: &TruncatedSeries, from: usize, to: usize) -> Result<TruncatedSeries> {
    if from == to || d.is_flat() {
        return Ok(s.clone());
    }
    let t = d.ambient.transition(from, to)?;
    let mut out = TruncatedSeries::zero(s.ctx());
    for (k, c) in s.terms() {
        let m2 = arith::mat_vec(t, &k.m);
        let mut q: Vec<i64> = k.q.iter().map(|x| i64::from(*x)).collect();
        if let Some(phi) = &d.phi {
            q = arith::add(&q, &arith::sub(&phi.d_in(from, &k.m), &phi.d_in(to, &m2)));
        }
        let q: Option<Vec<u32>> = q.iter().map(|x| u32::try_from(*x).ok()).collect();
        let q = q.ok_or(ThetaError::NonConvexSection)?;
        out.add_term(c.clone(), q, m2);
    }
    Ok(out)
}

/// Compares `θ_a` and `θ_b` across wall `wall`, with `a` on the side where the wall's
/// normal is positive.
pub fn theta_consistency_check(
    d: &ScatteringDiagram,
    wall: usize,
    p_dir: &[i64],
    a: &[Rat],
    b: &[Rat],
) -> Result<ThetaConsistency> {
    let w = d
        .walls
        .get(wall)
        .ok_or_else(|| ThetaError::Input(format!("no wall {wall}")))?;
    let side = |p: &[Rat]| {
        let rel: Vec<Rat> = p.iter().zip(&w.apex).map(|(x, y)| x - y).collect();
        arith::dot_rat(&w.normal, &rel)
    };
    if !side(a).is_positive() || !side(b).is_negative() {
        return Err(ThetaError::Input("a and b must lie on the positive and negative sides of the wall".into()));
    }
    // crossing point of [a, b] with the wall line
    let sa = side(a);
    let sb = side(b);
    let t = &sa / (&sa - &sb);
    let x: Vec<Rat> = a.iter().zip(b).map(|(p, q)| p + &t * (q - p)).collect();
    if !w.contains(&x) {
        return Err(ThetaError::Input("segment from a to b misses the wall".into()));
    }
    let (plus, minus, zero) = across(&Tracer::new(d), &w.normal, &x, p_dir, a, b)?;
    Ok(ThetaConsistency {
        wall,
        direction: p_dir.to_vec(),
        a: a.to_vec(),
        b: b.to_vec(),
        plus,
        minus,
        zero,
    })
}

/// The identities across the line through `x` with normal `n`, `a` on its positive side.
/// The crossing function is the product of all walls through `x`, possibly none when
/// the line is a fan ray.
fn across(tracer: &Tracer, n: &[i64], x: &[Rat], p_dir: &[i64], a: &[Rat], b: &[Rat]) -> Result<(bool, bool, bool)> {
    let d = tracer.diagram();
    let mut f = TruncatedSeries::one(&d.ctx);
    for other in &d.walls {
        if other.contains(x) {
            if other.normal != n && arith::neg(&other.normal) != n {
                return Err(ThetaError::NonGeneric("wall point is a joint".into()));
            }
            f = f.mul(&other.function)?;
        }
    }
    let (ca, ta) = tracer.theta(p_dir, a)?;
    let (cb, tb) = tracer.theta(p_dir, b)?;
    let neg = arith::neg(n);
    let plus_lhs = transfer(d, &cross_series(&f, n, &part(&ta, n, Part::Plus))?, ca, cb)?;
    let minus_lhs = transfer(d, &cross_series(&f, &neg, &part(&tb, n, Part::Minus))?, cb, ca)?;
    let zero_ab = transfer(d, &cross_series(&f, n, &part(&ta, n, Part::Zero))?, ca, cb)?;
    let zero_ba = transfer(d, &cross_series(&f, &neg, &part(&tb, n, Part::Zero))?, cb, ca)?;
    Ok((
        plus_lhs == part(&tb, n, Part::Plus),
        minus_lhs == part(&ta, n, Part::Minus),
        zero_ab == part(&tb, n, Part::Zero) && zero_ba == part(&ta, n, Part::Zero),
    ))
}

fn small_positive(rng: &mut ChaCha8Rng, scale: &Rat) -> Rat {
    let den: i64 = rng.gen_range(1_000_000_007..2_000_000_000);
    let num: i64 = rng.gen_range(den / 10..den);
    scale * Rat::new(num.into(), den.into())
}

/// A line crossed in a theta consistency test: a wall, or a fan ray carrying a kink of
/// the PL section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Crossing {
    Wall(usize),
    Ray(usize),
}

impl Crossing {
    fn frame(&self, d: &ScatteringDiagram) -> (Vec<Rat>, Vec<i64>, Vec<i64>) {
        match *self {
            Crossing::Wall(wi) => {
                let w = &d.walls[wi];
                (w.apex.clone(), w.direction.clone(), w.normal.clone())
            }
            Crossing::Ray(r) => {
                let v = d.ambient.fan.rays[r].clone();
                (vec![Rat::zero(), Rat::zero()], v.clone(), arith::ccw_normal(&v))
            }
        }
    }

    fn contains(&self, d: &ScatteringDiagram, p: &[Rat]) -> bool {
        match *self {
            Crossing::Wall(wi) => d.walls[wi].contains(p),
            Crossing::Ray(_) => {
                let (_, dir, n) = self.frame(d);
                arith::dot_rat(&n, p).is_zero() && !arith::dot_rat(&dir, p).is_negative()
            }
        }
    }

    fn param(&self, d: &ScatteringDiagram, p: &[Rat]) -> Rat {
        let (apex, dir, _) = self.frame(d);
        let rel: Vec<Rat> = p.iter().zip(&apex).map(|(x, y)| x - y).collect();
        arith::dot_rat(&dir, &rel) / Rat::from_integer(arith::dot(&dir, &dir).into())
    }

    fn is_ray(&self, d: &ScatteringDiagram) -> bool {
        match *self {
            Crossing::Wall(wi) => d.walls[wi].kind == WallKind::Ray,
            Crossing::Ray(_) => true,
        }
    }
}

impl std::fmt::Display for Crossing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Crossing::Wall(wi) => write!(f, "wall {wi}"),
            Crossing::Ray(r) => write!(f, "fan ray {r}"),
        }
    }
}

/// The identities at the point of `line` with parameter `s`, on a random small segment
/// across it.
fn check_at_param(
    tracer: &Tracer,
    line: Crossing,
    s: &Rat,
    p_dir: &[i64],
    rng: &mut ChaCha8Rng,
) -> Result<(bool, bool, bool)> {
    let d = tracer.diagram();
    let (apex, dir, n) = line.frame(d);
    let x: Vec<Rat> = apex
        .iter()
        .zip(&dir)
        .map(|(p, v)| p + s * Rat::from_integer((*v).into()))
        .collect();
    let eps = small_positive(rng, &Rat::new(BigInt::from(1), BigInt::from(100_000)));
    let a: Vec<Rat> = x.iter().zip(&n).map(|(p, c)| p + &eps * Rat::from_integer((*c).into())).collect();
    let b: Vec<Rat> = x.iter().zip(&n).map(|(p, c)| p - &eps * Rat::from_integer((*c).into())).collect();
    across(tracer, &n, &x, p_dir, &a, &b)
}

/// Theta consistency at a random generic point of a wall, retrying off degenerate points.
pub fn theta_consistency_at_wall(d: &ScatteringDiagram, wall: usize, p_dir: &[i64], seed: u64) -> Result<ThetaConsistency> {
    let w = d
        .walls
        .get(wall)
        .ok_or_else(|| ThetaError::Input(format!("no wall {wall}")))?;
    let tracer = Tracer::new(d);
    let mut last = None;
    for attempt in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(arith::mix_seed(seed, &[wall as i64, p_dir[0], p_dir[1], attempt]));
        let mut s = small_positive(&mut rng, &Rat::from_integer(3.into()));
        if w.kind == WallKind::Line && rng.gen_bool(0.5) {
            s = -s;
        }
        let x = w.at(&s);
        let eps = small_positive(&mut rng, &Rat::new(BigInt::from(1), BigInt::from(100_000)));
        let a: Vec<Rat> = x.iter().zip(&w.normal).map(|(p, c)| p + &eps * Rat::from_integer((*c).into())).collect();
        let b: Vec<Rat> = x.iter().zip(&w.normal).map(|(p, c)| p - &eps * Rat::from_integer((*c).into())).collect();
        match across(&tracer, &w.normal, &x, p_dir, &a, &b) {
            Err(e @ ThetaError::NonGeneric(_)) => last = Some(e),
            Err(e) => return Err(e),
            Ok((plus, minus, zero)) => {
                return Ok(ThetaConsistency {
                    wall,
                    direction: p_dir.to_vec(),
                    a,
                    b,
                    plus,
                    minus,
                    zero,
                })
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Every joint checked: smooth ones by the path-ordered product, the others by theta
/// consistency for all directions of norm at most `norm_bound`, on both sides of each
/// incident wall near the joint and, when the diagram is not flat, across each fan ray
/// through it.
pub fn check_consistency(d: &ScatteringDiagram, norm_bound: i64, seed: u64) -> Result<Vec<JointReport>> {
    let mut reports = d.automorphism_report()?;
    let joints = d.joints();
    let tracer = Tracer::new(d);
    let dirs: Vec<Vec<i64>> = support_points(&d.ambient, norm_bound)
        .into_iter()
        .filter(|p| p.iter().any(|x| *x != 0))
        .collect();
    let mut lines: Vec<Crossing> = (0..d.walls.len()).map(Crossing::Wall).collect();
    if !d.is_flat() {
        lines.extend((0..d.ambient.fan.rays.len()).map(Crossing::Ray));
    }
    for rep in reports.iter_mut().filter(|r| r.method == JointMethod::Theta) {
        let p = rep.point.clone();
        // distance along each line to the nearest other joint bounds the test point
        let mut tasks = vec![];
        for line in &lines {
            if !line.contains(d, &p) {
                continue;
            }
            let s0 = line.param(d, &p);
            let mut signs = vec![1i64];
            if !(line.is_ray(d) && s0.is_zero()) {
                signs.push(-1);
            }
            for sign in signs {
                let mut gap: Option<Rat> = None;
                for q in &joints {
                    if q != &p && line.contains(d, q) {
                        let ds = (line.param(d, q) - &s0) * Rat::from_integer(sign.into());
                        if ds.is_positive() && gap.as_ref().is_none_or(|g| ds < *g) {
                            gap = Some(ds);
                        }
                    }
                }
                let gap = gap.unwrap_or_else(|| Rat::from_integer(1.into()));
                tasks.push((*line, s0.clone(), sign, gap));
            }
        }
        let results: Vec<Result<Option<String>>> = tasks
            .par_iter()
            .flat_map_iter(|(line, s0, sign, gap)| {
                let tracer = &tracer;
                let tag = match line {
                    Crossing::Wall(wi) => *wi as i64,
                    Crossing::Ray(r) => -1 - *r as i64,
                };
                dirs.iter().map(move |pd| {
                    let mut rng = ChaCha8Rng::seed_from_u64(arith::mix_seed(seed, &[tag, *sign, pd[0], pd[1]]));
                    let mut last = None;
                    for _ in 0..8 {
                        let off = small_positive(&mut rng, &(gap / Rat::from_integer(2.into())));
                        let s = s0 + off * Rat::from_integer((*sign).into());
                        match check_at_param(tracer, *line, &s, pd, &mut rng) {
                            Ok((true, true, true)) => return Ok(None),
                            Ok(_) => return Ok(Some(format!("{line}, direction {pd:?}"))),
                            Err(e @ ThetaError::NonGeneric(_)) => last = Some(e),
                            Err(e) => return Err(e),
                        }
                    }
                    Err(last.expect("at least one attempt"))
                })
            })
            .collect();
        let mut failures = vec![];
        for r in results {
            if let Some(f) = r? {
                failures.push(f);
            }
        }
        rep.ok = Some(failures.is_empty());
        rep.detail = if failures.is_empty() {
            format!("theta consistency on {} sides of walls and rays", tasks.len())
        } else {
            format!("theta consistency fails: {}", failures.join("; "))
        };
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_vec;
    use crate::theta::lines::tests::one_wall;

    #[test]
    fn one_wall_is_theta_consistent() {
        let d = one_wall(3);
        for p in [[1, 0], [-1, 0], [0, 1], [2, -1], [-1, -1]] {
            let c = theta_consistency_check(&d, 0, &p, &rat_vec(&[1, 2]), &rat_vec(&[-1, 2])).unwrap();
            assert!(c.holds(), "{p:?}");
        }
    }

    #[test]
    fn corrupted_wall_breaks_theta_consistency() {
        let good = one_wall(3);
        let mut bad = good.clone();
        // theta functions still come from the true wall, the crossing uses a doubled one
        let mut f = TruncatedSeries::one(&bad.ctx);
        f.add_term(BigInt::from(2), vec![1], vec![0, 1]);
        bad.walls[0].function = f;
        let c = theta_consistency_check(&bad, 0, &[1, 0], &rat_vec(&[1, 2]), &rat_vec(&[-1, 2])).unwrap();
        assert!(c.holds(), "a single wall is consistent with any function");
        let tracer = Tracer::new(&good);
        let (_, ta) = tracer.theta(&[1, 0], &rat_vec(&[1, 2])).unwrap();
        let (_, tb) = tracer.theta(&[1, 0], &rat_vec(&[-1, 2])).unwrap();
        let crossed = cross_series(&bad.walls[0].function, &[1, 0], &ta).unwrap();
        assert_ne!(crossed, tb);
    }
}

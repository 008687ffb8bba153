use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algebra::{Element, MirrorAlgebra, Table, TableKey};
use super::{Result, ThetaError};
use crate::arith::{self, Rat};
use crate::geometry::{AffineManifold, PLFunction};
use crate::scattering::{ScatteringDiagram, WallKind};

/// One failing table term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub inputs: Vec<Vec<i64>>,
    pub target: Vec<i64>,
    pub class: Vec<u32>,
    pub detail: String,
}

/// How basis points are weighted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointWeight {
    /// A linear map given by its rows.
    Linear(Vec<Vec<i64>>),
    /// Coordinates with respect to the rays of the cone containing the point, one slot per
    /// ray of the fan.
    RaysPL,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    pub points: PointWeight,
    /// Weight of each curve-class generator.
    pub classes: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl GradingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn weight_dim(am: &AffineManifold, pw: &PointWeight) -> usize {
    match pw {
        PointWeight::Linear(rows) => rows.len(),
        PointWeight::RaysPL => am.fan.rays.len(),
    }
}

/// Weight of a tangent vector written in the chart of maximal cone `cone`.
fn weight_in(am: &AffineManifold, pw: &PointWeight, cone: usize, m: &[i64]) -> Result<Vec<Rat>> {
    match pw {
        PointWeight::Linear(rows) => Ok(rows.iter().map(|r| Rat::from_integer(arith::dot(r, m).into())).collect()),
        PointWeight::RaysPL => {
            let coords = am
                .fan
                .cone_coords(cone, &arith::rat_vec(m))
                .ok_or_else(|| ThetaError::Input("cone is not simplicial".into()))?;
            let mut w = vec![Rat::zero(); am.fan.rays.len()];
            for (&r, c) in am.fan.maximal_cones[cone].iter().zip(coords) {
                w[r] = c;
            }
            Ok(w)
        }
    }
}

pub fn point_weight(am: &AffineManifold, pw: &PointWeight, p: &[i64]) -> Result<Vec<Rat>> {
    if p.iter().all(|x| *x == 0) {
        return Ok(vec![Rat::zero(); weight_dim(am, pw)]);
    }
    let loc = am.locate(&arith::rat_vec(p)).map_err(|_| ThetaError::OutsideSupport(p.to_vec()))?;
    weight_in(am, pw, loc.maximal[0], p)
}

fn class_weight(g: &Grading, q: &[u32], dim: usize) -> Vec<Rat> {
    let mut w = vec![Rat::zero(); dim];
    for (gi, &n) in q.iter().enumerate() {
        for (slot, x) in w.iter_mut().zip(&g.classes[gi]) {
            *slot += x * Rat::from_integer(n.into());
        }
    }
    w
}

/// Class weights that make every wall term and every fan-ray kink weight-neutral. A
/// divisor pairing on the monoid takes precedence.
pub fn infer_grading(d: &ScatteringDiagram, points: PointWeight) -> Result<Grading> {
    let am = &d.ambient;
    let dim = weight_dim(am, &points);
    let ngen = d.monoid.len();
    if let Some(pairing) = &d.monoid.divisor_pairing {
        if pairing.len() != ngen || pairing.iter().any(|r| r.len() != dim) {
            return Err(ThetaError::Input("divisor pairing has the wrong shape".into()));
        }
        return Ok(Grading {
            points,
            classes: pairing.iter().map(|r| arith::rat_vec(r)).collect(),
        });
    }
    let mut rows: Vec<Vec<Rat>> = vec![];
    let mut rhs: Vec<Vec<Rat>> = vec![];
    for w in &d.walls {
        let mut samples = vec![w.apex.clone()];
        let far = Rat::from_integer(1_000_000.into());
        samples.push(w.at(&far));
        if w.kind == WallKind::Line {
            samples.push(w.at(&-far));
        }
        let mut cones = vec![];
        for s in &samples {
            if let Ok(loc) = am.locate(s) {
                cones.extend(loc.maximal);
            }
        }
        cones.sort_unstable();
        cones.dedup();
        for (key, _) in w.function.terms() {
            if key.ord == 0 {
                continue;
            }
            for &c in &cones {
                rows.push(key.q.iter().map(|x| Rat::from_integer((*x).into())).collect());
                rhs.push(weight_in(am, &points, c, &key.m)?.into_iter().map(|x| -x).collect());
            }
        }
    }
    for (a, b, _) in am.fan.interior_walls() {
        let t = am.transition(a, b)?;
        for m in [vec![1, 0], vec![0, 1]] {
            let m2 = arith::mat_vec(t, &m);
            let delta: Vec<i64> = match &d.phi {
                Some(phi) => arith::sub(&phi.d_in(a, &m), &phi.d_in(b, &m2)),
                None => vec![0; ngen],
            };
            let wa = weight_in(am, &points, a, &m)?;
            let wb = weight_in(am, &points, b, &m2)?;
            rows.push(arith::rat_vec(&delta));
            rhs.push(wa.iter().zip(&wb).map(|(x, y)| x - y).collect());
        }
    }
    let mut classes = vec![vec![Rat::zero(); dim]; ngen];
    for j in 0..dim {
        let b: Vec<Rat> = rhs.iter().map(|r| r[j].clone()).collect();
        let sol = if rows.is_empty() {
            Some(vec![Rat::zero(); ngen])
        } else {
            arith::solve_any(&rows, &b, ngen)
        };
        let sol = sol.ok_or_else(|| {
            ThetaError::Input("no class weights make the walls and kinks weight-neutral".into())
        })?;
        for (g, x) in sol.into_iter().enumerate() {
            classes[g][j] = x;
        }
    }
    Ok(Grading { points, classes })
}

/// Every term `t^γ` of every entry satisfies `w(Q) + w(γ) = Σ w(P_j)`.
pub fn check_grading(am: &AffineManifold, table: &Table, g: &Grading) -> Result<GradingReport> {
    let dim = weight_dim(am, &g.points);
    let mut checked = 0;
    let mut violations = vec![];
    for ((inputs, q), v) in &table.entries {
        let mut rhs = vec![Rat::zero(); dim];
        for p in inputs {
            for (s, x) in rhs.iter_mut().zip(point_weight(am, &g.points, p)?) {
                *s += x;
            }
        }
        let wq = point_weight(am, &g.points, q)?;
        for (k, _) in v.terms() {
            checked += 1;
            let lhs: Vec<Rat> = wq.iter().zip(class_weight(g, &k.q, dim)).map(|(a, b)| a + b).collect();
            if lhs != rhs {
                violations.push(Violation {
                    inputs: inputs.clone(),
                    target: q.clone(),
                    class: k.q.clone(),
                    detail: format!(
                        "w(Q) + w(γ) = {:?} but Σ w(P) = {:?}",
                        lhs.iter().map(arith::fmt_rat).collect::<Vec<_>>(),
                        rhs.iter().map(arith::fmt_rat).collect::<Vec<_>>()
                    ),
                });
            }
        }
    }
    Ok(GradingReport { checked, violations })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityReport {
    pub checked: usize,
    pub equalities: usize,
    /// Strictly convex across every ray, so equality forces a trivial entry.
    pub ample: bool,
    pub violations: Vec<Violation>,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn is_ample(am: &AffineManifold, f: &PLFunction) -> Result<bool> {
    for (a, b, _) in am.fan.interior_walls() {
        if f.bend(am, a, b)? <= 0 || f.bend(am, b, a)? <= 0 {
            return Ok(false);
        }
    }
    Ok(am.fan.complete)
}

/// `F(Q) <= Σ F(P_i)` on every nonzero term; for strictly convex `F`, equality forces the
/// entry to be exactly 1.
pub fn check_convexity(am: &AffineManifold, table: &Table, f: &PLFunction) -> Result<ConvexityReport> {
    if f.values.len() != am.fan.rays.len() {
        return Err(ThetaError::Input("PL function needs one value per ray".into()));
    }
    if !f.is_nef(am)? {
        return Err(ThetaError::Input("PL function is not nef".into()));
    }
    let ample = is_ample(am, f)?;
    let mut report = ConvexityReport {
        checked: 0,
        equalities: 0,
        ample,
        violations: vec![],
    };
    for ((inputs, q), v) in &table.entries {
        let fq = f.eval_int(am, q)?;
        let mut sum = Rat::zero();
        for p in inputs {
            sum += f.eval_int(am, p)?;
        }
        for (k, _) in v.terms() {
            report.checked += 1;
            let bad = |detail: String| Violation {
                inputs: inputs.clone(),
                target: q.clone(),
                class: k.q.clone(),
                detail,
            };
            if fq > sum {
                report.violations.push(bad(format!(
                    "F(Q) = {} exceeds Σ F(P) = {}",
                    arith::fmt_rat(&fq),
                    arith::fmt_rat(&sum)
                )));
            } else if fq == sum {
                report.equalities += 1;
                if ample && !v.is_one() {
                    report.violations.push(bad("equality with an entry other than 1".into()));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociativityReport {
    pub checked: usize,
    pub failures: Vec<(Vec<Vec<i64>>, String)>,
}

impl AssociativityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn show(alg: &MirrorAlgebra, e: &Element) -> String {
    let names = &alg.diagram().monoid.generators;
    let parts: Vec<String> = e
        .iter()
        .map(|(p, c)| format!("({})θ{:?}", c.display_with(names), p))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// `(θ_1 θ_2) θ_3 = θ_1 (θ_2 θ_3)` on each triple.
pub fn check_associativity(alg: &MirrorAlgebra, triples: &[[Vec<i64>; 3]]) -> Result<AssociativityReport> {
    let results: Vec<Option<(Vec<Vec<i64>>, String)>> = triples
        .par_iter()
        .map(|[a, b, c]| {
            let left = alg.multiply_elements(&alg.multiply(a, b)?, &alg.unit_element(c))?;
            let right = alg.multiply_elements(&alg.unit_element(a), &alg.multiply(b, c)?)?;
            Ok((left != right).then(|| {
                (
                    vec![a.clone(), b.clone(), c.clone()],
                    format!("(ab)c = {} but a(bc) = {}", show(alg, &left), show(alg, &right)),
                )
            }))
        })
        .collect::<Result<_>>()?;
    Ok(AssociativityReport {
        checked: triples.len(),
        failures: results.into_iter().flatten().collect(),
    })
}

/// Table with every class sent to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsoluteTable {
    pub entries: BTreeMap<TableKey, BigInt>,
    /// Entries with terms at the top order, which a higher truncation could still change.
    pub unstable: Vec<TableKey>,
}

pub fn absolutize(table: &Table) -> AbsoluteTable {
    let mut entries = BTreeMap::new();
    let mut unstable = vec![];
    for (key, v) in &table.entries {
        let total: BigInt = v.terms().map(|(_, c)| c.clone()).sum();
        if v.terms().any(|(k, _)| k.ord + 1 == table.order) {
            unstable.push(key.clone());
        }
        if !total.is_zero() {
            entries.insert(key.clone(), total);
        }
    }
    AbsoluteTable { entries, unstable }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReesReport {
    /// Filtration level of each basis point.
    pub levels: BTreeMap<Vec<i64>, i64>,
    pub multiplicative: bool,
    pub violations: Vec<Violation>,
}

fn ceil(r: &Rat) -> i64 {
    let (q, rem) = r.numer().div_rem(r.denom());
    let q = if rem.is_positive() { q + 1 } else { q };
    q.to_i64().expect("level fits in i64")
}

/// Levels from an effective nef divisor given by its coefficients on the rays: `θ_P` sits
/// in level `max(0, ⌈W(P)⌉)` where `W` is the piecewise-linear extension. Products must not
/// raise the level beyond the sum of the factors' levels.
pub fn rees_filtration(am: &AffineManifold, table: &Table, w: &PLFunction) -> Result<ReesReport> {
    if w.values.iter().any(|x| *x < 0) {
        return Err(ThetaError::Input("divisor is not effective".into()));
    }
    let conv = check_convexity(am, table, w)?;
    let mut levels = BTreeMap::new();
    let level = |p: &[i64]| -> Result<i64> { Ok(ceil(&w.eval_int(am, p)?).max(0)) };
    for p in &table.basis {
        levels.insert(p.clone(), level(p)?);
    }
    let mut violations = conv.violations;
    for ((inputs, q), v) in &table.entries {
        let lq = level(q)?;
        let mut sum = 0;
        for p in inputs {
            sum += level(p)?;
        }
        if lq > sum {
            violations.push(Violation {
                inputs: inputs.clone(),
                target: q.clone(),
                class: v.terms().next().map(|(k, _)| k.q.clone()).unwrap_or_default(),
                detail: format!("level {lq} above {sum}"),
            });
        }
    }
    Ok(ReesReport {
        levels,
        multiplicative: violations.is_empty(),
        violations,
    })
}

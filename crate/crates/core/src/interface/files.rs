use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{rat_serde, InterfaceError, Result};
use crate::arith::{self, IMat, Rat};
use crate::geometry::{build_affine_structure_dim2, AffineManifold, Fan, PLFunction, PLSection};
use crate::scattering::{ScatteringDiagram, Wall, WallKind};
use crate::series::{CurveClassMonoid, TermRecord, TruncatedSeries};
use crate::theta::{AlgebraOptions, Table, ThetaFunction};
use crate::vertex::{
    check_pseudomanifold, link_homology_check, Cell, ConePoint, DualComplex, LinkReport, PseudomanifoldReport,
    VertexAlgebra,
};

/// A fan with either its own linear structure or a rank-2 self-intersection cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub rank: usize,
    #[serde(default)]
    pub rays: Vec<Vec<i64>>,
    #[serde(default)]
    pub maximal_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_intersections: Option<Vec<i64>>,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<AffineManifold> {
        let geo = |e: crate::geometry::GeometryError| InterfaceError::field("geometry", e);
        match (&self.affine, &self.self_intersections) {
            (Some(_), Some(_)) => Err(InterfaceError::field(
                "geometry.affine",
                "give either affine or self_intersections, not both",
            )),
            (Some(a), None) if a != "toric" => {
                Err(InterfaceError::field("geometry.affine", format!("unknown structure {a:?}")))
            }
            (_, Some(d)) => {
                if self.rank != 2 {
                    return Err(InterfaceError::field("geometry.rank", "self_intersections need rank 2"));
                }
                if self.rays.is_empty() {
                    return build_affine_structure_dim2(d).map_err(geo);
                }
                let fan = Fan::from_cyclic_rays(self.rays.clone()).map_err(geo)?;
                self.check_cones(&fan)?;
                AffineManifold::with_self_intersections(fan, d).map_err(geo)
            }
            (_, None) => {
                if self.rays.is_empty() {
                    return Err(InterfaceError::field("geometry.rays", "a toric structure needs rays"));
                }
                let fan = if self.maximal_cones.is_empty() && self.rank == 2 {
                    Fan::from_cyclic_rays(self.rays.clone()).map_err(geo)?
                } else {
                    Fan::new(self.rank, self.rays.clone(), self.maximal_cones.clone()).map_err(geo)?
                };
                Ok(AffineManifold::toric(fan))
            }
        }
    }

    fn check_cones(&self, fan: &Fan) -> Result<()> {
        if !self.maximal_cones.is_empty() && self.maximal_cones != fan.maximal_cones {
            return Err(InterfaceError::field(
                "geometry.maximal_cones",
                "a cyclic structure uses the cones between consecutive rays",
            ));
        }
        Ok(())
    }

    /// Rays stay in the fan's order: cones, kinks and self-intersections are indexed by it.
    pub fn from_manifold(am: &AffineManifold) -> GeometrySpec {
        let toric = am.is_toric();
        GeometrySpec {
            rank: am.fan.rank,
            rays: am.fan.rays.clone(),
            maximal_cones: am.fan.maximal_cones.clone(),
            affine: toric.then(|| "toric".to_string()),
            self_intersections: if toric { None } else { am.self_intersections.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoidSpec {
    pub generators: Vec<String>,
    /// Defaults to 1 for every generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor_pairing: Option<Vec<Vec<i64>>>,
}

impl MonoidSpec {
    pub fn build(&self) -> Result<CurveClassMonoid> {
        let m = CurveClassMonoid {
            generators: self.generators.clone(),
            degrees: self.degrees.clone().unwrap_or_else(|| vec![1; self.generators.len()]),
            divisor_pairing: self.divisor_pairing.clone(),
        };
        m.validate().map_err(InterfaceError::Input)?;
        Ok(m)
    }

    pub fn from_monoid(m: &CurveClassMonoid) -> MonoidSpec {
        MonoidSpec {
            generators: m.generators.clone(),
            degrees: m.degrees.iter().any(|d| *d != 1).then(|| m.degrees.clone()),
            divisor_pairing: m.divisor_pairing.clone(),
        }
    }
}

/// The PL section, by kinks along the rays (rank 2) or by its derivative on each cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Derivatives {
        dphi: Vec<IMat>,
    },
    Kinks {
        kinks: Vec<Vec<i64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<IMat>,
    },
}

impl PhiSpec {
    pub fn build(&self, am: &AffineManifold, classes: usize) -> Result<PLSection> {
        let phi = match self {
            PhiSpec::Derivatives { dphi } => PLSection { dphi: dphi.clone() },
            PhiSpec::Kinks { kinks, base } => {
                PLSection::from_kinks(am, kinks, base.clone()).map_err(|e| InterfaceError::field("phi.kinks", e))?
            }
        };
        if phi.dphi.len() != am.fan.maximal_cones.len() {
            return Err(InterfaceError::field("phi.dphi", "one matrix per maximal cone expected"));
        }
        for m in &phi.dphi {
            if m.len() != classes || m.iter().any(|r| r.len() != am.rank()) {
                return Err(InterfaceError::field(
                    "phi.dphi",
                    format!("each matrix needs {classes} rows of length {}", am.rank()),
                ));
            }
        }
        Ok(phi)
    }
}

/// One term `c t^q z^m`; `q` may be omitted for a class-free term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub q: Vec<u32>,
    pub m: Vec<i64>,
    #[serde(with = "super::bigint_serde")]
    pub c: BigInt,
}

impl From<TermRecord> for TermSpec {
    fn from(r: TermRecord) -> Self {
        TermSpec { q: r.q, m: r.m, c: r.c }
    }
}

fn series_from_specs(
    field: &str,
    ctx: &std::sync::Arc<crate::series::Context>,
    terms: &[TermSpec],
) -> Result<TruncatedSeries> {
    let n = ctx.degrees.len();
    let mut recs = vec![];
    for (i, t) in terms.iter().enumerate() {
        let mut q = t.q.clone();
        if q.is_empty() {
            q = vec![0; n];
        }
        if q.len() != n {
            return Err(InterfaceError::field(&format!("{field}[{i}].q"), format!("expected {n} entries")));
        }
        recs.push(TermRecord { q, m: t.m.clone(), c: t.c.clone() });
    }
    TruncatedSeries::from_records(ctx, &recs).map_err(|e| InterfaceError::field(field, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSpec {
    /// Apex of a ray or a point on a line; the origin when omitted.
    #[serde(default, with = "rat_serde::opt", skip_serializing_if = "Option::is_none")]
    pub apex: Option<Vec<Rat>>,
    pub direction: Vec<i64>,
    /// `"line"` (default) or `"ray"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// Defaults to the counter-clockwise normal of the direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<i64>>,
    pub function: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inserted: bool,
}

impl WallSpec {
    fn build(&self, i: usize, d: &ScatteringDiagram) -> Result<Wall> {
        let field = format!("walls[{i}]");
        let rank = d.ambient.rank();
        let apex = self.apex.clone().unwrap_or_else(|| arith::rat_vec(&vec![0; rank]));
        let function = series_from_specs(&format!("{field}.function"), &d.ctx, &self.function)?;
        let mut w = match self.kind.as_deref() {
            None | Some("line") => Wall::line(apex, self.direction.clone(), function),
            Some("ray") => Wall::ray(apex, self.direction.clone(), function),
            Some(k) => return Err(InterfaceError::field(&format!("{field}.kind"), format!("unknown kind {k:?}"))),
        };
        if let Some(n) = &self.normal {
            w.normal = n.clone();
        }
        w.inserted = self.inserted;
        Ok(w)
    }

    fn from_wall(w: &Wall) -> WallSpec {
        WallSpec {
            apex: Some(w.apex.clone()),
            direction: w.direction.clone(),
            kind: Some(match w.kind {
                WallKind::Line => "line".into(),
                WallKind::Ray => "ray".into(),
            }),
            normal: Some(w.normal.clone()),
            function: w.function.to_records().into_iter().map(TermSpec::from).collect(),
            inserted: w.inserted,
        }
    }
}

fn default_bound() -> i64 {
    2
}

fn default_samples() -> usize {
    3
}

/// Problem input and diagram file alike: `scatter` reads one and writes one with the
/// inserted walls added.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub geometry: GeometrySpec,
    pub monoid: MonoidSpec,
    pub order: u32,
    #[serde(default)]
    pub walls: Vec<WallSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    /// L∞ bound on theta-basis points.
    #[serde(default = "default_bound")]
    pub bound: i64,
    #[serde(default)]
    pub seed: u64,
    /// Basepoints per structure constant.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Values on the rays of PL functions used by the convexity suite.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_functions: Vec<Vec<i64>>,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<ProblemSpec> {
        let spec: ProblemSpec = super::from_json(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(InterfaceError::field("order", "must be at least 1"));
        }
        if self.bound < 0 {
            return Err(InterfaceError::field("bound", "must be non-negative"));
        }
        if self.samples < 1 {
            return Err(InterfaceError::field("samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn diagram(&self) -> Result<ScatteringDiagram> {
        self.validate()?;
        let am = self.geometry.build()?;
        let monoid = self.monoid.build()?;
        for (i, f) in self.test_functions.iter().enumerate() {
            if f.len() != am.fan.rays.len() {
                return Err(InterfaceError::field(
                    &format!("test_functions[{i}]"),
                    format!("expected one value per ray ({})", am.fan.rays.len()),
                ));
            }
        }
        let mut d = ScatteringDiagram::new(am, monoid, self.order).map_err(|e| InterfaceError::field("geometry", e))?;
        if let Some(phi) = &self.phi {
            d.phi = Some(phi.build(&d.ambient, d.monoid.len())?);
        }
        for (i, w) in self.walls.iter().enumerate() {
            let wall = w.build(i, &d)?;
            d.add_wall(wall).map_err(|e| InterfaceError::field(&format!("walls[{i}]"), e))?;
        }
        Ok(d)
    }

    /// Canonical file for a diagram; algebra settings are taken from `like`.
    pub fn from_diagram(d: &ScatteringDiagram, like: &ProblemSpec) -> ProblemSpec {
        let mut d = d.clone();
        d.canonicalize();
        ProblemSpec {
            geometry: GeometrySpec::from_manifold(&d.ambient),
            monoid: MonoidSpec::from_monoid(&d.monoid),
            order: d.order(),
            walls: d.walls.iter().map(WallSpec::from_wall).collect(),
            phi: d.phi.as_ref().map(|p| PhiSpec::Derivatives { dphi: p.dphi.clone() }),
            bound: like.bound,
            seed: like.seed,
            samples: like.samples,
            test_functions: like.test_functions.clone(),
        }
    }

    pub fn options(&self) -> AlgebraOptions {
        AlgebraOptions {
            bound: self.bound,
            samples: self.samples,
            seed: self.seed,
            strict: false,
        }
    }

    pub fn test_functions(&self) -> Vec<PLFunction> {
        self.test_functions.iter().cloned().map(PLFunction::new).collect()
    }
}

/// A local theta function at a basepoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaRecord {
    #[serde(rename = "P")]
    pub p: Vec<i64>,
    #[serde(with = "rat_serde")]
    pub x: Vec<Rat>,
    /// Chart the exponents are written in, when the structure has several.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<usize>,
    pub terms: Vec<TermRecord>,
}

impl From<&ThetaFunction> for ThetaRecord {
    fn from(t: &ThetaFunction) -> Self {
        ThetaRecord {
            p: t.direction.clone(),
            x: t.basepoint.clone(),
            cone: t.cone,
            terms: t.value.to_records(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRecord {
    pub inputs: Vec<Vec<i64>>,
    #[serde(rename = "Q")]
    pub q: Vec<i64>,
    pub terms: Vec<TermRecord>,
}

/// Structure constants; only nonzero entries are listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub order: u32,
    pub generators: Vec<String>,
    pub bound: i64,
    pub basis: Vec<Vec<i64>>,
    pub entries: Vec<TableRecord>,
}

impl From<&Table> for TableFile {
    fn from(t: &Table) -> Self {
        TableFile {
            order: t.order,
            generators: t.generators.clone(),
            bound: t.bound,
            basis: t.basis.clone(),
            entries: t
                .entries
                .iter()
                .map(|((inputs, q), s)| TableRecord {
                    inputs: inputs.clone(),
                    q: q.clone(),
                    terms: s.to_records(),
                })
                .collect(),
        }
    }
}

impl TableFile {
    pub fn to_table(&self) -> Result<Table> {
        let monoid = CurveClassMonoid {
            generators: self.generators.clone(),
            degrees: vec![1; self.generators.len()],
            divisor_pairing: None,
        };
        let ctx = crate::series::Context::new(&monoid, 0, self.order);
        let mut entries = BTreeMap::new();
        for (i, r) in self.entries.iter().enumerate() {
            let s = TruncatedSeries::from_records(&ctx, &r.terms)
                .map_err(|e| InterfaceError::field(&format!("entries[{i}].terms"), e))?;
            entries.insert(Table::key(&r.inputs, &r.q), s);
        }
        Ok(Table {
            order: self.order,
            generators: self.generators.clone(),
            bound: self.bound,
            basis: self.basis.clone(),
            entries,
        })
    }
}

fn default_degree() -> u64 {
    2
}

/// A Δ-complex given by maximal simplices on vertex labels, by cells with explicit face
/// maps, or as the dual complex of a unimodular fan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplices: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Vec<Cell>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    /// One sign per top simplex; all +1 when omitted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orientations: Vec<i8>,
    /// Replace the complex by its cone, apex last.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cone: bool,
    /// Basis bound: coordinate sum for abstract complexes, L∞ norm for fans.
    #[serde(default = "default_degree")]
    pub degree: u64,
}

impl ComplexSpec {
    pub fn parse(text: &str) -> Result<ComplexSpec> {
        super::from_json(text)
    }

    pub fn complex(&self) -> Result<DualComplex> {
        let given = [self.simplices.is_some(), self.cells.is_some(), self.geometry.is_some()];
        if given.iter().filter(|b| **b).count() != 1 {
            return Err(InterfaceError::Input(
                "complex: give exactly one of simplices, cells, geometry".into(),
            ));
        }
        let vx = |field: &'static str| move |e: crate::vertex::VertexError| InterfaceError::field(field, e);
        let k = if let Some(s) = &self.simplices {
            let ori = if self.orientations.is_empty() { vec![1; s.len()] } else { self.orientations.clone() };
            DualComplex::from_simplices(s, &ori).map_err(vx("simplices"))?
        } else if let Some(c) = &self.cells {
            let top = c.last().map_or(0, Vec::len);
            let ori = if self.orientations.is_empty() { vec![1; top] } else { self.orientations.clone() };
            DualComplex::new(c.clone(), ori).map_err(vx("cells"))?
        } else {
            let am = self.geometry.as_ref().expect("checked above").build()?;
            DualComplex::from_fan(&am.fan).map_err(vx("geometry"))?
        };
        Ok(if self.cone { k.cone() } else { k })
    }

    pub fn algebra(&self) -> Result<VertexAlgebra> {
        let vx = |e: crate::vertex::VertexError| InterfaceError::field("complex", e);
        match (&self.geometry, self.cone) {
            (Some(g), false) => {
                let am = g.build()?;
                VertexAlgebra::from_fan(&am.fan, self.degree as i64).map_err(vx)
            }
            _ => VertexAlgebra::from_complex(self.complex()?, self.degree).map_err(vx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub a: ConePoint,
    pub b: ConePoint,
    pub terms: Vec<(ConePoint, i64)>,
    /// Lattice coordinates of `a`, `b` and the terms when the complex comes from a fan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<(Vec<i64>, Vec<i64>, Vec<(Vec<i64>, i64)>)>,
}

/// Output of `tmirror vertex`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexFile {
    pub complex: DualComplex,
    pub pseudomanifold: PseudomanifoldReport,
    pub links: LinkReport,
    pub products: Vec<VertexRecord>,
}

impl VertexFile {
    pub fn build(spec: &ComplexSpec) -> Result<VertexFile> {
        let complex = spec.complex()?;
        let pseudomanifold = check_pseudomanifold(&complex);
        let links = link_homology_check(&complex);
        let va = spec.algebra()?;
        let products = va
            .table
            .iter()
            .filter(|(_, p)| !p.is_empty())
            .map(|((a, b), p)| {
                let lattice = (|| {
                    let terms = p
                        .iter()
                        .map(|(q, c)| Some((va.to_lattice(q)?, *c)))
                        .collect::<Option<Vec<_>>>()?;
                    Some((va.to_lattice(a)?, va.to_lattice(b)?, terms))
                })();
                VertexRecord {
                    a: a.clone(),
                    b: b.clone(),
                    terms: p.iter().map(|(q, c)| (q.clone(), *c)).collect(),
                    lattice,
                }
            })
            .collect();
        Ok(VertexFile {
            complex,
            pseudomanifold,
            links,
            products,
        })
    }

    pub fn passed(&self) -> bool {
        self.pseudomanifold.passed() && self.links.passed()
    }
}

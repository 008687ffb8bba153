use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{InterfaceError, ProblemSpec, Result};
use crate::arith;
use crate::geometry::PLFunction;
use crate::scattering::ScatteringDiagram;
use crate::theta::{
    check_associativity, check_consistency, check_convexity, check_grading, infer_grading, support_points,
    theta_consistency_at_wall, MirrorAlgebra, PointWeight, Table,
};
use crate::vertex::{check_pseudomanifold, compare_central_fibre, link_homology_check, DualComplex, VertexAlgebra};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Consistency,
    Theta,
    Grading,
    Convexity,
    Associativity,
    Vertex,
    All,
}

impl Suite {
    fn expand(self) -> Vec<Suite> {
        use Suite::*;
        match self {
            All => vec![Consistency, Theta, Grading, Convexity, Associativity, Vertex],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub status: Status,
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SuiteOutcome {
    fn new(suite: Suite, checked: usize, counterexample: Option<String>) -> Self {
        SuiteOutcome {
            suite,
            status: if counterexample.is_some() { Status::Fail } else { Status::Pass },
            checked,
            counterexample,
            note: None,
        }
    }

    fn skipped(suite: Suite, note: impl Into<String>) -> Self {
        SuiteOutcome {
            suite,
            status: Status::Skipped,
            checked: 0,
            counterexample: None,
            note: Some(note.into()),
        }
    }

    fn error(suite: Suite, e: impl std::fmt::Display) -> Self {
        SuiteOutcome::new(suite, 0, Some(format!("error: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub outcomes: Vec<SuiteOutcome>,
}

struct Run<'a> {
    spec: &'a ProblemSpec,
    d: ScatteringDiagram,
    alg: OnceLock<std::result::Result<MirrorAlgebra, String>>,
    table: OnceLock<std::result::Result<Table, String>>,
}

impl Run<'_> {
    fn algebra(&self) -> std::result::Result<&MirrorAlgebra, String> {
        self.alg
            .get_or_init(|| MirrorAlgebra::new(self.d.clone(), self.spec.options()).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn table(&self) -> std::result::Result<&Table, String> {
        self.table
            .get_or_init(|| self.algebra()?.table().map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn directions(&self) -> Vec<Vec<i64>> {
        support_points(&self.d.ambient, self.spec.bound)
            .into_iter()
            .filter(|p| p.iter().any(|x| *x != 0))
            .collect()
    }
}

/// Runs the requested suites on a diagram file. Suites run in a fixed order and each
/// reports its first counterexample; computation errors count as failures.
pub fn run_checks(spec: &ProblemSpec, suite: Suite) -> Result<CheckReport> {
    let d = spec.diagram()?;
    if d.ambient.rank() != 2 {
        return Err(InterfaceError::field("geometry.rank", "checks run on rank-2 diagrams"));
    }
    let run = Run {
        spec,
        d,
        alg: OnceLock::new(),
        table: OnceLock::new(),
    };
    let outcomes: Vec<SuiteOutcome> = suite
        .expand()
        .into_iter()
        .map(|s| match s {
            Suite::Consistency => consistency(&run),
            Suite::Theta => theta(&run),
            Suite::Grading => grading(&run),
            Suite::Convexity => convexity(&run),
            Suite::Associativity => associativity(&run),
            Suite::Vertex => vertex(&run),
            Suite::All => unreachable!("expanded"),
        })
        .collect();
    Ok(CheckReport {
        passed: outcomes.iter().all(|o| o.status != Status::Fail),
        outcomes,
    })
}

fn consistency(run: &Run) -> SuiteOutcome {
    let s = Suite::Consistency;
    match check_consistency(&run.d, run.spec.bound, run.spec.seed) {
        Err(e) => SuiteOutcome::error(s, e),
        Ok(reports) => {
            let bad = reports.iter().find(|r| r.ok != Some(true)).map(|r| {
                let p: Vec<String> = r.point.iter().map(arith::fmt_rat).collect();
                format!("joint ({}): {}", p.join(", "), r.detail)
            });
            SuiteOutcome::new(s, reports.len(), bad)
        }
    }
}

fn theta(run: &Run) -> SuiteOutcome {
    let s = Suite::Theta;
    let dirs = run.directions();
    let mut checked = 0;
    for i in 0..run.d.walls.len() {
        for p in &dirs {
            checked += 1;
            match theta_consistency_at_wall(&run.d, i, p, run.spec.seed) {
                Err(e) => return SuiteOutcome::new(s, checked, Some(format!("wall {i}, direction {p:?}: {e}"))),
                Ok(c) if !c.holds() => {
                    let failed: Vec<&str> = [(c.plus, "positive"), (c.minus, "negative"), (c.zero, "parallel")]
                        .iter()
                        .filter(|(ok, _)| !ok)
                        .map(|(_, n)| *n)
                        .collect();
                    return SuiteOutcome::new(
                        s,
                        checked,
                        Some(format!("wall {i}, direction {p:?}: {} part differs", failed.join(" and "))),
                    );
                }
                Ok(_) => {}
            }
        }
    }
    SuiteOutcome::new(s, checked, None)
}

fn grading(run: &Run) -> SuiteOutcome {
    let s = Suite::Grading;
    let rank = run.d.ambient.rank();
    let weights = PointWeight::Linear(arith::identity(rank));
    let result = (|| {
        let table = run.table()?;
        let g = infer_grading(&run.d, weights).map_err(|e| e.to_string())?;
        check_grading(&run.d.ambient, table, &g).map_err(|e| e.to_string())
    })();
    match result {
        Err(e) => SuiteOutcome::error(s, e),
        Ok(r) => {
            let bad = r.violations.first().map(|v| format!("{:?} -> {:?}: {}", v.inputs, v.target, v.detail));
            SuiteOutcome::new(s, r.checked, bad)
        }
    }
}

fn convexity(run: &Run) -> SuiteOutcome {
    let s = Suite::Convexity;
    let am = &run.d.ambient;
    let mut fs = run.spec.test_functions();
    if fs.is_empty() {
        fs.push(PLFunction::zero(am.fan.rays.len()));
        let ones = PLFunction::new(vec![1; am.fan.rays.len()]);
        if ones.is_nef(am).unwrap_or(false) {
            fs.push(ones);
        }
    }
    let table = match run.table() {
        Ok(t) => t,
        Err(e) => return SuiteOutcome::error(s, e),
    };
    let mut checked = 0;
    for f in &fs {
        match f.is_nef(am) {
            Ok(true) => {}
            Ok(false) => return SuiteOutcome::new(s, checked, Some(format!("test function {:?} is not nef", f.values))),
            Err(e) => return SuiteOutcome::error(s, e),
        }
        match check_convexity(am, table, f) {
            Err(e) => return SuiteOutcome::error(s, e),
            Ok(r) => {
                checked += r.checked;
                if let Some(v) = r.violations.first() {
                    let msg = format!("F = {:?}: {:?} -> {:?}: {}", f.values, v.inputs, v.target, v.detail);
                    return SuiteOutcome::new(s, checked, Some(msg));
                }
            }
        }
    }
    SuiteOutcome::new(s, checked, None)
}

/// Each unordered triple `a <= b <= c` as `(ab)c = a(bc)` and `(bc)a = b(ca)`; with
/// commutativity these cover every bracketing.
pub(crate) fn triples(points: &[Vec<i64>]) -> Vec<[Vec<i64>; 3]> {
    let mut out = vec![];
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate().skip(i) {
            for c in &points[j..] {
                out.push([a.clone(), b.clone(), c.clone()]);
                if !(a == b && b == c) {
                    out.push([b.clone(), c.clone(), a.clone()]);
                }
            }
        }
    }
    out
}

fn associativity(run: &Run) -> SuiteOutcome {
    let s = Suite::Associativity;
    let alg = match run.algebra() {
        Ok(a) => a,
        Err(e) => return SuiteOutcome::error(s, e),
    };
    let norm = run.spec.bound.min(2);
    let pts: Vec<Vec<i64>> = alg.basis().iter().filter(|p| arith::linf(p) <= norm).cloned().collect();
    match check_associativity(alg, &triples(&pts)) {
        Err(e) => SuiteOutcome::error(s, e),
        Ok(r) => {
            let bad = r.failures.first().map(|(t, msg)| format!("{t:?}: {msg}"));
            let mut out = SuiteOutcome::new(s, r.checked, bad);
            if norm < run.spec.bound {
                out.note = Some(format!("triples of norm at most {norm}"));
            }
            out
        }
    }
}

fn vertex(run: &Run) -> SuiteOutcome {
    let s = Suite::Vertex;
    let fan = &run.d.ambient.fan;
    let k = match DualComplex::from_fan(fan) {
        Ok(k) => k,
        Err(e) => return SuiteOutcome::skipped(s, format!("no dual complex: {e}")),
    };
    let mut checked = 0;
    for (name, c) in [("dual complex", k.clone()), ("cone over the dual complex", k.cone())] {
        let pm = check_pseudomanifold(&c);
        checked += 1;
        if let Some(v) = pm.violations.first() {
            return SuiteOutcome::new(s, checked, Some(format!("{name}: simplex {:?}: {}", v.vertices, v.reason)));
        }
        if !pm.pure {
            return SuiteOutcome::new(s, checked, Some(format!("{name}: not pure")));
        }
        let links = link_homology_check(&c);
        checked += links.links.len();
        let bad = links.failures().next().map(|l| {
            format!("{name}: link of {:?} has reduced homology in degrees {:?}", l.vertices, l.violations)
        });
        if bad.is_some() {
            return SuiteOutcome::new(s, checked, bad);
        }
    }
    if run.d.phi.is_none() {
        let mut out = SuiteOutcome::new(s, checked, None);
        out.note = Some("central fibre comparison needs a PL section; compared complexes only".into());
        return out;
    }
    let result = (|| {
        let va = VertexAlgebra::from_fan(fan, run.spec.bound).map_err(|e| e.to_string())?;
        compare_central_fibre(run.table()?, &va).map_err(|e| e.to_string())
    })();
    match result {
        Err(e) => SuiteOutcome::error(s, e),
        Ok(r) => {
            let bad = r.mismatches.first().map(|m| {
                format!("{:?} -> {:?}: mirror {} but vertex {}", m.inputs, m.target, m.mirror, m.vertex)
            });
            SuiteOutcome::new(s, checked + r.compared, bad)
        }
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, then a nonzero exit if any failed.
//! Every comparison is exact; the only tolerances are the wall-clock limits below.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use tropical_mirror::arith;
use tropical_mirror::geometry::{build_affine_structure_dim2, PLFunction};
use tropical_mirror::scattering::{complete, cross_series, ScatteringDiagram, WallKind};
use tropical_mirror::series::TruncatedSeries;
use tropical_mirror::theta::{
    check_associativity, check_consistency, check_convexity, check_grading, infer_grading, support_points,
    theta_consistency_at_wall, AlgebraOptions, MirrorAlgebra, PointWeight, Table,
};
use tropical_mirror::vertex::{
    check_pseudomanifold, compare_central_fibre, link_homology_check, DualComplex, VertexAlgebra,
};

const TORIC_LIMIT: Duration = Duration::from_secs(5);
const COMMUTATOR_LIMIT: Duration = Duration::from_secs(5);
const CONSISTENCY_LIMIT: Duration = Duration::from_secs(60);
const THETA_NORM: i64 = 3;
const ASSOC_NORM: i64 = 2;
const FIBRE_NORM: i64 = 3;
const SAMPLES: usize = 3;
const PSI_PAIRS: usize = 100;
const PSI_ORDER: u32 = 6;

type Outcome = Result<String, String>;

fn opts(bound: i64) -> AlgebraOptions {
    AlgebraOptions {
        bound,
        samples: SAMPLES,
        seed: 0,
        strict: false,
    }
}

fn table(d: &ScatteringDiagram, bound: i64) -> Result<Table, String> {
    MirrorAlgebra::new(d.clone(), opts(bound))
        .and_then(|a| a.table())
        .map_err(|e| e.to_string())
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let e = t.elapsed();
    if e > limit {
        Err(format!("{what} took {e:.2?}, limit {limit:?}"))
    } else {
        Ok(e)
    }
}

/// Tables produced while checking criteria 1 and 5, reused by 6 and 7.
struct Tables {
    produced: Vec<(&'static str, ScatteringDiagram, Table)>,
}

fn toric_oracle(tables: &mut Tables) -> Outcome {
    let t0 = Instant::now();
    let d = p2(3);
    let t = table(&d, 3)?;
    let e = within(t0, TORIC_LIMIT, "P2 table")?;
    // independent oracle: θ_P1 θ_P2 = θ_{P1+P2} with coefficient exactly 1
    let one = TruncatedSeries::one(t.entries.values().next().ok_or("empty table")?.ctx());
    let mut want = BTreeMap::new();
    for (i, a) in t.basis.iter().enumerate() {
        for b in &t.basis[i..] {
            want.insert(Table::key(&[a.clone(), b.clone()], &arith::add(a, b)), one.clone());
        }
    }
    if t.entries != want {
        let bad = t
            .entries
            .iter()
            .find(|(k, v)| want.get(*k) != Some(v))
            .map(|(k, _)| format!("{k:?}"))
            .unwrap_or_else(|| "missing entry".into());
        return Err(format!("entry {bad} is not a Kronecker delta"));
    }
    let pairs = t.basis.len() * (t.basis.len() + 1) / 2;
    tables.produced.push(("toric P2", d, t));
    Ok(format!("{pairs} pairs of basis points with norm <= 3, delta exactly, {e:.2?}"))
}

/// Dense brute-force series in `t1, t2, x, y` for the loop-product oracle.
#[derive(Clone, PartialEq, Debug)]
struct Poly(BTreeMap<[i64; 4], i128>);

impl Poly {
    fn mono(e: [i64; 4]) -> Poly {
        Poly(BTreeMap::from([(e, 1)]))
    }

    fn mul(&self, o: &Poly, k: i64) -> Poly {
        let mut out = BTreeMap::new();
        for (a, ca) in &self.0 {
            for (b, cb) in &o.0 {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                if e[0] + e[1] < k {
                    *out.entry(e).or_insert(0) += ca * cb;
                }
            }
        }
        out.retain(|_, c| *c != 0);
        Poly(out)
    }

    fn pow(&self, p: i64, k: i64) -> Poly {
        let base = if p >= 0 {
            self.clone()
        } else {
            // 1/(1+g) = Σ (-g)^j, g nilpotent mod the ideal
            let mut g = self.clone();
            *g.0.entry([0; 4]).or_insert(0) -= 1;
            g.0.retain(|_, c| *c != 0);
            let neg_g = Poly(g.0.iter().map(|(e, c)| (*e, -c)).collect());
            let mut inv = Poly::mono([0; 4]);
            let mut term = Poly::mono([0; 4]);
            for _ in 0..k {
                term = term.mul(&neg_g, k);
                for (e, c) in &term.0 {
                    *inv.0.entry(*e).or_insert(0) += c;
                }
            }
            inv.0.retain(|_, c| *c != 0);
            inv
        };
        let mut out = Poly::mono([0; 4]);
        for _ in 0..p.abs() {
            out = out.mul(&base, k);
        }
        out
    }
}

/// The loop around the origin as a composite of substitutions on `x` and `y`, with walls
/// ordered by floating-point angle.
fn loop_oracle(d: &ScatteringDiagram, k: i64) -> Result<bool, String> {
    let mut rays: Vec<(f64, Vec<i64>, Poly)> = vec![];
    for w in &d.walls {
        if w.apex.iter().any(|a| !a.is_zero()) {
            return Err("oracle handles walls through the origin only".into());
        }
        let mut f = Poly(BTreeMap::new());
        for (m, c) in w.function.terms() {
            let q: Vec<i64> = m.q.iter().map(|x| *x as i64).collect();
            f.0.insert([q[0], q[1], m.m[0], m.m[1]], c.to_i128().ok_or("huge coefficient")?);
        }
        let mut dirs = vec![w.direction.clone()];
        if w.kind == WallKind::Line {
            dirs.push(arith::neg(&w.direction));
        }
        for u in dirs {
            rays.push(((u[1] as f64).atan2(u[0] as f64), u, f.clone()));
        }
    }
    rays.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // images of x and y under the composite so far; each crossing substitutes into them
    let mut img = [Poly::mono([0, 0, 1, 0]), Poly::mono([0, 0, 0, 1])];
    for (_, u, f) in &rays {
        // crossing anticlockwise: normal positive on the side we leave
        let n = [u[1], -u[0]];
        for p in img.iter_mut() {
            let mut out = Poly(BTreeMap::new());
            for (e, c) in &p.0 {
                let t = Poly(BTreeMap::from([(*e, *c)])).mul(&f.pow(n[0] * e[2] + n[1] * e[3], k), k);
                for (e2, c2) in t.0 {
                    *out.0.entry(e2).or_insert(0) += c2;
                }
            }
            out.0.retain(|_, c| *c != 0);
            *p = out;
        }
    }
    Ok(img == [Poly::mono([0, 0, 1, 0]), Poly::mono([0, 0, 0, 1])])
}

fn commutator_scattering() -> Outcome {
    let t0 = Instant::now();
    let initial = commutator(4);
    let done = complete(&initial).map_err(|e| e.to_string())?;
    let e = within(t0, COMMUTATOR_LIMIT, "completion")?;
    let inserted: Vec<_> = done.walls.iter().filter(|w| w.inserted).collect();
    if inserted.len() != 1 {
        return Err(format!("{} inserted walls", inserted.len()));
    }
    let want = unit_plus(&done, &[(&[1, 1], [1, 1], 1)]);
    if inserted[0].function != want {
        return Err(format!("inserted wall has {:?}", inserted[0].function));
    }
    if loop_oracle(&initial, 4)? {
        return Err("oracle accepts the uncompleted diagram".into());
    }
    if !loop_oracle(&done, 4)? {
        return Err("loop product is not the identity mod I^4".into());
    }
    Ok(format!(
        "one wall 1 + t1 t2 z^(1,1) along {:?}, brute-force loop product is 1 mod I^4, {e:.2?}",
        inserted[0].direction
    ))
}

fn consistency_suite() -> Outcome {
    let builders: [(&str, fn(u32) -> ScatteringDiagram); 3] =
        [("commutator", commutator), ("squared", squared), ("triangle", triangle)];
    let mut lines = vec![];
    let mut slowest = Duration::ZERO;
    for (name, build) in builders {
        for k in 2..=5 {
            let t0 = Instant::now();
            let d = complete(&build(k)).map_err(|e| format!("{name} k={k}: {e}"))?;
            let reps = check_consistency(&d, 2, 0).map_err(|e| e.to_string())?;
            if let Some(r) = reps.iter().find(|r| r.ok != Some(true)) {
                return Err(format!("{name} k={k}: joint {:?} {}", r.point, r.detail));
            }
            let inserted: Vec<usize> = (0..d.walls.len()).filter(|i| d.walls[*i].inserted).collect();
            for &i in &inserted {
                let mut cut = d.clone();
                cut.walls.remove(i);
                let reps = check_consistency(&cut, 2, 0).map_err(|e| e.to_string())?;
                if !reps.iter().any(|r| r.ok == Some(false)) {
                    return Err(format!("{name} k={k}: removing wall {i} went unnoticed"));
                }
            }
            slowest = slowest.max(within(t0, CONSISTENCY_LIMIT, name)?);
            if k == 5 {
                lines.push(format!("{name} {} walls", d.walls.len()));
            }
        }
    }
    Ok(format!(
        "k = 2..5, every joint consistent, every removal detected ({}), slowest {slowest:.2?}",
        lines.join(", ")
    ))
}

fn theta_consistency() -> Outcome {
    let diagrams = [
        ("one wall", one_wall(3)),
        ("commutator", complete(&commutator(4)).map_err(|e| e.to_string())?),
        ("triangle", complete(&triangle(3)).map_err(|e| e.to_string())?),
        ("P1xP1 with section", p1p1_wall(3)),
    ];
    let mut checked = 0;
    for (name, d) in &diagrams {
        let dirs: Vec<Vec<i64>> = support_points(&d.ambient, THETA_NORM)
            .into_iter()
            .filter(|p| p.iter().any(|x| *x != 0))
            .collect();
        for i in 0..d.walls.len() {
            for p in &dirs {
                let c = theta_consistency_at_wall(d, i, p, 7).map_err(|e| format!("{name} wall {i} {p:?}: {e}"))?;
                if !c.holds() {
                    return Err(format!("{name}: wall {i}, direction {p:?}: {c:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (wall, direction) pairs on 4 diagrams, all identities exact"))
}

fn associativity(tables: &mut Tables) -> Outcome {
    let mut total = 0;
    for (name, d) in [("toric P2 k=3", p2(3)), ("one wall k=3", one_wall(3))] {
        let alg = MirrorAlgebra::new(d.clone(), opts(ASSOC_NORM)).map_err(|e| e.to_string())?;
        let pts: Vec<Vec<i64>> = alg.basis().to_vec();
        let mut triples = vec![];
        for a in &pts {
            for b in &pts {
                for c in &pts {
                    triples.push([a.clone(), b.clone(), c.clone()]);
                }
            }
        }
        let r = check_associativity(&alg, &triples).map_err(|e| e.to_string())?;
        if let Some((t, msg)) = r.failures.first() {
            return Err(format!("{name}: {t:?}: {msg}"));
        }
        total += r.checked;
        let t = alg.table().map_err(|e| e.to_string())?;
        tables.produced.push((if name.starts_with("toric") { "toric P2 norm 2" } else { "one wall" }, d, t));
    }
    Ok(format!("{total} ordered triples of norm <= 2, (ab)c = a(bc) exactly"))
}

fn grading(tables: &Tables) -> Outcome {
    let mut checked = 0;
    for (name, d, t) in &tables.produced {
        let g = infer_grading(d, PointWeight::Linear(arith::identity(2))).map_err(|e| e.to_string())?;
        let r = check_grading(&d.ambient, t, &g).map_err(|e| e.to_string())?;
        if let Some(v) = r.violations.first() {
            return Err(format!("{name}: {:?} -> {:?}: {}", v.inputs, v.target, v.detail));
        }
        checked += r.checked;
    }
    Ok(format!("{checked} nonzero terms across {} tables", tables.produced.len()))
}

fn convexity(tables: &Tables) -> Outcome {
    // on P2 every bend equals a0 + a1 + a2, so these are nef, the first three ample
    let fs = [vec![1, 1, 1], vec![1, 0, 0], vec![2, -1, 0], vec![1, -1, 0], vec![0, 0, 0]];
    let mut checked = 0;
    let mut equalities = 0;
    for (name, d, t) in &tables.produced {
        for f in &fs {
            let f = PLFunction::new(f.clone());
            if !f.is_nef(&d.ambient).map_err(|e| e.to_string())? {
                return Err(format!("test function {:?} is not nef", f.values));
            }
            let r = check_convexity(&d.ambient, t, &f).map_err(|e| e.to_string())?;
            if let Some(v) = r.violations.first() {
                return Err(format!("{name}, F = {:?}: {:?} -> {:?}: {}", f.values, v.inputs, v.target, v.detail));
            }
            checked += r.checked;
            if r.ample {
                equalities += r.equalities;
            }
        }
    }
    Ok(format!("{checked} terms under 5 nef functions; {equalities} ample equality cases, all gamma = 0 and chi = 1"))
}

fn central_fibre() -> Outcome {
    let mut compared = 0;
    for (name, d) in [("P2", p2_phi(3)), ("P1xP1 with a wall", p1p1_wall(3))] {
        let t = table(&d, FIBRE_NORM)?;
        let va = VertexAlgebra::from_fan(&d.ambient.fan, FIBRE_NORM).map_err(|e| e.to_string())?;
        let r = compare_central_fibre(&t, &va).map_err(|e| e.to_string())?;
        if let Some(m) = r.mismatches.first() {
            return Err(format!("{name}: {m:?}"));
        }
        if r.compared == 0 {
            return Err(format!("{name}: nothing compared"));
        }
        compared += r.compared;
        // a corrupted table must be caught
        let mut broken = t.clone();
        let key = broken.entries.keys().find(|(_, q)| *q != vec![0, 0]).cloned().ok_or("empty")?;
        broken.entries.remove(&key);
        if compare_central_fibre(&broken, &va).map_err(|e| e.to_string())?.passed() {
            return Err(format!("{name}: removing {key:?} went unnoticed"));
        }
    }
    Ok(format!("{compared} pairs of norm <= 3 agree with the Stanley-Reisner vertex"))
}

fn basepoint_independence() -> Outcome {
    let diagrams = [
        ("one wall", one_wall(3)),
        ("commutator", complete(&commutator(3)).map_err(|e| e.to_string())?),
        ("P2 with section", p2_phi(3)),
        ("P1xP1 with a wall", p1p1_wall(3)),
    ];
    let mut entries = 0;
    for (name, d) in &diagrams {
        let mut first: Option<Table> = None;
        for seed in 0..3 {
            let o = AlgebraOptions { seed, ..opts(2) };
            let t = MirrorAlgebra::new(d.clone(), o)
                .and_then(|a| a.table())
                .map_err(|e| format!("{name}, seed {seed}: {e}"))?;
            match &first {
                None => first = Some(t),
                Some(f) if f.entries != t.entries => return Err(format!("{name}: seed {seed} gives another table")),
                Some(_) => {}
            }
        }
        entries += first.map_or(0, |t| t.entries.len());
    }
    Ok(format!("{entries} entries, {SAMPLES} basepoints each, identical under 3 seeds"))
}

fn random_series(d: &ScatteringDiagram, rng: &mut ChaCha8Rng, n: &[i64]) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(&d.ctx);
    let g = d.monoid.len();
    for _ in 0..rng.gen_range(1..5) {
        let q: Vec<u32> = (0..g).map(|_| rng.gen_range(0..2)).collect();
        let mut m = vec![rng.gen_range(-2..=2), rng.gen_range(-2..=2)];
        if rng.gen_bool(0.3) {
            // exponents on the wall itself cross trivially
            m = vec![-n[1], n[0]];
        }
        s.add_term(BigInt::from(rng.gen_range(-3i64..=3)), q, m);
    }
    s
}

fn psi_homomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let diagrams = [
        ("commutator", complete(&commutator(PSI_ORDER)).map_err(|e| e.to_string())?),
        ("squared", complete(&squared(5)).map_err(|e| e.to_string())?),
        ("one wall", one_wall(PSI_ORDER)),
    ];
    let mut walls = 0;
    for (name, d) in &diagrams {
        for (i, w) in d.walls.iter().enumerate() {
            for _ in 0..PSI_PAIRS {
                let a = random_series(d, &mut rng, &w.normal);
                let b = random_series(d, &mut rng, &w.normal);
                let psi = |s: &TruncatedSeries| cross_series(&w.function, &w.normal, s).unwrap();
                let ab = a.mul(&b).unwrap();
                if psi(&ab) != psi(&a).mul(&psi(&b)).unwrap() {
                    return Err(format!("{name} wall {i}: Psi(ab) != Psi(a)Psi(b) for {a:?}, {b:?}"));
                }
                // and crossing back is the inverse
                let back = cross_series(&w.function, &arith::neg(&w.normal), &psi(&a)).unwrap();
                if back != a {
                    return Err(format!("{name} wall {i}: crossing back does not undo {a:?}"));
                }
            }
            walls += 1;
        }
    }
    Ok(format!("{PSI_PAIRS} random pairs on each of {walls} walls, k <= {PSI_ORDER}"))
}

fn cycle(n: usize) -> DualComplex {
    let edges: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    DualComplex::from_simplices(&edges, &vec![1; n]).unwrap()
}

fn vertex_combinatorics() -> Outcome {
    let mut complexes: Vec<(String, DualComplex)> = (3..=7).map(|n| (format!("cone over {n}-cycle"), cycle(n).cone())).collect();
    for d in [vec![1, 1, 1], vec![0, 0, 0, 0], vec![-1, -1, -1, -1, -1]] {
        let am = build_affine_structure_dim2(&d).unwrap();
        if let Ok(k) = DualComplex::from_fan(&am.fan) {
            complexes.push((format!("cone over dual complex of {d:?}"), k.cone()));
        }
    }
    for (name, k) in &complexes {
        let pm = check_pseudomanifold(k);
        if !pm.passed() {
            return Err(format!("{name}: {:?}", pm.violations.first()));
        }
        let lh = link_homology_check(k);
        if !lh.passed() {
            return Err(format!("{name}: link of {:?}", lh.failures().next().map(|l| &l.vertices)));
        }
        if !check_pseudomanifold(&k.reversed()).passed() {
            return Err(format!("{name}: reversing the orientation breaks it"));
        }
    }
    // flip one triangle of the cone over the 4-cycle
    let good = cycle(4).cone();
    let mut ori = good.orientations.clone();
    ori[1] = -ori[1];
    let bad = DualComplex::new(good.cells.clone(), ori).unwrap();
    let pm = check_pseudomanifold(&bad);
    let v = pm.violations.first().ok_or("mis-oriented complex passed")?;
    if v.cofaces.len() != 2 || !v.cofaces.iter().any(|c| c.0 == 1) {
        return Err(format!("violation not located at the flipped simplex: {v:?}"));
    }
    Ok(format!(
        "{} complexes pass; flipped triangle caught at edge {:?} ({})",
        complexes.len(),
        v.vertices,
        v.reason
    ))
}

fn main() {
    let mut tables = Tables { produced: vec![] };
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Tables) -> Outcome>)> = vec![
        ("toric oracle", Box::new(toric_oracle)),
        ("commutator scattering", Box::new(|_| commutator_scattering())),
        ("consistency suite", Box::new(|_| consistency_suite())),
        ("theta consistency", Box::new(|_| theta_consistency())),
        ("associativity", Box::new(associativity)),
        ("grading", Box::new(|t| grading(t))),
        ("convexity", Box::new(|t| convexity(t))),
        ("central fibre", Box::new(|_| central_fibre())),
        ("basepoint independence", Box::new(|_| basepoint_independence())),
        ("wall crossing is a ring map", Box::new(|_| psi_homomorphism())),
        ("vertex combinatorics", Box::new(|_| vertex_combinatorics())),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let outcome = run(&mut tables);
        let e = t0.elapsed();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{e:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{e:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 11 passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

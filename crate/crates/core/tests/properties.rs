mod common;

use num_bigint::BigInt;
use proptest::prelude::*;

use common::*;
use tropical_mirror::arith;
use tropical_mirror::interface::{to_json, ProblemSpec};
use tropical_mirror::scattering::{complete, cross_series, ScatteringDiagram};
use tropical_mirror::series::{Context, CurveClassMonoid, TruncatedSeries};
use tropical_mirror::theta::{check_consistency, AlgebraOptions, MirrorAlgebra};
use tropical_mirror::vertex::{check_pseudomanifold, link_homology_check, DualComplex};

type Terms = Vec<(Vec<u32>, [i64; 2], i64)>;

fn terms(gens: usize) -> impl Strategy<Value = Terms> {
    prop::collection::vec(
        (prop::collection::vec(0u32..3, gens), [-3i64..=3, -3i64..=3], -4i64..=4),
        0..6,
    )
}

fn series(ctx: &std::sync::Arc<Context>, ts: &Terms) -> TruncatedSeries {
    TruncatedSeries::from_terms(ctx, ts.iter().map(|(q, m, c)| (q.clone(), m.to_vec(), BigInt::from(*c)))).unwrap()
}

fn ctx2(k: u32) -> std::sync::Arc<Context> {
    Context::new(&CurveClassMonoid::new(&["t1", "t2"]), 2, k)
}

/// Walls of the completed commutator at order 6, as (function, normal).
fn walls() -> &'static [(TruncatedSeries, Vec<i64>)] {
    static W: std::sync::OnceLock<Vec<(TruncatedSeries, Vec<i64>)>> = std::sync::OnceLock::new();
    W.get_or_init(|| {
        let mut d = complete(&commutator(6)).unwrap();
        d.walls.extend(complete(&squared(6)).unwrap().walls);
        d.walls.into_iter().map(|w| (w.function, w.normal)).collect()
    })
}

fn diagram(which: usize) -> ScatteringDiagram {
    match which {
        0 => one_wall(3),
        1 => complete(&commutator(3)).unwrap(),
        _ => p1p1_wall(3),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_ring_axioms(a in terms(2), b in terms(2), c in terms(2), k in 1u32..6) {
        let ctx = ctx2(k);
        let (a, b, c) = (series(&ctx, &a), series(&ctx, &b), series(&ctx, &c));
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn units_invert(g in terms(2), k in 1u32..6) {
        let ctx = ctx2(k);
        // 1 + g with g in the ideal
        let g: Terms = g.into_iter().filter(|(q, _, _)| q.iter().any(|x| *x > 0)).collect();
        let u = TruncatedSeries::one(&ctx).add(&series(&ctx, &g)).unwrap();
        prop_assert!(u.mul(&u.invert().unwrap()).unwrap().is_one());
        prop_assert_eq!(u.pow(-2).unwrap().mul(&u.pow(2).unwrap()).unwrap(), TruncatedSeries::one(&ctx));
    }

    #[test]
    fn wall_crossing_is_a_ring_map(w in 0usize..8, a in terms(2), b in terms(2)) {
        let walls = walls();
        let (f, n) = &walls[w % walls.len()];
        let ctx = f.ctx().clone();
        let (a, b) = (series(&ctx, &a), series(&ctx, &b));
        let psi = |s: &TruncatedSeries| cross_series(f, n, s).unwrap();
        prop_assert_eq!(psi(&a.mul(&b).unwrap()), psi(&a).mul(&psi(&b)).unwrap());
        prop_assert_eq!(psi(&a.add(&b).unwrap()), psi(&a).add(&psi(&b)).unwrap());
    }

    #[test]
    fn crossing_back_is_the_identity(w in 0usize..8, a in terms(2)) {
        let walls = walls();
        let (f, n) = &walls[w % walls.len()];
        let a = series(f.ctx(), &a);
        let there = cross_series(f, n, &a).unwrap();
        prop_assert_eq!(cross_series(f, &arith::neg(n), &there).unwrap(), a);
    }

    #[test]
    fn orientation_reversal_preserves_the_checks(n in 3usize..8, flip in prop::collection::vec(any::<bool>(), 8), cone in any::<bool>()) {
        let edges: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let ori: Vec<i8> = (0..n).map(|i| if flip[i] { -1 } else { 1 }).collect();
        let mut k = DualComplex::from_simplices(&edges, &ori).unwrap();
        if cone {
            k = k.cone();
        }
        let r = k.reversed();
        let (a, b) = (check_pseudomanifold(&k), check_pseudomanifold(&r));
        prop_assert_eq!(a.passed(), b.passed());
        prop_assert_eq!(&a.boundary, &b.boundary);
        prop_assert_eq!(link_homology_check(&k), link_homology_check(&r));
        // a cycle is coherently oriented exactly when its signs all agree
        let coherent = ori.iter().all(|s| *s == ori[0]);
        prop_assert_eq!(a.passed(), coherent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn removing_an_inserted_wall_breaks_consistency(which in 0usize..3, k in 3u32..6, pick in 0usize..64) {
        let build = [commutator, squared, triangle][which];
        let d = complete(&build(k)).unwrap();
        let inserted: Vec<usize> = (0..d.walls.len()).filter(|i| d.walls[*i].inserted).collect();
        prop_assume!(!inserted.is_empty());
        let mut cut = d.clone();
        cut.walls.remove(inserted[pick % inserted.len()]);
        prop_assert!(check_consistency(&d, 1, 0).unwrap().iter().all(|r| r.ok == Some(true)));
        prop_assert!(check_consistency(&cut, 1, 0).unwrap().iter().any(|r| r.ok == Some(false)));
    }

    #[test]
    fn structure_constants_ignore_the_seed(which in 0usize..3, seed in 1u64..1000, a in [-2i64..=2, -2i64..=2], b in [-2i64..=2, -2i64..=2]) {
        let d = diagram(which);
        let base = MirrorAlgebra::new(d.clone(), AlgebraOptions { samples: 3, ..Default::default() }).unwrap();
        let other = MirrorAlgebra::new(d, AlgebraOptions { samples: 3, seed, ..Default::default() }).unwrap();
        prop_assert_eq!(base.multiply(&a, &b).unwrap(), other.multiply(&a, &b).unwrap());
    }

    #[test]
    fn structure_constants_are_symmetric(which in 0usize..2, a in [-1i64..=1, -1i64..=1], b in [-1i64..=1, -1i64..=1], c in [-1i64..=1, -1i64..=1]) {
        let alg = MirrorAlgebra::new(diagram(which), AlgebraOptions::default()).unwrap();
        let (a, b, c) = (a.to_vec(), b.to_vec(), c.to_vec());
        let triple = alg.multiply_points(&[a.clone(), b.clone(), c.clone()]).unwrap();
        prop_assert_eq!(&triple, &alg.multiply_points(&[c.clone(), a.clone(), b.clone()]).unwrap());
        let left = alg.multiply_elements(&alg.multiply(&a, &b).unwrap(), &alg.unit_element(&c)).unwrap();
        let right = alg.multiply_elements(&alg.multiply(&b, &c).unwrap(), &alg.unit_element(&a)).unwrap();
        prop_assert_eq!(&triple, &left);
        prop_assert_eq!(&triple, &right);
    }

    #[test]
    fn diagram_files_round_trip(which in 0usize..4, k in 2u32..5, seed in any::<u64>()) {
        let d = [complete(&commutator(k)).unwrap(), complete(&triangle(k)).unwrap(), one_wall(k), p1p1_wall(k)][which].clone();
        let like = ProblemSpec::parse(&format!(
            r#"{{"geometry": {{"rank": 2, "self_intersections": [1, 1, 1]}}, "monoid": {{"generators": []}}, "order": 1, "seed": {seed}}}"#
        )).unwrap();
        let file = ProblemSpec::from_diagram(&d, &like);
        let text = to_json(&file);
        let back = ProblemSpec::parse(&text).unwrap();
        prop_assert_eq!(to_json(&back), text);
        let mut canon = d.clone();
        canon.canonicalize();
        prop_assert_eq!(back.diagram().unwrap(), canon);
    }
}

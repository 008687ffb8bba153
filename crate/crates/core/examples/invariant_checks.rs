//! Grading, convexity and associativity on the structure table of toric P2.

use tropical_mirror::arith;
use tropical_mirror::geometry::{build_affine_structure_dim2, PLFunction};
use tropical_mirror::scattering::ScatteringDiagram;
use tropical_mirror::series::CurveClassMonoid;
use tropical_mirror::theta::{
    check_associativity, check_convexity, check_grading, infer_grading, AlgebraOptions, MirrorAlgebra, PointWeight,
};

pub fn main() {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
    let d = ScatteringDiagram::new(am.clone(), CurveClassMonoid::new(&["t"]), 3).unwrap();
    let g = infer_grading(&d, PointWeight::Linear(arith::identity(2))).unwrap();
    let alg = MirrorAlgebra::new(d, AlgebraOptions { bound: 2, ..Default::default() }).unwrap();
    let table = alg.table().unwrap();

    let r = check_grading(&am, &table, &g).unwrap();
    println!("grading: {} entries, {} violations", r.checked, r.violations.len());

    for values in [vec![1, 1, 1], vec![1, 0, 0], vec![0, 0, 0]] {
        let f = PLFunction::new(values.clone());
        let r = check_convexity(&am, &table, &f).unwrap();
        println!(
            "convexity of {values:?}: nef {}, ample {}, {} terms, {} equalities, passed {}",
            f.is_nef(&am).unwrap(),
            r.ample,
            r.checked,
            r.equalities,
            r.passed()
        );
    }

    let pts = [vec![1, 0], vec![0, 1], vec![-1, -1], vec![1, 1]];
    let mut triples = vec![];
    for a in &pts {
        for b in &pts {
            for c in &pts {
                triples.push([a.clone(), b.clone(), c.clone()]);
            }
        }
    }
    let r = check_associativity(&alg, &triples).unwrap();
    println!("associativity: {} triples, passed {}", r.checked, r.passed());
}

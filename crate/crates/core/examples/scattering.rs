//! Completing two crossing lines to a consistent diagram, then checking every joint.

use num_bigint::BigInt;
use tropical_mirror::arith::{fmt_rat, rat_vec};
use tropical_mirror::geometry::build_affine_structure_dim2;
use tropical_mirror::scattering::{complete, ScatteringDiagram, Wall};
use tropical_mirror::series::{CurveClassMonoid, TruncatedSeries};
use tropical_mirror::theta::check_consistency;

pub fn main() {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
    let mut d = ScatteringDiagram::new(am, CurveClassMonoid::new(&["t1", "t2"]), 4).unwrap();
    for (i, dir) in [[1, 0], [0, 1]].into_iter().enumerate() {
        let mut q = vec![0, 0];
        q[i] = 1;
        let mut f = TruncatedSeries::one(&d.ctx);
        f.add_term(BigInt::from(1), q, dir.to_vec());
        d.add_wall(Wall::line(rat_vec(&[0, 0]), dir.to_vec(), f)).unwrap();
    }

    let done = complete(&d).unwrap();
    let names = &done.monoid.generators;
    for w in &done.walls {
        let apex: Vec<String> = w.apex.iter().map(fmt_rat).collect();
        println!(
            "{:?} at ({}) along {:?}{}: {}",
            w.kind,
            apex.join(", "),
            w.direction,
            if w.inserted { " (inserted)" } else { "" },
            w.function.display_with(names)
        );
    }

    for r in check_consistency(&done, 2, 0).unwrap() {
        println!("joint {:?}: {:?} via {:?}", r.point.iter().map(fmt_rat).collect::<Vec<_>>(), r.ok, r.method);
    }
    let before = check_consistency(&d, 2, 0).unwrap();
    assert!(before.iter().any(|r| r.ok == Some(false)));
}

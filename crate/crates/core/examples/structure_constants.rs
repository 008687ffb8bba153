//! Multiplying theta functions: a few products and the full table up to a norm.

use tropical_mirror::arith::rat_vec;
use tropical_mirror::geometry::build_affine_structure_dim2;
use tropical_mirror::scattering::{ScatteringDiagram, Wall};
use tropical_mirror::series::{CurveClassMonoid, TruncatedSeries};
use tropical_mirror::theta::{AlgebraOptions, MirrorAlgebra};

pub fn main() {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
    let mut d = ScatteringDiagram::new(am, CurveClassMonoid::new(&["t"]), 3).unwrap();
    let mut f = TruncatedSeries::one(&d.ctx);
    f.add_term(1.into(), vec![1], vec![0, 1]);
    let mut w = Wall::line(rat_vec(&[0, 0]), vec![0, 1], f);
    w.normal = vec![1, 0];
    d.add_wall(w).unwrap();

    let alg = MirrorAlgebra::new(d, AlgebraOptions { bound: 2, samples: 3, ..Default::default() }).unwrap();
    let names = &alg.diagram().monoid.generators;
    for (a, b) in [([1, 0], [-1, 0]), ([1, 0], [0, 1]), ([1, 1], [-1, 0])] {
        let prod = alg.multiply(&a, &b).unwrap();
        let parts: Vec<String> = prod.iter().map(|(q, c)| format!("({}) θ{q:?}", c.display_with(names))).collect();
        println!("θ{a:?} θ{b:?} = {}", parts.join(" + "));
    }

    let table = alg.table().unwrap();
    println!(
        "table: {} basis points, {} nonzero entries, targets up to norm {}",
        table.basis.len(),
        table.entries.len(),
        table.needed_bound()
    );
}

//! Broken lines and the local theta function on one side of a single wall, and the jump
//! of theta across it.

use num_bigint::BigInt;
use tropical_mirror::arith::{fmt_rat, rat_vec};
use tropical_mirror::geometry::build_affine_structure_dim2;
use tropical_mirror::scattering::{ScatteringDiagram, Wall};
use tropical_mirror::series::{CurveClassMonoid, TruncatedSeries};
use tropical_mirror::theta::{enumerate_broken_lines, theta_local};

pub fn main() {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
    let mut d = ScatteringDiagram::new(am, CurveClassMonoid::new(&["t"]), 3).unwrap();
    // the vertical axis with f = 1 + t y
    let mut f = TruncatedSeries::one(&d.ctx);
    f.add_term(BigInt::from(1), vec![1], vec![0, 1]);
    let mut w = Wall::line(rat_vec(&[0, 0]), vec![0, 1], f);
    w.normal = vec![1, 0];
    d.add_wall(w).unwrap();
    let names = &d.monoid.generators;

    let p = [-1, 0];
    for x in [rat_vec(&[3, 1]), rat_vec(&[-3, 1])] {
        let at: Vec<String> = x.iter().map(fmt_rat).collect();
        println!("theta_{p:?} at ({})", at.join(", "));
        for l in enumerate_broken_lines(&d, &p, &x).unwrap() {
            let s = l.final_segment();
            println!("  {} bends, ends with {} t^{:?} z^{:?}", l.bends.len(), s.coefficient, s.class, s.exponent);
        }
        println!("  = {}", theta_local(&d, &p, &x).unwrap().value.display_with(names));
    }
}

//! Diagrams shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::One;
use tropical_mirror::arith::rat_vec;
use tropical_mirror::geometry::{build_affine_structure_dim2, PLSection};
use tropical_mirror::scattering::{ScatteringDiagram, Wall};
use tropical_mirror::series::{CurveClassMonoid, TruncatedSeries};

pub fn plane(gens: &[&str], k: u32) -> ScatteringDiagram {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
    ScatteringDiagram::new(am, CurveClassMonoid::new(gens), k).unwrap()
}

/// `1 + Σ c t^q z^m`.
pub fn unit_plus(d: &ScatteringDiagram, terms: &[(&[u32], [i64; 2], i64)]) -> TruncatedSeries {
    let mut f = TruncatedSeries::one(&d.ctx);
    for (q, m, c) in terms {
        f.add_term(BigInt::from(*c), q.to_vec(), m.to_vec());
    }
    f
}

pub fn line(d: &mut ScatteringDiagram, apex: [i64; 2], dir: [i64; 2], f: TruncatedSeries) {
    d.add_wall(Wall::line(rat_vec(&apex), dir.to_vec(), f)).unwrap();
}

/// Plain toric P2 with no walls.
pub fn p2(k: u32) -> ScatteringDiagram {
    plane(&["t"], k)
}

/// The vertical line through 0 with `f = 1 + t z^(0,1)`.
pub fn one_wall(k: u32) -> ScatteringDiagram {
    let mut d = plane(&["t"], k);
    let f = unit_plus(&d, &[(&[1], [0, 1], 1)]);
    let mut w = Wall::line(rat_vec(&[0, 0]), vec![0, 1], f);
    w.normal = vec![1, 0];
    d.add_wall(w).unwrap();
    d
}

/// `1 + t1 x` and `1 + t2 y` on the coordinate axes.
pub fn commutator(k: u32) -> ScatteringDiagram {
    let mut d = plane(&["t1", "t2"], k);
    let f1 = unit_plus(&d, &[(&[1, 0], [1, 0], 1)]);
    let f2 = unit_plus(&d, &[(&[0, 1], [0, 1], 1)]);
    line(&mut d, [0, 0], [1, 0], f1);
    line(&mut d, [0, 0], [0, 1], f2);
    d
}

/// `1 + t1 x` against `(1 + t2 y)^2`.
pub fn squared(k: u32) -> ScatteringDiagram {
    let mut d = plane(&["t1", "t2"], k);
    let f1 = unit_plus(&d, &[(&[1, 0], [1, 0], 1)]);
    let f2 = unit_plus(&d, &[(&[0, 1], [0, 1], 2), (&[0, 2], [0, 2], 1)]);
    line(&mut d, [0, 0], [1, 0], f1);
    line(&mut d, [0, 0], [0, 1], f2);
    d
}

/// Three lines meeting pairwise at three different joints.
pub fn triangle(k: u32) -> ScatteringDiagram {
    let mut d = plane(&["t1", "t2", "t3"], k);
    let f1 = unit_plus(&d, &[(&[1, 0, 0], [1, 0], 1)]);
    let f2 = unit_plus(&d, &[(&[0, 1, 0], [0, 1], 1)]);
    let f3 = unit_plus(&d, &[(&[0, 0, 1], [1, 1], 1)]);
    line(&mut d, [0, 0], [1, 0], f1);
    line(&mut d, [1, 0], [0, 1], f2);
    line(&mut d, [0, 0], [1, 1], f3);
    d
}

/// P2 with the PL section kinked by `t` along every ray.
pub fn p2_phi(k: u32) -> ScatteringDiagram {
    let mut d = p2(k);
    d.phi = Some(PLSection::from_kinks(&d.ambient, &[vec![1], vec![1], vec![1]], None).unwrap());
    d
}

/// P1 x P1 with the same kinks and a wall along the vertical rays; crossing a kinked
/// horizontal ray raises the class of `z^(0,1)`, so the lower half carries `t^2`.
pub fn p1p1_wall(k: u32) -> ScatteringDiagram {
    let am = build_affine_structure_dim2(&[0, 0, 0, 0]).unwrap();
    let mut d = ScatteringDiagram::new(am.clone(), CurveClassMonoid::new(&["t"]), k).unwrap();
    for (dir, cls) in [([0, 1], 1), ([0, -1], 2)] {
        let mut f = TruncatedSeries::one(&d.ctx);
        f.add_term(BigInt::one(), vec![cls], vec![0, 1]);
        let mut w = Wall::ray(rat_vec(&[0, 0]), dir.to_vec(), f);
        w.normal = vec![1, 0];
        d.add_wall(w).unwrap();
    }
    d.phi = Some(PLSection::from_kinks(&am, &[vec![1], vec![1], vec![1], vec![1]], None).unwrap());
    d
}

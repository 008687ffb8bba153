//! Integral affine structures on the plane with one singular point, built from the
//! self-intersections of a cycle of boundary curves.

use tropical_mirror::arith::rat_vec;
use tropical_mirror::geometry::build_affine_structure_dim2;

pub fn main() {
    for d in [vec![1, 1, 1], vec![0, 0, 0, 0], vec![-1, -1, -1], vec![-1, -1, -1, -1, -1]] {
        let am = build_affine_structure_dim2(&d).unwrap();
        println!("self-intersections {d:?}");
        println!("  rays      {:?}", am.fan.rays);
        println!("  toric     {}", am.is_toric());
        println!("  monodromy {:?}", am.monodromy(0).unwrap());
        // carry the first ray once around the origin
        let n = am.fan.maximal_cones.len();
        let path: Vec<usize> = (0..=n).map(|i| i % n).collect();
        let v = am.parallel_transport(&path, &[1, 0]).unwrap();
        println!("  (1,0) around the loop -> {v:?}");
        let p = rat_vec(&[2, 1]);
        println!("  (2,1) lies in cone {}", am.chart_of(&p).unwrap());
    }
}

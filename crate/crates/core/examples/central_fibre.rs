//! The theta-function algebra of toric P2 with every curve class set to zero agrees with
//! the vertex algebra of its fan.

use tropical_mirror::geometry::{build_affine_structure_dim2, PLSection};
use tropical_mirror::scattering::ScatteringDiagram;
use tropical_mirror::series::CurveClassMonoid;
use tropical_mirror::theta::{AlgebraOptions, MirrorAlgebra};
use tropical_mirror::vertex::{compare_central_fibre, VertexAlgebra};

pub fn main() {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();
    let mut d = ScatteringDiagram::new(am.clone(), CurveClassMonoid::new(&["t"]), 3).unwrap();
    d.phi = Some(PLSection::from_kinks(&am, &[vec![1], vec![1], vec![1]], None).unwrap());
    println!("phi convex: {}", d.phi.as_ref().unwrap().is_convex(&am).unwrap());

    let table = MirrorAlgebra::new(d, AlgebraOptions { bound: 2, ..Default::default() })
        .unwrap()
        .table()
        .unwrap();
    let va = VertexAlgebra::from_fan(&am.fan, 2).unwrap();
    println!("x·y at t = 0: {:?}", va.multiply_lattice(&[1, 0], &[0, 1]).unwrap());
    println!("x·(-1,-1) at t = 0: {:?}", va.multiply_lattice(&[1, 0], &[-1, -1]).unwrap());

    let r = compare_central_fibre(&table, &va).unwrap();
    println!("{} pairs compared, {} mismatches", r.compared, r.mismatches.len());
}

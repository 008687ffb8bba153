//! Tropical spines in the skeleton: bends at vertices, wall spines, transversality and
//! the cycle a spine leaves on the boundary.

use std::collections::BTreeMap;

use tropical_mirror::arith::{rat, rat_vec};
use tropical_mirror::geometry::build_affine_structure_dim2;
use tropical_mirror::spines::{
    concat, generate_walls, z_cycle, Length, Marker, MetricTree, Spine, TreeEdge, WallPair, WallSet,
};

fn star(ds: &[[i64; 2]], at: [i64; 2]) -> Spine {
    let edges = (0..ds.len())
        .map(|i| TreeEdge {
            tail: 0,
            head: i + 1,
            length: Length::Finite(rat(1)),
        })
        .collect();
    let markers: BTreeMap<usize, Marker> = (1..=ds.len()).map(|i| (i, Marker::F(i))).collect();
    let tree = MetricTree::new(ds.len() + 1, edges, markers).unwrap();
    Spine::from_tree(tree, rat_vec(&at), ds.iter().map(|d| d.to_vec()).collect()).unwrap()
}

pub fn main() {
    let am = build_affine_structure_dim2(&[1, 1, 1]).unwrap();

    let tripod = star(&[[1, 0], [0, 1], [-1, -1]], [3, 1]);
    println!("tripod balanced: {}", tripod.is_balanced(0, &am).unwrap());
    let elbow = star(&[[1, 0], [-1, 1]], [1, 1]);
    println!("elbow bends by {:?}", elbow.nb_vertex(0, &am).unwrap());

    let walls = WallSet {
        walls: vec![WallPair::new(vec![vec![1, 1]], vec![0, 1])],
    };
    println!("elbow on the wall R(1,1) is a wall spine: {}", elbow.is_wall_spine(&walls, &am));
    println!("tripod at (2,2) transverse: {}", star(&[[1, 0], [0, 1], [-1, -1]], [2, 2]).is_transverse(&walls, &am));

    let a = Spine::from_tree(MetricTree::path(&[rat(1)]), rat_vec(&[0, 5]), vec![vec![1, 0]]).unwrap();
    let b = Spine::from_tree(MetricTree::path(&[rat(1)]), rat_vec(&[2, 5]), vec![vec![-1, 0]]).unwrap();
    println!("concatenated: {} vertices", concat(&a, 1, &b, 1).unwrap().tree.vertices);

    let down = Spine::from_tree(MetricTree::path(&[rat(1)]), rat_vec(&[1, -1]), vec![vec![0, 2]]).unwrap();
    println!("z-cycle of a segment crossing ray 0: {:?}", z_cycle(&down, &am).unwrap());

    let generated = generate_walls(&am, &[vec![1, 0], vec![0, 1]], 1);
    println!("walls from (1,0) and (0,1): {}", generated.len());
}

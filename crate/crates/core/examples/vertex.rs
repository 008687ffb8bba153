//! Stanley-Reisner vertex algebras of small complexes: pseudomanifold and link checks,
//! products, and a misoriented triangle being caught.

use tropical_mirror::vertex::{
    check_pseudomanifold, link_homology_check, vertex_multiply, DualComplex, VertexAlgebra,
};

pub fn main() {
    let triangle = [vec![0, 1], vec![1, 2], vec![2, 0]];
    let k = DualComplex::from_simplices(&triangle, &[1, 1, 1]).unwrap().cone();
    let pm = check_pseudomanifold(&k);
    let links = link_homology_check(&k);
    println!("cone over a triangle: pseudomanifold {}, links {}", pm.passed(), links.passed());

    let va = VertexAlgebra::from_complex(k, 2).unwrap();
    println!("{} basis points of degree <= 2", va.basis.len());
    let degree_one: Vec<_> = va.basis.iter().filter(|p| p.degree() == 1).cloned().collect();
    for a in &degree_one {
        for b in &degree_one {
            if a <= b {
                let prod = vertex_multiply(&va, a, b).unwrap();
                let parts: Vec<String> = prod.iter().map(|(p, c)| format!("{c}·[{p}]")).collect();
                println!("  [{a}]·[{b}] = {}", if parts.is_empty() { "0".into() } else { parts.join(" + ") });
            }
        }
    }

    let bad = DualComplex::from_simplices(&triangle, &[1, -1, 1]).unwrap();
    let pm = check_pseudomanifold(&bad);
    println!("flipped edge: passed {}, violations {:?}", pm.passed(), pm.violations);
}

//! Arithmetic in Z[Q ⊕ M] modulo the k-th power of the curve-class ideal.

use num_bigint::BigInt;
use tropical_mirror::series::{Context, CurveClassMonoid, TruncatedSeries};

pub fn main() {
    let monoid = CurveClassMonoid::new(&["t"]);
    let ctx = Context::new(&monoid, 2, 4);
    let names = &monoid.generators;

    // f = 1 + t x
    let mut f = TruncatedSeries::one(&ctx);
    f.add_term(BigInt::from(1), vec![1], vec![1, 0]);
    let g = f.invert().unwrap();
    println!("f      = {}", f.display_with(names));
    println!("1/f    = {}", g.display_with(names));
    println!("f^3    = {}", f.pow(3).unwrap().display_with(names));
    assert!(f.mul(&g).unwrap().is_one());

    // everything of t-order 4 or more is gone
    let t4 = f.pow(8).unwrap();
    assert_eq!(t4.coefficient(&[4], &[4, 0]), BigInt::from(0));
    println!("f^8    = {}", t4.display_with(names));
    println!("at t=0: {:?}", f.set_classes_to_zero());
}

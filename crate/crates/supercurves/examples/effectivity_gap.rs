//! A line bundle of reduced degree zero, all of whose sections are nilpotent:
//! the nilpotent direction of its divisor hits a nonzero H^1 class, so no
//! effective divisor is linearly equivalent to it, while the generic bundle
//! of the same reduced data does admit one.
//!
//! Run with: cargo run --example effectivity_gap

use std::collections::BTreeMap;

use supercurves::berezin::LocalAutomorphism;
use supercurves::cli::fmt_super_fn;
use supercurves::curve::h0;
use supercurves::divisor::{has_effective_representative, line_bundle_of};
use supercurves::superalgebra::{BaseAlgebra, Graded, Lambda};
use supercurves::superfunction::{PointP1, Poly, RatFunc};
use supercurves::{BundleData, CartierDivisor, SuperCurve, TruncationBounds};

fn main() {
    let l = Lambda::new(BaseAlgebra::grassmann(1), 1);
    let twist = Graded::term(0, 1, RatFunc::from_poly(Poly::z().pow(2)));
    let g = LocalAutomorphism::new(&l, l.z_fn(), vec![twist]).unwrap();
    let curve =
        SuperCurve::new(l.clone(), BTreeMap::from([(PointP1::finite_i64(0), g)])).unwrap();

    // the special bundle O(D) for D given by 1 + beta theta / z at the origin
    let eq = l.add(&l.one(), &Graded::term(1, 1, RatFunc::z().inv().unwrap()));
    let d = CartierDivisor::new(curve.clone(), BTreeMap::from([(PointP1::finite_i64(0), eq)]))
        .unwrap();
    let special = line_bundle_of(&d).unwrap();

    let bounds = TruncationBounds::for_bundle(&special, 2);
    let sections = h0(&special, &bounds).unwrap();
    println!("sections of the special bundle:");
    for f in sections.functions() {
        println!("  {}", fmt_super_fn(&l, &f));
    }
    println!("scalar dimension (even|odd): {:?}", sections.graded_dim());
    assert!(!has_effective_representative(&special, 2).unwrap());
    println!("every section is nilpotent: no effective representative");

    // the generic counterpart with the same reduced data is trivial and has
    // the section 1
    let generic = BundleData::trivial(curve);
    assert!(has_effective_representative(&generic, 2).unwrap());
    println!("the generic counterpart has an effective representative");
}

//! The Mittag-Leffler question for Ber coefficients: which prescribed
//! principal parts come from a global section?  Obstruction: the sum of
//! residues of the tails against every global function must vanish.
//!
//! Run with: cargo run --example principal_parts

use std::collections::BTreeMap;

use supercurves::curve::principal_part_solvable;
use supercurves::superalgebra::{BaseAlgebra, Graded, Lambda};
use supercurves::superfunction::{PointP1, Poly, RatFunc, SuperRationalFunction};
use supercurves::{GaussianRational, SuperCurve};

fn main() {
    let l = Lambda::new(BaseAlgebra::scalars(), 1);
    let curve = SuperCurve::trivial(l.clone());

    let tail = |num: i64, a: i64| -> SuperRationalFunction {
        let den = Poly::from_coeffs(vec![
            GaussianRational::from_int(-a),
            GaussianRational::from_int(1),
        ]);
        Graded::term(
            0,
            1,
            RatFunc::new(Poly::constant(GaussianRational::from_int(num)), den),
        )
    };

    // theta/(z) at 0 and -theta/(z-1) at 1: residues cancel against the
    // constant function, so a global match exists
    let balanced = BTreeMap::from([
        (PointP1::finite_i64(0), tail(1, 0)),
        (PointP1::finite_i64(1), tail(-1, 1)),
    ]);
    let ok = principal_part_solvable(&curve, &balanced, 2).unwrap();
    println!("balanced tails theta/z and -theta/(z-1): solvable = {ok}");
    assert!(ok);

    // a single simple pole cannot be matched: the residue against 1 is the
    // obstruction (on P^1 the total residue of a section of Ber vanishes)
    let obstructed = BTreeMap::from([(PointP1::finite_i64(0), tail(1, 0))]);
    let ok = principal_part_solvable(&curve, &obstructed, 2).unwrap();
    println!("single tail theta/z: solvable = {ok}");
    assert!(!ok);
}

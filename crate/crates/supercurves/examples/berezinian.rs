//! The Berezinian (superdeterminant) of an even supermatrix, its
//! multiplicativity Ber(MN) = Ber(M)Ber(N), and its reduction to
//! det(A)/det(D) modulo nilpotents.
//!
//! Run with: cargo run --example berezinian

use supercurves::cli::fmt_super_fn;
use supercurves::superalgebra::{BaseAlgebra, Graded, Lambda};
use supercurves::superfunction::RatFunc;
use supercurves::superlinalg::SuperMatrix;
use supercurves::GaussianRational;

fn c(n: i64) -> Graded<RatFunc> {
    Graded::term(0, 0, RatFunc::constant(GaussianRational::from_int(n)))
}

fn main() {
    let l = Lambda::new(BaseAlgebra::grassmann(2), 1);
    let beta1 = l.generator("beta1").unwrap();
    let beta2 = l.generator("beta2").unwrap();
    let theta = l.theta(1);

    // a 1|1 supermatrix [[a, b], [c, d]] with even diagonal and odd corners
    let m = SuperMatrix::new(
        &l,
        1,
        1,
        vec![vec![c(2), beta1.clone()], vec![theta.clone(), c(1)]],
    )
    .unwrap();
    let n = SuperMatrix::new(
        &l,
        1,
        1,
        vec![vec![c(3), theta.clone()], vec![beta2.clone(), c(2)]],
    )
    .unwrap();

    let bm = m.berezinian(&l).unwrap();
    let bn = n.berezinian(&l).unwrap();
    let bmn = m.mul(&l, &n).berezinian(&l).unwrap();
    println!("Ber(M)      = {}", fmt_super_fn(&l, &bm));
    println!("Ber(N)      = {}", fmt_super_fn(&l, &bn));
    println!("Ber(MN)     = {}", fmt_super_fn(&l, &bmn));
    assert_eq!(bmn, l.mul(&bm, &bn));
    println!("Ber(MN) = Ber(M) Ber(N): exact");

    // modulo nilpotents the corners vanish and Ber reduces to a/d
    let reduced = l.reduced_fn(&bm);
    println!("Ber(M) mod nilpotents = {reduced} (= 2/1)");
    assert_eq!(reduced, RatFunc::constant(GaussianRational::from_int(2)));
}

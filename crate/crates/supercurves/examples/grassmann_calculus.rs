//! Exact arithmetic in the function ring Lambda = B[theta_1..theta_q] (x) Q(i)(z):
//! multiplication with the sign rule, theta derivatives, the Berezin top
//! coefficient, and the total-residue identity for Ber-valued forms.
//!
//! Run with: cargo run --example grassmann_calculus

use supercurves::cli::{fmt_super_elem, fmt_super_fn};
use supercurves::superalgebra::{BaseAlgebra, Lambda};
use supercurves::superfunction::{PointP1, Poly, RatFunc};
use supercurves::GaussianRational;

fn main() {
    // base B = C[beta1, beta2] (Grassmann), two odd fibre coordinates
    let l = Lambda::new(BaseAlgebra::grassmann(2), 2);

    let beta1 = l.generator("beta1").unwrap();
    let t1 = l.theta(1);
    let t2 = l.theta(2);

    // odd elements anticommute ...
    println!("theta1 * theta2 = {}", fmt_super_fn(&l, &l.mul(&t1, &t2)));
    println!("theta2 * theta1 = {}", fmt_super_fn(&l, &l.mul(&t2, &t1)));
    assert_eq!(l.mul(&t1, &t2), l.neg(&l.mul(&t2, &t1)));
    // ... while even products such as beta1 theta1 are central
    let a = l.mul(&beta1, &t1);
    assert_eq!(l.mul(&a, &t2), l.mul(&t2, &a));

    // theta derivatives are odd left derivations and square to zero
    let f = l.add(&l.scale(&t1, &RatFunc::z()), &l.mul(&t1, &t2));
    let df = l.theta_derivative(&f, 1).unwrap();
    println!("d/dtheta1 (z theta1 + theta1 theta2) = {}", fmt_super_fn(&l, &df));
    assert!(l.theta_derivative(&df, 1).unwrap().is_zero());

    // the Berezin top coefficient d/dtheta_q ... d/dtheta_1 picks the
    // theta1...thetaq channel, with the sign of the left derivatives
    let top = l.berezin_top(&l.mul(&t1, &t2));
    println!("T(theta1 theta2) = {}", fmt_super_fn(&l, &top));

    // residues: the form f dz d/dtheta_1 d/dtheta_2 with f = theta1 theta2 / (z^2 - 1)
    // has residues +1/2 at z = 1, -1/2 at z = -1, and 0 at infinity: total 0
    let den = Poly::from_coeffs(vec![
        GaussianRational::from_int(-1),
        GaussianRational::from_int(0),
        GaussianRational::from_int(1),
    ]);
    let f = l.scale(&l.mul(&t1, &t2), &RatFunc::new(Poly::one(), den));
    let mut total = l.residue_form(&f, &PointP1::Infinity);
    for a in l.finite_poles(&f).unwrap() {
        let p = PointP1::Finite(a);
        let r = l.residue_form(&f, &p);
        println!("res at {p}: {}", fmt_super_elem(&l, &r));
        total = l.add(&total, &r);
    }
    assert!(total.is_zero());
    println!("total residue: 0 (exact)");
}

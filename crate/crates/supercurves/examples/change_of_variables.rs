//! Berezin residues of a section of Ber are invariant under substitution:
//! pulling back along an automorphism multiplies the coefficient by the
//! Berezinian of the super-Jacobian, and the residue at every point is
//! unchanged.
//!
//! Run with: cargo run --example change_of_variables

use supercurves::berezin::{change_of_variables, BerSection, LocalAutomorphism};
use supercurves::cli::{fmt_super_elem, fmt_super_fn};
use supercurves::superalgebra::{BaseAlgebra, Graded, Lambda};
use supercurves::superfunction::{PointP1, Poly, RatFunc};
use supercurves::GaussianRational;

fn main() {
    let l = Lambda::new(BaseAlgebra::grassmann(1), 1);
    let beta = l.generator("beta1").unwrap();

    // sigma: z -> z + beta theta z, theta -> (1 + z) theta
    // (reduces to the identity modulo nilpotents, so it fixes every point)
    let image_z = l.add(
        &l.z_fn(),
        &l.scale(&l.mul(&beta, &l.theta(1)), &RatFunc::z()),
    );
    let image_theta = Graded::term(
        0,
        1,
        RatFunc::from_poly(Poly::from_coeffs(vec![
            GaussianRational::from_int(1),
            GaussianRational::from_int(1),
        ])),
    );
    let sigma = LocalAutomorphism::new(&l, image_z, vec![image_theta]).unwrap();

    // omega = (theta / (z^2 - z) + beta / z) dz d/dtheta
    let den = Poly::from_coeffs(vec![
        GaussianRational::from_int(0),
        GaussianRational::from_int(-1),
        GaussianRational::from_int(1),
    ]);
    let coeff = l.add(
        &Graded::term(0, 1, RatFunc::new(Poly::one(), den)),
        &l.scale(&beta, &RatFunc::z().inv().unwrap()),
    );
    let omega = BerSection::new(coeff);

    let pulled = change_of_variables(&l, &omega, &sigma).unwrap();
    println!("omega coefficient        = {}", fmt_super_fn(&l, &omega.coeff));
    println!("pulled-back coefficient  = {}", fmt_super_fn(&l, &pulled.coeff));

    for p in [
        PointP1::finite_i64(0),
        PointP1::finite_i64(1),
        PointP1::Infinity,
    ] {
        let before = omega.residue(&l, &p);
        let after = pulled.residue(&l, &p);
        println!("res at {p}: {}", fmt_super_elem(&l, &before));
        assert_eq!(before, after);
    }
    println!("residues invariant under the substitution: exact");
}

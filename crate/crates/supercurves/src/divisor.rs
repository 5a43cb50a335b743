//! Cartier divisors on a supercurve: degree, the associated line bundle,
//! triviality with an explicit witness, the Abel map, and effectivity.
//!
//! A divisor is given by local equations f_P in K^x at finitely many points.
//! The local equation is written in the stalk coordinate of the curve at P
//! (the chart in which the stalk of the structure sheaf is gamma_P(O_P)), so
//! the associated line bundle simply has multiplier f_P^{-1}, and germs are
//! transported through gamma_P whenever they are paired against global data.

use std::collections::BTreeMap;

use crate::berezin::{contour_residue, lift_to_dsharp, BerSection, LogElement};
use crate::curve::{h0, h0_ber, BundleData, SuperCurve, TruncationBounds};
use crate::scalars::GaussianRational;
use crate::superalgebra::Graded;
use crate::superfunction::{Poly, PointP1, RatFunc, SuperRationalFunction};
use crate::superlinalg;
use crate::{Error, Result};

/// A Cartier divisor: one local equation per support point, each an
/// invertible even meromorphic function.
#[derive(Debug, Clone)]
pub struct CartierDivisor {
    curve: SuperCurve,
    local_data: BTreeMap<PointP1, SuperRationalFunction>,
}

impl CartierDivisor {
    pub fn new(
        curve: SuperCurve,
        local_data: BTreeMap<PointP1, SuperRationalFunction>,
    ) -> Result<Self> {
        for (p, f) in &local_data {
            if !curve.lambda.is_in_ktimes(f) {
                return Err(Error::NotInKtimes(format!("local equation at {p}")));
            }
        }
        Ok(CartierDivisor { curve, local_data })
    }

    pub fn curve(&self) -> &SuperCurve {
        &self.curve
    }

    pub fn support(&self) -> Vec<PointP1> {
        self.local_data.keys().cloned().collect()
    }

    pub fn local_data(&self) -> &BTreeMap<PointP1, SuperRationalFunction> {
        &self.local_data
    }

    /// The local equation at P (1 away from the support).
    pub fn local_equation(&self, p: &PointP1) -> SuperRationalFunction {
        self.local_data
            .get(p)
            .cloned()
            .unwrap_or_else(|| self.curve.lambda.one())
    }

    /// D + E, as pointwise products of local equations.
    pub fn add(&self, other: &CartierDivisor) -> Result<CartierDivisor> {
        if self.curve.gluing() != other.curve.gluing() {
            return Err(Error::Precondition(
                "divisors live on different curves".into(),
            ));
        }
        let l = &self.curve.lambda;
        let mut data = self.local_data.clone();
        for (p, f) in &other.local_data {
            let slot = data.entry(p.clone()).or_insert_with(|| l.one());
            *slot = l.mul(slot, f);
        }
        CartierDivisor::new(self.curve.clone(), data)
    }

    /// -D: pointwise inverses of the local equations.
    pub fn neg(&self) -> Result<CartierDivisor> {
        let l = &self.curve.lambda;
        let mut data = BTreeMap::new();
        for (p, f) in &self.local_data {
            data.insert(p.clone(), l.invert_ktimes(f)?);
        }
        CartierDivisor::new(self.curve.clone(), data)
    }
}

/// Total degree: the sum over the support of res_P(dlog f_P). Each local
/// contribution is checked against the vanishing order of the reduced part;
/// a mismatch (or a non-integer residue) is reported as an error.
pub fn degree(d: &CartierDivisor) -> Result<i64> {
    let l = &d.curve.lambda;
    let mut total = 0i64;
    for (p, f) in &d.local_data {
        let k = l.order_at(f, p)?;
        let res = l.residue_form(&l.dlog(f)?, p);
        let expected: crate::superalgebra::SuperElement = if k == 0 {
            Graded::zero()
        } else {
            Graded::term(0, 0, GaussianRational::from_int(k))
        };
        if res != expected {
            return Err(Error::Precondition(format!(
                "local degree contribution at {p} is not the integer {k}"
            )));
        }
        total += k;
    }
    Ok(total)
}

/// The line bundle O(D): multiplier f_P^{-1} at each support point.
pub fn line_bundle_of(d: &CartierDivisor) -> Result<BundleData> {
    let l = d.curve.lambda.clone();
    let mut mult = BTreeMap::new();
    for (p, f) in &d.local_data {
        mult.insert(p.clone(), l.invert_ktimes(f)?);
    }
    BundleData::new(d.curve.clone(), mult)
}

/// Express `target` as an exact Q(i)-combination of `basis`, by clearing all
/// denominators and solving on polynomial coefficients.
fn rational_coordinates(target: &RatFunc, basis: &[RatFunc]) -> Option<Vec<GaussianRational>> {
    let mut den = target.den.clone();
    for r in basis {
        den = den.mul(&r.den);
    }
    let clear = |r: &RatFunc| -> Poly {
        let (q, rem) = den.divrem(&r.den);
        debug_assert!(rem.is_zero());
        r.num.mul(&q)
    };
    let t = clear(target);
    let cols: Vec<Poly> = basis.iter().map(clear).collect();
    let deg = cols
        .iter()
        .chain(std::iter::once(&t))
        .filter_map(|p| p.degree())
        .max()
        .map_or(0, |d| d + 1);
    let mut m = Vec::with_capacity(deg);
    let mut b = Vec::with_capacity(deg);
    for k in 0..deg {
        m.push(cols.iter().map(|c| c.coeff(k)).collect::<Vec<_>>());
        b.push(t.coeff(k));
    }
    superlinalg::solve(&m, &b)
}

/// Decide whether L is trivial, returning a trivializing global unit if so.
///
/// The reduced bundle is a line bundle on the projective line, so its
/// isomorphism class is the total degree and the reduced part of any witness
/// is forced (up to a scalar) to be the product of (z - a)^{ord_a(xi_red)}.
/// The nilpotent corrections then form one linear system inside h0(L): an
/// even section with that exact reduced part is automatically a unit of every
/// stalk, and conversely every trivialization normalizes to one.
pub fn is_trivial(bundle: &BundleData, n: i64) -> Result<Option<SuperRationalFunction>> {
    let l = bundle.lambda().clone();
    let mut ords: BTreeMap<PointP1, i64> = BTreeMap::new();
    let mut max_ord = 1i64;
    for (p, xi) in bundle.multipliers() {
        let k = l.order_at(xi, p)?;
        max_ord = max_ord.max(k.abs());
        ords.insert(p.clone(), k);
    }
    if ords.values().sum::<i64>() != 0 {
        return Ok(None);
    }
    let mut f_red = Poly::one();
    let mut f_den = Poly::one();
    for (p, k) in &ords {
        if let PointP1::Finite(a) = p {
            let lin = Poly::from_coeffs(vec![-a.clone(), GaussianRational::one()]);
            if *k >= 0 {
                f_red = f_red.mul(&lin.pow(*k as usize));
            } else {
                f_den = f_den.mul(&lin.pow((-k) as usize));
            }
        }
    }
    let target = RatFunc::new(f_red, f_den);
    let bounds = TruncationBounds::for_bundle(bundle, n.max(max_ord));
    let space = h0(bundle, &bounds)?;
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let even_idx: Vec<usize> = (0..space.module.rank())
        .filter(|i| space.module.parity[*i] == 0)
        .collect();
    let t = match rational_coordinates(&target, &space.rationals) {
        Some(t) => t,
        None => return Ok(None),
    };
    // one equation per global-rational slot: the reduced channel of the
    // section must equal the forced reduced witness
    let mut m = Vec::with_capacity(space.rationals.len());
    for i in 0..space.rationals.len() {
        m.push(
            even_idx
                .iter()
                .map(|j| space.module.basis[*j][i * nb * ns].clone())
                .collect::<Vec<_>>(),
        );
    }
    let c = match superlinalg::solve(&m, &t) {
        Some(c) => c,
        None => return Ok(None),
    };
    let mut witness: SuperRationalFunction = Graded::zero();
    for (j, cj) in even_idx.iter().zip(&c) {
        if cj.is_zero() {
            continue;
        }
        let term = l.scale(&space.function(*j), &RatFunc::constant(cj.clone()));
        witness = l.add(&witness, &term);
    }
    for p in bundle.support() {
        if !bundle.stalk_member(&witness, &p) {
            return Err(Error::Precondition(format!(
                "trivialization witness fails stalk membership at {p}"
            )));
        }
    }
    Ok(Some(witness))
}

/// The Abel image of a degree-zero divisor: one scalar per basis element of
/// H^0(Ber), each the sum over the support of residues of L(log f_P), with
/// the local equation transported to the ambient chart through gamma_P.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelImage {
    pub values: Vec<LogElement>,
}

impl AbelImage {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, other: &AbelImage) -> AbelImage {
        assert_eq!(self.values.len(), other.values.len());
        AbelImage {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &AbelImage) -> AbelImage {
        assert_eq!(self.values.len(), other.values.len());
        AbelImage {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
}

/// Evaluate the Abel pairing of D against an explicit list of Ber sections
/// (coefficients in the dz dtheta-basis). The marked set `u` must contain the
/// support of D; it is passed to the lift so that log branch points of the
/// antiderivative stay outside the working region.
pub fn abel_with_omegas(
    d: &CartierDivisor,
    omegas: &[SuperRationalFunction],
    u: &[PointP1],
) -> Result<AbelImage> {
    let l = &d.curve.lambda;
    for p in d.local_data.keys() {
        if !u.contains(p) {
            return Err(Error::Precondition(format!(
                "marked set misses the support point {p}"
            )));
        }
    }
    let mut values = Vec::with_capacity(omegas.len());
    for w in omegas {
        let lift = lift_to_dsharp(l, &BerSection::new(w.clone()), u)?;
        let mut val = LogElement::zero();
        for (p, f) in &d.local_data {
            let g = d.curve.gamma_apply(p, f);
            let form = lift.apply_to_log(l, &g)?;
            val = val.add(&contour_residue(l, &form, p)?);
        }
        values.push(val);
    }
    Ok(AbelImage { values })
}

/// The Abel map on a degree-zero divisor, evaluated on the computed basis of
/// H^0(Ber) with truncation parameter n and marked set u (which must contain
/// the support).
pub fn abel(d: &CartierDivisor, u: &[PointP1], n: i64) -> Result<AbelImage> {
    if degree(d)? != 0 {
        return Err(Error::Precondition(
            "the Abel map is defined on degree-zero divisors".into(),
        ));
    }
    let triv = BundleData::trivial(d.curve.clone());
    let mut marked = u.to_vec();
    for p in d.support() {
        if !marked.contains(&p) {
            marked.push(p);
        }
    }
    let bounds = TruncationBounds::with_points(&triv, n, &marked);
    let omega = h0_ber(&triv, &bounds)?;
    abel_with_omegas(d, &omega.functions(), &marked)
}

/// Abel's theorem, both directions, by independent code paths: the Abel image
/// via residues of lifted Ber sections, and triviality of O(D) via the
/// reduced-divisor match plus one linear system.
#[derive(Debug, Clone)]
pub struct AbelCheck {
    pub image: AbelImage,
    pub witness: Option<SuperRationalFunction>,
}

impl AbelCheck {
    pub fn abel_zero(&self) -> bool {
        self.image.is_zero()
    }

    pub fn trivial(&self) -> bool {
        self.witness.is_some()
    }

    /// Abel's theorem: zero image if and only if trivial bundle.
    pub fn consistent(&self) -> bool {
        self.abel_zero() == self.trivial()
    }
}

pub fn abel_theorem_check(d: &CartierDivisor, n: i64) -> Result<AbelCheck> {
    let mut u = d.support();
    if !u.contains(&PointP1::Infinity) {
        u.push(PointP1::Infinity);
    }
    let image = abel(d, &u, n)?;
    let witness = is_trivial(&line_bundle_of(d)?, n)?;
    Ok(AbelCheck { image, witness })
}

/// Whether L has a section that is not nilpotent, i.e. whether some divisor
/// in the class of L is effective. Scans the reduced channel of the computed
/// h0 basis.
pub fn has_effective_representative(bundle: &BundleData, n: i64) -> Result<bool> {
    let l = bundle.lambda();
    let bounds = TruncationBounds::for_bundle(bundle, n);
    let space = h0(bundle, &bounds)?;
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    Ok(space
        .module
        .basis
        .iter()
        .any(|v| (0..space.rationals.len()).any(|i| !v[i * nb * ns].is_zero())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::berezin::{DifferentialOperator, FormChannel, LocalAutomorphism, OpTerm};
    use crate::scalars::LogScalar;
    use crate::superalgebra::{BaseAlgebra, Lambda};
    use crate::superfunction::Poly;

    fn qi(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn lam_c(q: usize) -> Lambda {
        Lambda::new(BaseAlgebra::scalars(), q)
    }

    fn lam_g(m: usize, q: usize) -> Lambda {
        Lambda::new(BaseAlgebra::grassmann(m), q)
    }

    fn p0() -> PointP1 {
        PointP1::finite_i64(0)
    }

    /// z - a as a rational superfunction.
    fn lin(_l: &Lambda, a: i64) -> SuperRationalFunction {
        let p = Poly::from_coeffs(vec![qi(-a), qi(1)]);
        Graded::term(0, 0, RatFunc::from_poly(p))
    }

    /// The curve with gluing theta -> z^k theta at 0.
    fn twist_curve(l: &Lambda, k: usize) -> SuperCurve {
        let zk = RatFunc::from_poly(Poly::z().pow(k));
        let image_theta = vec![Graded::term(0, 1, zk)];
        let g = LocalAutomorphism::new(l, l.z_fn(), image_theta).unwrap();
        SuperCurve::new(l.clone(), BTreeMap::from([(p0(), g)])).unwrap()
    }

    /// 1 + c beta z^e theta on the q = 1, B = C[beta] algebra.
    fn unit_beta_theta(l: &Lambda, c: i64, e: i64) -> SuperRationalFunction {
        let r = if e >= 0 {
            RatFunc::from_poly(Poly::z().pow(e as usize)).scale_by(&qi(c))
        } else {
            RatFunc::new(Poly::constant(qi(c)), Poly::z().pow((-e) as usize))
        };
        l.add(&l.one(), &Graded::term(1, 1, r))
    }

    #[test]
    fn degree_examples() {
        // a single simple zero
        let l = lam_c(1);
        let x = SuperCurve::trivial(l.clone());
        let d = CartierDivisor::new(
            x.clone(),
            BTreeMap::from([(p0(), Graded::term(0, 0, RatFunc::z()))]),
        )
        .unwrap();
        assert_eq!(degree(&d).unwrap(), 1);

        // purely nilpotent local equation: degree zero
        let lg = lam_g(1, 1);
        let xg = SuperCurve::trivial(lg.clone());
        let nil = CartierDivisor::new(
            xg,
            BTreeMap::from([(p0(), unit_beta_theta(&lg, -3, -1))]),
        )
        .unwrap();
        assert_eq!(degree(&nil).unwrap(), 0);

        // double zero at 0 plus a simple pole at 1
        let z2 = Graded::term(0, 0, RatFunc::from_poly(Poly::z().pow(2)));
        let inv1 = l.invert_ktimes(&lin(&l, 1)).unwrap();
        let d2 = CartierDivisor::new(
            x,
            BTreeMap::from([(p0(), z2), (PointP1::finite_i64(1), inv1)]),
        )
        .unwrap();
        assert_eq!(degree(&d2).unwrap(), 1);

        // additivity
        let sum = d.add(&d2).unwrap();
        assert_eq!(degree(&sum).unwrap(), 2);
    }

    #[test]
    fn bundle_of_divisor_has_matching_sections() {
        // O(1 . [0]) on the trivial 1|1 curve: sections 1, 1/z times 1, theta
        let l = lam_c(1);
        let x = SuperCurve::trivial(l.clone());
        let d = CartierDivisor::new(
            x,
            BTreeMap::from([(p0(), Graded::term(0, 0, RatFunc::z()))]),
        )
        .unwrap();
        let bundle = line_bundle_of(&d).unwrap();
        let bounds = TruncationBounds::for_bundle(&bundle, 2);
        assert_eq!(h0(&bundle, &bounds).unwrap().graded_dim(), (2, 2));
    }

    #[test]
    fn principal_divisor_is_trivial_with_zero_abel_image() {
        // div((z-1)/(z-2)) on the twisted curve theta -> z^2 theta
        let l = lam_g(1, 1);
        let x = twist_curve(&l, 2);
        let f = l
            .mul(&lin(&l, 1), &l.invert_ktimes(&lin(&l, 2)).unwrap());
        let d = CartierDivisor::new(
            x,
            BTreeMap::from([
                (PointP1::finite_i64(1), f.clone()),
                (PointP1::finite_i64(2), f),
            ]),
        )
        .unwrap();
        assert_eq!(degree(&d).unwrap(), 0);
        let check = abel_theorem_check(&d, 2).unwrap();
        assert!(check.abel_zero());
        let w = check.witness.clone().expect("principal divisor is trivial");
        // the witness trivializes O(D): its reduced part carries exactly the
        // inverse divisor
        assert_eq!(l.order_at(&w, &PointP1::finite_i64(1)).unwrap(), -1);
        assert_eq!(l.order_at(&w, &PointP1::finite_i64(2)).unwrap(), 1);
        assert!(check.consistent());
    }

    #[test]
    fn nilpotent_divisor_with_nonzero_class() {
        // D = (1 + beta theta / z at 0) on the theta -> z^2 theta curve: the
        // gamma-transported log is beta z theta, the generating class of the
        // odd H^1, so D is non-trivial and its Abel image is a single
        // rational residue.
        let l = lam_g(1, 1);
        let x = twist_curve(&l, 2);
        let d = CartierDivisor::new(
            x.clone(),
            BTreeMap::from([(p0(), unit_beta_theta(&l, 1, -1))]),
        )
        .unwrap();
        assert_eq!(degree(&d).unwrap(), 0);

        let u = vec![p0(), PointP1::Infinity];
        let triv = BundleData::trivial(x.clone());
        let bounds = TruncationBounds::with_points(&triv, 2, &u);
        let omega = h0_ber(&triv, &bounds).unwrap();
        assert_eq!(omega.graded_dim(), (1, 1));
        let image = abel_with_omegas(&d, &omega.functions(), &u).unwrap();
        assert!(!image.is_zero());
        // each value is res_0(T(h . beta z theta)) = -beta c where c is the
        // z^{-2} coefficient of the reduced channel of h (the left
        // theta-derivative gives T(beta z theta) = -beta z); no Log symbols
        for (j, val) in image.values.iter().enumerate() {
            let h = omega.function(j);
            let mut expected = LogElement::zero();
            let red = l.reduced_fn(&h);
            let c = red.laurent(&p0(), -2).get(&-2).cloned().unwrap_or_default();
            if !c.is_zero() {
                expected.insert(1, 0, LogScalar::from_rational(-&c));
            }
            assert_eq!(val, &expected);
            for s in val.terms.values() {
                assert!(s.pi_i_coeff.is_zero());
                assert!(s.log_terms.values().all(|c| c.is_zero()));
            }
        }

        let check = abel_theorem_check(&d, 2).unwrap();
        assert!(!check.abel_zero());
        assert!(!check.trivial());
        assert!(check.consistent());
    }

    #[test]
    fn abel_additivity_and_independence() {
        let l = lam_g(1, 1);
        let x = twist_curve(&l, 2);
        let nil = CartierDivisor::new(
            x.clone(),
            BTreeMap::from([(p0(), unit_beta_theta(&l, 1, -1))]),
        )
        .unwrap();
        let f = l
            .mul(&lin(&l, 1), &l.invert_ktimes(&lin(&l, 2)).unwrap());
        let principal = CartierDivisor::new(
            x.clone(),
            BTreeMap::from([
                (PointP1::finite_i64(1), f.clone()),
                (PointP1::finite_i64(2), f),
            ]),
        )
        .unwrap();
        let sum = nil.add(&principal).unwrap();

        let u = vec![
            p0(),
            PointP1::finite_i64(1),
            PointP1::finite_i64(2),
            PointP1::Infinity,
        ];
        let triv = BundleData::trivial(x.clone());
        let bounds = TruncationBounds::with_points(&triv, 2, &u);
        let omegas = h0_ber(&triv, &bounds).unwrap().functions();

        let v_nil = abel_with_omegas(&nil, &omegas, &u).unwrap();
        let v_pr = abel_with_omegas(&principal, &omegas, &u).unwrap();
        let v_sum = abel_with_omegas(&sum, &omegas, &u).unwrap();
        assert!(v_pr.is_zero());
        assert_eq!(v_sum, v_nil.add(&v_pr));
        assert_eq!(v_sum, v_nil);

        // representative independence: multiply the local equation by a unit
        // of the local ring at 0
        let unit = l.add(
            &l.add(&l.one(), &l.scale(&l.z_fn(), &RatFunc::constant(qi(3)))),
            &Graded::term(1, 1, RatFunc::from_poly(Poly::z().pow(2))),
        );
        let perturbed = CartierDivisor::new(
            x.clone(),
            BTreeMap::from([(p0(), l.mul(&nil.local_equation(&p0()), &unit))]),
        )
        .unwrap();
        assert_eq!(degree(&perturbed).unwrap(), 0);
        assert_eq!(abel_with_omegas(&perturbed, &omegas, &u).unwrap(), v_nil);

        // marked-set independence: extra marked points do not change values
        let mut u_big = u.clone();
        u_big.push(PointP1::finite_i64(5));
        u_big.push(PointP1::finite_i64(-4));
        assert_eq!(abel_with_omegas(&nil, &omegas, &u_big).unwrap(), v_nil);

        // lift independence: perturbing a lift by d . c leaves the values
        // unchanged; check against the raw per-term evaluation
        let c = qi(7);
        let mut extra = vec![OpTerm {
            channel: FormChannel::Dz,
            coeff: crate::berezin::LogRational::from_rat(l.scale(
                &l.one(),
                &RatFunc::constant(c.clone()),
            )),
            z_order: 1,
            thetas: 0,
        }];
        for i in 1..=l.q {
            extra.push(OpTerm {
                channel: FormChannel::Dtheta(i),
                coeff: crate::berezin::LogRational::from_rat(l.scale(
                    &l.one(),
                    &RatFunc::constant(c.clone()),
                )),
                z_order: 0,
                thetas: 1 << (i - 1),
            });
        }
        for w in &omegas {
            let mut lift = lift_to_dsharp(&l, &BerSection::new(w.clone()), &u).unwrap();
            let base: Vec<LogElement> = nil
                .local_data()
                .iter()
                .map(|(p, f)| {
                    let g = nil.curve().gamma_apply(p, f);
                    contour_residue(&l, &lift.apply_to_log(&l, &g).unwrap(), p).unwrap()
                })
                .collect();
            lift.terms.extend(extra.iter().cloned());
            let shifted = DifferentialOperator { terms: lift.terms };
            let vals: Vec<LogElement> = nil
                .local_data()
                .iter()
                .map(|(p, f)| {
                    let g = nil.curve().gamma_apply(p, f);
                    contour_residue(&l, &shifted.apply_to_log(&l, &g).unwrap(), p).unwrap()
                })
                .collect();
            assert_eq!(vals, base);
        }
    }

    #[test]
    fn effectivity_gap() {
        // theta -> z^2 theta over C[beta]: the bundle twisted by the
        // generating odd H^1 class has only nilpotent sections, while the
        // untwisted bundle of the same reduced degree has the section 1.
        let l = lam_g(1, 1);
        let x = twist_curve(&l, 2);
        let d = CartierDivisor::new(
            x.clone(),
            BTreeMap::from([(p0(), unit_beta_theta(&l, 1, -1))]),
        )
        .unwrap();
        let special = line_bundle_of(&d).unwrap();
        assert!(!has_effective_representative(&special, 2).unwrap());
        assert_eq!(
            h0(&special, &TruncationBounds::for_bundle(&special, 2))
                .unwrap()
                .graded_dim(),
            (0, 1)
        );
        let generic = BundleData::trivial(x);
        assert!(has_effective_representative(&generic, 2).unwrap());
    }
}

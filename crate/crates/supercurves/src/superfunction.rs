//! The function field of the trivial family: rational functions in z with
//! Lambda coefficients, exact Laurent expansion at points of P^1, derivatives,
//! orders, and logarithmic decomposition.
//!
//! The local parameter is z - P at a finite point and w = 1/z at infinity.
//! Residues of one-forms f dz use dz = -w^{-2} dw at infinity, so the total
//! residue over all of P^1 is exactly zero.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalars::GaussianRational;
use crate::superalgebra::{Coeff, Graded, Lambda, SuperElement};
use crate::{Error, Result};

/// Dense univariate polynomial over Q(i), ascending coefficients, no trailing
/// zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<GaussianRational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: GaussianRational) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly(vec![c])
        }
    }

    pub fn one() -> Self {
        Poly::constant(GaussianRational::one())
    }

    /// The monomial z.
    pub fn z() -> Self {
        Poly(vec![GaussianRational::zero(), GaussianRational::one()])
    }

    pub fn from_coeffs(mut v: Vec<GaussianRational>) -> Self {
        while v.last().map_or(false, |c| c.is_zero()) {
            v.pop();
        }
        Poly(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&GaussianRational> {
        self.0.last()
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.0.get(k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(&self.coeff(k) + &o.coeff(k));
        }
        Poly::from_coeffs(v)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![GaussianRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(v)
    }

    pub fn scale(&self, c: &GaussianRational) -> Poly {
        Poly::from_coeffs(self.0.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: usize) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly::from_coeffs(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c * &GaussianRational::from_int(k as i64 + 1))
                .collect(),
        )
    }

    pub fn eval(&self, x: &GaussianRational) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for c in self.0.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Quotient and remainder; panics if `o` is zero.
    pub fn divrem(&self, o: &Poly) -> (Poly, Poly) {
        let od = o.degree().expect("division by zero polynomial");
        let lead_inv = o.leading().unwrap().inv().unwrap();
        let mut rem = self.clone();
        let mut quo = vec![GaussianRational::zero(); self.0.len().saturating_sub(od)];
        while let Some(rd) = rem.degree() {
            if rd < od {
                break;
            }
            let c = rem.leading().unwrap() * &lead_inv;
            let shift = rd - od;
            quo[shift] = c.clone();
            let mut sub = vec![GaussianRational::zero(); shift];
            sub.extend(o.0.iter().map(|x| x * &c));
            rem = rem.sub(&Poly::from_coeffs(sub));
        }
        (Poly::from_coeffs(quo), rem)
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if let Some(l) = a.leading() {
            let inv = l.inv().unwrap();
            a = a.scale(&inv);
        }
        a
    }

    /// Coefficients of self(t + p), ascending in t.
    pub fn taylor_shift(&self, p: &GaussianRational) -> Poly {
        let mut acc = Poly::zero();
        let shift = Poly(vec![p.clone(), GaussianRational::one()]);
        for c in self.0.iter().rev() {
            acc = acc.mul(&shift).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Coefficients reversed: z^deg * self(1/z).
    pub fn reversed(&self) -> Poly {
        let mut v = self.0.clone();
        v.reverse();
        Poly::from_coeffs(v)
    }

    /// Multiplicity of the root `p` (0 if not a root).
    pub fn root_multiplicity(&self, p: &GaussianRational) -> usize {
        let lin = Poly(vec![-p, GaussianRational::one()]);
        let mut m = 0;
        let mut cur = self.clone();
        while !cur.is_zero() {
            let (q, r) = cur.divrem(&lin);
            if r.is_zero() {
                m += 1;
                cur = q;
            } else {
                break;
            }
        }
        m
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (k, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match k {
                0 => parts.push(format!("({c})")),
                1 => parts.push(format!("({c})*z")),
                _ => parts.push(format!("({c})*z^{k}")),
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Truncated power series inverse of d (d[0] != 0), length `len`.
fn series_inv(d: &Poly, len: usize) -> Vec<GaussianRational> {
    let d0 = d.coeff(0);
    assert!(!d0.is_zero());
    let d0inv = d0.inv().unwrap();
    let mut out = vec![GaussianRational::zero(); len];
    if len == 0 {
        return out;
    }
    out[0] = d0inv.clone();
    for k in 1..len {
        let mut acc = GaussianRational::zero();
        for j in 1..=k {
            acc = &acc + &(&d.coeff(j) * &out[k - j]);
        }
        out[k] = &(-acc) * &d0inv;
    }
    out
}

/// A reduced rational function in z over Q(i): gcd-normalized, monic
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFunc { num, den };
        r.normalize();
        r
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree().unwrap_or(0) > 0 {
            self.num = self.num.divrem(&g).0;
            self.den = self.den.divrem(&g).0;
        }
        let lead_inv = self.den.leading().unwrap().inv().unwrap();
        self.num = self.num.scale(&lead_inv);
        self.den = self.den.scale(&lead_inv);
    }

    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc {
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn z() -> Self {
        RatFunc {
            num: Poly::z(),
            den: Poly::one(),
        }
    }

    pub fn constant(c: GaussianRational) -> Self {
        RatFunc {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale_by(&self, c: &GaussianRational) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc::new(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn derivative(&self) -> RatFunc {
        RatFunc::new(
            self.num
                .derivative()
                .mul(&self.den)
                .sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
    }

    /// Order of vanishing at a point of P^1 (None for the zero function).
    pub fn order_at(&self, p: &PointP1) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        match p {
            PointP1::Finite(a) => {
                let zn = self.num.root_multiplicity(a) as i64;
                let zd = self.den.root_multiplicity(a) as i64;
                Some(zn - zd)
            }
            PointP1::Infinity => {
                Some(self.den.degree().unwrap() as i64 - self.num.degree().unwrap() as i64)
            }
        }
    }

    /// Exact Laurent coefficients in the local parameter at `p`, for
    /// exponents up to and including `order`.
    pub fn laurent(&self, p: &PointP1, order: i64) -> BTreeMap<i64, GaussianRational> {
        let mut out = BTreeMap::new();
        if self.is_zero() {
            return out;
        }
        let (mut n, mut d, offset_extra) = match p {
            PointP1::Finite(a) => (self.num.taylor_shift(a), self.den.taylor_shift(a), 0i64),
            PointP1::Infinity => {
                let dn = self.num.degree().unwrap() as i64;
                let dd = self.den.degree().unwrap() as i64;
                (self.num.reversed(), self.den.reversed(), dd - dn)
            }
        };
        // strip powers of the local parameter
        let mut m = 0i64;
        while !n.is_zero() && n.coeff(0).is_zero() {
            n = Poly::from_coeffs(n.0[1..].to_vec());
            m += 1;
        }
        let mut k = 0i64;
        while d.coeff(0).is_zero() {
            d = Poly::from_coeffs(d.0[1..].to_vec());
            k += 1;
        }
        let start = m - k + offset_extra;
        if order < start {
            return out;
        }
        let len = (order - start + 1) as usize;
        let inv = series_inv(&d, len);
        for e in start..=order {
            let idx = (e - start) as usize;
            let mut acc = GaussianRational::zero();
            for j in 0..=idx.min(n.0.len().saturating_sub(1)) {
                acc = &acc + &(&n.coeff(j) * &inv[idx - j]);
            }
            if !acc.is_zero() {
                out.insert(e, acc);
            }
        }
        out
    }
}

impl Coeff for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RatFunc::add(self, o)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFunc::mul(self, o)
    }
    fn from_scalar(c: &GaussianRational) -> Self {
        RatFunc::constant(c.clone())
    }
    fn inv(&self) -> Result<Self> {
        RatFunc::inv(self)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// A point of the reduced space P^1, with exact scalar coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointP1 {
    Finite(GaussianRational),
    Infinity,
}

impl PointP1 {
    pub fn finite_i64(n: i64) -> Self {
        PointP1::Finite(GaussianRational::from_int(n))
    }
}

impl fmt::Display for PointP1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointP1::Finite(a) => write!(f, "{a}"),
            PointP1::Infinity => write!(f, "inf"),
        }
    }
}

/// Element of Lambda[B,q] tensored with rational functions in z.
pub type SuperRationalFunction = Graded<RatFunc>;

/// Componentwise exact Laurent expansion of a super rational function at a
/// point, over a bounded exponent window.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentExpansion {
    pub point: PointP1,
    pub coeffs: BTreeMap<i64, SuperElement>,
    /// Optional log-channel coefficients (filled by Berezin-side expansions
    /// of functions carrying formal-log terms).
    pub log_coeffs: BTreeMap<i64, crate::berezin::LogElement>,
    /// Top of the computed exponent window.
    pub order: i64,
}

impl LaurentExpansion {
    pub fn coeff(&self, e: i64) -> SuperElement {
        self.coeffs.get(&e).cloned().unwrap_or_default()
    }
}

impl Lambda {
    /// Embed a Lambda constant into the function field.
    pub fn constant_fn(&self, a: &SuperElement) -> SuperRationalFunction {
        a.map_coeffs(|c| RatFunc::constant(c.clone()))
    }

    /// The coordinate z as an element of the function field.
    pub fn z_fn(&self) -> SuperRationalFunction {
        Graded::term(0, 0, RatFunc::z())
    }

    /// z-derivative, componentwise.
    pub fn z_derivative(&self, f: &SuperRationalFunction) -> SuperRationalFunction {
        f.map_coeffs(|c| c.derivative())
    }

    /// The reduced component: image modulo nilpotents of B and the thetas.
    pub fn reduced_fn(&self, f: &SuperRationalFunction) -> RatFunc {
        f.get(0, 0)
    }

    /// Membership in K^x: even with nonzero reduced component.
    pub fn is_in_ktimes(&self, f: &SuperRationalFunction) -> bool {
        self.is_even(f) && !self.reduced_fn(f).is_zero()
    }

    /// Inverse of an element of K^x via the geometric series over the
    /// nilpotent part.
    pub fn invert_ktimes(&self, f: &SuperRationalFunction) -> Result<SuperRationalFunction> {
        if !self.is_in_ktimes(f) {
            return Err(Error::NotInKtimes(format!("{f:?}")));
        }
        self.invert_even(f)
    }

    /// Componentwise Laurent expansion at `p` up to exponent `order`.
    pub fn laurent_expand(
        &self,
        f: &SuperRationalFunction,
        p: &PointP1,
        order: i64,
    ) -> LaurentExpansion {
        let mut coeffs: BTreeMap<i64, SuperElement> = BTreeMap::new();
        for ((b, s), r) in &f.terms {
            for (e, c) in r.laurent(p, order) {
                coeffs
                    .entry(e)
                    .or_insert_with(Graded::zero)
                    .insert(*b, *s, c);
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        LaurentExpansion {
            point: p.clone(),
            coeffs,
            log_coeffs: BTreeMap::new(),
            order,
        }
    }

    /// Order of vanishing of the reduced component at `p`; errors on
    /// elements outside K^x.
    pub fn order_at(&self, f: &SuperRationalFunction, p: &PointP1) -> Result<i64> {
        if !self.is_in_ktimes(f) {
            return Err(Error::NotInKtimes(format!("{f:?}")));
        }
        Ok(self.reduced_fn(f).order_at(p).unwrap())
    }

    /// f'/f for f in K^x.
    pub fn dlog(&self, f: &SuperRationalFunction) -> Result<SuperRationalFunction> {
        let inv = self.invert_ktimes(f)?;
        Ok(self.mul(&self.z_derivative(f), &inv))
    }

    /// Write f = f_red (1 + nu) and return (f_red, lambda) with
    /// lambda = log(1 + nu), a finite sum.
    pub fn log_decompose(
        &self,
        f: &SuperRationalFunction,
    ) -> Result<(RatFunc, SuperRationalFunction)> {
        if !self.is_in_ktimes(f) {
            return Err(Error::NotInKtimes(format!("{f:?}")));
        }
        let red = self.reduced_fn(f);
        let nu = self.sub(&self.scale(f, &red.inv()?), &self.one());
        // log(1 + nu) = sum_{k>=1} (-1)^{k+1} nu^k / k
        let mut acc: SuperRationalFunction = Graded::zero();
        let mut pw = self.one::<RatFunc>();
        let mut k = 0i64;
        loop {
            pw = self.mul(&pw, &nu);
            k += 1;
            if pw.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = self.add(
                &acc,
                &self.scale(&pw, &RatFunc::constant(GaussianRational::from_ratio(sign, k))),
            );
        }
        Ok((red, acc))
    }

    /// exp of a nilpotent element, the terminating series.
    pub fn exp_nilpotent(&self, a: &SuperRationalFunction) -> SuperRationalFunction {
        let mut acc = self.one();
        let mut pw = self.one::<RatFunc>();
        let mut k = 0i64;
        loop {
            pw = self.mul(&pw, a);
            k += 1;
            if pw.is_zero() {
                break;
            }
            let inv_fact = GaussianRational::from_ratio(1, (1..=k).product::<i64>());
            acc = self.add(&acc, &self.scale(&pw, &RatFunc::constant(inv_fact)));
        }
        acc
    }

    /// Residue of the one-form f dz at `p`: the coefficient of the (-1)
    /// exponent, with the sign convention dz = -w^{-2} dw at infinity.
    pub fn residue_form(&self, f: &SuperRationalFunction, p: &PointP1) -> SuperElement {
        match p {
            PointP1::Finite(_) => self.laurent_expand(f, p, -1).coeff(-1),
            PointP1::Infinity => {
                let c1 = self.laurent_expand(f, p, 1).coeff(1);
                self.neg(&c1)
            }
        }
    }

    /// Finite poles of the reduced-or-nilpotent components (points where some
    /// component has a pole), from denominator roots among the given hints
    /// plus exhaustive linear factor extraction.
    pub fn finite_poles(&self, f: &SuperRationalFunction) -> Result<Vec<GaussianRational>> {
        let mut out: Vec<GaussianRational> = Vec::new();
        for r in f.terms.values() {
            for root in linear_roots(&r.den)? {
                if !out.contains(&root.0) {
                    out.push(root.0);
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Roots of a polynomial that splits into linear factors over Q(i), with
/// multiplicities. Errors if an irreducible factor of degree > 2 remains or a
/// quadratic does not split over Q(i).
pub fn linear_roots(p: &Poly) -> Result<Vec<(GaussianRational, usize)>> {
    let mut out: Vec<(GaussianRational, usize)> = Vec::new();
    let mut cur = p.clone();
    if cur.is_zero() {
        return Ok(out);
    }
    // rational root extraction by candidate search over divisors is fragile;
    // instead peel roots degree by degree: deg 1 directly, deg 2 by the
    // quadratic formula with exact square roots in Q(i).
    loop {
        match cur.degree() {
            None | Some(0) => break,
            Some(1) => {
                let root = &(-cur.coeff(0)) / &cur.coeff(1);
                push_root(&mut out, root);
                break;
            }
            Some(2) => {
                let a = cur.coeff(2);
                let b = cur.coeff(1);
                let c = cur.coeff(0);
                let disc = &(&b * &b) - &(&GaussianRational::from_int(4) * &(&a * &c));
                let sq = gaussian_sqrt(&disc).ok_or_else(|| {
                    Error::Precondition(format!("quadratic {cur} does not split over Q(i)"))
                })?;
                let two_a = &GaussianRational::from_int(2) * &a;
                push_root(&mut out, &(&(-&b) + &sq) / &two_a);
                push_root(&mut out, &(&(-&b) - &sq) / &two_a);
                break;
            }
            Some(_) => {
                // peel one root found by small search over known forms:
                // try roots among low-height Gaussian rationals
                let mut found = None;
                'search: for den in 1i64..=6 {
                    for nre in -12i64..=12 {
                        for nim in -12i64..=12 {
                            let cand = GaussianRational::new(
                                num::BigRational::new(nre.into(), den.into()),
                                num::BigRational::new(nim.into(), den.into()),
                            );
                            if cur.eval(&cand).is_zero() {
                                found = Some(cand);
                                break 'search;
                            }
                        }
                    }
                }
                let root = found.ok_or_else(|| {
                    Error::Precondition(format!("cannot factor {cur} into linear factors"))
                })?;
                let lin = Poly(vec![-&root, GaussianRational::one()]);
                cur = cur.divrem(&lin).0;
                push_root(&mut out, root);
            }
        }
    }
    Ok(out)
}

fn push_root(out: &mut Vec<(GaussianRational, usize)>, r: GaussianRational) {
    for (x, m) in out.iter_mut() {
        if *x == r {
            *m += 1;
            return;
        }
    }
    out.push((r, 1));
}

/// Exact square root in Q(i), if one exists.
pub fn gaussian_sqrt(c: &GaussianRational) -> Option<GaussianRational> {
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::Signed as _;
    if c.is_zero() {
        return Some(GaussianRational::zero());
    }
    // sqrt(a + bi) = x + yi with x^2 - y^2 = a, 2xy = b, x^2 + y^2 = |c|
    let norm = c.norm();
    let r = rational_sqrt(&norm)?;
    let two = BigRational::from_integer(BigInt::from(2));
    let x2 = (&c.re + &r) / &two;
    let y2 = (&r - &c.re) / &two;
    if x2.is_negative() || y2.is_negative() {
        return None;
    }
    let x = rational_sqrt(&x2)?;
    let mut y = rational_sqrt(&y2)?;
    if c.im.is_negative() {
        y = -y;
    }
    let cand = GaussianRational::new(x, y);
    if &(&cand * &cand) == c {
        Some(cand)
    } else {
        None
    }
}

fn rational_sqrt(r: &num::rational::BigRational) -> Option<num::rational::BigRational> {
    use num::Signed as _;
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(num::rational::BigRational::new(n, d))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::{qi, BaseAlgebra};
    use rand::{Rng, SeedableRng};

    fn lam(m: usize, q: usize) -> Lambda {
        Lambda::new(BaseAlgebra::grassmann(m), q)
    }

    fn rf(num: &[i64], den: &[i64]) -> RatFunc {
        RatFunc::new(
            Poly::from_coeffs(num.iter().map(|n| qi(*n, 1)).collect()),
            Poly::from_coeffs(den.iter().map(|n| qi(*n, 1)).collect()),
        )
    }

    #[test]
    fn laurent_one_over_z_at_zero() {
        let l = lam(0, 1);
        let f: SuperRationalFunction = Graded::term(0, 0, rf(&[1], &[0, 1]));
        let e = l.laurent_expand(&f, &PointP1::finite_i64(0), 2);
        assert_eq!(l.reduce(&e.coeff(-1)), qi(1, 1));
        for k in [0, 1, 2, -2] {
            assert!(e.coeff(k).is_zero());
        }
    }

    #[test]
    fn laurent_geometric_series() {
        // 1/(z-1) at 0 to order 2: -1 - z - z^2; verify by multiplying back
        let l = lam(0, 1);
        let f: SuperRationalFunction = Graded::term(0, 0, rf(&[1], &[-1, 1]));
        let e = l.laurent_expand(&f, &PointP1::finite_i64(0), 2);
        for k in 0..=2 {
            assert_eq!(l.reduce(&e.coeff(k)), qi(-1, 1));
        }
        // multiply-back oracle: (z-1) * (-1 - z - z^2) = 1 - z^3
        let series = Poly::from_coeffs(vec![qi(-1, 1), qi(-1, 1), qi(-1, 1)]);
        let back = series.mul(&Poly::from_coeffs(vec![qi(-1, 1), qi(1, 1)]));
        assert_eq!(back, Poly::from_coeffs(vec![qi(1, 1), qi(0, 1), qi(0, 1), qi(-1, 1)]));
    }

    #[test]
    fn laurent_z_at_infinity() {
        let l = lam(0, 1);
        let f = l.z_fn();
        let e = l.laurent_expand(&f, &PointP1::Infinity, 1);
        assert_eq!(l.reduce(&e.coeff(-1)), qi(1, 1));
        assert!(e.coeff(0).is_zero());
        assert!(e.coeff(1).is_zero());
    }

    #[test]
    fn order_at_examples() {
        let l = lam(1, 1);
        let z2: SuperRationalFunction = Graded::term(0, 0, rf(&[0, 0, 1], &[1]));
        assert_eq!(l.order_at(&z2, &PointP1::finite_i64(0)).unwrap(), 2);
        // 1 - beta theta1 / z has reduced part 1
        let beta: SuperRationalFunction = l.generator("beta1").unwrap();
        let bt = l.mul(&beta, &l.theta(1));
        let term = l.scale(&bt, &rf(&[-1], &[0, 1]));
        let f = l.add(&l.one(), &term);
        assert_eq!(l.order_at(&f, &PointP1::finite_i64(0)).unwrap(), 0);
        let inv_z: SuperRationalFunction = Graded::term(0, 0, rf(&[1], &[0, 1]));
        assert_eq!(l.order_at(&inv_z, &PointP1::Infinity).unwrap(), 1);
        // nilpotent input errors
        assert!(l.order_at(&bt, &PointP1::finite_i64(0)).is_err());
    }

    #[test]
    fn dlog_examples() {
        let l = lam(0, 1);
        assert_eq!(
            l.dlog(&l.z_fn()).unwrap(),
            Graded::term(0, 0, rf(&[1], &[0, 1]))
        );
        let c: SuperRationalFunction = l.scalar(&qi(7, 3));
        assert!(l.dlog(&c).unwrap().is_zero());
        // dlog(z(z-1)) = 1/z + 1/(z-1), verified by direct quotient
        let f: SuperRationalFunction = Graded::term(0, 0, rf(&[0, -1, 1], &[1]));
        let expect = Graded::term(0, 0, rf(&[1], &[0, 1]).add(&rf(&[1], &[-1, 1])));
        assert_eq!(l.dlog(&f).unwrap(), expect);
    }

    #[test]
    fn log_decompose_examples() {
        let l = lam(1, 1);
        // pure reduced part: lambda = 0
        let f: SuperRationalFunction = Graded::term(0, 0, rf(&[0, 1], &[1]));
        let (red, lamb) = l.log_decompose(&f).unwrap();
        assert_eq!(red, rf(&[0, 1], &[1]));
        assert!(lamb.is_zero());
        // f = 1 + beta theta / z: lambda = beta theta / z; exp check
        let bt = l.mul::<RatFunc>(&l.generator("beta1").unwrap(), &l.theta(1));
        let term = l.scale(&bt, &rf(&[1], &[0, 1]));
        let f = l.add(&l.one(), &term);
        let (red, lamb) = l.log_decompose(&f).unwrap();
        assert_eq!(red, RatFunc::one());
        assert_eq!(lamb, term);
        let back = l.scale(&l.exp_nilpotent(&lamb), &red);
        assert_eq!(back, f);
        // f = (1+eps) z over C[eps]/eps^2
        let le = Lambda::new(BaseAlgebra::even_truncated(2), 1);
        let eps: SuperRationalFunction = le.generator("eps").unwrap();
        let f = le.mul(&le.add(&le.one(), &eps), &le.z_fn());
        let (red, lamb) = le.log_decompose(&f).unwrap();
        assert_eq!(red, RatFunc::z());
        assert_eq!(lamb, eps);
        assert_eq!(le.scale(&le.exp_nilpotent(&lamb), &red), f);
    }

    #[test]
    fn residue_against_partial_fractions() {
        let l = lam(0, 1);
        // f = 3/(z-2) + 5/(z+1)^2 + z: residues read off the construction
        let f_rf = rf(&[3], &[-2, 1])
            .add(&rf(&[5], &[1, 2, 1]))
            .add(&RatFunc::z());
        let f: SuperRationalFunction = Graded::term(0, 0, f_rf);
        assert_eq!(
            l.reduce(&l.residue_form(&f, &PointP1::finite_i64(2))),
            qi(3, 1)
        );
        assert!(l
            .residue_form(&f, &PointP1::finite_i64(-1))
            .is_zero());
        assert_eq!(
            l.reduce(&l.residue_form(&f, &PointP1::Infinity)),
            qi(-3, 1)
        );
    }

    #[test]
    fn total_residue_vanishes_randomized() {
        let l = Lambda::new(BaseAlgebra::grassmann(2), 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let points = [qi(0, 1), qi(1, 1), qi(-1, 1), qi(2, 1)];
        for _ in 0..25 {
            let mut f: SuperRationalFunction = Graded::zero();
            for b in 0..l.base.dim() {
                for s in 0..(1u32 << l.q) {
                    if rng.gen_bool(0.4) {
                        let mut r = RatFunc::zero();
                        for p in &points {
                            if rng.gen_bool(0.5) {
                                let k = rng.gen_range(1..=3);
                                let c = qi(rng.gen_range(-5..=5), 1);
                                let lin = Poly(vec![-p, GaussianRational::one()]);
                                r = r.add(&RatFunc::new(Poly::constant(c), lin.pow(k)));
                            }
                        }
                        if rng.gen_bool(0.3) {
                            r = r.add(&RatFunc::from_poly(Poly::from_coeffs(vec![
                                qi(rng.gen_range(-3..=3), 1),
                                qi(rng.gen_range(-3..=3), 1),
                            ])));
                        }
                        f.insert(b, s, r);
                    }
                }
            }
            let mut total: SuperElement = Graded::zero();
            for p in points.iter().map(|a| PointP1::Finite(a.clone())).chain([PointP1::Infinity]) {
                total = l.add(&total, &l.residue_form(&f, &p));
            }
            assert!(total.is_zero(), "total residue must vanish exactly");
        }
    }

    #[test]
    fn linear_roots_and_sqrt() {
        // (z-1)^2 (z-i) has roots 1 (twice) and i
        let p = Poly(vec![-qi(1, 1), GaussianRational::one()])
            .pow(2)
            .mul(&Poly(vec![-GaussianRational::i(), GaussianRational::one()]));
        let roots = linear_roots(&p).unwrap();
        assert!(roots.contains(&(qi(1, 1), 2)));
        assert!(roots.contains(&(GaussianRational::i(), 1)));
        assert_eq!(gaussian_sqrt(&qi(-4, 1)), Some(&qi(2, 1) * &GaussianRational::i()));
    }
}

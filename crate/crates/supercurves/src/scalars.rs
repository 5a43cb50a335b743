//! Exact scalar arithmetic: Gaussian rationals and the formal-logarithm
//! extension in which Abel-map values live.
//!
//! A [`LogScalar`] stores a value of the shape
//! `r + c * IPI + sum_j e_j * Log(pi_j)` where `r`, `c`, `e_j` are Gaussian
//! rationals, `IPI` is the formal symbol for i*pi, and each `pi_j` is a
//! Gaussian prime normalized to its first-quadrant associate. Equality is
//! decided componentwise after dropping zero coefficients.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::{Error, Result};

/// An element of Q(i), stored as an exact pair of reduced rationals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        GaussianRational {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        GaussianRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0);
        GaussianRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Squared modulus, a nonnegative rational.
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(GaussianRational {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussianRational::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: GaussianRational) -> GaussianRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        self * &rhs.inv().expect("division by zero GaussianRational")
    }
}

impl Div for GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: GaussianRational) -> GaussianRational {
        &self / &rhs
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// A Gaussian integer, used as the key for prime symbols in [`LogScalar`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GaussianInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussianInt {
    pub fn new(re: BigInt, im: BigInt) -> Self {
        GaussianInt { re, im }
    }

    pub fn from_i64(re: i64, im: i64) -> Self {
        GaussianInt {
            re: BigInt::from(re),
            im: BigInt::from(im),
        }
    }

    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &GaussianInt) -> GaussianInt {
        GaussianInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn conj(&self) -> GaussianInt {
        GaussianInt {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn mul_i(&self) -> GaussianInt {
        GaussianInt {
            re: -self.im.clone(),
            im: self.re.clone(),
        }
    }

    /// Exact quotient if `o` divides `self` in Z[i].
    fn exact_div(&self, o: &GaussianInt) -> Option<GaussianInt> {
        let n = o.norm();
        if n.is_zero() {
            return None;
        }
        let p = self.mul(&o.conj());
        if (&p.re % &n).is_zero() && (&p.im % &n).is_zero() {
            Some(GaussianInt {
                re: &p.re / &n,
                im: &p.im / &n,
            })
        } else {
            None
        }
    }

    /// First-quadrant associate: re > 0, im >= 0 (the unit 1 for units).
    fn normalize_associate(&self) -> (GaussianInt, u32) {
        let mut g = self.clone();
        let mut k = 0u32;
        // at most three rotations by i
        for _ in 0..3 {
            if g.re.is_positive() && !g.im.is_negative() {
                break;
            }
            g = g.mul_i();
            k += 1;
        }
        // k rotations by i were applied: self = i^(4-k) * g
        (g, (4 - k) % 4)
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Element of the formal-logarithm extension of Q(i).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogScalar {
    pub rational_part: GaussianRational,
    /// Coefficient of the symbol IPI (i*pi).
    pub pi_i_coeff: GaussianRational,
    /// Coefficients of Log(pi) for normalized Gaussian primes pi.
    pub log_terms: BTreeMap<GaussianInt, GaussianRational>,
}

impl Default for GaussianRational {
    fn default() -> Self {
        GaussianRational::zero()
    }
}

impl LogScalar {
    pub fn zero() -> Self {
        LogScalar::default()
    }

    pub fn from_rational(c: GaussianRational) -> Self {
        LogScalar {
            rational_part: c,
            ..Default::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational_part.is_zero()
            && self.pi_i_coeff.is_zero()
            && self.log_terms.values().all(|c| c.is_zero())
    }

    pub fn normalize(mut self) -> Self {
        self.log_terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        LogScalar {
            rational_part: &self.rational_part * c,
            pi_i_coeff: &self.pi_i_coeff * c,
            log_terms: self
                .log_terms
                .iter()
                .map(|(p, e)| (p.clone(), e * c))
                .collect(),
        }
        .normalize()
    }
}

impl Add for &LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: &LogScalar) -> LogScalar {
        let mut log_terms = self.log_terms.clone();
        for (p, e) in &rhs.log_terms {
            let entry = log_terms.entry(p.clone()).or_insert_with(GaussianRational::zero);
            *entry = &*entry + e;
        }
        LogScalar {
            rational_part: &self.rational_part + &rhs.rational_part,
            pi_i_coeff: &self.pi_i_coeff + &rhs.pi_i_coeff,
            log_terms,
        }
        .normalize()
    }
}

impl Sub for &LogScalar {
    type Output = LogScalar;
    fn sub(self, rhs: &LogScalar) -> LogScalar {
        self + &rhs.scale(&-GaussianRational::one())
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: LogScalar) -> LogScalar {
        &self + &rhs
    }
}

impl Sub for LogScalar {
    type Output = LogScalar;
    fn sub(self, rhs: LogScalar) -> LogScalar {
        &self - &rhs
    }
}

impl fmt::Display for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.rational_part.is_zero() {
            parts.push(format!("{}", self.rational_part));
        }
        if !self.pi_i_coeff.is_zero() {
            parts.push(format!("({})*IPI", self.pi_i_coeff));
        }
        for (p, e) in &self.log_terms {
            if !e.is_zero() {
                parts.push(format!("({})*Log({})", e, p));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Arithmetic dispatch used by the scenario runner.
pub fn gr_arith(a: &GaussianRational, b: &GaussianRational, op: char) -> Result<GaussianRational> {
    match op {
        '+' => Ok(a + b),
        '-' => Ok(a - b),
        '*' => Ok(a * b),
        '/' => {
            if b.is_zero() {
                Err(Error::DivisionByZero)
            } else {
                Ok(a * &b.inv()?)
            }
        }
        _ => Err(Error::Precondition(format!("unknown operation {op}"))),
    }
}

fn factor_u64(mut n: BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut d = BigInt::from(2u32);
    while &d * &d <= n {
        let mut e = 0u32;
        while (&n % &d).is_zero() {
            n = &n / &d;
            e += 1;
        }
        if e > 0 {
            out.push((d.clone(), e));
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// Split a rational prime p = 1 mod 4 as pi * conj(pi) in Z[i] by brute
/// force over re^2 + im^2 = p. Inputs stay desk-scale, so this is fine.
fn split_prime(p: &BigInt) -> GaussianInt {
    let mut a = BigInt::one();
    loop {
        let rem = p - &a * &a;
        if rem < BigInt::zero() {
            unreachable!("prime 1 mod 4 must split");
        }
        let b = rem.sqrt();
        if &b * &b == rem {
            return GaussianInt { re: a, im: b };
        }
        a += 1;
    }
}

/// Factor a nonzero Gaussian integer into first-quadrant primes and a power
/// of i: g = i^k * prod pi_j^{e_j}.
fn factor_gaussian(g: &GaussianInt) -> (u32, Vec<(GaussianInt, u32)>) {
    assert!(!g.is_zero());
    let mut rest = g.clone();
    let mut primes: Vec<(GaussianInt, u32)> = Vec::new();
    for (p, _) in factor_u64(g.norm()) {
        let four = BigInt::from(4u32);
        let candidates: Vec<GaussianInt> = if p == BigInt::from(2u32) {
            vec![GaussianInt::from_i64(1, 1)]
        } else if (&p % &four) == BigInt::from(3u32) {
            vec![GaussianInt {
                re: p.clone(),
                im: BigInt::zero(),
            }]
        } else {
            let pi = split_prime(&p).normalize_associate().0;
            let pibar = pi.conj().normalize_associate().0;
            vec![pi, pibar]
        };
        for pi in candidates {
            let mut e = 0u32;
            while let Some(q) = rest.exact_div(&pi) {
                rest = q;
                e += 1;
            }
            if e > 0 {
                primes.push((pi, e));
            }
        }
    }
    // rest is now a unit i^k
    debug_assert!(rest.norm().is_one());
    let (_, k) = rest.normalize_associate();
    // normalize_associate reports rest = i^k * 1
    (k, primes)
}

/// Formal logarithm of a nonzero Gaussian rational in canonical factored
/// form. The branch convention: Log(i^k) = k * IPI / 2 with the exponent k
/// determined by the first-quadrant prime normalization.
pub fn formal_log(c: &GaussianRational) -> Result<LogScalar> {
    if c.is_zero() {
        return Err(Error::Precondition("formal_log of zero".into()));
    }
    // write c = g1 / g2 with g1 a Gaussian integer and g2 a positive integer
    let d1 = c.re.denom().clone();
    let d2 = c.im.denom().clone();
    let den = &d1 * &d2;
    let g1 = GaussianInt {
        re: c.re.numer() * &d2,
        im: c.im.numer() * &d1,
    };
    let g2 = GaussianInt {
        re: den,
        im: BigInt::zero(),
    };
    let (k1, p1) = factor_gaussian(&g1);
    let (k2, p2) = factor_gaussian(&g2);
    let mut log_terms: BTreeMap<GaussianInt, GaussianRational> = BTreeMap::new();
    for (p, e) in p1 {
        let entry = log_terms.entry(p).or_insert_with(GaussianRational::zero);
        *entry = &*entry + &GaussianRational::from_int(e as i64);
    }
    for (p, e) in p2 {
        let entry = log_terms.entry(p).or_insert_with(GaussianRational::zero);
        *entry = &*entry - &GaussianRational::from_int(e as i64);
    }
    // unit exponent k1 - k2, reduced mod 4; each power of i contributes IPI/2
    let k = ((k1 as i64 - k2 as i64).rem_euclid(4)) as i64;
    Ok(LogScalar {
        rational_part: GaussianRational::zero(),
        pi_i_coeff: GaussianRational::from_ratio(k, 2),
        log_terms,
    }
    .normalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gr(re: i64, im: i64) -> GaussianRational {
        GaussianRational::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    #[test]
    fn norm_product() {
        // (1+i)(1-i) = 2
        assert_eq!(&gr(1, 1) * &gr(1, -1), gr(2, 0));
    }

    #[test]
    fn self_division() {
        let a = gr(3, -7);
        assert_eq!(&a / &a, gr(1, 0));
    }

    #[test]
    fn additive_inverse() {
        let a = GaussianRational::from_ratio(3, 2);
        assert!((&a + &(-&a)).is_zero());
    }

    #[test]
    fn division_by_zero_errors() {
        assert!(matches!(
            gr_arith(&gr(1, 0), &gr(0, 0), '/'),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn log_of_unity() {
        assert!(formal_log(&gr(1, 0)).unwrap().is_zero());
    }

    #[test]
    fn log_of_minus_one() {
        let l = formal_log(&gr(-1, 0)).unwrap();
        assert_eq!(l.pi_i_coeff, GaussianRational::one());
        assert!(l.log_terms.is_empty());
    }

    // Independent factorization oracle: exhaust Gaussian divisors of small
    // norm to factor g, then compare exponents with formal_log.
    fn oracle_factor(mut g: (i64, i64)) -> BTreeMap<(i64, i64), u32> {
        use num::ToPrimitive;
        let mut out = BTreeMap::new();
        let norm = |x: (i64, i64)| x.0 * x.0 + x.1 * x.1;
        while norm(g) > 1 {
            let n = norm(g);
            // smallest-norm first-quadrant divisor of norm > 1 is prime
            let mut best: Option<(i64, i64)> = None;
            for a in 1..=n {
                for b in 0..=n {
                    let d = (a, b);
                    if norm(d) <= 1 || norm(d) > n {
                        continue;
                    }
                    let gi = GaussianInt::from_i64(g.0, g.1);
                    let di = GaussianInt::from_i64(d.0, d.1);
                    if gi.exact_div(&di).is_some() && best.map_or(true, |f| norm(d) < norm(f)) {
                        best = Some(d);
                    }
                }
            }
            let d = best.expect("non-unit must have a divisor");
            *out.entry(d).or_insert(0) += 1;
            let q = GaussianInt::from_i64(g.0, g.1)
                .exact_div(&GaussianInt::from_i64(d.0, d.1))
                .unwrap();
            g = (q.re.to_i64().unwrap(), q.im.to_i64().unwrap());
        }
        out
    }

    #[test]
    fn log_of_four_matches_factorization_oracle() {
        // 4 = i^2 * (1+i)^4 over Z[i]
        let oracle = oracle_factor((4, 0));
        assert_eq!(oracle.get(&(1, 1)), Some(&4));
        let l = formal_log(&gr(4, 0)).unwrap();
        assert_eq!(
            l.log_terms.get(&GaussianInt::from_i64(1, 1)),
            Some(&gr(4, 0))
        );
        assert_eq!(l.pi_i_coeff, GaussianRational::one());
        assert_eq!(l.log_terms.len(), 1);
    }

    #[test]
    fn log_additivity_mod_two_ipi() {
        // formal_log(ab) - formal_log(a) - formal_log(b) is a multiple of 2*IPI
        let cases = [
            (gr(2, 0), gr(3, 0)),
            (gr(1, 1), gr(1, -1)),
            (gr(-5, 0), gr(0, 1)),
            (gr(3, 4), gr(-2, 7)),
            (GaussianRational::from_ratio(3, 7), gr(-1, 2)),
        ];
        for (a, b) in cases {
            let lab = formal_log(&(&a * &b)).unwrap();
            let la = formal_log(&a).unwrap();
            let lb = formal_log(&b).unwrap();
            let diff = &(&lab - &la) - &lb;
            assert!(diff.log_terms.is_empty(), "log terms must cancel exactly");
            assert!(diff.rational_part.is_zero());
            let two = gr(2, 0);
            let q = &diff.pi_i_coeff / &two;
            assert!(q.im.is_zero() && q.re.is_integer(), "IPI defect {} not in 2Z", diff.pi_i_coeff);
        }
    }

    #[test]
    fn log_inverse_negates() {
        let a = gr(3, 4);
        let la = formal_log(&a).unwrap();
        let linv = formal_log(&a.inv().unwrap()).unwrap();
        let s = &la + &linv;
        assert!(s.log_terms.is_empty());
        // defect only in the IPI channel, and a multiple of 2
        let q = &s.pi_i_coeff / &gr(2, 0);
        assert!(q.im.is_zero() && q.re.is_integer());
    }
}

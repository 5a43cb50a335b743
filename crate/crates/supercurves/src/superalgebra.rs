//! The base algebra B, the Grassmann extension Lambda[B,q] = B[theta_1..theta_q],
//! parity, nilpotents, units, and the theta-derivations.
//!
//! Elements are stored as maps from (B-basis monomial, theta subset) to a
//! coefficient. The coefficient ring is generic: plain Gaussian rationals give
//! Lambda[B,q] constants, rational functions in z give the function field of
//! the trivial family (see [`crate::superfunction`]).

use num::rational::BigRational;
use num::bigint::BigInt;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::scalars::GaussianRational;
use crate::{Error, Result};

/// Subset of {1..q} as a bitmask; bit i-1 set means theta_i present.
pub type ThetaSet = u32;

pub fn theta_set_len(s: ThetaSet) -> usize {
    s.count_ones() as usize
}

/// Sign of reordering theta_{S1} theta_{S2} into ascending theta_{S1 | S2}.
/// Zero overlap is the caller's responsibility.
pub fn merge_sign(s1: ThetaSet, s2: ThetaSet) -> i32 {
    // count pairs (i in s1, j in s2) with j < i
    let mut inversions = 0u32;
    let mut j = s2;
    while j != 0 {
        let low = j & j.wrapping_neg();
        // elements of s1 strictly above this bit
        let above = s1 & !(low | (low - 1));
        inversions += above.count_ones();
        j &= j - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A finite-dimensional local supercommutative algebra over Q(i), given by a
/// graded monomial basis (with 1 first) and a structure-constant table.
#[derive(Debug, Clone)]
pub struct BaseAlgebra {
    /// Display names of the basis monomials; entry 0 is "1".
    pub basis_names: Vec<String>,
    /// Parity of each basis monomial (0 even, 1 odd).
    pub parity: Vec<u8>,
    /// table[i][j] lists the product basis_i * basis_j as (index, coeff) pairs.
    pub table: Vec<Vec<Vec<(usize, GaussianRational)>>>,
    /// Generator names, each resolving to a basis index.
    pub generators: Vec<(String, usize)>,
}

impl BaseAlgebra {
    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    /// The trivial base, B = C (here Q(i)).
    pub fn scalars() -> Arc<Self> {
        Self::grassmann(0)
    }

    /// Grassmann algebra on m odd generators beta1..betam.
    pub fn grassmann(m: usize) -> Arc<Self> {
        assert!(m <= 16);
        let n = 1usize << m;
        let name_of = |s: usize| -> String {
            if s == 0 {
                "1".to_string()
            } else {
                (0..m)
                    .filter(|i| s & (1 << i) != 0)
                    .map(|i| format!("beta{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("*")
            }
        };
        let basis_names: Vec<String> = (0..n).map(name_of).collect();
        let parity: Vec<u8> = (0..n).map(|s| (s.count_ones() % 2) as u8).collect();
        let mut table = vec![vec![Vec::new(); n]; n];
        for a in 0..n {
            for b in 0..n {
                if a & b != 0 {
                    continue;
                }
                let sign = merge_sign(a as u32, b as u32);
                table[a][b].push((a | b, GaussianRational::from_int(sign as i64)));
            }
        }
        let generators = (0..m)
            .map(|i| (format!("beta{}", i + 1), 1usize << i))
            .collect();
        Arc::new(BaseAlgebra {
            basis_names,
            parity,
            table,
            generators,
        })
    }

    /// Truncated even polynomial algebra C[eps]/(eps^k), k >= 1.
    pub fn even_truncated(k: usize) -> Arc<Self> {
        assert!(k >= 1);
        let basis_names: Vec<String> = (0..k)
            .map(|j| match j {
                0 => "1".to_string(),
                1 => "eps".to_string(),
                _ => format!("eps^{}", j),
            })
            .collect();
        let parity = vec![0u8; k];
        let mut table = vec![vec![Vec::new(); k]; k];
        for a in 0..k {
            for b in 0..k {
                if a + b < k {
                    table[a][b].push((a + b, GaussianRational::one()));
                }
            }
        }
        let generators = if k > 1 {
            vec![("eps".to_string(), 1usize)]
        } else {
            Vec::new()
        };
        Arc::new(BaseAlgebra {
            basis_names,
            parity,
            table,
            generators,
        })
    }

    /// Graded tensor product of two presets. Generator names must not clash.
    pub fn tensor(a: &BaseAlgebra, b: &BaseAlgebra) -> Result<Arc<Self>> {
        let (da, db) = (a.dim(), b.dim());
        let n = da * db;
        let idx = |i: usize, j: usize| i * db + j;
        let mut basis_names = Vec::with_capacity(n);
        let mut parity = Vec::with_capacity(n);
        for i in 0..da {
            for j in 0..db {
                let name = match (i, j) {
                    (0, 0) => "1".to_string(),
                    (_, 0) => a.basis_names[i].clone(),
                    (0, _) => b.basis_names[j].clone(),
                    _ => format!("{}*{}", a.basis_names[i], b.basis_names[j]),
                };
                basis_names.push(name);
                parity.push((a.parity[i] + b.parity[j]) % 2);
            }
        }
        let mut table = vec![vec![Vec::new(); n]; n];
        for i1 in 0..da {
            for j1 in 0..db {
                for i2 in 0..da {
                    for j2 in 0..db {
                        // (x1 (x) y1)(x2 (x) y2) = (-1)^{|y1||x2|} x1x2 (x) y1y2
                        let sign = if b.parity[j1] == 1 && a.parity[i2] == 1 {
                            -1i64
                        } else {
                            1
                        };
                        let mut terms = Vec::new();
                        for (ka, ca) in &a.table[i1][i2] {
                            for (kb, cb) in &b.table[j1][j2] {
                                let c = &(ca * cb) * &GaussianRational::from_int(sign);
                                terms.push((idx(*ka, *kb), c));
                            }
                        }
                        table[idx(i1, j1)][idx(i2, j2)] = terms;
                    }
                }
            }
        }
        let mut generators: Vec<(String, usize)> = Vec::new();
        for (name, i) in &a.generators {
            generators.push((name.clone(), idx(*i, 0)));
        }
        for (name, j) in &b.generators {
            if generators.iter().any(|(n2, _)| n2 == name) {
                return Err(Error::InvalidBaseAlgebra(format!(
                    "generator name clash: {name}"
                )));
            }
            generators.push((name.clone(), idx(0, *j)));
        }
        let out = BaseAlgebra {
            basis_names,
            parity,
            table,
            generators,
        };
        out.validate()?;
        Ok(Arc::new(out))
    }

    /// Check associativity, unitality, supercommutativity, and locality
    /// (all non-unit basis elements span a nilpotent ideal).
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || self.basis_names[0] != "1" {
            return Err(Error::InvalidBaseAlgebra("basis must start with 1".into()));
        }
        let one = |i: usize| -> Vec<(usize, GaussianRational)> {
            vec![(i, GaussianRational::one())]
        };
        let combo_eq = |x: &Vec<(usize, GaussianRational)>, y: &Vec<(usize, GaussianRational)>| {
            let mut vx = vec![GaussianRational::zero(); n];
            let mut vy = vec![GaussianRational::zero(); n];
            for (k, c) in x {
                vx[*k] = &vx[*k] + c;
            }
            for (k, c) in y {
                vy[*k] = &vy[*k] + c;
            }
            vx == vy
        };
        let mul_combo = |x: &Vec<(usize, GaussianRational)>, j: usize| {
            let mut out: Vec<(usize, GaussianRational)> = Vec::new();
            for (k, c) in x {
                for (k2, c2) in &self.table[*k][j] {
                    out.push((*k2, c * c2));
                }
            }
            out
        };
        for i in 0..n {
            if !combo_eq(&self.table[0][i], &one(i)) || !combo_eq(&self.table[i][0], &one(i)) {
                return Err(Error::InvalidBaseAlgebra("1 is not a unit".into()));
            }
            for j in 0..n {
                // supercommutativity on the table
                let sign = if self.parity[i] == 1 && self.parity[j] == 1 {
                    -1i64
                } else {
                    1
                };
                let flipped: Vec<(usize, GaussianRational)> = self.table[j][i]
                    .iter()
                    .map(|(k, c)| (*k, c * &GaussianRational::from_int(sign)))
                    .collect();
                if !combo_eq(&self.table[i][j], &flipped) {
                    return Err(Error::InvalidBaseAlgebra(format!(
                        "not supercommutative at ({i},{j})"
                    )));
                }
                for k in 0..n {
                    let left = mul_combo(&self.table[i][j], k);
                    let mut right: Vec<(usize, GaussianRational)> = Vec::new();
                    for (m, c) in &self.table[j][k] {
                        for (m2, c2) in &self.table[i][*m] {
                            right.push((*m2, c * c2));
                        }
                    }
                    if !combo_eq(&left, &right) {
                        return Err(Error::InvalidBaseAlgebra(format!(
                            "not associative at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        // locality: power the span of non-unit basis elements until it vanishes
        let mut span: Vec<Vec<GaussianRational>> = (1..n)
            .map(|i| {
                let mut v = vec![GaussianRational::zero(); n];
                v[i] = GaussianRational::one();
                v
            })
            .collect();
        for _ in 0..=n {
            if span.is_empty() {
                return Ok(());
            }
            let mut next: Vec<Vec<GaussianRational>> = Vec::new();
            for v in &span {
                for j in 1..n {
                    let mut w = vec![GaussianRational::zero(); n];
                    for (i, c) in v.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (k, c2) in &self.table[i][j] {
                            w[*k] = &w[*k] + &(c * c2);
                        }
                    }
                    if w.iter().any(|c| !c.is_zero()) {
                        next.push(w);
                    }
                }
            }
            span = row_reduce_basis(next);
        }
        Err(Error::InvalidBaseAlgebra(
            "non-unit basis elements are not nilpotent (algebra is not local)".into(),
        ))
    }
}

/// Row-reduce a list of coefficient vectors, returning an independent basis.
fn row_reduce_basis(mut rows: Vec<Vec<GaussianRational>>) -> Vec<Vec<GaussianRational>> {
    let mut out: Vec<Vec<GaussianRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    'rows: for row in rows.iter_mut() {
        for (p, pivot_row) in pivots.iter().zip(out.iter()) {
            let c = row[*p].clone();
            if !c.is_zero() {
                for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                    *x = &*x - &(&c * y);
                }
            }
        }
        if let Some(p) = row.iter().position(|c| !c.is_zero()) {
            let inv = row[p].inv().unwrap();
            for x in row.iter_mut() {
                *x = &*x * &inv;
            }
            pivots.push(p);
            out.push(row.clone());
            continue 'rows;
        }
    }
    out
}

/// Coefficient ring abstraction shared by Lambda constants and rational
/// superfunctions.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn from_scalar(c: &GaussianRational) -> Self;
    /// Multiplicative inverse in the coefficient field.
    fn inv(&self) -> Result<Self>;
}

impl Coeff for GaussianRational {
    fn zero() -> Self {
        GaussianRational::zero()
    }
    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn from_scalar(c: &GaussianRational) -> Self {
        c.clone()
    }
    fn inv(&self) -> Result<Self> {
        GaussianRational::inv(self)
    }
}

/// A graded element: map from (B-basis monomial, theta subset) to coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Graded<C: Coeff> {
    pub terms: BTreeMap<(usize, ThetaSet), C>,
}

impl<C: Coeff> Default for Graded<C> {
    fn default() -> Self {
        Graded {
            terms: BTreeMap::new(),
        }
    }
}

impl<C: Coeff> Graded<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn term(b: usize, s: ThetaSet, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((b, s), c);
        }
        Graded { terms }
    }

    pub fn insert(&mut self, b: usize, s: ThetaSet, c: C) {
        let slot = self.terms.entry((b, s)).or_insert_with(C::zero);
        *slot = slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&(b, s));
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Graded<D> {
        let mut out = Graded::zero();
        for ((b, s), c) in &self.terms {
            out.insert(*b, *s, f(c));
        }
        out
    }

    pub fn get(&self, b: usize, s: ThetaSet) -> C {
        self.terms.get(&(b, s)).cloned().unwrap_or_else(C::zero)
    }
}

/// An element of Lambda[B,q] with constant (scalar) coefficients.
pub type SuperElement = Graded<GaussianRational>;

/// The ring Lambda[B,q] together with its theta operations. Immutable after
/// construction; share via clone (the base is behind an Arc).
#[derive(Debug, Clone)]
pub struct Lambda {
    pub base: Arc<BaseAlgebra>,
    pub q: usize,
}

impl Lambda {
    pub fn new(base: Arc<BaseAlgebra>, q: usize) -> Self {
        assert!(q <= 31);
        Lambda { base, q }
    }

    pub fn one<C: Coeff>(&self) -> Graded<C> {
        Graded::term(0, 0, C::from_scalar(&GaussianRational::one()))
    }

    pub fn scalar<C: Coeff>(&self, c: &GaussianRational) -> Graded<C> {
        Graded::term(0, 0, C::from_scalar(c))
    }

    pub fn theta<C: Coeff>(&self, i: usize) -> Graded<C> {
        assert!(i >= 1 && i <= self.q);
        Graded::term(0, 1 << (i - 1), C::from_scalar(&GaussianRational::one()))
    }

    /// Basis monomial b_k of B as an element.
    pub fn base_monomial<C: Coeff>(&self, k: usize) -> Graded<C> {
        Graded::term(k, 0, C::from_scalar(&GaussianRational::one()))
    }

    pub fn generator<C: Coeff>(&self, name: &str) -> Option<Graded<C>> {
        self.base
            .generators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| self.base_monomial(*k))
    }

    /// Parity of a term (basis monomial, theta subset).
    pub fn term_parity(&self, b: usize, s: ThetaSet) -> u8 {
        ((self.base.parity[b] as usize + theta_set_len(s)) % 2) as u8
    }

    /// Some(parity) if homogeneous (or zero, reported as even), None if mixed.
    pub fn parity<C: Coeff>(&self, a: &Graded<C>) -> Option<u8> {
        let mut p: Option<u8> = None;
        for ((b, s), c) in &a.terms {
            if c.is_zero() {
                continue;
            }
            let tp = self.term_parity(*b, *s);
            match p {
                None => p = Some(tp),
                Some(prev) if prev != tp => return None,
                _ => {}
            }
        }
        Some(p.unwrap_or(0))
    }

    pub fn is_even<C: Coeff>(&self, a: &Graded<C>) -> bool {
        self.parity(a) == Some(0)
    }

    pub fn add<C: Coeff>(&self, a: &Graded<C>, b: &Graded<C>) -> Graded<C> {
        let mut out = a.clone();
        for ((bb, s), c) in &b.terms {
            out.insert(*bb, *s, c.clone());
        }
        out
    }

    pub fn sub<C: Coeff>(&self, a: &Graded<C>, b: &Graded<C>) -> Graded<C> {
        self.add(a, &self.neg(b))
    }

    pub fn neg<C: Coeff>(&self, a: &Graded<C>) -> Graded<C> {
        a.map_coeffs(|c| c.neg())
    }

    pub fn scale<C: Coeff>(&self, a: &Graded<C>, c: &C) -> Graded<C> {
        a.map_coeffs(|x| x.mul(c))
    }

    /// Supercommutative product with Koszul signs.
    pub fn mul<C: Coeff>(&self, a: &Graded<C>, b: &Graded<C>) -> Graded<C> {
        let mut out = Graded::zero();
        for ((b1, s1), c1) in &a.terms {
            for ((b2, s2), c2) in &b.terms {
                if s1 & s2 != 0 {
                    continue;
                }
                // move the B-monomial b2 past theta_{s1}
                let mut sign = if self.base.parity[*b2] == 1 && theta_set_len(*s1) % 2 == 1 {
                    -1i64
                } else {
                    1
                };
                sign *= merge_sign(*s1, *s2) as i64;
                let c = c1.mul(c2);
                for (k, cb) in &self.base.table[*b1][*b2] {
                    let coeff = c
                        .mul(&C::from_scalar(cb))
                        .mul(&C::from_scalar(&GaussianRational::from_int(sign)));
                    out.insert(*k, s1 | s2, coeff);
                }
            }
        }
        out
    }

    /// Left derivative with respect to theta_i.
    pub fn theta_derivative<C: Coeff>(&self, a: &Graded<C>, i: usize) -> Result<Graded<C>> {
        if i < 1 || i > self.q {
            return Err(Error::ThetaIndexOutOfRange(i, self.q));
        }
        let bit = 1u32 << (i - 1);
        let mut out = Graded::zero();
        for ((b, s), c) in &a.terms {
            if s & bit == 0 {
                continue;
            }
            // position of i in ascending order within s
            let below = (s & (bit - 1)).count_ones();
            let mut sign = if below % 2 == 0 { 1i64 } else { -1 };
            // pass the derivation over the B-monomial
            if self.base.parity[*b] == 1 {
                sign = -sign;
            }
            out.insert(
                *b,
                s & !bit,
                c.mul(&C::from_scalar(&GaussianRational::from_int(sign))),
            );
        }
        Ok(out)
    }

    /// Apply theta_1, then theta_2, ..., then theta_q derivative; the result
    /// has empty theta support.
    pub fn berezin_top<C: Coeff>(&self, a: &Graded<C>) -> Graded<C> {
        let mut out = a.clone();
        for i in 1..=self.q {
            out = self.theta_derivative(&out, i).unwrap();
        }
        out.terms.retain(|(_, s), _| *s == 0);
        out
    }

    /// Image modulo the nilpotents of B and (theta_1..theta_q).
    pub fn reduce(&self, a: &SuperElement) -> GaussianRational {
        a.get(0, 0)
    }

    /// Inverse of an even unit (even, reduced component invertible in the
    /// coefficient field), by the terminating geometric series over the
    /// nilpotent part.
    pub fn invert_even<C: Coeff>(&self, a: &Graded<C>) -> Result<Graded<C>> {
        if !self.is_even(a) {
            return Err(Error::NotAUnit(format!("{a:?} is not even")));
        }
        let c = a.get(0, 0);
        if c.is_zero() {
            return Err(Error::NotAUnit(
                "reduction modulo nilpotents vanishes".into(),
            ));
        }
        let cinv = c.inv()?;
        // a = c (1 + nu); a^-1 = c^-1 sum (-nu)^k
        let nu = self.sub(&self.scale(a, &cinv), &self.one());
        let mut acc = self.one();
        let mut pw = self.one::<C>();
        loop {
            pw = self.neg(&self.mul(&pw, &nu));
            if pw.is_zero() {
                break;
            }
            acc = self.add(&acc, &pw);
        }
        Ok(self.scale(&acc, &cinv))
    }

    /// Inverse of an even unit of Lambda[B,q].
    pub fn invert_unit(&self, a: &SuperElement) -> Result<SuperElement> {
        self.invert_even(a)
    }

    /// Dimension of the full scalar basis of Lambda over the scalars.
    pub fn scalar_dim(&self) -> usize {
        self.base.dim() << self.q
    }
}

/// Convenience: rational literal.
pub fn qi(n: i64, d: i64) -> GaussianRational {
    GaussianRational::new(
        BigRational::new(BigInt::from(n), BigInt::from(d)),
        BigRational::from_integer(BigInt::from(0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(m: usize, q: usize) -> Lambda {
        Lambda::new(BaseAlgebra::grassmann(m), q)
    }

    #[test]
    fn presets_validate() {
        BaseAlgebra::grassmann(2).validate().unwrap();
        BaseAlgebra::even_truncated(3).validate().unwrap();
        let t = BaseAlgebra::tensor(&BaseAlgebra::grassmann(1), &BaseAlgebra::even_truncated(2))
            .unwrap();
        t.validate().unwrap();
    }

    #[test]
    fn odd_square_vanishes() {
        let l = lam(0, 2);
        let t1: SuperElement = l.theta(1);
        assert!(l.mul(&t1, &t1).is_zero());
    }

    #[test]
    fn theta_sign_rule() {
        let l = lam(0, 2);
        let t1: SuperElement = l.theta(1);
        let t2: SuperElement = l.theta(2);
        assert_eq!(l.mul(&t1, &t2), l.neg(&l.mul(&t2, &t1)));
    }

    #[test]
    fn grassmann_unit_product() {
        // (1 + beta theta1)(1 - beta theta1) = 1 over B = C[beta]
        let l = lam(1, 1);
        let beta: SuperElement = l.generator("beta1").unwrap();
        let bt = l.mul(&beta, &l.theta(1));
        let a = l.add(&l.one(), &bt);
        let b = l.sub(&l.one(), &bt);
        // brute-force expansion oracle: expand all four cross terms directly
        let expanded = l.add(
            &l.sub(&l.mul(&l.one(), &l.one()), &l.mul(&l.one(), &bt)),
            &l.sub(&l.mul(&bt, &l.one()), &l.mul(&bt, &bt)),
        );
        assert_eq!(l.mul(&a, &b), expanded);
        assert_eq!(l.mul(&a, &b), l.one());
    }

    #[test]
    fn invert_unit_examples() {
        let l = lam(0, 2);
        assert_eq!(l.invert_unit(&l.one()).unwrap(), l.one());
        // invert 2 + theta1 theta2 -> 1/2 - theta1 theta2 / 4
        let tt = l.mul::<GaussianRational>(&l.theta(1), &l.theta(2));
        let a = l.add(&l.scalar(&qi(2, 1)), &tt);
        let inv = l.invert_unit(&a).unwrap();
        let expect = l.add(&l.scalar(&qi(1, 2)), &l.scale(&tt, &qi(-1, 4)));
        assert_eq!(inv, expect);
        assert_eq!(l.mul(&a, &inv), l.one());
        // nilpotent input errors
        assert!(l.invert_unit(&tt).is_err());
    }

    #[test]
    fn theta_derivative_examples() {
        let l = lam(0, 2);
        let t1: SuperElement = l.theta(1);
        let t2: SuperElement = l.theta(2);
        assert_eq!(l.theta_derivative(&t1, 1).unwrap(), l.one());
        // d/dtheta1 (theta2 theta1) = -theta2
        let t21 = l.mul(&t2, &t1);
        assert_eq!(l.theta_derivative(&t21, 1).unwrap(), l.neg(&t2));
        assert!(l.theta_derivative(&l.one::<GaussianRational>(), 1).unwrap().is_zero());
        assert!(l.theta_derivative(&t1, 3).is_err());
    }

    #[test]
    fn theta_derivative_leibniz_oracle() {
        // d(ab) = d(a) b + (-1)^{|a|} a d(b) on random monomial pairs
        let l = lam(1, 2);
        let monoms: Vec<SuperElement> = {
            let mut v = Vec::new();
            for b in 0..l.base.dim() {
                for s in 0..(1u32 << l.q) {
                    v.push(Graded::term(b, s, GaussianRational::one()));
                }
            }
            v
        };
        for a in &monoms {
            for b in &monoms {
                let pa = l.parity(a).unwrap();
                for i in 1..=l.q {
                    let lhs = l.theta_derivative(&l.mul(a, b), i).unwrap();
                    let mut rhs = l.mul(&l.theta_derivative(a, i).unwrap(), b);
                    let t = l.mul(a, &l.theta_derivative(b, i).unwrap());
                    rhs = if pa == 1 {
                        l.sub(&rhs, &t)
                    } else {
                        l.add(&rhs, &t)
                    };
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn theta_derivative_squares_to_zero() {
        let l = lam(1, 3);
        let mut a: SuperElement = l.one();
        for b in 0..l.base.dim() {
            for s in 0..(1u32 << l.q) {
                a.insert(b, s, qi(b as i64 + 1, (s as i64) + 2));
            }
        }
        for i in 1..=l.q {
            let d2 = l
                .theta_derivative(&l.theta_derivative(&a, i).unwrap(), i)
                .unwrap();
            assert!(d2.is_zero());
        }
    }

    #[test]
    fn berezin_top_examples() {
        // q = 2: top monomial maps to 1, constants to 0
        let l = lam(1, 2);
        let top = l.mul::<GaussianRational>(&l.theta(1), &l.theta(2));
        assert_eq!(l.berezin_top(&top), l.one());
        assert!(l.berezin_top(&l.one::<GaussianRational>()).is_zero());
        // beta + beta theta2 theta1 -> -beta  (sign oracle: theta2 theta1 = -theta1 theta2)
        let beta: SuperElement = l.generator("beta1").unwrap();
        let t21 = l.mul::<GaussianRational>(&l.theta(2), &l.theta(1));
        let a = l.add(&beta, &l.mul(&beta, &t21));
        assert_eq!(l.berezin_top(&a), l.neg(&beta));
    }

    #[test]
    fn reduce_examples() {
        let l = lam(1, 2);
        let beta: SuperElement = l.generator("beta1").unwrap();
        let a = l.add(&l.scalar(&qi(5, 1)), &l.mul(&beta, &l.theta(1)));
        assert_eq!(l.reduce(&a), qi(5, 1));
        let tt = l.mul::<GaussianRational>(&l.theta(1), &l.theta(2));
        assert!(l.reduce(&tt).is_zero());
        let le = Lambda::new(BaseAlgebra::even_truncated(2), 1);
        let eps: SuperElement = le.generator("eps").unwrap();
        assert_eq!(le.reduce(&le.add(&le.one(), &eps)), qi(1, 1));
    }

    #[test]
    fn supercommutativity_on_random_pairs() {
        let l = lam(2, 2);
        // pseudo-random homogeneous elements from a fixed seed
        let mut state = 1234567u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 7) as i64 - 3
        };
        for _ in 0..20 {
            for target_parity in 0..2u8 {
                let mut a: SuperElement = Graded::zero();
                let mut b: SuperElement = Graded::zero();
                for bb in 0..l.base.dim() {
                    for s in 0..(1u32 << l.q) {
                        if l.term_parity(bb, s) == target_parity {
                            a.insert(bb, s, qi(next(), 1));
                        }
                        if l.term_parity(bb, s) == 0 {
                            b.insert(bb, s, qi(next(), 1));
                        }
                    }
                }
                let pa = l.parity(&a).unwrap();
                let pb = l.parity(&b).unwrap();
                let sign = if pa == 1 && pb == 1 { -1 } else { 1 };
                let rhs = l.scale(&l.mul(&b, &a), &qi(sign, 1));
                assert_eq!(l.mul(&a, &b), rhs);
            }
        }
    }

    #[test]
    fn berezin_pairing_is_signed_permutation() {
        // Gram matrix of <a,b> = berezin_top(a b) on the theta-monomial basis
        for q in 1..=3usize {
            let l = lam(0, q);
            let n = 1u32 << q;
            let mut seen_cols = std::collections::BTreeSet::new();
            for s1 in 0..n {
                let mut nonzero = 0;
                for s2 in 0..n {
                    let a: SuperElement = Graded::term(0, s1, GaussianRational::one());
                    let b: SuperElement = Graded::term(0, s2, GaussianRational::one());
                    let v = l.reduce(&l.berezin_top(&l.mul(&a, &b)));
                    if !v.is_zero() {
                        nonzero += 1;
                        assert!(v == qi(1, 1) || v == qi(-1, 1));
                        seen_cols.insert(s2);
                    }
                }
                assert_eq!(nonzero, 1, "row {s1} must have exactly one entry");
            }
            assert_eq!(seen_cols.len(), n as usize);
        }
    }
}

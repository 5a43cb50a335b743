//! Exact linear algebra: scalar row reduction over Q(i), determinants and
//! Berezinians of supermatrices over the even part of Lambda-coefficient
//! rings, and finitely generated B-modules presented by scalar bases with
//! B-action (the engine behind H^0 and H^1).

use crate::scalars::GaussianRational;
use crate::superalgebra::{Coeff, Graded, Lambda};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// scalar linear algebra over Q(i)
// ---------------------------------------------------------------------------

/// Dense row-major matrix over Q(i).
pub type ScalarMatrix = Vec<Vec<GaussianRational>>;

/// Reduced row echelon form; returns (rows without zero rows, pivot columns).
pub fn rref(rows: &[Vec<GaussianRational>]) -> (ScalarMatrix, Vec<usize>) {
    let mut out: ScalarMatrix = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        for (p, pr) in pivots.iter().zip(out.iter()) {
            let c = r[*p].clone();
            if !c.is_zero() {
                for (x, y) in r.iter_mut().zip(pr.iter()) {
                    *x = &*x - &(&c * y);
                }
            }
        }
        if let Some(p) = r.iter().position(|c| !c.is_zero()) {
            let inv = r[p].inv().unwrap();
            for x in r.iter_mut() {
                *x = &*x * &inv;
            }
            // back-substitute into existing rows
            for pr in out.iter_mut() {
                let c = pr[p].clone();
                if !c.is_zero() {
                    for (x, y) in pr.iter_mut().zip(r.iter()) {
                        *x = &*x - &(&c * y);
                    }
                }
            }
            pivots.push(p);
            out.push(r);
        }
    }
    // keep pivot order sorted for determinism
    let mut idx: Vec<usize> = (0..pivots.len()).collect();
    idx.sort_by_key(|i| pivots[*i]);
    let out = idx.iter().map(|i| out[*i].clone()).collect();
    let mut pivots2: Vec<usize> = idx.iter().map(|i| pivots[*i]).collect();
    pivots2.sort();
    (out, pivots2)
}

pub fn rank(rows: &[Vec<GaussianRational>]) -> usize {
    rref(rows).0.len()
}

/// Reduce `v` against rows already in reduced echelon form (row i has pivot
/// column `pivots[i]` and vanishes at the other pivots); returns the
/// remainder and the coefficient used at each pivot row.
fn reduce_against(
    rows: &[Vec<GaussianRational>],
    pivots: &[usize],
    v: &[GaussianRational],
) -> (Vec<GaussianRational>, Vec<GaussianRational>) {
    let mut r = v.to_vec();
    let mut coeffs = Vec::with_capacity(rows.len());
    for (row, p) in rows.iter().zip(pivots.iter()) {
        let c = r[*p].clone();
        if !c.is_zero() {
            for (x, y) in r.iter_mut().zip(row.iter()) {
                if !y.is_zero() {
                    *x = &*x - &(&c * y);
                }
            }
        }
        coeffs.push(c);
    }
    (r, coeffs)
}

/// Basis of {x : M x = 0}, where rows of `m` are the equations over `ncols`
/// unknowns.
pub fn kernel_basis(m: &[Vec<GaussianRational>], ncols: usize) -> ScalarMatrix {
    let (r, pivots) = rref(m);
    let mut out = Vec::new();
    for free in 0..ncols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![GaussianRational::zero(); ncols];
        v[free] = GaussianRational::one();
        for (row, p) in r.iter().zip(pivots.iter()) {
            v[*p] = -&row[free];
        }
        out.push(v);
    }
    out
}

/// One solution of M x = b, if consistent.
pub fn solve(m: &[Vec<GaussianRational>], b: &[GaussianRational]) -> Option<Vec<GaussianRational>> {
    let ncols = m.first().map_or(0, |r| r.len());
    let aug: ScalarMatrix = m
        .iter()
        .zip(b.iter())
        .map(|(row, c)| {
            let mut r = row.clone();
            r.push(c.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&ncols) {
        return None; // pivot in the augmented column: inconsistent
    }
    let mut x = vec![GaussianRational::zero(); ncols];
    for (row, p) in r.iter().zip(pivots.iter()) {
        x[*p] = row[ncols].clone();
    }
    Some(x)
}

/// Express `v` in the span of `basis` (not necessarily reduced); coordinates
/// if possible.
pub fn coordinates_in_span(
    basis: &[Vec<GaussianRational>],
    v: &[GaussianRational],
) -> Option<Vec<GaussianRational>> {
    if basis.is_empty() {
        return if v.iter().all(|c| c.is_zero()) {
            Some(Vec::new())
        } else {
            None
        };
    }
    // solve basis^T x = v
    let n = v.len();
    let m: ScalarMatrix = (0..n)
        .map(|j| basis.iter().map(|row| row[j].clone()).collect())
        .collect();
    solve(&m, v)
}

pub fn mat_mul(a: &[Vec<GaussianRational>], b: &[Vec<GaussianRational>]) -> ScalarMatrix {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = GaussianRational::zero();
                    for (c, brow) in row.iter().zip(b.iter()) {
                        acc = &acc + &(c * &brow[j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<GaussianRational>], v: &[GaussianRational]) -> Vec<GaussianRational> {
    a.iter()
        .map(|row| {
            let mut acc = GaussianRational::zero();
            for (c, x) in row.iter().zip(v.iter()) {
                acc = &acc + &(c * x);
            }
            acc
        })
        .collect()
}

pub fn identity_matrix(n: usize) -> ScalarMatrix {
    (0..n)
        .map(|i| {
            let mut r = vec![GaussianRational::zero(); n];
            r[i] = GaussianRational::one();
            r
        })
        .collect()
}

// ---------------------------------------------------------------------------
// determinants and Berezinians over the even subring
// ---------------------------------------------------------------------------

/// Determinant of a square matrix of even elements over the commutative even
/// subring: cofactor expansion for small sizes, the division-free Berkowitz
/// method beyond. (Fraction-free Bareiss is not applicable here: the even
/// subring has zero divisors, so its exact divisions are undefined.)
pub fn det_even<C: Coeff>(l: &Lambda, m: &[Vec<Graded<C>>]) -> Result<Graded<C>> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::Precondition("determinant of non-square matrix".into()));
        }
        for e in row {
            if !l.is_even(e) {
                return Err(Error::NotAUnit(format!("non-even determinant entry {e:?}")));
            }
        }
    }
    if n == 0 {
        return Ok(l.one());
    }
    if n <= 4 {
        Ok(det_cofactor(l, m))
    } else {
        Ok(det_berkowitz(l, m))
    }
}

fn det_cofactor<C: Coeff>(l: &Lambda, m: &[Vec<Graded<C>>]) -> Graded<C> {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc: Graded<C> = Graded::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Graded<C>>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = l.mul(&m[0][j], &det_cofactor(l, &minor));
        if j % 2 == 0 {
            acc = l.add(&acc, &term);
        } else {
            acc = l.sub(&acc, &term);
        }
    }
    acc
}

/// Division-free determinant via the Berkowitz characteristic-polynomial
/// recursion; valid over any commutative ring.
fn det_berkowitz<C: Coeff>(l: &Lambda, m: &[Vec<Graded<C>>]) -> Graded<C> {
    let n = m.len();
    // v holds the characteristic polynomial coefficients of the leading r x r
    // principal submatrix, highest degree first, length r + 1
    let mut v: Vec<Graded<C>> = vec![l.one()];
    for r in 1..=n {
        // column vector c = [1, -a_rr, -q_0, ..., -q_{r-2}] where
        // q_k = Row . M^k . Col over the (r-1)-sized leading block
        let mut col: Vec<Graded<C>> = Vec::with_capacity(r + 1);
        col.push(l.one());
        col.push(l.neg(&m[r - 1][r - 1]));
        if r >= 2 {
            // w starts as Col; iterate w <- M w, taking Row . w each time
            let mut w: Vec<Graded<C>> = (0..r - 1).map(|i| m[i][r - 1].clone()).collect();
            for _ in 0..r - 1 {
                let mut dot: Graded<C> = Graded::zero();
                for (j, wj) in w.iter().enumerate() {
                    dot = l.add(&dot, &l.mul(&m[r - 1][j], wj));
                }
                col.push(l.neg(&dot));
                let mut w2: Vec<Graded<C>> = Vec::with_capacity(r - 1);
                for i in 0..r - 1 {
                    let mut acc: Graded<C> = Graded::zero();
                    for (j, wj) in w.iter().enumerate() {
                        acc = l.add(&acc, &l.mul(&m[i][j], wj));
                    }
                    w2.push(acc);
                }
                w = w2;
            }
            col.truncate(r + 1);
        }
        // v_new = T v with T the lower-triangular Toeplitz matrix of `col`
        let mut v2: Vec<Graded<C>> = Vec::with_capacity(r + 1);
        for i in 0..=r {
            let mut acc: Graded<C> = Graded::zero();
            for (j, vj) in v.iter().enumerate() {
                if i >= j && i - j < col.len() {
                    acc = l.add(&acc, &l.mul(&col[i - j], vj));
                }
            }
            v2.push(acc);
        }
        v = v2;
    }
    // char poly p(t) = det(tI - A); det(A) = (-1)^n p(0)
    let c = v[n].clone();
    if n % 2 == 0 {
        c
    } else {
        l.neg(&c)
    }
}

/// Inverse of a square matrix of even elements whose determinant is an even
/// unit, via the adjugate.
pub fn invert_even_matrix<C: Coeff>(
    l: &Lambda,
    m: &[Vec<Graded<C>>],
) -> Result<Vec<Vec<Graded<C>>>> {
    let n = m.len();
    let det = det_even(l, m)?;
    let det_inv = l.invert_even(&det)?;
    let mut out = vec![vec![Graded::<C>::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji for the (i,j) entry of the inverse
            let minor: Vec<Vec<Graded<C>>> = (0..n)
                .filter(|r| *r != j)
                .map(|r| {
                    (0..n)
                        .filter(|c| *c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = if minor.is_empty() {
                l.one()
            } else {
                det_cofactor(l, &minor)
            };
            if (i + j) % 2 == 1 {
                cof = l.neg(&cof);
            }
            out[i][j] = l.mul(&cof, &det_inv);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// supermatrices
// ---------------------------------------------------------------------------

/// A (p|q)-square supermatrix over Lambda-coefficients: block A is p x p with
/// even entries, D is q x q with even entries, and the off-diagonal blocks
/// B, C carry odd entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix<C: Coeff> {
    pub p: usize,
    pub q: usize,
    /// Full (p+q) x (p+q) grid, even rows/columns first.
    pub rows: Vec<Vec<Graded<C>>>,
}

impl<C: Coeff> SuperMatrix<C> {
    pub fn new(l: &Lambda, p: usize, q: usize, rows: Vec<Vec<Graded<C>>>) -> Result<Self> {
        let n = p + q;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("supermatrix shape mismatch".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let want = if (i < p) == (j < p) { 0 } else { 1 };
                match l.parity(e) {
                    Some(par) if par == want => {}
                    _ => return Err(Error::ParityViolation(i, j)),
                }
            }
        }
        Ok(SuperMatrix { p, q, rows })
    }

    pub fn identity(l: &Lambda, p: usize, q: usize) -> Self {
        let n = p + q;
        let mut rows = vec![vec![Graded::<C>::zero(); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = l.one();
        }
        SuperMatrix { p, q, rows }
    }

    pub fn mul(&self, l: &Lambda, o: &SuperMatrix<C>) -> SuperMatrix<C> {
        assert_eq!(self.p, o.p);
        assert_eq!(self.q, o.q);
        let n = self.p + self.q;
        let mut rows = vec![vec![Graded::<C>::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: Graded<C> = Graded::zero();
                for k in 0..n {
                    acc = l.add(&acc, &l.mul(&self.rows[i][k], &o.rows[k][j]));
                }
                rows[i][j] = acc;
            }
        }
        SuperMatrix {
            p: self.p,
            q: self.q,
            rows,
        }
    }

    fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Vec<Vec<Graded<C>>> {
        (r0..r1)
            .map(|i| (c0..c1).map(|j| self.rows[i][j].clone()).collect())
            .collect()
    }

    /// Ber(M) = det(A - B D^{-1} C) det(D)^{-1}.
    pub fn berezinian(&self, l: &Lambda) -> Result<Graded<C>> {
        let (p, q) = (self.p, self.q);
        let n = p + q;
        let a = self.block(0, p, 0, p);
        let b = self.block(0, p, p, n);
        let c = self.block(p, n, 0, p);
        let d = self.block(p, n, p, n);
        if q == 0 {
            return det_even(l, &a);
        }
        let det_d = det_even(l, &d)?;
        let det_d_inv = l.invert_even(&det_d).map_err(|_| Error::SingularOddBlock)?;
        if p == 0 {
            return Ok(det_d_inv);
        }
        let d_inv = invert_even_matrix(l, &d).map_err(|_| Error::SingularOddBlock)?;
        // schur = A - B D^{-1} C  (entries even: odd * even * odd)
        let mut schur = a;
        for i in 0..p {
            for j in 0..p {
                let mut acc: Graded<C> = Graded::zero();
                for s in 0..q {
                    for t in 0..q {
                        acc = l.add(&acc, &l.mul(&b[i][s], &l.mul(&d_inv[s][t], &c[t][j])));
                    }
                }
                schur[i][j] = l.sub(&schur[i][j], &acc);
            }
        }
        let det_schur = det_even(l, &schur)?;
        Ok(l.mul(&det_schur, &det_d_inv))
    }
}

// ---------------------------------------------------------------------------
// finitely generated B-modules
// ---------------------------------------------------------------------------

/// A finitely generated module over the base algebra B, presented by an exact
/// scalar basis (coordinates in some ambient scalar space), the parity of
/// each basis vector, and one action matrix per B-basis monomial, expressed
/// in basis coordinates.
#[derive(Debug, Clone)]
pub struct BModuleRep {
    pub lambda: Lambda,
    /// Scalar basis vectors in ambient coordinates (row-reduced per parity).
    pub basis: ScalarMatrix,
    /// Parity of each basis vector.
    pub parity: Vec<u8>,
    /// action[k] is the matrix of multiplication by B-basis monomial k on the
    /// basis coordinates.
    pub action: Vec<ScalarMatrix>,
    /// Parity of each ambient coordinate (kept for display/extension).
    pub ambient_parity: Vec<u8>,
}

impl BModuleRep {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Scalar dimensions (even, odd).
    pub fn graded_dim(&self) -> (usize, usize) {
        let even = self.parity.iter().filter(|p| **p == 0).count();
        (even, self.parity.len() - even)
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Build span(gens)/span(rels) inside an ambient scalar space with the
    /// given coordinate parities and B-action matrices (one per B-basis
    /// monomial, acting on ambient coordinates).
    ///
    /// Requires: rels lie in span(gens); both spans are closed under the
    /// action; every generator and relation is parity-homogeneous.
    pub fn subquotient(
        lambda: &Lambda,
        ambient_parity: &[u8],
        ambient_action: &[ScalarMatrix],
        gens: &[Vec<GaussianRational>],
        rels: &[Vec<GaussianRational>],
    ) -> Result<BModuleRep> {
        let dim = ambient_parity.len();
        if ambient_action.len() != lambda.base.dim() {
            return Err(Error::Precondition(
                "need one action matrix per B-basis monomial".into(),
            ));
        }
        let parity_of = |v: &[GaussianRational]| -> Result<u8> {
            let mut p: Option<u8> = None;
            for (i, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                match p {
                    None => p = Some(ambient_parity[i]),
                    Some(prev) if prev != ambient_parity[i] => {
                        return Err(Error::Precondition(
                            "vector mixes parities; split it first".into(),
                        ))
                    }
                    _ => {}
                }
            }
            Ok(p.unwrap_or(0))
        };
        // reduce relations and generators per parity class; vectors of each
        // parity are supported on disjoint coordinate sets, so concatenating
        // the two reduced families again yields a reduced family.
        type Reduced = (ScalarMatrix, Vec<usize>);
        let split = |vs: &[Vec<GaussianRational>]| -> Result<(Reduced, Reduced)> {
            let mut even = Vec::new();
            let mut odd = Vec::new();
            for v in vs {
                if v.len() != dim {
                    return Err(Error::Precondition("vector length mismatch".into()));
                }
                if v.iter().all(|c| c.is_zero()) {
                    continue;
                }
                if parity_of(v)? == 0 {
                    even.push(v.clone());
                } else {
                    odd.push(v.clone());
                }
            }
            Ok((rref(&even), rref(&odd)))
        };
        let (rels_e, rels_o) = split(rels)?;
        let ((gens_even, gens_even_piv), (gens_odd, gens_odd_piv)) = split(gens)?;

        // relations must lie in the span of the generators (trivially true
        // when the generators span the whole ambient space)
        let gen_rows: ScalarMatrix = gens_even.iter().chain(gens_odd.iter()).cloned().collect();
        let gen_pivots: Vec<usize> = gens_even_piv
            .iter()
            .chain(gens_odd_piv.iter())
            .copied()
            .collect();
        if gen_pivots.len() < dim {
            for v in rels_e.0.iter().chain(rels_o.0.iter()) {
                let (rem, _) = reduce_against(&gen_rows, &gen_pivots, v);
                if !rem.iter().all(|c| c.is_zero()) {
                    return Err(Error::Precondition(
                        "relation outside the span of the generators".into(),
                    ));
                }
            }
        }

        // quotient basis per parity: generators reduced modulo relations
        let quot_basis = |gens_rr: &ScalarMatrix, rels_rr: &Reduced| -> Reduced {
            let reduced: ScalarMatrix = gens_rr
                .iter()
                .map(|v| reduce_against(&rels_rr.0, &rels_rr.1, v).0)
                .collect();
            rref(&reduced)
        };
        let (basis_even, basis_even_piv) = quot_basis(&gens_even, &rels_e);
        let (basis_odd, basis_odd_piv) = quot_basis(&gens_odd, &rels_o);

        let mut basis: ScalarMatrix = Vec::new();
        let mut parity: Vec<u8> = Vec::new();
        for v in &basis_even {
            basis.push(v.clone());
            parity.push(0);
        }
        for v in &basis_odd {
            basis.push(v.clone());
            parity.push(1);
        }
        let basis_pivots: Vec<usize> = basis_even_piv
            .iter()
            .chain(basis_odd_piv.iter())
            .copied()
            .collect();

        // induced action matrices: express act_k(basis_i) in (basis,
        // relations) coordinates. The basis rows vanish at the relation
        // pivots (they were reduced modulo the relations), so first clearing
        // the relation pivots and then reading off the basis pivots yields
        // exact coordinates; a nonzero remainder means the span is not
        // closed under the action.
        let all_rels: ScalarMatrix = rels_e.0.iter().chain(rels_o.0.iter()).cloned().collect();
        let all_rel_pivots: Vec<usize> =
            rels_e.1.iter().chain(rels_o.1.iter()).copied().collect();
        let r = basis.len();
        let mut action: Vec<ScalarMatrix> = Vec::new();
        for act in ambient_action {
            let mut mat = vec![vec![GaussianRational::zero(); r]; r];
            for (i, v) in basis.iter().enumerate() {
                let w = mat_vec(act, v);
                let (w, _) = reduce_against(&all_rels, &all_rel_pivots, &w);
                let (rem, coords) = reduce_against(&basis, &basis_pivots, &w);
                if !rem.iter().all(|c| c.is_zero()) {
                    return Err(Error::NotBLinear);
                }
                for (j, row) in mat.iter_mut().enumerate() {
                    row[i] = coords[j].clone();
                }
            }
            action.push(mat);
        }
        Ok(BModuleRep {
            lambda: lambda.clone(),
            basis,
            parity,
            action,
            ambient_parity: ambient_parity.to_vec(),
        })
    }

    /// Free module B^{r_even | r_odd} in its own coordinates.
    pub fn free(lambda: &Lambda, r_even: usize, r_odd: usize) -> Result<BModuleRep> {
        // ambient coordinates: (free generator, B-basis monomial)
        let nb = lambda.base.dim();
        let r = r_even + r_odd;
        let dim = r * nb;
        let gen_parity = |g: usize| -> u8 {
            if g < r_even {
                0
            } else {
                1
            }
        };
        let ambient_parity: Vec<u8> = (0..dim)
            .map(|c| (gen_parity(c / nb) + lambda.base.parity[c % nb]) % 2)
            .collect();
        let mut ambient_action: Vec<ScalarMatrix> = Vec::new();
        for k in 0..nb {
            let mut m = vec![vec![GaussianRational::zero(); dim]; dim];
            for g in 0..r {
                for b in 0..nb {
                    // b_k . (x_g b) = (b_k b) x_g, with the Koszul sign for
                    // moving b_k past an odd generator
                    let sign = if lambda.base.parity[k] == 1 && gen_parity(g) == 1 {
                        -1i64
                    } else {
                        1
                    };
                    for (k2, c) in &lambda.base.table[k][b] {
                        let entry = c * &GaussianRational::from_int(sign);
                        m[g * nb + k2][g * nb + b] = &m[g * nb + k2][g * nb + b] + &entry;
                    }
                }
            }
            ambient_action.push(m);
        }
        let gens = identity_matrix(dim);
        BModuleRep::subquotient(lambda, &ambient_parity, &ambient_action, &gens, &[])
    }
}

/// A B-linear map between presented modules, as a scalar matrix in basis
/// coordinates (columns indexed by the domain basis).
#[derive(Debug, Clone)]
pub struct BModuleMap {
    pub matrix: ScalarMatrix,
}

impl BModuleMap {
    /// Check exact commutation with every B-action matrix.
    pub fn check_linear(&self, dom: &BModuleRep, cod: &BModuleRep) -> Result<()> {
        for (ad, ac) in dom.action.iter().zip(cod.action.iter()) {
            if mat_mul(&self.matrix, ad) != mat_mul(ac, &self.matrix) {
                return Err(Error::NotBLinear);
            }
        }
        Ok(())
    }

    /// Kernel as a B-module (ambient space = domain basis coordinates).
    pub fn kernel(&self, dom: &BModuleRep, cod: &BModuleRep) -> Result<BModuleRep> {
        self.check_linear(dom, cod)?;
        let gens = kernel_basis(&self.matrix, dom.rank());
        BModuleRep::subquotient(&dom.lambda, &dom.parity, &dom.action, &gens, &[])
    }

    /// Cokernel as a B-module (ambient space = codomain basis coordinates).
    pub fn cokernel(&self, dom: &BModuleRep, cod: &BModuleRep) -> Result<BModuleRep> {
        self.check_linear(dom, cod)?;
        let r = cod.rank();
        let image: ScalarMatrix = (0..dom.rank())
            .map(|j| (0..r).map(|i| self.matrix[i][j].clone()).collect())
            .collect();
        BModuleRep::subquotient(
            &cod.lambda,
            &cod.parity,
            &cod.action,
            &identity_matrix(r),
            &image,
        )
    }
}

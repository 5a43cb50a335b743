//! Berezinian sections, the change-of-variables law, residues, local
//! automorphisms in Aut^+, differential operators, lifts into the kernel of
//! L -> L(1), and evaluation of L(log f).
//!
//! Sections of the Berezinian sheaf are written in the Penkov basis as
//! h . [dz d/dtheta_1 ... d/dtheta_q]; the residue of such a section at P is
//! the Laurent (-1)-coefficient of the top theta-component of h.

use std::collections::BTreeMap;

use crate::scalars::{formal_log, GaussianRational, LogScalar};
use crate::superalgebra::{Graded, Lambda, SuperElement, ThetaSet};
use crate::superfunction::{linear_roots, Poly, PointP1, RatFunc, SuperRationalFunction};
use crate::superlinalg::SuperMatrix;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// log-extended coefficients
// ---------------------------------------------------------------------------

/// A Lambda-element with coefficients in the formal-log extension of Q(i);
/// residues of log-carrying forms and Abel-map values land here.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogElement {
    pub terms: BTreeMap<(usize, ThetaSet), LogScalar>,
}

impl LogElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn insert(&mut self, b: usize, s: ThetaSet, c: LogScalar) {
        let slot = self.terms.entry((b, s)).or_insert_with(LogScalar::zero);
        *slot = (&*slot + &c).normalize();
        if slot.is_zero() {
            self.terms.remove(&(b, s));
        }
    }

    pub fn add(&self, o: &LogElement) -> LogElement {
        let mut out = self.clone();
        for ((b, s), c) in &o.terms {
            out.insert(*b, *s, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &LogElement) -> LogElement {
        self.add(&o.scale(&-&GaussianRational::one()))
    }

    pub fn scale(&self, c: &GaussianRational) -> LogElement {
        let mut out = LogElement::zero();
        for ((b, s), v) in &self.terms {
            out.insert(*b, *s, v.scale(c));
        }
        out
    }

    pub fn from_super(a: &SuperElement) -> LogElement {
        let mut out = LogElement::zero();
        for ((b, s), c) in &a.terms {
            out.insert(*b, *s, LogScalar::from_rational(c.clone()));
        }
        out
    }
}

/// A rational superfunction plus log terms: rat + sum over branch points a of
/// coeff_a(z, theta) * Log(z - a).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogRational {
    pub rat: SuperRationalFunction,
    pub logs: BTreeMap<GaussianRational, SuperRationalFunction>,
}

impl LogRational {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rat(rat: SuperRationalFunction) -> Self {
        LogRational {
            rat,
            logs: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.logs.values().all(|c| c.is_zero())
    }

    fn prune(mut self) -> Self {
        self.logs.retain(|_, c| !c.is_zero());
        self
    }

    pub fn add(&self, l: &Lambda, o: &LogRational) -> LogRational {
        let mut out = self.clone();
        out.rat = l.add(&out.rat, &o.rat);
        for (a, c) in &o.logs {
            let slot = out.logs.entry(a.clone()).or_default();
            *slot = l.add(slot, c);
        }
        out.prune()
    }

    pub fn neg(&self, l: &Lambda) -> LogRational {
        LogRational {
            rat: l.neg(&self.rat),
            logs: self.logs.iter().map(|(a, c)| (a.clone(), l.neg(c))).collect(),
        }
    }

    pub fn sub(&self, l: &Lambda, o: &LogRational) -> LogRational {
        self.add(l, &o.neg(l))
    }

    /// Left-multiply every coefficient by a rational superfunction.
    pub fn mul_left(&self, l: &Lambda, a: &SuperRationalFunction) -> LogRational {
        LogRational {
            rat: l.mul(a, &self.rat),
            logs: self
                .logs
                .iter()
                .map(|(p, c)| (p.clone(), l.mul(a, c)))
                .collect(),
        }
        .prune()
    }

    /// Right-multiply by a rational superfunction (Log symbols are even and
    /// central, so only the Lambda product carries signs).
    pub fn mul_right(&self, l: &Lambda, a: &SuperRationalFunction) -> LogRational {
        LogRational {
            rat: l.mul(&self.rat, a),
            logs: self
                .logs
                .iter()
                .map(|(p, c)| (p.clone(), l.mul(c, a)))
                .collect(),
        }
        .prune()
    }

    /// d/dz, with d/dz Log(z - a) = 1/(z - a).
    pub fn z_derivative(&self, l: &Lambda) -> LogRational {
        let mut rat = l.z_derivative(&self.rat);
        let mut logs = BTreeMap::new();
        for (a, c) in &self.logs {
            // (c Log)' = c' Log + c/(z - a)
            let lin = RatFunc::new(
                Poly::one(),
                Poly(vec![-a, GaussianRational::one()]),
            );
            rat = l.add(&rat, &c.map_coeffs(|r| r.mul(&lin)));
            let cd = l.z_derivative(c);
            if !cd.is_zero() {
                logs.insert(a.clone(), cd);
            }
        }
        LogRational { rat, logs }
    }

    /// Left theta-derivative.
    pub fn theta_derivative(&self, l: &Lambda, i: usize) -> Result<LogRational> {
        let mut logs = BTreeMap::new();
        for (a, c) in &self.logs {
            let cd = l.theta_derivative(c, i)?;
            if !cd.is_zero() {
                logs.insert(a.clone(), cd);
            }
        }
        Ok(LogRational {
            rat: l.theta_derivative(&self.rat, i)?,
            logs,
        })
    }
}

// ---------------------------------------------------------------------------
// the de Rham complex (with log coefficients)
// ---------------------------------------------------------------------------

/// One-form dz . a + sum_i dtheta_i . b_i, coefficients to the right of the
/// symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    pub dz: LogRational,
    pub dtheta: Vec<LogRational>,
}

impl OneForm {
    pub fn zero(q: usize) -> Self {
        OneForm {
            dz: LogRational::zero(),
            dtheta: vec![LogRational::zero(); q],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dz.is_zero() && self.dtheta.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, l: &Lambda, o: &OneForm) -> OneForm {
        OneForm {
            dz: self.dz.add(l, &o.dz),
            dtheta: self
                .dtheta
                .iter()
                .zip(o.dtheta.iter())
                .map(|(a, b)| a.add(l, b))
                .collect(),
        }
    }

    pub fn sub(&self, l: &Lambda, o: &OneForm) -> OneForm {
        OneForm {
            dz: self.dz.sub(l, &o.dz),
            dtheta: self
                .dtheta
                .iter()
                .zip(o.dtheta.iter())
                .map(|(a, b)| a.sub(l, b))
                .collect(),
        }
    }
}

/// Two-form with channels dtheta_j dz and dtheta_i dtheta_j (i <= j).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm {
    pub dtheta_dz: Vec<LogRational>,
    pub dtheta_dtheta: BTreeMap<(usize, usize), LogRational>,
}

impl TwoForm {
    pub fn is_zero(&self) -> bool {
        self.dtheta_dz.iter().all(|c| c.is_zero())
            && self.dtheta_dtheta.values().all(|c| c.is_zero())
    }
}

/// Exterior derivative of a scalar: dg = dz . dg/dz + sum dtheta_i . dg/dtheta_i.
pub fn d_scalar(l: &Lambda, g: &LogRational) -> OneForm {
    OneForm {
        dz: g.z_derivative(l),
        dtheta: (1..=l.q)
            .map(|i| g.theta_derivative(l, i).unwrap())
            .collect(),
    }
}

/// Exterior derivative of a one-form; d(d g) = 0 exactly.
pub fn d_one_form(l: &Lambda, w: &OneForm) -> TwoForm {
    let a = &w.dz;
    let mut dtheta_dz = Vec::with_capacity(l.q);
    for j in 1..=l.q {
        // channel dtheta_j dz: -da/dtheta_j + d b_j/dz
        let t = a
            .theta_derivative(l, j)
            .unwrap()
            .neg(l)
            .add(l, &w.dtheta[j - 1].z_derivative(l));
        dtheta_dz.push(t);
    }
    let mut dtheta_dtheta = BTreeMap::new();
    for i in 1..=l.q {
        for j in i..=l.q {
            let v = if i == j {
                w.dtheta[i - 1].theta_derivative(l, i).unwrap()
            } else {
                w.dtheta[i - 1]
                    .theta_derivative(l, j)
                    .unwrap()
                    .add(l, &w.dtheta[j - 1].theta_derivative(l, i).unwrap())
            };
            if !v.is_zero() {
                dtheta_dtheta.insert((i, j), v);
            }
        }
    }
    TwoForm {
        dtheta_dz,
        dtheta_dtheta,
    }
}

// ---------------------------------------------------------------------------
// residues of log-carrying coefficients
// ---------------------------------------------------------------------------

/// Full Laurent data of a log-carrying coefficient at a finite point: the
/// rational channel plus LogScalar-valued coefficients from the constant
/// parts of Log(z - a) = Log(P - a) + series.
pub fn log_laurent_expand(
    l: &Lambda,
    f: &LogRational,
    p: &GaussianRational,
    order: i64,
) -> Result<crate::superfunction::LaurentExpansion> {
    let point = PointP1::Finite(p.clone());
    let mut exp = l.laurent_expand(&f.rat, &point, order);
    for (a, c) in &f.logs {
        if a == p {
            return Err(Error::BranchPointInRegion(format!("{a}")));
        }
        // Log(z - a) at z = p + t:  Log(p - a) + sum_{k>=1} (-1)^{k-1} t^k / (k (p-a)^k)
        let base = formal_log(&(p - a))?;
        let low = c
            .terms
            .values()
            .filter_map(|r| r.order_at(&point))
            .min()
            .unwrap_or(0)
            .min(0);
        let ce = l.laurent_expand(c, &point, order);
        let pa_inv = (p - a).inv()?;
        for (e, coeff) in &ce.coeffs {
            // constant channel: coeff . Log(p - a) at the same exponent
            if *e <= order {
                let slot = exp.log_coeffs.entry(*e).or_default();
                for ((b, s), v) in &coeff.terms {
                    slot.insert(*b, *s, base.scale(v));
                }
            }
        }
        // series channel: convolution with s_k = (-1)^{k-1} (p-a)^{-k} / k
        let mut s_k = GaussianRational::one();
        for k in 1..=((order - low).max(0) as u32) {
            s_k = &s_k * &pa_inv;
            let sk = &s_k
                * &GaussianRational::from_ratio(if k % 2 == 1 { 1 } else { -1 }, k as i64);
            for (e, coeff) in &ce.coeffs {
                let tot = e + k as i64;
                if tot <= order {
                    let add = l.scale(coeff, &sk);
                    let slot = exp.coeffs.entry(tot).or_insert_with(Graded::zero);
                    *slot = l.add(slot, &add);
                }
            }
        }
        exp.log_coeffs.retain(|_, v| !v.is_zero());
        exp.coeffs.retain(|_, v| !v.is_zero());
    }
    Ok(exp)
}

/// Residue of (coefficient) dz at a point; branch points of log terms must
/// avoid finite P, and log terms are not supported at infinity.
pub fn log_residue(l: &Lambda, f: &LogRational, p: &PointP1) -> Result<LogElement> {
    match p {
        PointP1::Finite(a) => {
            let exp = log_laurent_expand(l, f, a, -1)?;
            let mut out = LogElement::from_super(&exp.coeffs.get(&-1).cloned().unwrap_or_default());
            if let Some(le) = exp.log_coeffs.get(&-1) {
                out = out.add(le);
            }
            Ok(out)
        }
        PointP1::Infinity => {
            if !f.logs.values().all(|c| c.is_zero()) {
                return Err(Error::Precondition(
                    "residue at infinity of a log-carrying coefficient".into(),
                ));
            }
            Ok(LogElement::from_super(&l.residue_form(&f.rat, p)))
        }
    }
}

/// Contour integral of a one-form around P (normalized residue): the residue
/// of the dz-channel coefficient.
pub fn contour_residue(l: &Lambda, w: &OneForm, p: &PointP1) -> Result<LogElement> {
    log_residue(l, &w.dz, p)
}

// ---------------------------------------------------------------------------
// Berezinian sections
// ---------------------------------------------------------------------------

/// A section of the Berezinian sheaf in the Penkov basis:
/// omega = coeff . [dz d/dtheta_1 ... d/dtheta_q].
#[derive(Debug, Clone, PartialEq)]
pub struct BerSection {
    pub coeff: SuperRationalFunction,
}

impl BerSection {
    pub fn new(coeff: SuperRationalFunction) -> Self {
        BerSection { coeff }
    }

    /// res_P: the (-1) Laurent coefficient of the top theta-component.
    pub fn residue(&self, l: &Lambda, p: &PointP1) -> SuperElement {
        let top = l.berezin_top(&self.coeff);
        l.residue_form(&top, p)
    }
}

// ---------------------------------------------------------------------------
// local automorphisms in Aut^+
// ---------------------------------------------------------------------------

/// A local automorphism of Lambda tensor Q(i)(z) over B, reducing to the
/// identity modulo nilpotents: z maps to an even function with reduced part
/// exactly z; theta_i maps to an odd function.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAutomorphism {
    pub q: usize,
    pub image_z: SuperRationalFunction,
    pub image_theta: Vec<SuperRationalFunction>,
}

impl LocalAutomorphism {
    pub fn new(
        l: &Lambda,
        image_z: SuperRationalFunction,
        image_theta: Vec<SuperRationalFunction>,
    ) -> Result<Self> {
        if image_theta.len() != l.q {
            return Err(Error::InvalidAutomorphism(format!(
                "expected {} theta images, got {}",
                l.q,
                image_theta.len()
            )));
        }
        if !l.is_even(&image_z) {
            return Err(Error::InvalidAutomorphism("image of z is not even".into()));
        }
        if image_z.get(0, 0) != RatFunc::z() {
            return Err(Error::InvalidAutomorphism(
                "image of z does not reduce to z modulo nilpotents".into(),
            ));
        }
        for (i, t) in image_theta.iter().enumerate() {
            if !t.is_zero() && l.parity(t) != Some(1) {
                return Err(Error::InvalidAutomorphism(format!(
                    "image of theta_{} is not odd",
                    i + 1
                )));
            }
        }
        let out = LocalAutomorphism {
            q: l.q,
            image_z,
            image_theta,
        };
        // the reduced linear theta-part must be invertible over Q(i)(z)
        ratfunc_mat_inv(&out.linear_part()).map_err(|_| {
            Error::InvalidAutomorphism("reduced linear theta-part is singular".into())
        })?;
        Ok(out)
    }

    pub fn identity(l: &Lambda) -> Self {
        LocalAutomorphism {
            q: l.q,
            image_z: l.z_fn(),
            image_theta: (1..=l.q).map(|i| l.theta(i)).collect(),
        }
    }

    /// Reduced matrix A with image_theta_i = sum_j A_ij theta_j + higher.
    fn linear_part(&self) -> Vec<Vec<RatFunc>> {
        (0..self.q)
            .map(|i| {
                (0..self.q)
                    .map(|j| self.image_theta[i].get(0, 1 << j))
                    .collect()
            })
            .collect()
    }

    /// The substitution homomorphism: f(z, theta) -> f(image_z, image_theta).
    pub fn apply(&self, l: &Lambda, f: &SuperRationalFunction) -> SuperRationalFunction {
        // image_z = z + nu with nu even nilpotent; precompute nu^k / k!
        let nu = l.sub(&self.image_z, &l.z_fn());
        let mut nu_pows: Vec<SuperRationalFunction> = vec![l.one()];
        loop {
            let next = l.mul(nu_pows.last().unwrap(), &nu);
            if next.is_zero() {
                break;
            }
            nu_pows.push(next);
            assert!(nu_pows.len() < 256, "nilpotent part fails to terminate");
        }
        let mut out: SuperRationalFunction = Graded::zero();
        for ((b, s), r) in &f.terms {
            // r(z + nu) = sum_k r^(k)(z) nu^k / k!
            let mut rsub: SuperRationalFunction = Graded::zero();
            let mut rk = r.clone();
            let mut fact = GaussianRational::one();
            for (k, np) in nu_pows.iter().enumerate() {
                if k > 0 {
                    rk = rk.derivative();
                    fact = &fact * &GaussianRational::from_int(k as i64);
                }
                if rk.is_zero() {
                    break;
                }
                let c = rk.mul(&RatFunc::constant(fact.inv().unwrap()));
                rsub = l.add(&rsub, &l.scale(np, &c));
            }
            let mut term = l.mul(&rsub, &l.base_monomial(*b));
            for i in 1..=self.q {
                if s & (1 << (i - 1)) != 0 {
                    term = l.mul(&term, &self.image_theta[i - 1]);
                }
            }
            out = l.add(&out, &term);
        }
        out
    }

    /// Composition as ring maps: (self . other)(x) = self(other(x)).
    pub fn compose(&self, l: &Lambda, other: &LocalAutomorphism) -> LocalAutomorphism {
        LocalAutomorphism {
            q: self.q,
            image_z: self.apply(l, &other.image_z),
            image_theta: other
                .image_theta
                .iter()
                .map(|t| self.apply(l, t))
                .collect(),
        }
    }

    pub fn is_identity(&self, l: &Lambda) -> bool {
        self.image_z == l.z_fn()
            && self
                .image_theta
                .iter()
                .enumerate()
                .all(|(i, t)| *t == l.theta(i + 1))
    }

    /// Exact inverse: the reduced linear theta-part is inverted over the
    /// function field, then the remaining unipotent part by fixed-point
    /// iteration descending the nilpotent filtration.
    pub fn inverse(&self, l: &Lambda) -> Result<LocalAutomorphism> {
        let a_inv = ratfunc_mat_inv(&self.linear_part()).map_err(|_| {
            Error::InvalidAutomorphism("reduced linear theta-part is singular".into())
        })?;
        let g_inv = LocalAutomorphism {
            q: self.q,
            image_z: l.z_fn(),
            image_theta: (0..self.q)
                .map(|i| {
                    let mut t: SuperRationalFunction = Graded::zero();
                    for (j, c) in a_inv[i].iter().enumerate() {
                        t = l.add(&t, &Graded::term(0, 1 << j, c.clone()));
                    }
                    t
                })
                .collect(),
        };
        // h = g_inv . self is unipotent; solve h(X) = x per generator
        let h = g_inv.compose(l, self);
        let solve = |target: &SuperRationalFunction| -> Result<SuperRationalFunction> {
            let mut x = target.clone();
            for _ in 0..4 * l.scalar_dim() + 8 {
                let e = l.sub(&h.apply(l, &x), target);
                if e.is_zero() {
                    return Ok(x);
                }
                x = l.sub(&x, &e);
            }
            Err(Error::InvalidAutomorphism(
                "unipotent inversion failed to converge".into(),
            ))
        };
        let h_inv = LocalAutomorphism {
            q: self.q,
            image_z: solve(&l.z_fn())?,
            image_theta: (1..=self.q)
                .map(|i| solve(&l.theta(i)))
                .collect::<Result<Vec<_>>>()?,
        };
        let inv = h_inv.compose(l, &g_inv);
        // verify both round trips exactly
        if !inv.compose(l, self).is_identity(l) || !self.compose(l, &inv).is_identity(l) {
            return Err(Error::InvalidAutomorphism(
                "inverse verification failed".into(),
            ));
        }
        Ok(inv)
    }
}

/// Inverse of a square matrix over the field Q(i)(z) by Gauss-Jordan.
fn ratfunc_mat_inv(m: &[Vec<RatFunc>]) -> Result<Vec<Vec<RatFunc>>> {
    let n = m.len();
    let mut a: Vec<Vec<RatFunc>> = m.to_vec();
    let mut inv: Vec<Vec<RatFunc>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { RatFunc::one() } else { RatFunc::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|r| !a[*r][col].is_zero())
            .ok_or(Error::SingularOddBlock)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let pinv = a[col][col].inv()?;
        for j in 0..n {
            a[col][j] = a[col][j].mul(&pinv);
            inv[col][j] = inv[col][j].mul(&pinv);
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let c = a[r][col].clone();
                for j in 0..n {
                    a[r][j] = a[r][j].sub(&c.mul(&a[col][j]));
                    inv[r][j] = inv[r][j].sub(&c.mul(&inv[col][j]));
                }
            }
        }
    }
    Ok(inv)
}

/// Right derivative with respect to theta_i: strips theta_i from the right
/// of each monomial b theta_S, with the sign from moving it past the higher
/// thetas.
pub fn right_theta_derivative(
    l: &Lambda,
    f: &SuperRationalFunction,
    i: usize,
) -> SuperRationalFunction {
    let bit = 1u32 << (i - 1);
    let mut out: SuperRationalFunction = Graded::zero();
    for ((b, s), c) in &f.terms {
        if s & bit == 0 {
            continue;
        }
        let above = (s & !(bit | (bit - 1))).count_ones();
        let sign = if above % 2 == 0 { 1i64 } else { -1 };
        out.insert(
            *b,
            s & !bit,
            c.mul(&RatFunc::constant(GaussianRational::from_int(sign))),
        );
    }
    let _ = l;
    out
}

/// The (1|q) x (1|q) supermatrix of partial derivatives of
/// (image_z; image_theta) with respect to (z; theta); theta-columns use the
/// right derivative.
pub fn super_jacobian(l: &Lambda, sigma: &LocalAutomorphism) -> SuperMatrix<RatFunc> {
    let n = 1 + sigma.q;
    let mut rows: Vec<Vec<SuperRationalFunction>> = vec![vec![Graded::zero(); n]; n];
    let images: Vec<&SuperRationalFunction> = std::iter::once(&sigma.image_z)
        .chain(sigma.image_theta.iter())
        .collect();
    for (i, im) in images.iter().enumerate() {
        rows[i][0] = l.z_derivative(im);
        for j in 1..=sigma.q {
            rows[i][j] = right_theta_derivative(l, im, j);
        }
    }
    SuperMatrix::new(l, 1, sigma.q, rows).expect("jacobian parities")
}

/// Pull back omega, given in the (w, eta) chart, through sigma: (z, theta) ->
/// (w, eta): new coefficient = Ber(jacobian) . (coeff . sigma).
pub fn change_of_variables(
    l: &Lambda,
    omega: &BerSection,
    sigma: &LocalAutomorphism,
) -> Result<BerSection> {
    let jac = super_jacobian(l, sigma);
    let ber = jac.berezinian(l)?;
    let pulled = sigma.apply(l, &omega.coeff);
    Ok(BerSection::new(l.mul(&ber, &pulled)))
}

// ---------------------------------------------------------------------------
// differential operators and lifts
// ---------------------------------------------------------------------------

/// Output channel of an operator term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormChannel {
    Dz,
    /// 1-based theta index.
    Dtheta(usize),
}

/// One term: channel . coeff . (d/dz)^{z_order} (d/dtheta)_{thetas}, with the
/// theta-derivatives applied in ascending index order first.
#[derive(Debug, Clone, PartialEq)]
pub struct OpTerm {
    pub channel: FormChannel,
    pub coeff: LogRational,
    pub z_order: usize,
    pub thetas: ThetaSet,
}

/// A differential operator from functions to one-forms, as a finite term
/// list. Membership in the kernel of L -> L(1) is structural: every term
/// carries at least one derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialOperator {
    pub terms: Vec<OpTerm>,
}

impl DifferentialOperator {
    /// Structural membership in the kernel of L -> L(1).
    pub fn annihilates_constants(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.z_order > 0 || t.thetas != 0 || t.coeff.is_zero())
    }

    pub fn apply(&self, l: &Lambda, g: &SuperRationalFunction) -> OneForm {
        let mut out = OneForm::zero(l.q);
        for t in &self.terms {
            let mut d = g.clone();
            for i in 1..=l.q {
                if t.thetas & (1 << (i - 1)) != 0 {
                    d = l.theta_derivative(&d, i).unwrap();
                }
            }
            for _ in 0..t.z_order {
                d = l.z_derivative(&d);
            }
            if d.is_zero() {
                continue;
            }
            let contrib = t.coeff.mul_right(l, &d);
            match t.channel {
                FormChannel::Dz => out.dz = out.dz.add(l, &contrib),
                FormChannel::Dtheta(i) => {
                    out.dtheta[i - 1] = out.dtheta[i - 1].add(l, &contrib)
                }
            }
        }
        out
    }

    /// L(log f) for f in K^x: L(lambda) from the nilpotent log plus the
    /// z-derivative terms routed through dlog of the reduced part. Every term
    /// of an operator in the kernel of L -> L(1) carries a derivative, so the
    /// symbolic log never survives.
    pub fn apply_to_log(&self, l: &Lambda, f: &SuperRationalFunction) -> Result<OneForm> {
        if !self.annihilates_constants() {
            return Err(Error::Precondition(
                "operator does not annihilate constants".into(),
            ));
        }
        let (f_red, lambda) = l.log_decompose(f)?;
        let mut out = self.apply(l, &lambda);
        let dlog_red: SuperRationalFunction =
            Graded::term(0, 0, f_red.derivative().div(&f_red)?);
        for t in &self.terms {
            if t.thetas != 0 || t.z_order == 0 {
                continue; // theta-derivatives kill log f_red; no underived terms
            }
            let mut d = dlog_red.clone();
            for _ in 0..t.z_order - 1 {
                d = l.z_derivative(&d);
            }
            let contrib = t.coeff.mul_right(l, &d);
            match t.channel {
                FormChannel::Dz => out.dz = out.dz.add(l, &contrib),
                FormChannel::Dtheta(i) => {
                    out.dtheta[i - 1] = out.dtheta[i - 1].add(l, &contrib)
                }
            }
        }
        Ok(out)
    }
}

/// Antiderivative of a single rational function: rational part plus simple-
/// pole log terms (branch point, residue coefficient).
fn anti_ratfunc(r: &RatFunc) -> Result<(RatFunc, Vec<(GaussianRational, GaussianRational)>)> {
    if r.is_zero() {
        return Ok((RatFunc::zero(), Vec::new()));
    }
    let (quot, rem) = r.num.divrem(&r.den);
    // polynomial part integrates termwise
    let mut rat = if quot.is_zero() {
        RatFunc::zero()
    } else {
        let coeffs: Vec<GaussianRational> = std::iter::once(GaussianRational::zero())
            .chain(quot.0.iter().enumerate().map(|(k, c)| {
                c * &GaussianRational::from_ratio(1, k as i64 + 1)
            }))
            .collect();
        RatFunc::from_poly(Poly::from_coeffs(coeffs))
    };
    let mut logs = Vec::new();
    if !rem.is_zero() {
        let proper = RatFunc::new(rem, r.den.clone());
        let roots = linear_roots(&proper.den)?;
        for (a, m) in roots {
            let point = PointP1::Finite(a.clone());
            let tail = proper.laurent(&point, -1);
            for k in 1..=(m as i64) {
                let c = tail.get(&-k).cloned().unwrap_or_else(GaussianRational::zero);
                if c.is_zero() {
                    continue;
                }
                if k == 1 {
                    logs.push((a.clone(), c));
                } else {
                    // integral of c (z-a)^{-k} = -c/(k-1) (z-a)^{-(k-1)}
                    let lin = Poly(vec![-&a, GaussianRational::one()]);
                    let piece = RatFunc::new(
                        Poly::constant(&(-c) * &GaussianRational::from_ratio(1, k - 1)),
                        lin.pow((k - 1) as usize),
                    );
                    rat = rat.add(&piece);
                }
            }
        }
    }
    // exact verification: d/dz of the result reproduces r
    let mut check = rat.derivative();
    for (a, c) in &logs {
        let lin = Poly(vec![-a, GaussianRational::one()]);
        check = check.add(&RatFunc::new(Poly::constant(c.clone()), lin));
    }
    if &check != r {
        return Err(Error::Precondition(format!(
            "antiderivative verification failed for {r}"
        )));
    }
    Ok((rat, logs))
}

/// Componentwise antiderivative in z of a rational superfunction.
pub fn antiderivative(l: &Lambda, f: &SuperRationalFunction) -> Result<LogRational> {
    let mut rat: SuperRationalFunction = Graded::zero();
    let mut logs: BTreeMap<GaussianRational, SuperRationalFunction> = BTreeMap::new();
    for ((b, s), r) in &f.terms {
        let (piece, ls) = anti_ratfunc(r)?;
        if !piece.is_zero() {
            rat.insert(*b, *s, piece);
        }
        for (a, c) in ls {
            logs.entry(a)
                .or_default()
                .insert(*b, *s, RatFunc::constant(c));
        }
    }
    let _ = l;
    logs.retain(|_, c| !c.is_zero());
    Ok(LogRational { rat, logs })
}

/// Lift of omega = h . [dz d/dtheta] to an operator with L(1) = 0, d . L = 0,
/// and Berezin image omega: L(g) = dz . T(h g) - d(H g) with T the top theta-
/// derivative and H an antiderivative of T(h). Log branch points of H must
/// avoid the marked point set `u`.
pub fn lift_to_dsharp(
    l: &Lambda,
    omega: &BerSection,
    u: &[PointP1],
) -> Result<DifferentialOperator> {
    let h_top = l.berezin_top(&omega.coeff);
    let h_anti = antiderivative(l, &h_top)?;
    for a in h_anti.logs.keys() {
        if u.contains(&PointP1::Finite(a.clone())) {
            return Err(Error::BranchPointInRegion(format!("{a}")));
        }
    }
    // Leibniz expansion of T(h g) into coefficients of derivative monomials
    // of g: process D_1, ..., D_q in order, tracking (left factor, set of
    // derivatives pending on g, sign).
    let mut states: Vec<(SuperRationalFunction, ThetaSet, i64)> = omega
        .coeff
        .terms
        .iter()
        .map(|((b, s), r)| (Graded::term(*b, *s, r.clone()), 0u32, 1i64))
        .collect();
    for i in 1..=l.q {
        let mut next = Vec::new();
        for (m, s_g, sgn) in &states {
            let dm = l.theta_derivative(m, i).unwrap();
            if !dm.is_zero() {
                next.push((dm, *s_g, *sgn));
            }
            // the derivative passes over the homogeneous left factor m
            let pm = l.parity(m).unwrap_or(0);
            let sgn2 = if pm == 1 { -sgn } else { *sgn };
            // i exceeds every index already in s_g, so no reordering sign
            next.push((m.clone(), s_g | (1 << (i - 1)), sgn2));
        }
        states = next;
    }
    let mut by_set: BTreeMap<ThetaSet, SuperRationalFunction> = BTreeMap::new();
    for (m, s_g, sgn) in states {
        let slot = by_set.entry(s_g).or_insert_with(Graded::zero);
        *slot = l.add(slot, &l.scale(&m, &RatFunc::constant(GaussianRational::from_int(sgn))));
    }
    // the derivative-free channel is T(h) g and cancels against -H' g
    let underived = by_set.remove(&0).unwrap_or_default();
    assert_eq!(underived, h_top, "underived channel must equal the top part");
    let mut terms: Vec<OpTerm> = Vec::new();
    for (s_g, coeff) in by_set {
        if coeff.is_zero() {
            continue;
        }
        terms.push(OpTerm {
            channel: FormChannel::Dz,
            coeff: LogRational::from_rat(coeff),
            z_order: 0,
            thetas: s_g,
        });
    }
    // - d(H g) minus the cancelled H' g piece: -H dg/dz on dz, -H dg/dtheta_i
    let neg_h = h_anti.neg(l);
    terms.push(OpTerm {
        channel: FormChannel::Dz,
        coeff: neg_h.clone(),
        z_order: 1,
        thetas: 0,
    });
    for i in 1..=l.q {
        terms.push(OpTerm {
            channel: FormChannel::Dtheta(i),
            coeff: neg_h.clone(),
            z_order: 0,
            thetas: 1 << (i - 1),
        });
    }
    Ok(DifferentialOperator { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::{qi, theta_set_len, BaseAlgebra};
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

    fn theta_top(l: &Lambda) -> SuperRationalFunction {
        let mut t: SuperRationalFunction = l.one();
        for i in 1..=l.q {
            t = l.mul(&t, &l.theta(i));
        }
        t
    }

    #[test]
    fn residue_examples() {
        for q in 1..=2usize {
            let l = lam(0, q);
            let inv_z = rf(&[1], &[0, 1]);
            let w = BerSection::new(l.scale(&theta_top(&l), &inv_z));
            assert_eq!(
                l.reduce(&w.residue(&l, &PointP1::finite_i64(0))),
                qi(1, 1)
            );
            // no top component: residue 0
            let w2 = BerSection::new(Graded::term(0, 0, inv_z));
            assert!(w2.residue(&l, &PointP1::finite_i64(0)).is_zero());
            // theta_top/(z(z-1)): residues -1, +1, 0 summing to zero
            let f = rf(&[1], &[0, -1, 1]);
            let w3 = BerSection::new(l.scale(&theta_top(&l), &f));
            assert_eq!(l.reduce(&w3.residue(&l, &PointP1::finite_i64(0))), qi(-1, 1));
            assert_eq!(l.reduce(&w3.residue(&l, &PointP1::finite_i64(1))), qi(1, 1));
            assert!(w3.residue(&l, &PointP1::Infinity).is_zero());
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let l = lam(2, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let mut g: SuperRationalFunction = Graded::zero();
            for b in 0..l.base.dim() {
                for s in 0..(1u32 << l.q) {
                    if rng.gen_bool(0.5) {
                        g.insert(
                            b,
                            s,
                            rf(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)], &[0, 1]),
                        );
                    }
                }
            }
            let one = d_scalar(&l, &LogRational::from_rat(g));
            assert!(d_one_form(&l, &one).is_zero());
        }
        // with a log coefficient as well
        let g = LogRational {
            rat: Graded::zero(),
            logs: [(qi(2, 1), l.mul::<RatFunc>(&l.theta(1), &l.generator("beta1").unwrap()))]
                .into_iter()
                .collect(),
        };
        assert!(d_one_form(&l, &d_scalar(&l, &g)).is_zero());
    }

    #[test]
    fn automorphism_validation() {
        let l = lam(1, 1);
        // z image must reduce to z
        assert!(LocalAutomorphism::new(&l, l.one(), vec![l.theta(1)]).is_err());
        // theta image must be odd
        assert!(LocalAutomorphism::new(&l, l.z_fn(), vec![l.z_fn()]).is_err());
        // singular linear part rejected
        assert!(LocalAutomorphism::new(&l, l.z_fn(), vec![Graded::zero()]).is_err());
        // the z^k twist is fine
        let tw = LocalAutomorphism::new(
            &l,
            l.z_fn(),
            vec![l.scale(&l.theta(1), &rf(&[0, 0, 0, 1], &[1]))],
        );
        assert!(tw.is_ok());
    }

    #[test]
    fn twist_inverse_and_apply() {
        let l = lam(0, 1);
        // gamma: theta -> z theta; inverse: theta -> theta / z
        let g = LocalAutomorphism::new(
            &l,
            l.z_fn(),
            vec![l.scale(&l.theta(1), &RatFunc::z())],
        )
        .unwrap();
        let gi = g.inverse(&l).unwrap();
        assert_eq!(gi.image_theta[0], l.scale(&l.theta(1), &rf(&[1], &[0, 1])));
        // apply gamma^{-1} to theta/z: theta/z^2
        let f = l.scale(&l.theta(1), &rf(&[1], &[0, 1]));
        assert_eq!(gi.apply(&l, &f), l.scale(&l.theta(1), &rf(&[1], &[0, 0, 1])));
    }

    fn random_fn(l: &Lambda, rng: &mut impl Rng) -> SuperRationalFunction {
        let mut g: SuperRationalFunction = Graded::zero();
        for b in 0..l.base.dim() {
            for s in 0..(1u32 << l.q) {
                if rng.gen_bool(0.4) {
                    g.insert(
                        b,
                        s,
                        rf(
                            &[rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
                            &[rng.gen_range(1..=2), 1],
                        ),
                    );
                }
            }
        }
        g
    }

    fn random_autplus(l: &Lambda, rng: &mut impl Rng) -> LocalAutomorphism {
        loop {
            // z + even nilpotent
            let mut zi = l.z_fn();
            for b in 1..l.base.dim() {
                for s in 0..(1u32 << l.q) {
                    if l.term_parity(b, s) == 0 && rng.gen_bool(0.3) {
                        zi.insert(b, s, rf(&[rng.gen_range(-2..=2), rng.gen_range(0..=1)], &[1]));
                    }
                }
            }
            for s in 0..(1u32 << l.q) {
                if s != 0 && theta_set_len(s) % 2 == 0 && rng.gen_bool(0.3) {
                    zi.insert(0, s, rf(&[rng.gen_range(-2..=2)], &[1]));
                }
            }
            let mut thetas = Vec::new();
            for i in 1..=l.q {
                let mut t: SuperRationalFunction = Graded::zero();
                for j in 1..=l.q {
                    let c = if i == j {
                        // unit-or-twist diagonal coefficient
                        match rng.gen_range(0..3) {
                            0 => rf(&[1], &[1]),
                            1 => rf(&[0, 1], &[1]),
                            _ => rf(&[1, 1], &[1]),
                        }
                    } else if rng.gen_bool(0.3) {
                        rf(&[rng.gen_range(-2..=2)], &[1])
                    } else {
                        RatFunc::zero()
                    };
                    if !c.is_zero() {
                        t.insert(0, 1 << (j - 1), c);
                    }
                }
                // odd nilpotent extras
                for b in 1..l.base.dim() {
                    for s in 0..(1u32 << l.q) {
                        if l.term_parity(b, s) == 1 && rng.gen_bool(0.2) {
                            t.insert(b, s, rf(&[rng.gen_range(-2..=2)], &[1]));
                        }
                    }
                }
                thetas.push(t);
            }
            if let Ok(a) = LocalAutomorphism::new(l, zi, thetas) {
                return a;
            }
        }
    }

    #[test]
    fn inverse_random_roundtrip_and_homomorphism() {
        let l = lam(2, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..6 {
            let s = random_autplus(&l, &mut rng);
            let si = s.inverse(&l).unwrap();
            let f = random_fn(&l, &mut rng);
            let g = random_fn(&l, &mut rng);
            assert_eq!(s.apply(&l, &si.apply(&l, &f)), f);
            // ring homomorphism: sigma(fg) = sigma(f) sigma(g)
            assert_eq!(
                s.apply(&l, &l.mul(&f, &g)),
                l.mul(&s.apply(&l, &f), &s.apply(&l, &g))
            );
        }
    }

    #[test]
    fn jacobian_examples() {
        // q=1, B=C[eps]/eps^2: w = z, eta = (1+eps c(z)) theta
        let le = Lambda::new(BaseAlgebra::even_truncated(2), 1);
        let eps: SuperRationalFunction = le.generator("eps").unwrap();
        let c = rf(&[0, 0, 1], &[1]); // c(z) = z^2, c' = 2z
        let eta = le.mul(
            &le.add(&le.one(), &le.scale(&eps, &c)),
            &le.theta(1),
        );
        let s = LocalAutomorphism::new(&le, le.z_fn(), vec![eta]).unwrap();
        let j = super_jacobian(&le, &s);
        assert_eq!(j.rows[0][0], le.one());
        assert!(j.rows[0][1].is_zero());
        // d eta / dz = eps c'(z) theta
        assert_eq!(
            j.rows[1][0],
            le.mul(&le.scale(&eps, &rf(&[0, 2], &[1])), &le.theta(1))
        );
        assert_eq!(j.rows[1][1], le.add(&le.one(), &le.scale(&eps, &c)));
        // q=1, B=C[beta]: w = z + beta theta, eta = theta
        let l = lam(1, 1);
        let beta: SuperRationalFunction = l.generator("beta1").unwrap();
        let w = l.add(&l.z_fn(), &l.mul(&beta, &l.theta(1)));
        let s2 = LocalAutomorphism::new(&l, w, vec![l.theta(1)]).unwrap();
        let j2 = super_jacobian(&l, &s2);
        assert_eq!(j2.rows[0][0], l.one());
        assert_eq!(j2.rows[0][1], beta);
        assert!(j2.rows[1][0].is_zero());
        assert_eq!(j2.rows[1][1], l.one());
    }

    #[test]
    fn change_of_variables_examples() {
        let le = Lambda::new(BaseAlgebra::even_truncated(2), 1);
        let id = LocalAutomorphism::identity(&le);
        let w = BerSection::new(le.scale(&le.theta(1), &rf(&[1], &[0, 1])));
        assert_eq!(change_of_variables(&le, &w, &id).unwrap(), w);
        // eta = (1+eps c) theta, h = eta/w pulls back to theta/z
        let eps: SuperRationalFunction = le.generator("eps").unwrap();
        let c = rf(&[0, 1], &[1]);
        let unit = le.add(&le.one(), &le.scale(&eps, &c));
        let s = LocalAutomorphism::new(&le, le.z_fn(), vec![le.mul(&unit, &le.theta(1))]).unwrap();
        let transformed = change_of_variables(&le, &w, &s).unwrap();
        // residues at 0 agree
        assert_eq!(
            transformed.residue(&le, &PointP1::finite_i64(0)),
            w.residue(&le, &PointP1::finite_i64(0))
        );
    }

    #[test]
    fn change_of_variables_residue_invariance_randomized() {
        let l = lam(2, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        let pts = [
            PointP1::finite_i64(0),
            PointP1::finite_i64(1),
            PointP1::finite_i64(-2),
            PointP1::Infinity,
        ];
        for _ in 0..8 {
            let s = random_autplus(&l, &mut rng);
            let w = BerSection::new(random_fn(&l, &mut rng));
            let t = change_of_variables(&l, &w, &s).unwrap();
            for p in &pts {
                assert_eq!(t.residue(&l, p), w.residue(&l, p), "residue changed at {p}");
            }
        }
    }

    #[test]
    fn antiderivative_examples() {
        let l = lam(0, 1);
        // 1/z^2 + 3/z + z -> -1/z + 3 Log(z) + z^2/2
        let f: SuperRationalFunction = Graded::term(
            0,
            0,
            rf(&[1], &[0, 0, 1]).add(&rf(&[3], &[0, 1])).add(&RatFunc::z()),
        );
        let h = antiderivative(&l, &f).unwrap();
        let want_rat = rf(&[-1], &[0, 1]).add(&RatFunc::new(
            Poly::from_coeffs(vec![qi(0, 1), qi(0, 1), qi(1, 2)]),
            Poly::one(),
        ));
        assert_eq!(h.rat, Graded::term(0, 0, want_rat));
        assert_eq!(h.logs.len(), 1);
        assert_eq!(h.logs.get(&qi(0, 1)).unwrap(), &l.scalar(&qi(3, 1)));
        // derivative of the antiderivative is the original
        assert_eq!(h.z_derivative(&l), LogRational::from_rat(f));
    }

    #[test]
    fn log_residue_examples() {
        let l = lam(0, 1);
        // (1/(z-1)) Log(z+1) at 1: residue Log(2)
        let f = LogRational {
            rat: Graded::zero(),
            logs: [(qi(-1, 1), l.scalar::<RatFunc>(&qi(1, 1)))].into_iter().collect(),
        }
        .mul_left(&l, &Graded::term(0, 0, rf(&[1], &[-1, 1])));
        let r = log_residue(&l, &f, &PointP1::finite_i64(1)).unwrap();
        let want = formal_log(&qi(2, 1)).unwrap();
        assert_eq!(r.terms.get(&(0, 0)).unwrap(), &want);
        // branch point inside the evaluation point errors
        assert!(log_residue(&l, &f, &PointP1::finite_i64(-1)).is_err());
        // second-order pole against the log series: res of Log(z-2)/(z-1)^2
        // at 1 is the k=1 series coefficient 1/(1-2) = -1
        let f2 = LogRational {
            rat: Graded::zero(),
            logs: [(qi(2, 1), l.scalar::<RatFunc>(&qi(1, 1)))].into_iter().collect(),
        }
        .mul_left(&l, &Graded::term(0, 0, rf(&[1], &[1, -2, 1])));
        let r2 = log_residue(&l, &f2, &PointP1::finite_i64(1)).unwrap();
        // the Log(1-2) constant pairs with the vanishing (-1) coefficient of
        // 1/(z-1)^2, so the residue is purely rational
        let got = r2.terms.get(&(0, 0)).unwrap();
        assert_eq!(got, &LogScalar::from_rational(qi(-1, 1)));
    }

    #[test]
    fn lift_properties() {
        let l = lam(1, 1);
        // h = theta: H = z, L(g) = dz d/dtheta(theta g) - d(z g)
        let w = BerSection::new(l.theta(1));
        let op = lift_to_dsharp(&l, &w, &[PointP1::finite_i64(0)]).unwrap();
        assert!(op.annihilates_constants());
        assert!(op.apply(&l, &l.one()).is_zero());
        // closedness and agreement with the direct formula on random inputs
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..6 {
            let g = random_fn(&l, &mut rng);
            let lg = op.apply(&l, &g);
            assert!(d_one_form(&l, &lg).is_zero());
            // direct: dz T(h g) - d(H g)
            let hg = l.mul(&w.coeff, &g);
            let mut direct = OneForm::zero(l.q);
            direct.dz = LogRational::from_rat(l.berezin_top(&hg));
            let hgf = LogRational::from_rat(g.clone())
                .mul_left(&l, &Graded::term(0, 0, RatFunc::z()));
            direct = direct.sub(&l, &d_scalar(&l, &hgf));
            assert_eq!(lg, direct);
        }
        // h = z theta: H = z^2/2, same checks plus a pole-bearing instance
        let w2 = BerSection::new(l.scale(&l.theta(1), &RatFunc::z()));
        let op2 = lift_to_dsharp(&l, &w2, &[]).unwrap();
        assert!(op2.apply(&l, &l.one()).is_zero());
        let g = random_fn(&l, &mut rng);
        assert!(d_one_form(&l, &op2.apply(&l, &g)).is_zero());
        // a residue-carrying top part produces a log coefficient with branch
        // point at the pole; marking that point errors
        let w3 = BerSection::new(l.scale(&l.theta(1), &rf(&[1], &[-1, 1])));
        assert!(matches!(
            lift_to_dsharp(&l, &w3, &[PointP1::finite_i64(1)]),
            Err(Error::Precondition(_)) | Err(Error::BranchPointInRegion(_))
        ));
        let op3 = lift_to_dsharp(&l, &w3, &[PointP1::finite_i64(0)]).unwrap();
        assert!(op3.apply(&l, &l.one()).is_zero());
    }

    #[test]
    fn apply_to_log_examples() {
        let l = lam(1, 1);
        let w = BerSection::new(l.theta(1));
        let op = lift_to_dsharp(&l, &w, &[]).unwrap();
        // constant unit: zero
        let c: SuperRationalFunction = l.scalar(&qi(5, 1));
        assert!(op.apply_to_log(&l, &c).unwrap().is_zero());
        // f = z gives a rational one-form
        let lz = op.apply_to_log(&l, &l.z_fn()).unwrap();
        assert!(!lz.is_zero());
        assert!(lz.dz.logs.is_empty() && lz.dtheta.iter().all(|t| t.logs.is_empty()));
        // additivity over products
        let beta: SuperRationalFunction = l.generator("beta1").unwrap();
        let f1 = l.add(&l.z_fn(), &l.mul(&beta, &l.theta(1)));
        let f2 = l.add(&l.scalar(&qi(2, 1)), &l.mul(&beta, &l.theta(1)));
        let both = op.apply_to_log(&l, &l.mul(&f1, &f2)).unwrap();
        let sum = op
            .apply_to_log(&l, &f1)
            .unwrap()
            .add(&l, &op.apply_to_log(&l, &f2).unwrap());
        assert_eq!(both, sum);
    }
}

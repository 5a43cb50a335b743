//! Supercurves with reduced space P^1 and their rank-one sheaves.
//!
//! A curve is described by gluing data: at finitely many points the structure
//! sheaf is twisted by a local automorphism `gamma_P`, and a bundle twists
//! further by an even invertible multiplier `xi_P`.  The stalk of the bundle
//! at `P` is `gamma_P(xi_P . O_P)`.
//!
//! Cohomology is computed through a finite model: repartitions are truncated
//! to Laurent-jet windows at a marked point set, and the quotient by stalk
//! elements and global rational functions is carried out exactly as a
//! B-module.  Every public cohomology entry point re-runs itself with doubled
//! pole caps and an enlarged marked set and insists the answer is unchanged.

use std::collections::BTreeMap;

use crate::berezin::LocalAutomorphism;
use crate::scalars::GaussianRational;
use crate::superalgebra::{qi, Graded, Lambda, SuperElement, ThetaSet};
use crate::superfunction::{PointP1, RatFunc, SuperRationalFunction};
use crate::superlinalg::{identity_matrix, kernel_basis, BModuleRep, ScalarMatrix};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// curves and bundles
// ---------------------------------------------------------------------------

/// A supercurve of dimension 1|q over the base algebra: the projective line
/// with the structure sheaf twisted at finitely many points.
#[derive(Debug, Clone)]
pub struct SuperCurve {
    pub lambda: Lambda,
    gluing: BTreeMap<PointP1, LocalAutomorphism>,
    inverses: BTreeMap<PointP1, LocalAutomorphism>,
}

impl SuperCurve {
    pub fn new(lambda: Lambda, gluing: BTreeMap<PointP1, LocalAutomorphism>) -> Result<Self> {
        let mut glue = BTreeMap::new();
        let mut inverses = BTreeMap::new();
        for (p, g) in gluing {
            if g.is_identity(&lambda) {
                continue;
            }
            inverses.insert(p.clone(), g.inverse(&lambda)?);
            glue.insert(p, g);
        }
        Ok(SuperCurve {
            lambda,
            gluing: glue,
            inverses,
        })
    }

    pub fn trivial(lambda: Lambda) -> Self {
        SuperCurve {
            lambda,
            gluing: BTreeMap::new(),
            inverses: BTreeMap::new(),
        }
    }

    pub fn q(&self) -> usize {
        self.lambda.q
    }

    pub fn gluing(&self) -> &BTreeMap<PointP1, LocalAutomorphism> {
        &self.gluing
    }

    /// Points with nontrivial gluing.
    pub fn support(&self) -> Vec<PointP1> {
        self.gluing.keys().cloned().collect()
    }

    pub fn gamma(&self, p: &PointP1) -> LocalAutomorphism {
        self.gluing
            .get(p)
            .cloned()
            .unwrap_or_else(|| LocalAutomorphism::identity(&self.lambda))
    }

    pub fn gamma_apply(&self, p: &PointP1, f: &SuperRationalFunction) -> SuperRationalFunction {
        match self.gluing.get(p) {
            Some(g) => g.apply(&self.lambda, f),
            None => f.clone(),
        }
    }

    pub fn gamma_inv_apply(&self, p: &PointP1, f: &SuperRationalFunction) -> SuperRationalFunction {
        match self.inverses.get(p) {
            Some(g) => g.apply(&self.lambda, f),
            None => f.clone(),
        }
    }
}

/// A rank-one locally free sheaf on a supercurve, given by even invertible
/// multiplier germs at finitely many points.
#[derive(Debug, Clone)]
pub struct BundleData {
    pub curve: SuperCurve,
    multipliers: BTreeMap<PointP1, SuperRationalFunction>,
    inv_multipliers: BTreeMap<PointP1, SuperRationalFunction>,
}

impl BundleData {
    pub fn new(
        curve: SuperCurve,
        multipliers: BTreeMap<PointP1, SuperRationalFunction>,
    ) -> Result<Self> {
        let l = curve.lambda.clone();
        let mut mult = BTreeMap::new();
        let mut inv = BTreeMap::new();
        for (p, xi) in multipliers {
            if xi == l.one() {
                continue;
            }
            if !l.is_in_ktimes(&xi) {
                return Err(Error::NotInKtimes(format!("multiplier at {p}")));
            }
            inv.insert(p.clone(), l.invert_ktimes(&xi)?);
            mult.insert(p, xi);
        }
        Ok(BundleData {
            curve,
            multipliers: mult,
            inv_multipliers: inv,
        })
    }

    pub fn trivial(curve: SuperCurve) -> Self {
        BundleData {
            curve,
            multipliers: BTreeMap::new(),
            inv_multipliers: BTreeMap::new(),
        }
    }

    pub fn lambda(&self) -> &Lambda {
        &self.curve.lambda
    }

    pub fn multipliers(&self) -> &BTreeMap<PointP1, SuperRationalFunction> {
        &self.multipliers
    }

    pub fn xi(&self, p: &PointP1) -> SuperRationalFunction {
        self.multipliers
            .get(p)
            .cloned()
            .unwrap_or_else(|| self.curve.lambda.one())
    }

    pub fn xi_inv(&self, p: &PointP1) -> SuperRationalFunction {
        self.inv_multipliers
            .get(p)
            .cloned()
            .unwrap_or_else(|| self.curve.lambda.one())
    }

    /// Points where the curve or the bundle is nontrivial.
    pub fn support(&self) -> Vec<PointP1> {
        let mut pts = self.curve.support();
        for p in self.multipliers.keys() {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        pts.sort();
        pts
    }

    /// Membership of `f` in the stalk of the sheaf at `p`:
    /// `xi_P^{-1} gamma_P^{-1}(f)` must be regular at `p`.
    pub fn stalk_member(&self, f: &SuperRationalFunction, p: &PointP1) -> bool {
        let l = self.lambda();
        let g = l.mul(&self.xi_inv(p), &self.curve.gamma_inv_apply(p, f));
        g.terms
            .values()
            .all(|r| r.order_at(p).map_or(true, |o| o >= 0))
    }

    /// The stalk element generated by a germ `f` regular at `p`:
    /// `gamma_P(xi_P . f)`.
    pub fn stalk_image(&self, p: &PointP1, f: &SuperRationalFunction) -> SuperRationalFunction {
        let l = self.lambda();
        self.curve.gamma_apply(p, &l.mul(&self.xi(p), f))
    }
}

pub fn stalk_member(f: &SuperRationalFunction, p: &PointP1, bundle: &BundleData) -> bool {
    bundle.stalk_member(f, p)
}

// ---------------------------------------------------------------------------
// truncation bounds
// ---------------------------------------------------------------------------

/// Finite model parameters: the marked point set carrying Laurent-jet
/// windows, a base pole-order cap, and one extra marked point at which no
/// pole is ever allowed (so that constants are not quotiented twice).
#[derive(Debug, Clone)]
pub struct TruncationBounds {
    /// Marked points where poles are allowed; always contains the supports
    /// of the gluing and the multipliers, and the point at infinity.
    pub points: Vec<PointP1>,
    /// Extra marked point: carries a jet window but no pole allowance.
    pub no_pole: PointP1,
    /// Base pole-order cap.
    pub n: i64,
}

fn fresh_points(avoid: &[PointP1], count: usize) -> Vec<PointP1> {
    let mut out = Vec::new();
    let mut k = 1i64;
    while out.len() < count {
        let p = PointP1::finite_i64(k);
        if !avoid.contains(&p) && !out.contains(&p) {
            out.push(p);
        }
        k += 1;
    }
    out
}

impl TruncationBounds {
    pub fn for_bundle(bundle: &BundleData, n: i64) -> Self {
        Self::with_points(bundle, n, &[])
    }

    /// Bounds whose marked set additionally contains `extra` (for divisor
    /// supports, principal-part supports, and the like).
    pub fn with_points(bundle: &BundleData, n: i64, extra: &[PointP1]) -> Self {
        let mut points = bundle.support();
        for p in extra.iter().chain(std::iter::once(&PointP1::Infinity)) {
            if !points.contains(p) {
                points.push(p.clone());
            }
        }
        points.sort();
        let no_pole = fresh_points(&points, 1).pop().unwrap();
        TruncationBounds {
            points,
            no_pole,
            n: n.max(1),
        }
    }

    /// Uniformly rescale the pole cap (the doubling consistency check scales
    /// along with it).
    pub fn scaled(&self, factor: i64) -> Self {
        let mut out = self.clone();
        out.n *= factor.max(1);
        out
    }

    /// The stability variant: doubled pole cap and two more marked points.
    fn doubled(&self) -> Self {
        let mut avoid = self.points.clone();
        avoid.push(self.no_pole.clone());
        let mut points = self.points.clone();
        points.extend(fresh_points(&avoid, 2));
        points.sort();
        TruncationBounds {
            points,
            no_pole: self.no_pole.clone(),
            n: self.n * 2,
        }
    }

    /// All window points: the pole-carrying marked set plus the extra point.
    fn marked(&self) -> Vec<PointP1> {
        let mut pts = self.points.clone();
        pts.push(self.no_pole.clone());
        pts.sort();
        pts
    }
}

// ---------------------------------------------------------------------------
// finite model internals
// ---------------------------------------------------------------------------

/// Upper bound for the nilpotency index of the nilpotent part of Lambda.
fn nilpotent_index_bound(l: &Lambda) -> i64 {
    (l.base.dim() + l.q) as i64
}

/// Worst pole depth at `p` over the components of `f`.
fn pole_depth(f: &SuperRationalFunction, p: &PointP1) -> i64 {
    f.terms
        .values()
        .map(|r| r.order_at(p).map_or(0, |o| (-o).max(0)))
        .max()
        .unwrap_or(0)
}

/// Conservative bound for how far `gamma^{+-1}` and `xi^{+-1}` at `p` can
/// lower the order of a germ: a nilpotent shift of z of pole depth d can
/// contribute at most nilpotency_index * (1 + d), each theta image its own
/// pole depth, and the multiplier its pole depth.
fn pole_slack(bundle: &BundleData, p: &PointP1) -> i64 {
    let l = bundle.lambda();
    let mut gamma_slack = 0i64;
    let autos = [
        bundle.curve.gluing.get(p),
        bundle.curve.inverses.get(p),
    ];
    for g in autos.into_iter().flatten() {
        let nu = l.sub(&g.image_z, &l.z_fn());
        let from_z = if nu.is_zero() {
            0
        } else {
            nilpotent_index_bound(l) * (1 + pole_depth(&nu, p))
        };
        let from_theta = g
            .image_theta
            .iter()
            .map(|t| pole_depth(t, p))
            .max()
            .unwrap_or(0);
        gamma_slack = gamma_slack.max(from_z + (l.q as i64) * from_theta);
    }
    let xi_slack = pole_depth(&bundle.xi(p), p).max(pole_depth(&bundle.xi_inv(p), p));
    gamma_slack + xi_slack
}

/// Per-point model data: the jet window [low, high] and the truncated stalk
/// generators gamma_P(xi_P t^k theta_S b).
struct PointData {
    point: PointP1,
    low: i64,
    high: i64,
    stalk_gens: Vec<SuperRationalFunction>,
}

/// `(z - a)^k` at a finite point, `z^{-k}` at infinity: the k-th power of
/// the local parameter, as a global rational function.
fn germ_power(p: &PointP1, k: i64) -> RatFunc {
    let base = match p {
        PointP1::Finite(a) => RatFunc::z().sub(&RatFunc::constant(a.clone())),
        PointP1::Infinity => RatFunc::z().inv().unwrap(),
    };
    let e = k.unsigned_abs() as usize;
    let pos = RatFunc::new(base.num.pow(e), base.den.pow(e));
    if k >= 0 {
        pos
    } else {
        pos.inv().unwrap()
    }
}

fn point_data(bundle: &BundleData, bounds: &TruncationBounds) -> Result<Vec<PointData>> {
    let l = bundle.lambda();
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let mut out = Vec::new();
    for p in bounds.marked() {
        let slack = pole_slack(bundle, &p);
        let depth_cap = if p == bounds.no_pole {
            0
        } else {
            bounds.n + slack
        };
        let high = bounds.n + slack + 1;
        let kmax = high + slack;
        let mut low = -depth_cap;
        let mut gens = Vec::new();
        for k in 0..=kmax {
            let tk = germ_power(&p, k);
            for b in 0..nb {
                for s in 0..ns as ThetaSet {
                    let g = bundle.stalk_image(&p, &Graded::term(b, s, tk.clone()));
                    for r in g.terms.values() {
                        if let Some(o) = r.order_at(&p) {
                            low = low.min(o);
                        }
                    }
                    gens.push(g);
                }
            }
        }
        if p == bounds.no_pole && low < 0 {
            return Err(Error::Precondition(
                "the extra marked point must be regular for the gluing data".into(),
            ));
        }
        out.push(PointData {
            point: p,
            low,
            high,
            stalk_gens: gens,
        });
    }
    Ok(out)
}

/// Pole basis for global rational functions allowed by the windows: 1,
/// `(z-a)^{-j}` up to the window depth at each finite marked point, and
/// `z^j` up to the window depth at infinity.  The no-pole point contributes
/// nothing.
fn global_rationals(pds: &[PointData], bounds: &TruncationBounds) -> Vec<RatFunc> {
    let mut out = vec![RatFunc::one()];
    for pd in pds {
        if pd.point == bounds.no_pole {
            continue;
        }
        for j in 1..=(-pd.low) {
            out.push(germ_power(&pd.point, -j));
        }
    }
    out
}

/// Parity of the coordinate channels (b, s), one block of nb*ns channels per
/// slot, optionally shifted (used for Ber-twisted duals, whose sections pick
/// up the parity of dz d/dtheta_1 ... d/dtheta_q).
fn channel_parity(l: &Lambda, nslots: usize, shift: u8) -> Vec<u8> {
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let mut out = Vec::with_capacity(nslots * nb * ns);
    for _ in 0..nslots {
        for b in 0..nb {
            for s in 0..ns as ThetaSet {
                out.push((l.term_parity(b, s) + shift) % 2);
            }
        }
    }
    out
}

/// Left multiplication by each B-basis monomial, acting slotwise on
/// coordinates (slot, b, s).
fn channel_action(l: &Lambda, nslots: usize) -> Vec<ScalarMatrix> {
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let dim = nslots * nb * ns;
    let mut action = Vec::with_capacity(nb);
    for k in 0..nb {
        let mut m = vec![vec![GaussianRational::zero(); dim]; dim];
        for slot in 0..nslots {
            for b in 0..nb {
                for (b2, c) in &l.base.table[k][b] {
                    for s in 0..ns {
                        let col = (slot * nb + b) * ns + s;
                        let row = (slot * nb + b2) * ns + s;
                        m[row][col] = &m[row][col] + c;
                    }
                }
            }
        }
        action.push(m);
    }
    action
}

/// Write the Laurent coefficients of `f` at `pd.point` into the coordinate
/// block starting at `offset`; coefficients below the window are an error
/// (they would be silently lost).
fn scatter_window(
    l: &Lambda,
    f: &SuperRationalFunction,
    pd: &PointData,
    offset: usize,
    out: &mut [GaussianRational],
) -> Result<()> {
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let exp = l.laurent_expand(f, &pd.point, pd.high);
    for (e, coeff) in &exp.coeffs {
        if coeff.is_zero() {
            continue;
        }
        if *e < pd.low {
            return Err(Error::UnstableBounds(format!(
                "window at {} too shallow: coefficient at exponent {e}",
                pd.point
            )));
        }
        let slot = (*e - pd.low) as usize;
        for ((b, s), c) in &coeff.terms {
            let idx = offset + (slot * nb + b) * ns + *s as usize;
            out[idx] = &out[idx] + c;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// section spaces
// ---------------------------------------------------------------------------

/// A computed space of global sections: a B-module presentation together
/// with the rational-function pole basis needed to decode basis vectors
/// back into functions.
#[derive(Debug, Clone)]
pub struct SectionSpace {
    pub module: BModuleRep,
    pub rationals: Vec<RatFunc>,
    lambda: Lambda,
}

impl SectionSpace {
    pub fn graded_dim(&self) -> (usize, usize) {
        self.module.graded_dim()
    }

    fn decode(&self, v: &[GaussianRational]) -> SuperRationalFunction {
        let nb = self.lambda.base.dim();
        let ns = 1usize << self.lambda.q;
        let mut out: SuperRationalFunction = Graded::zero();
        for (c, coeff) in v.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let i = c / (nb * ns);
            let b = (c / ns) % nb;
            let s = (c % ns) as ThetaSet;
            let term = Graded::term(b, s, self.rationals[i].scale_by(coeff));
            out = self.lambda.add(&out, &term);
        }
        out
    }

    /// The i-th basis section as a function (for Ber-twisted duals this is
    /// the coefficient f of f dz d/dtheta_1 ... d/dtheta_q).
    pub fn function(&self, i: usize) -> SuperRationalFunction {
        self.decode(&self.module.basis[i])
    }

    pub fn functions(&self) -> Vec<SuperRationalFunction> {
        (0..self.module.rank()).map(|i| self.function(i)).collect()
    }
}

/// A computed first-cohomology module: basis classes are represented by
/// truncated repartitions over the marked windows.
#[derive(Debug, Clone)]
pub struct H1Space {
    pub module: BModuleRep,
    windows: Vec<(PointP1, i64, i64)>,
    lambda: Lambda,
}

impl H1Space {
    pub fn graded_dim(&self) -> (usize, usize) {
        self.module.graded_dim()
    }

    fn decode(&self, v: &[GaussianRational]) -> BTreeMap<PointP1, SuperRationalFunction> {
        let nb = self.lambda.base.dim();
        let ns = 1usize << self.lambda.q;
        let mut out = BTreeMap::new();
        let mut offset = 0usize;
        for (p, low, high) in &self.windows {
            let mut germ: SuperRationalFunction = Graded::zero();
            for slot in 0..=(high - low) as usize {
                for b in 0..nb {
                    for s in 0..ns {
                        let c = &v[offset + (slot * nb + b) * ns + s];
                        if c.is_zero() {
                            continue;
                        }
                        let term = Graded::term(
                            b,
                            s as ThetaSet,
                            germ_power(p, low + slot as i64).scale_by(c),
                        );
                        germ = self.lambda.add(&germ, &term);
                    }
                }
            }
            offset += ((high - low) as usize + 1) * nb * ns;
            if !germ.is_zero() {
                out.insert(p.clone(), germ);
            }
        }
        out
    }

    /// A representative repartition for the i-th basis class.
    pub fn repartition(&self, i: usize) -> BTreeMap<PointP1, SuperRationalFunction> {
        self.decode(&self.module.basis[i])
    }
}

// ---------------------------------------------------------------------------
// cohomology
// ---------------------------------------------------------------------------

fn h0_conditions(
    bundle: &BundleData,
    pds: &[PointData],
    rats: &[RatFunc],
) -> Result<ScalarMatrix> {
    let l = bundle.lambda();
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let dim = rats.len() * nb * ns;
    let mut rows: BTreeMap<(usize, i64, usize, ThetaSet), Vec<GaussianRational>> = BTreeMap::new();
    for (pi, pd) in pds.iter().enumerate() {
        for (i, r) in rats.iter().enumerate() {
            for b in 0..nb {
                for s in 0..ns as ThetaSet {
                    let col = (i * nb + b) * ns + s as usize;
                    let x = Graded::term(b, s, r.clone());
                    let img = l.mul(&bundle.xi_inv(&pd.point), &bundle.curve.gamma_inv_apply(&pd.point, &x));
                    let exp = l.laurent_expand(&img, &pd.point, -1);
                    for (e, coeff) in &exp.coeffs {
                        for ((b2, s2), c) in &coeff.terms {
                            if c.is_zero() {
                                continue;
                            }
                            let row = rows
                                .entry((pi, *e, *b2, *s2))
                                .or_insert_with(|| vec![GaussianRational::zero(); dim]);
                            row[col] = &row[col] + c;
                        }
                    }
                }
            }
        }
    }
    Ok(rows.into_values().collect())
}

fn h0_raw(bundle: &BundleData, bounds: &TruncationBounds) -> Result<SectionSpace> {
    let l = bundle.lambda();
    let pds = point_data(bundle, bounds)?;
    let rats = global_rationals(&pds, bounds);
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let rows = h0_conditions(bundle, &pds, &rats)?;
    let gens = kernel_basis(&rows, rats.len() * nb * ns);
    let module = BModuleRep::subquotient(
        l,
        &channel_parity(l, rats.len(), 0),
        &channel_action(l, rats.len()),
        &gens,
        &[],
    )?;
    Ok(SectionSpace {
        module,
        rationals: rats,
        lambda: l.clone(),
    })
}

fn h1_raw(bundle: &BundleData, bounds: &TruncationBounds) -> Result<H1Space> {
    let l = bundle.lambda();
    let pds = point_data(bundle, bounds)?;
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let mut offsets = Vec::with_capacity(pds.len());
    let mut dim = 0usize;
    for pd in &pds {
        offsets.push(dim);
        dim += ((pd.high - pd.low) as usize + 1) * nb * ns;
    }
    let nslots = dim / (nb * ns);

    let mut rels: ScalarMatrix = Vec::new();
    // stalk elements, supported at their own point
    for (pi, pd) in pds.iter().enumerate() {
        for g in &pd.stalk_gens {
            let mut v = vec![GaussianRational::zero(); dim];
            scatter_window(l, g, pd, offsets[pi], &mut v)?;
            if v.iter().any(|c| !c.is_zero()) {
                rels.push(v);
            }
        }
    }
    // global rational functions, truncated into every window
    for r in global_rationals(&pds, bounds) {
        for b in 0..nb {
            for s in 0..ns as ThetaSet {
                let f: SuperRationalFunction = Graded::term(b, s, r.clone());
                let mut v = vec![GaussianRational::zero(); dim];
                for (pi, pd) in pds.iter().enumerate() {
                    scatter_window(l, &f, pd, offsets[pi], &mut v)?;
                }
                if v.iter().any(|c| !c.is_zero()) {
                    rels.push(v);
                }
            }
        }
    }

    // Present the quotient in a window-independent coordinate order: polar
    // directions first, by increasing depth (each is absorbed by a relation
    // with its own pivot there), then regular orders ascending.  Under this
    // ordering, enlarging the windows or the marked set only contributes
    // coordinates that carry their own relation pivots, so the basis classes
    // of the quotient do not depend on the chosen bounds.
    let mut perm: Vec<usize> = Vec::with_capacity(dim);
    for polar in [true, false] {
        for (pi, pd) in pds.iter().enumerate() {
            let orders: Vec<i64> = if polar {
                (pd.low..0).rev().collect()
            } else {
                (pd.low.max(0)..=pd.high).collect()
            };
            for o in orders {
                let slot = (o - pd.low) as usize;
                for b in 0..nb {
                    for s in 0..ns {
                        perm.push(offsets[pi] + (slot * nb + b) * ns + s);
                    }
                }
            }
        }
    }
    let parity_amb = channel_parity(l, nslots, 0);
    let rels_p: ScalarMatrix = rels
        .iter()
        .map(|v| perm.iter().map(|&i| v[i].clone()).collect())
        .collect();
    let parity_p: Vec<u8> = perm.iter().map(|&i| parity_amb[i]).collect();
    let action_p: Vec<ScalarMatrix> = channel_action(l, nslots)
        .iter()
        .map(|m| {
            perm.iter()
                .map(|&r| perm.iter().map(|&c| m[r][c].clone()).collect())
                .collect()
        })
        .collect();
    let module_p =
        BModuleRep::subquotient(l, &parity_p, &action_p, &identity_matrix(dim), &rels_p)?;
    let mut basis = Vec::with_capacity(module_p.basis.len());
    for v in &module_p.basis {
        let mut w = vec![GaussianRational::zero(); dim];
        for (c, &i) in perm.iter().enumerate() {
            w[i] = v[c].clone();
        }
        basis.push(w);
    }
    let module = BModuleRep {
        lambda: module_p.lambda,
        basis,
        parity: module_p.parity,
        action: module_p.action,
        ambient_parity: parity_amb,
    };
    Ok(H1Space {
        module,
        windows: pds.iter().map(|pd| (pd.point.clone(), pd.low, pd.high)).collect(),
        lambda: l.clone(),
    })
}

fn h0_ber_raw(bundle: &BundleData, bounds: &TruncationBounds) -> Result<SectionSpace> {
    let l = bundle.lambda();
    let pds = point_data(bundle, bounds)?;
    let rats = global_rationals(&pds, bounds);
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let dim = rats.len() * nb * ns;

    let mut rows: ScalarMatrix = Vec::new();
    for pd in &pds {
        for g in &pd.stalk_gens {
            // residues of T(f g) dz at the point, one scalar row per
            // B-component of the value
            let mut block: BTreeMap<usize, Vec<GaussianRational>> = BTreeMap::new();
            for (i, r) in rats.iter().enumerate() {
                for b in 0..nb {
                    for s in 0..ns as ThetaSet {
                        let col = (i * nb + b) * ns + s as usize;
                        let x = Graded::term(b, s, r.clone());
                        let top = l.berezin_top(&l.mul(&x, g));
                        let res = l.residue_form(&top, &pd.point);
                        for ((b2, _), c) in &res.terms {
                            if c.is_zero() {
                                continue;
                            }
                            let row = block
                                .entry(*b2)
                                .or_insert_with(|| vec![GaussianRational::zero(); dim]);
                            row[col] = &row[col] + c;
                        }
                    }
                }
            }
            rows.extend(block.into_values());
        }
    }

    let gens = kernel_basis(&rows, dim);
    let module = BModuleRep::subquotient(
        l,
        &channel_parity(l, rats.len(), (l.q % 2) as u8),
        &channel_action(l, rats.len()),
        &gens,
        &[],
    )?;
    Ok(SectionSpace {
        module,
        rationals: rats,
        lambda: l.clone(),
    })
}

fn check_stable(label: &str, a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::UnstableBounds(format!(
            "{label} dimension changed under bound doubling: {a:?} vs {b:?}"
        )));
    }
    Ok(())
}

/// Global sections of the bundle, with the doubling consistency check.
pub fn h0(bundle: &BundleData, bounds: &TruncationBounds) -> Result<SectionSpace> {
    let a = h0_raw(bundle, bounds)?;
    let b = h0_raw(bundle, &bounds.doubled())?;
    check_stable("h0", a.module.graded_dim(), b.module.graded_dim())?;
    Ok(a)
}

/// First cohomology of the bundle as a truncated repartition quotient, with
/// the doubling consistency check.
pub fn h1(bundle: &BundleData, bounds: &TruncationBounds) -> Result<H1Space> {
    let a = h1_raw(bundle, bounds)?;
    let b = h1_raw(bundle, &bounds.doubled())?;
    check_stable("h1", a.module.graded_dim(), b.module.graded_dim())?;
    Ok(a)
}

/// Global sections of the Ber-twisted dual: coefficients f such that
/// f dz d/dtheta_1 ... d/dtheta_q annihilates every stalk under the residue
/// pairing.  With the doubling consistency check.
pub fn h0_ber(bundle: &BundleData, bounds: &TruncationBounds) -> Result<SectionSpace> {
    let a = h0_ber_raw(bundle, bounds)?;
    let b = h0_ber_raw(bundle, &bounds.doubled())?;
    check_stable("h0_ber", a.module.graded_dim(), b.module.graded_dim())?;
    Ok(a)
}

// ---------------------------------------------------------------------------
// duality pairing
// ---------------------------------------------------------------------------

/// Residue pairing of a dual section coefficient with a repartition:
/// sum over the given points of res_P(T(f r_P)) dz.
fn pair_with_repartition(
    l: &Lambda,
    f: &SuperRationalFunction,
    rep: &BTreeMap<PointP1, SuperRationalFunction>,
) -> SuperElement {
    let mut total: SuperElement = Graded::zero();
    for (p, germ) in rep {
        let top = l.berezin_top(&l.mul(f, germ));
        total = l.add(&total, &l.residue_form(&top, p));
    }
    total
}

/// Check that every dual-section basis element annihilates the repartition
/// relations: stalk elements at each marked point, and Lambda-constants
/// (which pair to a total residue of a global rational function).
fn pairing_annihilates_relations(
    bundle: &BundleData,
    bounds: &TruncationBounds,
    ber: &SectionSpace,
) -> Result<bool> {
    let l = bundle.lambda();
    let nb = l.base.dim();
    let ns = 1usize << l.q;
    let pds = point_data(bundle, bounds)?;
    let fns = ber.functions();
    for f in &fns {
        for pd in &pds {
            for g in &pd.stalk_gens {
                let top = l.berezin_top(&l.mul(f, g));
                if !l.residue_form(&top, &pd.point).is_zero() {
                    return Ok(false);
                }
            }
        }
        // Lambda-constants: total residue over all marked points
        for b in 0..nb {
            for s in 0..ns as ThetaSet {
                let c: SuperRationalFunction = Graded::term(b, s, RatFunc::one());
                let rep: BTreeMap<PointP1, SuperRationalFunction> =
                    pds.iter().map(|pd| (pd.point.clone(), c.clone())).collect();
                if !pair_with_repartition(l, f, &rep).is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn pairing_matrix(
    l: &Lambda,
    ber: &SectionSpace,
    h1s: &H1Space,
) -> Vec<Vec<SuperElement>> {
    let fns = ber.functions();
    let reps: Vec<_> = (0..h1s.module.rank()).map(|j| h1s.repartition(j)).collect();
    fns.iter()
        .map(|f| reps.iter().map(|r| pair_with_repartition(l, f, r)).collect())
        .collect()
}

/// The B-valued duality pairing matrix (rows: dual sections, columns: h1
/// classes); errors if the pairing fails to annihilate the relations, since
/// the values would then depend on the chosen representatives.
pub fn serre_pairing(
    bundle: &BundleData,
    bounds: &TruncationBounds,
    ber: &SectionSpace,
    h1s: &H1Space,
) -> Result<Vec<Vec<SuperElement>>> {
    if !pairing_annihilates_relations(bundle, bounds, ber)? {
        return Err(Error::Precondition(
            "duality pairing depends on the chosen representatives".into(),
        ));
    }
    Ok(pairing_matrix(bundle.lambda(), ber, h1s))
}

/// Outcome of the duality verification for one bundle.
#[derive(Debug, Clone)]
pub struct DualityReport {
    pub h0_ber_dim: (usize, usize),
    pub h1_dim: (usize, usize),
    /// Rows: dual-section basis; columns: h1 basis.
    pub pairing: Vec<Vec<SuperElement>>,
    /// The pairing annihilates stalk elements and constants.
    pub annihilates_relations: bool,
    /// h1 injects into the B-linear dual of the Ber-twisted section module.
    pub injective: bool,
    /// h1 maps onto the full B-linear dual (perfect pairing).
    pub perfect: bool,
}

impl DualityReport {
    pub fn ok(&self) -> bool {
        self.annihilates_relations && self.injective && self.perfect
    }
}

/// Scalar equations cutting out the B-linear functionals of value parity
/// `pphi` from the module `m` to B, in the coordinate space (basis index,
/// B-monomial).  The duality functionals arise from the Berezin top
/// d/dtheta_q ... d/dtheta_1, an odd operation exactly when q is odd, so
/// they live on the q-fold parity shift of the module:
/// phi(b m) = (-1)^{|b| q} b phi(m), with phi(m_i) supported in B-parity
/// |m_i| + pphi.
fn hom_equations(m: &BModuleRep, pphi: u8) -> ScalarMatrix {
    let l = &m.lambda;
    let nb = l.base.dim();
    let r = m.rank();
    let dim = r * nb;
    let mut rows = Vec::new();
    // homogeneity of the values
    for i in 0..r {
        for c in 0..nb {
            if l.base.parity[c] != (m.parity[i] + pphi) % 2 {
                let mut row = vec![GaussianRational::zero(); dim];
                row[i * nb + c] = GaussianRational::one();
                rows.push(row);
            }
        }
    }
    // linearity: phi(b_k m_i) - (-1)^{|b_k| q} b_k phi(m_i) = 0,
    // one scalar row per output B-component
    for k in 0..nb {
        let sign = if l.base.parity[k] == 1 && l.q % 2 == 1 {
            qi(-1, 1)
        } else {
            qi(1, 1)
        };
        for i in 0..r {
            for c_out in 0..nb {
                let mut row = vec![GaussianRational::zero(); dim];
                for j in 0..r {
                    let a = &m.action[k][j][i];
                    if !a.is_zero() {
                        row[j * nb + c_out] = &row[j * nb + c_out] + a;
                    }
                }
                for c in 0..nb {
                    for (c2, coeff) in &l.base.table[k][c] {
                        if *c2 == c_out {
                            row[i * nb + c] = &row[i * nb + c] - &(&sign * coeff);
                        }
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    rows
}

/// Compute the duality data for a bundle and check well-definedness,
/// injectivity, and perfectness of the pairing.
pub fn verify_duality(bundle: &BundleData, bounds: &TruncationBounds) -> Result<DualityReport> {
    let l = bundle.lambda();
    let nb = l.base.dim();
    let ber = h0_ber(bundle, bounds)?;
    let h1s = h1(bundle, bounds)?;
    let annihilates = pairing_annihilates_relations(bundle, bounds, &ber)?;
    let pairing = pairing_matrix(l, &ber, &h1s);

    let n_f = ber.module.rank();
    let n_g = h1s.module.rank();
    // column j = the functional phi_j in coordinates (i, B-monomial)
    let columns: Vec<Vec<GaussianRational>> = (0..n_g)
        .map(|j| {
            let mut v = vec![GaussianRational::zero(); n_f * nb];
            for i in 0..n_f {
                for ((b, _), c) in &pairing[i][j].terms {
                    v[i * nb + b] = &v[i * nb + b] + c;
                }
            }
            v
        })
        .collect();

    // injectivity: the columns are linearly independent over the scalars
    let eqs: ScalarMatrix = (0..n_f * nb)
        .map(|r| columns.iter().map(|col| col[r].clone()).collect())
        .collect();
    let injective = kernel_basis(&eqs, n_g).is_empty();

    // perfectness: each column is a B-linear functional of the parity of its
    // h1 class, and together they span the full space of graded B-linear
    // functionals
    let hom_eqs = [hom_equations(&ber.module, 0), hom_equations(&ber.module, 1)];
    let hom_dim = kernel_basis(&hom_eqs[0], n_f * nb).len() + kernel_basis(&hom_eqs[1], n_f * nb).len();
    let linear = columns.iter().enumerate().all(|(j, col)| {
        hom_eqs[h1s.module.parity[j] as usize].iter().all(|row| {
            row.iter()
                .zip(col.iter())
                .fold(GaussianRational::zero(), |acc, (a, x)| &acc + &(a * x))
                .is_zero()
        })
    });
    let image_rank = crate::superlinalg::rank(&columns);
    let perfect = injective && linear && image_rank == hom_dim;

    Ok(DualityReport {
        h0_ber_dim: ber.module.graded_dim(),
        h1_dim: h1s.module.graded_dim(),
        pairing,
        annihilates_relations: annihilates,
        injective,
        perfect,
    })
}

/// Mittag-Leffler style solvability: principal parts (finite singular tails)
/// can be realized by a global section of the Ber-twisted sheaf iff the
/// residue pairing with every global function vanishes.
pub fn principal_part_solvable(
    curve: &SuperCurve,
    parts: &BTreeMap<PointP1, SuperRationalFunction>,
    n: i64,
) -> Result<bool> {
    let bundle = BundleData::trivial(curve.clone());
    let support: Vec<PointP1> = parts.keys().cloned().collect();
    let bounds = TruncationBounds::with_points(&bundle, n, &support);
    let sections = h0(&bundle, &bounds)?;
    let l = bundle.lambda();
    for g in sections.functions() {
        let mut total: SuperElement = Graded::zero();
        for (p, tail) in parts {
            let top = l.berezin_top(&l.mul(tail, &g));
            total = l.add(&total, &l.residue_form(&top, p));
        }
        if !total.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superalgebra::{qi, BaseAlgebra};

    fn lam_c(q: usize) -> Lambda {
        Lambda::new(BaseAlgebra::scalars(), q)
    }

    fn lam_g(m: usize, q: usize) -> Lambda {
        Lambda::new(BaseAlgebra::grassmann(m), q)
    }

    fn p0() -> PointP1 {
        PointP1::finite_i64(0)
    }

    fn zp(k: i64) -> RatFunc {
        germ_power(&p0(), k)
    }

    /// q = 1 curve with the odd twist theta -> z^k theta at 0.
    fn twist_curve(l: &Lambda, k: i64) -> SuperCurve {
        let g = LocalAutomorphism::new(l, l.z_fn(), vec![Graded::term(0, 1, zp(k))]).unwrap();
        SuperCurve::new(l.clone(), BTreeMap::from([(p0(), g)])).unwrap()
    }

    fn xi_bundle(curve: &SuperCurve, k: i64) -> BundleData {
        let xi: SuperRationalFunction = Graded::term(0, 0, zp(k));
        BundleData::new(curve.clone(), BTreeMap::from([(p0(), xi)])).unwrap()
    }

    #[test]
    fn stalk_membership_examples() {
        let l = lam_c(1);
        let trivial = BundleData::trivial(SuperCurve::trivial(l.clone()));
        let inv_z: SuperRationalFunction = Graded::term(0, 0, zp(-1));
        assert!(!trivial.stalk_member(&inv_z, &p0()));
        assert!(trivial.stalk_member(&l.one(), &p0()));

        // simple pole allowed by the multiplier
        let pole = xi_bundle(&SuperCurve::trivial(l.clone()), -1);
        assert!(pole.stalk_member(&inv_z, &p0()));
        let inv_z2: SuperRationalFunction = Graded::term(0, 0, zp(-2));
        assert!(!pole.stalk_member(&inv_z2, &p0()));

        // odd twist theta -> z theta: the odd stalk at 0 is z theta O
        let tw = BundleData::trivial(twist_curve(&l, 1));
        let theta_over_z: SuperRationalFunction = Graded::term(0, 1, zp(-1));
        let theta: SuperRationalFunction = l.theta(1);
        let z_theta: SuperRationalFunction = Graded::term(0, 1, zp(1));
        assert!(!tw.stalk_member(&theta_over_z, &p0()));
        assert!(!tw.stalk_member(&theta, &p0()));
        assert!(tw.stalk_member(&z_theta, &p0()));
        // independent oracle: everything of the form gamma(xi t^k x) is in
        // the stalk by construction
        for k in 0..4 {
            for s in [0u32, 1u32] {
                let g = tw.stalk_image(&p0(), &Graded::term(0, s, zp(k)));
                assert!(tw.stalk_member(&g, &p0()));
            }
        }
    }

    #[test]
    fn trivial_curve_cohomology() {
        let l = lam_c(1);
        let b = BundleData::trivial(SuperCurve::trivial(l));
        let bounds = TruncationBounds::for_bundle(&b, 2);
        assert_eq!(h0(&b, &bounds).unwrap().graded_dim(), (1, 1));
        assert_eq!(h1(&b, &bounds).unwrap().graded_dim(), (0, 0));
        assert_eq!(h0_ber(&b, &bounds).unwrap().graded_dim(), (0, 0));

        // larger base: scalar dimension of h0 is always 2^q * dim B
        let l2 = lam_g(1, 2);
        let b2 = BundleData::trivial(SuperCurve::trivial(l2));
        let bounds2 = TruncationBounds::for_bundle(&b2, 2);
        let s = h0(&b2, &bounds2).unwrap();
        assert_eq!(s.graded_dim(), (4, 4));
        assert_eq!(h1(&b2, &bounds2).unwrap().graded_dim(), (0, 0));
    }

    #[test]
    fn split_odd_twist_cohomology_and_pairing() {
        // odd part of degree -3: theta -> z^3 theta at 0
        let l = lam_c(1);
        let b = BundleData::trivial(twist_curve(&l, 3));
        let bounds = TruncationBounds::for_bundle(&b, 3);
        let s0 = h0(&b, &bounds).unwrap();
        assert_eq!(s0.graded_dim(), (1, 0));
        let s1 = h1(&b, &bounds).unwrap();
        assert_eq!(s1.graded_dim(), (0, 2));
        let ber = h0_ber(&b, &bounds).unwrap();
        assert_eq!(ber.graded_dim(), (0, 2));

        let m = serre_pairing(&b, &bounds, &ber, &s1).unwrap();
        let e = |i: usize, j: usize| m[i][j].get(0, 0);
        let det = &(&e(0, 0) * &e(1, 1)) - &(&e(0, 1) * &e(1, 0));
        assert!(!det.is_zero());
    }

    #[test]
    fn multiplier_pole_and_vanishing() {
        let l = lam_c(1);
        let curve = SuperCurve::trivial(l.clone());

        // one simple pole allowed: sections 1, 1/z, theta, theta/z
        let pole = xi_bundle(&curve, -1);
        let bounds = TruncationBounds::for_bundle(&pole, 2);
        assert_eq!(h0(&pole, &bounds).unwrap().graded_dim(), (2, 2));

        // sections vanishing twice at 0
        let vanish = xi_bundle(&curve, 2);
        let bounds = TruncationBounds::for_bundle(&vanish, 2);
        assert_eq!(h0(&vanish, &bounds).unwrap().graded_dim(), (0, 0));
        let s1 = h1(&vanish, &bounds).unwrap();
        assert_eq!(s1.graded_dim(), (1, 1));
        let ber = h0_ber(&vanish, &bounds).unwrap();
        assert_eq!(ber.graded_dim(), (1, 1));
        let m = serre_pairing(&vanish, &bounds, &ber, &s1).unwrap();
        // even/odd blocks pair crosswise over a plain scalar base; the
        // even-odd entry is the residue pairing z^{-2} against the class of z
        let e = |i: usize, j: usize| m[i][j].get(0, 0);
        let det = &(&e(0, 0) * &e(1, 1)) - &(&e(0, 1) * &e(1, 0));
        assert!(!det.is_zero());
    }

    #[test]
    fn duality_reports() {
        let l = lam_c(1);
        // vacuous case: h1 = 0
        let b = BundleData::trivial(SuperCurve::trivial(l.clone()));
        let r = verify_duality(&b, &TruncationBounds::for_bundle(&b, 2)).unwrap();
        assert_eq!(r.h1_dim, (0, 0));
        assert!(r.ok());

        // classical case over the scalars
        let b = BundleData::trivial(twist_curve(&l, 3));
        let r = verify_duality(&b, &TruncationBounds::for_bundle(&b, 3)).unwrap();
        assert_eq!(r.h1_dim, (0, 2));
        assert_eq!(r.h0_ber_dim, (0, 2));
        assert!(r.ok());

        // nilpotent base: scalar dimensions of the two sides still agree and
        // the pairing is perfect
        let lg = lam_g(1, 1);
        let b = BundleData::trivial(twist_curve(&lg, 3));
        let r = verify_duality(&b, &TruncationBounds::for_bundle(&b, 3)).unwrap();
        assert_eq!(r.h1_dim, (2, 2));
        assert_eq!(r.h0_ber_dim, (2, 2));
        assert!(r.ok());
    }

    #[test]
    fn principal_part_examples() {
        let l = lam_c(1);
        let curve = SuperCurve::trivial(l.clone());
        assert!(principal_part_solvable(&curve, &BTreeMap::new(), 2).unwrap());

        // a single theta/z tail obstructs against the constant section
        let tail0: SuperRationalFunction = Graded::term(0, 1, zp(-1));
        let parts = BTreeMap::from([(p0(), tail0.clone())]);
        assert!(!principal_part_solvable(&curve, &parts, 2).unwrap());

        // balanced tails: witness theta/z - theta/(z - 1)
        let p1 = PointP1::finite_i64(1);
        let tail1: SuperRationalFunction = Graded::term(
            0,
            1,
            germ_power(&p1, -1).scale_by(&qi(-1, 1)),
        );
        let parts = BTreeMap::from([(p0(), tail0), (p1, tail1)]);
        assert!(principal_part_solvable(&curve, &parts, 2).unwrap());
    }
}

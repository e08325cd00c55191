//! The second spray family: retract the ambient space onto the center
//! through a hypersurface, embed a chart neighbourhood as a closed
//! subvariety of C^m, extend the glued retraction to a polynomial map phi,
//! and move along lines phi(gamma(y) + t*zeta). The resulting derivatives
//! cover the image of the blow-down differential, which flow sprays miss.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::blowup::{
    epoint_to_chart, principality_witness, BlowupChart, Center, EPoint, PrincipalityWitness,
};
use crate::error::{Error, Result};
use crate::gcd::coeffs_wrt;
use crate::groebner::Budget;
use crate::ideal::{express_in_sum, monomials_up_to, Ideal};
use crate::linalg::{
    eval_ratfn, in_span, jacobian_at, rank_of_vectors, Mat, RatFn,
};
use crate::mpoly::MPoly;
use crate::order::MonomialOrder;
use crate::rat::Rat;
use crate::sample::SeedCtx;

/// A hypersurface W containing the center component, smooth at the base
/// point, together with a polynomial retraction rho of W onto the
/// component, obtained by inverting a linear projection L that is
/// biregular on the component at the point.
#[derive(Clone, Debug)]
pub struct RetractData {
    pub l_map: Mat,
    pub w_poly: MPoly,
    pub rho: Vec<MPoly>,
    pub linear: bool,
}

fn min_degree_gen(gens: &[MPoly]) -> Option<MPoly> {
    let mut best: Option<&MPoly> = None;
    for g in gens {
        if g.is_zero() {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (dg, db) = (g.total_degree(), b.total_degree());
                dg < db
                    || (dg == db
                        && MonomialOrder::GrevLex
                            .cmp(
                                g.leading_term(MonomialOrder::GrevLex).unwrap().0,
                                b.leading_term(MonomialOrder::GrevLex).unwrap().0,
                            )
                            .is_lt())
            }
        };
        if better {
            best = Some(g);
        }
    }
    best.map(|g| g.normalize_primitive(MonomialOrder::GrevLex))
}

/// Finds g supported on the given variables with target = g modulo the
/// ideal, by a bounded-degree linear ansatz.
fn solve_in_subring(
    ideal: &Ideal,
    target: &MPoly,
    sub_vars: &[usize],
    budget: &Budget,
) -> Result<Option<MPoly>> {
    let n = ideal.nvars();
    let goal = ideal.normal_form(target, budget)?;
    let dmax = (target.total_degree() + 4).min(budget.max_degree).max(2);
    for d in 0..=dmax {
        let monos = monomials_up_to(sub_vars.len(), d);
        if monos.len() > 4_000 {
            return Err(Error::Budget {
                stage: "subring ansatz size".into(),
            });
        }
        let mut cands: Vec<MPoly> = Vec::with_capacity(monos.len());
        let mut columns: Vec<MPoly> = Vec::with_capacity(monos.len());
        for m in &monos {
            let mut e = vec![0u32; n];
            for (k, &v) in sub_vars.iter().enumerate() {
                e[v] = m[k];
            }
            let cand = MPoly::monomial(n, e, Rat::one());
            columns.push(ideal.normal_form(&cand, budget)?);
            cands.push(cand);
        }
        let mut support: Vec<Vec<u32>> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for p in columns.iter().chain(std::iter::once(&goal)) {
            for (e, _) in p.terms() {
                if seen.insert(e.clone()) {
                    support.push(e.clone());
                }
            }
        }
        support.sort();
        let index: BTreeMap<&Vec<u32>, usize> =
            support.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut a = Mat::zero(support.len(), columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (e, c) in col.terms() {
                a.set(index[e], j, c.clone());
            }
        }
        let mut rhs = vec![Rat::zero(); support.len()];
        for (e, c) in goal.terms() {
            rhs[index[e]] = c.clone();
        }
        if let Some(sol) = a.solve(&rhs) {
            let mut g = MPoly::zero(n);
            for (cand, c) in cands.iter().zip(&sol) {
                if !c.is_zero() {
                    g = &g + &cand.mul_scalar(c);
                }
            }
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Retract with a caller-chosen projection; the sampling wrapper below
/// feeds it seeded candidates.
pub fn retract_with_projection(
    center: &Center,
    a: &[Rat],
    dist: usize,
    l_map: Mat,
    budget: &Budget,
) -> Result<RetractData> {
    let n = center.ambient();
    let r = center.r();
    assert_eq!(l_map.cols(), n);
    assert_eq!(l_map.rows(), n - r + 1);
    if !center.vanishes_at(a) {
        return Err(Error::PointNotOnCenter);
    }
    if center.jacobian_at(a).rank() != r {
        return Err(Error::SingularPoint);
    }
    if l_map.rank() != n - r + 1 {
        return Err(Error::Genericity {
            condition: "projection must be surjective".into(),
        });
    }
    let tangent = center.tangent_at(a);
    let projected: Vec<Vec<Rat>> = tangent.iter().map(|v| l_map.mul_vec(v)).collect();
    if rank_of_vectors(&projected) != n - r {
        return Err(Error::Genericity {
            condition: "projection must be biregular on the center at the point".into(),
        });
    }
    let linear = center.gens().iter().all(|g| g.total_degree() <= 1);
    if linear {
        let g = center.jacobian_at(a);
        let ginv = g.right_inverse().ok_or(Error::SingularPoint)?;
        let mut rho = Vec::with_capacity(n);
        for i in 0..n {
            let mut p = MPoly::var(n, i);
            for (k, u) in center.gens().iter().enumerate() {
                p = &p - &u.mul_scalar(ginv.get(i, k));
            }
            rho.push(p);
        }
        // the correction is linear, so the composite lands on the center
        // identically
        for u in center.gens() {
            if !u.substitute(&rho).is_zero() {
                return Err(Error::Internal {
                    what: "linear retraction misses the center".into(),
                });
            }
        }
        return Ok(RetractData {
            l_map,
            w_poly: center.gens()[dist - 1].clone(),
            rho,
            linear: true,
        });
    }
    // graph of L over the center, then eliminate the source variables
    let q = n - r + 1;
    let total = n + q;
    let embed_src: Vec<usize> = (0..n).collect();
    let mut graph_gens: Vec<MPoly> = center
        .gens()
        .iter()
        .map(|g| g.embed(total, &embed_src))
        .collect();
    for k in 0..q {
        let yk = MPoly::var(total, n + k);
        let row = MPoly::affine(n, l_map.row(k), Rat::zero()).embed(total, &embed_src);
        graph_gens.push(&yk - &row);
    }
    let graph = Ideal::new(total, graph_gens);
    let keep: Vec<usize> = (n..total).collect();
    let image = graph.eliminate(&keep, budget)?;
    let w_target = min_degree_gen(image.gens()).ok_or(Error::ImageDense)?;
    let l_rows: Vec<MPoly> = (0..q)
        .map(|k| MPoly::affine(n, l_map.row(k), Rat::zero()))
        .collect();
    let w_poly = w_target.substitute(&l_rows);
    if !center.ideal().contains(&w_poly, budget)? {
        return Err(Error::Unsupported {
            what: "hypersurface ideal membership not certified for this center".into(),
        });
    }
    if w_poly.gradient_at(a).iter().all(|c| c.is_zero()) {
        return Err(Error::Genericity {
            condition: "hypersurface is singular at the point".into(),
        });
    }
    // invert L on the center coordinate by coordinate
    let y_vars: Vec<usize> = (n..total).collect();
    let mut inv = Vec::with_capacity(n);
    for i in 0..n {
        let xi = MPoly::var(total, i);
        let gi = solve_in_subring(&graph, &xi, &y_vars, budget)?.ok_or_else(|| {
            Error::Unsupported {
                what: "retraction inverse is not polynomial within the degree budget".into(),
            }
        })?;
        let keep_tail: Vec<usize> = (n..total).collect();
        inv.push(gi.restrict_to(&keep_tail).ok_or_else(|| Error::Internal {
            what: "inverse escapes the projected coordinates".into(),
        })?);
    }
    // check the inverse stays on the center over the projected image
    for u in center.gens() {
        let pulled = u.substitute(&inv);
        if !image.contains(&pulled, budget)? {
            return Err(Error::Unsupported {
                what: "recovered inverse leaves the center".into(),
            });
        }
    }
    let rho: Vec<MPoly> = inv.iter().map(|g| g.substitute(&l_rows)).collect();
    let center_ideal = center.ideal();
    for (i, p) in rho.iter().enumerate() {
        let delta = p - &MPoly::var(n, i);
        if !center_ideal.contains(&delta, budget)? {
            return Err(Error::Unsupported {
                what: "retraction does not restrict to the identity on the center".into(),
            });
        }
    }
    Ok(RetractData {
        l_map,
        w_poly,
        rho,
        linear: false,
    })
}

/// Samples projections until one yields a certified retract.
pub fn hypersurface_retract(
    center: &Center,
    a: &[Rat],
    dist: usize,
    seed: &SeedCtx,
    retries: u32,
    budget: &Budget,
) -> Result<RetractData> {
    let n = center.ambient();
    let r = center.r();
    let mut last = String::from("no attempt made");
    for k in 0..retries.max(1) {
        let l_map = seed.attempt("L", k).int_matrix(n - r + 1, n, 3);
        match retract_with_projection(center, a, dist, l_map, budget) {
            Ok(data) => return Ok(data),
            Err(Error::Genericity { condition }) => last = condition,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryExhausted {
        stage: "hypersurface retract".into(),
        attempts: retries.max(1),
        last,
    })
}

/// A chart neighbourhood embedded as a closed subvariety of C^m: shear the
/// hypersurface T monic in the last variable, scale that variable by a
/// polynomial h wiping out the projected excluded set, and pull back
/// through sigma = (x_1 x_m, .., x_{m-1} x_m, x_m).
#[derive(Clone, Debug)]
pub struct EmbeddingData {
    pub m: usize,
    pub shear: Vec<Rat>,
    pub translation: Vec<Rat>,
    pub t_monic: MPoly,
    pub h: MPoly,
    pub f_map: Vec<MPoly>,
    pub sigma: Vec<MPoly>,
    pub image_gen: MPoly,
    pub zcomplement: Ideal,
    pub b_emb: Vec<Rat>,
    pub b_gamma: Vec<Rat>,
}

fn shear_substitution(m: usize, a: &[Rat]) -> Vec<MPoly> {
    let mut args = Vec::with_capacity(m);
    for j in 0..m - 1 {
        let mut p = MPoly::var(m, j);
        if !a[j].is_zero() {
            p = &p + &MPoly::var(m, m - 1).mul_scalar(&a[j]);
        }
        args.push(p);
    }
    args.push(MPoly::var(m, m - 1));
    args
}

fn shift_substitution(m: usize, c: &[Rat]) -> Vec<MPoly> {
    (0..m)
        .map(|j| &MPoly::var(m, j) + &MPoly::constant(m, c[j].clone()))
        .collect()
}

pub fn jelonek_embed(
    t_poly: &MPoly,
    b_img: &[Rat],
    r_ideal: Option<&Ideal>,
    seed: &SeedCtx,
    retries: u32,
    budget: &Budget,
) -> Result<EmbeddingData> {
    let m = t_poly.nvars();
    assert!(m >= 2);
    assert_eq!(b_img.len(), m);
    if t_poly.is_constant() {
        return Err(Error::EmbedFailed {
            why: "hypersurface polynomial is constant".into(),
        });
    }
    if !t_poly.eval(b_img).is_zero() {
        return Err(Error::EmbedFailed {
            why: "base point is not on the hypersurface".into(),
        });
    }
    let r_gens: Option<Vec<MPoly>> = match r_ideal {
        Some(r) if !r.is_zero_ideal() => {
            assert_eq!(r.nvars(), m);
            if r.gens().iter().all(|g| g.eval(b_img).is_zero()) {
                return Err(Error::EmbedFailed {
                    why: "base point lies in the excluded set".into(),
                });
            }
            if r.dimension(budget)? > m as i64 - 2 {
                return Err(Error::EmbedFailed {
                    why: "excluded set must have codimension at least 2".into(),
                });
            }
            Some(r.gens().to_vec())
        }
        _ => None,
    };
    // shear until the leading form is nonzero along the last axis, which
    // makes the polynomial monic there up to a constant
    let k = t_poly.total_degree();
    let lf = t_poly.leading_form();
    let attempts = retries.max(1);
    let mut shear: Option<Vec<Rat>> = None;
    for i in 0..=attempts {
        let a: Vec<Rat> = if i == 0 {
            vec![Rat::zero(); m - 1]
        } else {
            seed.attempt("shear", i - 1)
                .ints(m - 1, 3)
                .into_iter()
                .map(crate::rat::rat)
                .collect()
        };
        let mut probe = a.clone();
        probe.push(Rat::one());
        if !lf.eval(&probe).is_zero() {
            shear = Some(a);
            break;
        }
    }
    let shear = shear.ok_or_else(|| Error::EmbedFailed {
        why: "no shear makes the hypersurface monic in the last variable".into(),
    })?;
    let sargs = shear_substitution(m, &shear);
    let t_sheared = t_poly.substitute(&sargs);
    let r_sheared: Option<Vec<MPoly>> = r_gens
        .as_ref()
        .map(|gs| gs.iter().map(|g| g.substitute(&sargs)).collect());
    let mut b_sheared: Vec<Rat> = (0..m - 1)
        .map(|j| &b_img[j] - &(&shear[j] * &b_img[m - 1]))
        .collect();
    b_sheared.push(b_img[m - 1].clone());
    // translate so the origin avoids T and N while the base point avoids
    // H and N
    let keep_front: Vec<usize> = (0..m - 1).collect();
    let mut chosen: Option<(Vec<Rat>, MPoly, MPoly, Vec<Rat>)> = None;
    for i in 0..=attempts * 2 {
        let c: Vec<Rat> = if i == 0 {
            vec![Rat::zero(); m]
        } else {
            seed.attempt("shift", i - 1)
                .ints(m, 3)
                .into_iter()
                .map(crate::rat::rat)
                .collect()
        };
        let targs = shift_substitution(m, &c);
        let t_c = t_sheared.substitute(&targs);
        let b_c: Vec<Rat> = b_sheared.iter().zip(&c).map(|(b, c)| b - c).collect();
        let h_c = match &r_sheared {
            None => MPoly::one(m - 1),
            Some(gs) => {
                let shifted: Vec<MPoly> = gs.iter().map(|g| g.substitute(&targs)).collect();
                let projected = Ideal::new(m, shifted).eliminate(&keep_front, budget)?;
                match min_degree_gen(projected.gens()) {
                    Some(h) => h,
                    None => {
                        return Err(Error::EmbedFailed {
                            why: "projection of the excluded set is dense".into(),
                        })
                    }
                }
            }
        };
        let origin_m = vec![Rat::zero(); m];
        let origin_front = vec![Rat::zero(); m - 1];
        let ok = !t_c.eval(&origin_m).is_zero()
            && !h_c.eval(&origin_front).is_zero()
            && !b_c[m - 1].is_zero()
            && !h_c.eval(&b_c[..m - 1]).is_zero();
        if ok {
            chosen = Some((c, t_c, h_c, b_c));
            break;
        }
    }
    let (translation, t_c, h, b_emb) = chosen.ok_or_else(|| Error::EmbedFailed {
        why: "no translation separates the base point from the excluded hypersurfaces".into(),
    })?;
    // the shear fixed the top coefficient in the last variable to a
    // constant; scale it away
    let coeffs = coeffs_wrt(&t_c, m - 1);
    let (&top, lead) = coeffs.iter().next_back().expect("nonzero polynomial");
    if top != k {
        return Err(Error::Internal {
            what: "shear lost the top degree".into(),
        });
    }
    let lead = lead.constant_value().ok_or_else(|| Error::Internal {
        what: "top coefficient is not constant after shearing".into(),
    })?;
    let t_monic = t_c.mul_scalar(&lead.recip());
    debug_assert!(t_monic.eval(&b_emb).is_zero());
    let front: Vec<usize> = (0..m - 1).collect();
    let h_emb = h.embed(m, &front);
    let xm = MPoly::var(m, m - 1);
    let mut f_map: Vec<MPoly> = (0..m - 1).map(|j| MPoly::var(m, j)).collect();
    f_map.push(&h_emb * &xm);
    let mut sigma: Vec<MPoly> = (0..m - 1).map(|j| &MPoly::var(m, j) * &xm).collect();
    sigma.push(xm.clone());
    // defining polynomial of the closure of F(T): substitute x_m/h and
    // clear the denominator, then pull back through sigma
    let mut t_f = MPoly::zero(m);
    for (&d, cd) in coeffs_wrt(&t_monic, m - 1).iter() {
        let mut term = cd.mul_scalar(&lead.recip());
        term = &term * &h_emb.pow(k - d);
        term = &term * &xm.pow(d);
        t_f = &t_f + &term;
    }
    let image_gen = t_f.substitute(&sigma);
    let zcomplement = Ideal::new(m, vec![t_monic.clone(), &xm * &h_emb]);
    let hb = h.eval(&b_emb[..m - 1]);
    let den = &hb * &b_emb[m - 1];
    let mut b_gamma: Vec<Rat> = b_emb[..m - 1].iter().map(|x| x / &den).collect();
    b_gamma.push(den);
    Ok(EmbeddingData {
        m,
        shear,
        translation,
        t_monic,
        h,
        f_map,
        sigma,
        image_gen,
        zcomplement,
        b_emb,
        b_gamma,
    })
}

impl EmbeddingData {
    /// Original chart coordinates -> embedding source coordinates.
    pub fn to_emb(&self, y: &[Rat]) -> Vec<Rat> {
        let m = self.m;
        let mut out: Vec<Rat> = (0..m - 1)
            .map(|j| &y[j] - &(&self.shear[j] * &y[m - 1]))
            .collect();
        out.push(y[m - 1].clone());
        for (o, c) in out.iter_mut().zip(&self.translation) {
            *o = &*o - c;
        }
        out
    }

    /// Embedding source coordinates -> original chart coordinates.
    pub fn from_emb(&self, x: &[Rat]) -> Vec<Rat> {
        let m = self.m;
        let w: Vec<Rat> = x.iter().zip(&self.translation).map(|(x, c)| x + c).collect();
        let mut out: Vec<Rat> = (0..m - 1)
            .map(|j| &w[j] + &(&self.shear[j] * &w[m - 1]))
            .collect();
        out.push(w[m - 1].clone());
        out
    }

    /// from_emb as polynomials on the embedding source ring.
    pub fn from_emb_polys(&self) -> Vec<MPoly> {
        let m = self.m;
        let wm = &MPoly::var(m, m - 1) + &MPoly::constant(m, self.translation[m - 1].clone());
        let mut out = Vec::with_capacity(m);
        for j in 0..m - 1 {
            let mut p = &MPoly::var(m, j) + &MPoly::constant(m, self.translation[j].clone());
            if !self.shear[j].is_zero() {
                p = &p + &wm.mul_scalar(&self.shear[j]);
            }
            out.push(p);
        }
        out.push(wm);
        out
    }

    /// gamma = sigma^{-1} o F on the embedding source; undefined on H u N.
    pub fn gamma_fwd(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        let m = self.m;
        let den = &self.h.eval(&x[..m - 1]) * &x[m - 1];
        if den.is_zero() {
            return Err(Error::EmbedFailed {
                why: "point lies on the excluded hypersurfaces".into(),
            });
        }
        let mut out: Vec<Rat> = x[..m - 1].iter().map(|v| v / &den).collect();
        out.push(den);
        Ok(out)
    }

    /// Inverse of gamma on the embedded image.
    pub fn gamma_inv(&self, z: &[Rat]) -> Result<Vec<Rat>> {
        let m = self.m;
        let front: Vec<Rat> = z[..m - 1].iter().map(|v| v * &z[m - 1]).collect();
        let hval = self.h.eval(&front);
        if hval.is_zero() {
            return Err(Error::EmbedFailed {
                why: "image point projects into the excluded hypersurface".into(),
            });
        }
        let mut out = front;
        out.push(&z[m - 1] / &hval);
        Ok(out)
    }

    /// gamma written as rational functions of a polynomial source point.
    pub fn gamma_ratfns(&self, src: &[MPoly]) -> Vec<RatFn> {
        let m = self.m;
        assert_eq!(src.len(), m);
        let hs = self.h.substitute(&src[..m - 1]);
        let den = &hs * &src[m - 1];
        let mut out: Vec<RatFn> = src[..m - 1]
            .iter()
            .map(|p| RatFn::new(p.clone(), den.clone()))
            .collect();
        out.push(RatFn::from_poly(den));
        out
    }

    /// Round trip through the embedding at a point of T away from H u N.
    pub fn round_trip(&self, x: &[Rat]) -> Result<bool> {
        if !self.t_monic.eval(x).is_zero() {
            return Ok(false);
        }
        let z = self.gamma_fwd(x)?;
        if !self.image_gen.eval(&z).is_zero() {
            return Ok(false);
        }
        Ok(self.gamma_inv(&z)? == x)
    }
}

/// Ideal cutting the gamma-image of a subvariety of T given by chart-ring
/// generators: transport the generators to embedding coordinates, push
/// them through F by graph elimination, and pull back along sigma.
pub fn embedded_piece_ideal(
    embed: &EmbeddingData,
    piece_gens_chart: &[MPoly],
    budget: &Budget,
) -> Result<Ideal> {
    let m = embed.m;
    let back = embed.from_emb_polys();
    let hat: Vec<MPoly> = piece_gens_chart
        .iter()
        .map(|g| g.substitute(&back))
        .collect();
    let pushed: Vec<MPoly> = if embed.h.is_constant() {
        hat
    } else {
        let total = 2 * m;
        let src: Vec<usize> = (0..m).collect();
        let mut gens: Vec<MPoly> = hat.iter().map(|g| g.embed(total, &src)).collect();
        for k in 0..m {
            let yk = MPoly::var(total, m + k);
            gens.push(&yk - &embed.f_map[k].embed(total, &src));
        }
        let keep: Vec<usize> = (m..total).collect();
        Ideal::new(total, gens)
            .eliminate(&keep, budget)?
            .gens()
            .to_vec()
    };
    Ok(Ideal::new(
        m,
        pushed.iter().map(|g| g.substitute(&embed.sigma)).collect(),
    ))
}

/// Extends maps given on one or two closed pieces to a polynomial map of
/// the ambient space, splitting the mismatch across the two ideals.
pub fn extend_to_ambient(
    pieces: &[(Ideal, Vec<MPoly>)],
    glue_pt: Option<&[Rat]>,
    budget: &Budget,
) -> Result<Vec<MPoly>> {
    match pieces {
        [(ideal, map)] => map
            .iter()
            .map(|g| ideal.normal_form(g, budget))
            .collect(),
        [(k1, g1), (k2, g2)] => {
            assert_eq!(g1.len(), g2.len());
            if let Some(pt) = glue_pt {
                let on_both = k1.gens().iter().all(|g| g.eval(pt).is_zero())
                    && k2.gens().iter().all(|g| g.eval(pt).is_zero());
                if !on_both {
                    return Err(Error::GluingMismatch {
                        why: "glue point does not lie on both pieces".into(),
                    });
                }
                let m = k1.nvars();
                let mut tangents = kernel_at(k1, pt);
                tangents.extend(kernel_at(k2, pt));
                if rank_of_vectors(&tangents) != m {
                    return Err(Error::GluingMismatch {
                        why: "pieces do not meet transversely at the glue point".into(),
                    });
                }
                for (a, b) in g1.iter().zip(g2) {
                    if a.eval(pt) != b.eval(pt) {
                        return Err(Error::GluingMismatch {
                            why: "piece maps disagree at the glue point".into(),
                        });
                    }
                }
            }
            let mut out = Vec::with_capacity(g1.len());
            for (a, b) in g1.iter().zip(g2) {
                let delta = b - a;
                let coeffs = express_in_sum(&delta, k1.gens(), k2, budget)?.ok_or_else(|| {
                    Error::GluingMismatch {
                        why: "piece maps do not agree on the intersection".into(),
                    }
                })?;
                let mut part = MPoly::zero(delta.nvars());
                for (c, g) in coeffs.iter().zip(k1.gens()) {
                    part = &part + &(c * g);
                }
                let phi = a + &part;
                debug_assert!(k2.normal_form(&(&phi - b), budget)?.is_zero());
                out.push(phi);
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported {
            what: "gluing more than two pieces".into(),
        }),
    }
}

fn kernel_at(ideal: &Ideal, pt: &[Rat]) -> Vec<Vec<Rat>> {
    if ideal.gens().is_empty() {
        let n = pt.len();
        return (0..n)
            .map(|i| {
                let mut v = vec![Rat::zero(); n];
                v[i] = Rat::one();
                v
            })
            .collect();
    }
    jacobian_at(ideal.gens(), pt).kernel_basis()
}

/// A posteriori fiber-dimension control for an extension: at sampled
/// target values, the fiber away from the subvariety should have dimension
/// at most m - n. Inconclusive samples are reported, never hidden.
pub fn extension_fiber_check(
    phi: &[MPoly],
    x_ideal: &Ideal,
    seed: &SeedCtx,
    samples: u32,
    budget: &Budget,
) -> Result<Vec<(Vec<Rat>, bool)>> {
    let m = phi[0].nvars();
    let n = phi.len();
    let mut out = Vec::new();
    for k in 0..samples {
        let z: Vec<Rat> = seed
            .attempt("fiber", k)
            .ints(n, 5)
            .into_iter()
            .map(crate::rat::rat)
            .collect();
        let fiber_gens: Vec<MPoly> = phi
            .iter()
            .zip(&z)
            .map(|(p, v)| p - &MPoly::constant(m, v.clone()))
            .collect();
        let mut cleaned: Option<Ideal> = None;
        for g in x_ideal.gens() {
            let sat = Ideal::new(m, fiber_gens.clone()).saturate(g, budget)?;
            cleaned = Some(match cleaned {
                None => sat,
                Some(acc) => acc.intersect(&sat, budget)?,
            });
        }
        let cleaned = cleaned.unwrap_or_else(|| Ideal::new(m, fiber_gens));
        let dim = cleaned.dimension(budget)?;
        out.push((z, dim <= (m as i64 - n as i64)));
    }
    Ok(out)
}

/// The chart data feeding the second spray family: the hypersurface
/// T = W x rel_1 containing both pieces, the excluded set from further
/// center components and the avoided set, the embedding, the image ideals
/// of the two pieces, and the extended map phi with its principality
/// witness at gamma(b).
#[derive(Clone, Debug)]
pub struct Type2Context {
    pub chart: BlowupChart,
    pub coords: Vec<Rat>,
    pub embed: EmbeddingData,
    pub k_v: Ideal,
    pub k_y: Ideal,
    pub phi: Vec<MPoly>,
    pub witness: PrincipalityWitness,
}

pub fn type2_context(
    chart: &BlowupChart,
    b: &EPoint,
    retract: &RetractData,
    seed: &SeedCtx,
    retries: u32,
    budget: &Budget,
) -> Result<Type2Context> {
    let center = &chart.center;
    let n = center.ambient();
    let r = center.r();
    if r < 2 {
        return Err(Error::Unsupported {
            what: "second spray family on a trivial blow-up".into(),
        });
    }
    // the hypersurface piece must be cut by the distinguished generator
    let dist_gen = &center.gens()[chart.dist - 1];
    if retract.w_poly.exact_div(dist_gen).map(|q| q.is_constant()) != Some(true)
        && dist_gen.exact_div(&retract.w_poly).map(|q| q.is_constant()) != Some(true)
    {
        return Err(Error::Unsupported {
            what: "retract hypersurface differs from the distinguished generator".into(),
        });
    }
    let coords = epoint_to_chart(b, chart)?;
    let m = chart.nvars();
    let w_chart = chart.ambient_to_chart(&retract.w_poly);
    let t_poly = &w_chart * &chart.relations()[0];
    // excluded set: cylinders over the other components and the avoided
    // set keep codimension >= 2
    let ambient_embed: Vec<usize> = (0..n).collect();
    let mut r_ideal: Option<Ideal> = None;
    for extra in [&center.others, &center.avoid] {
        if let Some(ideal) = extra {
            let lifted = Ideal::new(
                m,
                ideal.gens().iter().map(|g| g.embed(m, &ambient_embed)).collect(),
            );
            r_ideal = Some(match r_ideal {
                None => lifted,
                Some(acc) => acc.intersect(&lifted, budget)?,
            });
        }
    }
    let embed = jelonek_embed(
        &t_poly,
        &coords,
        r_ideal.as_ref(),
        &seed.child("embed"),
        retries,
        budget,
    )?;
    let k_v = embedded_piece_ideal(&embed, std::slice::from_ref(&w_chart), budget)?;
    let k_y = embedded_piece_ideal(&embed, chart.relations(), budget)?;
    // the glued map: the blow-down on the Y piece, the retraction of the
    // blow-down on the V piece
    let back = embed.from_emb_polys();
    let last_coord = if embed.h.is_constant() {
        let scale = embed.h.constant_value().expect("constant").recip();
        [
            MPoly::var(m, m - 1).mul_scalar(&scale),
            MPoly::var(m, m - 1).mul_scalar(&scale),
        ]
    } else {
        let h_sigma = embed
            .h
            .embed(m, &(0..m - 1).collect::<Vec<_>>())
            .substitute(&embed.sigma);
        let zm = MPoly::var(m, m - 1);
        let lv = k_v
            .quotient_div(&zm, &h_sigma, budget)?
            .ok_or_else(|| Error::DivisionFailed {
                stage: "inverting h on the hypersurface piece".into(),
            })?;
        let ly = k_y
            .quotient_div(&zm, &h_sigma, budget)?
            .ok_or_else(|| Error::DivisionFailed {
                stage: "inverting h on the chart piece".into(),
            })?;
        [lv, ly]
    };
    let mut maps: Vec<Vec<MPoly>> = Vec::new();
    for last in &last_coord {
        let mut args: Vec<MPoly> = embed.sigma[..m - 1].to_vec();
        args.push(last.clone());
        let base: Vec<MPoly> = back[..n].iter().map(|p| p.substitute(&args)).collect();
        maps.push(base);
    }
    let g_v: Vec<MPoly> = retract.rho.iter().map(|p| p.substitute(&maps[0])).collect();
    let g_y = maps.pop().unwrap();
    let phi = extend_to_ambient(
        &[(k_v.clone(), g_v), (k_y.clone(), g_y)],
        Some(&embed.b_gamma),
        budget,
    )?;
    let witness = principality_witness(&phi, center, &embed.b_gamma)?;
    if witness.q_at[chart.dist - 1].is_zero() {
        return Err(Error::InconclusiveWitness {
            why: "distinguished residual vanishes at the embedded base point".into(),
        });
    }
    // some image tangent direction must leave the center tangent space,
    // otherwise no zeta can contribute a new direction
    let t_y = kernel_at(&k_y, &embed.b_gamma);
    let jac_phi = jacobian_at(&phi, &embed.b_gamma);
    let t_a = center.tangent_at(&b.base);
    let pushed: Vec<Vec<Rat>> = t_y.iter().map(|w| jac_phi.mul_vec(w)).collect();
    let r0 = rank_of_vectors(&t_a);
    let mut joined = t_a.clone();
    joined.extend(pushed);
    if rank_of_vectors(&joined) <= r0 {
        return Err(Error::Genericity {
            condition: "image tangent vectors stay tangent to the center".into(),
        });
    }
    Ok(Type2Context {
        chart: chart.clone(),
        coords,
        embed,
        k_v,
        k_y,
        phi,
        witness,
    })
}

/// One spray of the second family: a direction zeta with the line through
/// gamma(b) certified to avoid the non-principality locus at samples and
/// at infinity, with the exact t-derivative at 0 in chart coordinates.
#[derive(Clone, Debug)]
pub struct Type2Spray {
    pub zeta: Vec<Rat>,
    pub ambient_derivative: Vec<Rat>,
    pub fiber_homogeneous: Vec<Rat>,
    pub fiber_affine: Vec<Rat>,
    pub chart_vector: Vec<Rat>,
    pub fiberward_degenerate: bool,
    pub line_samples: Vec<Rat>,
    pub arc: Option<Vec<Rat>>,
    pub partial: bool,
}

pub fn type2_spray_with_zeta(
    ctx: &Type2Context,
    zeta: Vec<Rat>,
    seed: &SeedCtx,
    budget: &Budget,
) -> Result<Type2Spray> {
    let m = ctx.embed.m;
    assert_eq!(zeta.len(), m);
    if zeta.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroInput {
            what: "spray direction".into(),
        });
    }
    let _ = budget;
    let gb = &ctx.embed.b_gamma;
    let q = &ctx.witness.q;
    let line_samples: Vec<Rat> = [1i64, -1, 2, -2, 3]
        .iter()
        .map(|&v| crate::rat::rat(v))
        .collect();
    for t in &line_samples {
        let pt: Vec<Rat> = gb.iter().zip(&zeta).map(|(g, z)| g + &(t * z)).collect();
        if q.iter().all(|qi| qi.eval(&pt).is_zero()) {
            return Err(Error::Genericity {
                condition: "line hits the non-principality locus at a sample".into(),
            });
        }
    }
    if q.iter().all(|qi| qi.leading_form().eval(&zeta).is_zero()) {
        return Err(Error::Genericity {
            condition: "line meets the non-principality locus at infinity".into(),
        });
    }
    // avoided set: replace the straight line by an arc bending away from
    // phi^{-1}(S) when needed
    let mut arc: Option<Vec<Rat>> = None;
    let mut partial = false;
    if let Some(avoid) = &ctx.chart.center.avoid {
        let clears = |bend: &[Rat]| -> bool {
            line_samples.iter().all(|t| {
                let pt: Vec<Rat> = gb
                    .iter()
                    .zip(&zeta)
                    .zip(bend)
                    .map(|((g, z), w)| g + &(t * z) + &(&(t * t) * w))
                    .collect();
                let img: Vec<Rat> = ctx.phi.iter().map(|p| p.eval(&pt)).collect();
                let off_s = avoid.gens().iter().any(|g| !g.eval(&img).is_zero());
                let principal = q.iter().any(|qi| !qi.eval(&pt).is_zero());
                off_s && principal
            })
        };
        let straight = vec![Rat::zero(); m];
        if clears(&straight) {
            arc = Some(straight);
        } else {
            for k in 0..8u32 {
                let bend: Vec<Rat> = seed
                    .attempt("arc", k)
                    .ints(m, 3)
                    .into_iter()
                    .map(crate::rat::rat)
                    .collect();
                if clears(&bend) {
                    arc = Some(bend);
                    break;
                }
            }
            if arc.is_none() {
                partial = true;
            }
        }
    }
    // exact derivative at t = 0: ambient through phi, fiber through the
    // residual factors; the arc's quadratic term does not touch it
    let jac_phi = jacobian_at(&ctx.phi, gb);
    let ambient_derivative = jac_phi.mul_vec(&zeta);
    let fiber_homogeneous: Vec<Rat> = q
        .iter()
        .map(|qi| {
            qi.gradient_at(gb)
                .iter()
                .zip(&zeta)
                .fold(Rat::zero(), |acc, (g, z)| acc + g * z)
        })
        .collect();
    let values = &ctx.witness.q_at;
    let j = ctx.chart.dist;
    let vj = &values[j - 1];
    let dvj = &fiber_homogeneous[j - 1];
    let mut fiber_affine = Vec::new();
    let mut chart_vector = ambient_derivative.clone();
    chart_vector.resize(ctx.chart.nvars(), Rat::zero());
    for i in 1..=ctx.chart.center.r() {
        if i == j {
            continue;
        }
        let vi = &values[i - 1];
        let dvi = &fiber_homogeneous[i - 1];
        let val = (dvi * vj - vi * dvj) / (vj * vj);
        chart_vector[ctx.chart.lambda_var(i).unwrap()] = val.clone();
        fiber_affine.push(val);
    }
    // the assembled vector must be tangent to the chart
    for rel in ctx.chart.relations() {
        let pairing = rel
            .gradient_at(&ctx.coords)
            .iter()
            .zip(&chart_vector)
            .fold(Rat::zero(), |acc, (g, c)| acc + g * c);
        if !pairing.is_zero() {
            return Err(Error::Internal {
                what: "spray derivative is not tangent to the chart".into(),
            });
        }
    }
    let fiberward_degenerate = kernel_membership(&ctx.k_v, gb, &zeta);
    Ok(Type2Spray {
        zeta,
        ambient_derivative,
        fiber_homogeneous,
        fiber_affine,
        chart_vector,
        fiberward_degenerate,
        line_samples,
        arc,
        partial,
    })
}

fn kernel_membership(ideal: &Ideal, pt: &[Rat], v: &[Rat]) -> bool {
    ideal.gens().iter().all(|g| {
        g.gradient_at(pt)
            .iter()
            .zip(v)
            .fold(Rat::zero(), |acc, (gr, c)| acc + gr * c)
            .is_zero()
    })
}

/// Samples directions until one passes the line-avoidance checks.
pub fn type2_spray(
    ctx: &Type2Context,
    seed: &SeedCtx,
    retries: u32,
    budget: &Budget,
) -> Result<Type2Spray> {
    let m = ctx.embed.m;
    let mut last = String::from("no attempt made");
    for k in 0..retries.max(1) * 3 {
        let ctx_seed = seed.attempt("zeta", k);
        let zeta: Vec<Rat> = ctx_seed.ints(m, 3).into_iter().map(crate::rat::rat).collect();
        if zeta.iter().all(|c| c.is_zero()) {
            continue;
        }
        match type2_spray_with_zeta(ctx, zeta, &ctx_seed, budget) {
            Ok(s) => return Ok(s),
            Err(Error::Genericity { condition }) => last = condition,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryExhausted {
        stage: "second spray family direction".into(),
        attempts: retries.max(1) * 3,
        last,
    })
}

/// The time-zero section identity of the second family, as polynomial
/// identities modulo the chart relations: phi(gamma(y)) agrees with the
/// blow-down, and the residual factors reproduce the fiber coordinates.
pub fn section_identity(ctx: &Type2Context, budget: &Budget) -> Result<()> {
    let m = ctx.embed.m;
    let chart = &ctx.chart;
    let rel = chart.rel_ideal();
    // embedding source written over the chart ring
    let to_emb: Vec<MPoly> = {
        let mut out = Vec::with_capacity(m);
        for j in 0..m - 1 {
            let mut p = MPoly::var(m, j);
            if !ctx.embed.shear[j].is_zero() {
                p = &p - &MPoly::var(m, m - 1).mul_scalar(&ctx.embed.shear[j]);
            }
            p = &p - &MPoly::constant(m, ctx.embed.translation[j].clone());
            out.push(p);
        }
        let mut pm = MPoly::var(m, m - 1);
        pm = &pm - &MPoly::constant(m, ctx.embed.translation[m - 1].clone());
        out.push(pm);
        out
    };
    let gamma = ctx.embed.gamma_ratfns(&to_emb);
    if rel.contains(&gamma[m - 1].num, budget)? {
        return Err(Error::Internal {
            what: "gamma denominator vanishes on the chart".into(),
        });
    }
    for (i, phi_i) in ctx.phi.iter().enumerate() {
        let composed = eval_ratfn(phi_i, &gamma);
        let delta = composed.sub(&RatFn::from_poly(MPoly::var(m, i)));
        if !rel.contains(&delta.num, budget)? {
            return Err(Error::GluingMismatch {
                why: format!("time-zero map differs from the blow-down in coordinate {}", i + 1),
            });
        }
    }
    let j = chart.dist;
    let qj = eval_ratfn(&ctx.witness.q[j - 1], &gamma);
    for i in 1..=chart.center.r() {
        if i == j {
            continue;
        }
        let qi = eval_ratfn(&ctx.witness.q[i - 1], &gamma);
        let li = MPoly::var(m, chart.lambda_var(i).unwrap());
        let delta = qi.sub(&RatFn::from_poly(li).mul(&qj));
        if !rel.contains(&delta.num, budget)? {
            return Err(Error::GluingMismatch {
                why: format!(
                    "time-zero fiber component {} differs from the chart coordinate",
                    i
                ),
            });
        }
    }
    Ok(())
}

/// Rank of the assembled derivative vectors against the chart dimension,
/// with the pushforward-containment invariant: every ambient part lies in
/// the span of the direction and the center tangent space.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub vectors: Vec<Vec<Rat>>,
    pub rank: usize,
    pub target: usize,
    pub pushforward_ok: bool,
}

pub fn image_direction_certificate(
    fiber_vectors: &[Vec<Rat>],
    sprays: &[Type2Spray],
    chart: &BlowupChart,
    b: &EPoint,
) -> RankReport {
    let n = chart.ambient();
    let mut image_span = chart.center.tangent_at(&b.base);
    image_span.push(b.dir.clone());
    let mut pushforward_ok = true;
    let mut vectors: Vec<Vec<Rat>> = fiber_vectors.to_vec();
    for s in sprays {
        if !in_span(&image_span, &s.ambient_derivative) {
            pushforward_ok = false;
        }
        vectors.push(s.chart_vector.clone());
    }
    let rank = rank_of_vectors(&vectors);
    RankReport {
        vectors,
        rank,
        target: n,
        pushforward_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::build_chart;
    use crate::parse::{parse_poly, VarTable};
    use crate::rat::{rat, ratq};

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn linear_retract_of_the_axis() {
        let t = VarTable::ambient(3);
        let c = Center::new(
            3,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()],
        )
        .unwrap();
        let a = vec![rat(0); 3];
        let data =
            hypersurface_retract(&c, &a, 2, &SeedCtx::new(0), 8, &budget()).unwrap();
        assert!(data.linear);
        assert_eq!(data.w_poly, parse_poly("x2", &t).unwrap());
        assert_eq!(data.rho[0], MPoly::zero(3));
        assert_eq!(data.rho[1], MPoly::zero(3));
        assert_eq!(data.rho[2], MPoly::var(3, 2));
    }

    #[test]
    fn parabola_retract_recovers_polynomial_inverse() {
        let t = VarTable::ambient(3);
        let c = Center::new(
            3,
            vec![
                parse_poly("x2 - x1^2", &t).unwrap(),
                parse_poly("x3", &t).unwrap(),
            ],
        )
        .unwrap();
        let a = vec![rat(1), rat(1), rat(0)];
        let l = Mat::from_int_rows(&[vec![1, 0, 0], vec![0, 1, 0]]);
        let data = retract_with_projection(&c, &a, 2, l, &budget()).unwrap();
        assert!(!data.linear);
        assert_eq!(data.w_poly, parse_poly("x1^2 - x2", &t).unwrap());
        // the retraction fixes the center pointwise and lands on it
        let ideal = c.ideal();
        for (i, p) in data.rho.iter().enumerate() {
            let delta = p - &MPoly::var(3, i);
            assert!(ideal.contains(&delta, &budget()).unwrap());
        }
        // a point of W off the center retracts onto the center
        let probe = [rat(2), rat(4), rat(7)];
        let image: Vec<Rat> = data.rho.iter().map(|p| p.eval(&probe)).collect();
        assert!(c.vanishes_at(&image));
        assert_eq!(image[..2], [rat(2), rat(4)]);
    }

    #[test]
    fn degenerate_projection_is_rejected() {
        let t = VarTable::ambient(3);
        let c = Center::new(
            3,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()],
        )
        .unwrap();
        // kernel of L contains the x3-axis, so L collapses the center
        let l = Mat::from_int_rows(&[vec![1, 0, 0], vec![0, 1, 0]]);
        assert!(matches!(
            retract_with_projection(&c, &[rat(0), rat(0), rat(0)], 2, l, &budget()),
            Err(Error::Genericity { .. })
        ));
    }

    #[test]
    fn embed_worked_quadric() {
        // T = {x2^2 + x1*x2 - 1 = 0} in C^2: already monic, no excluded
        // set, so gamma is just sigma^{-1}
        let t = VarTable::ambient(2);
        let tp = parse_poly("x2^2 + x1*x2 - 1", &t).unwrap();
        let b = vec![rat(0), rat(1)];
        let e = jelonek_embed(&tp, &b, None, &SeedCtx::new(0), 8, &budget()).unwrap();
        assert_eq!(e.shear, vec![rat(0)]);
        assert_eq!(e.translation, vec![rat(0), rat(0)]);
        assert_eq!(e.h, MPoly::one(1));
        assert_eq!(e.gamma_fwd(&[rat(0), rat(1)]).unwrap(), vec![rat(0), rat(1)]);
        assert_eq!(
            e.gamma_fwd(&[ratq(3, 2), ratq(1, 2)]).unwrap(),
            vec![rat(3), ratq(1, 2)]
        );
        assert_eq!(e.image_gen, parse_poly("x2^2 + x1*x2^2 - 1", &t).unwrap());
        // rational points (s -> ((1-s^2)/s, s)) round-trip exactly
        for k in 1..=25i64 {
            let s = ratq(k, k + 3);
            let x = vec![(rat(1) - &s * &s) / &s, s];
            assert!(e.round_trip(&x).unwrap());
        }
    }

    #[test]
    fn embed_translates_an_origin_on_t() {
        let t = VarTable::ambient(2);
        let tp = parse_poly("x2^2 + x1*x2", &t).unwrap();
        let b = vec![rat(1), rat(-1)];
        let e = jelonek_embed(&tp, &b, None, &SeedCtx::new(0), 8, &budget()).unwrap();
        assert!(e.translation.iter().any(|c| !c.is_zero()));
        // t_monic vanishes at the relocated base point, not at the origin
        assert!(e.t_monic.eval(&e.b_emb).is_zero());
        assert!(!e.t_monic.eval(&[rat(0), rat(0)]).is_zero());
        assert!(e.round_trip(&e.b_emb).unwrap());
    }

    #[test]
    fn embed_rejects_large_excluded_set() {
        let t = VarTable::ambient(2);
        let tp = parse_poly("x2^2 + x1*x2 - 1", &t).unwrap();
        let r = Ideal::new(2, vec![parse_poly("x1 - 5", &t).unwrap()]);
        assert!(matches!(
            jelonek_embed(&tp, &[rat(0), rat(1)], Some(&r), &SeedCtx::new(0), 8, &budget()),
            Err(Error::EmbedFailed { .. })
        ));
    }

    #[test]
    fn embed_with_excluded_point_builds_h() {
        let t = VarTable::ambient(2);
        let tp = parse_poly("x2^2 + x1*x2 - 1", &t).unwrap();
        let r = Ideal::new(
            2,
            vec![
                parse_poly("x1 - 5", &t).unwrap(),
                parse_poly("x2 - 7", &t).unwrap(),
            ],
        );
        let e = jelonek_embed(&tp, &[rat(0), rat(1)], Some(&r), &SeedCtx::new(0), 8, &budget())
            .unwrap();
        // h wipes out the projection of the excluded point
        assert_eq!(e.h.total_degree(), 1);
        let rp = e.to_emb(&[rat(5), rat(7)]);
        assert!(e.h.eval(&rp[..1]).is_zero());
        assert!(e.round_trip(&e.b_emb).unwrap());
    }

    #[test]
    fn extension_of_a_single_piece() {
        let t = VarTable::ambient(2);
        let x_ideal = Ideal::new(2, vec![parse_poly("x2", &t).unwrap()]);
        let map = vec![parse_poly("x1^2", &t).unwrap()];
        let phi = extend_to_ambient(&[(x_ideal, map)], None, &budget()).unwrap();
        assert_eq!(phi, vec![parse_poly("x1^2", &t).unwrap()]);
    }

    #[test]
    fn extension_glues_two_lines() {
        let t = VarTable::ambient(2);
        let k1 = Ideal::new(2, vec![parse_poly("x1", &t).unwrap()]);
        let k2 = Ideal::new(2, vec![parse_poly("x2", &t).unwrap()]);
        let g1 = vec![parse_poly("x2", &t).unwrap()];
        let g2 = vec![parse_poly("x1", &t).unwrap()];
        let origin = [rat(0), rat(0)];
        let phi =
            extend_to_ambient(&[(k1, g1), (k2, g2)], Some(&origin), &budget()).unwrap();
        assert_eq!(phi, vec![parse_poly("x1 + x2", &t).unwrap()]);
    }

    #[test]
    fn extension_rejects_disagreement() {
        let t = VarTable::ambient(2);
        let k1 = Ideal::new(2, vec![parse_poly("x1", &t).unwrap()]);
        let k2 = Ideal::new(2, vec![parse_poly("x2", &t).unwrap()]);
        let g1 = vec![MPoly::one(2)];
        let g2 = vec![MPoly::zero(2)];
        assert!(matches!(
            extend_to_ambient(&[(k1, g1), (k2, g2)], Some(&[rat(0), rat(0)]), &budget()),
            Err(Error::GluingMismatch { .. })
        ));
    }

    fn line_context() -> Type2Context {
        let t = VarTable::ambient(3);
        let c = Center::new(
            3,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()],
        )
        .unwrap();
        let chart = build_chart(&c, 2).unwrap();
        let b = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(1), rat(0)]);
        let retract =
            hypersurface_retract(&c, &b.base, 2, &SeedCtx::new(0), 8, &budget()).unwrap();
        type2_context(&chart, &b, &retract, &SeedCtx::new(0), 8, &budget()).unwrap()
    }

    #[test]
    fn context_for_the_line_scene() {
        let ctx = line_context();
        // phi restricted through gamma is the blow-down and reproduces
        // the fiber coordinate
        section_identity(&ctx, &budget()).unwrap();
        // principality witness: the hypersurface piece divides all
        // pullbacks, residuals nonzero at gamma(b)
        assert!(ctx.witness.q_at.iter().any(|v| !v.is_zero()));
        assert_eq!(ctx.witness.q.len(), 2);
        for (u, qi) in ctx.chart.center.gens().iter().zip(&ctx.witness.q) {
            let pulled = u.substitute(&ctx.phi);
            assert_eq!(pulled, &ctx.witness.p * qi);
        }
    }

    #[test]
    fn type2_sprays_cover_the_image() {
        let ctx = line_context();
        let b = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(1), rat(0)]);
        let mut sprays: Vec<Type2Spray> = Vec::new();
        for k in 0..12u32 {
            let seed = SeedCtx::new(0).attempt("try", k);
            let s = match type2_spray(&ctx, &seed, 8, &budget()) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let mut ambient: Vec<Vec<Rat>> =
                sprays.iter().map(|s| s.ambient_derivative.clone()).collect();
            ambient.push(s.ambient_derivative.clone());
            if rank_of_vectors(&ambient) > sprays.len() {
                sprays.push(s);
            }
            if sprays.len() == 2 {
                break;
            }
        }
        assert_eq!(sprays.len(), 2);
        let report = image_direction_certificate(&[], &sprays, &ctx.chart, &b);
        assert!(report.pushforward_ok);
        // ambient pushforwards live in span{(1,1,0), e3}; two sprays
        // generically span it
        let ambient: Vec<Vec<Rat>> = sprays.iter().map(|s| s.ambient_derivative.clone()).collect();
        assert_eq!(rank_of_vectors(&ambient), 2);
    }

    #[test]
    fn pinned_directions_give_expected_pushforwards() {
        let ctx = line_context();
        let m = ctx.embed.m;
        // zeta along a fiber-ward direction contributes no ambient motion
        // only when tangent to the hypersurface piece; generic axes move
        // the ambient image inside Cv + T_aA
        let mut seen_nonzero = false;
        for i in 0..m {
            let mut zeta = vec![rat(0); m];
            zeta[i] = rat(1);
            let s = match type2_spray_with_zeta(&ctx, zeta, &SeedCtx::new(7), &budget()) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let span = vec![
                vec![rat(1), rat(1), rat(0)],
                vec![rat(0), rat(0), rat(1)],
            ];
            assert!(in_span(&span, &s.ambient_derivative));
            if s.ambient_derivative.iter().any(|c| !c.is_zero()) {
                seen_nonzero = true;
            }
        }
        assert!(seen_nonzero);
    }

    #[test]
    fn fiber_check_bounds_extension_fibers() {
        // phi = (x1, x2): fibers are points, X = {x2 = 0}
        let t = VarTable::ambient(2);
        let phi = vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()];
        let x_ideal = Ideal::new(2, vec![parse_poly("x2", &t).unwrap()]);
        let checks =
            extension_fiber_check(&phi, &x_ideal, &SeedCtx::new(0), 4, &budget()).unwrap();
        assert!(checks.iter().all(|(_, ok)| *ok));
    }
}

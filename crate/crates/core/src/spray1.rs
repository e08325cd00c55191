//! Flow sprays: complete flows of constant vector fields, slowed down so
//! they fix the center pointwise, together with their lifts to a blow-up
//! chart and exact fiber derivatives.
//!
//! The flow is x + t * h(tau(x)) * zeta with tau a surjective linear map
//! killing zeta, proper on the fixed set, and h a polynomial vanishing on
//! the image of the fixed set under tau.

use num_traits::{One, Zero};

use crate::blowup::{epoint_to_chart, BlowupChart, Center, EPoint};
use crate::error::{Error, Result};
use crate::groebner::Budget;
use crate::ideal::Ideal;
use crate::linalg::{in_span, integer_direction, rank_of_vectors, Mat};
use crate::mpoly::MPoly;
use crate::order::MonomialOrder;
use crate::rat::Rat;
use crate::sample::SeedCtx;

/// Surjective linear tau: C^n -> C^{n-1} with kernel spanned by zeta,
/// certified proper on the fixed set by a monic witness: after a linear
/// change putting zeta first, the ideal of the fixed set contains an
/// element whose leading monomial under the elimination order is a pure
/// power of the zeta-coordinate.
#[derive(Clone, Debug)]
pub struct ProperProjection {
    pub tau: Mat,
    pub zeta: Vec<Rat>,
    pub witness: MPoly,
    pub transform: Mat,
}

/// Invertible matrix whose first column is zeta, completed greedily by
/// standard basis vectors.
fn complete_basis(zeta: &[Rat]) -> Mat {
    let n = zeta.len();
    let mut cols: Vec<Vec<Rat>> = vec![zeta.to_vec()];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut e = vec![Rat::zero(); n];
        e[k] = Rat::one();
        if !in_span(&cols, &e) {
            cols.push(e);
        }
    }
    assert_eq!(cols.len(), n);
    let mut m = Mat::zero(n, n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            m.set(i, j, c[i].clone());
        }
    }
    m
}

/// Properness certificate for the projection along zeta: returns the
/// monic witness and the coordinate transform it lives in.
pub fn certify_proper(
    fixed: &Ideal,
    zeta: &[Rat],
    budget: &Budget,
) -> Result<(MPoly, Mat)> {
    let n = fixed.nvars();
    assert_eq!(zeta.len(), n);
    let m = complete_basis(zeta);
    // x = M y, so g(x) becomes g(M y); y_0 runs along zeta
    let rows: Vec<MPoly> = (0..n)
        .map(|i| MPoly::affine(n, m.row(i), Rat::zero()))
        .collect();
    let transformed: Vec<MPoly> = fixed.gens().iter().map(|g| g.substitute(&rows)).collect();
    let basis = Ideal::new(n, transformed).basis(MonomialOrder::Elim { cut: 1 }, budget)?;
    for b in basis.iter() {
        let (lm, _) = b.leading_term(MonomialOrder::Elim { cut: 1 }).unwrap();
        if lm[1..].iter().all(|&e| e == 0) {
            return Ok((b.clone(), m));
        }
    }
    Err(Error::NoProperWitness)
}

/// Samples projections until one is certified proper on the fixed set of
/// the center (center together with its other components and the avoided
/// set).
pub fn choose_proper_projection(
    center: &Center,
    seed: &SeedCtx,
    retries: u32,
    budget: &Budget,
) -> Result<ProperProjection> {
    let n = center.ambient();
    let fixed = center.full_ideal(budget)?;
    let mut last = String::from("no attempt made");
    for k in 0..retries.max(1) {
        let ctx = seed.attempt("tau", k);
        let tau = ctx.int_matrix(n - 1, n, 3);
        if tau.rank() != n - 1 {
            last = "sampled projection not surjective".into();
            continue;
        }
        let kernel = tau.kernel_basis();
        let zeta = integer_direction(&kernel[0]);
        match certify_proper(&fixed, &zeta, budget) {
            Ok((witness, transform)) => {
                return Ok(ProperProjection {
                    tau,
                    zeta,
                    witness,
                    transform,
                })
            }
            Err(Error::NoProperWitness) => {
                last = "no monic witness for sampled kernel direction".into();
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryExhausted {
        stage: "proper projection".into(),
        attempts: retries.max(1),
        last,
    })
}

/// Lowest-degree element of the ideal of the image of the fixed set under
/// tau, found by eliminating the source variables from the graph.
pub fn vanishing_poly(fixed: &Ideal, tau: &Mat, budget: &Budget) -> Result<MPoly> {
    let n = fixed.nvars();
    assert_eq!(tau.cols(), n);
    let m = tau.rows();
    let total = n + m;
    let embed: Vec<usize> = (0..n).collect();
    let mut gens: Vec<MPoly> = fixed.gens().iter().map(|g| g.embed(total, &embed)).collect();
    for k in 0..m {
        let yk = MPoly::var(total, n + k);
        let row = MPoly::affine(n, tau.row(k), Rat::zero()).embed(total, &embed);
        gens.push(&yk - &row);
    }
    let keep: Vec<usize> = (n..total).collect();
    let image = Ideal::new(total, gens).eliminate(&keep, budget)?;
    if image.is_zero_ideal() {
        return Err(Error::ImageDense);
    }
    // deterministic choice: minimal degree, then minimal leading monomial
    let mut best: Option<&MPoly> = None;
    for g in image.gens() {
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
    Ok(best.unwrap().normalize_primitive(MonomialOrder::GrevLex))
}

/// A complete flow x + t h(tau x) zeta fixing the center pointwise,
/// stored as polynomials in (t, x1..xn).
#[derive(Clone, Debug)]
pub struct FlowData {
    pub tau: Mat,
    pub zeta: Vec<Rat>,
    pub h: MPoly,
    phi: Vec<MPoly>,
}

impl FlowData {
    /// The flow map components in (t, x1..xn).
    pub fn map(&self) -> &[MPoly] {
        &self.phi
    }

    pub fn ambient(&self) -> usize {
        self.zeta.len()
    }

    /// d/dt at t = 0 through the point a: h(tau a) * zeta.
    pub fn derivative_at(&self, a: &[Rat]) -> Vec<Rat> {
        let ta = self.tau.mul_vec(a);
        let s = self.h.eval(&ta);
        self.zeta.iter().map(|z| &s * z).collect()
    }
}

/// Builds the flow and verifies it: tau kills zeta, h(tau x) lies in the
/// ideal of the fixed set (so the flow fixes it pointwise), and the time
/// zero map is the identity.
pub fn assemble_flow(
    center: &Center,
    tau: Mat,
    zeta: Vec<Rat>,
    h: MPoly,
    budget: &Budget,
) -> Result<FlowData> {
    let n = center.ambient();
    assert_eq!(tau.cols(), n);
    assert_eq!(tau.rows(), n - 1);
    assert_eq!(h.nvars(), n - 1);
    if zeta.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroInput {
            what: "flow direction".into(),
        });
    }
    if tau.rank() != n - 1 {
        return Err(Error::Genericity {
            condition: "projection must be surjective".into(),
        });
    }
    if tau.mul_vec(&zeta).iter().any(|c| !c.is_zero()) {
        return Err(Error::Genericity {
            condition: "flow direction must span the projection kernel".into(),
        });
    }
    // h(tau x) in ambient coordinates
    let tau_polys: Vec<MPoly> = (0..n - 1)
        .map(|k| MPoly::affine(n, tau.row(k), Rat::zero()))
        .collect();
    let h_tau = h.substitute(&tau_polys);
    let fixed = center.full_ideal(budget)?;
    if !fixed.contains(&h_tau, budget)? {
        return Err(Error::Genericity {
            condition: "h does not vanish on the fixed set".into(),
        });
    }
    // flow ring (t, x1..xn)
    let nv = n + 1;
    let shift: Vec<usize> = (1..=n).collect();
    let h_tx = h_tau.embed(nv, &shift);
    let t = MPoly::var(nv, 0);
    let speed = &t * &h_tx;
    let mut phi = Vec::with_capacity(n);
    for i in 0..n {
        let xi = MPoly::var(nv, i + 1);
        phi.push(&xi + &speed.mul_scalar(&zeta[i]));
    }
    // time zero is the identity
    for (i, f) in phi.iter().enumerate() {
        let at0 = f.subst_var(0, &MPoly::zero(nv));
        assert_eq!(at0, MPoly::var(nv, i + 1));
    }
    Ok(FlowData { tau, zeta, h, phi })
}

/// A flow spray lifted to a blow-up chart: the ambient components f
/// together with homogeneous fiber components lambda_1..lambda_r, all in
/// the spray ring (t, x1..xn, l1..l_{r-1}), satisfying
/// u_i o f = lambda_i * (u_j o pi) modulo the chart relations, with
/// lambda(0, y) = (l_1, .., 1, .., l_r) exactly.
#[derive(Clone, Debug)]
pub struct LiftedFlowSpray {
    pub flow: FlowData,
    pub chart: BlowupChart,
    pub fx: Vec<MPoly>,
    pub lambda: Vec<MPoly>,
    pub base: EPoint,
    pub coords: Vec<Rat>,
    pub xi: Vec<Rat>,
}

impl LiftedFlowSpray {
    pub fn spray_nvars(&self) -> usize {
        1 + self.chart.nvars()
    }

    /// eta: ambient part of the chart tangent vector.
    pub fn eta(&self) -> &[Rat] {
        &self.xi[..self.chart.ambient()]
    }

    /// Point of the spray ring sitting over the base chart point at time
    /// t = value.
    pub fn spray_point(&self, t: &Rat) -> Vec<Rat> {
        let mut p = vec![t.clone()];
        p.extend(self.coords.iter().cloned());
        p
    }
}

pub fn lift_flow_spray(
    flow: &FlowData,
    chart: &BlowupChart,
    b: &EPoint,
    xi: Option<Vec<Rat>>,
    seed: &SeedCtx,
    budget: &Budget,
) -> Result<LiftedFlowSpray> {
    let n = chart.ambient();
    assert_eq!(flow.ambient(), n);
    let coords = epoint_to_chart(b, chart)?;
    let m = chart.nvars();
    let nv = 1 + m;
    // embeddings into the spray ring (t, x, l)
    let flow_map_embed: Vec<usize> = (0..=n).collect();
    let chart_embed: Vec<usize> = (1..=m).collect();
    let fx: Vec<MPoly> = flow
        .map()
        .iter()
        .map(|f| f.embed(nv, &flow_map_embed))
        .collect();
    let rel = Ideal::new(
        nv,
        chart
            .relations()
            .iter()
            .map(|r| r.embed(nv, &chart_embed))
            .collect(),
    );
    let d = chart.exceptional_fn().embed(nv, &chart_embed);
    let t = MPoly::var(nv, 0);
    let td = &t * &d;
    let r = chart.center.r();
    let j = chart.dist;
    let uj_f = chart.center.gens()[j - 1].substitute(&fx);
    // lambda_j = 1 + t*mu: the quotient is a multiple of t because the
    // time-zero map is the identity
    let mu = rel
        .quotient_div(&(&uj_f - &d), &td, budget)?
        .ok_or_else(|| Error::DivisionFailed {
            stage: "fiber lift of the distinguished component".into(),
        })?;
    let lambda_j = &MPoly::one(nv) + &(&t * &mu);
    let mut lambda = vec![MPoly::zero(nv); r];
    lambda[j - 1] = lambda_j.clone();
    for i in 1..=r {
        if i == j {
            continue;
        }
        let ui_f = chart.center.gens()[i - 1].substitute(&fx);
        let li = MPoly::var(nv, 1 + chart.lambda_var(i).unwrap());
        let qi = rel
            .quotient_div(&(&ui_f - &(&li * &uj_f)), &td, budget)?
            .ok_or_else(|| Error::DivisionFailed {
                stage: "fiber lift".into(),
            })?;
        lambda[i - 1] = &(&li * &lambda_j) + &(&t * &qi);
    }
    // lifting identity: u_i o f = lambda_i * (u_j o pi) mod relations
    for i in 1..=r {
        let ui_f = chart.center.gens()[i - 1].substitute(&fx);
        let delta = &ui_f - &(&lambda[i - 1] * &d);
        if !rel.contains(&delta, budget)? {
            return Err(Error::Internal {
                what: "fiber lift fails the lifting identity".into(),
            });
        }
    }
    // chart tangent vector at the base point
    let xi = match xi {
        Some(v) => {
            if v.len() != m || v.iter().all(|c| c.is_zero()) {
                return Err(Error::Genericity {
                    condition: "supplied tangent vector must be nonzero in the chart ring"
                        .into(),
                });
            }
            let tangent_ok = chart
                .relations()
                .iter()
                .all(|rl| {
                    rl.gradient_at(&coords)
                        .iter()
                        .zip(&v)
                        .fold(Rat::zero(), |acc, (g, c)| acc + g * c)
                        .is_zero()
                });
            if !tangent_ok {
                return Err(Error::Genericity {
                    condition: "supplied vector is not tangent to the chart".into(),
                });
            }
            v
        }
        None => {
            let basis = chart.tangent_basis(&coords);
            let mut v = vec![Rat::zero(); m];
            for (k, weight) in seed
                .child("xi")
                .ints(basis.len(), 3)
                .into_iter()
                .enumerate()
            {
                for (c, b) in v.iter_mut().zip(&basis[k]) {
                    *c += b * &crate::rat::rat(weight);
                }
            }
            if v.iter().all(|c| c.is_zero()) {
                v = basis
                    .first()
                    .cloned()
                    .ok_or_else(|| Error::Internal {
                        what: "chart has no tangent directions".into(),
                    })?;
            }
            v
        }
    };
    Ok(LiftedFlowSpray {
        flow: flow.clone(),
        chart: chart.clone(),
        fx,
        lambda,
        base: b.clone(),
        coords,
        xi,
    })
}

/// The four genericity conditions at the base point: the tangent direction
/// leaves the center, the flow direction is transverse to it, the
/// distinguished pairing is nonzero, and the slowdown h has nonzero slope
/// along the projected direction.
#[derive(Clone, Debug)]
pub struct GenericityReport {
    pub conditions: Vec<(&'static str, bool)>,
}

impl GenericityReport {
    pub fn pass(&self) -> bool {
        self.conditions.iter().all(|(_, ok)| *ok)
    }
}

pub fn genericity_check(spray: &LiftedFlowSpray) -> GenericityReport {
    let a = &spray.base.base;
    let eta = spray.eta().to_vec();
    let center = &spray.chart.center;
    let pairings = center.jacobian_at(a).mul_vec(&eta);
    let c1 = pairings.iter().any(|p| !p.is_zero());
    let tangent = center.tangent_at(a);
    let mut with_eta = tangent.clone();
    with_eta.push(eta.clone());
    let r_eta = rank_of_vectors(&with_eta);
    let mut with_zeta = with_eta.clone();
    with_zeta.push(spray.flow.zeta.clone());
    let c2 = rank_of_vectors(&with_zeta) > r_eta;
    let c3 = !pairings[spray.chart.dist - 1].is_zero();
    let ta = spray.flow.tau.mul_vec(a);
    let teta = spray.flow.tau.mul_vec(&eta);
    let slope = spray
        .flow
        .h
        .gradient_at(&ta)
        .iter()
        .zip(&teta)
        .fold(Rat::zero(), |acc, (g, c)| acc + g * c);
    let c4 = !slope.is_zero();
    GenericityReport {
        conditions: vec![
            ("direction leaves the center", c1),
            ("flow direction transverse to direction and center", c2),
            ("distinguished pairing nonzero", c3),
            ("slowdown slope nonzero", c4),
        ],
    }
}

/// Exact t-derivative of the fiber components at time zero over the base
/// point, computed two ways: the closed form c * (Jac_u(a) zeta) with
/// c = dh(tau a)(tau eta) / d_a u_j(eta), and the symbolic derivative of
/// the lifted lambda. Both must agree.
#[derive(Clone, Debug)]
pub struct SprayDerivative {
    pub c: Rat,
    pub homogeneous: Vec<Rat>,
    pub symbolic: Vec<Rat>,
    pub affine: Vec<Rat>,
    pub chart_vector: Vec<Rat>,
}

pub fn spray_derivative(spray: &LiftedFlowSpray) -> Result<SprayDerivative> {
    let center = &spray.chart.center;
    let a = &spray.base.base;
    let eta = spray.eta().to_vec();
    let j = spray.chart.dist;
    let pairings = center.jacobian_at(a).mul_vec(&eta);
    let dj = pairings[j - 1].clone();
    if dj.is_zero() {
        return Err(Error::Genericity {
            condition: "distinguished pairing vanishes; derivative undefined".into(),
        });
    }
    let ta = spray.flow.tau.mul_vec(a);
    let teta = spray.flow.tau.mul_vec(&eta);
    let slope = spray
        .flow
        .h
        .gradient_at(&ta)
        .iter()
        .zip(&teta)
        .fold(Rat::zero(), |acc, (g, c)| acc + g * c);
    let c = &slope / &dj;
    let jac_zeta = center.jacobian_at(a).mul_vec(&spray.flow.zeta);
    let homogeneous: Vec<Rat> = jac_zeta.iter().map(|v| &c * v).collect();
    // symbolic route: d lambda / dt at (0, chart point)
    let pt = spray.spray_point(&Rat::zero());
    let symbolic: Vec<Rat> = spray
        .lambda
        .iter()
        .map(|l| l.derivative(0).eval(&pt))
        .collect();
    if symbolic != homogeneous {
        return Err(Error::Internal {
            what: "closed-form and symbolic fiber derivatives disagree".into(),
        });
    }
    // affine chart derivative by the quotient rule; lambda_j(0,b) = 1 and
    // lambda_i(0,b) = l_i(b) by the section identity
    let values: Vec<Rat> = spray.lambda.iter().map(|l| l.eval(&pt)).collect();
    if !values[j - 1].is_one() {
        return Err(Error::Internal {
            what: "distinguished fiber component is not 1 at time zero".into(),
        });
    }
    let vj = &values[j - 1];
    let dvj = &symbolic[j - 1];
    let mut affine = Vec::new();
    let mut chart_vector = vec![Rat::zero(); spray.chart.nvars()];
    let r = center.r();
    for i in 1..=r {
        if i == j {
            continue;
        }
        let vi = &values[i - 1];
        let dvi = &symbolic[i - 1];
        let val = (dvi * vj - vi * dvj) / (vj * vj);
        chart_vector[spray.chart.lambda_var(i).unwrap()] = val.clone();
        affine.push(val);
    }
    Ok(SprayDerivative {
        c,
        homogeneous,
        symbolic,
        affine,
        chart_vector,
    })
}

/// A family of lifted flow sprays whose time derivatives at the base point
/// span the chart fiber directions (rank r - 1).
#[derive(Debug)]
pub struct KernelFamily {
    pub sprays: Vec<LiftedFlowSpray>,
    pub derivatives: Vec<SprayDerivative>,
    pub vectors: Vec<Vec<Rat>>,
    pub rank: usize,
    pub attempts: u32,
    pub trace: Vec<String>,
}

pub fn kernel_spanning_family(
    chart: &BlowupChart,
    b: &EPoint,
    seed: &SeedCtx,
    retries: u32,
    budget: &Budget,
) -> Result<KernelFamily> {
    let target = chart.fiber_dim();
    let mut fam = KernelFamily {
        sprays: Vec::new(),
        derivatives: Vec::new(),
        vectors: Vec::new(),
        rank: 0,
        attempts: 0,
        trace: Vec::new(),
    };
    if target == 0 {
        return Ok(fam);
    }
    let center = &chart.center;
    let n = center.ambient();
    let fixed = center.full_ideal(budget)?;
    let max_attempts = retries.max(1) * target as u32;
    for k in 0..max_attempts {
        fam.attempts = k + 1;
        let ctx = seed.attempt("flow", k);
        let tau = ctx.child("tau").int_matrix(n - 1, n, 3);
        if tau.rank() != n - 1 {
            fam.trace.push(format!("attempt {k}: projection not surjective"));
            continue;
        }
        let zeta = integer_direction(&tau.kernel_basis()[0]);
        match certify_proper(&fixed, &zeta, budget) {
            Ok(_) => {}
            Err(Error::NoProperWitness) => {
                fam.trace
                    .push(format!("attempt {k}: projection not proper on the fixed set"));
                continue;
            }
            Err(e) => return Err(e),
        }
        let h = vanishing_poly(&fixed, &tau, budget)?;
        let flow = assemble_flow(center, tau, zeta, h, budget)?;
        let spray = lift_flow_spray(&flow, chart, b, None, &ctx, budget)?;
        let gen = genericity_check(&spray);
        if !gen.pass() {
            let failed: Vec<&str> = gen
                .conditions
                .iter()
                .filter(|(_, ok)| !ok)
                .map(|(name, _)| *name)
                .collect();
            fam.trace
                .push(format!("attempt {k}: genericity failed ({})", failed.join(", ")));
            continue;
        }
        let der = spray_derivative(&spray)?;
        let mut cand = fam.vectors.clone();
        cand.push(der.affine.clone());
        let new_rank = rank_of_vectors(&cand);
        if new_rank <= fam.rank {
            fam.trace
                .push(format!("attempt {k}: fiber derivative dependent, discarded"));
            continue;
        }
        fam.trace.push(format!("attempt {k}: accepted"));
        fam.rank = new_rank;
        fam.vectors.push(der.affine.clone());
        fam.derivatives.push(der);
        fam.sprays.push(spray);
        if fam.rank == target {
            return Ok(fam);
        }
    }
    let last = fam
        .trace
        .last()
        .cloned()
        .unwrap_or_else(|| "no attempts".into());
    Err(Error::RetryExhausted {
        stage: "kernel spanning family".into(),
        attempts: fam.attempts,
        last,
    })
}

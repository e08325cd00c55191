//! Blow-up of affine n-space along the common zeroes of r polynomials,
//! worked in the standard affine charts.
//!
//! For a center cut out by u_1..u_r, chart j keeps the ambient coordinates
//! and adds fiber coordinates l_i (i != j, ascending) subject to
//! u_i = l_i * u_j. The projection is the coordinate projection and the
//! exceptional divisor in the chart is the zero set of u_j.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gcd::gcd_list;
use crate::groebner::Budget;
use crate::ideal::Ideal;
use crate::linalg::{jacobian_at, Mat, Point};
use crate::mpoly::MPoly;
use crate::parse::VarTable;
use crate::rat::Rat;
use crate::sample::SeedCtx;

#[derive(Clone, Debug)]
pub struct Center {
    ambient: usize,
    gens: Vec<MPoly>,
    /// Ideal of further center components away from the base point.
    pub others: Option<Ideal>,
    /// Ideal of a codimension >= 2 subset the sprays must fix pointwise.
    pub avoid: Option<Ideal>,
}

impl Center {
    pub fn new(ambient: usize, gens: Vec<MPoly>) -> Result<Self> {
        let gens: Vec<MPoly> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        if gens.is_empty() {
            return Err(Error::ZeroInput {
                what: "center generators".into(),
            });
        }
        for g in &gens {
            if g.nvars() != ambient {
                return Err(Error::Arity {
                    expected: ambient,
                    got: g.nvars(),
                });
            }
        }
        Ok(Center {
            ambient,
            gens,
            others: None,
            avoid: None,
        })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn gens(&self) -> &[MPoly] {
        &self.gens
    }

    pub fn r(&self) -> usize {
        self.gens.len()
    }

    pub fn common_factor(&self) -> MPoly {
        gcd_list(&self.gens)
    }

    pub fn is_reduced(&self) -> bool {
        self.common_factor().is_constant()
    }

    pub fn require_reduced(&self) -> Result<()> {
        let g = self.common_factor();
        if g.is_constant() {
            Ok(())
        } else {
            Err(Error::UnreducedCenter {
                gcd: crate::parse::canonical(&g, &VarTable::ambient(self.ambient)),
            })
        }
    }

    pub fn vanishes_at(&self, a: &[Rat]) -> bool {
        self.gens.iter().all(|g| g.eval(a).is_zero())
    }

    pub fn jacobian_at(&self, a: &[Rat]) -> Mat {
        jacobian_at(&self.gens, a)
    }

    /// Tangent space of the center at a smooth point: kernel of the
    /// Jacobian of the generators.
    pub fn tangent_at(&self, a: &[Rat]) -> Vec<Vec<Rat>> {
        self.jacobian_at(a).kernel_basis()
    }

    pub fn ideal(&self) -> Ideal {
        Ideal::new(self.ambient, self.gens.clone())
    }

    /// Ideal of the union of the center with any further components and
    /// the avoided set; sprays are built to fix all of it.
    pub fn full_ideal(&self, budget: &Budget) -> Result<Ideal> {
        let mut acc = self.ideal();
        if let Some(o) = &self.others {
            acc = acc.intersect(o, budget)?;
        }
        if let Some(s) = &self.avoid {
            acc = acc.intersect(s, budget)?;
        }
        Ok(acc)
    }
}

/// Divides out the gcd of the generators, so the blow-up has no divisorial
/// part. Generators already coprime come back unchanged.
pub fn reduce_center(gens: &[MPoly]) -> Result<Vec<MPoly>> {
    let nonzero: Vec<MPoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if nonzero.is_empty() {
        return Err(Error::ZeroInput {
            what: "center generators".into(),
        });
    }
    let g = gcd_list(&nonzero);
    if g.is_constant() {
        return Ok(nonzero);
    }
    nonzero
        .iter()
        .map(|p| {
            p.exact_div(&g).ok_or_else(|| Error::Internal {
                what: "gcd fails to divide a generator".into(),
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BlowupChart {
    pub center: Center,
    /// 1-based distinguished generator index.
    pub dist: usize,
    nvars: usize,
    relations: Vec<MPoly>,
    exc: MPoly,
    rel_ideal: Ideal,
}

pub fn build_chart(center: &Center, dist: usize) -> Result<BlowupChart> {
    let r = center.r();
    if dist == 0 || dist > r {
        return Err(Error::ChartIndex { index: dist, r });
    }
    if r >= 2 {
        // with one generator the blow-up is trivial and there is nothing
        // divisorial to factor out
        center.require_reduced()?;
    }
    let n = center.ambient();
    let nvars = n + r - 1;
    let embed: Vec<usize> = (0..n).collect();
    let uj = center.gens()[dist - 1].embed(nvars, &embed);
    let mut relations = Vec::new();
    for (idx, g) in center.gens().iter().enumerate() {
        if idx + 1 == dist {
            continue;
        }
        let ui = g.embed(nvars, &embed);
        let li = MPoly::var(nvars, n + relations.len());
        relations.push(&ui - &(&li * &uj));
    }
    let rel_ideal = Ideal::new(nvars, relations.clone());
    Ok(BlowupChart {
        center: center.clone(),
        dist,
        nvars,
        relations,
        exc: uj,
        rel_ideal,
    })
}

impl BlowupChart {
    pub fn ambient(&self) -> usize {
        self.center.ambient()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn fiber_dim(&self) -> usize {
        self.center.r() - 1
    }

    /// u_i = l_i * u_j for i != dist, in the chart ring.
    pub fn relations(&self) -> &[MPoly] {
        &self.relations
    }

    pub fn rel_ideal(&self) -> &Ideal {
        &self.rel_ideal
    }

    /// Pullback of the distinguished generator; cuts out the exceptional
    /// divisor in this chart.
    pub fn exceptional_fn(&self) -> &MPoly {
        &self.exc
    }

    pub fn table(&self) -> VarTable {
        VarTable::chart(self.ambient(), self.fiber_dim())
    }

    pub fn spray_table(&self) -> VarTable {
        VarTable::spray(self.ambient(), self.fiber_dim())
    }

    /// Chart variable index of the fiber coordinate attached to generator
    /// i (1-based); None for the distinguished index.
    pub fn lambda_var(&self, i: usize) -> Option<usize> {
        if i == self.dist || i == 0 || i > self.center.r() {
            return None;
        }
        let pos = if i < self.dist { i - 1 } else { i - 2 };
        Some(self.ambient() + pos)
    }

    pub fn ambient_to_chart(&self, p: &MPoly) -> MPoly {
        let embed: Vec<usize> = (0..self.ambient()).collect();
        p.embed(self.nvars, &embed)
    }

    pub fn on_chart(&self, pt: &[Rat]) -> bool {
        self.relations.iter().all(|r| r.eval(pt).is_zero())
    }

    /// Tangent space of the chart at a point: kernel of the Jacobian of
    /// the relations (all of C^nvars when r = 1).
    pub fn tangent_basis(&self, pt: &[Rat]) -> Vec<Vec<Rat>> {
        if self.relations.is_empty() {
            return (0..self.nvars)
                .map(|i| {
                    let mut v = vec![Rat::zero(); self.nvars];
                    v[i] = num_traits::One::one();
                    v
                })
                .collect();
        }
        jacobian_at(&self.relations, pt).kernel_basis()
    }

    /// Projection to the ambient space, as coordinate polynomials.
    pub fn projection(&self) -> Vec<MPoly> {
        (0..self.ambient())
            .map(|i| MPoly::var(self.nvars, i))
            .collect()
    }
}

/// Point of the exceptional divisor: a base point on the center plus a
/// direction normal to it (up to scaling and tangent shifts).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EPoint {
    pub base: Point,
    pub dir: Vec<Rat>,
}

impl EPoint {
    pub fn new(base: Point, dir: Vec<Rat>) -> Self {
        EPoint { base, dir }
    }
}

/// Chart coordinates (a, l) of an exceptional point, l_i = d_a u_i(v) /
/// d_a u_j(v). Fails when the pairing with the distinguished generator
/// vanishes, suggesting a chart where it does not.
pub fn epoint_to_chart(b: &EPoint, chart: &BlowupChart) -> Result<Vec<Rat>> {
    let center = &chart.center;
    if b.base.len() != center.ambient() || b.dir.len() != center.ambient() {
        return Err(Error::Arity {
            expected: center.ambient(),
            got: b.base.len().max(b.dir.len()),
        });
    }
    if !center.vanishes_at(&b.base) {
        return Err(Error::PointNotOnCenter);
    }
    let pairings = center.jacobian_at(&b.base).mul_vec(&b.dir);
    if pairings.iter().all(|d| d.is_zero()) {
        return Err(Error::TangentDirection);
    }
    let dj = &pairings[chart.dist - 1];
    if dj.is_zero() {
        let suggest = pairings
            .iter()
            .position(|d| !d.is_zero())
            .expect("some pairing is nonzero")
            + 1;
        return Err(Error::WrongChart {
            index: chart.dist,
            suggest,
        });
    }
    let mut coords = b.base.clone();
    coords.resize(chart.nvars(), Rat::zero());
    for i in 1..=center.r() {
        if let Some(v) = chart.lambda_var(i) {
            coords[v] = &pairings[i - 1] / dj;
        }
    }
    Ok(coords)
}

/// Divisorial/residual factorization of the pullback of the center under
/// a polynomial map: u_i o phi = p * q_i with p the gcd.
#[derive(Clone, Debug)]
pub struct PrincipalityWitness {
    pub p: MPoly,
    pub q: Vec<MPoly>,
    pub q_at: Vec<Rat>,
}

pub fn principality_witness(
    phi: &[MPoly],
    center: &Center,
    pt: &[Rat],
) -> Result<PrincipalityWitness> {
    assert_eq!(phi.len(), center.ambient());
    let pullback: Vec<MPoly> = center.gens().iter().map(|u| u.substitute(phi)).collect();
    if pullback.iter().all(|p| p.is_zero()) {
        return Err(Error::InconclusiveWitness {
            why: "map lands inside the center".into(),
        });
    }
    let p = gcd_list(&pullback);
    let q: Vec<MPoly> = pullback
        .iter()
        .map(|f| f.exact_div(&p).expect("gcd divides"))
        .collect();
    let q_at: Vec<Rat> = q.iter().map(|qi| qi.eval(pt)).collect();
    if q_at.iter().all(|v| v.is_zero()) {
        return Err(Error::InconclusiveWitness {
            why: "residual generators all vanish at the point; the pullback \
                  ideal is not witnessed principal there"
                .into(),
        });
    }
    Ok(PrincipalityWitness { p, q, q_at })
}

/// Lift data for a map into the blown-up space: the pullback of the
/// center, its gcd factorization, and sampled source points where the
/// lift is certified regular.
#[derive(Clone, Debug)]
pub struct BlowupLift {
    pub pullback: Vec<MPoly>,
    pub p: MPoly,
    pub q: Vec<MPoly>,
    pub dist: usize,
    pub samples: Vec<(Point, bool)>,
}

pub fn lift_through_blowup(
    f: &[MPoly],
    center: &Center,
    dist: usize,
    seed: &SeedCtx,
) -> Result<BlowupLift> {
    if dist == 0 || dist > center.r() {
        return Err(Error::ChartIndex {
            index: dist,
            r: center.r(),
        });
    }
    if f.len() != center.ambient() {
        return Err(Error::Arity {
            expected: center.ambient(),
            got: f.len(),
        });
    }
    let source_vars = f[0].nvars();
    let pullback: Vec<MPoly> = center.gens().iter().map(|u| u.substitute(f)).collect();
    if pullback.iter().all(|p| p.is_zero()) {
        return Err(Error::InconclusiveWitness {
            why: "map lands inside the center".into(),
        });
    }
    let p = gcd_list(&pullback);
    let q: Vec<MPoly> = pullback
        .iter()
        .map(|g| g.exact_div(&p).expect("gcd divides"))
        .collect();
    let mut samples = Vec::new();
    for k in 0..8u32 {
        let pt: Point = seed
            .attempt("lift-sample", k)
            .ints(source_vars, 5)
            .into_iter()
            .map(crate::rat::rat)
            .collect();
        let regular = q.iter().any(|qi| !qi.eval(&pt).is_zero());
        samples.push((pt, regular));
    }
    Ok(BlowupLift {
        pullback,
        p,
        q,
        dist,
        samples,
    })
}

/// The fiber coordinate of generator i against the distinguished one, as
/// a quotient modulo the chart relations. Exists by construction for the
/// tautological chart inclusion; used to express lifted maps.
pub fn chart_quotient(
    chart: &BlowupChart,
    num: &MPoly,
    budget: &Budget,
) -> Result<MPoly> {
    chart
        .rel_ideal()
        .quotient_div(num, chart.exceptional_fn(), budget)?
        .ok_or_else(|| Error::DivisionFailed {
            stage: "chart quotient".into(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_poly, VarTable};
    use crate::rat::rat;

    fn center_line() -> Center {
        // x3-axis in C^3
        let t = VarTable::ambient(3);
        Center::new(
            3,
            vec![
                parse_poly("x1", &t).unwrap(),
                parse_poly("x2", &t).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn chart_relations_and_exceptional_fn() {
        let c = center_line();
        let chart = build_chart(&c, 2).unwrap();
        assert_eq!(chart.nvars(), 4);
        let t = chart.table();
        assert_eq!(t.name(3), "l1");
        let rel = parse_poly("x1 - l1*x2", &t).unwrap();
        assert_eq!(chart.relations(), &[rel]);
        assert_eq!(*chart.exceptional_fn(), parse_poly("x2", &t).unwrap());
        // pullbacks of all generators lie in (u_j) + relations
        let i = Ideal::new(
            4,
            vec![
                chart.exceptional_fn().clone(),
                chart.relations()[0].clone(),
            ],
        );
        let u1 = chart.ambient_to_chart(&c.gens()[0]);
        assert!(i.contains(&u1, &Budget::default()).unwrap());
    }

    #[test]
    fn trivial_chart_for_hypersurface_center() {
        let t = VarTable::ambient(2);
        let c = Center::new(2, vec![parse_poly("x1", &t).unwrap()]).unwrap();
        let chart = build_chart(&c, 1).unwrap();
        assert_eq!(chart.nvars(), 2);
        assert!(chart.relations().is_empty());
        assert_eq!(chart.tangent_basis(&[rat(0), rat(0)]).len(), 2);
    }

    #[test]
    fn chart_index_out_of_range() {
        let c = center_line();
        match build_chart(&c, 3) {
            Err(Error::ChartIndex { index: 3, r: 2 }) => {}
            other => panic!("expected chart index error, got {other:?}"),
        }
    }

    #[test]
    fn unreduced_center_is_rejected() {
        let t = VarTable::ambient(2);
        let c = Center::new(
            2,
            vec![
                parse_poly("x1^2", &t).unwrap(),
                parse_poly("x1*x2", &t).unwrap(),
            ],
        )
        .unwrap();
        match build_chart(&c, 1) {
            Err(Error::UnreducedCenter { gcd }) => assert_eq!(gcd, "x1"),
            other => panic!("expected unreduced-center error, got {other:?}"),
        }
    }

    #[test]
    fn reduce_center_examples() {
        let t = VarTable::ambient(2);
        let unreduced = vec![
            parse_poly("x1^2", &t).unwrap(),
            parse_poly("x1*x2", &t).unwrap(),
        ];
        let reduced = reduce_center(&unreduced).unwrap();
        assert_eq!(
            reduced,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()]
        );
        // already reduced input comes back unchanged
        assert_eq!(reduce_center(&reduced).unwrap(), reduced);
        // a single generator reduces to 1: the blow-up is trivial and the
        // residual center is empty
        let single = vec![parse_poly("x1*x2", &t).unwrap()];
        assert_eq!(reduce_center(&single).unwrap(), vec![MPoly::one(2)]);
    }

    #[test]
    fn epoint_chart_coordinates() {
        let c = center_line();
        let chart = build_chart(&c, 2).unwrap();
        let b = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(1), rat(0)]);
        let coords = epoint_to_chart(&b, &chart).unwrap();
        assert_eq!(coords, vec![rat(0), rat(0), rat(0), rat(1)]);
        // scaling the direction does not move the point
        let b2 = EPoint::new(vec![rat(0); 3], vec![rat(3), rat(3), rat(0)]);
        assert_eq!(epoint_to_chart(&b2, &chart).unwrap(), coords);
        // shifting by a tangent vector does not move it either
        let b3 = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(1), rat(7)]);
        assert_eq!(epoint_to_chart(&b3, &chart).unwrap(), coords);
    }

    #[test]
    fn epoint_error_cases() {
        let c = center_line();
        let chart = build_chart(&c, 2).unwrap();
        let off = EPoint::new(vec![rat(1), rat(0), rat(0)], vec![rat(1), rat(1), rat(0)]);
        assert!(matches!(
            epoint_to_chart(&off, &chart),
            Err(Error::PointNotOnCenter)
        ));
        let tangent = EPoint::new(vec![rat(0); 3], vec![rat(0), rat(0), rat(1)]);
        assert!(matches!(
            epoint_to_chart(&tangent, &chart),
            Err(Error::TangentDirection)
        ));
        let wrong = EPoint::new(vec![rat(0); 3], vec![rat(1), rat(0), rat(0)]);
        match epoint_to_chart(&wrong, &chart) {
            Err(Error::WrongChart { index: 2, suggest: 1 }) => {}
            other => panic!("expected wrong-chart error, got {other:?}"),
        }
    }

    #[test]
    fn principality_witness_examples() {
        let t = VarTable::ambient(2);
        let c = Center::new(
            2,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()],
        )
        .unwrap();
        // phi = (w1*w2, w1*w2^2): pullback gcd is w1*w2, residual (1, w2)
        let phi = vec![
            parse_poly("x1*x2", &t).unwrap(),
            parse_poly("x1*x2^2", &t).unwrap(),
        ];
        let w = principality_witness(&phi, &c, &[rat(1), rat(1)]).unwrap();
        assert_eq!(w.p, parse_poly("x1*x2", &t).unwrap());
        assert_eq!(w.q[0], MPoly::one(2));
        assert_eq!(w.q[1], parse_poly("x2", &t).unwrap());
        // identity map at the origin: residual generators both vanish
        let id = vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()];
        assert!(matches!(
            principality_witness(&id, &c, &[rat(0), rat(0)]),
            Err(Error::InconclusiveWitness { .. })
        ));
    }

    #[test]
    fn lift_pullback_ideal() {
        // f = (w1, w2 + w1^2) pulls the center ideal back to (w1, w2)
        let t = VarTable::ambient(2);
        let c = Center::new(
            2,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()],
        )
        .unwrap();
        let f = vec![
            parse_poly("x1", &t).unwrap(),
            parse_poly("x2 + x1^2", &t).unwrap(),
        ];
        let lift = lift_through_blowup(&f, &c, 2, &SeedCtx::new(0)).unwrap();
        assert_eq!(lift.p, MPoly::one(2));
        let got = Ideal::new(2, lift.pullback.clone());
        let want = Ideal::new(
            2,
            vec![parse_poly("x1", &t).unwrap(), parse_poly("x2", &t).unwrap()],
        );
        assert!(got.same_ideal(&want, &Budget::default()).unwrap());
        // identity on C^2 is regular exactly off the origin; sampled
        // points certify regularity unless they hit 0
        let idlift =
            lift_through_blowup(&[MPoly::var(2, 0), MPoly::var(2, 1)], &c, 2, &SeedCtx::new(0))
                .unwrap();
        for (pt, reg) in &idlift.samples {
            let at_origin = pt.iter().all(|x| x.is_zero());
            assert_eq!(*reg, !at_origin);
        }
    }

    #[test]
    fn full_ideal_intersects_components() {
        let t = VarTable::ambient(3);
        let mut c = center_line();
        c.avoid = Some(Ideal::new(
            3,
            vec![
                parse_poly("x1 - 1", &t).unwrap(),
                parse_poly("x2", &t).unwrap(),
                parse_poly("x3", &t).unwrap(),
            ],
        ));
        let full = c.full_ideal(&Budget::default()).unwrap();
        // vanishes on the x3-axis and at (1,0,0)
        for g in full.gens() {
            assert!(g.eval(&[rat(0), rat(0), rat(5)]).is_zero());
            assert!(g.eval(&[rat(1), rat(0), rat(0)]).is_zero());
        }
        // but not everywhere
        assert!(full
            .gens()
            .iter()
            .any(|g| !g.eval(&[rat(1), rat(1), rat(1)]).is_zero()));
    }
}

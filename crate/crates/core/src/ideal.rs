//! Ideals with memoized Groebner bases, elimination, intersection, colon
//! ideals, and exact quotient extraction modulo relations.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::groebner::{basis_contains_one, buchberger, divrem, Budget, Gas};
use crate::linalg::Mat;
use crate::mpoly::MPoly;
use crate::order::MonomialOrder;
use crate::rat::Rat;

#[derive(Clone)]
pub struct Ideal {
    nvars: usize,
    gens: Vec<MPoly>,
    cache: Arc<Mutex<HashMap<MonomialOrder, Arc<Vec<MPoly>>>>>,
}

impl std::fmt::Debug for Ideal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Ideal{:?}", self.gens)
    }
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.gens == other.gens
    }
}

impl Ideal {
    pub fn new(nvars: usize, gens: Vec<MPoly>) -> Self {
        for g in &gens {
            assert_eq!(g.nvars(), nvars, "generator in the wrong ring");
        }
        let gens: Vec<MPoly> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ideal {
            nvars,
            gens,
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn principal(p: MPoly) -> Self {
        let n = p.nvars();
        Ideal::new(n, vec![p])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gens(&self) -> &[MPoly] {
        &self.gens
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.gens.is_empty()
    }

    /// Reduced basis for the order, computed once per order and shared.
    /// The memoization is invisible: the reduced basis is unique, so a
    /// cached answer and a fresh one agree.
    pub fn basis(&self, order: MonomialOrder, budget: &Budget) -> Result<Arc<Vec<MPoly>>> {
        if let Some(b) = self.cache.lock().unwrap().get(&order) {
            return Ok(b.clone());
        }
        let b = Arc::new(buchberger(&self.gens, order, budget)?);
        self.cache
            .lock()
            .unwrap()
            .insert(order, b.clone());
        Ok(b)
    }

    pub fn normal_form_with(
        &self,
        f: &MPoly,
        order: MonomialOrder,
        budget: &Budget,
    ) -> Result<MPoly> {
        let b = self.basis(order, budget)?;
        if b.is_empty() {
            return Ok(f.clone());
        }
        let mut gas = Gas::new(budget, "normal form");
        Ok(divrem(f, &b, order, &mut gas)?.1)
    }

    pub fn normal_form(&self, f: &MPoly, budget: &Budget) -> Result<MPoly> {
        self.normal_form_with(f, MonomialOrder::GrevLex, budget)
    }

    pub fn contains(&self, f: &MPoly, budget: &Budget) -> Result<bool> {
        Ok(self.normal_form(f, budget)?.is_zero())
    }

    pub fn contains_one(&self, budget: &Budget) -> Result<bool> {
        Ok(basis_contains_one(&self.basis(MonomialOrder::GrevLex, budget)?))
    }

    /// Same ideal as another one (componentwise reduction of generators).
    pub fn same_ideal(&self, other: &Ideal, budget: &Budget) -> Result<bool> {
        for g in &self.gens {
            if !other.contains(g, budget)? {
                return Ok(false);
            }
        }
        for g in &other.gens {
            if !self.contains(g, budget)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Eliminates all variables not in `keep` (strictly increasing) and
    /// renumbers the survivors to 0..keep.len().
    pub fn eliminate(&self, keep: &[usize], budget: &Budget) -> Result<Ideal> {
        assert!(keep.windows(2).all(|w| w[0] < w[1]), "keep must increase");
        assert!(keep.iter().all(|&v| v < self.nvars));
        let dropped: Vec<usize> = (0..self.nvars).filter(|v| !keep.contains(v)).collect();
        let cut = dropped.len();
        // permute so the dropped variables come first, then use the block
        // order that eliminates them
        let mut map = vec![0usize; self.nvars];
        for (new, &old) in dropped.iter().enumerate() {
            map[old] = new;
        }
        for (k, &old) in keep.iter().enumerate() {
            map[old] = cut + k;
        }
        let permuted: Vec<MPoly> = self
            .gens
            .iter()
            .map(|g| g.embed(self.nvars, &map))
            .collect();
        let basis = buchberger(&permuted, MonomialOrder::Elim { cut }, budget)?;
        let tail: Vec<usize> = (cut..self.nvars).collect();
        let mut out = Vec::new();
        for b in &basis {
            if let Some(p) = b.restrict_to(&tail) {
                out.push(p);
            }
        }
        Ok(Ideal::new(keep.len(), out))
    }

    /// Intersection via the standard trick: eliminate t from
    /// t*I + (1 - t)*J.
    pub fn intersect(&self, other: &Ideal, budget: &Budget) -> Result<Ideal> {
        assert_eq!(self.nvars, other.nvars);
        let n = self.nvars;
        let map: Vec<usize> = (1..=n).collect();
        let t = MPoly::var(n + 1, 0);
        let one_minus_t = &MPoly::one(n + 1) - &t;
        let mut gens = Vec::new();
        for g in &self.gens {
            gens.push(&g.embed(n + 1, &map) * &t);
        }
        for g in &other.gens {
            gens.push(&g.embed(n + 1, &map) * &one_minus_t);
        }
        let big = Ideal::new(n + 1, gens);
        big.eliminate(&map, budget)
    }

    /// Colon ideal (I : f) = { g : g*f in I }, via (I intersect (f)) / f.
    pub fn colon(&self, f: &MPoly, budget: &Budget) -> Result<Ideal> {
        assert!(!f.is_zero());
        let inter = self.intersect(&Ideal::principal(f.clone()), budget)?;
        let gens = inter
            .gens
            .iter()
            .map(|g| {
                g.exact_div(f).ok_or_else(|| Error::Internal {
                    what: "colon generator not divisible".into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Ideal::new(self.nvars, gens))
    }

    /// Saturation (I : f^infinity) by iterating the colon until it stops
    /// growing.
    pub fn saturate(&self, f: &MPoly, budget: &Budget) -> Result<Ideal> {
        let mut cur = self.clone();
        for _ in 0..16 {
            let next = cur.colon(f, budget)?;
            if next.same_ideal(&cur, budget)? {
                return Ok(cur);
            }
            cur = next;
        }
        Err(Error::Budget {
            stage: "saturation".into(),
        })
    }

    /// Krull dimension of V(I): the largest set of variables such that no
    /// leading monomial of the basis lives entirely on them. Returns -1
    /// for the empty variety.
    pub fn dimension(&self, budget: &Budget) -> Result<i64> {
        let basis = self.basis(MonomialOrder::GrevLex, budget)?;
        if basis_contains_one(&basis) {
            return Ok(-1);
        }
        let leads: Vec<Vec<u32>> = basis
            .iter()
            .map(|p| p.leading_term(MonomialOrder::GrevLex).unwrap().0.clone())
            .collect();
        let n = self.nvars;
        let mut best: i64 = 0;
        for mask in 0u64..(1 << n) {
            let size = mask.count_ones() as i64;
            if size <= best {
                continue;
            }
            let independent = leads.iter().all(|lm| {
                // some exponent outside the candidate set is positive
                (0..n).any(|v| lm[v] > 0 && mask & (1 << v) == 0)
            });
            if independent {
                best = size;
            }
        }
        Ok(best)
    }

    /// Finds q with num = q * den modulo the ideal, by solving a linear
    /// system over monomial coefficients of bounded degree. Returns None
    /// when no quotient exists within the degree window; that is a budget
    /// statement, not a disproof.
    pub fn quotient_div(
        &self,
        num: &MPoly,
        den: &MPoly,
        budget: &Budget,
    ) -> Result<Option<MPoly>> {
        assert_eq!(num.nvars(), self.nvars);
        assert_eq!(den.nvars(), self.nvars);
        if den.is_zero() {
            return Ok(None);
        }
        let target = self.normal_form(num, budget)?;
        if target.is_zero() {
            return Ok(Some(MPoly::zero(self.nvars)));
        }
        let d0 = num.total_degree().saturating_sub(den.total_degree());
        let dmax = (d0 + 4).min(budget.max_degree);
        for d in d0..=dmax {
            if let Some(q) = self.solve_multiplier(&target, den, d, budget)? {
                return Ok(Some(q));
            }
        }
        Ok(None)
    }

    /// Linear solve for q of total degree <= d with nf(target - q*den) = 0.
    fn solve_multiplier(
        &self,
        target: &MPoly,
        den: &MPoly,
        d: u32,
        budget: &Budget,
    ) -> Result<Option<MPoly>> {
        let monos = monomials_up_to(self.nvars, d);
        if monos.len() > 20_000 {
            return Err(Error::Budget {
                stage: "quotient ansatz size".into(),
            });
        }
        // columns: nf(m * den) for each candidate monomial m
        let mut columns = Vec::with_capacity(monos.len());
        for m in &monos {
            let prod = den.mul_monomial(m, &num_traits::One::one());
            columns.push(self.normal_form(&prod, budget)?);
        }
        // row space: all monomials appearing in the target or any column
        let mut support: Vec<Vec<u32>> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for p in columns.iter().chain(std::iter::once(target)) {
            for (e, _) in p.terms() {
                if seen.insert(e.clone()) {
                    support.push(e.clone());
                }
            }
        }
        support.sort();
        let rows = support.len();
        let mut a = Mat::zero(rows, monos.len());
        for (j, col) in columns.iter().enumerate() {
            for (e, c) in col.terms() {
                let i = support.binary_search(e).unwrap();
                a.set(i, j, c.clone());
            }
        }
        let mut b = vec![Rat::zero(); rows];
        for (e, c) in target.terms() {
            let i = support.binary_search(e).unwrap();
            b[i] = c.clone();
        }
        match a.solve(&b) {
            None => Ok(None),
            Some(x) => {
                let mut q = MPoly::zero(self.nvars);
                for (m, c) in monos.into_iter().zip(x) {
                    q.add_term(m, c);
                }
                Ok(Some(q))
            }
        }
    }
}

/// All exponent vectors of total degree <= d, in deterministic order.
pub fn monomials_up_to(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, var: usize, left: u32) {
        if var == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[var] = k;
            rec(out, cur, var + 1, left - k);
        }
        cur[var] = 0;
    }
    rec(&mut out, &mut cur, 0, d);
    out.sort();
    out.dedup();
    out
}

/// Finds multipliers h_s with nf_modulus(delta - sum h_s left_s) = 0, i.e.
/// writes delta as an element of (left) + modulus. Used to glue maps that
/// agree on an overlap.
pub fn express_in_sum(
    delta: &MPoly,
    left: &[MPoly],
    modulus: &Ideal,
    budget: &Budget,
) -> Result<Option<Vec<MPoly>>> {
    let n = delta.nvars();
    assert!(left.iter().all(|p| p.nvars() == n));
    let target = modulus.normal_form(delta, budget)?;
    if target.is_zero() {
        return Ok(Some(vec![MPoly::zero(n); left.len()]));
    }
    if left.is_empty() {
        return Ok(None);
    }
    let dmax = (delta.total_degree() + 4).min(budget.max_degree);
    for d in 0..=dmax {
        let monos = monomials_up_to(n, d);
        if monos.len() * left.len() > 20_000 {
            return Err(Error::Budget {
                stage: "gluing ansatz size".into(),
            });
        }
        let mut columns: Vec<MPoly> = Vec::new();
        for l in left {
            for m in &monos {
                let prod = l.mul_monomial(m, &num_traits::One::one());
                columns.push(modulus.normal_form(&prod, budget)?);
            }
        }
        let mut support: Vec<Vec<u32>> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for p in columns.iter().chain(std::iter::once(&target)) {
            for (e, _) in p.terms() {
                if seen.insert(e.clone()) {
                    support.push(e.clone());
                }
            }
        }
        support.sort();
        let mut a = Mat::zero(support.len(), columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (e, c) in col.terms() {
                let i = support.binary_search(e).unwrap();
                a.set(i, j, c.clone());
            }
        }
        let mut b = vec![Rat::zero(); support.len()];
        for (e, c) in target.terms() {
            let i = support.binary_search(e).unwrap();
            b[i] = c.clone();
        }
        if let Some(x) = a.solve(&b) {
            let mut hs = Vec::with_capacity(left.len());
            for s in 0..left.len() {
                let mut h = MPoly::zero(n);
                for (k, m) in monos.iter().enumerate() {
                    h.add_term(m.clone(), x[s * monos.len() + k].clone());
                }
                hs.push(h);
            }
            return Ok(Some(hs));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn membership() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let i = Ideal::new(2, vec![&x.pow(2) - &y, &(&x * &y) - &x]);
        // x^3 - x = x(x^2 - y) + (xy - x) is in the ideal
        let f = &x.pow(3) - &x;
        assert!(i.contains(&f, &budget()).unwrap());
        assert!(!i.contains(&x, &budget()).unwrap());
    }

    #[test]
    fn elimination_of_a_parameter() {
        // x2 = s^2, x3 = s^3: eliminating s leaves x2^3 - x3^2
        let s = MPoly::var(3, 0);
        let x2 = MPoly::var(3, 1);
        let x3 = MPoly::var(3, 2);
        let i = Ideal::new(3, vec![&x2 - &s.pow(2), &x3 - &s.pow(3)]);
        let e = i.eliminate(&[1, 2], &budget()).unwrap();
        let y0 = MPoly::var(2, 0);
        let y1 = MPoly::var(2, 1);
        assert_eq!(e.gens().len(), 1);
        assert_eq!(e.gens()[0], &y0.pow(3) - &y1.pow(2));
    }

    #[test]
    fn elimination_soundness_on_points() {
        // points on the curve satisfy the eliminated relation
        let s = MPoly::var(3, 0);
        let x2 = MPoly::var(3, 1);
        let x3 = MPoly::var(3, 2);
        let i = Ideal::new(3, vec![&x2 - &s.pow(2), &x3 - &s.pow(3)]);
        let e = i.eliminate(&[1, 2], &budget()).unwrap();
        for k in -3i64..=3 {
            let sv = crate::rat::rat(k);
            let pt = vec![&sv * &sv, &sv * &sv * &sv];
            for g in e.gens() {
                assert!(g.eval(&pt).is_zero());
            }
        }
    }

    #[test]
    fn intersection_of_coordinate_ideals() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let i = Ideal::principal(x.clone());
        let j = Ideal::principal(y.clone());
        let k = i.intersect(&j, &budget()).unwrap();
        assert!(k.same_ideal(&Ideal::principal(&x * &y), &budget()).unwrap());
    }

    #[test]
    fn colon_and_saturation() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let i = Ideal::principal(&x.pow(2) * &y);
        let c = i.colon(&x, &budget()).unwrap();
        assert!(c.same_ideal(&Ideal::principal(&x * &y), &budget()).unwrap());
        let s = i.saturate(&x, &budget()).unwrap();
        assert!(s.same_ideal(&Ideal::principal(y), &budget()).unwrap());
    }

    #[test]
    fn dimension_examples() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        assert_eq!(Ideal::new(2, vec![]).dimension(&budget()).unwrap(), 2);
        assert_eq!(Ideal::principal(x.clone()).dimension(&budget()).unwrap(), 1);
        assert_eq!(
            Ideal::new(2, vec![x.clone(), y.clone()]).dimension(&budget()).unwrap(),
            0
        );
        assert_eq!(
            Ideal::new(2, vec![MPoly::one(2)]).dimension(&budget()).unwrap(),
            -1
        );
    }

    #[test]
    fn quotient_div_through_chart_relation() {
        // modulo x1 - l1*x2, the function x1 is divisible by x2 with
        // quotient l1
        let x1 = MPoly::var(3, 0);
        let x2 = MPoly::var(3, 1);
        let l1 = MPoly::var(3, 2);
        let rel = &x1 - &(&l1 * &x2);
        let i = Ideal::principal(rel);
        let q = i.quotient_div(&x1, &x2, &budget()).unwrap().unwrap();
        // check x1 - q*x2 is in the ideal
        assert!(i.contains(&(&x1 - &(&q * &x2)), &budget()).unwrap());
        assert_eq!(q, l1);
    }

    #[test]
    fn quotient_div_absent() {
        // in the plain ring, x1 is not divisible by x2
        let x1 = MPoly::var(2, 0);
        let x2 = MPoly::var(2, 1);
        let i = Ideal::new(2, vec![]);
        assert!(i.quotient_div(&x1, &x2, &budget()).unwrap().is_none());
    }

    #[test]
    fn express_in_sum_glues() {
        // delta = x - y lies in (x) + (y): delta = 1*x + (-1)*y
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let modulus = Ideal::principal(y.clone());
        let hs = express_in_sum(&(&x - &y), &[x.clone()], &modulus, &budget())
            .unwrap()
            .unwrap();
        let diff = &(&x - &y) - &(&hs[0] * &x);
        assert!(modulus.contains(&diff, &budget()).unwrap());
    }

    #[test]
    fn cache_is_invisible() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let f = &x.pow(3) + &(&x * &y);
        let warm = Ideal::new(2, vec![&x.pow(2) - &y, y.clone()]);
        let _ = warm.basis(MonomialOrder::GrevLex, &budget()).unwrap();
        let cold = Ideal::new(2, vec![&x.pow(2) - &y, y.clone()]);
        let a = warm.normal_form(&f, &budget()).unwrap();
        let b = cold.normal_form(&f, &budget()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monomial_enumeration_counts() {
        // C(nvars + d, d) monomials of degree <= d
        assert_eq!(monomials_up_to(2, 2).len(), 6);
        assert_eq!(monomials_up_to(3, 3).len(), 20);
    }
}

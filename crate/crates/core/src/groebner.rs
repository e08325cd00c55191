//! Buchberger's algorithm with the product and chain criteria, multivariate
//! division, and reduced (hence canonical) bases. All loops draw from an
//! explicit step budget: running out is an error, never a wrong answer.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::order::MonomialOrder;
use crate::rat::Rat;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Budget {
    pub groebner_steps: u64,
    pub max_degree: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            groebner_steps: 200_000,
            max_degree: 40,
        }
    }
}

/// Mutable step counter drawn down by division and pair processing.
pub struct Gas {
    left: u64,
    stage: String,
}

impl Gas {
    pub fn new(budget: &Budget, stage: &str) -> Self {
        Gas {
            left: budget.groebner_steps,
            stage: stage.to_string(),
        }
    }

    pub fn tick(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::Budget {
                stage: self.stage.clone(),
            });
        }
        self.left -= 1;
        Ok(())
    }
}

fn monomial_divides(d: &[u32], m: &[u32]) -> bool {
    d.iter().zip(m).all(|(a, b)| a <= b)
}

fn monomial_lcm(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

/// Divides f by the list in order, returning quotients and remainder with
/// f = sum q_i d_i + rem and no remainder term divisible by any leading
/// monomial.
pub fn divrem(
    f: &MPoly,
    divisors: &[MPoly],
    order: MonomialOrder,
    gas: &mut Gas,
) -> Result<(Vec<MPoly>, MPoly)> {
    let n = f.nvars();
    let leads: Vec<(Vec<u32>, Rat)> = divisors
        .iter()
        .map(|d| {
            let (m, c) = d.leading_term(order).expect("nonzero divisor");
            (m.clone(), c.clone())
        })
        .collect();
    let mut quots = vec![MPoly::zero(n); divisors.len()];
    let mut rem = MPoly::zero(n);
    let mut work = f.clone();
    while let Some((m, c)) = work.leading_term(order) {
        gas.tick()?;
        let m = m.clone();
        let c = c.clone();
        let mut reduced = false;
        for (k, (dm, dc)) in leads.iter().enumerate() {
            if monomial_divides(dm, &m) {
                let q: Vec<u32> = m.iter().zip(dm).map(|(a, b)| a - b).collect();
                let qc = &c / dc;
                quots[k].add_term(q.clone(), qc.clone());
                work = &work - &divisors[k].mul_monomial(&q, &qc);
                reduced = true;
                break;
            }
        }
        if !reduced {
            rem.add_term(m.clone(), c.clone());
            work.add_term(m, -c);
        }
    }
    Ok((quots, rem))
}

pub fn normal_form(
    f: &MPoly,
    basis: &[MPoly],
    order: MonomialOrder,
    gas: &mut Gas,
) -> Result<MPoly> {
    if basis.is_empty() {
        return Ok(f.clone());
    }
    Ok(divrem(f, basis, order, gas)?.1)
}

pub fn s_polynomial(f: &MPoly, g: &MPoly, order: MonomialOrder) -> MPoly {
    let (fm, fc) = f.leading_term(order).expect("nonzero");
    let (gm, gc) = g.leading_term(order).expect("nonzero");
    let l = monomial_lcm(fm, gm);
    let fq: Vec<u32> = l.iter().zip(fm).map(|(a, b)| a - b).collect();
    let gq: Vec<u32> = l.iter().zip(gm).map(|(a, b)| a - b).collect();
    &f.mul_monomial(&fq, &fc.recip()) - &g.mul_monomial(&gq, &gc.recip())
}

/// Reduced Groebner basis: monic, mutually reduced, sorted by increasing
/// leading monomial. The reduced basis of an ideal is unique for a given
/// order, which makes downstream output canonical.
pub fn buchberger(
    gens: &[MPoly],
    order: MonomialOrder,
    budget: &Budget,
) -> Result<Vec<MPoly>> {
    let mut gas = Gas::new(budget, "groebner basis");
    let mut basis: Vec<MPoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pending.push((i, j));
        }
    }
    let lm = |p: &MPoly| -> Vec<u32> { p.leading_term(order).unwrap().0.clone() };
    while !pending.is_empty() {
        gas.tick()?;
        // pick the pair with the smallest lcm (normal selection strategy);
        // deterministic tie-break on the exponent vector and the indices
        let mut best = 0;
        let mut best_key: Option<(u64, Vec<u32>, usize, usize)> = None;
        for (k, &(i, j)) in pending.iter().enumerate() {
            let l = monomial_lcm(&lm(&basis[i]), &lm(&basis[j]));
            let deg: u64 = l.iter().map(|&e| e as u64).sum();
            let key = (deg, l, i, j);
            if best_key.as_ref().map(|b| key < *b).unwrap_or(true) {
                best_key = Some(key);
                best = k;
            }
        }
        let (i, j) = pending.swap_remove(best);
        let lmi = lm(&basis[i]);
        let lmj = lm(&basis[j]);
        // product criterion: coprime leading monomials reduce to zero
        if lmi.iter().zip(&lmj).all(|(a, b)| *a == 0 || *b == 0) {
            continue;
        }
        // chain criterion: some basis element divides the lcm and both
        // side pairs were already treated
        let l = monomial_lcm(&lmi, &lmj);
        let chained = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && monomial_divides(&lm(&basis[k]), &l)
                && !pending.contains(&(i.min(k), i.max(k)))
                && !pending.contains(&(j.min(k), j.max(k)))
        });
        if chained {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j], order);
        let (_, rem) = divrem(&s, &basis, order, &mut gas)?;
        if rem.is_zero() {
            continue;
        }
        if rem.total_degree() > budget.max_degree {
            return Err(Error::Budget {
                stage: "groebner degree bound".into(),
            });
        }
        let new = basis.len();
        for k in 0..new {
            pending.push((k, new));
        }
        basis.push(rem);
    }
    // minimize: drop elements whose leading monomial another one divides
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..basis.len() {
            if i != j && keep[j] && monomial_divides(&lm(&basis[j]), &lm(&basis[i])) {
                // prefer the other element unless it is the same monomial
                // and comes later
                if lm(&basis[j]) == lm(&basis[i]) && j > i {
                    continue;
                }
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<MPoly> = basis
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| p.clone())
        .collect();
    // inter-reduce: replace each element by its normal form against the
    // others, then make everything monic
    let mut reduced: Vec<MPoly> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<MPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let nf = if others.is_empty() {
            minimal[i].clone()
        } else {
            divrem(&minimal[i], &others, order, &mut gas)?.1
        };
        if !nf.is_zero() {
            reduced.push(nf.make_monic(order));
        }
    }
    reduced.sort_by(|a, b| order.cmp(&lm(a), &lm(b)));
    reduced.dedup();
    Ok(reduced)
}

/// One is in the basis iff the ideal is the whole ring.
pub fn basis_contains_one(basis: &[MPoly]) -> bool {
    basis.iter().any(|p| {
        p.constant_value()
            .map(|c| !c.is_zero())
            .unwrap_or(false)
            || (p.num_terms() == 1 && p.total_degree() == 0)
    })
}

impl MPoly {
    /// Leading monomial is one, i.e. the polynomial is a nonzero constant.
    pub fn is_unit(&self) -> bool {
        self.constant_value().map(|c| !c.is_zero()).unwrap_or(false)
    }
}

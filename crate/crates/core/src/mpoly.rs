//! Sparse multivariate polynomials over the rationals.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order
//! is deterministic and zero coefficients are never stored. The map key
//! order is plain lexicographic on exponents; anything that needs a real
//! monomial order (leading terms, division) takes a `MonomialOrder`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::order::MonomialOrder;
use crate::rat::{rat_gcd, Rat};

#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = MPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, Rat::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range {nvars}");
        let mut e = vec![0; nvars];
        e[i] = 1;
        MPoly::monomial(nvars, e, Rat::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = MPoly::zero(nvars);
        p.add_term(exps, c);
        p
    }

    /// c0 + sum of coeffs[i] * x_i.
    pub fn affine(nvars: usize, coeffs: &[Rat], c0: Rat) -> Self {
        assert_eq!(coeffs.len(), nvars);
        let mut p = MPoly::constant(nvars, c0);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0))
    }

    /// The constant value if the polynomial is constant.
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            Some(self.terms.values().next().unwrap().clone())
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(exps).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    pub fn leading_term(&self, order: MonomialOrder) -> Option<(&Vec<u32>, &Rat)> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn leading_coeff(&self, order: MonomialOrder) -> Rat {
        self.leading_term(order)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Top total-degree homogeneous part.
    pub fn leading_form(&self) -> MPoly {
        let d = self.total_degree();
        let mut p = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() == d {
                p.add_term(e.clone(), c.clone());
            }
        }
        p
    }

    pub fn mul_scalar(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        let mut p = MPoly::zero(self.nvars);
        for (e, a) in &self.terms {
            p.terms.insert(e.clone(), a * c);
        }
        p
    }

    pub fn mul_monomial(&self, exps: &[u32], c: &Rat) -> MPoly {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        let mut p = MPoly::zero(self.nvars);
        for (e, a) in &self.terms {
            let m: Vec<u32> = e.iter().zip(exps).map(|(x, y)| x + y).collect();
            p.terms.insert(m, a * c);
        }
        p
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut acc = MPoly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, v: usize) -> MPoly {
        assert!(v < self.nvars);
        let mut p = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut m = e.clone();
            m[v] -= 1;
            p.add_term(m, c * Rat::from_integer(e[v].into()));
        }
        p
    }

    pub fn gradient(&self) -> Vec<MPoly> {
        (0..self.nvars).map(|v| self.derivative(v)).collect()
    }

    pub fn eval(&self, pt: &[Rat]) -> Rat {
        assert_eq!(pt.len(), self.nvars);
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= &pt[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn gradient_at(&self, pt: &[Rat]) -> Vec<Rat> {
        (0..self.nvars).map(|v| self.derivative(v).eval(pt)).collect()
    }

    /// Full composition: replaces variable i by `args[i]`. All arguments
    /// must live in one common ring, which becomes the result ring.
    pub fn substitute(&self, args: &[MPoly]) -> MPoly {
        assert_eq!(args.len(), self.nvars);
        let m = if args.is_empty() { 0 } else { args[0].nvars };
        for a in args {
            assert_eq!(a.nvars, m);
        }
        // cache powers of each argument as needed
        let mut powers: Vec<Vec<MPoly>> = args.iter().map(|a| vec![MPoly::one(m), a.clone()]).collect();
        let mut acc = MPoly::zero(m);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &args[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][k as usize];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Replaces one variable by a polynomial in the same ring.
    pub fn subst_var(&self, v: usize, p: &MPoly) -> MPoly {
        assert_eq!(p.nvars, self.nvars);
        let args: Vec<MPoly> = (0..self.nvars)
            .map(|i| if i == v { p.clone() } else { MPoly::var(self.nvars, i) })
            .collect();
        self.substitute(&args)
    }

    /// Reinterprets the polynomial in a ring with `new_nvars` variables,
    /// sending old variable i to new variable `map[i]`.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> MPoly {
        assert_eq!(map.len(), self.nvars);
        assert!(map.iter().all(|&j| j < new_nvars));
        let mut p = MPoly::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut m = vec![0u32; new_nvars];
            for (i, &k) in e.iter().enumerate() {
                m[map[i]] += k;
            }
            p.add_term(m, c.clone());
        }
        p
    }

    /// If the polynomial only involves the variables in `keep` (strictly
    /// increasing), renumbers them to 0..keep.len() and returns the result.
    pub fn restrict_to(&self, keep: &[usize]) -> Option<MPoly> {
        let mut pos = vec![usize::MAX; self.nvars];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let mut p = MPoly::zero(keep.len());
        for (e, c) in &self.terms {
            let mut m = vec![0u32; keep.len()];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    if pos[i] == usize::MAX {
                        return None;
                    }
                    m[pos[i]] = k;
                }
            }
            p.add_term(m, c.clone());
        }
        Some(p)
    }

    /// Positive gcd of all coefficients; zero for the zero polynomial.
    pub fn content(&self) -> Rat {
        let mut g = Rat::zero();
        for c in self.terms.values() {
            g = rat_gcd(&g, c);
        }
        g
    }

    /// Divides out the content and fixes the sign so the leading
    /// coefficient under `order` is positive.
    pub fn normalize_primitive(&self, order: MonomialOrder) -> MPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.leading_coeff(order).is_negative() {
            c = -c;
        }
        self.mul_scalar(&c.recip())
    }

    pub fn make_monic(&self, order: MonomialOrder) -> MPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.mul_scalar(&self.leading_coeff(order).recip())
    }

    /// Exact single-divisor division: returns q with self = q * d, or None
    /// if the remainder is nonzero. A single polynomial is a Groebner basis
    /// of the ideal it generates, so a nonzero remainder proves
    /// indivisibility.
    pub fn exact_div(&self, d: &MPoly) -> Option<MPoly> {
        assert_eq!(self.nvars, d.nvars);
        assert!(!d.is_zero(), "division by zero polynomial");
        let order = MonomialOrder::GrevLex;
        let (dm, dc) = {
            let (m, c) = d.leading_term(order).unwrap();
            (m.clone(), c.clone())
        };
        let mut rem = self.clone();
        let mut q = MPoly::zero(self.nvars);
        while let Some((m, c)) = rem.leading_term(order) {
            let mut quot = vec![0u32; self.nvars];
            let mut ok = true;
            for i in 0..self.nvars {
                if m[i] < dm[i] {
                    ok = false;
                    break;
                }
                quot[i] = m[i] - dm[i];
            }
            if !ok {
                return None;
            }
            let qc = c / &dc;
            q.add_term(quot.clone(), qc.clone());
            rem = &rem - &d.mul_monomial(&quot, &qc);
        }
        Some(q)
    }

    /// Renders with caller-supplied variable names; used by Debug and the
    /// canonical display in `parse`.
    pub fn render(&self, names: &dyn Fn(usize) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let order = MonomialOrder::GrevLex;
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| order.cmp(b, a));
        let mut out = String::new();
        for (idx, e) in keys.iter().enumerate() {
            let c = &self.terms[*e];
            if idx == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            for (i, &k) in e.iter().enumerate() {
                if k == 1 {
                    factors.push(names(i));
                } else if k > 1 {
                    factors.push(format!("{}^{}", names(i), k));
                }
            }
            if factors.is_empty() {
                out.push_str(&crate::rat::rat_str(&a));
            } else {
                if !a.is_one() {
                    out.push_str(&crate::rat::rat_str(&a));
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|i| format!("v{i}")))
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        let mut p = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            p.terms.insert(e.clone(), -c.clone());
        }
        p
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut p = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let m: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(m, c1 * c2);
            }
        }
        p
    }
}

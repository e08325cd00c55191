//! Multivariate polynomial gcd by the primitive polynomial remainder
//! sequence: pick a main variable, strip contents, run pseudo-remainders,
//! and recurse on the contents one variable down.

use std::collections::BTreeMap;

use crate::mpoly::MPoly;
use crate::order::MonomialOrder;

/// Coefficients of f viewed as a polynomial in variable v; keys are the
/// degrees in v, values live in the same ring with the v-exponent cleared.
pub fn coeffs_wrt(f: &MPoly, v: usize) -> BTreeMap<u32, MPoly> {
    let mut out: BTreeMap<u32, MPoly> = BTreeMap::new();
    for (e, c) in f.terms() {
        let mut m = e.clone();
        let k = m[v];
        m[v] = 0;
        out.entry(k)
            .or_insert_with(|| MPoly::zero(f.nvars()))
            .add_term(m, c.clone());
    }
    out
}

fn content_wrt(f: &MPoly, v: usize) -> MPoly {
    let mut g = MPoly::zero(f.nvars());
    for c in coeffs_wrt(f, v).values() {
        g = gcd(&g, c);
        if g.is_constant() && !g.is_zero() {
            break;
        }
    }
    g
}

fn primitive_wrt(f: &MPoly, v: usize) -> MPoly {
    if f.is_zero() {
        return f.clone();
    }
    let c = content_wrt(f, v);
    f.exact_div(&c).expect("content divides")
}

/// lc_g^k * f reduced by g in the variable v until deg_v drops below
/// deg_v(g).
fn pseudo_rem(f: &MPoly, g: &MPoly, v: usize) -> MPoly {
    let dg = g.degree_in(v);
    debug_assert!(dg >= 1);
    let cg = coeffs_wrt(g, v);
    let lcg = cg[&dg].clone();
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lcr = coeffs_wrt(&r, v)[&dr].clone();
        let mut shift = vec![0u32; f.nvars()];
        shift[v] = dr - dg;
        let sub = g.mul_monomial(&shift, &num_traits::One::one());
        r = &(&r * &lcg) - &(&sub * &lcr);
    }
    r
}

fn main_var(f: &MPoly, g: &MPoly) -> Option<usize> {
    let n = f.nvars();
    (0..n)
        .rev()
        .find(|&v| f.degree_in(v) > 0 || g.degree_in(v) > 0)
}

pub fn gcd(f: &MPoly, g: &MPoly) -> MPoly {
    assert_eq!(f.nvars(), g.nvars());
    let order = MonomialOrder::GrevLex;
    if f.is_zero() {
        return g.normalize_primitive(order);
    }
    if g.is_zero() {
        return f.normalize_primitive(order);
    }
    let Some(v) = main_var(f, g) else {
        // both nonzero constants
        return MPoly::one(f.nvars());
    };
    if f.degree_in(v) == 0 || g.degree_in(v) == 0 {
        // one side is constant in the main variable: gcd divides its
        // content in v, so recurse on contents only
        let cf = content_wrt(f, v);
        let cg = content_wrt(g, v);
        return gcd(&cf, &cg).normalize_primitive(order);
    }
    let cf = content_wrt(f, v);
    let cg = content_wrt(g, v);
    let cont = gcd(&cf, &cg);
    let mut a = f.exact_div(&cf).expect("content divides");
    let mut b = g.exact_div(&cg).expect("content divides");
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    let part = loop {
        if b.is_zero() {
            break a;
        }
        if b.degree_in(v) == 0 {
            // nonzero, constant in v: primitive parts are coprime
            break MPoly::one(f.nvars());
        }
        let r = pseudo_rem(&a, &b, v);
        a = b;
        b = primitive_wrt(&r, v);
    };
    (&cont * &primitive_wrt(&part, v)).normalize_primitive(order)
}

pub fn gcd_list(fs: &[MPoly]) -> MPoly {
    assert!(!fs.is_empty());
    let mut g = MPoly::zero(fs[0].nvars());
    for f in fs {
        g = gcd(&g, f);
        if g.is_constant() && !g.is_zero() {
            break;
        }
    }
    g
}

//! Monomial orders on exponent vectors.

use std::cmp::Ordering;

/// Total orders used by the division and basis routines. `Elim { cut }` is
/// the block order that eliminates the first `cut` variables: it compares
/// the leading block by graded reverse lexicographic order and breaks ties
/// on the trailing block the same way.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    GrevLex,
    Lex,
    Elim { cut: usize },
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        other => return other,
    }
    // equal degree: the monomial whose rightmost differing exponent is
    // smaller is the larger one
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

fn lex(a: &[u32], b: &[u32]) -> Ordering {
    for i in 0..a.len() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        debug_assert_eq!(a.len(), b.len());
        match *self {
            MonomialOrder::GrevLex => grevlex(a, b),
            MonomialOrder::Lex => lex(a, b),
            MonomialOrder::Elim { cut } => {
                let cut = cut.min(a.len());
                match grevlex(&a[..cut], &b[..cut]) {
                    Ordering::Equal => grevlex(&a[cut..], &b[cut..]),
                    other => other,
                }
            }
        }
    }
}

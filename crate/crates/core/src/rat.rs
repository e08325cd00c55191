//! Exact rational scalars. `Rat` is always in lowest terms with a positive
//! denominator; `num_rational::BigRational` maintains both invariants.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Renders `p` or `p/q`, matching the scene and report formats.
pub fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` with optional sign; denominators must be nonzero.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = |msg: &str| Error::Syntax {
        pos: 0,
        msg: format!("{msg} in rational literal `{s}`"),
    };
    let mut parts = s.splitn(2, '/');
    let num = parts.next().unwrap_or("").trim();
    let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
    match parts.next() {
        None => Ok(Rat::from_integer(num)),
        Some(den) => {
            let den: BigInt = den.trim().parse().map_err(|_| bad("bad denominator"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// gcd of two rationals: the positive generator of the fractional ideal
/// they span, gcd(a/b, c/d) = gcd(ad, cb)/(bd) reduced. Used for contents.
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = num_integer::gcd(
        a.numer() * b.denom(),
        b.numer() * a.denom(),
    );
    Rat::new(num, a.denom() * b.denom()).abs()
}

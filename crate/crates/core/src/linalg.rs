//! Exact linear algebra over the rationals, a tiny fraction field over the
//! polynomial ring, and dual numbers for exact first derivatives.

use num_traits::{One, Signed, Zero};

use crate::gcd;
use crate::mpoly::MPoly;
use crate::order::MonomialOrder;
use crate::rat::Rat;

pub type Point = Vec<Rat>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    a: Vec<Rat>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            a.extend(row);
        }
        Mat { rows: r, cols: c, a }
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| crate::rat::rat(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut m = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = m.get(i, j) + aik * other.get(k, j);
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let mut pivot = None;
            for i in r..m.rows {
                if !m.get(i, c).is_zero() {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            for j in 0..m.cols {
                let tmp = m.get(r, j).clone();
                let v = m.get(p, j).clone();
                m.set(r, j, v);
                m.set(p, j, tmp);
            }
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i != r && !m.get(i, c).is_zero() {
                    let f = m.get(i, c).clone();
                    for j in 0..m.cols {
                        let v = m.get(i, j) - &f * m.get(r, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// One solution of self * x = b (free coordinates set to zero), or None
    /// if the system is inconsistent.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // a row reduces to 0 = 1
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols).clone();
        }
        Some(x)
    }

    /// Basis of the null space, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..m.cols {
            let mut pivot = None;
            for i in c..m.rows {
                if !m.get(i, c).is_zero() {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else { return Rat::zero() };
            if p != c {
                for j in 0..m.cols {
                    let tmp = m.get(c, j).clone();
                    let v = m.get(p, j).clone();
                    m.set(c, j, v);
                    m.set(p, j, tmp);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in (c + 1)..m.rows {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &piv;
                for j in c..m.cols {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// For a matrix with full row rank, some X with self * X = I.
    pub fn right_inverse(&self) -> Option<Mat> {
        let mut x = Mat::zero(self.cols, self.rows);
        for k in 0..self.rows {
            let mut e = vec![Rat::zero(); self.rows];
            e[k] = Rat::one();
            let col = self.solve(&e)?;
            for i in 0..self.cols {
                x.set(i, k, col[i].clone());
            }
        }
        Some(x)
    }

    /// Row i as the linear form sum_j a_ij x_j in a ring with `cols` variables.
    pub fn linear_forms(&self) -> Vec<MPoly> {
        (0..self.rows)
            .map(|i| MPoly::affine(self.cols, self.row(i), Rat::zero()))
            .collect()
    }
}

/// Jacobian matrix of a polynomial map, entry (i, j) = d polys[i] / d x_j.
pub fn jacobian_polys(polys: &[MPoly]) -> Vec<Vec<MPoly>> {
    polys.iter().map(|p| p.gradient()).collect()
}

/// Jacobian evaluated exactly at a point.
pub fn jacobian_at(polys: &[MPoly], pt: &[Rat]) -> Mat {
    Mat::from_rows(polys.iter().map(|p| p.gradient_at(pt)).collect())
}

pub fn rank_of_vectors(vs: &[Vec<Rat>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Mat::from_rows(vs.to_vec()).rank()
}

/// Scales a nonzero rational vector to coprime integers with the first
/// nonzero entry positive; the canonical representative of its line.
pub fn integer_direction(v: &[Rat]) -> Vec<Rat> {
    use num_bigint::BigInt;
    assert!(v.iter().any(|c| !c.is_zero()), "zero direction");
    let mut lcm = BigInt::from(1);
    for c in v {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let scaled: Vec<BigInt> = v.iter().map(|c| c.numer() * &lcm / c.denom()).collect();
    let mut g = BigInt::from(0);
    for s in &scaled {
        g = num_integer::gcd(g, s.clone());
    }
    let first = scaled.iter().find(|s| !s.is_zero()).unwrap();
    if first < &BigInt::from(0) {
        g = -g;
    }
    scaled
        .into_iter()
        .map(|s| Rat::from_integer(s / &g))
        .collect()
}

/// Is v in the span of the given vectors?
pub fn in_span(basis: &[Vec<Rat>], v: &[Rat]) -> bool {
    if v.iter().all(|c| c.is_zero()) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let mut rows = basis.to_vec();
    let r0 = rank_of_vectors(&rows);
    rows.push(v.to_vec());
    rank_of_vectors(&rows) == r0
}

/// Quotient of two polynomials, kept reduced with a sign-normalized
/// denominator. Used for symbolic Jacobians over a chart fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    pub num: MPoly,
    pub den: MPoly,
}

impl RatFn {
    pub fn new(num: MPoly, den: MPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut f = RatFn { num, den };
        f.reduce();
        f
    }

    pub fn from_poly(p: MPoly) -> Self {
        let n = p.nvars();
        RatFn {
            num: p,
            den: MPoly::one(n),
        }
    }

    pub fn zero(nvars: usize) -> Self {
        RatFn::from_poly(MPoly::zero(nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Some(c) if the function is the constant c.
    pub fn constant_value(&self) -> Option<Rat> {
        let d = self.den.constant_value()?;
        let n = self.num.constant_value()?;
        Some(n / d)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = MPoly::one(self.den.nvars());
            return;
        }
        let g = gcd::gcd(&self.num, &self.den);
        if !g.is_constant() {
            self.num = self.num.exact_div(&g).expect("gcd divides numerator");
            self.den = self.den.exact_div(&g).expect("gcd divides denominator");
        }
        // normalize: denominator primitive with positive leading coefficient
        let order = MonomialOrder::GrevLex;
        let mut c = self.den.content();
        if self.den.leading_coeff(order).is_negative() {
            c = -c;
        }
        let inv = c.recip();
        self.den = self.den.mul_scalar(&inv);
        self.num = self.num.mul_scalar(&inv);
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        RatFn::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        RatFn::new(
            &(&self.num * &o.den) - &(&o.num * &self.den),
            &self.den * &o.den,
        )
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        RatFn::new(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &RatFn) -> RatFn {
        assert!(!o.is_zero(), "division by zero function");
        RatFn::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

/// Evaluates a polynomial at rational-function arguments; the result
/// lives in the ring of the arguments.
pub fn eval_ratfn(p: &MPoly, args: &[RatFn]) -> RatFn {
    assert_eq!(args.len(), p.nvars());
    assert!(!args.is_empty());
    let nv = args[0].num.nvars();
    let one = RatFn::from_poly(MPoly::one(nv));
    let mut pows: Vec<Vec<RatFn>> = vec![vec![one.clone()]; args.len()];
    let mut acc = RatFn::zero(nv);
    for (e, c) in p.terms() {
        let mut t = RatFn::from_poly(MPoly::constant(nv, c.clone()));
        for (i, &k) in e.iter().enumerate() {
            while pows[i].len() <= k as usize {
                let next = pows[i].last().unwrap().mul(&args[i]);
                pows[i].push(next);
            }
            t = t.mul(&pows[i][k as usize]);
        }
        acc = acc.add(&t);
    }
    acc
}

/// Determinant over the fraction field by Gaussian elimination.
pub fn det_ratfn(mut m: Vec<Vec<RatFn>>) -> RatFn {
    let n = m.len();
    for row in &m {
        assert_eq!(row.len(), n, "determinant of a non-square matrix");
    }
    if n == 0 {
        let one = MPoly::one(0);
        return RatFn::from_poly(one);
    }
    let nv = m[0][0].num.nvars();
    let mut det = RatFn::from_poly(MPoly::one(nv));
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return RatFn::zero(nv);
        };
        if p != c {
            m.swap(p, c);
            det = det.neg();
        }
        let piv = m[c][c].clone();
        det = det.mul(&piv);
        for i in (c + 1)..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].div(&piv);
            for j in c..n {
                let sub = f.mul(&m[c][j]);
                m[i][j] = m[i][j].sub(&sub);
            }
        }
    }
    det
}

/// a + b*eps with eps^2 = 0; evaluating a polynomial at dual points gives
/// exact directional derivatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dual {
    pub a: Rat,
    pub b: Rat,
}

impl Dual {
    pub fn constant(a: Rat) -> Self {
        Dual { a, b: Rat::zero() }
    }

    pub fn add(&self, o: &Dual) -> Dual {
        Dual {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }

    pub fn mul(&self, o: &Dual) -> Dual {
        Dual {
            a: &self.a * &o.a,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

pub fn eval_dual(p: &MPoly, pt: &[Dual]) -> Dual {
    assert_eq!(pt.len(), p.nvars());
    let mut acc = Dual::constant(Rat::zero());
    for (e, c) in p.terms() {
        let mut t = Dual::constant(c.clone());
        for (i, &k) in e.iter().enumerate() {
            for _ in 0..k {
                t = t.mul(&pt[i]);
            }
        }
        acc = acc.add(&t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratq};

    #[test]
    fn rref_rank_solve() {
        let m = Mat::from_int_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(m.rank(), 2);
        let b = vec![rat(6), rat(12), rat(2)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        assert!(m.solve(&[rat(1), rat(1), rat(0)]).is_none());
    }

    #[test]
    fn kernel_and_span() {
        let m = Mat::from_int_rows(&[vec![1, 1, 0], vec![0, 0, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(m.mul_vec(&k[0]), vec![rat(0), rat(0)]);
        assert!(in_span(&k, &[rat(-2), rat(2), rat(0)]));
        assert!(!in_span(&k, &[rat(1), rat(0), rat(0)]));
    }

    #[test]
    fn determinant_values() {
        let m = Mat::from_int_rows(&[vec![2, 1], vec![7, 4]]);
        assert_eq!(m.det(), rat(1));
        let s = Mat::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(s.det(), rat(0));
    }

    #[test]
    fn right_inverse_of_wide_matrix() {
        let m = Mat::from_int_rows(&[vec![1, 0, 2], vec![0, 1, 3]]);
        let x = m.right_inverse().unwrap();
        assert_eq!(m.matmul(&x), Mat::identity(2));
    }

    #[test]
    fn ratfn_reduces() {
        // (x^2 - 1)/(x - 1) = x + 1
        let x = MPoly::var(1, 0);
        let num = &x.pow(2) - &MPoly::one(1);
        let den = &x - &MPoly::one(1);
        let f = RatFn::new(num, den);
        assert_eq!(f.num, &x + &MPoly::one(1));
        assert_eq!(f.den, MPoly::one(1));
    }

    #[test]
    fn ratfn_determinant_constant() {
        // [[x, x^2], [1, x + 1]] has det x (constant along no direction),
        // [[x, x^2], [1, x]] has det 0
        let x = RatFn::from_poly(MPoly::var(1, 0));
        let one = RatFn::from_poly(MPoly::one(1));
        let xp1 = x.add(&one);
        let d = det_ratfn(vec![
            vec![x.clone(), x.mul(&x)],
            vec![one.clone(), xp1],
        ]);
        assert_eq!(d, x);
        let z = det_ratfn(vec![vec![x.clone(), x.mul(&x)], vec![one, x]]);
        assert!(z.is_zero());
    }

    #[test]
    fn dual_numbers_differentiate() {
        // d/dt (3 + t)^2 at t = 1/2 is 7
        let p = (&MPoly::constant(1, rat(3)) + &MPoly::var(1, 0)).pow(2);
        let v = eval_dual(&p, &[Dual {
            a: ratq(1, 2),
            b: rat(1),
        }]);
        assert_eq!(v.a, ratq(49, 4));
        assert_eq!(v.b, rat(7));
    }
}

//! Double-double arithmetic and the kernels the characteristic-polynomial
//! certificates run on.
//!
//! A [`Dd`] is an unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`,
//! giving roughly 32 significant digits. Products rely on `f64::mul_add`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut out = Dd::ONE;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out *= base;
            }
            base *= base;
            n >>= 1;
        }
        out
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        // Two correction steps on the f64 quotient.
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, o: Dd) {
        *self = *self + o;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, o: Dd) {
        *self = *self - o;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, o: Dd) {
        *self = *self * o;
    }
}

/// Row-major square matrix of double-double values.
#[derive(Debug, Clone)]
pub(crate) struct ExtMatrix {
    pub n: usize,
    pub data: Vec<Dd>,
}

impl ExtMatrix {
    #[cfg(test)]
    pub fn from_f64(n: usize, data: &[f64]) -> Self {
        Self {
            n,
            data: data.iter().map(|&x| Dd::from(x)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Dd::ZERO; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Dd {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Dd) {
        self.data[i * self.n + j] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = Dd::ZERO;
                for k in 0..n {
                    s += self.at(i, k) * other.at(k, j);
                }
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn trace(&self) -> Dd {
        (0..self.n).fold(Dd::ZERO, |s, i| s + self.at(i, i))
    }
}

/// In-place LU with partial pivoting; returns the sign of the permutation.
fn factor(a: &mut ExtMatrix, perm: &mut [usize]) -> Result<f64> {
    let n = a.n;
    let mut sign = 1.0;
    for k in 0..n {
        let mut p = k;
        let mut best = a.at(k, k).hi().abs();
        for i in k + 1..n {
            let v = a.at(i, k).hi().abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::Singular {
                index: k,
                pivot: best,
            });
        }
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = a.at(k, k);
        for i in k + 1..n {
            let f = a.at(i, k) / pivot;
            a.set(i, k, f);
            for j in k + 1..n {
                let v = a.at(i, j) - f * a.at(k, j);
                a.set(i, j, v);
            }
        }
    }
    Ok(sign)
}

/// Determinant of a double-double matrix. Columns are scaled by powers of
/// two, which is exact, before elimination.
pub(crate) fn det_scaled(mut a: ExtMatrix) -> Result<f64> {
    let n = a.n;
    let mut exponent = 0i32;
    for j in 0..n {
        let s = (0..n).fold(0.0f64, |m, i| m.max(a.at(i, j).hi().abs()));
        if s == 0.0 {
            return Ok(0.0);
        }
        let e = s.log2().ceil() as i32;
        exponent += e;
        let f = Dd::from(2f64.powi(-e));
        for i in 0..n {
            let v = a.at(i, j) * f;
            a.set(i, j, v);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let sign = match factor(&mut a, &mut perm) {
        Ok(s) => s,
        Err(Error::Singular { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let mut det = Dd::from(sign);
    for i in 0..n {
        det *= a.at(i, i);
    }
    // Apply the exponent in pieces so intermediate powers stay finite.
    let mut out = det.to_f64();
    let mut e = exponent;
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        out *= 2f64.powi(step);
        e -= step;
    }
    Ok(out)
}

/// Solves `A X = B` in double-double for square `A` and `B`.
pub(crate) fn solve_matrix(a: &ExtMatrix, b: &ExtMatrix) -> Result<ExtMatrix> {
    let n = a.n;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    factor(&mut lu, &mut perm)?;
    let mut x = ExtMatrix::zeros(n);
    for col in 0..n {
        let mut y: Vec<Dd> = perm.iter().map(|&p| b.at(p, col)).collect();
        for i in 0..n {
            let mut s = y[i];
            for (k, yk) in y.iter().enumerate().take(i) {
                s -= lu.at(i, k) * *yk;
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for (k, yk) in y.iter().enumerate().skip(i + 1) {
                s -= lu.at(i, k) * *yk;
            }
            y[i] = s / lu.at(i, i);
        }
        for i in 0..n {
            x.set(i, col, y[i]);
        }
    }
    Ok(x)
}

//! Eigenvalues of a real nonsymmetric matrix: balancing, reduction to upper
//! Hessenberg form by stabilized elimination, then the implicitly shifted
//! Francis double-shift QR iteration on the Hessenberg matrix.

use super::{ComplexValue, DenseMatrix};
use crate::error::{Error, Result};

/// Largest dimension accepted by [`eigenvalues`].
pub const MAX_EIGEN_DIM: usize = 64;

/// Total QR sweeps allowed per unit of dimension.
const SWEEPS_PER_DIM: usize = 60;

struct Work {
    n: usize,
    a: Vec<f64>,
}

impl Work {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }

    /// Diagonal similarity by powers of two so that row and column norms match.
    fn balance(&mut self) {
        const RADIX: f64 = 2.0;
        let sqrdx = RADIX * RADIX;
        let n = self.n;
        let mut done = false;
        while !done {
            done = true;
            for i in 0..n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 0..n {
                    if j != i {
                        c += self.at(j, i).abs();
                        r += self.at(i, j).abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        *self.at_mut(i, j) *= g;
                    }
                    for j in 0..n {
                        *self.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }

    /// Reduction to upper Hessenberg form by elimination with pivoting.
    fn hessenberg(&mut self) {
        let n = self.n;
        for m in 1..n.saturating_sub(1) {
            let mut x = 0.0f64;
            let mut piv = m;
            for j in m..n {
                if self.at(j, m - 1).abs() > x.abs() {
                    x = self.at(j, m - 1);
                    piv = j;
                }
            }
            if piv != m {
                for j in m - 1..n {
                    self.a.swap(piv * n + j, m * n + j);
                }
                for j in 0..n {
                    self.a.swap(j * n + piv, j * n + m);
                }
            }
            if x != 0.0 {
                for i in m + 1..n {
                    let mut y = self.at(i, m - 1);
                    if y != 0.0 {
                        y /= x;
                        *self.at_mut(i, m - 1) = y;
                        for j in m..n {
                            let v = self.at(m, j);
                            *self.at_mut(i, j) -= y * v;
                        }
                        for j in 0..n {
                            let v = self.at(j, i);
                            *self.at_mut(j, m) += y * v;
                        }
                    }
                }
            }
        }
        for i in 2..n {
            for j in 0..i - 1 {
                *self.at_mut(i, j) = 0.0;
            }
        }
    }

    /// Francis double-shift QR on the Hessenberg matrix; eigenvalues only.
    fn francis_qr(&mut self) -> Result<Vec<ComplexValue>> {
        let n = self.n;
        let mut wr = vec![0.0; n];
        let mut wi = vec![0.0; n];
        let anorm: f64 = (0..n)
            .flat_map(|i| (i.saturating_sub(1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.at(i, j).abs())
            .sum();
        let cap = SWEEPS_PER_DIM * n;
        let mut sweeps = 0usize;
        let mut shift_total = 0.0;
        let mut nn = n as isize - 1;
        while nn >= 0 {
            let top = nn as usize;
            let mut its = 0usize;
            loop {
                // Find a negligible subdiagonal entry.
                let mut l = top;
                while l >= 1 {
                    let mut s = self.at(l - 1, l - 1).abs() + self.at(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.at(l, l - 1).abs() + s == s {
                        *self.at_mut(l, l - 1) = 0.0;
                        break;
                    }
                    l -= 1;
                }
                let mut x = self.at(top, top);
                if l == top {
                    wr[top] = x + shift_total;
                    wi[top] = 0.0;
                    nn -= 1;
                    break;
                }
                let mut y = self.at(top - 1, top - 1);
                let mut w = self.at(top, top - 1) * self.at(top - 1, top);
                if l == top - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let z = q.abs().sqrt();
                    x += shift_total;
                    if q >= 0.0 {
                        let z = p + z.copysign(p);
                        wr[top - 1] = x + z;
                        wr[top] = if z != 0.0 { x - w / z } else { x + z };
                        wi[top - 1] = 0.0;
                        wi[top] = 0.0;
                    } else {
                        wr[top - 1] = x + p;
                        wr[top] = x + p;
                        wi[top - 1] = -z;
                        wi[top] = z;
                    }
                    nn -= 2;
                    break;
                }
                if sweeps >= cap {
                    return Err(Error::EigenNoConvergence {
                        index: top,
                        iterations: sweeps,
                    });
                }
                if its > 0 && its % 10 == 0 {
                    // Exceptional shift.
                    shift_total += x;
                    for i in 0..=top {
                        *self.at_mut(i, i) -= x;
                    }
                    let s = self.at(top, top - 1).abs() + self.at(top - 1, top - 2).abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }
                its += 1;
                sweeps += 1;

                // Look for two consecutive small subdiagonal entries.
                let mut m = top - 2;
                let (mut p, mut q, mut r);
                loop {
                    let z = self.at(m, m);
                    let rr = x - z;
                    let ss = y - z;
                    p = (rr * ss - w) / self.at(m + 1, m) + self.at(m, m + 1);
                    q = self.at(m + 1, m + 1) - z - rr - ss;
                    r = self.at(m + 2, m + 1);
                    let s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == l {
                        break;
                    }
                    let u = self.at(m, m - 1).abs() * (q.abs() + r.abs());
                    let v = p.abs()
                        * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs());
                    if u + v == v {
                        break;
                    }
                    m -= 1;
                }
                for i in m + 2..=top {
                    *self.at_mut(i, i - 2) = 0.0;
                    if i != m + 2 {
                        *self.at_mut(i, i - 3) = 0.0;
                    }
                }

                // Double-shift QR step on rows l..=top, columns m..=top.
                let mut k = m;
                while k < top {
                    if k != m {
                        p = self.at(k, k - 1);
                        q = self.at(k + 1, k - 1);
                        r = if k != top - 1 { self.at(k + 2, k - 1) } else { 0.0 };
                        x = p.abs() + q.abs() + r.abs();
                        if x != 0.0 {
                            p /= x;
                            q /= x;
                            r /= x;
                        }
                    }
                    let s = (p * p + q * q + r * r).sqrt().copysign(p);
                    if s != 0.0 {
                        if k == m {
                            if l != m {
                                *self.at_mut(k, k - 1) = -self.at(k, k - 1);
                            }
                        } else {
                            *self.at_mut(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        let z = r / s;
                        q /= p;
                        r /= p;
                        for j in k..=top {
                            let mut pp = self.at(k, j) + q * self.at(k + 1, j);
                            if k != top - 1 {
                                pp += r * self.at(k + 2, j);
                                *self.at_mut(k + 2, j) -= pp * z;
                            }
                            *self.at_mut(k + 1, j) -= pp * y;
                            *self.at_mut(k, j) -= pp * x;
                        }
                        let imax = top.min(k + 3);
                        for i in l..=imax {
                            let mut pp = x * self.at(i, k) + y * self.at(i, k + 1);
                            if k != top - 1 {
                                pp += z * self.at(i, k + 2);
                                *self.at_mut(i, k + 2) -= pp * r;
                            }
                            *self.at_mut(i, k + 1) -= pp * q;
                            *self.at_mut(i, k) -= pp;
                        }
                    }
                    k += 1;
                }
            }
        }
        Ok(wr
            .into_iter()
            .zip(wi)
            .map(|(re, im)| ComplexValue::new(re, im))
            .collect())
    }
}

/// All `n` eigenvalues of a real square matrix, with multiplicity.
///
/// Complex eigenvalues come out as exact conjugate pairs. The list is sorted
/// by real part, then imaginary part, so repeated calls are deterministic.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<ComplexValue>> {
    let n = a.dim();
    if n > MAX_EIGEN_DIM {
        return Err(Error::SizeCap {
            what: "eigenproblem dimension",
            value: n,
            cap: MAX_EIGEN_DIM,
        });
    }
    a.check_finite()?;
    let mut work = Work {
        n,
        a: a.as_slice().to_vec(),
    };
    work.balance();
    work.hessenberg();
    let mut ev = work.francis_qr()?;
    ev.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    Ok(ev)
}

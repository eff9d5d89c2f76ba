//! Complex Schur decomposition `A = Q T Q^H` with reordering.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct Schur<T: Real> {
    pub q: Matrix<Complex<T>>,
    pub t: Matrix<Complex<T>>,
}

/// Unitary 2x2 `[[c, s], [-conj(s), c]]` with `c` real, zeroing `y` in `(x, y)`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ny = y.norm();
    if ny == T::zero() {
        return (T::one(), Complex::zero());
    }
    let nx = x.norm();
    if nx == T::zero() {
        return (T::zero(), y.conj() / ny);
    }
    let norm = nx.hypot(ny);
    let c = nx / norm;
    let s = (x / nx) * y.conj() / norm;
    (c, s)
}

/// Rows `k, k+1` of `m` <- G * rows.
fn rot_rows<T: Real>(m: &mut Matrix<Complex<T>>, k: usize, c: T, s: Complex<T>, from_col: usize) {
    for j in from_col..m.cols() {
        let h1 = m[(k, j)];
        let h2 = m[(k + 1, j)];
        m[(k, j)] = h1 * c + s * h2;
        m[(k + 1, j)] = -s.conj() * h1 + h2 * c;
    }
}

/// Columns `k, k+1` of `m` <- cols * G^H.
fn rot_cols<T: Real>(m: &mut Matrix<Complex<T>>, k: usize, c: T, s: Complex<T>, to_row: usize) {
    for i in 0..to_row {
        let h1 = m[(i, k)];
        let h2 = m[(i, k + 1)];
        m[(i, k)] = h1 * c + s.conj() * h2;
        m[(i, k + 1)] = -s * h1 + h2 * c;
    }
}

fn hessenberg<T: Real>(a: &Matrix<Complex<T>>) -> (Matrix<Complex<T>>, Matrix<Complex<T>>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if alpha == T::zero() {
            continue;
        }
        let phase = if v[0].norm() == T::zero() { Complex::new(T::one(), T::zero()) } else { v[0] / v[0].norm() };
        v[0] += phase * alpha;
        let vn = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if vn == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        // H <- (I - 2 v v^H / vn) H
        for j in 0..n {
            let dot = v.iter().enumerate().fold(Complex::zero(), |acc, (i, vi)| acc + vi.conj() * h[(k + 1 + i, j)]);
            let f = dot * two / vn;
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * f;
            }
        }
        // H <- H (I - 2 v v^H / vn), Q likewise
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let dot = v.iter().enumerate().fold(Complex::zero(), |acc, (j, vj)| acc + m[(i, k + 1 + j)] * *vj);
                let f = dot * two / vn;
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= f * vj.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex::zero();
        }
    }
    (h, q)
}

impl<T: Real> Schur<T> {
    pub fn new(a: &Matrix<Complex<T>>) -> Result<Self> {
        a.ensure_square("Schur input")?;
        a.ensure_finite("Schur input")?;
        let n = a.rows();
        let (mut h, mut q) = hessenberg(a);
        if n <= 1 {
            return Ok(Schur { q, t: h });
        }
        let eps = T::epsilon();
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut total = 0usize;
        while hi > 0 {
            let mut l = hi;
            while l > 0 {
                let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
                let s = if s == T::zero() { T::one() } else { s };
                if h[(l, l - 1)].norm() <= eps * s {
                    h[(l, l - 1)] = Complex::zero();
                    break;
                }
                l -= 1;
            }
            if l == hi {
                hi -= 1;
                iter = 0;
                continue;
            }
            iter += 1;
            total += 1;
            if total > 100 * n.max(10) {
                return Err(Error::NoConvergence("Schur QR iteration".into()));
            }
            let a11 = h[(hi - 1, hi - 1)];
            let a12 = h[(hi - 1, hi)];
            let a21 = h[(hi, hi - 1)];
            let a22 = h[(hi, hi)];
            let mut mu = if iter % 11 == 10 {
                // exceptional shift
                a22 + Complex::new(a21.norm() * T::lit(0.75), a21.norm() * T::lit(0.5))
            } else {
                let half = T::lit(0.5);
                let m = (a11 + a22) * half;
                let disc = (((a11 - a22) * half) * ((a11 - a22) * half) + a12 * a21).sqrt();
                let r1 = m + disc;
                let r2 = m - disc;
                if (r1 - a22).norm() <= (r2 - a22).norm() {
                    r1
                } else {
                    r2
                }
            };
            if !(mu.re.is_finite() && mu.im.is_finite()) {
                mu = a22;
            }
            for k in l..hi {
                let (x, y) = if k == l { (h[(l, l)] - mu, h[(l + 1, l)]) } else { (h[(k, k - 1)], h[(k + 1, k - 1)]) };
                let (c, s) = givens(x, y);
                let from = if k == l { l } else { k - 1 };
                rot_rows(&mut h, k, c, s, from);
                let to = (k + 3).min(hi + 1).max(k + 2);
                rot_cols(&mut h, k, c, s, to);
                rot_cols(&mut q, k, c, s, n);
                if k > l {
                    h[(k + 1, k - 1)] = Complex::zero();
                }
            }
        }
        for i in 1..n {
            for j in 0..i {
                h[(i, j)] = Complex::zero();
            }
        }
        Ok(Schur { q, t: h })
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        (0..self.t.rows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swap diagonal entries `k` and `k+1` by a unitary similarity.
    pub fn swap(&mut self, k: usize) {
        let t11 = self.t[(k, k)];
        let t12 = self.t[(k, k + 1)];
        let t22 = self.t[(k + 1, k + 1)];
        let v0 = t12;
        let v1 = t22 - t11;
        let nv = v0.norm().hypot(v1.norm());
        if nv == T::zero() {
            return;
        }
        let (v0, v1) = (v0 / nv, v1 / nv);
        // U = [[v0, -conj(v1)], [v1, conj(v0)]]; T <- U^H T U, Q <- Q U
        let u = [[v0, -v1.conj()], [v1, v0.conj()]];
        let n = self.t.rows();
        for j in 0..n {
            let a = self.t[(k, j)];
            let b = self.t[(k + 1, j)];
            self.t[(k, j)] = u[0][0].conj() * a + u[1][0].conj() * b;
            self.t[(k + 1, j)] = u[0][1].conj() * a + u[1][1].conj() * b;
        }
        for m in [&mut self.t, &mut self.q] {
            for i in 0..n {
                let a = m[(i, k)];
                let b = m[(i, k + 1)];
                m[(i, k)] = a * u[0][0] + b * u[1][0];
                m[(i, k + 1)] = a * u[0][1] + b * u[1][1];
            }
        }
        self.t[(k + 1, k)] = Complex::zero();
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
    }

    /// Stable reordering so that diagonal positions appear sorted by `keys`
    /// (one key per diagonal position). Returns the permuted keys.
    pub fn reorder(&mut self, keys: &[usize]) -> Vec<usize> {
        let mut keys = keys.to_vec();
        let n = keys.len();
        loop {
            let mut swapped = false;
            for k in 0..n.saturating_sub(1) {
                if keys[k] > keys[k + 1] {
                    self.swap(k);
                    keys.swap(k, k + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
        keys
    }

    pub fn reconstruct(&self) -> Matrix<Complex<T>> {
        &(&self.q * &self.t) * &self.q.adjoint()
    }
}

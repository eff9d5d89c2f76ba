//! One-sided Jacobi SVD for complex matrices.

use num_complex::Complex;
use num_traits::Zero;

use crate::matrix::Matrix;
use crate::scalar::Real;

pub struct Svd<T: Real> {
    /// Left singular vectors for the nonzero singular values (`m x r`).
    pub u: Matrix<Complex<T>>,
    /// All `n` singular values, descending.
    pub sigma: Vec<T>,
    /// Right singular vectors (`n x n`, unitary).
    pub v: Matrix<Complex<T>>,
}

impl<T: Real> Svd<T> {
    pub fn new(a: &Matrix<Complex<T>>) -> Self {
        let (m, n) = a.shape();
        let mut w = a.clone();
        let mut v = Matrix::<Complex<T>>::identity(n);
        let eps = T::epsilon();
        // columns below this squared norm are noise; rotating them in the
        // subnormal range breaks the unitarity of `v`
        let fro2 = a.data().iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let negligible = (eps * eps).powi(2) * fro2;
        for _sweep in 0..60 {
            let mut rotated = false;
            for i in 0..n {
                for j in i + 1..n {
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = Complex::<T>::zero();
                    for r in 0..m {
                        let x = w[(r, i)];
                        let y = w[(r, j)];
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    let g = gamma.norm();
                    if g <= eps * (alpha * beta).sqrt() || g == T::zero() || alpha.min(beta) <= negligible {
                        continue;
                    }
                    rotated = true;
                    let big = gamma.re.abs().max(gamma.im.abs());
                    let unit = gamma / big;
                    let phase = unit / unit.norm(); // e^{i phi}
                    let zeta = (beta - alpha) / (T::lit(2.0) * g);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    // b_j = e^{-i phi} a_j, then a real rotation on (a_i, b_j)
                    let ph = phase.conj();
                    for r in 0..m {
                        let x = w[(r, i)];
                        let y = w[(r, j)] * ph;
                        w[(r, i)] = x * c - y * s;
                        w[(r, j)] = x * s + y * c;
                    }
                    for r in 0..n {
                        let x = v[(r, i)];
                        let y = v[(r, j)] * ph;
                        v[(r, i)] = x * c - y * s;
                        v[(r, j)] = x * s + y * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<T> = (0..n).map(|j| (0..m).fold(T::zero(), |acc, r| acc + w[(r, j)].norm_sqr()).sqrt()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(std::cmp::Ordering::Equal));
        let sigma: Vec<T> = order.iter().map(|&j| norms[j]).collect();
        let v = v.select_columns(&order);
        let smax = sigma.first().copied().unwrap_or_else(T::zero);
        let nonzero: Vec<usize> =
            order.iter().copied().filter(|&j| norms[j] > smax * eps * T::lit(n.max(m).max(1) as f64) && norms[j] > T::zero()).collect();
        let u = Matrix::from_fn(m, nonzero.len(), |r, k| w[(r, nonzero[k])] / norms[nonzero[k]]);
        Svd { u, sigma, v }
    }

    fn cutoff(&self, tol: f64) -> f64 {
        let smax = self.sigma.first().map_or(0.0, |s| s.to_f64().unwrap());
        tol * smax
    }

    /// Numeric rank: singular values above `tol * sigma_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let c = self.cutoff(tol);
        self.sigma.iter().filter(|s| s.to_f64().unwrap() > c && **s > T::zero()).count()
    }

    /// Right kernel basis (orthonormal columns).
    pub fn kernel(&self, tol: f64) -> Matrix<Complex<T>> {
        let r = self.rank(tol);
        let n = self.v.rows();
        self.v.submatrix(0, n, r, n)
    }

    pub fn kernel_abs(&self, cutoff: f64) -> Matrix<Complex<T>> {
        let r = self.sigma.iter().filter(|s| s.to_f64().unwrap() > cutoff).count();
        let n = self.v.rows();
        self.v.submatrix(0, n, r, n)
    }

    /// Orthonormal basis of the column space.
    pub fn range(&self, tol: f64) -> Matrix<Complex<T>> {
        let r = self.rank(tol).min(self.u.cols());
        self.u.submatrix(0, self.u.rows(), 0, r)
    }

    pub fn sigma_f64(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s.to_f64().unwrap()).collect()
    }
}

/// Orthonormal basis of the span of the columns of `a`, with relative rank
/// threshold `tol`.
pub fn orth<T: Real>(a: &Matrix<Complex<T>>, tol: f64) -> Matrix<Complex<T>> {
    if a.cols() == 0 || a.rows() == 0 {
        return Matrix::zeros(a.rows(), 0);
    }
    Svd::new(a).range(tol)
}

/// Orthonormal basis of the orthogonal complement of the column span of `q`
/// (`q` assumed orthonormal).
pub fn orth_complement<T: Real>(q: &Matrix<Complex<T>>) -> Matrix<Complex<T>> {
    let n = q.rows();
    if q.cols() == 0 {
        return Matrix::identity(n);
    }
    Svd::new(&q.adjoint()).kernel(1e-10)
}

//! Triangular Sylvester equations `A X - X B = C`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Solve `a x - x b = c` for upper triangular `a` (p x p) and `b` (q x q).
///
/// Fails when `a` and `b` share an eigenvalue to working precision.
pub fn solve_triangular<T: Real>(a: &Matrix<Complex<T>>, b: &Matrix<Complex<T>>, c: &Matrix<Complex<T>>) -> Result<Matrix<Complex<T>>> {
    let p = a.rows();
    let q = b.rows();
    let mut x = Matrix::zeros(p, q);
    for l in 0..q {
        // (a - b_ll) x_l = c_l + sum_{r<l} x_r b_rl
        let mut rhs: Vec<Complex<T>> = (0..p).map(|i| c[(i, l)]).collect();
        for r in 0..l {
            let brl = b[(r, l)];
            if brl.is_zero() {
                continue;
            }
            for (i, v) in rhs.iter_mut().enumerate() {
                *v += x[(i, r)] * brl;
            }
        }
        let shift = b[(l, l)];
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for j in i + 1..p {
                s -= a[(i, j)] * x[(j, l)];
            }
            let d = a[(i, i)] - shift;
            if d.norm() == T::zero() {
                return Err(Error::Singular("Sylvester operator has a common eigenvalue".into()));
            }
            x[(i, l)] = s / d;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ComplexMatrix;

    #[test]
    fn solves_small_system() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 3.0]]);
        let b = ComplexMatrix::from_real_rows(&[&[-1.0, 0.5], &[0.0, 5.0]]);
        let c = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[2.0, -1.0]]);
        let x = solve_triangular(&a, &b, &c).unwrap();
        let r = &(&a * &x) - &(&x * &b);
        assert!(r.dist(&c) < 1e-14);
    }
}

//! Gaussian elimination over any [`Field`].
//!
//! Tolerances are relative to the largest entry of the input; exact fields
//! ignore them.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Field;

pub struct Rref<S> {
    pub matrix: Matrix<S>,
    pub pivots: Vec<usize>,
}

fn threshold<S: Field>(m: &Matrix<S>, tol: f64) -> f64 {
    if S::EXACT {
        0.0
    } else {
        tol * m.max_abs().max(f64::MIN_POSITIVE)
    }
}

fn pick_pivot<S: Field>(a: &Matrix<S>, col: usize, from: usize, thr: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for r in from..a.rows() {
        let x = &a[(r, col)];
        if x.is_negligible(thr) {
            continue;
        }
        let w = x.magnitude();
        if S::EXACT {
            // any nonzero works; keep the first to limit coefficient growth
            return Some(r);
        }
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((r, w));
        }
    }
    best.map(|(r, _)| r)
}

fn swap_rows<S: Field>(a: &mut Matrix<S>, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..a.cols() {
        let t = a[(i, c)].clone();
        a[(i, c)] = a[(j, c)].clone();
        a[(j, c)] = t;
    }
}

/// Reduced row echelon form.
pub fn rref<S: Field>(m: &Matrix<S>, tol: f64) -> Rref<S> {
    let thr = threshold(m, tol);
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols() {
        if row == a.rows() {
            break;
        }
        let Some(p) = pick_pivot(&a, col, row, thr) else {
            for r in row..a.rows() {
                a[(r, col)] = S::zero();
            }
            continue;
        };
        swap_rows(&mut a, row, p);
        let inv = S::one() / a[(row, col)].clone();
        for c in col..a.cols() {
            a[(row, c)] = a[(row, c)].clone() * inv.clone();
        }
        for r in 0..a.rows() {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for c in col..a.cols() {
                let v = a[(row, c)].clone() * f.clone();
                a[(r, c)] = a[(r, c)].clone() - v;
            }
        }
        pivots.push(col);
        row += 1;
    }
    Rref { matrix: a, pivots }
}

/// Right kernel basis (columns) read off the reduced echelon form.
pub fn kernel<S: Field>(m: &Matrix<S>, tol: f64) -> Matrix<S> {
    let Rref { matrix: r, pivots } = rref(m, tol);
    let n = m.cols();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut cols = Vec::with_capacity(free.len());
    for &f in &free {
        let mut v = vec![S::zero(); n];
        v[f] = S::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r[(i, f)].clone();
        }
        cols.push(v);
    }
    Matrix::from_columns(n, &cols)
}

/// Solve `a x = b` for square nonsingular `a` (partial pivoting).
pub fn solve<S: Field>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    a.ensure_square("solve: coefficient matrix")?;
    if b.rows() != a.rows() {
        return Err(Error::Shape(format!("solve: rhs has {} rows, expected {}", b.rows(), a.rows())));
    }
    let n = a.rows();
    let thr = if S::EXACT { 0.0 } else { 1e-14 * a.max_abs() * n.max(1) as f64 };
    let mut aug = a.hstack(b);
    for col in 0..n {
        let Some(p) = pick_pivot(&aug, col, col, thr) else {
            return Err(Error::Singular(format!("pivot {col} of {n} vanished")));
        };
        swap_rows(&mut aug, col, p);
        let inv = S::one() / aug[(col, col)].clone();
        for c in col..aug.cols() {
            aug[(col, c)] = aug[(col, c)].clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || aug[(r, col)].is_zero() {
                continue;
            }
            let f = aug[(r, col)].clone();
            for c in col..aug.cols() {
                let v = aug[(col, c)].clone() * f.clone();
                aug[(r, c)] = aug[(r, c)].clone() - v;
            }
        }
    }
    Ok(aug.submatrix(0, n, n, aug.cols()))
}

pub fn inverse<S: Field>(a: &Matrix<S>) -> Result<Matrix<S>> {
    solve(a, &Matrix::identity(a.rows()))
}

pub fn det<S: Field>(a: &Matrix<S>) -> Result<S> {
    a.ensure_square("det")?;
    let n = a.rows();
    let mut m = a.clone();
    let mut d = S::one();
    for col in 0..n {
        let Some(p) = pick_pivot(&m, col, col, 0.0) else {
            return Ok(S::zero());
        };
        if p != col {
            swap_rows(&mut m, col, p);
            d = -d;
        }
        let piv = m[(col, col)].clone();
        d = d * piv.clone();
        for r in col + 1..n {
            if m[(r, col)].is_zero() {
                continue;
            }
            let f = m[(r, col)].clone() / piv.clone();
            for c in col..n {
                let v = m[(col, c)].clone() * f.clone();
                m[(r, c)] = m[(r, c)].clone() - v;
            }
        }
    }
    Ok(d)
}

/// Columns of `basis` completed to a basis of the ambient space by standard
/// vectors (exact fields only need this; numeric callers use orthonormal
/// completion). Returns the indices of the standard vectors added.
pub fn complete_with_standard<S: Field>(basis: &Matrix<S>, tol: f64) -> Vec<usize> {
    let n = basis.rows();
    let mut current = basis.clone();
    let mut rank = S::rank(&current, tol);
    let mut added = Vec::new();
    for i in 0..n {
        if rank == n {
            break;
        }
        let e = Matrix::from_fn(n, 1, |r, _| if r == i { S::one() } else { S::zero() });
        let trial = current.hstack(&e);
        let r = S::rank(&trial, tol);
        if r > rank {
            current = trial;
            rank = r;
            added.push(i);
        }
    }
    added
}

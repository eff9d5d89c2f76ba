//! Fiber-level pre-D-modules `(R, thetaF, t, s)` with `st = R`, `ts = thetaF`,
//! and their reduced modules `(R, thetaF, u = vec(s) vec(t)^T)`.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{elim, svd::Svd};
use crate::matrix::Matrix;
use crate::quiver::{self, QuiverRep};
use crate::report::Report;
use crate::scalar::Real;
use crate::CMatrix;

/// `E|S = C^n`, `F = C^m`; `t: E|S -> F`, `s: F -> E|S`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalModel<T: Real = f64> {
    /// `n x n`
    pub r: CMatrix<T>,
    /// `m x m`
    pub theta_f: CMatrix<T>,
    /// `m x n`
    pub t: CMatrix<T>,
    /// `n x m`
    pub s: CMatrix<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalKind {
    /// `F = E|S`, `t = R`, `s = 1`
    Meromorphic,
    /// `F = E|S`, `t = 1`, `s = R`
    Torsion,
    /// `F = im R`
    Minimal,
}

impl<T: Real> LocalModel<T> {
    /// Unchecked constructor.
    pub fn from_parts(r: CMatrix<T>, theta_f: CMatrix<T>, t: CMatrix<T>, s: CMatrix<T>) -> Self {
        LocalModel { r, theta_f, t, s }
    }

    pub fn new(r: CMatrix<T>, theta_f: CMatrix<T>, t: CMatrix<T>, s: CMatrix<T>) -> Result<Self> {
        let m = LocalModel { r, theta_f, t, s };
        m.check_shapes()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.r.rows()
    }

    pub fn m(&self) -> usize {
        self.theta_f.rows()
    }

    pub fn zero(n: usize, m: usize) -> Self {
        LocalModel { r: Matrix::zeros(n, n), theta_f: Matrix::zeros(m, m), t: Matrix::zeros(m, n), s: Matrix::zeros(n, m) }
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        self.r.ensure_shape(n, n, "R")?;
        self.theta_f.ensure_shape(m, m, "thetaF")?;
        self.t.ensure_shape(m, n, "t")?;
        self.s.ensure_shape(n, m, "s")?;
        for (x, name) in [(&self.r, "R"), (&self.theta_f, "thetaF"), (&self.t, "t"), (&self.s, "s")] {
            x.ensure_finite(name)?;
        }
        Ok(())
    }

    /// Residuals of `st = R`, `ts = thetaF` and the derived intertwinings.
    /// Each residual is compared with `tol * max(1, scale)`.
    pub fn validate(&self, tol: f64) -> Result<Report> {
        self.check_shapes()?;
        let st = &self.s * &self.t;
        let ts = &self.t * &self.s;
        let mut rep = Report::new(tol);
        let scale = self.r.max_abs().max(self.theta_f.max_abs()).max(self.s.max_abs() * self.t.max_abs());
        rep.push("st-R", (&st - &self.r).max_abs(), scale);
        rep.push("ts-thetaF", (&ts - &self.theta_f).max_abs(), scale);
        let inter = scale * self.t.max_abs().max(self.s.max_abs()).max(1.0);
        rep.push("tR-thetaF.t", (&(&self.t * &self.r) - &(&self.theta_f * &self.t)).max_abs(), inter);
        rep.push("s.thetaF-Rs", (&(&self.s * &self.theta_f) - &(&self.r * &self.s)).max_abs(), inter);
        Ok(rep)
    }

    pub fn canonical_from_residue(r: &CMatrix<T>, kind: CanonicalKind, tol: f64) -> Result<(Self, Vec<String>)> {
        r.ensure_square("R")?;
        r.ensure_finite("R")?;
        let n = r.rows();
        let id = Matrix::identity(n);
        Ok(match kind {
            CanonicalKind::Meromorphic => (LocalModel { r: r.clone(), theta_f: r.clone(), t: r.clone(), s: id }, vec![]),
            CanonicalKind::Torsion => (LocalModel { r: r.clone(), theta_f: r.clone(), t: id, s: r.clone() }, vec![]),
            CanonicalKind::Minimal => {
                let mut warnings = Vec::new();
                let svd = Svd::new(r);
                let sig = svd.sigma_f64();
                let smax = sig.first().copied().unwrap_or(0.0);
                for &x in &sig {
                    if smax > 0.0 && x > 0.1 * tol * smax && x <= 10.0 * tol * smax {
                        warnings.push(format!("rank decision near tolerance: singular value {x:e} against {smax:e}"));
                    }
                }
                let q = phase_normalized(&svd.range(tol));
                let t = &q.adjoint() * r;
                let theta_f = &t * &q;
                (LocalModel { r: r.clone(), theta_f, t, s: q }, warnings)
            }
        })
    }

    /// Conjugate by `(g_E, g_F)`: `R -> g_E R g_E^{-1}`, `t -> g_F t g_E^{-1}`, ...
    pub fn conjugate(&self, g_e: &CMatrix<T>, g_f: &CMatrix<T>) -> Result<Self> {
        let ge_inv = elim::inverse(g_e)?;
        let gf_inv = elim::inverse(g_f)?;
        Ok(LocalModel {
            r: &(g_e * &self.r) * &ge_inv,
            theta_f: &(g_f * &self.theta_f) * &gf_inv,
            t: &(g_f * &self.t) * &ge_inv,
            s: &(g_e * &self.s) * &gf_inv,
        })
    }

    /// `(s, t) -> (lambda s, t / lambda)`.
    pub fn scaled(&self, lambda: Complex<T>) -> Self {
        LocalModel {
            r: self.r.clone(),
            theta_f: self.theta_f.clone(),
            t: self.t.scale(&(Complex::<T>::one() / lambda)),
            s: self.s.scale(&lambda),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        LocalModel {
            r: self.r.direct_sum(&other.r),
            theta_f: self.theta_f.direct_sum(&other.theta_f),
            t: self.t.direct_sum(&other.t),
            s: self.s.direct_sum(&other.s),
        }
    }

    /// Vertices `E = 0`, `F = 1`; arrows `R, thetaF, t, s`.
    pub fn as_quiver(&self) -> QuiverRep<Complex<T>> {
        QuiverRep::new(vec![self.n(), self.m()])
            .arrow(0, 0, self.r.clone())
            .arrow(1, 1, self.theta_f.clone())
            .arrow(0, 1, self.t.clone())
            .arrow(1, 0, self.s.clone())
    }

    pub fn reduce(&self) -> ReducedModule<T> {
        ReducedModule { r: self.r.clone(), theta_f: self.theta_f.clone(), u: outer(&self.s, &self.t), n: self.n(), m: self.m() }
    }
}

/// Scales each column so that its first significant entry is real positive.
fn phase_normalized<T: Real>(q: &CMatrix<T>) -> CMatrix<T> {
    let mut out = q.clone();
    for j in 0..q.cols() {
        let col = q.column(j);
        let big = col.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if let Some(z) = col.iter().find(|z| z.norm() > big * T::lit(1e-8)) {
            let ph = z.conj() / z.norm();
            for i in 0..q.rows() {
                out[(i, j)] = q[(i, j)] * ph;
            }
        }
    }
    out
}

/// `vec(s) vec(t)^T` with row-major `vec`.
fn outer<T: Real>(s: &CMatrix<T>, t: &CMatrix<T>) -> CMatrix<T> {
    let vs = s.vec_rows();
    let vt = t.vec_rows();
    Matrix::from_fn(vs.len(), vt.len(), |i, j| vs[i] * vt[j])
}

/// Isomorphism `(g_E, g_F)` between two models, if one is found.
pub fn isomorphic<T: Real>(a: &LocalModel<T>, b: &LocalModel<T>, tol: f64, rng: &mut impl Rng) -> Result<Option<(CMatrix<T>, CMatrix<T>)>> {
    if a.n() != b.n() || a.m() != b.m() {
        return Err(Error::Shape(format!("models of sizes ({}, {}) and ({}, {})", a.n(), a.m(), b.n(), b.m())));
    }
    Ok(quiver::find_isomorphism(&a.as_quiver(), &b.as_quiver(), tol, 32, rng).map(|mut g| {
        let gf = g.pop().unwrap();
        let ge = g.pop().unwrap();
        (ge, gf)
    }))
}

/// `(R, thetaF, u)` with `u = vec(s) vec(t)^T` decomposable.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModule<T: Real = f64> {
    pub r: CMatrix<T>,
    pub theta_f: CMatrix<T>,
    /// `(n m) x (m n)`
    pub u: CMatrix<T>,
    pub n: usize,
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Factors<T: Real = f64> {
    Pair {
        s: CMatrix<T>,
        t: CMatrix<T>,
    },
    /// `u = 0`: the factors cannot be recovered.
    Zero,
}

impl<T: Real> ReducedModule<T> {
    /// `sum_k s_ik t_kj`, i.e. `st`.
    pub fn mu0(&self) -> CMatrix<T> {
        let (n, m) = (self.n, self.m);
        Matrix::from_fn(n, n, |i, j| (0..m).fold(Complex::zero(), |acc, k| acc + self.u[(i * m + k, k * n + j)]))
    }

    /// `sum_i t_ki s_il`, i.e. `ts`.
    pub fn mu1(&self) -> CMatrix<T> {
        let (n, m) = (self.n, self.m);
        Matrix::from_fn(m, m, |k, l| (0..n).fold(Complex::zero(), |acc, i| acc + self.u[(i * m + l, k * n + i)]))
    }

    /// Largest absolute 2x2 minor of `u`.
    pub fn max_minor(&self) -> f64 {
        let u = &self.u;
        let mut best = 0.0f64;
        for i in 0..u.rows() {
            for k in i + 1..u.rows() {
                for j in 0..u.cols() {
                    for l in j + 1..u.cols() {
                        let d = u[(i, j)] * u[(k, l)] - u[(i, l)] * u[(k, j)];
                        best = best.max(num_traits::ToPrimitive::to_f64(&d.norm()).unwrap());
                    }
                }
            }
        }
        best
    }

    /// Residuals of the decomposability and contraction relations.
    pub fn validate(&self, tol: f64) -> Report {
        let mut rep = Report::new(tol);
        let scale = self.u.max_abs();
        rep.push("minors", self.max_minor(), scale * scale);
        let sc = scale.max(self.r.max_abs());
        rep.push("mu0-R", (&self.mu0() - &self.r).max_abs(), sc);
        rep.push("mu1-thetaF", (&self.mu1() - &self.theta_f).max_abs(), sc.max(self.theta_f.max_abs()));
        rep
    }

    /// Rank-one factorization with the first significant entry of `vec(t)`
    /// normalized to 1.
    pub fn factor(&self, tol: f64) -> Result<Factors<T>> {
        let scale = self.u.max_abs();
        if scale <= tol {
            return Ok(Factors::Zero);
        }
        let minor = self.max_minor();
        if minor > tol * scale * scale {
            return Err(Error::NotDecomposable(minor));
        }
        let svd = Svd::new(&self.u);
        let sigma = svd.sigma[0];
        let (n, m) = (self.n, self.m);
        let u1: Vec<Complex<T>> = (0..n * m).map(|i| svd.u[(i, 0)] * sigma).collect();
        let v1: Vec<Complex<T>> = (0..m * n).map(|j| svd.v[(j, 0)].conj()).collect();
        let big = v1.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let pivot = *v1.iter().find(|z| z.norm() > big * T::lit(1e-8)).expect("nonzero singular vector");
        let s = Matrix::from_fn(n, m, |i, k| u1[i * m + k] * pivot);
        let t = Matrix::from_fn(m, n, |k, j| v1[k * n + j] / pivot);
        Ok(Factors::Pair { s, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ComplexMatrix;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn half_model() -> LocalModel {
        LocalModel::new(
            ComplexMatrix::real_diag(&[0.5]),
            ComplexMatrix::real_diag(&[0.5]),
            ComplexMatrix::real_diag(&[1.0]),
            ComplexMatrix::real_diag(&[0.5]),
        )
        .unwrap()
    }

    fn block_model() -> LocalModel {
        LocalModel::new(
            ComplexMatrix::real_diag(&[0.0, 1.0]),
            ComplexMatrix::real_diag(&[1.0]),
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0]]),
            ComplexMatrix::from_real_rows(&[&[0.0], &[1.0]]),
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(half_model().validate(1e-9).unwrap().ok);
        assert!(block_model().validate(1e-9).unwrap().ok);
        let bad = LocalModel::new(
            ComplexMatrix::real_diag(&[1.0]),
            ComplexMatrix::real_diag(&[0.0]),
            ComplexMatrix::real_diag(&[1.0]),
            ComplexMatrix::real_diag(&[1.0]),
        )
        .unwrap();
        let rep = bad.validate(1e-9).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.get("ts-thetaF"), Some(1.0));
    }

    #[test]
    fn shape_errors() {
        let r =
            LocalModel::new(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(1, 1), ComplexMatrix::zeros(2, 1), ComplexMatrix::zeros(2, 1));
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn canonical_examples() {
        let (m, _) = LocalModel::canonical_from_residue(&ComplexMatrix::real_diag(&[0.0]), CanonicalKind::Meromorphic, 1e-9).unwrap();
        assert_eq!(m.t[(0, 0)], c(0.0));
        assert_eq!(m.s[(0, 0)], c(1.0));
        assert_eq!(m.theta_f[(0, 0)], c(0.0));
        let (m, _) = LocalModel::canonical_from_residue(&ComplexMatrix::real_diag(&[2.0]), CanonicalKind::Torsion, 1e-9).unwrap();
        assert_eq!((m.t[(0, 0)], m.s[(0, 0)], m.theta_f[(0, 0)]), (c(1.0), c(2.0), c(2.0)));
        let (m, w) = LocalModel::canonical_from_residue(&ComplexMatrix::real_diag(&[0.0, 3.0]), CanonicalKind::Minimal, 1e-9).unwrap();
        assert!(w.is_empty());
        assert_eq!(m.m(), 1);
        assert!((m.theta_f[(0, 0)] - c(3.0)).norm() < 1e-14);
        assert!(m.t.dist(&ComplexMatrix::from_real_rows(&[&[0.0, 3.0]])) < 1e-14);
        assert!(m.s.dist(&ComplexMatrix::from_real_rows(&[&[0.0], &[1.0]])) < 1e-14);
        assert!(m.validate(1e-9).unwrap().ok);
    }

    #[test]
    fn reduce_and_factor() {
        let red = half_model().reduce();
        assert_eq!(red.u, ComplexMatrix::real_diag(&[0.5]));
        assert_eq!(red.mu0(), ComplexMatrix::real_diag(&[0.5]));
        match red.factor(1e-9).unwrap() {
            Factors::Pair { s, t } => assert!((&s * &t).dist(&ComplexMatrix::real_diag(&[0.5])) < 1e-15),
            Factors::Zero => panic!(),
        }
        let red = block_model().reduce();
        assert_eq!(red.u.shape(), (2, 2));
        assert_eq!(red.max_minor(), 0.0);
        assert!(red.validate(1e-12).ok);
        assert_eq!(LocalModel::<f64>::zero(1, 1).reduce().factor(1e-9).unwrap(), Factors::Zero);
        let bad =
            ReducedModule { r: ComplexMatrix::zeros(1, 1), theta_f: ComplexMatrix::zeros(2, 2), u: ComplexMatrix::identity(2), n: 1, m: 2 };
        assert!(matches!(bad.factor(1e-9), Err(Error::NotDecomposable(_))));
    }

    #[test]
    fn isomorphism_examples() {
        let mut rng = crate::random::rng(7);
        let m = block_model();
        let (ge, gf) = isomorphic(&m, &m, 1e-9, &mut rng).unwrap().unwrap();
        assert!((&ge * &m.r).dist(&(&m.r * &ge)) < 1e-12);
        assert!((&gf * &m.t).dist(&(&m.t * &ge)) < 1e-12);
        let zero = ComplexMatrix::real_diag(&[0.0]);
        let (a, _) = LocalModel::canonical_from_residue(&zero, CanonicalKind::Meromorphic, 1e-9).unwrap();
        let (b, _) = LocalModel::canonical_from_residue(&zero, CanonicalKind::Torsion, 1e-9).unwrap();
        assert!(isomorphic(&a, &b, 1e-9, &mut rng).unwrap().is_none());
    }
}

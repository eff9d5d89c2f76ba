//! Local Riemann-Hilbert map `(R, thetaF, t, s) -> (T_E, T_F, C, V)`, its
//! inverse on a chosen logarithm section, and the rigidity differential.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{elim, svd::Svd};
use crate::localmodel::LocalModel;
use crate::matfun::{apply_entire, branch_log, BranchSection, EntireFn};
use crate::matrix::Matrix;
use crate::quiver::{self, QuiverRep};
use crate::report::Report;
use crate::scalar::Real;
use crate::CMatrix;

/// Monodromies and gluing maps with `VC = T_E - 1`, `CV = T_F - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalRhData<T: Real = f64> {
    /// `n x n`
    pub t_e: CMatrix<T>,
    /// `m x m`
    pub t_f: CMatrix<T>,
    /// `m x n`
    pub c: CMatrix<T>,
    /// `n x m`
    pub v: CMatrix<T>,
}

impl<T: Real> LocalRhData<T> {
    pub fn n(&self) -> usize {
        self.t_e.rows()
    }

    pub fn m(&self) -> usize {
        self.t_f.rows()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        self.t_e.ensure_shape(n, n, "T_E")?;
        self.t_f.ensure_shape(m, m, "T_F")?;
        self.c.ensure_shape(m, n, "C")?;
        self.v.ensure_shape(n, m, "V")?;
        for (x, name) in [(&self.t_e, "T_E"), (&self.t_f, "T_F"), (&self.c, "C"), (&self.v, "V")] {
            x.ensure_finite(name)?;
        }
        Ok(())
    }

    pub fn validate(&self, tol: f64) -> Result<Report> {
        self.check_shapes()?;
        let mut rep = Report::new(tol);
        let ie = Matrix::identity(self.n());
        let if_ = Matrix::identity(self.m());
        let scale = self.t_e.max_abs().max(self.t_f.max_abs()).max(self.c.max_abs() * self.v.max_abs());
        rep.push("VC-(T_E-1)", (&(&self.v * &self.c) - &(&self.t_e - &ie)).max_abs(), scale);
        rep.push("CV-(T_F-1)", (&(&self.c * &self.v) - &(&self.t_f - &if_)).max_abs(), scale);
        Ok(rep)
    }

    /// Vertices `E = 0`, `F = 1`; arrows `T_E, T_F, C, V`.
    pub fn as_quiver(&self) -> QuiverRep<Complex<T>> {
        QuiverRep::new(vec![self.n(), self.m()])
            .arrow(0, 0, self.t_e.clone())
            .arrow(1, 1, self.t_f.clone())
            .arrow(0, 1, self.c.clone())
            .arrow(1, 0, self.v.clone())
    }

    pub fn conjugate(&self, g_e: &CMatrix<T>, g_f: &CMatrix<T>) -> Result<Self> {
        let ge_inv = elim::inverse(g_e)?;
        let gf_inv = elim::inverse(g_f)?;
        Ok(LocalRhData {
            t_e: &(g_e * &self.t_e) * &ge_inv,
            t_f: &(g_f * &self.t_f) * &gf_inv,
            c: &(g_f * &self.c) * &ge_inv,
            v: &(g_e * &self.v) * &gf_inv,
        })
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        LocalRhData {
            t_e: self.t_e.direct_sum(&other.t_e),
            t_f: self.t_f.direct_sum(&other.t_f),
            c: self.c.direct_sum(&other.c),
            v: self.v.direct_sum(&other.v),
        }
    }
}

pub fn isomorphic_data<T: Real>(a: &LocalRhData<T>, b: &LocalRhData<T>, tol: f64, rng: &mut impl Rng) -> Option<(CMatrix<T>, CMatrix<T>)> {
    quiver::find_isomorphism(&a.as_quiver(), &b.as_quiver(), tol, 32, rng).map(|mut g| {
        let gf = g.pop().unwrap();
        (g.pop().unwrap(), gf)
    })
}

fn ensure_valid<T: Real>(model: &LocalModel<T>, tol: f64) -> Result<()> {
    let rep = model.validate(tol)?;
    if !rep.ok {
        let worst = rep.residuals.iter().max_by(|a, b| (a.value / a.scale).total_cmp(&(b.value / b.scale))).unwrap();
        return Err(Error::Residual { what: format!("model relation {}", worst.name), residual: worst.value, tol });
    }
    Ok(())
}

/// `T_E = e(R)`, `T_F = e(thetaF)`, `C = t phi(R)`, `V = s` with
/// `e(z) = exp(-2 pi i z)` and `phi(z) = (e(z) - 1)/z`.
pub fn rh_local<T: Real>(model: &LocalModel<T>, tol: f64) -> Result<LocalRhData<T>> {
    ensure_valid(model, tol)?;
    Ok(LocalRhData {
        t_e: apply_entire(&model.r, EntireFn::Expm2pi)?,
        t_f: apply_entire(&model.theta_f, EntireFn::Expm2pi)?,
        c: &model.t * &apply_entire(&model.r, EntireFn::PhiM2pi)?,
        v: model.s.clone(),
    })
}

/// Inverse map on the section: `R = log(T_E)`, `t = C phi(R)^{-1}`, `s = V`,
/// `thetaF = ts`. Fails if `e(thetaF)` disagrees with `T_F`.
pub fn inv_rh_local<T: Real>(data: &LocalRhData<T>, section: &BranchSection, tol: f64) -> Result<LocalModel<T>> {
    if !section.fixes_one() {
        return Err(Error::Invalid(format!("section anchored at {} contains a nonzero integer", section.anchor)));
    }
    let rep = data.validate(tol)?;
    if !rep.ok {
        return Err(Error::Residual { what: "gluing relations".into(), residual: rep.worst(), tol });
    }
    let r = branch_log(&data.t_e, section, tol)?;
    let phi = apply_entire(&r, EntireFn::PhiM2pi)?;
    // t phi = C  <=>  phi^T t^T = C^T
    let t = elim::solve(&phi.transpose(), &data.c.transpose()).map_err(|_| Error::Singular("phi(R) on the section".into()))?.transpose();
    let s = data.v.clone();
    let theta_f = &t * &s;
    let tf = apply_entire(&theta_f, EntireFn::Expm2pi)?;
    let defect = (&tf - &data.t_f).max_abs();
    let scale = data.t_f.max_abs().max(1.0);
    if defect > tol * scale {
        return Err(Error::Residual { what: "e(thetaF) against T_F".into(), residual: defect, tol });
    }
    Ok(LocalModel::from_parts(r, theta_f, t, s))
}

/// Image of a tangent vector under `(s, t) -> (s, t phi_plain(st))` and
/// injectivity of that differential on the tangent space.
#[derive(Clone, Debug)]
pub struct Rigidity<T: Real = f64> {
    /// `(a, b phi_plain(st))`
    pub image: (CMatrix<T>, CMatrix<T>),
    pub injective: bool,
    pub tangent_dim: usize,
    /// Smallest singular value of the differential on the tangent space.
    pub min_singular: f64,
}

/// Linear map `(a, b) -> (at + sb, ta + bs)` as a matrix on
/// `(vec a, vec b)` (row-major vecs).
fn tangency_matrix<T: Real>(model: &LocalModel<T>) -> CMatrix<T> {
    let (n, m) = (model.n(), model.m());
    let (s, t) = (&model.s, &model.t);
    let na = n * m;
    let mut out = Matrix::zeros(n * n + m * m, 2 * n * m);
    // (at + sb)_{ij} = a_ik t_kj + s_ik b_kj
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..m {
                out[(row, i * m + k)] += t[(k, j)];
                out[(row, na + k * n + j)] += s[(i, k)];
            }
        }
    }
    // (ta + bs)_{kl} = t_ki a_il + b_ki s_il
    for k in 0..m {
        for l in 0..m {
            let row = n * n + k * m + l;
            for i in 0..n {
                out[(row, i * m + l)] += t[(k, i)];
                out[(row, na + k * n + i)] += s[(i, l)];
            }
        }
    }
    out
}

/// Orthonormal basis (columns of `(vec a, vec b)`) of the tangent space.
pub fn tangent_basis<T: Real>(model: &LocalModel<T>) -> CMatrix<T> {
    let a = tangency_matrix(model);
    if a.rows() == 0 {
        return Matrix::identity(a.cols());
    }
    Svd::new(&a).kernel(1e-10)
}

pub fn unpack_tangent<T: Real>(model: &LocalModel<T>, v: &[Complex<T>]) -> (CMatrix<T>, CMatrix<T>) {
    let (n, m) = (model.n(), model.m());
    let a = Matrix::from_fn(n, m, |i, k| v[i * m + k]);
    let b = Matrix::from_fn(m, n, |k, j| v[n * m + k * n + j]);
    (a, b)
}

pub fn rigidity_differential<T: Real>(model: &LocalModel<T>, a: &CMatrix<T>, b: &CMatrix<T>, tol: f64) -> Result<Rigidity<T>> {
    let (n, m) = (model.n(), model.m());
    a.ensure_shape(n, m, "tangent a")?;
    b.ensure_shape(m, n, "tangent b")?;
    let scale = (a.max_abs().max(b.max_abs())) * model.s.max_abs().max(model.t.max_abs()).max(1.0);
    let defect = (&(a * &model.t) + &(&model.s * b)).max_abs().max((&(&model.t * a) + &(b * &model.s)).max_abs());
    if defect > tol * scale.max(1.0) {
        return Err(Error::Residual { what: "tangency of (a, b)".into(), residual: defect, tol });
    }
    let f = apply_entire(&model.r, EntireFn::PhiPlain)?;
    let image = (a.clone(), b * &f);

    let basis = tangent_basis(model);
    let k = basis.cols();
    let mut img = Matrix::zeros(2 * n * m, k);
    for j in 0..k {
        let (ta, tb) = unpack_tangent(model, &basis.column(j));
        let tbf = &tb * &f;
        for (i, z) in ta.vec_rows().into_iter().chain(tbf.vec_rows()).enumerate() {
            img[(i, j)] = z;
        }
    }
    let (injective, min_singular) = if k == 0 {
        (true, f64::INFINITY)
    } else {
        let sig = Svd::new(&img).sigma_f64();
        let smin = sig[k - 1];
        (smin > 1e-7, smin)
    };
    Ok(Rigidity { image, injective, tangent_dim: k, min_singular })
}

/// The map `(s, t) -> (s, t phi_plain(st))`.
pub fn rigidity_map<T: Real>(s: &CMatrix<T>, t: &CMatrix<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let f = apply_entire(&(s * t), EntireFn::PhiPlain)?;
    Ok((s.clone(), t * &f))
}

//! Eigenvalue shearing: move one generalized eigenvalue of `R` (and of
//! `thetaF`) by an integer while keeping the monodromy, and repair resonant
//! residues.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::elim;
use crate::localmodel::LocalModel;
use crate::matfun::{apply_entire, resonance_report, scaled_tol, spectral_split, EntireFn, SpectralCluster};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Down,
    Up,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearMove {
    pub direction: Direction,
    /// `[re, im]` of the moved eigenvalue.
    pub alpha: [f64; 2],
    pub multiplicity: usize,
    /// Algebraic multiplicity of 0 in `R` after the move.
    pub zero_multiplicity: usize,
}

struct Blocks<T: Real> {
    p: CMatrix<T>,
    q: CMatrix<T>,
    multiplicity: usize,
}

fn cluster_radius<T: Real>(a: &CMatrix<T>, tol: f64) -> f64 {
    (10.0 * scaled_tol(a, tol)).max(tol.sqrt() * a.norm1().max(1.0))
}

fn projector_at<T: Real>(a: &CMatrix<T>, alpha: Complex<T>, tol: f64) -> Result<Option<SpectralCluster<T>>> {
    if a.rows() == 0 {
        return Ok(None);
    }
    let split = spectral_split(a, tol)?;
    Ok(split.find(alpha, cluster_radius(a, tol)).cloned())
}

fn blocks<T: Real>(model: &LocalModel<T>, alpha: Complex<T>, tol: f64) -> Result<Blocks<T>> {
    let alpha_abs = alpha.norm().to_f64().unwrap();
    if alpha_abs <= scaled_tol(&model.r, tol) {
        return Err(Error::Invalid("shearing needs a nonzero eigenvalue".into()));
    }
    let cr = projector_at(&model.r, alpha, tol)?.ok_or_else(|| Error::Invalid(format!("{} is not an eigenvalue of R", fmt(alpha))))?;
    let (n, m) = (model.n(), model.m());
    let q = match projector_at(&model.theta_f, alpha, tol)? {
        Some(c) => {
            if c.multiplicity != cr.multiplicity {
                return Err(Error::Invalid(format!(
                    "multiplicity of {} differs between R ({}) and thetaF ({})",
                    fmt(alpha),
                    cr.multiplicity,
                    c.multiplicity
                )));
            }
            c.projector
        }
        None => return Err(Error::Invalid(format!("{} is an eigenvalue of R but not of thetaF", fmt(alpha)))),
    };
    let p = cr.projector;
    // t P = Q t and s Q = P s
    let scale = model.t.max_abs().max(model.s.max_abs()).max(1.0) * p.max_abs().max(q.max_abs());
    let d1 = (&(&model.t * &p) - &(&q * &model.t)).max_abs();
    let d2 = (&(&model.s * &q) - &(&p * &model.s)).max_abs();
    let lim = 1e3 * tol * scale.max(1.0) * (n + m) as f64;
    if d1.max(d2) > lim {
        return Err(Error::Residual { what: "projector intertwining".into(), residual: d1.max(d2), tol });
    }
    Ok(Blocks { p, q, multiplicity: cr.multiplicity })
}

/// `thetaF^{-1}` on the image of `Q`, extended by zero: `(theta Q + 1 - Q)^{-1} Q`.
fn block_inverse<T: Real>(theta: &CMatrix<T>, q: &CMatrix<T>) -> Result<CMatrix<T>> {
    let m = theta.rows();
    let id = Matrix::identity(m);
    let a = &(&(theta * q) + &id) - q;
    elim::solve(&a, q).map_err(|_| Error::Singular("thetaF on the shifted block".into()))
}

fn check_monodromy<T: Real>(before: &LocalModel<T>, after: &LocalModel<T>, tol: f64) -> Result<()> {
    for (x, y, what) in [(&before.r, &after.r, "R"), (&before.theta_f, &after.theta_f, "thetaF")] {
        let ex = apply_entire(x, EntireFn::Expm2pi)?;
        let ey = apply_entire(y, EntireFn::Expm2pi)?;
        let d = (&ex - &ey).max_abs();
        let lim = tol.max(1e-10) * 1e3 * ex.max_abs().max(1.0);
        if d > lim {
            return Err(Error::Residual { what: format!("monodromy of {what} after shearing"), residual: d, tol: lim });
        }
    }
    Ok(())
}

/// Lowers the eigenvalue `alpha` of `R` and `thetaF` by one.
pub fn shift_down<T: Real>(model: &LocalModel<T>, alpha: Complex<T>, tol: f64) -> Result<LocalModel<T>> {
    let b = blocks(model, alpha, tol)?;
    let m = model.m();
    let id = Matrix::identity(m);
    let theta = &model.theta_f;
    let inv = block_inverse(theta, &b.q)?;
    let factor = &(&id - &b.q) + &(&(theta - &id) * &inv);
    let out = LocalModel::from_parts(&model.r - &b.p, theta - &b.q, model.t.clone(), &model.s * &factor);
    check_monodromy(model, &out, tol)?;
    Ok(out)
}

/// Raises the eigenvalue `alpha` of `R` and `thetaF` by one.
pub fn shift_up<T: Real>(model: &LocalModel<T>, alpha: Complex<T>, tol: f64) -> Result<LocalModel<T>> {
    let b = blocks(model, alpha, tol)?;
    let m = model.m();
    let id = Matrix::identity(m);
    let theta = &model.theta_f;
    let inv = block_inverse(theta, &b.q)?;
    let factor = &(&(theta + &id) * &inv) + &(&id - &b.q);
    let out = LocalModel::from_parts(&model.r + &b.p, theta + &b.q, &factor * &model.t, model.s.clone());
    check_monodromy(model, &out, tol)?;
    Ok(out)
}

/// Isomorphism of gluing data induced by `shift_down(alpha)`: `(1, Z)` with
/// `Z = 1 - Q + thetaF (thetaF - 1)^{-1} Q`, so `C' = Z C` and `V' = V Z^{-1}`.
pub fn shift_down_gauge<T: Real>(model: &LocalModel<T>, alpha: Complex<T>, tol: f64) -> Result<CMatrix<T>> {
    let b = blocks(model, alpha, tol)?;
    let id = Matrix::identity(model.m());
    let theta = &model.theta_f;
    let shifted = theta - &id;
    let inv = block_inverse(&shifted, &b.q)?;
    Ok(&(&id - &b.q) + &(theta * &inv))
}

fn zero_multiplicity<T: Real>(r: &CMatrix<T>, tol: f64) -> Result<usize> {
    if r.rows() == 0 {
        return Ok(0);
    }
    let split = spectral_split(r, tol)?;
    Ok(split.find(Complex::zero(), cluster_radius(r, tol)).map_or(0, |c| c.multiplicity))
}

#[derive(Clone, Debug)]
pub struct MakeGood<T: Real = f64> {
    pub model: LocalModel<T>,
    pub moves: Vec<ShearMove>,
}

fn fmt<T: Real>(z: Complex<T>) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Shears until no two eigenvalues of `R` differ by a nonzero integer, never
/// moving the eigenvalue 0.
pub fn make_good<T: Real>(model: &LocalModel<T>, tol: f64) -> Result<MakeGood<T>> {
    let rep = model.validate(tol)?;
    if !rep.ok {
        return Err(Error::Residual { what: "model relations".into(), residual: rep.worst(), tol });
    }
    let mut current = model.clone();
    let mut moves = Vec::new();
    let mut zero_mult = zero_multiplicity(&current.r, tol)?;
    let guard = 64 + 16 * model.n();
    for _ in 0..guard {
        let report = resonance_report(&current.r, tol)?;
        if report.good {
            return Ok(MakeGood { model: current, moves });
        }
        let pair = report.pairs.iter().max_by_key(|p| p.gap).unwrap().clone();
        let lo = pair.lo.to_c64();
        let zero_tol = cluster_radius(&current.r, tol);
        let (direction, alpha) = if lo.norm() <= zero_tol {
            (Direction::Down, pair.hi)
        } else {
            let crosses_zero = lo.im.abs() <= zero_tol && {
                let j = -lo.re;
                (j - j.round()).abs() <= zero_tol && j.round() > 0.0 && (j.round() as i64) < pair.gap
            };
            if crosses_zero {
                (Direction::Down, pair.hi)
            } else {
                (Direction::Up, pair.lo)
            }
        };
        let (next, mult) = match direction {
            Direction::Down => (shift_down(&current, alpha, tol)?, blocks(&current, alpha, tol)?.multiplicity),
            Direction::Up => (shift_up(&current, alpha, tol)?, blocks(&current, alpha, tol)?.multiplicity),
        };
        let zm = zero_multiplicity(&next.r, tol)?;
        if zm < zero_mult {
            return Err(Error::Invalid(format!("shearing lowered the multiplicity of 0 from {zero_mult} to {zm}")));
        }
        zero_mult = zm;
        let a = alpha.to_c64();
        moves.push(ShearMove { direction, alpha: [a.re, a.im], multiplicity: mult, zero_multiplicity: zm });
        current = next;
    }
    Err(Error::NoConvergence(format!("make_good exceeded {guard} moves")))
}

trait ToC64 {
    fn to_c64(self) -> Complex<f64>;
}

impl<T: Real> ToC64 for Complex<T> {
    fn to_c64(self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

//! Filtrations of local models: jump graphs of a map between two flags,
//! compatibility of the jump regions, polygonal weight functions, graded
//! degenerations and slope checks.

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::svd::{orth, orth_complement};
use crate::localmodel::LocalModel;
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::CMatrix;

/// `(rank, degree)` of a flag step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slope {
    pub rank: u64,
    pub degree: Rational64,
}

/// Increasing chain `F_1 < ... < F_l = C^ambient`; `F_0 = 0` is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag<T: Real = f64> {
    pub ambient: usize,
    /// Orthonormal bases of the steps.
    pub steps: Vec<CMatrix<T>>,
    pub slopes: Option<Vec<Slope>>,
}

impl<T: Real> Flag<T> {
    /// Checks independence and containment, drops a leading zero step and
    /// orthonormalizes each step.
    pub fn new(ambient: usize, steps: Vec<CMatrix<T>>, tol: f64) -> Result<Self> {
        let mut out: Vec<CMatrix<T>> = Vec::new();
        for (i, s) in steps.iter().enumerate() {
            if s.rows() != ambient {
                return Err(Error::Shape(format!("flag step {i} has {} rows, ambient is {ambient}", s.rows())));
            }
            s.ensure_finite("flag step")?;
            let q = if s.cols() == 0 { Matrix::zeros(ambient, 0) } else { orth(s, tol) };
            if q.cols() != s.cols() {
                return Err(Error::Invalid(format!("flag step {i} has dependent columns")));
            }
            if let Some(prev) = out.last() {
                if containment_residual(&q, prev) > tol * prev.max_abs().max(1.0) {
                    return Err(Error::Invalid(format!("flag step {} is not contained in step {i}", i - 1)));
                }
                if q.cols() <= prev.cols() {
                    return Err(Error::Invalid(format!("flag step {i} does not grow")));
                }
            }
            if q.cols() == 0 && out.is_empty() {
                continue;
            }
            out.push(q);
        }
        if ambient > 0 && out.last().is_none_or(|q| q.cols() != ambient) {
            return Err(Error::Invalid("last flag step must be the whole space".into()));
        }
        Ok(Flag { ambient, steps: out, slopes: None })
    }

    /// `span(e_1..e_{d_1}) < span(e_1..e_{d_2}) < ...`
    pub fn coordinate(ambient: usize, dims: &[usize]) -> Result<Self> {
        let steps =
            dims.iter().map(|&d| Matrix::from_fn(ambient, d, |r, c| if r == c { Complex::one() } else { Complex::zero() })).collect();
        Flag::new(ambient, steps, 1e-12)
    }

    /// Single step (the whole space).
    pub fn trivial(ambient: usize) -> Self {
        Flag::coordinate(ambient, &[ambient]).expect("trivial flag")
    }

    pub fn with_slopes(mut self, slopes: Vec<Slope>) -> Result<Self> {
        if slopes.len() != self.steps.len() {
            return Err(Error::Shape(format!("{} slopes for {} steps", slopes.len(), self.steps.len())));
        }
        self.slopes = Some(slopes);
        Ok(self)
    }

    /// Number of nonzero steps `l`; indices run over `0..=l`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Basis of `F_j` (`F_0 = 0`).
    pub fn step(&self, j: usize) -> CMatrix<T> {
        if j == 0 {
            Matrix::zeros(self.ambient, 0)
        } else {
            self.steps[j - 1].clone()
        }
    }

    /// Orthonormal basis adapted to the flag with the step index (1-based)
    /// of each column.
    pub fn adapted_basis(&self) -> (CMatrix<T>, Vec<usize>) {
        let mut basis = Matrix::zeros(self.ambient, 0);
        let mut levels = Vec::new();
        for (j, step) in self.steps.iter().enumerate() {
            let prev = basis.clone();
            // orthonormal complement of prev inside step
            let proj = if prev.cols() == 0 { step.clone() } else { step - &(&prev * &(&prev.adjoint() * step)) };
            let extra = orth(&proj, 1e-10);
            let extra = extra.submatrix(0, self.ambient, 0, (step.cols() - prev.cols()).min(extra.cols()));
            levels.extend(std::iter::repeat_n(j + 1, extra.cols()));
            basis = basis.hstack(&extra);
        }
        if basis.cols() < self.ambient {
            // only for the empty flag of the zero space
            let c = orth_complement(&basis);
            basis = basis.hstack(&c);
        }
        (basis, levels)
    }
}

/// Largest entry of the part of `y` outside the span of orthonormal `q`.
fn containment_residual<T: Real>(q: &CMatrix<T>, y: &CMatrix<T>) -> f64 {
    if y.cols() == 0 {
        return 0.0;
    }
    if q.cols() == 0 {
        return y.max_abs();
    }
    (y - &(q * &(&q.adjoint() * y))).max_abs()
}

/// Nondecreasing `k(j)`, `j = 0..=len_a`, with values in `0..=len_b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpGraph {
    pub points: Vec<usize>,
    pub target_len: usize,
}

impl JumpGraph {
    pub fn new(points: Vec<usize>, target_len: usize) -> Result<Self> {
        if points.first().is_none_or(|&k| k != 0) {
            return Err(Error::Invalid("a jump graph starts at k(0) = 0".into()));
        }
        if points.windows(2).any(|w| w[0] > w[1]) || points.iter().any(|&k| k > target_len) {
            return Err(Error::Invalid(format!("jump graph {points:?} is not monotone within 0..={target_len}")));
        }
        Ok(JumpGraph { points, target_len })
    }

    pub fn source_len(&self) -> usize {
        self.points.len() - 1
    }

    /// Indices where the graph jumps. Index 0 always counts as a jump.
    pub fn jump_indices(&self) -> Vec<usize> {
        (0..self.points.len()).filter(|&j| j == 0 || self.points[j] > self.points[j - 1]).collect()
    }

    /// `(j, k(j))` at the jump indices.
    pub fn jumps(&self) -> Vec<(usize, usize)> {
        self.jump_indices().into_iter().map(|j| (j, self.points[j])).collect()
    }
}

/// `k(j) = min { k : map(F_j) in G_k }` for flags `F` on the source and `G`
/// on the target. Also returns warnings for borderline containment tests.
pub fn jump_graph<T: Real>(map: &CMatrix<T>, source: &Flag<T>, target: &Flag<T>, tol: f64) -> Result<(JumpGraph, Vec<String>)> {
    map.ensure_shape(target.ambient, source.ambient, "map between flags")?;
    let mut warnings = Vec::new();
    let scale = map.max_abs().max(1.0);
    let mut points = vec![0usize];
    for j in 1..=source.len() {
        let img = map * &source.step(j);
        let mut k = *points.last().unwrap();
        loop {
            let res = containment_residual(&target.step(k), &img);
            if res > tol * scale && res <= 10.0 * tol * scale {
                warnings.push(format!("containment of step {j} in target step {k} is borderline: residual {res:e}"));
            }
            if res <= tol * scale || k == target.len() {
                break;
            }
            k += 1;
        }
        points.push(k);
    }
    Ok((JumpGraph::new(points, target.len())?, warnings))
}

/// `G_s = {(j, k) : k <= k(j)}` and `G_t = {(j, k) : j <= j(k)}` meet only in
/// points that are jump points of both graphs.
pub fn compatible(gs: &JumpGraph, gt: &JumpGraph) -> Result<bool> {
    check_ranges(gs, gt)?;
    let js = gs.jumps();
    let jt: Vec<(usize, usize)> = gt.jumps().into_iter().map(|(k, j)| (j, k)).collect();
    for j in 0..=gs.source_len() {
        for k in 0..=gt.source_len() {
            let in_s = k <= gs.points[j];
            let in_t = j <= gt.points[k];
            if in_s && in_t && !(js.contains(&(j, k)) && jt.contains(&(j, k))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_ranges(gs: &JumpGraph, gt: &JumpGraph) -> Result<()> {
    if gs.target_len != gt.source_len() || gt.target_len != gs.source_len() {
        return Err(Error::Shape(format!(
            "graphs over {}x{} and {}x{} grids",
            gs.source_len(),
            gs.target_len,
            gt.target_len,
            gt.source_len()
        )));
    }
    Ok(())
}

/// Weight functions on the two index sets: `p` on `j`, `q` on `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    pub p: Vec<Rational64>,
    pub q: Vec<Rational64>,
}

impl Weights {
    /// Sign of `p(j) - q(k)` on the grid: 0 on the line, -1 above, +1 below.
    pub fn sign_table(&self) -> Vec<Vec<i8>> {
        self.p
            .iter()
            .map(|pj| {
                self.q
                    .iter()
                    .map(|qk| match pj.cmp(qk) {
                        std::cmp::Ordering::Less => -1,
                        std::cmp::Ordering::Equal => 0,
                        std::cmp::Ordering::Greater => 1,
                    })
                    .collect()
            })
            .collect()
    }
}

/// Both strictly increasing, `q(k(j)) <= p(j)` for every `j` and
/// `p(j(k)) <= q(k)` for every `k`.
pub fn weights_valid(gs: &JumpGraph, gt: &JumpGraph, w: &Weights) -> bool {
    let inc = |v: &[Rational64]| v.windows(2).all(|x| x[0] < x[1]);
    w.p.len() == gs.points.len()
        && w.q.len() == gt.points.len()
        && inc(&w.p)
        && inc(&w.q)
        && gs.points.iter().enumerate().all(|(j, &k)| w.q[k] <= w.p[j])
        && gt.points.iter().enumerate().all(|(k, &j)| w.p[j] <= w.q[k])
}

/// `q(k) = k` and `p` the polygonal line through the jump points of `G_s`,
/// rising by less than one between them. `None` when the line leaves a jump
/// point of `G_t` strictly below it.
pub fn polygonal_weights(gs: &JumpGraph, gt: &JumpGraph) -> Result<Option<Weights>> {
    check_ranges(gs, gt)?;
    let la = gs.source_len() as i64;
    let q: Vec<Rational64> = (0..gt.points.len()).map(|k| Rational64::from_integer(k as i64)).collect();
    let jumps = gs.jumps();
    let mut p = vec![Rational64::zero(); gs.points.len()];
    for (i, &(ja, ka)) in jumps.iter().enumerate() {
        let (ja, ka) = (ja as i64, ka as i64);
        let (end, width) = match jumps.get(i + 1) {
            Some(&(jb, _)) => (jb as i64, jb as i64 - ja),
            None => (la + 1, la - ja + 1),
        };
        for j in ja..end {
            p[j as usize] = Rational64::from_integer(ka) + Rational64::new(j - ja, width);
        }
    }
    let w = Weights { p, q };
    Ok(if weights_valid(gs, gt, &w) { Some(w) } else { None })
}

/// Integer weights, default: the 1-based step index of each flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepWeights {
    pub e: Vec<i64>,
    pub f: Vec<i64>,
}

struct Adapted<T: Real> {
    basis: CMatrix<T>,
    weights: Vec<i64>,
}

fn adapted<T: Real>(flag: &Flag<T>, w: Option<&[i64]>) -> Result<Adapted<T>> {
    let (basis, levels) = flag.adapted_basis();
    if let Some(w) = w {
        if w.len() != flag.len() {
            return Err(Error::Shape(format!("{} weights for {} flag steps", w.len(), flag.len())));
        }
        if w.windows(2).any(|x| x[0] >= x[1]) {
            return Err(Error::Invalid("step weights must increase".into()));
        }
    }
    let weights = levels.iter().map(|&l| w.map_or(l as i64, |w| w[l - 1])).collect();
    Ok(Adapted { basis, weights })
}

/// `X -> D_to^{-1} X D_from` with `D = diag(tau^w)`; `tau = None` keeps only
/// the blocks of equal weight.
fn scale_by_weights<T: Real>(
    x: &CMatrix<T>,
    to: &[i64],
    from: &[i64],
    tau: Option<Complex<T>>,
    tol: f64,
    what: &str,
) -> Result<CMatrix<T>> {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    let lim = tol * x.max_abs().max(1.0);
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let e = from[c] - to[r];
            let z = x[(r, c)];
            if e < 0 {
                if z.norm().to_f64().unwrap() > lim {
                    return Err(Error::Invalid(format!("{what} does not respect the filtrations")));
                }
                continue;
            }
            out[(r, c)] = match tau {
                Some(t) => z * t.powi(e as i32),
                None if e == 0 => z,
                None => Complex::zero(),
            };
        }
    }
    Ok(out)
}

fn deform_impl<T: Real>(
    model: &LocalModel<T>,
    flag_e: &Flag<T>,
    flag_f: &Flag<T>,
    weights: Option<&StepWeights>,
    tau: Option<Complex<T>>,
    tol: f64,
) -> Result<LocalModel<T>> {
    model.check_shapes()?;
    if flag_e.ambient != model.n() || flag_f.ambient != model.m() {
        return Err(Error::Shape("flags do not match the model".into()));
    }
    let ae = adapted(flag_e, weights.map(|w| w.e.as_slice()))?;
    let af = adapted(flag_f, weights.map(|w| w.f.as_slice()))?;
    let conj = |x: &CMatrix<T>, to: &Adapted<T>, from: &Adapted<T>, what: &str| -> Result<CMatrix<T>> {
        let inner = &(&to.basis.adjoint() * x) * &from.basis;
        let scaled = scale_by_weights(&inner, &to.weights, &from.weights, tau, tol, what)?;
        Ok(&(&to.basis * &scaled) * &from.basis.adjoint())
    };
    Ok(LocalModel::from_parts(
        conj(&model.r, &ae, &ae, "R")?,
        conj(&model.theta_f, &af, &af, "thetaF")?,
        conj(&model.t, &af, &ae, "t")?,
        conj(&model.s, &ae, &af, "s")?,
    ))
}

/// Conjugate by the weight grading `diag(tau^w)` in adapted bases,
/// expressed in the original coordinates. Identity at `tau = 1`.
pub fn deform<T: Real>(
    model: &LocalModel<T>,
    flag_e: &Flag<T>,
    flag_f: &Flag<T>,
    weights: Option<&StepWeights>,
    tau: Complex<T>,
    tol: f64,
) -> Result<LocalModel<T>> {
    if tau.norm() == T::zero() {
        return graded(model, flag_e, flag_f, weights, tol);
    }
    deform_impl(model, flag_e, flag_f, weights, Some(tau), tol)
}

/// The associated graded model: off-diagonal weight blocks removed.
pub fn graded<T: Real>(
    model: &LocalModel<T>,
    flag_e: &Flag<T>,
    flag_f: &Flag<T>,
    weights: Option<&StepWeights>,
    tol: f64,
) -> Result<LocalModel<T>> {
    deform_impl(model, flag_e, flag_f, weights, None, tol)
}

/// All steps have the slope of the whole space.
pub fn slope_special_check<T: Real>(flag: &Flag<T>) -> Result<bool> {
    let slopes = flag.slopes.as_ref().ok_or_else(|| Error::Invalid("flag steps carry no (rank, degree) data".into()))?;
    let total = slopes.last().ok_or_else(|| Error::Invalid("empty flag".into()))?;
    if total.rank == 0 {
        return Err(Error::Invalid("ambient rank 0".into()));
    }
    let mu = total.degree / Rational64::from_integer(total.rank as i64);
    Ok(slopes.iter().filter(|s| s.rank > 0).all(|s| s.degree / Rational64::from_integer(s.rank as i64) == mu))
}

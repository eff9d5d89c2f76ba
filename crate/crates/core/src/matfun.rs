//! Matrix functional calculus: entire functions, branch logarithms, spectral
//! projectors and integer-resonance detection.
//!
//! All evaluation goes through a reordered complex Schur form and the block
//! Parlett recurrence. Diagonal blocks (tight eigenvalue clusters) are
//! evaluated directly: scaled Taylor series for the exponential family,
//! inverse scaling and squaring for the logarithm, constants for projectors.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::schur::Schur;
use crate::linalg::svd::Svd;
use crate::linalg::sylvester;
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::CMatrix;

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Cluster radius for the Parlett recurrence.
const PARLETT_DELTA: f64 = 0.1;

/// The four entire scalar functions the crate evaluates on matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntireFn {
    /// `z -> exp(-2 pi i z)`
    Expm2pi,
    /// `z -> (exp(-2 pi i z) - 1) / z`, value `-2 pi i` at 0
    PhiM2pi,
    /// `z -> exp(z)`
    ExpPlain,
    /// `z -> (exp(z) - 1) / z`, value `1` at 0
    PhiPlain,
}

impl EntireFn {
    fn rate<T: Real>(self) -> Complex<T> {
        match self {
            EntireFn::Expm2pi | EntireFn::PhiM2pi => Complex::new(T::zero(), -T::TAU()),
            EntireFn::ExpPlain | EntireFn::PhiPlain => Complex::one(),
        }
    }

    fn is_phi(self) -> bool {
        matches!(self, EntireFn::PhiM2pi | EntireFn::PhiPlain)
    }

    /// Scalar evaluation.
    pub fn eval<T: Real>(self, z: Complex<T>) -> Complex<T> {
        let c = self.rate::<T>();
        if !self.is_phi() {
            return (c * z).exp();
        }
        let w = c * z;
        if w.norm() < T::lit(1e-3) {
            // (e^w - 1)/w = sum w^k/(k+1)!
            let mut term = Complex::<T>::one();
            let mut sum = Complex::<T>::one();
            for k in 1..12 {
                term = term * w / T::from_usize(k + 1).unwrap();
                sum += term;
            }
            c * sum
        } else {
            (w.exp() - Complex::one()) / z
        }
    }
}

/// Strip section `Re in [anchor, anchor + 1)` of `mu -> exp(-2 pi i mu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSection {
    pub anchor: f64,
}

impl Default for BranchSection {
    fn default() -> Self {
        BranchSection { anchor: 0.0 }
    }
}

impl BranchSection {
    pub fn new(anchor: f64) -> Self {
        BranchSection { anchor }
    }

    /// `true` iff 0 is the only integer in the strip, i.e. `sigma(1) = 0`.
    pub fn fixes_one(&self) -> bool {
        self.anchor > -1.0 && self.anchor <= 0.0
    }

    pub fn contains<T: Real>(&self, z: Complex<T>) -> bool {
        let x = z.re.to_f64().unwrap();
        x >= self.anchor && x < self.anchor + 1.0
    }

    /// The chosen logarithm: `exp(-2 pi i sigma(mu)) = mu`. Real parts within
    /// `snap` below the open end of the strip are moved onto the closed end,
    /// so roundoff around `mu = exp(-2 pi i anchor)` stays on one side.
    pub fn sigma<T: Real>(&self, mu: Complex<T>, snap: f64) -> Complex<T> {
        let tau = T::TAU();
        let y = mu.norm().ln() / tau;
        let mut x = -(mu.arg() / tau).to_f64().unwrap();
        x -= (x - self.anchor).floor();
        if self.anchor + 1.0 - x <= snap {
            x -= 1.0;
        }
        Complex::new(T::lit(x), y)
    }
}

// ---------------------------------------------------------------------------
// Parlett machinery

/// Single-linkage clustering; ids in order of first appearance.
pub(crate) fn cluster_points<T: Real>(values: &[Complex<T>], radius: f64) -> Vec<usize> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm().to_f64().unwrap() < radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut root_id = std::collections::HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let next = root_id.len();
        ids[i] = *root_id.entry(r).or_insert(next);
    }
    ids
}

/// Schur form reordered so that equal cluster ids are contiguous, with the
/// resulting block ranges.
pub(crate) struct Blocked<T: Real> {
    pub schur: Schur<T>,
    pub blocks: Vec<(usize, usize)>,
    pub block_ids: Vec<usize>,
}

pub(crate) fn block_schur<T: Real>(mut schur: Schur<T>, ids: &[usize]) -> Blocked<T> {
    let keys = schur.reorder(ids);
    let mut blocks = Vec::new();
    let mut block_ids = Vec::new();
    let mut start = 0;
    for i in 1..=keys.len() {
        if i == keys.len() || keys[i] != keys[start] {
            blocks.push((start, i));
            block_ids.push(keys[start]);
            start = i;
        }
    }
    Blocked { schur, blocks, block_ids }
}

/// Block Parlett recurrence on an upper triangular `t` partitioned into
/// `blocks`; `diag` evaluates the function on each diagonal block. Returns the
/// function of `t` (triangular coordinates).
pub(crate) fn parlett<T: Real>(
    t: &CMatrix<T>,
    blocks: &[(usize, usize)],
    mut diag: impl FnMut(usize, &CMatrix<T>) -> Result<CMatrix<T>>,
) -> Result<CMatrix<T>> {
    let n = t.rows();
    let mut f = Matrix::zeros(n, n);
    let nb = blocks.len();
    for (b, &(s, e)) in blocks.iter().enumerate() {
        let fb = diag(b, &t.submatrix(s, e, s, e))?;
        f.set_block(s, s, &fb);
    }
    for j in 0..nb {
        let (sj, ej) = blocks[j];
        for i in (0..j).rev() {
            let (si, ei) = blocks[i];
            let tii = t.submatrix(si, ei, si, ei);
            let tjj = t.submatrix(sj, ej, sj, ej);
            let tij = t.submatrix(si, ei, sj, ej);
            let fii = f.submatrix(si, ei, si, ei);
            let fjj = f.submatrix(sj, ej, sj, ej);
            let mut rhs = &(&fii * &tij) - &(&tij * &fjj);
            for &(sk, ek) in &blocks[i + 1..j] {
                let fik = f.submatrix(si, ei, sk, ek);
                let tkj = t.submatrix(sk, ek, sj, ej);
                let tik = t.submatrix(si, ei, sk, ek);
                let fkj = f.submatrix(sk, ek, sj, ej);
                rhs = &(&rhs + &(&fik * &tkj)) - &(&tik * &fkj);
            }
            let fij = sylvester::solve_triangular(&tii, &tjj, &rhs)?;
            f.set_block(si, sj, &fij);
        }
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Block evaluators

/// `exp(x)` by scaling and squaring a Taylor series.
pub(crate) fn expm_taylor<T: Real>(x: &CMatrix<T>) -> CMatrix<T> {
    let n = x.rows();
    let norm = x.norm1();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = T::lit(0.5f64.powi(s));
    let y = x.scale(&Complex::new(scale, T::zero()));
    let mut sum = Matrix::<Complex<T>>::identity(n);
    let mut term = Matrix::<Complex<T>>::identity(n);
    for k in 1..40 {
        term = (&term * &y).scale(&Complex::new(T::one() / T::from_usize(k).unwrap(), T::zero()));
        sum = &sum + &term;
        if term.norm1() <= f64::EPSILON * 1e-2 * sum.norm1() {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn entire_block<T: Real>(f: EntireFn, a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.rows();
    let c = f.rate::<T>();
    let ca = a.scale(&c);
    if !f.is_phi() {
        return expm_taylor(&ca);
    }
    // exp([[cA, I], [0, 0]]) has (e^{cA} - I)(cA)^{-1} in its top right block
    let mut aug = Matrix::zeros(2 * n, 2 * n);
    aug.set_block(0, 0, &ca);
    aug.set_block(0, n, &Matrix::identity(n));
    let e = expm_taylor(&aug);
    e.submatrix(0, n, n, 2 * n).scale(&c)
}

/// Principal square root of an upper triangular matrix.
fn sqrt_triangular<T: Real>(t: &CMatrix<T>) -> CMatrix<T> {
    let n = t.rows();
    let mut u = Matrix::zeros(n, n);
    for i in 0..n {
        u[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= u[(i, k)] * u[(k, j)];
            }
            u[(i, j)] = s / (u[(i, i)] + u[(j, j)]);
        }
    }
    u
}

/// Principal logarithm of an upper triangular matrix with spectrum near 1.
fn log_near_identity<T: Real>(t: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = t.rows();
    let id = Matrix::<Complex<T>>::identity(n);
    let mut x = t.clone();
    let mut s = 0;
    while (&x - &id).norm1() > 0.25 {
        x = sqrt_triangular(&x);
        s += 1;
        if s > 60 {
            return Err(Error::NoConvergence("inverse scaling and squaring for log".into()));
        }
    }
    let y = &x - &id;
    let mut sum = Matrix::zeros(n, n);
    let mut pow = id.clone();
    for k in 1..80 {
        pow = &pow * &y;
        let sign = if k % 2 == 1 { T::one() } else { -T::one() };
        let term = pow.scale(&Complex::new(sign / T::from_usize(k).unwrap(), T::zero()));
        sum = &sum + &term;
        if term.norm1() <= f64::EPSILON * 1e-2 * sum.norm1().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(sum.scale(&Complex::new(T::lit(2f64.powi(s)), T::zero())))
}

// ---------------------------------------------------------------------------
// Public operations

/// Primary matrix function `f(A)` for one of the four entire functions.
pub fn apply_entire<T: Real>(a: &CMatrix<T>, f: EntireFn) -> Result<CMatrix<T>> {
    a.ensure_square("apply_entire input")?;
    a.ensure_finite("apply_entire input")?;
    let n = a.rows();
    if n <= 2 {
        return Ok(entire_block(f, a));
    }
    let schur = Schur::new(a)?;
    let ids = cluster_points(&schur.eigenvalues(), PARLETT_DELTA);
    let bl = block_schur(schur, &ids);
    let ft = parlett(&bl.schur.t, &bl.blocks, |_, blk| Ok(entire_block(f, blk)))?;
    Ok(&(&bl.schur.q * &ft) * &bl.schur.q.adjoint())
}

/// Logarithm `L` of an invertible `M` with `exp(-2 pi i L) = M` and every
/// eigenvalue of `L` in the section's strip. `L` is a polynomial in `M`.
pub fn branch_log<T: Real>(m: &CMatrix<T>, section: &BranchSection, tol: f64) -> Result<CMatrix<T>> {
    m.ensure_square("branch_log input")?;
    m.ensure_finite("branch_log input")?;
    let n = m.rows();
    if n == 0 {
        return Ok(m.clone());
    }
    let scale = m.norm1().max(1.0);
    let schur = Schur::new(m)?;
    let eig = schur.eigenvalues();
    let min_abs = eig.iter().map(|z| z.norm().to_f64().unwrap()).fold(f64::INFINITY, f64::min);
    if min_abs == 0.0 || min_abs <= 1e-14 * scale {
        return Err(Error::Singular("branch_log: eigenvalue 0".into()));
    }
    if min_abs <= tol * scale {
        return Err(Error::IllConditioned(format!("branch_log: eigenvalue of modulus {min_abs:e} relative to norm {scale:e}")));
    }
    let logs: Vec<Complex<T>> = eig.iter().map(|&mu| section.sigma(mu, tol)).collect();
    let ids = cluster_points(&logs, PARLETT_DELTA);
    // cluster centres in log space
    let nclusters = ids.iter().max().map_or(0, |m| m + 1);
    let mut centre = vec![Complex::<T>::zero(); nclusters];
    let mut count = vec![0usize; nclusters];
    for (i, &id) in ids.iter().enumerate() {
        centre[id] += logs[i];
        count[id] += 1;
    }
    for (c, k) in centre.iter_mut().zip(&count) {
        *c /= T::from_usize(*k).unwrap();
    }
    let bl = block_schur(schur, &ids);
    let two_pi_i = Complex::new(T::zero(), T::TAU());
    let lt = parlett(&bl.schur.t, &bl.blocks, |b, blk| {
        let ell = centre[bl.block_ids[b]];
        let mu = EntireFn::Expm2pi.eval(ell);
        let x = blk.scale(&(Complex::<T>::one() / mu));
        let lx = log_near_identity(&x)?;
        let k = blk.rows();
        Ok(&Matrix::identity(k).scale(&ell) + &lx.scale(&(-Complex::<T>::one() / two_pi_i)))
    })?;
    Ok(&(&bl.schur.q * &lt) * &bl.schur.q.adjoint())
}

/// One generalized eigenspace of a spectral decomposition.
#[derive(Clone, Debug)]
pub struct SpectralCluster<T: Real> {
    /// Mean of the merged eigenvalues.
    pub value: Complex<T>,
    pub multiplicity: usize,
    /// Orthonormal basis of the generalized eigenspace (`n x multiplicity`).
    pub basis: CMatrix<T>,
    /// Spectral (Riesz) projector onto the generalized eigenspace.
    pub projector: CMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct SpectralSplit<T: Real> {
    pub clusters: Vec<SpectralCluster<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> SpectralSplit<T> {
    /// Cluster whose value lies within `radius` of `alpha`.
    pub fn find(&self, alpha: Complex<T>, radius: f64) -> Option<&SpectralCluster<T>> {
        self.clusters.iter().filter(|c| (c.value - alpha).norm().to_f64().unwrap() <= radius).min_by(|a, b| {
            let da = (a.value - alpha).norm();
            let db = (b.value - alpha).norm();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn values(&self) -> Vec<Complex<T>> {
        self.clusters.iter().map(|c| c.value).collect()
    }
}

/// Absolute threshold used by clustering and resonance tests.
pub fn scaled_tol<T: Real>(a: &CMatrix<T>, tol: f64) -> f64 {
    tol * a.norm1().max(1.0)
}

/// Generalized eigenspace decomposition; eigenvalues closer than
/// `tol * max(1, |A|_1)` are merged.
pub fn spectral_split<T: Real>(a: &CMatrix<T>, tol: f64) -> Result<SpectralSplit<T>> {
    a.ensure_square("spectral_split input")?;
    a.ensure_finite("spectral_split input")?;
    let n = a.rows();
    if n == 0 {
        return Ok(SpectralSplit { clusters: vec![], warnings: vec![] });
    }
    let thr = scaled_tol(a, tol);
    let schur = Schur::new(a)?;
    let eig = schur.eigenvalues();
    let ids = cluster_points(&eig, thr);
    let nclusters = ids.iter().max().map_or(0, |m| m + 1);
    let mut warnings = Vec::new();
    let mut value = vec![Complex::<T>::zero(); nclusters];
    let mut mult = vec![0usize; nclusters];
    for (i, &id) in ids.iter().enumerate() {
        value[id] += eig[i];
        mult[id] += 1;
    }
    for (v, k) in value.iter_mut().zip(&mult) {
        *v /= T::from_usize(*k).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if ids[i] != ids[j] {
                let d = (eig[i] - eig[j]).norm().to_f64().unwrap();
                if d < 10.0 * thr {
                    warnings.push(format!(
                        "eigenvalues {} and {} are {d:e} apart, within 10x the clustering threshold {thr:e}",
                        fmt_c(eig[i]),
                        fmt_c(eig[j])
                    ));
                }
            }
        }
    }
    let bl = block_schur(schur, &ids);
    let q = &bl.schur.q;
    let mut clusters = Vec::with_capacity(nclusters);
    for id in 0..nclusters {
        let pt = parlett(&bl.schur.t, &bl.blocks, |b, blk| {
            let k = blk.rows();
            Ok(if bl.block_ids[b] == id { Matrix::identity(k) } else { Matrix::zeros(k, k) })
        })?;
        let p = &(q * &pt) * &q.adjoint();
        let svd = Svd::new(&p);
        let basis = svd.u.submatrix(0, n, 0, mult[id].min(svd.u.cols()));
        clusters.push(SpectralCluster { value: value[id], multiplicity: mult[id], basis, projector: p });
    }
    Ok(SpectralSplit { clusters, warnings })
}

fn fmt_c<T: Real>(z: Complex<T>) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// A pair of eigenvalue clusters differing by a nonzero integer.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonantPair<T: Real> {
    pub hi: Complex<T>,
    pub lo: Complex<T>,
    /// `hi - lo`, a positive integer.
    pub gap: i64,
}

#[derive(Clone, Debug)]
pub struct ResonanceReport<T: Real> {
    pub good: bool,
    pub pairs: Vec<ResonantPair<T>>,
    pub warnings: Vec<String>,
}

/// Checks whether two eigenvalue clusters differ by a nonzero integer.
pub fn resonance_report<T: Real>(a: &CMatrix<T>, tol: f64) -> Result<ResonanceReport<T>> {
    let split = spectral_split(a, tol)?;
    let thr = scaled_tol(a, tol);
    Ok(resonance_from_values(&split.values(), thr, split.warnings))
}

pub(crate) fn resonance_from_values<T: Real>(values: &[Complex<T>], thr: f64, warnings: Vec<String>) -> ResonanceReport<T> {
    let mut pairs = Vec::new();
    for (i, &x) in values.iter().enumerate() {
        for &y in &values[i + 1..] {
            let d = (x - y).to_c64_lossy();
            let k = d.re.round();
            if k != 0.0 && (d - Complex::new(k, 0.0)).norm() <= thr {
                let (hi, lo) = if k > 0.0 { (x, y) } else { (y, x) };
                pairs.push(ResonantPair { hi, lo, gap: k.abs() as i64 });
            }
        }
    }
    ResonanceReport { good: pairs.is_empty(), pairs, warnings }
}

trait ToC64 {
    fn to_c64_lossy(self) -> Complex<f64>;
}

impl<T: Real> ToC64 for Complex<T> {
    fn to_c64_lossy(self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

/// Coefficients of the characteristic polynomial `det(x - A)`, highest degree
/// first (leading 1), from the Schur eigenvalues.
pub fn char_poly<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    a.ensure_square("char_poly input")?;
    let eig = if a.rows() == 0 { vec![] } else { Schur::new(a)?.eigenvalues() };
    let mut c = vec![Complex::<T>::one()];
    for lam in eig {
        let mut next = vec![Complex::zero(); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * lam;
        }
        c = next;
    }
    Ok(c)
}

/// Maximum coefficient distance of two characteristic polynomials.
pub fn char_poly_distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<f64> {
    let pa = char_poly(a)?;
    let pb = char_poly(b)?;
    if pa.len() != pb.len() {
        return Err(Error::Shape("char_poly_distance: different sizes".into()));
    }
    Ok(pa.iter().zip(&pb).map(|(x, y)| (*x - *y).norm().to_f64().unwrap()).fold(0.0, f64::max))
}

/// Eigenvalues (Schur diagonal).
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if a.rows() == 0 {
        return Ok(vec![]);
    }
    Ok(Schur::new(a)?.eigenvalues())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ComplexMatrix;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn phi_m2pi_scalar_values() {
        let at0 = apply_entire(&ComplexMatrix::real_diag(&[0.0]), EntireFn::PhiM2pi).unwrap();
        assert!((at0[(0, 0)] - c(0.0, -2.0 * PI)).norm() < 1e-14);
        let at1 = apply_entire(&ComplexMatrix::real_diag(&[1.0]), EntireFn::PhiM2pi).unwrap();
        assert!(at1[(0, 0)].norm() < 1e-14);
        let half = apply_entire(&ComplexMatrix::real_diag(&[0.5]), EntireFn::PhiM2pi).unwrap();
        assert!((half[(0, 0)] - c(-4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm2pi_diagonal() {
        let e = apply_entire(&ComplexMatrix::real_diag(&[0.0, 0.5]), EntireFn::Expm2pi).unwrap();
        assert!(e.dist(&ComplexMatrix::real_diag(&[1.0, -1.0])) < 1e-14);
    }

    #[test]
    fn plain_functions_at_zero() {
        let z = ComplexMatrix::zeros(3, 3);
        let p = apply_entire(&z, EntireFn::PhiPlain).unwrap();
        assert!(p.dist(&ComplexMatrix::identity(3)) < 1e-15);
        let e = apply_entire(&z, EntireFn::ExpPlain).unwrap();
        assert!(e.dist(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn jordan_block_exponential() {
        // exp(-2 pi i [[a,1],[0,a]]) = e^{-2 pi i a} [[1, -2 pi i],[0,1]]
        let a = ComplexMatrix::from_real_rows(&[&[0.25, 1.0, 0.0], &[0.0, 0.25, 0.0], &[0.0, 0.0, 0.3]]);
        let e = apply_entire(&a, EntireFn::Expm2pi).unwrap();
        let s = c(0.0, -2.0 * PI * 0.25).exp();
        assert!((e[(0, 0)] - s).norm() < 1e-13);
        assert!((e[(0, 1)] - s * c(0.0, -2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn scalar_phi_matches_series_near_zero() {
        let z = c(1e-5, 2e-5);
        let rate = c(0.0, -2.0 * PI);
        let w = rate * z;
        let series = rate * (c(1.0, 0.0) + w / 2.0 + w * w / 6.0 + w * w * w / 24.0);
        let v = EntireFn::PhiM2pi.eval(z);
        assert!((v - series).norm() < 1e-15 * series.norm());
    }

    #[test]
    fn branch_log_examples() {
        let s0 = BranchSection::new(0.0);
        let l = branch_log(&ComplexMatrix::identity(2), &s0, DEFAULT_TOL).unwrap();
        assert!(l.max_abs() < 1e-15);
        let l = branch_log(&ComplexMatrix::real_diag(&[-1.0]), &s0, DEFAULT_TOL).unwrap();
        assert!((l[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        let u = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let l = branch_log(&u, &s0, DEFAULT_TOL).unwrap();
        let want = ComplexMatrix::from_rows(vec![vec![c(0.0, 0.0), c(0.0, 1.0 / (2.0 * PI))], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        assert!(l.dist(&want) < 1e-15, "{l:?}");
    }

    #[test]
    fn branch_log_rejects_singular() {
        let m = ComplexMatrix::real_diag(&[1.0, 0.0]);
        assert!(matches!(branch_log(&m, &BranchSection::default(), DEFAULT_TOL), Err(Error::Singular(_))));
    }

    #[test]
    fn section_snaps_roundoff_at_one() {
        let s = BranchSection::new(0.0);
        let l = s.sigma(Complex::new(1.0, 1e-17_f64), 1e-9);
        assert!(l.re.abs() < 1e-12, "{l}");
        assert!(s.fixes_one());
        assert!(!BranchSection::new(0.5).fixes_one());
    }

    #[test]
    fn spectral_split_examples() {
        let s = spectral_split(&ComplexMatrix::real_diag(&[0.5, 0.5]), DEFAULT_TOL).unwrap();
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.clusters[0].multiplicity, 2);
        assert!(s.clusters[0].projector.dist(&ComplexMatrix::identity(2)) < 1e-15);

        let s = spectral_split(&ComplexMatrix::real_diag(&[0.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.clusters.len(), 2);
        let p0 = &s.find(c(0.0, 0.0), 1e-6).unwrap().projector;
        assert!(p0.dist(&ComplexMatrix::real_diag(&[1.0, 0.0])) < 1e-15);

        let j = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let s = spectral_split(&j, DEFAULT_TOL).unwrap();
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.clusters[0].multiplicity, 2);
        assert!((s.clusters[0].value - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn spectral_projectors_nondiagonal() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 3.0, 1.0], &[0.0, 0.0, 1.0]]);
        let s = spectral_split(&a, DEFAULT_TOL).unwrap();
        assert_eq!(s.clusters.len(), 2);
        let sum = s.clusters.iter().fold(ComplexMatrix::zeros(3, 3), |acc, c| &acc + &c.projector);
        assert!(sum.dist(&ComplexMatrix::identity(3)) < 1e-13);
        for cl in &s.clusters {
            let p = &cl.projector;
            assert!((p * p).dist(p) < 1e-13);
            assert!((&a * p).dist(&(p * &a)) < 1e-13);
        }
    }

    #[test]
    fn ambiguity_is_flagged() {
        let s = spectral_split(&ComplexMatrix::real_diag(&[0.0, 5e-9]), DEFAULT_TOL).unwrap();
        assert_eq!(s.clusters.len(), 2);
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn resonance_examples() {
        assert!(resonance_report(&ComplexMatrix::real_diag(&[0.5, 0.5]), DEFAULT_TOL).unwrap().good);
        let r = resonance_report(&ComplexMatrix::real_diag(&[0.0, 1.0]), DEFAULT_TOL).unwrap();
        assert!(!r.good);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.pairs[0].gap, 1);
        assert!((r.pairs[0].hi - c(1.0, 0.0)).norm() < 1e-15);
        let r = resonance_report(&ComplexMatrix::real_diag(&[0.3, 1.3]), DEFAULT_TOL).unwrap();
        assert!(!r.good);
        assert!((r.pairs[0].lo - c(0.3, 0.0)).norm() < 1e-14);
        assert_eq!(r.pairs[0].gap, 1);
    }

    #[test]
    fn f32_path_works() {
        let a = crate::CMatrix::<f32>::real_diag(&[0.0, 0.5, 0.25]);
        let e = apply_entire(&a, EntireFn::Expm2pi).unwrap();
        assert!((e[(1, 1)] - Complex::new(-1.0f32, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn char_poly_of_diag() {
        let p = char_poly(&ComplexMatrix::real_diag(&[1.0, 2.0])).unwrap();
        let want = [c(1.0, 0.0), c(-3.0, 0.0), c(2.0, 0.0)];
        for (x, y) in p.iter().zip(&want) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}

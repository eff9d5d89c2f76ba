//! Scalar abstractions.
//!
//! Two families of scalars are used throughout the crate:
//!
//! * [`Real`]: the floating point types `f32`/`f64`. Analytic code (matrix
//!   functions, integration) works over `Complex<T>` for `T: Real`.
//! * [`Field`]: anything the exact linear algebra kernel (elimination,
//!   kernels, spinning) can run on. Implemented for floating complex numbers
//!   and for Gaussian rationals `Q(i)`.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, One, ToPrimitive, Zero};

use crate::linalg::{elim, svd};
use crate::matrix::Matrix;

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static {
    /// Lossy constant conversion.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact complex rationals `p/q + i r/s`.
pub type GaussianRational = Complex<BigRational>;

/// A field usable by the generic linear algebra kernel.
pub trait Field: Clone + PartialEq + Debug + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// `true` for exact arithmetic, where zero tests ignore tolerances.
    const EXACT: bool;

    /// Zero test. Exact fields ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Magnitude estimate (`f64`), used for pivoting and reporting.
    fn magnitude(&self) -> f64;

    fn from_ints(re: i64, im: i64) -> Self;

    /// Nearest representable value; exact fields round to a nearby rational.
    fn from_c64(z: Complex<f64>) -> Self;

    fn to_c64(&self) -> Complex<f64>;

    fn conj(&self) -> Self;

    /// Basis of the right kernel, as columns.
    fn kernel(m: &Matrix<Self>, tol: f64) -> Matrix<Self>;

    /// Kernel with an absolute cutoff: singular values `<= cutoff` count as
    /// zero. Exact fields ignore the cutoff.
    fn kernel_abs(m: &Matrix<Self>, cutoff: f64) -> Matrix<Self>;

    /// Rank with the field's notion of zero.
    fn rank(m: &Matrix<Self>, tol: f64) -> usize;

    /// Columns completing the (independent) columns of `basis` to a basis of
    /// the ambient space. Numeric fields return an orthonormal complement.
    fn complement(basis: &Matrix<Self>, tol: f64) -> Matrix<Self>;

    /// Eigenvalues in floating point.
    fn eigenvalues_c64(m: &Matrix<Self>) -> Vec<Complex<f64>>;
}

impl<T: Real> Field for Complex<T> {
    const EXACT: bool = false;

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm().to_f64().unwrap_or(f64::INFINITY) <= tol
    }

    fn magnitude(&self) -> f64 {
        self.norm().to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_ints(re: i64, im: i64) -> Self {
        Complex::new(T::from_i64(re).unwrap(), T::from_i64(im).unwrap())
    }

    fn from_c64(z: Complex<f64>) -> Self {
        Complex::new(T::lit(z.re), T::lit(z.im))
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn kernel(m: &Matrix<Self>, tol: f64) -> Matrix<Self> {
        svd::Svd::new(m).kernel(tol)
    }

    fn kernel_abs(m: &Matrix<Self>, cutoff: f64) -> Matrix<Self> {
        svd::Svd::new(m).kernel_abs(cutoff)
    }

    fn rank(m: &Matrix<Self>, tol: f64) -> usize {
        svd::Svd::new(m).rank(tol)
    }

    fn complement(basis: &Matrix<Self>, tol: f64) -> Matrix<Self> {
        svd::orth_complement(&svd::orth(basis, tol))
    }

    fn eigenvalues_c64(m: &Matrix<Self>) -> Vec<Complex<f64>> {
        let c: Matrix<Complex<f64>> = m.convert();
        crate::matfun::eigenvalues(&c).unwrap_or_default()
    }
}

impl Field for GaussianRational {
    const EXACT: bool = true;

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn magnitude(&self) -> f64 {
        let z = self.to_c64();
        z.norm()
    }

    fn from_ints(re: i64, im: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(re)), BigRational::from_integer(BigInt::from(im)))
    }

    fn from_c64(z: Complex<f64>) -> Self {
        Complex::new(rationalize(z.re, 1 << 20), rationalize(z.im, 1 << 20))
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn kernel(m: &Matrix<Self>, tol: f64) -> Matrix<Self> {
        elim::kernel(m, tol)
    }

    fn kernel_abs(m: &Matrix<Self>, _cutoff: f64) -> Matrix<Self> {
        elim::kernel(m, 0.0)
    }

    fn rank(m: &Matrix<Self>, tol: f64) -> usize {
        elim::rref(m, tol).pivots.len()
    }

    fn complement(basis: &Matrix<Self>, tol: f64) -> Matrix<Self> {
        let n = basis.rows();
        let added = elim::complete_with_standard(basis, tol);
        Matrix::from_fn(n, added.len(), |r, k| if r == added[k] { Self::one() } else { Self::zero() })
    }

    fn eigenvalues_c64(m: &Matrix<Self>) -> Vec<Complex<f64>> {
        let c: Matrix<Complex<f64>> = m.convert();
        crate::matfun::eigenvalues(&c).unwrap_or_default()
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions).
pub fn rationalize(x: f64, max_den: i64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 > max_den as i128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return BigRational::zero();
    }
    let r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1000), BigRational::new(1.into(), 2.into()));
        assert_eq!(rationalize(-2.0 / 3.0, 1000), BigRational::new((-2).into(), 3.into()));
        assert_eq!(rationalize(0.0, 1000), BigRational::zero());
    }

    #[test]
    fn rational_strings_round_trip() {
        let r = parse_rational("-7/21").unwrap();
        assert_eq!(format_rational(&r), "-1/3");
        assert_eq!(format_rational(&parse_rational("4").unwrap()), "4");
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn exact_zero_ignores_tolerance() {
        let z = GaussianRational::from_ints(0, 0);
        assert!(z.is_negligible(0.0));
        let tiny = Complex::new(BigRational::new(1.into(), BigInt::from(10).pow(40)), BigRational::zero());
        assert!(!tiny.is_negligible(1.0));
    }
}

//! Finite-dimensional Riemann-Hilbert data.
//!
//! Local models `(R, thetaF, t, s)`, their gluing data `(T_E, T_F, C, V)`,
//! eigenvalue shearing, filtration combinatorics, finite descriptions of
//! perverse sheaves on punctured surfaces, and numerical Fuchsian monodromy.

pub mod error;
pub mod filtr;
pub mod findesc;
pub mod fuchsian;
pub mod io;
pub mod linalg;
pub mod localmodel;
pub mod matfun;
pub mod matrix;
pub mod modify;
pub mod quiver;
pub mod random;
pub mod report;
pub mod rh;
pub mod scalar;

pub use error::{Error, Result};
pub use localmodel::{CanonicalKind, LocalModel, ReducedModule};
pub use matfun::{BranchSection, EntireFn};
pub use matrix::Matrix;
pub use report::Report;
pub use scalar::{Field, GaussianRational, Real};

/// Complex matrix generic over the real scalar.
pub type CMatrix<T> = Matrix<num_complex::Complex<T>>;

/// Dense complex matrix over `f64`.
pub type ComplexMatrix = CMatrix<f64>;

/// Dense matrix over the Gaussian rationals.
pub type ExactMatrix = Matrix<GaussianRational>;

pub type C64 = num_complex::Complex<f64>;

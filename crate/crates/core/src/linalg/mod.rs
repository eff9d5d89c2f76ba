//! Dense linear algebra kernels.

pub mod elim;
pub mod schur;
pub mod svd;
pub mod sylvester;

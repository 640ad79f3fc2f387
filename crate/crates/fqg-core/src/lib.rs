//! Finite-dimensional realization of the convolution algebras of the free
//! orthogonal and free unitary discrete quantum groups.

pub mod algebra;
pub mod cache;
pub mod error;
pub mod harmonic;
pub mod intertwiners;
pub mod linalg;
pub mod spectral;
pub mod trace;
pub mod unitary;

pub use error::{FqgError, Result};
pub use algebra::BlockElement;
pub use intertwiners::Category;
pub use linalg::{CMat, C64};
pub use spectral::QGParams;

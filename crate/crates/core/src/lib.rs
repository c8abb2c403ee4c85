//! Higher-order Fourier analysis over F_p^n at desk scale.
//!
//! The crate measures Gowers norms, counts additive quadruples and cubes,
//! manipulates subspaces and bilinear forms exactly, and recovers an exact
//! quadratic variety from a set that approximately behaves like one.

pub mod counting;
pub mod error;
pub mod family;
pub mod field;
pub mod forms;
pub mod fourier;
pub mod generators;
pub mod group;
pub mod linalg;
pub mod recovery;

pub use error::{Error, Result};
pub use group::{GSubset, GroupElement, VectorSpaceCtx};

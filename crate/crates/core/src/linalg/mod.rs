//! Exact linear algebra over F_p.

mod maps;
mod matrix;
mod quadruple;
mod subspace;

pub use maps::{repair_into, repair_to_isomorphism, AffineMap, LinearMap};
pub use matrix::Matrix;
pub use quadruple::{
    log_p_ceil, quadruple_isomorphisms, uniqueness_defect_bound_check, QuadrupleIsomorphisms, QuadrupleSizes,
};
pub use subspace::Subspace;

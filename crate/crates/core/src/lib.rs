//! Isoparametric foliations of solvable group actions on symmetric spaces of
//! non-compact type: closed-form shape and normal Jacobi operators, a matrix
//! Lie algebra oracle to check them, and the mean curvature flow on the section.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod flow;
pub mod foliation;
pub mod lie_oracle;
pub mod linalg;
pub mod root_data;
pub mod verify;

pub use error::{Error, Result};
pub use lie_oracle::{adapted, AdaptedModel, ModelId};
pub use root_data::{CoefficientRecord, RootDatum, SimpleOrthogonalSet};

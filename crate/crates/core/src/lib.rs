//! Exact quadratic forms, the sporadic low-rank spin isogenies as matrix
//! functors, and machine-checkable certificates for the identities relating
//! them.

pub mod certificate;
pub mod cocycle;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod quadform;
pub mod scalar;
pub mod sporadic;
pub mod wittcheck;

pub use error::{Error, Result};
pub use linalg::ExactMatrix;
pub use scalar::{FieldDescriptor, Scalar};

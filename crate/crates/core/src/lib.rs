//! Lightlike hypersurfaces of flat metallic semi-Euclidean spaces.
//!
//! The crate builds metallic structures, constructs lightlike frames
//! (radical, screen, transversal), computes the Gauss–Weingarten data and the
//! induced metallic apparatus, and checks the identity registry exactly on
//! affine examples and to a tolerance on polynomial charts.

pub mod ambient;
pub mod error;
pub mod harness;
pub mod hypersurface;
pub mod induced;
pub mod linalg;
pub mod metallic;
pub mod poly;
pub mod scalar;

pub use error::{MlhError, Result};

//! Numerical differential geometry for the correspondence between
//! hypersurfaces of the round unit sphere and Lagrangian submanifolds of the
//! complex quadric, realized through their Gauss maps.
//!
//! The crate covers both directions of the correspondence: the forward Gauss
//! map of a parametrized hypersurface with principal-curvature/angle-function
//! extraction, and the converse reconstruction of hypersurface families from
//! a Lagrangian lift by horizontalization. The ambient quadric geometry
//! (Hopf fibration, complex structure, product structures, curvature tensor)
//! is implemented with closed-form oracles and desk-scale dense linear
//! algebra.

pub mod catalog;
pub mod error;
pub mod gaussmap;
pub mod numcore;
pub mod quadric;
pub mod reconstruct;
pub mod sphere;

pub use error::{Error, Result};

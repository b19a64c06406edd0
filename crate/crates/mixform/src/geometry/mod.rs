//! Geometry of nonsmooth domains: model sets, piecewise-affine charts,
//! explicit chart constructions, and atlas validation.
//!
//! The central objects are volume-preserving bi-Lipschitz maps given
//! piecewise by affine maps on polyhedral pieces. Everything here is built
//! from rational data, so piece determinants and matching conditions that
//! hold exactly in exact arithmetic also hold exactly in f64.

pub mod atlas;
pub mod beams;
pub mod chart;
pub mod halfspace;
pub mod maps2d;
pub mod model;
pub mod presets;

pub use atlas::{Atlas, AtlasEntry};
pub use beams::{beams_membership, crossing_beams_corner_chart, SINGULAR_CORNERS};
pub use chart::{AffineMap, Chart, Piece};
pub use halfspace::{HalfSpace, Polyhedron};
pub use model::{ModelSet, ModelSetKind};

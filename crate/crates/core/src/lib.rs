//! Pairwise linking numbers and Milnor's triple linking number of
//! three-component links in the 3-sphere.
//!
//! A link `L = (X, Y, Z)` determines a map `g_L` from the 3-torus of
//! parameters `(s, t, u)` to the 2-sphere. Its degrees on the coordinate
//! 2-tori are the pairwise linking numbers, and when those vanish the
//! helicity of the pulled-back area field `V_L` is twice the triple linking
//! number `μ`.

pub mod catalog;
pub mod charmap;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod torus;

pub use error::{Axis, Error, Result};
pub use geometry::{CurveS3, Link3, Orientation, Quat};
pub use invariants::InvariantReport;

//! Normalized Ricci flow on generalized Wallach spaces: the three-dimensional
//! ODE system, the invariant set `S` bounded by the cones `gamma_i = 0`, its
//! equilibria, the flux criterion across the cones, and numerical harnesses.

pub mod analysis;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod roots;

pub use analysis::*;
pub use error::{Error, Result};
pub use flow::*;
pub use geometry::*;
pub use linalg::{Eigen3, Mat3};
pub use model::*;

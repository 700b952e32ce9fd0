//! Adaptive integration, crossing detection and the experiment harnesses.

mod dopri;
pub mod ivp;
pub mod regime;
pub mod trajectory;

pub use ivp::*;
pub use regime::*;
pub use trajectory::*;

//! Flux criterion, equilibrium catalogue, planar linearization and the
//! asymptotics near `a = 1/4`.

pub mod asymptotic;
pub mod equilibria;
pub mod flux;
pub mod planar;

pub use asymptotic::*;
pub use equilibria::*;
pub use flux::*;
pub use planar::*;

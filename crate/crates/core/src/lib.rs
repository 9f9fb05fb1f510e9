//! Enhanced dissipation for passive scalars advected by radial shear flows
//! in a pipe or on a disc.

pub mod checks;
pub mod dispersion;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod poly;
pub mod profiles;
pub mod pseudospectral;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod semigroup;
pub mod special;

pub use error::{Error, Result};
pub use linalg::C64;
pub use operator::{assemble_operator, build_grid, weighted_inner, ModeOperator, RadialGrid};
pub use profiles::{CoveringResult, IntervalSet, VelocityProfile};

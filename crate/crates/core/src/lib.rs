//! Equidistributed point sets on the unit sphere: kernel discrepancies,
//! greedy and Riesz-refined point generation, and kernel interpolation.

pub mod discrepancy;
pub mod error;
pub mod interpolation;
pub mod io;
pub mod kernels;
pub mod legendre;
mod linalg;
pub mod pointgen;
pub mod points;
pub mod sum;
pub mod tables;

pub use error::{Error, Result};
pub use kernels::{Convention, Family, KernelSpec, SymbolSequence};
pub use points::{PointSet, SpherePoint};

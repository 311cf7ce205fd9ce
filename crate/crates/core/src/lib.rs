//! Riesz and Coulomb gases at zero temperature: energy minimization,
//! equilibrium measures, renormalized window energies in the extended
//! space and the geometric constructions used to localize them.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod minimize;
pub mod model;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{Hyperrectangle, Region};
pub use kernels::{KernelKind, KernelSpec};
pub use model::{Configuration, DensityField, GasModel, Potential, Scale, Support};

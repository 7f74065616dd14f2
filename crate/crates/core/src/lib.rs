//! Spectral tools for periodic incompressible flow: helical (spin) decomposition
//! of divergence-free fields, a pseudo-spectral Navier–Stokes integrator and the
//! diagnostics built on top of them.

pub mod curl;
pub mod diagnostics;
pub mod error;
pub mod forge;
pub mod grid;
pub mod identities;
pub mod io;
mod par;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Lattice, PhysicalVectorField, SpectralVectorField, C64};

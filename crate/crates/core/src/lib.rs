//! Numerical substrate for studying power-law, rescaled and logarithmic
//! nonlinear Schrödinger flows: spectral grids, split-step solvers,
//! dispersion ODEs, transport metrics and the harmonic Fokker-Planck
//! semigroup.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod error;
pub mod field;
pub mod fokker_planck;
pub mod grid;
pub mod nls;
pub mod ode;
pub mod par;
pub mod quad;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use field::{ComplexField, Density, Frame};
pub use grid::{make_grid, Grid};
pub use num_complex::Complex64;

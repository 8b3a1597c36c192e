//! Split-step spectral solvers and the functionals they are monitored by.

mod functionals;
mod initial;
mod lab;
mod lens;
mod model;

pub use functionals::*;
pub use initial::*;
pub use lab::*;
pub use lens::*;
pub use model::*;

//! Dispersion ODEs and the adaptive integrator behind them.

mod dispersion;
mod rk;

pub use dispersion::*;
pub use rk::{Dopri5, Sample};

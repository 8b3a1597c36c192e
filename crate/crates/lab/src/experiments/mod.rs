//! The eight experiments of the harness.

mod duhamel;
mod fp;
mod global;
mod local;
mod log_ehrenfest;
mod log_global;
mod ode_gap;
mod w1_uniform;

pub use duhamel::run_duhamel_residual;
pub use fp::run_fp_contraction;
pub use global::run_global_scattering;
pub use local::run_local_continuity;
pub use log_ehrenfest::run_log_ehrenfest;
pub use log_global::run_log_global_w1;
pub use ode_gap::run_ode_gap;
pub use w1_uniform::run_w1_uniform;

use anyhow::Result;
use nlslab_core::grid::Grid;
use nlslab_core::nls::{AdaptiveLens, LensField, Model};
use nlslab_core::ComplexField;

use crate::config::{ExperimentConfig, ExperimentName};
use crate::report::ExperimentReport;

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    match config.name {
        ExperimentName::LocalContinuity => run_local_continuity(config),
        ExperimentName::GlobalScattering => run_global_scattering(config),
        ExperimentName::W1Uniform => run_w1_uniform(config),
        ExperimentName::OdeGap => run_ode_gap(config),
        ExperimentName::LogEhrenfest => run_log_ehrenfest(config),
        ExperimentName::LogGlobalW1 => run_log_global_w1(config),
        ExperimentName::FpContraction => run_fp_contraction(config),
        ExperimentName::DuhamelResidual => run_duhamel_residual(config),
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut out: Vec<f64> = linspace(la, lb, n).into_iter().map(f64::exp).collect();
    out[0] = a;
    *out.last_mut().expect("nonempty") = b;
    out
}

/// Sorted union with near-duplicates removed.
pub(crate) fn merge_times(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs().max(1.0));
    all
}

pub(crate) fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Lens-frame snapshots of an adaptive run at each of `times`.
pub(crate) fn adaptive_snapshots(
    u0: &ComplexField,
    model: Model,
    grid: Grid,
    config: &ExperimentConfig,
    times: &[f64],
) -> Result<Vec<LensField>> {
    let stepper = AdaptiveLens::new(grid, model, config.options.log_floor, config.options.growth, config.dt);
    let mut v = LensField::at_origin(u0.clone());
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        stepper.run_to(&mut v, t)?;
        out.push(v.clone());
    }
    Ok(out)
}

use std::f64::consts::PI;

use anyhow::Result;
use nlslab_core::fokker_planck::{
    fp_contraction_check, fp_derivative_trade_check, fp_propagate, fp_weight_bound_check,
    fp_weight_constant, gamma_profile, pme_drift_step, FpDatum,
};
use nlslab_core::grid::Grid;
use nlslab_core::transport::l1_distance;
use nlslab_core::Density;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, Table};

pub fn normal(grid: Grid, mean: f64, var: f64) -> nlslab_core::Result<Density> {
    Density::from_fn(grid, |x| (-(x[0] - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt())
}

/// Gaussian envelope times a seeded trigonometric polynomial of degree 4.
pub fn random_band_limited(grid: &Grid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    grid.coords()
        .iter()
        .map(|&x| {
            let trig: f64 = coef
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * ((k + 1) as f64 * x).cos() + b * ((k + 1) as f64 * x).sin())
                .sum();
            (-x * x / 2.0).exp() * trig
        })
        .collect()
}

pub const GAUSSIAN_BATTERY: [(f64, f64, f64); 5] =
    [(1.0, 0.5, 0.5), (0.0, 2.0, 0.25), (0.0, 2.0, 0.5), (0.0, 2.0, 1.0), (-0.8, 0.2, 0.3)];

pub fn run_fp_contraction(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = config.grid()?;
    let lambda = 1.0 + config.sigma[0];
    let seed = config.seeds.first().copied().unwrap_or(0);
    let mut report = ExperimentReport::new("fp-contraction");

    let gamma = gamma_profile(&grid)?;
    let fixed = l1_distance(&fp_propagate(&gamma, 0.5, 1.0)?, &gamma)?;
    report.checks.push(Check::at_most("gamma_fixed_point", fixed, 1e-8));

    let phi = normal(grid, 0.7, 0.4)?;
    let two = fp_propagate(&fp_propagate(&phi, 0.2, 1.0)?, 0.3, 1.0)?;
    let one = fp_propagate(&phi, 0.5, 1.0)?;
    report.checks.push(Check::at_most("semigroup", l1_distance(&two, &one)?, 1e-8));
    report.checks.push(Check::at_most("mass", (one.mass() - phi.mass()).abs(), 1e-10));
    let dilated = l1_distance(&fp_propagate(&phi, 0.4, lambda)?, &fp_propagate(&phi, 0.4 / lambda, 1.0)?)?;
    report.checks.push(Check::at_most("time_dilation", dilated, 1e-12));

    let mut battery = Table::new("contraction", &["mean", "var", "s", "lhs", "rhs", "ok"]);
    let mut all_ok = true;
    for (m, v, s) in GAUSSIAN_BATTERY {
        let c = fp_contraction_check(&FpDatum::Gaussian { mean: m, var: v }, s)?;
        all_ok &= c.ok;
        battery.push(vec![m, v, s, c.lhs, c.rhs, if c.ok { 1.0 } else { 0.0 }]);
    }
    let gridded = fp_contraction_check(&FpDatum::Grid(normal(grid, 0.0, 2.0)?), 0.5)?;
    battery.push(vec![0.0, 2.0, 0.5, gridded.lhs, gridded.rhs, if gridded.ok { 1.0 } else { 0.0 }]);
    report.checks.push(Check::holds("gaussian_contraction", all_ok));

    let g0 = normal(grid, 0.0, 0.5)?;
    let trade_gauss = fp_derivative_trade_check(&grid, g0.values(), 0.3);
    let trade_random = fp_derivative_trade_check(&grid, &random_band_limited(&grid, seed), 1.0);
    report.checks.push(Check::at_most("trade_gaussian", trade_gauss, 1e-8));
    report.checks.push(Check::at_most("trade_random", trade_random, 1e-8));

    let mut weights = Table::new("weight_bound", &["case", "s", "lhs", "rhs_c2", "ratio"]);
    let spike = normal(grid, 0.0, (4.0 * grid.dx()).powi(2))?;
    let cases = [gamma.clone(), spike, normal(grid, 1.0, 0.5)?, normal(grid, 0.0, 2.0)?];
    let mut fitted = 0.0f64;
    let mut weight_ok = true;
    for (i, case) in cases.iter().enumerate() {
        for s in [0.1, 0.5, 1.0] {
            let c = fp_weight_bound_check(case, s, 2.0)?;
            let r = fp_weight_constant(case, s)?;
            fitted = fitted.max(r);
            weight_ok &= c.ok;
            weights.push(vec![i as f64, s, c.lhs, c.rhs, r]);
        }
    }
    report.checks.push(Check::holds("weight_bound_c2", weight_ok));
    let mut fit = Table::new("weight_constant", &["fitted_c"]);
    fit.push(vec![fitted]);

    let ds = 1e-4;
    let smooth = normal(grid, 0.3, 1.0)?;
    let step = pme_drift_step(&smooth, ds, 1e-8)?;
    let exact = fp_propagate(&smooth, ds, 1.0)?;
    let mut pme = Table::new("porous_medium", &["ds", "l1_vs_exact", "mass_change", "clipped", "stable"]);
    pme.push(vec![
        ds,
        l1_distance(&step.density, &exact)?,
        (step.density.mass() - smooth.mass()).abs(),
        step.clipped_mass,
        if step.stable { 1.0 } else { 0.0 },
    ]);

    report.tables.push(battery);
    report.tables.push(weights);
    report.tables.push(fit);
    report.tables.push(pme);
    Ok(report)
}

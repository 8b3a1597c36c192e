use anyhow::{bail, Result};
use nlslab_core::fokker_planck::fp_propagate;
use nlslab_core::nls::Model;
use nlslab_core::ode::{s_max, solve_dispersion, t_of_s, tau_tilde, DispersionCurve, OdeKind};
use nlslab_core::transport::w1_1d;

use super::{adaptive_snapshots, linspace};
use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

/// Dispersion curve long enough to reach `τ = tau_target`.
fn covering_curve(sigma: f64, tau_target: f64, tol: f64) -> Result<DispersionCurve> {
    let kind = OdeKind::SigmaPower { sigma, d: 1 };
    let mut t_end = 2.0 * tau_target * sigma.sqrt() + 10.0;
    for _ in 0..40 {
        let curve = solve_dispersion(kind, t_end, tol)?;
        if curve.tau_at(t_end)? >= tau_target {
            return Ok(curve);
        }
        t_end *= 2.0;
    }
    bail!("dispersion curve never reaches tau = {tau_target}")
}

struct Series {
    rows: Vec<Vec<f64>>,
    constant: f64,
    origin: f64,
}

fn residual_series(config: &ExperimentConfig, sigma: f64) -> Result<Series> {
    let grid = config.grid()?;
    let opts = &config.options;
    let s_last = opts.s_fraction * s_max(sigma, 1)?;
    let curve = covering_curve(sigma, tau_tilde(sigma, 1, s_last)?, opts.tol)?;
    let ss = linspace(0.0, s_last, opts.probes);
    let times: Vec<f64> = ss.iter().map(|&s| t_of_s(sigma, 1, &curve, s)).collect::<Result<_, _>>()?;
    let u0 = config.data.gaussian().sample(grid);
    let snaps = adaptive_snapshots(&u0, Model::RescaledPower { sigma }, grid, config, &times)?;
    let mut rho = Vec::with_capacity(times.len());
    for (v, &t) in snaps.iter().zip(&times) {
        rho.push(v.density_at_scale(curve.tau_at(t)?, &grid)?.normalized()?);
    }
    let mut rows = Vec::new();
    let mut constant = 0.0f64;
    let mut origin = 0.0;
    for (k, &s) in ss.iter().enumerate() {
        let flow = fp_propagate(&rho[0], s, 1.0 + sigma)?.normalized()?;
        let residual = w1_1d(&rho[k], &flow)?;
        let envelope = sigma + (-2.0 * s * (1.0 - sigma)).exp();
        if k == 0 {
            origin = residual;
        }
        constant = constant.max(residual / envelope);
        rows.push(vec![sigma, s, times[k], curve.tau_at(times[k])?, residual, envelope, residual / envelope]);
    }
    Ok(Series { rows, constant, origin })
}

/// Distance between the rescaled density at compactified time `s` and the
/// Fokker-Planck evolution of its value at `s = 0`.
pub fn run_duhamel_residual(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let results = sweep::run(&config.sigma, |&s| residual_series(config, s));
    let mut report = ExperimentReport::new("duhamel-residual");
    let mut table = Table::new("residual", &["sigma", "s", "t", "tau", "residual", "envelope", "ratio"]);
    let mut consts = Table::new("constants", &["sigma", "envelope_constant"]);
    let mut cs = Vec::new();
    let mut origin = 0.0f64;
    for (&sigma, r) in config.sigma.iter().zip(results) {
        let r = r?;
        for row in r.rows {
            table.push(row);
        }
        consts.push(vec![sigma, r.constant]);
        cs.push(r.constant);
        origin = origin.max(r.origin);
    }
    let hi = cs.iter().fold(0.0f64, |m, c| m.max(*c));
    let lo = cs.iter().fold(f64::INFINITY, |m, c| m.min(*c));
    report.checks.push(Check::at_most("residual_at_origin", origin, 1e-12));
    report.checks.push(Check::at_most("envelope_constant", hi, config.options.cap));
    report.checks.push(Check::at_most("constant_spread", hi / lo, 2.0));
    report.tables.push(table);
    report.tables.push(consts);
    Ok(report)
}

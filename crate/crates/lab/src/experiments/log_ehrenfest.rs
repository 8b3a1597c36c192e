use anyhow::Result;
use nlslab_core::nls::{evolve, l2_distance, EvolutionConfig, Model};
use nlslab_core::ComplexField;

use super::linspace;
use crate::config::ExperimentConfig;
use crate::fit::RateFit;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

fn sup_error(a: &[ComplexField], b: &[ComplexField], upto: usize) -> Result<f64> {
    let mut sup = 0.0f64;
    for (x, y) in a.iter().zip(b).take(upto) {
        sup = sup.max(l2_distance(x, y)?);
    }
    Ok(sup)
}

/// Rescaled power flows against the log flow from the same datum.
pub fn run_log_ehrenfest(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = config.grid()?;
    let opts = &config.options;
    let u0 = config.data.gaussian().sample(grid);
    let horizon = opts.horizons.iter().fold(config.t_end, |m, t| m.max(*t));
    let steps = ((horizon / config.t_end).ceil() as usize).max(1);
    let times = linspace(0.0, horizon, (opts.probes - 1) * steps + 1);
    let upto = |t: f64| times.iter().take_while(|&&s| s <= t * (1.0 + 1e-12)).count();
    let mut models = vec![Model::Log];
    models.extend(config.sigma.iter().map(|&s| Model::RescaledPower { sigma: s }));
    let runs = sweep::run(&models, |&m| {
        let ec = EvolutionConfig { log_floor: opts.log_floor, ..EvolutionConfig::lab(config.dt, horizon, times.clone()) };
        evolve(&u0, m, &ec).map(|e| e.snapshots)
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;
    let log = &runs[0];

    let mut report = ExperimentReport::new("log-ehrenfest");
    let mut table = Table::new("errors", &["sigma", "l2_sup", "l2_sup_over_sigma", "initial"]);
    let mut errors = Vec::new();
    let mut initial = 0.0f64;
    for (&s, run) in config.sigma.iter().zip(&runs[1..]) {
        let e = sup_error(run, log, upto(config.t_end))?;
        let e0 = l2_distance(&run[0], &log[0])?;
        initial = initial.max(e0);
        table.push(vec![s, e, e / s, e0]);
        errors.push(e);
    }
    report.checks.push(Check::at_most("initial_error", initial, 0.0));
    for i in 1..errors.len() {
        let q = config.sigma[i - 1] / config.sigma[i];
        let r = errors[i - 1] / errors[i];
        report.checks.push(Check::within(&format!("ratio_{i}"), r, 0.8 * q, 1.2 * q));
    }
    report.add_fit("l2_vs_sigma", RateFit::fit(&config.sigma, &errors));

    let smallest = config.sigma.len();
    let mut growth = Table::new("growth", &["sigma", "horizon", "l2_sup", "log_l2_sup"]);
    let mut logs = Vec::new();
    for &h in &opts.horizons {
        let e = sup_error(&runs[smallest], log, upto(h))?;
        growth.push(vec![config.sigma[smallest - 1], h, e, e.ln()]);
        logs.push((h, e.ln()));
    }
    let convex = logs.windows(3).all(|w| {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        s2 >= s1
    });
    let mut shape = Table::new("growth_shape", &["convex"]);
    shape.push(vec![if convex { 1.0 } else { 0.0 }]);
    report.tables.push(table);
    report.tables.push(growth);
    report.tables.push(shape);
    Ok(report)
}

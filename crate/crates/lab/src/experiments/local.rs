use anyhow::Result;
use nlslab_core::nls::{evolve, h1_seminorm_distance, l2_distance, EvolutionConfig, Model};
use nlslab_core::ode::theta_rate;

use super::linspace;
use crate::config::ExperimentConfig;
use crate::fit::RateFit;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

pub fn run_local_continuity(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = config.grid()?;
    let sigma = config.sigma[0];
    let u0 = config.data.gaussian().sample(grid);
    let times = linspace(0.0, config.t_end, config.options.probes);
    let mut powers = vec![sigma];
    powers.extend(config.nu.iter().copied());
    let runs = sweep::run(&powers, |&p| {
        let ec = EvolutionConfig { log_floor: config.options.log_floor, ..EvolutionConfig::lab(config.dt, config.t_end, times.clone()) };
        evolve(&u0, Model::Power { sigma: p }, &ec).map(|e| e.snapshots)
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;
    let reference = &runs[0];
    let mut rows = Vec::new();
    for (nu, snaps) in config.nu.iter().zip(&runs[1..]) {
        let (mut l2, mut h1) = (0.0f64, 0.0f64);
        for (a, b) in snaps.iter().zip(reference) {
            let d0 = l2_distance(a, b)?;
            let d1 = h1_seminorm_distance(a, b)?;
            l2 = l2.max(d0);
            h1 = h1.max((d0 * d0 + d1 * d1).sqrt());
        }
        rows.push(((nu - sigma).abs(), vec![*nu, (nu - sigma).abs(), l2, h1]));
    }
    let mut table = Table::new("differences", &["nu", "gap", "l2_sup", "h1_sup"]);
    for row in crate::sweep::merge_sorted(rows) {
        table.push(row);
    }
    let gaps = table.column("gap").unwrap_or_default();
    let l2 = table.column("l2_sup").unwrap_or_default();
    let h1 = table.column("h1_sup").unwrap_or_default();
    let eta = gaps.iter().fold(0.0f64, |m, g| m.max(*g));
    let theta = theta_rate(sigma, config.d, eta)?;
    let mut report = ExperimentReport::new("local-continuity");
    let l2_slope = report.add_fit("l2", RateFit::fit(&gaps, &l2));
    let h1_slope = report.add_fit("h1", RateFit::fit(&gaps, &h1));
    report.checks.push(Check::holds("fits_defined", l2_slope.is_some() && h1_slope.is_some()));
    if 2.0 * sigma > 1.0 {
        report.checks.push(Check::within("l2_slope", l2_slope.unwrap_or(f64::NAN), 0.8, 1.2));
    }
    report.checks.push(Check::at_least("h1_slope", h1_slope.unwrap_or(f64::NAN), 0.8 * theta));
    let mut meta = Table::new("theta", &["sigma", "eta", "theta"]);
    meta.push(vec![sigma, eta, theta]);
    report.tables.push(table);
    report.tables.push(meta);
    if let Some(last) = reference.last() {
        report.checkpoints.push(("reference_final".into(), last.clone()));
    }
    Ok(report)
}

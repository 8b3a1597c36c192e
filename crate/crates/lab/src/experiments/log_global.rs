use std::f64::consts::PI;

use anyhow::Result;
use nlslab_core::fokker_planck::gamma_profile;
use nlslab_core::nls::Model;
use nlslab_core::ode::{solve_dispersion, OdeKind};
use nlslab_core::transport::w1_1d;
use nlslab_core::Density;

use super::{adaptive_snapshots, geomspace, merge_times, strictly_decreasing};
use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

/// Rescaled densities `τ(t)|u(t, τ(t)y)|²/‖φ‖²` of a model at `times`.
pub(crate) fn rescaled_series(
    config: &ExperimentConfig,
    model: Model,
    kind: OdeKind,
    times: &[f64],
) -> Result<Vec<Density>> {
    let grid = config.grid()?;
    let t_end = times.last().copied().unwrap_or(1.0);
    let curve = solve_dispersion(kind, t_end, config.options.tol)?;
    let u0 = config.data.gaussian().sample(grid);
    let snaps = adaptive_snapshots(&u0, model, grid, config, times)?;
    snaps
        .iter()
        .zip(times)
        .map(|(v, &t)| Ok(v.density_at_scale(curve.tau_at(t)?, &grid)?.normalized()?))
        .collect()
}

pub fn run_log_global_w1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = config.grid()?;
    let opts = &config.options;
    let [ga, gb] = opts.gamma_window;
    let t_end = config.t_end.max(gb);
    let times = merge_times(&geomspace(1.0, t_end, opts.probes), &[ga, gb]);
    let mut jobs: Vec<(Model, OdeKind)> = vec![(Model::Log, OdeKind::Logarithmic)];
    jobs.extend(config.sigma.iter().map(|&s| (Model::RescaledPower { sigma: s }, OdeKind::SigmaPower { sigma: s, d: 1 })));
    let series = sweep::run(&jobs, |&(m, k)| rescaled_series(config, m, k, &times));
    let series: Vec<Vec<Density>> = series.into_iter().collect::<Result<_>>()?;
    let log = &series[0];

    let mut report = ExperimentReport::new("log-global-w1");
    let mut cols = vec!["t".to_string()];
    cols.extend(config.sigma.iter().map(|s| format!("w1_sigma_{s:e}")));
    let mut table = Table { name: "w1_to_log".into(), columns: cols, rows: vec![] };
    let mut sups = vec![0.0f64; config.sigma.len()];
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        for (j, s) in series[1..].iter().enumerate() {
            let w = w1_1d(&s[k], &log[k])?;
            sups[j] = sups[j].max(w);
            row.push(w);
        }
        table.push(row);
    }
    let mut order: Vec<(f64, f64)> = config.sigma.iter().copied().zip(sups.iter().copied()).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ordered: Vec<f64> = order.iter().map(|p| p.1).collect();
    report.checks.push(Check::holds("improves_as_sigma_decreases", strictly_decreasing(&ordered)));

    let gamma = gamma_profile(&grid)?.normalized()?;
    let wide = Density::from_fn(grid, |x| (-x[0] * x[0] / 4.0).exp() / (4.0 * PI).sqrt())?.normalized()?;
    let mut gt = Table::new("log_to_gamma", &["t", "w1_gamma", "w1_gamma_sqrt_ln_t", "w1_normal_var2"]);
    let mut worst = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        if t < ga * (1.0 - 1e-12) || t > gb * (1.0 + 1e-12) {
            continue;
        }
        let w = w1_1d(&log[k], &gamma)?;
        let scaled = w * t.ln().sqrt();
        worst = worst.max(scaled);
        gt.push(vec![t, w, scaled, w1_1d(&log[k], &wide)?]);
    }
    report.checks.push(Check::at_most("gamma_rate_ratio", worst, opts.cap));
    report.tables.push(table);
    report.tables.push(gt);
    Ok(report)
}

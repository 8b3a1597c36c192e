use anyhow::Result;
use nlslab_core::ode::{residual_of, tau_gap, OdeKind};

use super::geomspace;
use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

pub fn run_ode_gap(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let opts = &config.options;
    let d = config.d;
    let df = d as f64;
    let mut grid = vec![0.0];
    grid.extend(geomspace(2.0, config.t_end, opts.probes));
    let gaps = sweep::run(&config.sigma, |&s| tau_gap(s, d, &grid, opts.tol));
    let mut report = ExperimentReport::new("ode-gap");
    let mut summary = Table::new("constants", &["sigma", "gap_constant", "rate_constant"]);
    let (mut c_gap, mut c_rate) = (0.0f64, 0.0f64);
    let mut ordered = true;
    let mut origin = 0.0f64;
    for (&sigma, gap) in config.sigma.iter().zip(gaps) {
        let gap = gap?;
        let tau: Vec<f64> = gap.tau0.iter().zip(&gap.w).map(|(a, b)| a - b).collect();
        let tau_dot: Vec<f64> = gap.tau0_dot.iter().zip(&gap.w_dot).map(|(a, b)| a - b).collect();
        let residual = residual_of(OdeKind::SigmaPower { sigma, d }, &tau, &tau_dot);
        let mut table = Table::new(
            &format!("gap_sigma_{sigma:e}"),
            &["t", "tau", "tau_dot", "residual", "w", "wdot", "bound", "gap_ratio", "rate_ratio"],
        );
        let (mut cg, mut cr) = (0.0f64, 0.0f64);
        for i in 0..gap.t.len() {
            let t = gap.t[i];
            ordered &= gap.w[i] >= 0.0 && gap.w_dot[i] >= 0.0;
            let bound = sigma * t * (t + 2.0).ln().powf(1.5);
            let (gr, rr) = if t >= 2.0 {
                let rr = (1.0 / tau_dot[i] - (df * sigma).sqrt()).abs() * t.ln().sqrt();
                (gap.w[i] / bound, rr)
            } else {
                origin = origin.max(gap.w[i].abs());
                (0.0, 0.0)
            };
            cg = cg.max(gr);
            cr = cr.max(rr);
            table.push(vec![t, tau[i], tau_dot[i], residual[i], gap.w[i], gap.w_dot[i], bound, gr, rr]);
        }
        summary.push(vec![sigma, cg, cr]);
        c_gap = c_gap.max(cg);
        c_rate = c_rate.max(cr);
        report.tables.push(table);
    }
    report.checks.push(Check::at_most("gap_constant", c_gap, opts.cap));
    report.checks.push(Check::at_most("rate_constant", c_rate, opts.cap));
    report.checks.push(Check::holds("ordering", ordered));
    report.checks.push(Check::at_most("gap_at_origin", origin, 0.0));

    let sb = opts.boundary_sigma;
    let tb = (1.0 / sb).exp();
    let layer = tau_gap(sb, d, &[0.0, tb], opts.tol)?;
    let ratio = layer.w[1] / layer.tau0[1];
    let mut bl = Table::new("boundary_layer", &["sigma", "t", "w_over_tau0"]);
    bl.push(vec![sb, tb, ratio]);
    report.checks.push(Check::within("boundary_layer", ratio, 0.05, 1.0));
    report.tables.push(summary);
    report.tables.push(bl);
    Ok(report)
}

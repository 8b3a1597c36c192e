use anyhow::Result;
use nlslab_core::nls::{pullback_sigma_norm, LensField, LensStepper, Model};
use nlslab_core::ode::{solve_dispersion, OdeKind};

use super::{linspace, merge_times, strictly_decreasing};
use crate::config::ExperimentConfig;
use crate::fit::RateFit;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

/// Runs happen in the lens frame with `R(t) = ⟨t⟩`, where the Σ-norm of
/// the free pullback is available in closed form.
pub fn run_global_scattering(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = config.grid()?;
    let sigma = config.sigma[0];
    let opts = &config.options;
    let curve = solve_dispersion(OdeKind::GenericPower { alpha: 2.0 }, config.t_end, opts.tol)?;
    let windows: Vec<f64> = opts.tail_times.iter().flat_map(|&t| [t, 2.0 * t]).filter(|&t| t <= config.t_end).collect();
    let times = merge_times(&linspace(0.0, config.t_end, opts.probes), &windows);
    let u0 = config.data.gaussian().sample(grid);
    let mut powers = vec![sigma];
    powers.extend(config.nu.iter().copied());
    let runs = sweep::run(&powers, |&p| -> Result<Vec<LensField>> {
        let st = LensStepper::new(grid, Model::Power { sigma: p }, curve.clone(), opts.log_floor);
        let mut v = LensField::at_origin(u0.clone());
        let mut out = Vec::new();
        for &t in &times {
            st.run_to(&mut v, t, config.dt)?;
            out.push(v.clone());
        }
        Ok(out)
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let reference = &runs[0];
    let mut rows = Vec::new();
    for (nu, snaps) in config.nu.iter().zip(&runs[1..]) {
        let mut sup = 0.0f64;
        for (a, b) in snaps.iter().zip(reference) {
            sup = sup.max(pullback_sigma_norm(&a.field.sub(&b.field)?, &b.state));
        }
        rows.push(((nu - sigma).abs(), vec![*nu, (nu - sigma).abs(), sup]));
    }
    let mut table = Table::new("pullback_differences", &["nu", "gap", "sigma_norm_sup"]);
    for row in sweep::merge_sorted(rows) {
        table.push(row);
    }
    let mut report = ExperimentReport::new("global-scattering");
    let gaps = table.column("gap").unwrap_or_default();
    let sup = table.column("sigma_norm_sup").unwrap_or_default();
    let slope = report.add_fit("sigma_norm", RateFit::fit(&gaps, &sup));
    report.checks.push(Check::within("sigma_norm_slope", slope.unwrap_or(f64::NAN), 0.8, 1.2));

    let free = LensStepper::new(grid, Model::Free, curve.clone(), opts.log_floor);
    let mut tails = Table::new("cauchy_tails", &["window_start", "tail_sup"]);
    let index = |t: f64| times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.max(1.0));
    for &t0 in opts.tail_times.iter().filter(|&&t| 2.0 * t <= config.t_end) {
        let Some(i0) = index(t0) else { continue };
        let mut w = reference[i0].clone();
        let mut sup = 0.0f64;
        for (snap, &t) in reference.iter().zip(&times).skip(i0 + 1) {
            if t > 2.0 * t0 * (1.0 + 1e-12) {
                break;
            }
            free.run_to(&mut w, t, config.dt)?;
            sup = sup.max(pullback_sigma_norm(&snap.field.sub(&w.field)?, &snap.state));
        }
        tails.push(vec![t0, sup]);
    }
    let tail_values = tails.column("tail_sup").unwrap_or_default();
    report.checks.push(Check::holds(
        "tails_shrink",
        tail_values.len() >= 2 && strictly_decreasing(&tail_values),
    ));
    report.tables.push(table);
    report.tables.push(tails);
    if let Some(last) = reference.last() {
        report.checkpoints.push(("reference_lens_final".into(), last.field.clone()));
    }
    Ok(report)
}

use anyhow::Result;
use nlslab_core::nls::{LensField, LensStepper, Model};
use nlslab_core::ode::{solve_dispersion, OdeKind};
use nlslab_core::spectral;
use nlslab_core::transport::w1_1d;
use nlslab_core::{Complex64, Density};

use super::{linspace, merge_times, strictly_decreasing};
use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, Table};
use crate::sweep;

struct Run {
    densities: Vec<Density>,
    currents: Vec<f64>,
}

/// `∫|Im(v̄∇v)/R + Ṙ y |v|²| dy / ‖v‖²`, the L¹ norm of the lab current
/// seen in the lens frame.
fn current_l1(v: &LensField) -> f64 {
    let g = v.field.grid;
    let dv = spectral::partial(&g, &v.field.values, 0);
    let (r, rd) = (v.state.scale, v.state.scale_rate);
    let total: f64 = v
        .field
        .values
        .iter()
        .zip(&dv)
        .enumerate()
        .map(|(i, (z, dz)): (usize, (&Complex64, &Complex64))| {
            ((z.conj() * dz).im / r + rd * g.coord(i) * z.norm_sqr()).abs()
        })
        .sum();
    total * g.dx() / v.field.mass()
}

/// Rescaled densities `ϱ(t) = ⟨t⟩|u(t, ⟨t⟩y)|²/‖φ‖²`, read directly off a
/// lens frame with `R = ⟨t⟩`.
pub fn run_w1_uniform(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = config.grid()?;
    let sigma = config.sigma[0];
    let opts = &config.options;
    let curve = solve_dispersion(OdeKind::GenericPower { alpha: 2.0 }, config.t_end, opts.tol)?;
    let times = merge_times(&linspace(0.0, config.t_end, opts.probes), &opts.tail_times);
    let u0 = config.data.gaussian().sample(grid);
    let mut powers = vec![sigma];
    powers.extend(config.nu.iter().copied());
    let runs = sweep::run(&powers, |&p| -> Result<Run> {
        let st = LensStepper::new(grid, Model::Power { sigma: p }, curve.clone(), opts.log_floor);
        let mut v = LensField::at_origin(u0.clone());
        let mut densities = Vec::new();
        let mut currents = Vec::new();
        for &t in &times {
            st.run_to(&mut v, t, config.dt)?;
            densities.push(v.field.density().normalized()?);
            currents.push(current_l1(&v));
        }
        Ok(Run { densities, currents })
    });
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;
    let reference = &runs[0];

    let mut report = ExperimentReport::new("w1-uniform");
    let mut rows = Vec::new();
    for (nu, run) in config.nu.iter().zip(&runs[1..]) {
        let mut sup = 0.0f64;
        for (a, b) in run.densities.iter().zip(&reference.densities) {
            sup = sup.max(w1_1d(a, b)?);
        }
        rows.push((-(nu - sigma).abs(), vec![*nu, (nu - sigma).abs(), sup]));
    }
    let mut table = Table::new("w1_sup", &["nu", "gap", "w1_sup"]);
    for row in sweep::merge_sorted(rows) {
        table.push(row);
    }
    let sups = table.column("w1_sup").unwrap_or_default();
    report.checks.push(Check::holds("w1_decreases_toward_sigma", strictly_decreasing(&sups)));

    let mut tails = Table::new("tail_variation", &["power", "tail_start", "w1_tail_sup", "current_tail"]);
    let mut all_shrink = true;
    for (p, run) in powers.iter().zip(&runs) {
        let mut seq = Vec::new();
        for &t0 in &opts.tail_times {
            let Some(i0) = times.iter().position(|&s| (s - t0).abs() <= 1e-9 * t0.max(1.0)) else { continue };
            let mut sup = 0.0f64;
            for d in &run.densities[i0..] {
                sup = sup.max(w1_1d(d, &run.densities[i0])?);
            }
            let mut current = 0.0;
            for k in i0..times.len() - 1 {
                let (ta, tb) = (times[k], times[k + 1]);
                let fa = run.currents[k] / (1.0 + ta * ta);
                let fb = run.currents[k + 1] / (1.0 + tb * tb);
                current += 0.5 * (fa + fb) * (tb - ta);
            }
            tails.push(vec![*p, t0, sup, current]);
            seq.push(sup);
        }
        all_shrink &= seq.len() >= 2 && strictly_decreasing(&seq);
    }
    report.checks.push(Check::holds("tail_variation_decreases", all_shrink));
    report.tables.push(table);
    report.tables.push(tails);
    Ok(report)
}

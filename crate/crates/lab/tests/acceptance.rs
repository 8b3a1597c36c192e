//! Acceptance suite: one pass/fail line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nlslab::config::{ExperimentConfig, ExperimentName};
use nlslab::experiments;
use nlslab::report::ExperimentReport;
use nlslab_core::grid::Grid;
use nlslab_core::nls::{
    ch_inequality_check, evolve, j_norm, j_norm_factored, l2_distance, source_term_sigma,
    source_term_taylor, EvolutionConfig, Gaussian, Model,
};
use nlslab_core::ode::{first_integral_residual, solve_dispersion, OdeKind};
use nlslab_core::transport::{w1_1d, w1_moment_bound};
use nlslab_core::{Complex64, Density};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MASS_DRIFT: f64 = 1e-10;
const ORDER_WINDOW: (f64, f64) = (1.8, 2.2);
const ODE_TOL: f64 = 1e-10;
const J_AGREEMENT: f64 = 1e-8;
const CH_PAIRS: usize = 1_000_000;
const SOURCE_AGREEMENT: f64 = 1e-10;
const PC_CONSTANCY: f64 = 1e-6;
const PC_BALANCE: f64 = 1e-4;
const METRIC_EXACT: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn preset(name: ExperimentName) -> ExperimentReport {
    experiments::run(&ExperimentConfig::preset(name)).expect("experiment runs")
}

fn checks(rep: &ExperimentReport, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        match rep.check(n) {
            Some(c) => {
                ok &= c.pass;
                parts.push(format!("{n}={:.4e}", c.value));
            }
            None => {
                ok = false;
                parts.push(format!("{n}=missing"));
            }
        }
    }
    (ok, parts.join(" "))
}

fn conservation() -> Outcome {
    let grid = Grid::new(1, 2048, 64.0).unwrap();
    let u0 = Gaussian::unit().sample(grid);
    let t_end = 5.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, model) in [
        ("power", Model::Power { sigma: 1.0 }),
        ("rescaled", Model::RescaledPower { sigma: 0.5 }),
        ("log", Model::Log),
    ] {
        let run = |dt: f64| evolve(&u0, model, &EvolutionConfig::lab(dt, t_end, vec![t_end])).unwrap().field;
        let fields: Vec<_> = [0.01, 0.005, 0.0025].into_iter().map(run).collect();
        let drift = fields.iter().map(|f| (f.mass() - u0.mass()).abs() / u0.mass()).fold(0.0, f64::max);
        let e1 = l2_distance(&fields[0], &fields[1]).unwrap();
        let e2 = l2_distance(&fields[1], &fields[2]).unwrap();
        let order = (e1 / e2).log2();
        ok &= drift <= MASS_DRIFT && order >= ORDER_WINDOW.0 && order <= ORDER_WINDOW.1;
        parts.push(format!("{label}: drift={drift:.2e} order={order:.3}"));
    }
    outcome(ok, parts.join("; "))
}

fn identities() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for kind in [
        OdeKind::GenericPower { alpha: 1.0 },
        OdeKind::GenericPower { alpha: 2.0 },
        OdeKind::SigmaPower { sigma: 0.1, d: 1 },
        OdeKind::SigmaPower { sigma: 0.4, d: 2 },
        OdeKind::Logarithmic,
    ] {
        let curve = solve_dispersion(kind, 100.0, ODE_TOL).unwrap();
        worst = worst.max(first_integral_residual(&curve).into_iter().fold(0.0, f64::max));
    }
    ok &= worst <= 10.0 * ODE_TOL;

    let r2 = solve_dispersion(OdeKind::GenericPower { alpha: 2.0 }, 100.0, ODE_TOL).unwrap();
    let closed = (0..=400)
        .map(|k| {
            let t = 0.25 * k as f64;
            (r2.tau_at(t).unwrap() - (1.0 + t * t).sqrt()).abs()
        })
        .fold(0.0, f64::max);
    ok &= closed <= 10.0 * ODE_TOL;

    let grid = Grid::new(1, 1024, 20.0).unwrap();
    let u = Gaussian { chirp: 0.4, momentum: [0.3, 0.0], ..Gaussian::unit() }.sample(grid);
    let j_gap = [0.3, 1.0, 2.5]
        .into_iter()
        .map(|t| (j_norm(&u, t) - j_norm_factored(&u, t).unwrap()).abs())
        .fold(0.0, f64::max);
    ok &= j_gap <= J_AGREEMENT;

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut z = || {
        let r = 10f64.powf(rng.gen_range(-6.0..3.0));
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let violations = (0..CH_PAIRS).filter(|_| !ch_inequality_check(z(), z())).count();
    ok &= violations == 0;

    let field = Gaussian::unit().with_amplitude(1.5).sample(Grid::new(1, 512, 6.0).unwrap());
    let mut source = 0.0f64;
    for sigma in [1e-3, 1e-2, 0.1] {
        let a = source_term_sigma(&field, sigma, 1e-300);
        let b = source_term_taylor(&field, sigma);
        source = source.max(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
    }
    ok &= source <= SOURCE_AGREEMENT;
    outcome(
        ok,
        format!(
            "first_integral={worst:.2e} r2={closed:.2e} j_paths={j_gap:.2e} ch_violations={violations} source={source:.2e}"
        ),
    )
}

fn pseudoconformal() -> Outcome {
    let grid = Grid::new(1, 4096, 80.0).unwrap();
    let u0 = Gaussian::unit().sample(grid);
    let probes: Vec<f64> = (0..=500).map(|k| 0.01 * k as f64).collect();
    let critical = evolve(&u0, Model::Power { sigma: 2.0 }, &EvolutionConfig::lab(5e-4, 5.0, probes.clone())).unwrap();
    let q0 = critical.probes[0].pc_quantity;
    let spread = critical.probes.iter().map(|p| (p.pc_quantity - q0).abs() / q0).fold(0.0, f64::max);

    let cubic = evolve(&u0, Model::Power { sigma: 1.0 }, &EvolutionConfig::lab(5e-4, 5.0, probes)).unwrap();
    let (i1, i2) = (100, 500);
    let p = &cubic.probes;
    let mut integral = 0.0;
    for k in (i1..i2).step_by(2) {
        integral += (p[k].pc_rhs + 4.0 * p[k + 1].pc_rhs + p[k + 2].pc_rhs) * 0.01 / 3.0;
    }
    let dq = p[i2].pc_quantity - p[i1].pc_quantity;
    let balance = (dq - integral).abs() / dq.abs();
    outcome(
        spread <= PC_CONSTANCY && balance <= PC_BALANCE,
        format!("critical_spread={spread:.2e} cubic_balance={balance:.2e} over t in [0, 5] and [1, 5]"),
    )
}

fn from_preset(name: ExperimentName, names: &[&str]) -> Outcome {
    let rep = preset(name);
    let (ok, detail) = checks(&rep, names);
    outcome(ok, detail)
}

fn log_global() -> Outcome {
    let duhamel = preset(ExperimentName::DuhamelResidual);
    let w1 = preset(ExperimentName::LogGlobalW1);
    let (a, da) = checks(&duhamel, &["residual_at_origin", "envelope_constant", "constant_spread"]);
    let (b, db) = checks(&w1, &["gamma_rate_ratio"]);
    outcome(a && b, format!("{da} {db}"))
}

fn random_density(grid: Grid, rng: &mut ChaCha8Rng) -> Density {
    let comps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.1..1.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.2..1.5)))
        .collect();
    Density::from_fn(grid, |x| {
        comps.iter().map(|(w, m, s)| w * (-(x[0] - m).powi(2) / (2.0 * s * s)).exp() / s).sum()
    })
    .unwrap()
    .normalized()
    .unwrap()
}

fn metrics() -> Outcome {
    let grid = Grid::new(1, 1024, 16.0).unwrap();
    let base = Density::from_fn(grid, |x| (-x[0] * x[0]).exp()).unwrap().normalized().unwrap();
    let mut shift_err = 0.0f64;
    for cells in [1usize, 7, 64] {
        let h = cells as f64 * grid.dx();
        let moved = Density::from_fn(grid, |x| (-(x[0] - h).powi(2)).exp()).unwrap().normalized().unwrap();
        shift_err = shift_err.max((w1_1d(&base, &moved).unwrap() - h).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut triangle, mut bound_ok) = (0.0f64, true);
    for _ in 0..100 {
        let p = random_density(grid, &mut rng);
        let q = random_density(grid, &mut rng);
        let r = random_density(grid, &mut rng);
        let pq = w1_1d(&p, &q).unwrap();
        let excess = pq - w1_1d(&p, &r).unwrap() - w1_1d(&r, &q).unwrap();
        triangle = triangle.max(excess);
        bound_ok &= pq <= w1_moment_bound(&p, &q).unwrap();
    }
    outcome(
        shift_err <= METRIC_EXACT && triangle <= METRIC_EXACT && bound_ok,
        format!("shift_err={shift_err:.2e} triangle_excess={triangle:.2e} moment_bound={bound_ok}"),
    )
}

type Criterion = (u8, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let suite: [Criterion; 10] = [
        (1, "conservation", secs(360), conservation),
        (2, "exact identities", secs(60), identities),
        (3, "pseudoconformal law", secs(120), pseudoconformal),
        (4, "ode gap", secs(30), || from_preset(ExperimentName::OdeGap, &["gap_constant", "ordering"])),
        (5, "fokker-planck", secs(60), || {
            from_preset(
                ExperimentName::FpContraction,
                &["gamma_fixed_point", "semigroup", "gaussian_contraction", "trade_gaussian", "trade_random"],
            )
        }),
        (6, "local rate", secs(600), || from_preset(ExperimentName::LocalContinuity, &["l2_slope"])),
        (7, "w1 continuity", secs(900), || {
            from_preset(ExperimentName::W1Uniform, &["w1_decreases_toward_sigma", "tail_variation_decreases"])
        }),
        (8, "log limit", secs(600), || {
            from_preset(ExperimentName::LogEhrenfest, &["initial_error", "ratio_1", "ratio_2"])
        }),
        (9, "log global", secs(1200), log_global),
        (10, "metrics", secs(30), metrics),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in suite {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= budget;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {name:<20} {} ({:.1}s of {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

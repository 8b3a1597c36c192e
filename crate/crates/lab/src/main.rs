#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nlslab::config::{ExperimentConfig, ExperimentName};
use nlslab::{experiments, report};
use nlslab_core::checkpoint::{self, Checkpoint};
use nlslab_core::fokker_planck::{
    fp_contraction_check, fp_derivative_trade_check, fp_propagate, fp_weight_bound_check, FpDatum,
};
use nlslab_core::nls::{evolve, EvolutionConfig, Gaussian, Model, ProbeRecord};
use nlslab_core::ode::{first_integral_residual, solve_dispersion, tau_gap, OdeKind};
use nlslab_core::transport::{gaussian_fit, hs_negative_compare, l1_distance, w1, w2_gaussian};
use nlslab_core::Grid;
use serde_json::json;

#[derive(Parser)]
#[command(name = "lab", version, about = "Defocusing NLS laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Power,
    Rescaled,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameArg {
    Lab,
    Selfsim,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Generic,
    Sigma,
    Log,
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaArg {
    Contraction,
    Weight,
    Trade,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the available experiments.
    List,
    /// Print the default config of an experiment.
    Preset { name: String },
    /// Re-hash the files of a manifest and re-derive its verdicts.
    Verify { manifest: PathBuf },
    /// Evolve a Gaussian datum and write probes.csv plus checkpoints.
    Simulate {
        #[arg(long, value_enum, default_value = "power")]
        model: ModelArg,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 32.0)]
        half_width: f64,
        #[arg(long, default_value_t = 2e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, value_enum, default_value = "lab")]
        frame: FrameArg,
        #[arg(long, default_value_t = 10)]
        probes: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a dispersion ODE (or the gap system) and print CSV.
    Ode {
        #[arg(long, value_enum, default_value = "sigma")]
        kind: KindArg,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Integrate the gap `τ_0 − τ_σ` instead.
        #[arg(long)]
        gap: bool,
    },
    /// Distances between two checkpoints, as JSON.
    Metrics {
        a: PathBuf,
        b: PathBuf,
        #[arg(long = "s")]
        s: Vec<f64>,
    },
    /// Apply the Fokker-Planck semigroup to a density checkpoint.
    Fp {
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate one Fokker-Planck lemma and print a JSON verdict.
    FpCheck {
        #[arg(value_enum)]
        lemma: LemmaArg,
        #[arg(long)]
        s: f64,
        /// Density checkpoint; the contraction check also accepts a Gaussian.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        mean: Option<f64>,
        #[arg(long)]
        var: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        c: f64,
    },
}

fn run_config(path: &Path, output: Option<PathBuf>) -> Result<bool> {
    let (mut cfg, text) = ExperimentConfig::load(path)?;
    if let Some(o) = output {
        cfg.output = o;
    }
    let rep = experiments::run(&cfg)?;
    let manifest = report::write_run(&cfg, &text, std::slice::from_ref(&rep))?;
    for c in &rep.checks {
        println!("{:<32} {:>14.6e}  {:<16} {}", c.name, c.value, c.bound, if c.pass { "pass" } else { "FAIL" });
    }
    println!("manifest: {}", manifest.display());
    println!("verdict: {}", if rep.verdict() { "pass" } else { "FAIL" });
    Ok(rep.verdict())
}

fn simulate(cmd: &Command) -> Result<()> {
    let Command::Simulate { model, sigma, dim, n, half_width, dt, t_end, frame, probes, amplitude, width, out } = cmd else {
        unreachable!()
    };
    let grid = Grid::new(*dim, *n, *half_width)?;
    let model = match model {
        ModelArg::Power => Model::Power { sigma: *sigma },
        ModelArg::Rescaled => Model::RescaledPower { sigma: *sigma },
        ModelArg::Log => Model::Log,
    };
    let count = (*probes).max(1);
    let times: Vec<f64> = (1..=count).map(|k| t_end * k as f64 / count as f64).collect();
    let u0 = Gaussian { amplitude: *amplitude, width: *width, ..Gaussian::unit() }.sample(grid);
    let config = match frame {
        FrameArg::Lab => EvolutionConfig::lab(*dt, *t_end, times),
        FrameArg::Selfsim => {
            let kind = match model {
                Model::Log => OdeKind::Logarithmic,
                _ => OdeKind::SigmaPower { sigma: *sigma, d: *dim },
            };
            EvolutionConfig::self_similar(*dt, *t_end, times, solve_dispersion(kind, *t_end, 1e-10)?)
        }
    };
    let run = evolve(&u0, model, &config)?;
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("probes.csv"))?;
    w.write_record(ProbeRecord::COLUMNS)?;
    for p in &run.probes {
        w.write_record(p.row().iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    for (k, snap) in run.snapshots.iter().enumerate() {
        checkpoint::write_field(&out.join(format!("field_{k:04}.nlsf")), snap)?;
    }
    Ok(())
}

fn ode(cmd: &Command) -> Result<()> {
    let Command::Ode { kind, alpha, sigma, dim, t_end, tol, samples, gap } = cmd else { unreachable!() };
    let ts: Vec<f64> = (0..=*samples).map(|k| t_end * k as f64 / *samples as f64).collect();
    let mut w = csv::Writer::from_writer(std::io::stdout());
    if *gap {
        let g = tau_gap(*sigma, *dim, &ts, *tol)?;
        let kind = OdeKind::SigmaPower { sigma: *sigma, d: *dim };
        w.write_record(["t", "tau", "tau_dot", "residual", "w", "wdot", "bound"])?;
        for i in 0..g.t.len() {
            let (tau, td) = (g.tau0[i] - g.w[i], g.tau0_dot[i] - g.w_dot[i]);
            let res = nlslab_core::ode::residual_of(kind, &[tau], &[td])[0];
            let t = g.t[i];
            let bound = sigma * t * (t + 2.0).ln().powf(1.5);
            w.write_record([t, tau, td, res, g.w[i], g.w_dot[i], bound].map(|v| format!("{v:e}")))?;
        }
    } else {
        let kind = match kind {
            KindArg::Generic => OdeKind::GenericPower { alpha: *alpha },
            KindArg::Sigma => OdeKind::SigmaPower { sigma: *sigma, d: *dim },
            KindArg::Log => OdeKind::Logarithmic,
        };
        let curve = solve_dispersion(kind, *t_end, *tol)?;
        let res = first_integral_residual(&curve);
        let max_res = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        w.write_record(["t", "tau", "tau_dot", "residual"])?;
        for &t in &ts {
            let (tau, td) = (curve.tau_at(t)?, curve.tau_dot_at(t)?);
            let r = nlslab_core::ode::residual_of(kind, &[tau], &[td])[0];
            w.write_record([t, tau, td, r].map(|v| format!("{v:e}")))?;
        }
        eprintln!("max sample residual {max_res:e}");
    }
    w.flush()?;
    Ok(())
}

fn metrics(a: &Path, b: &Path, s: &[f64]) -> Result<serde_json::Value> {
    let p = checkpoint::read(a)?.to_density().normalized()?;
    let q = checkpoint::read(b)?.to_density().normalized()?;
    let w2 = if p.grid.dim() == 1 {
        let (m1, v1) = gaussian_fit(&p);
        let (m2, v2) = gaussian_fit(&q);
        Some(w2_gaussian(m1, v1, m2, v2)?)
    } else {
        None
    };
    let d = p.grid.dim() as f64;
    let orders: Vec<f64> = if s.is_empty() { vec![(1.0 + d) / 2.0 + 0.5] } else { s.to_vec() };
    let mut hs = BTreeMap::new();
    for order in orders {
        hs.insert(format!("{order}"), hs_negative_compare(&p, &q, order)?.hs);
    }
    Ok(json!({ "w1": w1(&p, &q)?, "w2_gaussian_fit": w2, "l1": l1_distance(&p, &q)?, "hs": hs }))
}

fn fp_check(lemma: LemmaArg, s: f64, input: Option<&PathBuf>, mean: Option<f64>, var: Option<f64>, c: f64) -> Result<serde_json::Value> {
    let load = || -> Result<nlslab_core::Density> {
        let Some(path) = input else { bail!("--input is required") };
        Ok(checkpoint::read(path)?.to_density())
    };
    Ok(match lemma {
        LemmaArg::Contraction => {
            let datum = match (mean, var) {
                (Some(mean), Some(var)) => FpDatum::Gaussian { mean, var },
                _ => FpDatum::Grid(load()?),
            };
            let r = fp_contraction_check(&datum, s)?;
            json!({ "lemma": "contraction", "s": s, "lhs": r.lhs, "rhs": r.rhs, "ok": r.ok })
        }
        LemmaArg::Weight => {
            let r = fp_weight_bound_check(&load()?, s, c)?;
            json!({ "lemma": "weight", "s": s, "c": c, "lhs": r.lhs, "rhs": r.rhs, "ok": r.ok })
        }
        LemmaArg::Trade => {
            let d = load()?;
            let r = fp_derivative_trade_check(&d.grid, d.values(), s);
            json!({ "lemma": "trade", "s": s, "residual": r, "ok": r <= 1e-8 })
        }
    })
}

fn dispatch(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Run { config, output } => return run_config(config, output.clone()),
        Command::List => {
            for name in ExperimentName::ALL {
                println!("{:<20} {}", name.as_str(), name.summary());
            }
        }
        Command::Preset { name } => {
            let name: ExperimentName = name.parse()?;
            print!("{}", ExperimentConfig::preset(name).to_toml());
        }
        Command::Verify { manifest } => {
            let out = report::verify(manifest)?;
            for m in &out.mismatched {
                println!("mismatch: {m}");
            }
            println!("files: {}", if out.ok() { "ok" } else { "MODIFIED" });
            println!("verdict: {}", if out.manifest.verdict { "pass" } else { "FAIL" });
            return Ok(out.ok());
        }
        cmd @ Command::Simulate { .. } => simulate(cmd)?,
        cmd @ Command::Ode { .. } => ode(cmd)?,
        Command::Metrics { a, b, s } => println!("{}", serde_json::to_string_pretty(&metrics(a, b, s)?)?),
        Command::Fp { s, lambda, input, output } => {
            let cp = checkpoint::read(input).with_context(|| format!("reading {}", input.display()))?;
            let (frame, time) = match &cp {
                Checkpoint::Field(f) => (f.frame, f.time),
                Checkpoint::Density { frame, time, .. } => (*frame, *time),
            };
            let out = fp_propagate(&cp.to_density(), *s, *lambda)?;
            checkpoint::write_density(output, &out, frame, time)?;
        }
        Command::FpCheck { lemma, s, input, mean, var, c } => {
            let v = fp_check(*lemma, *s, input.as_ref(), *mean, *var, *c)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            return Ok(v["ok"].as_bool().unwrap_or(false));
        }
    }
    std::io::stdout().flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

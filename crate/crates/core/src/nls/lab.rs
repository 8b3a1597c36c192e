use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Frame};
use crate::grid::Grid;
use crate::nls::functionals::{
    j_norm, kinetic_energy, potential_energy, power_integral,
};
use crate::nls::lens::{LensField, LensStepper};
use crate::nls::model::{Model, DEFAULT_LOG_FLOOR};
use crate::ode::DispersionCurve;
use crate::par;
use crate::spectral;

pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Strang splitting `N(dt/2) K(dt) N(dt/2)` in the lab frame.
#[derive(Debug, Clone)]
pub struct LabStepper {
    pub grid: Grid,
    pub model: Model,
    pub log_floor: f64,
    dt: f64,
    kinetic: Vec<Complex64>,
}

pub fn kinetic_table(grid: &Grid, coefficient: f64) -> Vec<Complex64> {
    (0..grid.len())
        .map(|k| Complex64::from_polar(1.0, -coefficient * grid.wavenumber_sq(k)))
        .collect()
}

impl LabStepper {
    pub fn new(grid: Grid, model: Model, dt: f64, log_floor: f64) -> Self {
        Self { grid, model, log_floor, dt, kinetic: kinetic_table(&grid, 0.5 * dt) }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn set_dt(&mut self, dt: f64) {
        if dt != self.dt {
            self.dt = dt;
            self.kinetic = kinetic_table(&self.grid, 0.5 * dt);
        }
    }

    /// Exact flow of `i∂_t u = N(|u|²)u` over `h`.
    pub fn nonlinear(&self, values: &mut [Complex64], h: f64) {
        let (model, floor) = (self.model, self.log_floor);
        if model == Model::Free {
            return;
        }
        par::for_each_mut(values, |_, z| {
            *z *= Complex64::from_polar(1.0, -h * model.rate(z.norm_sqr(), floor));
        });
    }

    pub fn step(&self, field: &mut ComplexField) -> Result<()> {
        let h = self.dt;
        self.nonlinear(&mut field.values, 0.5 * h);
        spectral::apply_table(&self.grid, &mut field.values, &self.kinetic);
        self.nonlinear(&mut field.values, 0.5 * h);
        field.time += h;
        if !field.is_finite() {
            return Err(Error::NonFinite { t: field.time });
        }
        Ok(())
    }
}

/// One Strang step with the default log floor.
pub fn step_strang(field: &ComplexField, dt: f64, model: Model) -> Result<ComplexField> {
    if field.frame != Frame::Lab {
        return Err(Error::InvalidParameter("step_strang needs a lab-frame field".into()));
    }
    let mut out = field.clone();
    LabStepper::new(field.grid, model, dt, DEFAULT_LOG_FLOOR).step(&mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub probe_times: Vec<f64>,
    pub log_floor: f64,
    pub frame: Frame,
    /// Lens scale `R(t)` for self-similar runs.
    pub dispersion: Option<DispersionCurve>,
    /// Largest tolerated outer-shell mass fraction; `None` disables the check.
    pub boundary_tolerance: Option<f64>,
}

impl EvolutionConfig {
    pub fn lab(dt: f64, t_end: f64, probe_times: Vec<f64>) -> Self {
        Self {
            dt,
            t_end,
            probe_times,
            log_floor: DEFAULT_LOG_FLOOR,
            frame: Frame::Lab,
            dispersion: None,
            boundary_tolerance: Some(BOUNDARY_TOLERANCE),
        }
    }

    pub fn self_similar(dt: f64, t_end: f64, probe_times: Vec<f64>, curve: DispersionCurve) -> Self {
        Self { frame: Frame::SelfSimilar, dispersion: Some(curve), ..Self::lab(dt, t_end, probe_times) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.log_floor >= 1e-300 && self.log_floor <= 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "log floor {} outside [1e-300, 1e-12]",
                self.log_floor
            )));
        }
        let p = &self.probe_times;
        if p.iter().any(|&t| t < 0.0 || t > self.t_end * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter("probe times must lie in [0, t_end]".into()));
        }
        if p.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("probe times must be increasing".into()));
        }
        if let Some(gap) = p.windows(2).map(|w| w[1] - w[0]).reduce(f64::min) {
            if self.dt > gap * (1.0 + 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "dt = {} exceeds the smallest probe gap {gap}",
                    self.dt
                )));
            }
        }
        if self.frame == Frame::SelfSimilar && self.dispersion.is_none() {
            return Err(Error::InvalidParameter("self-similar runs need a dispersion curve".into()));
        }
        Ok(())
    }
}

/// Functionals recorded at one probe time.
///
/// `energy`, `kinetic` (`½‖∇u‖²`) and `potential_term` (`∫G(|u|²)`) refer
/// to the lab-frame unknown in both frames. The `pe_*` fields hold the
/// self-similar pseudo-energy components and are zero in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub j_norm: f64,
    pub pc_quantity: f64,
    pub pc_rhs: f64,
    pub kinetic: f64,
    pub potential_term: f64,
    pub boundary_mass: f64,
    pub pe_kinetic: f64,
    pub pe_confinement: f64,
    pub pe_nonlinear: f64,
}

impl ProbeRecord {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "mass",
        "energy",
        "j_norm",
        "pc_quantity",
        "pc_rhs",
        "kinetic",
        "potential_term",
        "boundary_mass",
        "pe_kinetic",
        "pe_confinement",
        "pe_nonlinear",
    ];

    pub fn row(&self) -> [f64; 12] {
        [
            self.t,
            self.mass,
            self.energy,
            self.j_norm,
            self.pc_quantity,
            self.pc_rhs,
            self.kinetic,
            self.potential_term,
            self.boundary_mass,
            self.pe_kinetic,
            self.pe_confinement,
            self.pe_nonlinear,
        ]
    }

    pub fn pseudo_energy(&self) -> f64 {
        self.pe_kinetic + self.pe_confinement + self.pe_nonlinear
    }
}

/// Lab-frame probe. The pseudoconformal pair uses the model's `σ` and is
/// zero for the log and free models.
pub fn probe_lab(field: &ComplexField, model: Model) -> ProbeRecord {
    let t = field.time;
    let kinetic = kinetic_energy(field);
    let potential_term = potential_energy(field, model);
    let j = j_norm(field, t);
    let (pc_quantity, pc_rhs) = match model.sigma() {
        Some(sigma) => {
            let p = power_integral(&field.grid, &field.values, sigma);
            let d = field.grid.dim() as f64;
            (
                0.5 * j * j + t * t / (sigma + 1.0) * p,
                t / (sigma + 1.0) * (2.0 - d * sigma) * p,
            )
        }
        None => (0.0, 0.0),
    };
    ProbeRecord {
        t,
        mass: field.mass(),
        energy: kinetic + potential_term,
        j_norm: j,
        pc_quantity,
        pc_rhs,
        kinetic,
        potential_term,
        boundary_mass: spectral::boundary_mass(field),
        pe_kinetic: 0.0,
        pe_confinement: 0.0,
        pe_nonlinear: 0.0,
    }
}

/// Splits each probe interval into equal steps no longer than `dt`.
pub(crate) fn schedule(t0: f64, targets: &[f64], dt: f64) -> Vec<(f64, usize, f64)> {
    let mut out = Vec::new();
    let mut t = t0;
    for &target in targets {
        let gap = target - t;
        if gap <= 0.0 {
            out.push((target, 0, 0.0));
            continue;
        }
        let steps = ((gap / dt) - 1e-9).ceil().max(1.0) as usize;
        out.push((target, steps, gap / steps as f64));
        t = target;
    }
    out
}

fn check_boundary(rec: &ProbeRecord, tol: Option<f64>) -> Result<()> {
    match tol {
        Some(tol) if rec.boundary_mass > tol => {
            Err(Error::BoundaryMass { t: rec.t, ratio: rec.boundary_mass })
        }
        _ => Ok(()),
    }
}

/// Outcome of [`evolve`]: probes plus the final state. Self-similar runs
/// return the lens-frame field in `lens`.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub probes: Vec<ProbeRecord>,
    pub field: ComplexField,
    pub lens: Option<LensField>,
    pub snapshots: Vec<ComplexField>,
}

/// Runs to `t_end`, recording a probe (and a snapshot) at each probe time.
///
/// For self-similar runs `field` is the lens-frame unknown at `t = 0`,
/// where `R = 1` and `Ṙ = 0`, so it coincides with the lab data.
pub fn evolve(field: &ComplexField, model: Model, config: &EvolutionConfig) -> Result<Evolution> {
    config.validate()?;
    model.validate(field.grid.dim())?;
    let mut targets = config.probe_times.clone();
    if targets.last().is_none_or(|&t| t < config.t_end) {
        targets.push(config.t_end);
    }
    let probe_set = &config.probe_times;
    match config.frame {
        Frame::Lab => {
            let mut u = field.clone();
            u.frame = Frame::Lab;
            let mut stepper = LabStepper::new(u.grid, model, config.dt, config.log_floor);
            let mut probes = Vec::new();
            let mut snapshots = Vec::new();
            for (target, steps, h) in schedule(u.time, &targets, config.dt) {
                if steps > 0 {
                    stepper.set_dt(h);
                    for _ in 0..steps {
                        let before = u.values.clone();
                        if let Err(e) = stepper.step(&mut u) {
                            u.values = before;
                            u.time -= h;
                            return Err(e);
                        }
                    }
                    u.time = target;
                }
                if probe_set.contains(&target) {
                    let rec = probe_lab(&u, model);
                    check_boundary(&rec, config.boundary_tolerance)?;
                    probes.push(rec);
                    snapshots.push(u.clone());
                }
            }
            Ok(Evolution { probes, field: u, lens: None, snapshots })
        }
        Frame::SelfSimilar => {
            let curve = config.dispersion.clone().expect("validated");
            let stepper = LensStepper::new(field.grid, model, curve, config.log_floor);
            let mut v = LensField::at_origin(field.clone());
            let mut probes = Vec::new();
            let mut snapshots = Vec::new();
            for (target, steps, h) in schedule(v.state.t, &targets, config.dt) {
                for _ in 0..steps {
                    stepper.step(&mut v, h)?;
                }
                if steps > 0 {
                    stepper.sync(&mut v, target)?;
                }
                if probe_set.contains(&target) {
                    let rec = v.probe(model);
                    check_boundary(&rec, config.boundary_tolerance)?;
                    probes.push(rec);
                    snapshots.push(v.field.clone());
                }
            }
            Ok(Evolution { probes, field: v.field.clone(), lens: Some(v), snapshots })
        }
    }
}

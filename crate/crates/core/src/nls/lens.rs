//! Lens-transformed (self-similar) frames.
//!
//! The lab unknown is recovered from the lens unknown `v` by
//! `u(t,x) = R^{-d/2} v(t, x/R) e^{iṘ|x|²/(2R)} e^{iΘ}`, under which
//! `i∂_t v + (1/2R²)Δv = (RR̈/2)|y|² v + N(R^{-d}|v|²) v`.
//! The spatially constant part of `N` is carried by the gauge phase `Θ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Density, Frame};
use crate::grid::Grid;
use crate::nls::functionals::{power_integral, pseudo_energy};
use crate::nls::lab::{schedule, ProbeRecord};
use crate::nls::model::Model;
use crate::ode::DispersionCurve;
use crate::par;
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensState {
    pub t: f64,
    pub scale: f64,
    pub scale_rate: f64,
    pub gauge_phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LensField {
    pub field: ComplexField,
    pub state: LensState,
}

fn axis_coord(grid: &Grid, flat: usize, axis: usize) -> f64 {
    grid.coord(grid.index(flat)[axis])
}

impl LensField {
    /// Lens frame with `R = 1`, `Ṙ = 0` at the field's time.
    pub fn at_origin(mut field: ComplexField) -> Self {
        field.frame = Frame::SelfSimilar;
        let state = LensState { t: field.time, scale: 1.0, scale_rate: 0.0, gauge_phase: 0.0 };
        Self { field, state }
    }

    /// Pulls a lab field into the lens frame `(R, Ṙ)` on `dst`.
    pub fn from_lab(u: &ComplexField, scale: f64, scale_rate: f64, dst: &Grid) -> Result<Self> {
        let d = u.grid.dim() as i32;
        let mut values = spectral::dilate_values(&u.grid, &u.values, dst, scale)?;
        let amp = scale.powf(d as f64 / 2.0);
        par::for_each_mut(&mut values, |flat, z| {
            *z *= Complex64::from_polar(amp, -scale_rate * scale * dst.radius_sq(flat) / 2.0);
        });
        let field = ComplexField { grid: *dst, values, frame: Frame::SelfSimilar, time: u.time };
        let state = LensState { t: u.time, scale, scale_rate, gauge_phase: 0.0 };
        Ok(Self { field, state })
    }

    /// Reconstructs the lab field on `dst`.
    pub fn to_lab(&self, dst: &Grid) -> Result<ComplexField> {
        let LensState { scale, scale_rate, gauge_phase, t } = self.state;
        let d = dst.dim() as f64;
        let mut values = spectral::dilate_values(&self.field.grid, &self.field.values, dst, 1.0 / scale)?;
        let amp = scale.powf(-d / 2.0);
        par::for_each_mut(&mut values, |flat, z| {
            let phase = scale_rate * dst.radius_sq(flat) / (2.0 * scale) + gauge_phase;
            *z *= Complex64::from_polar(amp, phase);
        });
        Ok(ComplexField { grid: *dst, values, frame: Frame::Lab, time: t })
    }

    /// Density `S^d |u(t, S·y)|²` on `dst` for an arbitrary length scale `S`.
    pub fn density_at_scale(&self, target_scale: f64, dst: &Grid) -> Result<Density> {
        let ratio = target_scale / self.state.scale;
        let rho = self.field.density_values();
        let d = dst.dim() as i32;
        let mut out = spectral::dilate_real(&self.field.grid, &rho, dst, ratio)?;
        let a = ratio.powi(d);
        let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in out.iter_mut() {
            *v *= a;
            if *v < 0.0 && *v > -1e-10 * peak * a {
                *v = 0.0;
            }
        }
        Density::new(*dst, out.into_iter().map(|v| v.max(0.0)).collect())
    }

    /// `‖∇u‖²` of the lab unknown.
    pub fn lab_gradient_sq(&self) -> f64 {
        lab_gradient_sq(&self.field, &self.state)
    }

    /// `‖J(t)u‖` of the lab unknown.
    pub fn lab_j_norm(&self) -> f64 {
        lab_j_norm(&self.field, &self.state, self.state.t)
    }

    pub fn probe(&self, model: Model) -> ProbeRecord {
        let v = &self.field;
        let g = v.grid;
        let LensState { t, scale, .. } = self.state;
        let d = g.dim();
        let rd = scale.powi(d as i32);
        let kinetic = 0.5 * self.lab_gradient_sq();
        let potential_term =
            par::sum(&v.values, |_, z| model.energy_density(z.norm_sqr() / rd)) * g.cell() * rd;
        let j = self.lab_j_norm();
        let (pc_quantity, pc_rhs) = match model.sigma() {
            Some(sigma) => {
                let p = power_integral(&g, &v.values, sigma) * rd.powf(-sigma);
                (
                    0.5 * j * j + t * t / (sigma + 1.0) * p,
                    t / (sigma + 1.0) * (2.0 - d as f64 * sigma) * p,
                )
            }
            None => (0.0, 0.0),
        };
        let pe = match model {
            Model::RescaledPower { .. } | Model::Log => pseudo_energy(v, model, scale).ok(),
            _ => None,
        };
        ProbeRecord {
            t,
            mass: v.mass(),
            energy: kinetic + potential_term,
            j_norm: j,
            pc_quantity,
            pc_rhs,
            kinetic,
            potential_term,
            boundary_mass: spectral::boundary_mass(v),
            pe_kinetic: pe.map_or(0.0, |p| p.kinetic),
            pe_confinement: pe.map_or(0.0, |p| p.confinement),
            pe_nonlinear: pe.map_or(0.0, |p| p.nonlinear),
        }
    }
}

/// `‖∇_x u‖² = ‖∇_y v / R + iṘ y v‖²` for a lens-frame `v`.
pub fn lab_gradient_sq(v: &ComplexField, state: &LensState) -> f64 {
    let g = v.grid;
    let (r, rd) = (state.scale, state.scale_rate);
    (0..g.dim())
        .map(|axis| {
            let dv = spectral::partial(&g, &v.values, axis);
            par::sum(&v.values, |flat, z| {
                let y = axis_coord(&g, flat, axis);
                (dv[flat] / r + Complex64::new(0.0, rd * y) * z).norm_sqr()
            })
        })
        .sum::<f64>()
        * g.cell()
}

/// `‖J(t)u‖ = ‖(R − tṘ) y v + (it/R)∇_y v‖` for a lens-frame `v`.
pub fn lab_j_norm(v: &ComplexField, state: &LensState, t: f64) -> f64 {
    let g = v.grid;
    let (r, rd) = (state.scale, state.scale_rate);
    let a = r - t * rd;
    let b = Complex64::new(0.0, t / r);
    ((0..g.dim())
        .map(|axis| {
            let dv = spectral::partial(&g, &v.values, axis);
            par::sum(&v.values, |flat, z| {
                let y = axis_coord(&g, flat, axis);
                (z * (a * y) + b * dv[flat]).norm_sqr()
            })
        })
        .sum::<f64>()
        * g.cell())
    .sqrt()
}

/// Σ-norm of the free pullback `e^{-itΔ/2}u`, from a lens-frame `v`:
/// `‖u‖ + ‖∇u‖ + ‖J(t)u‖`.
pub fn pullback_sigma_norm(v: &ComplexField, state: &LensState) -> f64 {
    v.mass().sqrt() + lab_gradient_sq(v, state).sqrt() + lab_j_norm(v, state, state.t)
}

fn gauss_integral<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64) -> Result<f64> {
    const X: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut acc = 0.0;
    for (x, w) in X.iter().zip(W) {
        acc += w * f(m + h * x)?;
    }
    Ok(acc * h)
}

/// Strang stepper for a lens scale `R(t)` taken from a dispersion curve.
/// The kinetic coefficient is integrated over the step; potential and
/// nonlinear coefficients are frozen at the step midpoint.
#[derive(Debug, Clone)]
pub struct LensStepper {
    pub grid: Grid,
    pub model: Model,
    pub curve: DispersionCurve,
    pub log_floor: f64,
    r2: Vec<f64>,
}

impl LensStepper {
    pub fn new(grid: Grid, model: Model, curve: DispersionCurve, log_floor: f64) -> Self {
        Self { r2: grid.radius_sq_table(), grid, model, curve, log_floor }
    }

    fn diagonal(&self, values: &mut [Complex64], h: f64, r: f64) {
        let (model, floor, dim) = (self.model, self.log_floor, self.grid.dim());
        let cv = 0.5 * r * self.curve.kind().accel(r);
        let ln_r = r.ln();
        let r2 = &self.r2;
        par::for_each_mut(values, |flat, z| {
            let rate = cv * r2[flat] + model.lens_rate(z.norm_sqr(), ln_r, dim, floor);
            *z *= Complex64::from_polar(1.0, -h * rate);
        });
    }

    pub fn step(&self, v: &mut LensField, h: f64) -> Result<()> {
        let t = v.state.t;
        let r_mid = self.curve.tau_at(t + 0.5 * h)?;
        let k = gauss_integral(|s| Ok(0.5 / self.curve.tau_at(s)?.powi(2)), t, t + h)?;
        self.diagonal(&mut v.field.values, 0.5 * h, r_mid);
        let g = self.grid;
        spectral::apply_multiplier(&g, &mut v.field.values, |q| {
            Complex64::from_polar(1.0, -k * g.wavenumber_sq(q))
        });
        self.diagonal(&mut v.field.values, 0.5 * h, r_mid);
        v.state.gauge_phase -= h * self.model.gauge_rate(r_mid.ln(), g.dim());
        self.sync(v, t + h)?;
        if !v.field.is_finite() {
            return Err(Error::NonFinite { t: v.state.t });
        }
        Ok(())
    }

    /// Sets the clock to `t` and refreshes `R`, `Ṙ` from the curve.
    pub fn sync(&self, v: &mut LensField, t: f64) -> Result<()> {
        v.state.t = t;
        v.state.scale = self.curve.tau_at(t)?;
        v.state.scale_rate = self.curve.tau_dot_at(t)?;
        v.field.time = t;
        Ok(())
    }

    pub fn run_to(&self, v: &mut LensField, target: f64, dt: f64) -> Result<()> {
        for (tt, steps, h) in schedule(v.state.t, &[target], dt) {
            for _ in 0..steps {
                self.step(v, h)?;
            }
            self.sync(v, tt)?;
        }
        Ok(())
    }
}

/// Lens frame whose scale free-streams (`R̈ = 0`) and absorbs every
/// quadratic phase the solution develops: the quadratic part of each
/// nonlinear phase and, after each step, the residual chirp measured from
/// `Im ∫ v̄ y·∇v`. Steps grow geometrically, `h = clamp(growth·t)`.
#[derive(Debug, Clone)]
pub struct AdaptiveLens {
    pub grid: Grid,
    pub model: Model,
    pub log_floor: f64,
    pub growth: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    r2: Vec<f64>,
}

impl AdaptiveLens {
    pub fn new(grid: Grid, model: Model, log_floor: f64, growth: f64, dt_min: f64) -> Self {
        Self {
            r2: grid.radius_sq_table(),
            grid,
            model,
            log_floor,
            growth,
            dt_min,
            dt_max: f64::INFINITY,
        }
    }

    fn step_size(&self, t: f64) -> f64 {
        (self.growth * t).clamp(self.dt_min, self.dt_max)
    }

    fn absorb_nonlinear(&self, v: &mut LensField, h: f64) -> Result<()> {
        let (model, floor, dim) = (self.model, self.log_floor, self.grid.dim());
        let r = v.state.scale;
        let ln_r = r.ln();
        let phase: Vec<f64> =
            par::map(&v.field.values, |_, z| -h * model.lens_rate(z.norm_sqr(), ln_r, dim, floor));
        let rho = v.field.density_values();
        let q: Vec<f64> = self.r2.iter().map(|x| 0.5 * x).collect();
        let s0 = par::sum(&rho, |_, w| *w);
        let s1 = par::sum(&rho, |i, w| w * q[i]);
        let s2 = par::sum(&rho, |i, w| w * q[i] * q[i]);
        let t0 = par::sum(&rho, |i, w| w * phase[i]);
        let t1 = par::sum(&rho, |i, w| w * phase[i] * q[i]);
        let det = s0 * s2 - s1 * s1;
        let (c0, c2) = if s0 > 0.0 && det > 1e-300 {
            ((t0 * s2 - t1 * s1) / det, (s0 * t1 - s1 * t0) / det)
        } else {
            (0.0, 0.0)
        };
        par::for_each_mut(&mut v.field.values, |i, z| {
            *z *= Complex64::from_polar(1.0, phase[i] - c0 - c2 * q[i]);
        });
        v.state.gauge_phase += c0 - h * model.gauge_rate(ln_r, dim);
        v.state.scale_rate += c2 / r;
        Ok(())
    }

    fn absorb_chirp(&self, v: &mut LensField) {
        let g = self.grid;
        let mut num = 0.0;
        for axis in 0..g.dim() {
            let dv = spectral::partial(&g, &v.field.values, axis);
            num += par::sum(&v.field.values, |flat, z| {
                axis_coord(&g, flat, axis) * (z.conj() * dv[flat]).im
            });
        }
        let den = par::sum(&v.field.values, |flat, z| self.r2[flat] * z.norm_sqr());
        if den <= 0.0 {
            return;
        }
        let beta = num / den;
        let r2 = &self.r2;
        par::for_each_mut(&mut v.field.values, |flat, z| {
            *z *= Complex64::from_polar(1.0, -0.5 * beta * r2[flat]);
        });
        v.state.scale_rate += beta / v.state.scale;
    }

    pub fn step(&self, v: &mut LensField, h: f64) -> Result<()> {
        self.absorb_nonlinear(v, 0.5 * h)?;
        let r0 = v.state.scale;
        let r1 = r0 + v.state.scale_rate * h;
        if !(r1 > 0.0) {
            return Err(Error::Domain(format!("lens scale collapsed at t = {}", v.state.t)));
        }
        let k = h / (2.0 * r0 * r1);
        let g = self.grid;
        spectral::apply_multiplier(&g, &mut v.field.values, |q| {
            Complex64::from_polar(1.0, -k * g.wavenumber_sq(q))
        });
        v.state.scale = r1;
        v.state.t += h;
        v.field.time = v.state.t;
        self.absorb_nonlinear(v, 0.5 * h)?;
        self.absorb_chirp(v);
        if !v.field.is_finite() {
            return Err(Error::NonFinite { t: v.state.t });
        }
        Ok(())
    }

    /// Advances to exactly `target`.
    pub fn run_to(&self, v: &mut LensField, target: f64) -> Result<()> {
        while v.state.t < target {
            let h = self.step_size(v.state.t).min(target - v.state.t);
            self.step(v, h)?;
            if target - v.state.t < 1e-12 * target.max(1.0) {
                v.state.t = target;
                v.field.time = target;
            }
        }
        Ok(())
    }
}

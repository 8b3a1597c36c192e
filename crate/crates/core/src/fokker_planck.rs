//! Harmonic Fokker-Planck semigroup `e^{sL}`, `L = Δ + 2 div(y ·)`.
//!
//! The Mehler kernel acts as a contraction `y ↦ e^{-2s}y` followed by a
//! Gaussian convolution of per-axis variance `(1 − e^{-4s})/2`; both are
//! applied in Fourier space as `φ̂(e^{-2s}ξ)·exp(−|ξ|²(1−e^{-4s})/4)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Density;
use crate::grid::Grid;
use crate::par;
use crate::spectral;
use crate::transport::{w2_1d, w2_gaussian};

/// Semigroup time `s` and dilation `λ`: the flow is `e^{(s/λ)L}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpFlowParams {
    pub s: f64,
    pub time_dilation: f64,
}

impl FpFlowParams {
    pub fn new(s: f64, time_dilation: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be finite and >= 0, got {s}")));
        }
        if !(time_dilation > 0.0 && time_dilation <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "time dilation must lie in (0, 2], got {time_dilation}"
            )));
        }
        Ok(Self { s, time_dilation })
    }

    pub fn effective_time(&self) -> f64 {
        self.s / self.time_dilation
    }
}

/// `Γ = π^{-d/2} e^{-|y|²}`.
pub fn gamma_profile(grid: &Grid) -> Result<Density> {
    let needed = 6.0 / 2f64.sqrt();
    if grid.half_width() < needed {
        return Err(Error::InvalidGrid(format!(
            "half width {} covers fewer than 6 standard deviations of Γ",
            grid.half_width()
        )));
    }
    let d = grid.dim() as f64;
    Density::from_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        PI.powf(-d / 2.0) * (-r2).exp()
    })
}

/// `e^{sL}` applied to a real (possibly signed) grid function.
pub fn fp_propagate_values(grid: &Grid, values: &[f64], s: f64) -> Vec<f64> {
    if s == 0.0 {
        return values.to_vec();
    }
    let c: Vec<Complex64> = par::map(values, |_, &v| Complex64::new(v, 0.0));
    let contraction = (-2.0 * s).exp();
    let spread = -(-4.0 * s).exp_m1() / 4.0;
    let mut hat = spectral::fourier_at_scaled(grid, &c, grid, contraction);
    par::for_each_mut(&mut hat, |k, z| *z *= (-grid.wavenumber_sq(k) * spread).exp());
    spectral::from_fourier(grid, hat).into_iter().map(|z| z.re).collect()
}

/// `e^{(s/λ)L}ρ`. Rejects outputs with more than `1e-8` of their mass in
/// the outer 5% shell of the box.
pub fn fp_propagate(density: &Density, s: f64, lambda: f64) -> Result<Density> {
    let params = FpFlowParams::new(s, lambda)?;
    let g = density.grid;
    let out = fp_propagate_values(&g, density.values(), params.effective_time());
    if spectral::boundary_fraction(&g, &out.iter().map(|v| v.abs()).collect::<Vec<_>>(), 0.05) > 1e-8 {
        return Err(Error::Aliasing("propagated density reaches the box boundary".into()));
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(*v));
    let cleaned: Vec<f64> = out
        .into_iter()
        .map(|v| if v < 0.0 && v >= -1e-12 * peak { 0.0 } else { v })
        .collect();
    Density::new(g, cleaned)
}

/// Moments of `e^{sL}N(m, v)` in 1D: `N(m e^{-2s}, v e^{-4s} + (1 − e^{-4s})/2)`.
pub fn gaussian_flow(mean: f64, var: f64, s: f64) -> (f64, f64) {
    let e4 = (-4.0 * s).exp();
    (mean * (-2.0 * s).exp(), var * e4 + (1.0 - e4) / 2.0)
}

/// Initial datum for the contraction check.
#[derive(Debug, Clone, PartialEq)]
pub enum FpDatum {
    Gaussian { mean: f64, var: f64 },
    Grid(Density),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `W2(e^{sL}φ, Γ) ≤ e^{-2s} W2(φ, Γ)`: closed form for Gaussians,
/// quantile coupling on the grid otherwise (1D).
pub fn fp_contraction_check(phi: &FpDatum, s: f64) -> Result<LemmaCheck> {
    let (lhs, rhs) = match phi {
        FpDatum::Gaussian { mean, var } => {
            let (m, v) = gaussian_flow(*mean, *var, s);
            (
                w2_gaussian(m, v, 0.0, 0.5)?,
                (-2.0 * s).exp() * w2_gaussian(*mean, *var, 0.0, 0.5)?,
            )
        }
        FpDatum::Grid(rho) => {
            if rho.grid.dim() != 1 {
                return Err(Error::InvalidParameter("grid contraction check is 1D".into()));
            }
            let rho = rho.normalized()?;
            let gamma = gamma_profile(&rho.grid)?.normalized()?;
            let out = fp_propagate(&rho, s, 1.0)?.normalized()?;
            (w2_1d(&out, &gamma)?, (-2.0 * s).exp() * w2_1d(&rho, &gamma)?)
        }
    };
    Ok(LemmaCheck { lhs, rhs, ok: lhs <= rhs + 1e-8 })
}

/// `‖|y|² e^{sL}φ‖₁ ≤ C(‖φ‖₁ + ‖|y|²φ‖₁)`.
pub fn fp_weight_bound_check(phi: &Density, s: f64, c: f64) -> Result<LemmaCheck> {
    let g = phi.grid;
    let out = fp_propagate_values(&g, phi.values(), s);
    let lhs = par::sum(&out, |flat, v| g.radius_sq(flat) * v.abs()) * g.cell();
    let l1 = par::sum(phi.values(), |_, v| v.abs()) * g.cell();
    let m2 = par::sum(phi.values(), |flat, v| g.radius_sq(flat) * v.abs()) * g.cell();
    let rhs = c * (l1 + m2);
    Ok(LemmaCheck { lhs, rhs, ok: lhs <= rhs })
}

/// Smallest `C` for which the weight bound holds on this instance.
pub fn fp_weight_constant(phi: &Density, s: f64) -> Result<f64> {
    let r = fp_weight_bound_check(phi, s, 1.0)?;
    Ok(r.lhs / r.rhs)
}

/// `‖e^{sL}∂₀φ − e^{-2s} ∂₀(e^{sL}φ)‖₁`.
pub fn fp_derivative_trade_check(grid: &Grid, phi: &[f64], s: f64) -> f64 {
    let deriv = |v: &[f64]| -> Vec<f64> {
        let c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        spectral::partial(grid, &c, 0).into_iter().map(|z| z.re).collect()
    };
    let a = fp_propagate_values(grid, &deriv(phi), s);
    let b = deriv(&fp_propagate_values(grid, phi, s));
    let e = (-2.0 * s).exp();
    par::sum(&a, |i, x| (x - e * b[i]).abs()) * grid.cell()
}

/// Result of one explicit porous-medium-with-drift step.
#[derive(Debug, Clone, PartialEq)]
pub struct PmeStep {
    pub density: Density,
    pub clipped_mass: f64,
    pub stable: bool,
    pub max_stable_ds: f64,
}

/// Largest step for the explicit scheme, `c·dx²/max(f^σ)` with `c = 1/(2d)`.
pub fn pme_stable_step(density: &Density, sigma: f64) -> f64 {
    let g = density.grid;
    let peak = density.values().iter().fold(0.0f64, |m, v| m.max(*v));
    let diff = if peak > 0.0 { peak.powf(sigma) } else { 1.0 };
    g.dx().powi(2) / (2.0 * g.dim() as f64 * diff)
}

/// One conservative finite-volume step of
/// `∂f = (1/(σ+1))Δf^{σ+1} + 2 div(y f)`, zero flux through the box edge.
pub fn pme_drift_step(density: &Density, ds: f64, sigma: f64) -> Result<PmeStep> {
    if !(ds > 0.0) || !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("need ds > 0 and sigma >= 0 (ds = {ds}, sigma = {sigma})")));
    }
    let g = density.grid;
    let n = g.n();
    let dx = g.dx();
    let f = density.values();
    let pw: Vec<f64> = par::map(f, |_, &v| if v > 0.0 { v.powf(sigma + 1.0) } else { 0.0 });
    let mut out = f.to_vec();
    let face = |fa: f64, fb: f64, pa: f64, pb: f64, y: f64| -> f64 {
        (pb - pa) / ((sigma + 1.0) * dx) + y * (fa + fb)
    };
    let strides: Vec<(usize, usize)> = if g.dim() == 1 { vec![(1, 1)] } else { vec![(n, n), (1, n)] };
    for (stride, _) in strides {
        let mut flux = vec![0.0; g.len()];
        for flat in 0..g.len() {
            let [i, j] = g.index(flat);
            let k = if stride == 1 && g.dim() == 2 { j } else { i };
            if k + 1 >= n {
                continue;
            }
            let nb = flat + stride;
            let y = g.coord(k) + 0.5 * dx;
            flux[flat] = face(f[flat], f[nb], pw[flat], pw[nb], y);
        }
        for flat in 0..g.len() {
            let [i, j] = g.index(flat);
            let k = if stride == 1 && g.dim() == 2 { j } else { i };
            let right = flux[flat];
            let left = if k > 0 { flux[flat - stride] } else { 0.0 };
            out[flat] += ds * (right - left) / dx;
        }
    }
    let mut clipped = 0.0;
    for v in out.iter_mut() {
        if *v < 0.0 {
            clipped -= *v;
            *v = 0.0;
        }
    }
    let max_stable_ds = pme_stable_step(density, sigma);
    Ok(PmeStep {
        density: Density::new(g, out)?,
        clipped_mass: clipped * g.cell(),
        stable: ds <= max_stable_ds,
        max_stable_ds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{moment, variance_along};
    use crate::transport::l1_distance;

    fn grid() -> Grid {
        Grid::new(1, 1024, 16.0).unwrap()
    }

    fn normal(g: Grid, m: f64, v: f64) -> Density {
        Density::from_fn(g, |x| (-(x[0] - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()).unwrap()
    }

    #[test]
    fn gamma_normalized() {
        let gam = gamma_profile(&grid()).unwrap();
        assert!((gam.mass() - 1.0).abs() < 1e-10);
        assert!((moment(&gam, 2).unwrap() - 0.5).abs() < 1e-8);
        assert!(gamma_profile(&Grid::new(1, 64, 3.0).unwrap()).is_err());
    }

    #[test]
    fn gamma_is_stationary() {
        let gam = gamma_profile(&grid()).unwrap();
        let out = fp_propagate(&gam, 0.5, 1.0).unwrap();
        assert!(l1_distance(&out, &gam).unwrap() < 1e-8);
    }

    #[test]
    fn gaussian_closure() {
        let g = grid();
        let (m, v, s) = (1.2, 0.3, 0.4);
        let out = fp_propagate(&normal(g, m, v), s, 1.0).unwrap();
        let (em, ev) = gaussian_flow(m, v, s);
        assert!((crate::spectral::mean_along(&out, 0) - em).abs() < 1e-8);
        assert!((variance_along(&out, 0) - ev).abs() < 1e-8);
        assert!((out.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spike_variance() {
        let g = Grid::new(1, 4096, 8.0).unwrap();
        let spike = normal(g, 0.0, (4.0 * g.dx()).powi(2));
        let v0 = variance_along(&spike, 0);
        let out = fp_propagate(&spike, 0.25, 1.0).unwrap();
        let e = (-1f64).exp();
        let expect = v0 * e + (1.0 - e) / 2.0;
        assert!((variance_along(&out, 0) - expect).abs() < 1e-8);
        assert!(((1.0 - e) / 2.0 - 0.316060).abs() < 1e-6);
    }

    #[test]
    fn dilation_halves_time() {
        let g = grid();
        let p = normal(g, 0.5, 0.8);
        let a = fp_propagate(&p, 0.6, 2.0).unwrap();
        let b = fp_propagate(&p, 0.3, 1.0).unwrap();
        assert!(l1_distance(&a, &b).unwrap() < 1e-14);
        assert!(FpFlowParams::new(0.1, 2.5).is_err());
    }

    #[test]
    fn translated_gaussian_contracts_exactly() {
        let r = fp_contraction_check(&FpDatum::Gaussian { mean: 1.0, var: 0.5 }, 0.5).unwrap();
        let e = (-1f64).exp();
        assert!((r.lhs - e).abs() < 1e-10 && (r.rhs - e).abs() < 1e-10);
        assert!(r.ok);
    }

    #[test]
    fn trade_vanishes_at_zero() {
        let g = grid();
        let p = normal(g, 0.0, 1.0);
        assert_eq!(fp_derivative_trade_check(&g, p.values(), 0.0), 0.0);
    }

    #[test]
    fn pme_conserves_mass() {
        let g = Grid::new(1, 256, 8.0).unwrap();
        let p = normal(g, 0.3, 1.0);
        let r = pme_drift_step(&p, 1e-4, 0.5).unwrap();
        assert!(r.stable);
        assert!((r.density.mass() - p.mass()).abs() < 1e-12);
    }
}

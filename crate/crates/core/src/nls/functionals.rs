use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::nls::model::{rescaled_rate, Model};
use crate::par;
use crate::quad;
use crate::spectral;

fn norm_sq(grid: &Grid, v: &[Complex64]) -> f64 {
    par::sum(v, |_, z| z.norm_sqr()) * grid.cell()
}

/// `½‖∇u‖²`.
pub fn kinetic_energy(field: &ComplexField) -> f64 {
    0.5 * spectral::gradient_norm_sq(&field.grid, &field.values)
}

/// `∫ G(|u|²)` for the model's energy density `G`.
pub fn potential_energy(field: &ComplexField, model: Model) -> f64 {
    par::sum(&field.values, |_, z| model.energy_density(z.norm_sqr())) * field.grid.cell()
}

/// Conserved energy `½‖∇u‖² + ∫ G(|u|²)`.
pub fn energy(field: &ComplexField, model: Model) -> f64 {
    kinetic_energy(field) + potential_energy(field, model)
}

/// `‖u‖_{2σ+2}^{2σ+2}`.
pub fn power_integral(grid: &Grid, values: &[Complex64], sigma: f64) -> f64 {
    par::sum(values, |_, z| {
        let r = z.norm_sqr();
        if r == 0.0 {
            0.0
        } else {
            r * (sigma * r.ln()).exp()
        }
    }) * grid.cell()
}

/// `‖(x + it∇)u‖` by multiplication and spectral differentiation.
pub fn j_norm(field: &ComplexField, t: f64) -> f64 {
    let g = field.grid;
    let mut total = 0.0;
    for axis in 0..g.dim() {
        let d = spectral::partial(&g, &field.values, axis);
        total += par::sum(&field.values, |flat, z| {
            let x = g.coord(g.index(flat)[axis]);
            (z * x + Complex64::new(0.0, t) * d[flat]).norm_sqr()
        });
    }
    (total * g.cell()).sqrt()
}

/// `‖J(t)u‖` through `J(t) = it e^{i|x|²/2t} ∇(e^{-i|x|²/2t} ·)`.
pub fn j_norm_factored(field: &ComplexField, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::Domain("factorized J(t) needs t ≠ 0".into()));
    }
    let g = field.grid;
    let chirped: Vec<Complex64> = par::map(&field.values, |flat, z| {
        z * Complex64::from_polar(1.0, -g.radius_sq(flat) / (2.0 * t))
    });
    let mut total = 0.0;
    for axis in 0..g.dim() {
        let d = spectral::partial(&g, &chirped, axis);
        total += par::sum(&d, |_, z| z.norm_sqr());
    }
    Ok((total * g.cell()).sqrt() * t.abs())
}

/// Pseudoconformal pair `(Q, R)`:
/// `Q = ½‖Ju‖² + t²/(σ+1)·‖u‖^{2σ+2}_{2σ+2}`,
/// `R = t/(σ+1)·(2 − dσ)·‖u‖^{2σ+2}_{2σ+2}`, with `dQ/dt = R`.
pub fn pseudoconformal_probe(field: &ComplexField, t: f64, sigma: f64) -> (f64, f64) {
    let p = power_integral(&field.grid, &field.values, sigma);
    let d = field.grid.dim() as f64;
    let j = j_norm(field, t);
    (
        0.5 * j * j + t * t / (sigma + 1.0) * p,
        t / (sigma + 1.0) * (2.0 - d * sigma) * p,
    )
}

/// Components of the self-similar pseudo-energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoEnergy {
    pub kinetic: f64,
    pub confinement: f64,
    pub nonlinear: f64,
}

impl PseudoEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.confinement + self.nonlinear
    }
}

/// `(1/2τ²)‖∇v‖² + (1/4τ^{dσ})‖yv‖² + (1/((σ+1)τ^{dσ}))∫((ρ^σ−1)/σ)ρ`.
///
/// For [`Model::Log`] this is the limit `(1/2τ²)‖∇v‖² + ¼‖yv‖² + ∫ρ ln ρ`.
pub fn pseudo_energy(v: &ComplexField, model: Model, tau: f64) -> Result<PseudoEnergy> {
    let g = v.grid;
    let d = g.dim() as f64;
    let grad = spectral::gradient_norm_sq(&g, &v.values);
    let ysq = par::sum(&v.values, |flat, z| g.radius_sq(flat) * z.norm_sqr()) * g.cell();
    match model {
        Model::RescaledPower { sigma } => {
            let damp = (-d * sigma * tau.ln()).exp();
            let nl = par::sum(&v.values, |_, z| {
                let r = z.norm_sqr();
                if r == 0.0 {
                    0.0
                } else {
                    rescaled_rate(r, sigma) * r
                }
            }) * g.cell();
            Ok(PseudoEnergy {
                kinetic: grad / (2.0 * tau * tau),
                confinement: damp * ysq / 4.0,
                nonlinear: damp * nl / (sigma + 1.0),
            })
        }
        Model::Log => Ok(PseudoEnergy {
            kinetic: grad / (2.0 * tau * tau),
            confinement: ysq / 4.0,
            nonlinear: par::sum(&v.values, |_, z| Model::Log.energy_density(z.norm_sqr()))
                * g.cell(),
        }),
        other => Err(Error::InvalidParameter(format!(
            "pseudo-energy is defined for the rescaled and log models, not {other:?}"
        ))),
    }
}

/// `Im(v̄ ∇v)` per axis, divided by `mass_norm` when given.
pub fn current_density(v: &ComplexField, mass_norm: Option<f64>) -> Vec<Vec<f64>> {
    let g = v.grid;
    let scale = mass_norm.map_or(1.0, |m| 1.0 / m);
    (0..g.dim())
        .map(|axis| {
            let d = spectral::partial(&g, &v.values, axis);
            par::map(&v.values, |flat, z| (z.conj() * d[flat]).im * scale)
        })
        .collect()
}

/// Spectral divergence of a real vector field.
pub fn divergence(grid: &Grid, field: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for (axis, comp) in field.iter().enumerate() {
        let c: Vec<Complex64> = comp.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let d = spectral::partial(grid, &c, axis);
        for (o, z) in out.iter_mut().zip(d) {
            *o += z.re;
        }
    }
    out
}

/// `S_σ = ((ρ^σ − 1)/σ − ln ρ)·u` pointwise, with the log floored.
pub fn source_term_sigma(field: &ComplexField, sigma: f64, floor: f64) -> Vec<Complex64> {
    par::map(&field.values, |_, z| source_point(*z, sigma, floor))
}

pub fn source_point(z: Complex64, sigma: f64, floor: f64) -> Complex64 {
    let r = z.norm_sqr();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z * (rescaled_rate(r, sigma) - r.max(floor).ln())
}

/// Taylor form `σ u (ln ρ)² ∫₀¹ (1−θ) ρ^{θσ} dθ` with 64 Gauss nodes.
pub fn source_point_taylor(z: Complex64, sigma: f64) -> Complex64 {
    let r = z.norm_sqr();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let l = r.ln();
    let integral = quad::integrate(|th| (1.0 - th) * (th * sigma * l).exp(), 0.0, 1.0, 64);
    z * (sigma * l * l * integral)
}

pub fn source_term_taylor(field: &ComplexField, sigma: f64) -> Vec<Complex64> {
    par::map(&field.values, |_, z| source_point_taylor(*z, sigma))
}

fn z_log(z: Complex64) -> Complex64 {
    let r = z.norm_sqr();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * r.ln()
    }
}

/// `|Im((z₂ ln|z₂|² − z₁ ln|z₁|²)(z̄₂ − z̄₁))|` and `2|z₂ − z₁|²`.
pub fn ch_sides(z1: Complex64, z2: Complex64) -> (f64, f64, f64) {
    let a = z_log(z2) - z_log(z1);
    let b = (z2 - z1).conj();
    ((a * b).im.abs(), 2.0 * (z2 - z1).norm_sqr(), a.norm() * b.norm())
}

/// Pointwise inequality with rounding slack `1e-12·(1 + |A||B|)`.
pub fn ch_inequality_check(z1: Complex64, z2: Complex64) -> bool {
    let (lhs, rhs, scale) = ch_sides(z1, z2);
    lhs <= rhs + 1e-12 * (1.0 + scale)
}

/// `e^{-itΔ/2} u`, i.e. the multiplier `e^{+it|ξ|²/2}`.
pub fn free_pullback(field: &ComplexField, t: f64) -> ComplexField {
    let g = field.grid;
    let mut values = field.values.clone();
    spectral::apply_multiplier(&g, &mut values, |k| {
        Complex64::from_polar(1.0, 0.5 * t * g.wavenumber_sq(k))
    });
    ComplexField { values, time: 0.0, ..field.clone() }
}

/// `e^{itΔ/2} u`.
pub fn free_propagate(field: &ComplexField, t: f64) -> ComplexField {
    let mut out = free_pullback(field, -t);
    out.time = field.time + t;
    out
}

/// `‖f‖ + ‖∇f‖ + ‖xf‖`.
pub fn sigma_norm(field: &ComplexField) -> f64 {
    let g = field.grid;
    let l2 = norm_sq(&g, &field.values).sqrt();
    let grad = spectral::gradient_norm_sq(&g, &field.values).sqrt();
    let x = (par::sum(&field.values, |flat, z| g.radius_sq(flat) * z.norm_sqr()) * g.cell()).sqrt();
    l2 + grad + x
}

/// `‖a − b‖_{L²}`.
pub fn l2_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    Ok((par::sum(&a.values, |i, z| (z - b.values[i]).norm_sqr()) * a.grid.cell()).sqrt())
}

/// `‖∇(a − b)‖_{L²}`.
pub fn h1_seminorm_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(spectral::gradient_norm_sq(&d.grid, &d.values).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Frame;
    use std::f64::consts::PI;

    fn gauss(n: usize, l: f64) -> ComplexField {
        let g = Grid::new(1, n, l).unwrap();
        ComplexField::from_fn(g, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))
    }

    #[test]
    fn cubic_gaussian_energy() {
        let u = gauss(1024, 16.0);
        let e = energy(&u, Model::Power { sigma: 1.0 });
        let expect = 0.5 * PI.sqrt() / 2.0 + 0.5 * (PI / 2.0).sqrt();
        assert!((e - expect).abs() < 1e-10);
        assert!((e - 1.0698).abs() < 1e-4);
    }

    #[test]
    fn zero_field_energies() {
        let z = ComplexField::zeros(Grid::new(1, 64, 4.0).unwrap());
        assert_eq!(energy(&z, Model::Power { sigma: 1.0 }), 0.0);
        assert_eq!(energy(&z, Model::Log), 0.0);
    }

    #[test]
    fn energy_phase_invariant() {
        let mut u = gauss(256, 10.0);
        let e0 = energy(&u, Model::Log);
        u.scale(Complex64::from_polar(1.0, 0.83));
        assert!((energy(&u, Model::Log) - e0).abs() < 1e-12);
    }

    #[test]
    fn j_norm_at_zero_is_moment() {
        let u = gauss(512, 12.0);
        let xu = (PI.sqrt() / 2.0).sqrt();
        assert!((j_norm(&u, 0.0) - xu).abs() < 1e-10);
    }

    #[test]
    fn j_norm_paths_agree() {
        let g = Grid::new(1, 2048, 24.0).unwrap();
        let u = ComplexField::from_fn(g, |x| {
            Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), 0.3 * x[0] * x[0] / 2.0 + 0.5 * x[0])
        });
        for t in [0.5, 2.0] {
            let a = j_norm(&u, t);
            let b = j_norm_factored(&u, t).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn taylor_source_agrees() {
        let z = Complex64::from_polar(2.0, 0.4);
        let a = source_point(z, 0.1, 1e-30);
        let b = source_point_taylor(z, 0.1);
        assert!((a - b).norm() < 1e-10);
        assert_eq!(source_point(Complex64::from_polar(1.0, 2.0), 0.3, 1e-30).norm(), 0.0);
    }

    #[test]
    fn ch_examples() {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        assert!(ch_inequality_check(one, one));
        let (lhs, rhs, _) = ch_sides(one, i);
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 4.0);
    }

    #[test]
    fn current_of_plane_wave() {
        let g = Grid::new(1, 256, PI * 4.0).unwrap();
        let k = 2.0;
        let v = ComplexField::from_fn(g, |x| Complex64::from_polar((-x[0] * x[0] / 4.0).exp(), k * x[0]));
        let j = current_density(&v, None);
        for (flat, z) in v.values.iter().enumerate() {
            assert!((j[0][flat] - k * z.norm_sqr()).abs() < 1e-9);
        }
        let real = gauss(128, 8.0);
        assert!(current_density(&real, Some(2.0))[0].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn pullback_inverts_free_flow() {
        let mut u = gauss(512, 16.0);
        u.frame = Frame::Lab;
        let moved = free_propagate(&u, 1.7);
        let back = free_pullback(&moved, 1.7);
        assert!(l2_distance(&back, &u).unwrap() < 1e-12);
        let same = free_pullback(&u, 0.0);
        assert!(l2_distance(&same, &u).unwrap() < 1e-14);
    }

    #[test]
    fn pseudo_energy_limit_integrand() {
        let e = pseudo_energy(&ComplexField::zeros(Grid::new(1, 32, 4.0).unwrap()), Model::Log, 2.0)
            .unwrap();
        assert_eq!(e.total(), 0.0);
    }
}

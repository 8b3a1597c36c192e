//! FFT plumbing, spectral derivatives, norms and moments.
//!
//! The continuous transform is approximated by
//! `F(ξ) = Σ_j f_j e^{-iξ·x_j} dx^d`, so that
//! `Σ |f_j|² dx^d = (2L)^{-d} Σ_k |F(ξ_k)|²`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Density};
use crate::grid::Grid;
use crate::par;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, inverse: bool) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let p = plan(n, inverse);
    if grid.dim() == 1 {
        p.process(data);
    } else {
        rows(data, n, &p);
        transpose(data, n);
        rows(data, n, &p);
        transpose(data, n);
    }
    if inverse {
        let a = 1.0 / grid.len() as f64;
        par::for_each_mut(data, |_, z| *z *= a);
    }
}

#[cfg(feature = "parallel")]
fn rows(data: &mut [Complex64], n: usize, p: &Plan) {
    use rayon::prelude::*;
    data.par_chunks_mut(n * 8).for_each(|block| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
        p.process_with_scratch(block, &mut scratch);
    });
}

#[cfg(not(feature = "parallel"))]
fn rows(data: &mut [Complex64], _n: usize, p: &Plan) {
    p.process(data);
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized forward DFT along every axis, in place.
pub fn fft_forward(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, false);
}

/// Inverse of [`fft_forward`], in place.
pub fn fft_inverse(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, true);
}

/// Applies the Fourier multiplier `m(flat index in FFT order)`.
pub fn apply_multiplier<M>(grid: &Grid, data: &mut [Complex64], m: M)
where
    M: Fn(usize) -> Complex64 + Sync + Send,
{
    fft_forward(grid, data);
    par::for_each_mut(data, |k, z| *z *= m(k));
    fft_inverse(grid, data);
}

/// Applies a precomputed multiplier table in FFT order.
pub fn apply_table(grid: &Grid, data: &mut [Complex64], table: &[Complex64]) {
    fft_forward(grid, data);
    par::for_each_mut(data, |k, z| *z *= table[k]);
    fft_inverse(grid, data);
}

/// Spectral partial derivative along `axis`. The Nyquist mode is dropped.
pub fn partial(grid: &Grid, values: &[Complex64], axis: usize) -> Vec<Complex64> {
    let mut out = values.to_vec();
    let n = grid.n();
    apply_multiplier(grid, &mut out, |flat| {
        let [i, j] = grid.index(flat);
        let k = if axis == 0 { i } else { j };
        if k == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, grid.fft_mode(k))
        }
    });
    out
}

pub fn gradient(grid: &Grid, values: &[Complex64]) -> Vec<Vec<Complex64>> {
    (0..grid.dim()).map(|a| partial(grid, values, a)).collect()
}

/// `‖∇f‖²_{L²}` via Parseval.
pub fn gradient_norm_sq(grid: &Grid, values: &[Complex64]) -> f64 {
    let mut hat = values.to_vec();
    fft_forward(grid, &mut hat);
    let n = grid.n();
    let s = par::sum(&hat, |flat, z| {
        let [i, j] = grid.index(flat);
        let mut k2 = 0.0;
        if i != n / 2 {
            k2 += grid.fft_mode(i).powi(2);
        }
        if grid.dim() == 2 && j != n / 2 {
            k2 += grid.fft_mode(j).powi(2);
        }
        k2 * z.norm_sqr()
    });
    s * grid.cell() / grid.len() as f64
}

/// `(Σ |u_j|^p dx^d)^{1/p}`; `p = ∞` gives the max modulus.
pub fn lp_norm(field: &ComplexField, p: f64) -> Result<f64> {
    lp_norm_values(&field.grid, &field.values, p)
}

pub fn lp_norm_values(grid: &Grid, values: &[Complex64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be in [1, inf], got {p}")));
    }
    if p.is_infinite() {
        return Ok(par::max(values, |_, z| z.norm()));
    }
    let s = if p == 2.0 {
        par::sum(values, |_, z| z.norm_sqr())
    } else {
        par::sum(values, |_, z| z.norm().powf(p))
    };
    Ok((s * grid.cell()).powf(1.0 / p))
}

/// `‖(1+|ξ|²)^{s/2} F‖` with the Parseval-consistent normalization.
pub fn sobolev_norm(field: &ComplexField, s: f64) -> f64 {
    sobolev_norm_values(&field.grid, &field.values, s)
}

pub fn sobolev_norm_values(grid: &Grid, values: &[Complex64], s: f64) -> f64 {
    let mut hat = values.to_vec();
    fft_forward(grid, &mut hat);
    let sum = par::sum(&hat, |k, z| (1.0 + grid.wavenumber_sq(k)).powf(s) * z.norm_sqr());
    (sum * grid.cell() / grid.len() as f64).sqrt()
}

/// Sobolev norm of a real grid function such as a density difference.
pub fn sobolev_norm_real(grid: &Grid, values: &[f64], s: f64) -> f64 {
    let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    sobolev_norm_values(grid, &c, s)
}

/// `Σ |y|^order ρ dx^d` for `order ∈ {0, 1, 2}`.
pub fn moment(density: &Density, order: u32) -> Result<f64> {
    if order > 2 {
        return Err(Error::InvalidParameter(format!("moment order {order} not in 0..=2")));
    }
    let g = density.grid;
    let s = par::sum(density.values(), |flat, v| match order {
        0 => *v,
        1 => g.radius_sq(flat).sqrt() * v,
        _ => g.radius_sq(flat) * v,
    });
    Ok(s * g.cell())
}

/// First moment along one axis.
pub fn mean_along(density: &Density, axis: usize) -> f64 {
    let g = density.grid;
    par::sum(density.values(), |flat, v| g.coord(g.index(flat)[axis]) * v) * g.cell()
        / density.mass()
}

/// Variance along one axis, normalized by mass.
pub fn variance_along(density: &Density, axis: usize) -> f64 {
    let g = density.grid;
    let m = mean_along(density, axis);
    par::sum(density.values(), |flat, v| {
        let x = g.coord(g.index(flat)[axis]) - m;
        x * x * v
    }) * g.cell()
        / density.mass()
}

/// Fraction of `Σ ρ` lying where some coordinate exceeds `(1-shell)·L`.
pub fn boundary_fraction(grid: &Grid, rho: &[f64], shell: f64) -> f64 {
    let cut = (1.0 - shell) * grid.half_width();
    let total = par::sum(rho, |_, v| *v);
    if total == 0.0 {
        return 0.0;
    }
    let outer = par::sum(rho, |flat, v| {
        let [i, j] = grid.index(flat);
        let out = grid.coord(i).abs() > cut || (grid.dim() == 2 && grid.coord(j).abs() > cut);
        if out {
            *v
        } else {
            0.0
        }
    });
    outer / total
}

/// Relative mass in the outer 5% shell.
pub fn boundary_mass(field: &ComplexField) -> f64 {
    boundary_fraction(&field.grid, &field.density_values(), 0.05)
}

/// Twiddles `e^{-iξ x_j}` for one axis, recomputed exactly every 64 steps.
fn phase_row(grid: &Grid, xi: f64) -> Vec<Complex64> {
    let n = grid.n();
    let dx = grid.dx();
    let step = Complex64::from_polar(1.0, -xi * dx);
    let mut out = Vec::with_capacity(n);
    let mut cur = Complex64::new(1.0, 0.0);
    for j in 0..n {
        if j % 64 == 0 {
            cur = Complex64::from_polar(1.0, -xi * grid.coord(j));
        }
        out.push(cur);
        cur *= step;
    }
    out
}

/// One-axis transform `F(ξ_k·scale) = Σ_j f_j e^{-iξ_k scale x_j} dx` of
/// `lines` contiguous rows of length `n` taken with stride. Frequencies
/// beyond the source Nyquist are set to zero.
fn scaled_axis(
    src: &Grid,
    dst: &Grid,
    data: &[Complex64],
    scale: f64,
) -> Vec<Complex64> {
    let n_src = src.n();
    let n_dst = dst.n();
    let lines = data.len() / n_src;
    let nyq = src.nyquist();
    let rows: Vec<Vec<Complex64>> = par::map_range(n_dst, |k| {
        let xi = dst.fft_mode(k) * scale;
        if xi.abs() >= nyq {
            return Vec::new();
        }
        phase_row(src, xi)
    });
    let dx = src.dx();
    par::map_range(lines * n_dst, |idx| {
        let (line, k) = (idx / n_dst, idx % n_dst);
        let w = &rows[k];
        if w.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let row = &data[line * n_src..(line + 1) * n_src];
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(w) {
            acc += a * b;
        }
        acc * dx
    })
}

fn transpose_rect(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Continuous transform of `values` (on `src`) sampled at `scale·ξ_k` for
/// the FFT-ordered modes `ξ_k` of `dst`. Both grids share `dim` and `n`
/// need not match.
pub fn fourier_at_scaled(
    src: &Grid,
    values: &[Complex64],
    dst: &Grid,
    scale: f64,
) -> Vec<Complex64> {
    if src.dim() == 1 {
        return scaled_axis(src, dst, values, scale);
    }
    let stage = scaled_axis(src, dst, values, scale);
    let t = transpose_rect(&stage, src.n(), dst.n());
    let both = scaled_axis(src, dst, &t, scale);
    transpose_rect(&both, dst.n(), dst.n())
}

/// Grid values on `dst` from continuous-transform samples `F(ξ_k)`.
pub fn from_fourier(dst: &Grid, mut hat: Vec<Complex64>) -> Vec<Complex64> {
    let n = dst.n();
    let dim = dst.dim();
    par::for_each_mut(&mut hat, |flat, z| {
        let idx = dst.index(flat);
        let parity: usize = idx[..dim].iter().map(|&k| if k < n / 2 { k } else { n - k }).sum();
        if parity % 2 == 1 {
            *z = -*z;
        }
    });
    fft_inverse(dst, &mut hat);
    let a = 1.0 / dst.cell();
    par::for_each_mut(&mut hat, |_, z| *z *= a);
    hat
}

fn outside(grid: &Grid, flat: usize, cut: f64) -> bool {
    let [i, j] = grid.index(flat);
    grid.coord(i).abs() > cut || (grid.dim() == 2 && grid.coord(j).abs() > cut)
}

/// Rejects a dilation `y ↦ scale·y` from `src` to `dst` that would wrap
/// mass around the target box or fold spectrum past the target Nyquist.
fn check_dilation(
    src: &Grid,
    weights: &[f64],
    values: &[Complex64],
    dst: &Grid,
    scale: f64,
) -> Result<()> {
    if src.dim() != dst.dim() {
        return Err(Error::GridMismatch("dilation across dimensions".into()));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let total = par::sum(weights, |_, v| *v);
    if total == 0.0 {
        return Ok(());
    }
    let reach = dst.half_width() * scale;
    if reach < src.half_width() {
        let lost = par::sum(weights, |flat, v| if outside(src, flat, reach) { *v } else { 0.0 });
        if lost > 1e-8 * total {
            return Err(Error::Aliasing(format!(
                "{:.3e} of the mass leaves the target box",
                lost / total
            )));
        }
    }
    let cut = dst.nyquist() / scale;
    if cut < src.nyquist() {
        let mut hat = values.to_vec();
        fft_forward(src, &mut hat);
        let power = par::sum(&hat, |_, z| z.norm_sqr());
        let lost = par::sum(&hat, |flat, z| {
            let [i, j] = src.index(flat);
            let high = src.fft_mode(i).abs() >= cut
                || (src.dim() == 2 && src.fft_mode(j).abs() >= cut);
            if high {
                z.norm_sqr()
            } else {
                0.0
            }
        });
        if lost > 1e-8 * power {
            return Err(Error::Aliasing(format!(
                "{:.3e} of the spectral power exceeds the target Nyquist",
                lost / power
            )));
        }
    }
    Ok(())
}

fn dilate_unchecked(src: &Grid, values: &[Complex64], dst: &Grid, scale: f64) -> Vec<Complex64> {
    let a = scale.powi(-(src.dim() as i32));
    let mut hat = fourier_at_scaled(src, values, dst, 1.0 / scale);
    par::for_each_mut(&mut hat, |_, z| *z *= a);
    from_fourier(dst, hat)
}

/// `g(y) = f(scale·y)` on `dst` by band-limited spectral interpolation.
pub fn dilate_values(
    src: &Grid,
    values: &[Complex64],
    dst: &Grid,
    scale: f64,
) -> Result<Vec<Complex64>> {
    let w: Vec<f64> = par::map(values, |_, z| z.norm_sqr());
    check_dilation(src, &w, values, dst, scale)?;
    Ok(dilate_unchecked(src, values, dst, scale))
}

/// Real-valued variant of [`dilate_values`].
pub fn dilate_real(src: &Grid, values: &[f64], dst: &Grid, scale: f64) -> Result<Vec<f64>> {
    let c: Vec<Complex64> = par::map(values, |_, &v| Complex64::new(v, 0.0));
    let w: Vec<f64> = par::map(values, |_, v| v.abs());
    check_dilation(src, &w, &c, dst, scale)?;
    Ok(dilate_unchecked(src, &c, dst, scale).into_iter().map(|z| z.re).collect())
}

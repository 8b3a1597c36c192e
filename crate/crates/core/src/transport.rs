//! Wasserstein distances on grid densities and negative Sobolev norms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Density, Frame};
use crate::grid::Grid;
use crate::par;
use crate::spectral;

pub const MASS_MATCH: f64 = 1e-6;
pub const DEFAULT_DIRECTIONS: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Density `S^d |u(t, S·y)|²`, optionally divided by its mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledDensity {
    pub density: Density,
    pub t: f64,
    pub scale: f64,
    pub normalized: bool,
}

/// Dilates `|u|²` by `scale` onto `dst` (the field's own grid by default).
/// Self-similar fields already live in scaled coordinates, so their
/// density is `|v|²` and `scale` is only recorded.
pub fn rescale_density(
    field: &ComplexField,
    t: f64,
    scale: f64,
    normalize: bool,
    dst: Option<&Grid>,
) -> Result<RescaledDensity> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let dst = dst.copied().unwrap_or(field.grid);
    let rho = field.density_values();
    let values = match field.frame {
        Frame::SelfSimilar => {
            dst.check_same(&field.grid)?;
            rho
        }
        Frame::Lab => {
            let a = scale.powi(dst.dim() as i32);
            spectral::dilate_real(&field.grid, &rho, &dst, scale)?
                .into_iter()
                .map(|v| (v * a).max(0.0))
                .collect()
        }
    };
    let mut density = Density::new(dst, values)?;
    if normalize {
        density = density.normalized()?;
    }
    Ok(RescaledDensity { density, t, scale, normalized: normalize })
}

/// Values of `p` and `q` brought to the mass of `p`.
fn common_mass(p: &Density, q: &Density) -> Result<(Vec<f64>, Vec<f64>)> {
    p.grid.check_same(&q.grid)?;
    let (mp, mq) = (p.mass(), q.mass());
    if mp == 0.0 && mq == 0.0 {
        return Ok((p.values().to_vec(), q.values().to_vec()));
    }
    if (mp - mq).abs() > MASS_MATCH * mp.max(mq) {
        return Err(Error::MassMismatch { left: mp, right: mq });
    }
    let a = mp / mq;
    Ok((p.values().to_vec(), q.values().iter().map(|v| v * a).collect()))
}

/// Exact `W1` of two measures supported on the same sorted points.
fn w1_sorted(points: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut cdf = 0.0;
    for i in 0..points.len().saturating_sub(1) {
        cdf += p[i] - q[i];
        acc += cdf.abs() * (points[i + 1] - points[i]);
    }
    acc
}

/// `∫|F_p − F_q| dx` for 1D grid densities.
pub fn w1_1d(p: &Density, q: &Density) -> Result<f64> {
    if p.grid.dim() != 1 {
        return Err(Error::InvalidParameter("w1_1d needs a 1D grid".into()));
    }
    let (a, b) = common_mass(p, q)?;
    let dx = p.grid.dx();
    let mut acc = 0.0;
    let mut cdf = 0.0;
    for (x, y) in a.iter().zip(&b) {
        cdf += (x - y) * dx;
        acc += cdf.abs();
    }
    Ok(acc * dx)
}

/// Seeded unit directions in the plane.
pub fn directions(n_dirs: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_dirs)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            [a.cos(), a.sin()]
        })
        .collect()
}

/// `W1` of the projections of `p`, `q` onto `theta`.
pub fn w1_projected(p: &Density, q: &Density, theta: [f64; 2]) -> Result<f64> {
    let (a, b) = common_mass(p, q)?;
    Ok(projected(&p.grid, &a, &b, theta))
}

fn projected(g: &Grid, a: &[f64], b: &[f64], theta: [f64; 2]) -> f64 {
    let mut idx: Vec<(f64, usize)> = (0..g.len())
        .map(|flat| {
            let [i, j] = g.index(flat);
            (theta[0] * g.coord(i) + theta[1] * g.coord(j), flat)
        })
        .collect();
    idx.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let cell = g.cell();
    let pts: Vec<f64> = idx.iter().map(|x| x.0).collect();
    let pa: Vec<f64> = idx.iter().map(|x| a[x.1] * cell).collect();
    let pb: Vec<f64> = idx.iter().map(|x| b[x.1] * cell).collect();
    w1_sorted(&pts, &pa, &pb)
}

/// Mean over `n_dirs` seeded directions of the projected 1D `W1`.
pub fn w1_sliced(p: &Density, q: &Density, n_dirs: usize, seed: u64) -> Result<f64> {
    if p.grid.dim() != 2 {
        return Err(Error::InvalidParameter("w1_sliced needs a 2D grid".into()));
    }
    if n_dirs == 0 {
        return Err(Error::InvalidParameter("need at least one direction".into()));
    }
    let (a, b) = common_mass(p, q)?;
    let g = p.grid;
    let dirs = directions(n_dirs, seed);
    let vals = par::map(&dirs, |_, th| projected(&g, &a, &b, *th));
    Ok(vals.iter().sum::<f64>() / n_dirs as f64)
}

/// Exact 1D `W1`, sliced `W1` in 2D.
pub fn w1(p: &Density, q: &Density) -> Result<f64> {
    match p.grid.dim() {
        1 => w1_1d(p, q),
        _ => w1_sliced(p, q, DEFAULT_DIRECTIONS, DEFAULT_SEED),
    }
}

/// Closed-form `W2` between `N(m1, v1)` and `N(m2, v2)`.
pub fn w2_gaussian(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::InvalidParameter(format!("variances must be positive: {v1}, {v2}")));
    }
    Ok(((m1 - m2).powi(2) + (v1.sqrt() - v2.sqrt()).powi(2)).sqrt())
}

/// `W2` of 1D grid densities (as point masses at the nodes) via the
/// quantile coupling.
pub fn w2_1d(p: &Density, q: &Density) -> Result<f64> {
    if p.grid.dim() != 1 {
        return Err(Error::InvalidParameter("w2_1d needs a 1D grid".into()));
    }
    let (a, b) = common_mass(p, q)?;
    let g = p.grid;
    let dx = g.dx();
    let total: f64 = a.iter().sum::<f64>() * dx;
    if total == 0.0 {
        return Ok(0.0);
    }
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (a[0] * dx, b[0] * dx);
    let mut acc = 0.0;
    let n = a.len();
    loop {
        while i < n && ra <= 0.0 {
            i += 1;
            if i < n {
                ra = a[i] * dx;
            }
        }
        while j < n && rb <= 0.0 {
            j += 1;
            if j < n {
                rb = b[j] * dx;
            }
        }
        if i >= n || j >= n {
            break;
        }
        let m = ra.min(rb);
        acc += m * (g.coord(i) - g.coord(j)).powi(2);
        ra -= m;
        rb -= m;
    }
    Ok((acc / total).sqrt() * total.sqrt())
}

/// `Σ |p − q| dx^d`.
pub fn l1_distance(p: &Density, q: &Density) -> Result<f64> {
    p.grid.check_same(&q.grid)?;
    Ok(par::sum(p.values(), |i, v| (v - q.values()[i]).abs()) * p.grid.cell())
}

/// Mean and variance (per axis 0) of a 1D density, for Gaussian fits.
pub fn gaussian_fit(p: &Density) -> (f64, f64) {
    (spectral::mean_along(p, 0), spectral::variance_along(p, 0))
}

/// `‖p − q‖_{H^{-s}}`, `W1(p, q)` and `hs / √W1` (`None` when `W1 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsComparison {
    pub hs: f64,
    pub w1: f64,
    pub ratio: Option<f64>,
}

pub fn hs_negative_compare(p: &Density, q: &Density, s: f64) -> Result<HsComparison> {
    let d = p.grid.dim() as f64;
    if !(s > (1.0 + d) / 2.0) {
        return Err(Error::InvalidParameter(format!("need s > (1+d)/2, got {s}")));
    }
    let (a, b) = common_mass(p, q)?;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let hs = spectral::sobolev_norm_real(&p.grid, &diff, -s);
    let w = w1(p, q)?;
    let ratio = if w > 0.0 { Some(hs / w.sqrt()) } else { None };
    Ok(HsComparison { hs, w1: w, ratio })
}

/// `2√(2 M₂ ‖p − q‖_{L¹})` with `M₂` the larger second moment.
pub fn w1_moment_bound(p: &Density, q: &Density) -> Result<f64> {
    let m2 = spectral::moment(p, 2)?.max(spectral::moment(q, 2)?);
    Ok(2.0 * (2.0 * m2 * l1_distance(p, q)?).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss1(g: Grid, m: f64, v: f64) -> Density {
        Density::from_fn(g, |x| (-(x[0] - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt())
            .unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let g = Grid::new(1, 256, 10.0).unwrap();
        let p = gauss1(g, 0.0, 1.0);
        assert_eq!(w1_1d(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn translation_gives_shift() {
        let g = Grid::new(1, 1024, 16.0).unwrap();
        let h = 40.0 * g.dx();
        let p = gauss1(g, 0.0, 1.0);
        let q = gauss1(g, h, 1.0);
        assert!((w1_1d(&p, &q).unwrap() - h * p.mass()).abs() < 1e-10);
    }

    #[test]
    fn spikes_give_separation() {
        let g = Grid::new(1, 2048, 8.0).unwrap();
        let w = g.dx();
        let p = gauss1(g, -1.0, w * w);
        let q = gauss1(g, 2.0, w * w).with_mass(p.mass()).unwrap();
        assert!((w1_1d(&p, &q).unwrap() - 3.0).abs() < 2.0 * g.dx());
    }

    #[test]
    fn mass_mismatch_rejected() {
        let g = Grid::new(1, 64, 5.0).unwrap();
        let p = gauss1(g, 0.0, 1.0);
        let q = p.scaled(1.01);
        assert!(matches!(w1_1d(&p, &q), Err(Error::MassMismatch { .. })));
        let close = p.scaled(1.0 + 1e-9);
        assert!(w1_1d(&p, &close).unwrap() < 1e-12);
    }

    #[test]
    fn gaussian_w2_values() {
        assert_eq!(w2_gaussian(0.3, 0.7, 0.3, 0.7).unwrap(), 0.0);
        assert!((w2_gaussian(1.0, 0.5, 0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(w2_gaussian(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn quantile_w2_matches_closed_form() {
        let g = Grid::new(1, 4096, 16.0).unwrap();
        let p = gauss1(g, 1.0, 0.5);
        let q = gauss1(g, 0.0, 0.5);
        let w = w2_1d(&p, &q).unwrap();
        assert!((w - 1.0).abs() < 1e-4);
        assert!(w >= w1_1d(&p, &q).unwrap() - 1e-12);
    }

    #[test]
    fn sliced_translation_is_mean_projection() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let (hx, hy) = (4.0 * g.dx(), -2.0 * g.dx());
        let f = |cx: f64, cy: f64| {
            Density::from_fn(g, move |x| (-(x[0] - cx).powi(2) - (x[1] - cy).powi(2)).exp()).unwrap()
        };
        let p = f(0.0, 0.0);
        let q = f(hx, hy);
        let dirs = directions(16, 7);
        let expect: f64 = dirs.iter().map(|t| (hx * t[0] + hy * t[1]).abs()).sum::<f64>() / 16.0;
        let got = w1_sliced(&p, &q, 16, 7).unwrap();
        assert!((got - expect * p.mass()).abs() < 1e-10);
        assert_eq!(w1_sliced(&p, &p, 16, 7).unwrap(), 0.0);
    }

    #[test]
    fn hs_sentinel_and_monotone_in_s() {
        let g = Grid::new(1, 512, 12.0).unwrap();
        let p = gauss1(g, 0.0, 1.0);
        let q = gauss1(g, 0.2, 1.0);
        assert_eq!(hs_negative_compare(&p, &p, 1.5).unwrap().ratio, None);
        let a = hs_negative_compare(&p, &q, 1.5).unwrap();
        let b = hs_negative_compare(&p, &q, 2.5).unwrap();
        assert!(b.hs < a.hs);
        assert!(hs_negative_compare(&p, &q, 1.0).is_err());
    }

    #[test]
    fn rescale_identity() {
        let g = Grid::new(1, 256, 10.0).unwrap();
        let u = crate::nls::Gaussian::unit().with_amplitude(2.0).sample(g);
        let r = rescale_density(&u, 0.0, 1.0, false, None).unwrap();
        for (a, b) in r.density.values().iter().zip(u.density_values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let n = rescale_density(&u, 0.0, 1.3, true, None).unwrap();
        assert!((n.density.mass() - 1.0).abs() < 1e-12);
    }
}

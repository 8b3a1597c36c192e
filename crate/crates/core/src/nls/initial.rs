use num_complex::Complex64;

use crate::field::{ComplexField, Frame};
use crate::grid::Grid;

/// `A·exp(−a|x−c|²/2 + i b|x|²/2 + i k·x)`.
///
/// In 1D with `c = 0`: `‖u‖² = A²√(π/a)`, `‖xu‖² = A²√π/(2a^{3/2})`,
/// `‖∇u‖² = A²√(π/a)·(a/2 + b²/(2a) + k²)`; the Σ-norm is the sum of the
/// three square roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub amplitude: f64,
    pub width: f64,
    pub chirp: f64,
    pub momentum: [f64; 2],
    pub center: [f64; 2],
}

impl Default for Gaussian {
    fn default() -> Self {
        Self { amplitude: 1.0, width: 1.0, chirp: 0.0, momentum: [0.0; 2], center: [0.0; 2] }
    }
}

impl Gaussian {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn with_center(self, center: [f64; 2]) -> Self {
        Self { center, ..self }
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let mut r2c = 0.0;
        let mut r2 = 0.0;
        let mut kx = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            r2c += (xi - self.center[i]).powi(2);
            r2 += xi * xi;
            kx += self.momentum[i] * xi;
        }
        Complex64::from_polar(
            self.amplitude * (-self.width * r2c / 2.0).exp(),
            self.chirp * r2 / 2.0 + kx,
        )
    }

    pub fn sample(&self, grid: Grid) -> ComplexField {
        let g = *self;
        let mut f = ComplexField::from_fn(grid, move |x| g.value(x));
        f.frame = Frame::Lab;
        f
    }

    /// Closed-form Σ-norm for centered data in 1D.
    pub fn sigma_norm_1d(&self) -> f64 {
        let (a, b, k) = (self.width, self.chirp, self.momentum[0]);
        let pi = std::f64::consts::PI;
        let m = self.amplitude.powi(2) * (pi / a).sqrt();
        let x2 = self.amplitude.powi(2) * pi.sqrt() / (2.0 * a.powf(1.5));
        let g2 = m * (a / 2.0 + b * b / (2.0 * a) + k * k);
        m.sqrt() + g2.sqrt() + x2.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nls::sigma_norm;

    #[test]
    fn closed_form_sigma_norm() {
        let g = Grid::new(1, 2048, 24.0).unwrap();
        let d = Gaussian { amplitude: 0.8, width: 1.3, chirp: 0.4, momentum: [0.7, 0.0], ..Gaussian::unit() };
        let u = d.sample(g);
        assert!((sigma_norm(&u) - d.sigma_norm_1d()).abs() < 1e-9);
    }
}

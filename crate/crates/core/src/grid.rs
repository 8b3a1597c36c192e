use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic lattice on `[-L, L)^dim`.
///
/// Values over a 2D grid are stored row-major: index `i * n + j` holds the
/// point `(x_i, x_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half_width must be positive, got {half_width}"
            )));
        }
        Ok(Self { dim, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Volume element `dx^dim`.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Lowest nonzero wavenumber `π/L`.
    pub fn dk(&self) -> f64 {
        PI / self.half_width
    }

    /// Wavenumbers `πk/L` for `k = -n/2, …, n/2-1`.
    pub fn modes(&self) -> Vec<f64> {
        let h = (self.n / 2) as i64;
        (-h..h).map(|k| k as f64 * self.dk()).collect()
    }

    /// Wavenumbers in FFT storage order `0, 1, …, n/2-1, -n/2, …, -1`.
    pub fn fft_modes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.fft_mode(k)).collect()
    }

    pub fn fft_mode(&self, k: usize) -> f64 {
        let k = if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        };
        k as f64 * self.dk()
    }

    pub fn nyquist(&self) -> f64 {
        self.n as f64 / 2.0 * self.dk()
    }

    /// Multi-index of a flat position.
    pub fn index(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    /// Squared distance from the origin of a flat position.
    pub fn radius_sq(&self, flat: usize) -> f64 {
        let [i, j] = self.index(flat);
        let x = self.coord(i);
        if self.dim == 1 {
            x * x
        } else {
            let y = self.coord(j);
            x * x + y * y
        }
    }

    /// `|ξ|²` of a flat position in FFT storage order.
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let [i, j] = self.index(flat);
        let a = self.fft_mode(i);
        if self.dim == 1 {
            a * a
        } else {
            let b = self.fft_mode(j);
            a * a + b * b
        }
    }

    pub fn radius_sq_table(&self) -> Vec<f64> {
        (0..self.len()).map(|f| self.radius_sq(f)).collect()
    }

    pub fn wavenumber_sq_table(&self) -> Vec<f64> {
        (0..self.len()).map(|f| self.wavenumber_sq(f)).collect()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.half_width == other.half_width
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

pub fn make_grid(dim: usize, n: usize, half_width: f64) -> Result<Grid> {
    Grid::new(dim, n, half_width)
}

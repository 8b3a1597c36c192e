use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// `time` holds lab time `t` unless a caller documents otherwise.
    SelfSimilar,
}

impl Frame {
    pub fn tag(self) -> u8 {
        match self {
            Frame::Lab => 0,
            Frame::SelfSimilar => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Frame::Lab),
            1 => Some(Frame::SelfSimilar),
            _ => None,
        }
    }
}

/// Complex wavefunction sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub frame: Frame,
    pub time: f64,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>, frame: Frame, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: time });
        }
        Ok(Self { grid, values, frame, time })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            frame: Frame::Lab,
            time: 0.0,
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |flat| {
            let [i, j] = grid.index(flat);
            if grid.dim() == 1 {
                f(&[grid.coord(i)])
            } else {
                f(&[grid.coord(i), grid.coord(j)])
            }
        });
        Self { grid, values, frame: Frame::Lab, time: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn density_values(&self) -> Vec<f64> {
        par::map(&self.values, |_, z| z.norm_sqr())
    }

    pub fn density(&self) -> Density {
        Density::from_values_unchecked(self.grid, self.density_values())
    }

    pub fn mass(&self) -> f64 {
        par::sum(&self.values, |_, z| z.norm_sqr()) * self.grid.cell()
    }

    pub fn scale(&mut self, a: Complex64) {
        par::for_each_mut(&mut self.values, |_, z| *z *= a);
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.check_same(&other.grid)?;
        let values = par::map(&self.values, |i, z| z - other.values[i]);
        Ok(ComplexField { values, ..self.clone() })
    }
}

/// Nonnegative grid function with cached mass `Σ ρ dx^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub grid: Grid,
    values: Vec<f64>,
    mass: f64,
}

impl Density {
    /// Entries in `[-1e-12·max, 0)` are treated as rounding and clamped to 0.
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: f64::NAN });
        }
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if values.iter().any(|&v| v < -1e-12 * peak) {
            return Err(Error::InvalidParameter("density has negative entries".into()));
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        let mass = par::sum(&values, |_, v| *v) * grid.cell();
        Self { grid, values, mass }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |flat| {
            let [i, j] = grid.index(flat);
            if grid.dim() == 1 {
                f(&[grid.coord(i)])
            } else {
                f(&[grid.coord(i), grid.coord(j)])
            }
        });
        Self::new(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Copy rescaled to the given total mass.
    pub fn with_mass(&self, mass: f64) -> Result<Self> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter("cannot rescale a zero density".into()));
        }
        let a = mass / self.mass;
        let values = par::map(&self.values, |_, v| v * a);
        Ok(Self::from_values_unchecked(self.grid, values))
    }

    pub fn normalized(&self) -> Result<Self> {
        self.with_mass(1.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let values = par::map(&self.values, |_, v| v * a);
        Self::from_values_unchecked(self.grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_mass_is_riemann_sum() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let d = Density::new(g, vec![1.0; 16]).unwrap();
        assert!((d.mass() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn density_rejects_negative() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut v = vec![1.0; 8];
        v[3] = -0.5;
        assert!(Density::new(g, v).is_err());
    }

    #[test]
    fn field_length_checked() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        assert!(ComplexField::new(g, vec![Complex64::new(0.0, 0.0); 7], Frame::Lab, 0.0).is_err());
    }

    #[test]
    fn frame_tags_roundtrip() {
        for f in [Frame::Lab, Frame::SelfSimilar] {
            assert_eq!(Frame::from_tag(f.tag()), Some(f));
        }
        assert_eq!(Frame::from_tag(7), None);
    }
}

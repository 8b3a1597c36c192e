use crate::error::{Error, Result};

pub const DEFAULT_LOG_FLOOR: f64 = 1e-30;

/// Defocusing nonlinearity `i∂_t u + ½Δu = N(|u|²) u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `N(ρ) = ρ^σ`.
    Power { sigma: f64 },
    /// `N(ρ) = (ρ^σ − 1)/σ`.
    RescaledPower { sigma: f64 },
    /// `N(ρ) = ln ρ`.
    Log,
    /// `N = 0`.
    Free,
    /// `N(ρ) = g·ρ^σ`.
    ScaledPower { sigma: f64, coupling: f64 },
}

fn pow(rho: f64, sigma: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        (sigma * rho.ln()).exp()
    }
}

/// `(ρ^σ − 1)/σ` without cancellation for small `σ`.
pub fn rescaled_rate(rho: f64, sigma: f64) -> f64 {
    (sigma * rho.ln()).exp_m1() / sigma
}

impl Model {
    pub fn sigma(&self) -> Option<f64> {
        match *self {
            Model::Power { sigma }
            | Model::RescaledPower { sigma }
            | Model::ScaledPower { sigma, .. } => Some(sigma),
            Model::Log | Model::Free => None,
        }
    }

    /// Power-family models need `0 < σ < 2/(d−2)₊`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Some(sigma) = self.sigma() {
            let upper = if dim > 2 { 2.0 / (dim as f64 - 2.0) } else { f64::INFINITY };
            if !(sigma > 0.0 && sigma < upper) {
                return Err(Error::InvalidParameter(format!(
                    "sigma = {sigma} outside (0, {upper}) for d = {dim}"
                )));
            }
        }
        Ok(())
    }

    /// `N(ρ)`; the log uses `ln(max(ρ, floor))`.
    pub fn rate(&self, rho: f64, floor: f64) -> f64 {
        match *self {
            Model::Power { sigma } => pow(rho, sigma),
            Model::RescaledPower { sigma } => rescaled_rate(rho, sigma),
            Model::Log => rho.max(floor).ln(),
            Model::Free => 0.0,
            Model::ScaledPower { sigma, coupling } => coupling * pow(rho, sigma),
        }
    }

    /// Energy density `G(ρ)`, zero at `ρ = 0`.
    pub fn energy_density(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        match *self {
            Model::Power { sigma } => rho * pow(rho, sigma) / (sigma + 1.0),
            Model::RescaledPower { sigma } => rho * rescaled_rate(rho, sigma) / (sigma + 1.0),
            Model::Log => rho * rho.ln(),
            Model::Free => 0.0,
            Model::ScaledPower { sigma, coupling } => {
                coupling * rho * pow(rho, sigma) / (sigma + 1.0)
            }
        }
    }

    /// Rate applied to the lens-frame unknown when `ρ_u = R^{-d} ρ_v`;
    /// together with [`Model::gauge_rate`] it reproduces `N(ρ_u)`.
    pub fn lens_rate(&self, rho_v: f64, ln_r: f64, dim: usize, floor: f64) -> f64 {
        let d = dim as f64;
        match *self {
            Model::Power { sigma } => (-d * sigma * ln_r).exp() * pow(rho_v, sigma),
            Model::ScaledPower { sigma, coupling } => {
                coupling * (-d * sigma * ln_r).exp() * pow(rho_v, sigma)
            }
            Model::RescaledPower { sigma } => {
                (-d * sigma * ln_r).exp() * rescaled_rate(rho_v, sigma)
            }
            Model::Log => rho_v.max(floor).ln(),
            Model::Free => 0.0,
        }
    }

    /// Spatially constant part of `N(R^{-d}ρ_v)` removed by the gauge.
    pub fn gauge_rate(&self, ln_r: f64, dim: usize) -> f64 {
        let d = dim as f64;
        match *self {
            Model::RescaledPower { sigma } => (-d * sigma * ln_r).exp_m1() / sigma,
            Model::Log => -d * ln_r,
            _ => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescaled_tends_to_log() {
        let v = 2.0 * rescaled_rate(2.0, 1e-6);
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn lens_split_reproduces_rate() {
        let floor = DEFAULT_LOG_FLOOR;
        for m in [
            Model::Power { sigma: 0.7 },
            Model::RescaledPower { sigma: 0.05 },
            Model::Log,
            Model::ScaledPower { sigma: 0.3, coupling: 4.0 },
        ] {
            for dim in [1, 2] {
                let (rho_v, r) = (0.37f64, 3.5f64);
                let rho_u = rho_v / r.powi(dim as i32);
                let split = m.lens_rate(rho_v, r.ln(), dim, floor) + m.gauge_rate(r.ln(), dim);
                assert!((split - m.rate(rho_u, floor)).abs() < 1e-12, "{m:?}");
            }
        }
    }

    #[test]
    fn zero_density_conventions() {
        assert_eq!(Model::Log.energy_density(0.0), 0.0);
        assert_eq!(Model::Power { sigma: 1.0 }.rate(0.0, 0.0), 0.0);
        assert_eq!(Model::RescaledPower { sigma: 0.5 }.rate(0.0, 0.0), -2.0);
        assert_eq!(Model::Log.rate(0.0, 1e-30), 1e-30f64.ln());
    }

    #[test]
    fn validation() {
        assert!(Model::Power { sigma: 0.0 }.validate(1).is_err());
        assert!(Model::Power { sigma: 5.0 }.validate(2).is_ok());
        assert!(Model::Log.validate(2).is_ok());
    }
}

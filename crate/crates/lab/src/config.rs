//! Declarative experiment configuration (TOML).
//!
//! ```toml
//! name = "local-continuity"
//! sigma = [1.0]
//! nu = [1.02, 1.04, 1.08]
//! d = 1
//! dt = 2e-3
//! t_end = 2.0
//! seeds = [0]
//! output = "runs"
//!
//! [grid]
//! n = 2048
//! half_width = 32.0
//!
//! [data]
//! amplitude = 1.0
//! width = 1.0
//!
//! [options]
//! probes = 41
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlslab_core::grid::Grid;
use nlslab_core::nls::Gaussian;
use nlslab_core::ode::sigma0;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    LocalContinuity,
    GlobalScattering,
    W1Uniform,
    OdeGap,
    LogEhrenfest,
    LogGlobalW1,
    FpContraction,
    DuhamelResidual,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        ExperimentName::LocalContinuity,
        ExperimentName::GlobalScattering,
        ExperimentName::W1Uniform,
        ExperimentName::OdeGap,
        ExperimentName::LogEhrenfest,
        ExperimentName::LogGlobalW1,
        ExperimentName::FpContraction,
        ExperimentName::DuhamelResidual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::LocalContinuity => "local-continuity",
            ExperimentName::GlobalScattering => "global-scattering",
            ExperimentName::W1Uniform => "w1-uniform",
            ExperimentName::OdeGap => "ode-gap",
            ExperimentName::LogEhrenfest => "log-ehrenfest",
            ExperimentName::LogGlobalW1 => "log-global-w1",
            ExperimentName::FpContraction => "fp-contraction",
            ExperimentName::DuhamelResidual => "duhamel-residual",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ExperimentName::LocalContinuity => "L2/H1 continuity of the power flow in the exponent",
            ExperimentName::GlobalScattering => "Sigma-norm continuity of the free pullback, scattering tails",
            ExperimentName::W1Uniform => "uniform-in-time W1 continuity of rescaled densities",
            ExperimentName::OdeGap => "gap between the log and power dispersion ODEs",
            ExperimentName::LogEhrenfest => "rescaled power flow vs log flow on bounded times",
            ExperimentName::LogGlobalW1 => "long-time W1 comparison with the log flow and Gaussian",
            ExperimentName::FpContraction => "Fokker-Planck semigroup identities and lemma checks",
            ExperimentName::DuhamelResidual => "Duhamel residual against the Fokker-Planck flow",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

/// Gaussian initial datum `A·exp(−w|x−c|²/2 + i(b|x|²/2 + k·x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatumSpec {
    pub amplitude: f64,
    pub width: f64,
    pub chirp: f64,
    pub momentum: [f64; 2],
    pub center: [f64; 2],
}

impl Default for DatumSpec {
    fn default() -> Self {
        Self { amplitude: 1.0, width: 1.0, chirp: 0.0, momentum: [0.0; 2], center: [0.0; 2] }
    }
}

impl DatumSpec {
    pub fn gaussian(&self) -> Gaussian {
        Gaussian {
            amplitude: self.amplitude,
            width: self.width,
            chirp: self.chirp,
            momentum: self.momentum,
            center: self.center,
        }
    }
}

/// Experiment-specific knobs. Unused entries are ignored by the
/// experiments that do not need them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Number of probe times.
    pub probes: usize,
    /// Tail start times (w1-uniform) or dyadic window starts (global-scattering).
    pub tail_times: Vec<f64>,
    /// Horizons for the growth diagnostic of log-ehrenfest.
    pub horizons: Vec<f64>,
    /// Last compactified time as a fraction of `s_max`.
    pub s_fraction: f64,
    /// Step growth of the adaptive lens, `h = growth·t`.
    pub growth: f64,
    /// Window `[t_min, t_max]` for Gaussian-limit checks.
    pub gamma_window: [f64; 2],
    /// Power used for the ODE boundary-layer check.
    pub boundary_sigma: f64,
    /// Cap on fitted envelope constants.
    pub cap: f64,
    /// ODE tolerance.
    pub tol: f64,
    /// Log floor for `ln|u|²`.
    pub log_floor: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            probes: 41,
            tail_times: vec![5.0, 10.0, 20.0],
            horizons: vec![1.0, 2.0, 4.0],
            s_fraction: 0.8,
            growth: 0.005,
            gamma_window: [10.0, 1000.0],
            boundary_sigma: 0.1,
            cap: 10.0,
            tol: 1e-10,
            log_floor: 1e-30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub nu: Vec<f64>,
    #[serde(default = "one")]
    pub d: usize,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub data: DatumSpec,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub options: Options,
}

fn one() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("runs")
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Ok((Self::from_toml(&text)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.d, self.grid.n, self.grid.half_width).map_err(|e| invalid(e.to_string()))
    }

    /// Default configuration of each experiment.
    pub fn preset(name: ExperimentName) -> Self {
        let base = ExperimentConfig {
            name,
            sigma: vec![1.0],
            nu: vec![],
            d: 1,
            grid: GridSpec { n: 2048, half_width: 32.0 },
            dt: 2e-3,
            t_end: 2.0,
            data: DatumSpec::default(),
            seeds: vec![0],
            output: default_output(),
            options: Options::default(),
        };
        match name {
            ExperimentName::LocalContinuity => ExperimentConfig { nu: vec![1.02, 1.04, 1.08], ..base },
            ExperimentName::GlobalScattering => ExperimentConfig {
                sigma: vec![1.5],
                nu: vec![1.55, 1.6, 1.7],
                grid: GridSpec { n: 1024, half_width: 12.0 },
                dt: 5e-3,
                t_end: 16.0,
                options: Options { tail_times: vec![2.0, 4.0, 8.0], probes: 33, ..Options::default() },
                ..base
            },
            ExperimentName::W1Uniform => ExperimentConfig {
                nu: vec![1.2, 1.1, 1.05],
                grid: GridSpec { n: 1024, half_width: 12.0 },
                dt: 5e-3,
                t_end: 80.0,
                options: Options { probes: 49, ..Options::default() },
                ..base
            },
            ExperimentName::OdeGap => ExperimentConfig {
                sigma: vec![1e-3, 1e-2],
                grid: GridSpec { n: 64, half_width: 8.0 },
                t_end: 1e4,
                options: Options { probes: 121, tol: 1e-11, ..Options::default() },
                ..base
            },
            ExperimentName::LogEhrenfest => ExperimentConfig {
                sigma: vec![4e-3, 2e-3, 1e-3],
                grid: GridSpec { n: 2048, half_width: 48.0 },
                t_end: 1.0,
                options: Options { probes: 21, ..Options::default() },
                ..base
            },
            ExperimentName::LogGlobalW1 => ExperimentConfig {
                sigma: vec![0.05, 0.025],
                grid: GridSpec { n: 2048, half_width: 12.0 },
                t_end: 1000.0,
                options: Options { probes: 31, ..Options::default() },
                ..base
            },
            ExperimentName::FpContraction => ExperimentConfig {
                sigma: vec![0.05],
                grid: GridSpec { n: 1024, half_width: 16.0 },
                t_end: 1.0,
                ..base
            },
            ExperimentName::DuhamelResidual => ExperimentConfig {
                sigma: vec![0.05, 0.025],
                grid: GridSpec { n: 2048, half_width: 12.0 },
                t_end: 0.0,
                options: Options { probes: 17, ..Options::default() },
                ..base
            },
        }
    }

    /// Checks every precondition before any compute.
    pub fn validate(&self) -> Result<(), ConfigError> {
        use ExperimentName::*;
        if self.sigma.is_empty() {
            return Err(invalid("sigma list is empty"));
        }
        if self.sigma.iter().chain(&self.nu).any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(invalid("sigma and nu entries must be positive and finite"));
        }
        if !(1..=2).contains(&self.d) {
            return Err(invalid(format!("d must be 1 or 2, got {}", self.d)));
        }
        self.grid()?;
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(invalid("dt must be positive and t_end non-negative"));
        }
        if self.options.probes < 2 {
            return Err(invalid("need at least two probes"));
        }
        let d = self.d as f64;
        match self.name {
            LocalContinuity | GlobalScattering | W1Uniform => {
                if self.nu.len() < 3 {
                    return Err(invalid("rate fits need at least three nu values"));
                }
                if self.d > 1 && self.name != LocalContinuity {
                    return Err(invalid(format!("{} runs in d = 1", self.name)));
                }
                if self.name == GlobalScattering {
                    let s0 = sigma0(self.d);
                    if self.sigma.iter().chain(&self.nu).any(|s| *s <= s0) {
                        return Err(invalid(format!("global scattering needs sigma > {s0:.4}")));
                    }
                }
                if self.t_end <= 0.0 {
                    return Err(invalid("t_end must be positive"));
                }
            }
            OdeGap => {
                if self.t_end <= 2.0 {
                    return Err(invalid("ode-gap needs t_end > 2"));
                }
            }
            LogEhrenfest => {
                if self.sigma.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(invalid("log-ehrenfest needs a decreasing sigma list"));
                }
                if self.sigma.len() < 2 || self.t_end <= 0.0 {
                    return Err(invalid("log-ehrenfest needs two sigmas and t_end > 0"));
                }
            }
            LogGlobalW1 | DuhamelResidual => {
                if self.d != 1 {
                    return Err(invalid(format!("{} runs in d = 1", self.name)));
                }
                if self.sigma.iter().any(|s| d * s >= 1.0) {
                    return Err(invalid("need d·sigma < 1"));
                }
                let f = self.options.s_fraction;
                if !(f > 0.0 && f < 1.0) {
                    return Err(invalid("s_fraction must lie in (0, 1)"));
                }
                let [a, b] = self.options.gamma_window;
                if !(a > 1.0 && b > a) {
                    return Err(invalid("gamma_window must satisfy 1 < t_min < t_max"));
                }
            }
            FpContraction => {
                if self.sigma.iter().any(|s| *s > 1.0) {
                    return Err(invalid("time dilation 1 + sigma must lie in (0, 2]"));
                }
            }
        }
        if !(self.options.growth > 0.0 && self.options.growth < 0.1) {
            return Err(invalid("growth must lie in (0, 0.1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_roundtrip() {
        for name in ExperimentName::ALL {
            let cfg = ExperimentConfig::preset(name);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn empty_sigma_rejected() {
        let mut cfg = ExperimentConfig::preset(ExperimentName::LocalContinuity);
        cfg.sigma.clear();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = "name = \"ode-gap\"\nsigma = [0.01]\ndt = 0.1\nt_end = 10.0\nbogus = 1\n[grid]\nn = 8\nhalf_width = 1.0\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn names_parse() {
        for name in ExperimentName::ALL {
            assert_eq!(name.as_str().parse::<ExperimentName>().unwrap(), name);
        }
        assert!("nope".parse::<ExperimentName>().is_err());
    }
}

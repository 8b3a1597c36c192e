use crate::error::{Error, Result};
use crate::ode::rk::{Dopri5, Sample};

/// Member of the dispersion ODE family, all with `τ(0) = 1`, `τ̇(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeKind {
    /// `r̈ = α / (2 r^{α+1})`.
    GenericPower { alpha: f64 },
    /// `τ̈ = 1 / (2 τ^{dσ+1})`.
    SigmaPower { sigma: f64, d: usize },
    /// `τ̈ = 1 / (2τ)`.
    Logarithmic,
}

impl OdeKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OdeKind::GenericPower { alpha } if !(alpha > 0.0) || !alpha.is_finite() => Err(
                Error::InvalidParameter(format!("alpha must be positive, got {alpha}")),
            ),
            OdeKind::SigmaPower { sigma, d } => {
                if !(1..=2).contains(&d) {
                    return Err(Error::InvalidParameter(format!("d must be 1 or 2, got {d}")));
                }
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "sigma must be positive, got {sigma}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Exponent `a` in `τ̈ = (a/2)·τ^{-a-1}·c`; zero for the log ODE.
    fn power(&self) -> f64 {
        match *self {
            OdeKind::GenericPower { alpha } => alpha,
            OdeKind::SigmaPower { sigma, d } => d as f64 * sigma,
            OdeKind::Logarithmic => 0.0,
        }
    }

    /// `τ̈` as a function of `τ`.
    pub fn accel(&self, tau: f64) -> f64 {
        match *self {
            OdeKind::GenericPower { alpha } => 0.5 * alpha * (-(alpha + 1.0) * tau.ln()).exp(),
            OdeKind::SigmaPower { .. } => {
                let a = self.power();
                0.5 * (-(a + 1.0) * tau.ln()).exp()
            }
            OdeKind::Logarithmic => 0.5 / tau,
        }
    }

    /// Time derivative of `τ̈`.
    pub fn jerk(&self, tau: f64, tau_dot: f64) -> f64 {
        match *self {
            OdeKind::Logarithmic => -0.5 * tau_dot / (tau * tau),
            _ => {
                let a = self.power();
                -(a + 1.0) * self.accel(tau) * tau_dot / tau
            }
        }
    }

    /// Right side `F(τ)` of the first integral `τ̇² = F(τ)`.
    pub fn first_integral(&self, tau: f64) -> f64 {
        match *self {
            OdeKind::GenericPower { alpha } => -(-alpha * tau.ln()).exp_m1(),
            OdeKind::SigmaPower { .. } => {
                let a = self.power();
                -(-a * tau.ln()).exp_m1() / a
            }
            OdeKind::Logarithmic => tau.ln(),
        }
    }
}

/// Dense solution `(t, τ, τ̇)` of one dispersion ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    kind: OdeKind,
    times: Vec<f64>,
    tau: Vec<f64>,
    tau_dot: Vec<f64>,
    tol: f64,
}

fn hermite5(s: f64, h: f64, y: [f64; 2], d: [f64; 2], a: [f64; 2]) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let v = h0 * y[0]
        + h1 * h * d[0]
        + h2 * h * h * a[0]
        + h3 * h * h * a[1]
        + h4 * h * d[1]
        + h5 * y[1];
    v.clamp(y[0].min(y[1]), y[0].max(y[1]))
}

impl DispersionCurve {
    pub fn kind(&self) -> OdeKind {
        self.kind
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn tau_dot(&self) -> &[f64] {
        &self.tau_dot
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty curve")
    }

    fn locate(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || t > self.t_end() * (1.0 + 1e-12) {
            return Err(Error::CurveCoverage(t));
        }
        let t = t.min(self.t_end());
        let i = self.times.partition_point(|&s| s <= t);
        Ok(i.clamp(1, self.times.len() - 1) - 1)
    }

    /// Interpolated `τ(t)` (quintic Hermite on exact derivatives, clamped
    /// to the bracketing samples so monotonicity survives).
    pub fn tau_at(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let (y0, y1) = (self.tau[i], self.tau[i + 1]);
        let (d0, d1) = (self.tau_dot[i], self.tau_dot[i + 1]);
        let a = [self.kind.accel(y0), self.kind.accel(y1)];
        Ok(hermite5((t - t0) / h, h, [y0, y1], [d0, d1], a))
    }

    pub fn tau_dot_at(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let (y0, y1) = (self.tau[i], self.tau[i + 1]);
        let (d0, d1) = (self.tau_dot[i], self.tau_dot[i + 1]);
        let a = [self.kind.accel(y0), self.kind.accel(y1)];
        let j = [self.kind.jerk(y0, d0), self.kind.jerk(y1, d1)];
        Ok(hermite5((t - t0) / h, h, [d0, d1], a, j))
    }

    /// `τ̈(t)` from the ODE right-hand side.
    pub fn tau_ddot_at(&self, t: f64) -> Result<f64> {
        Ok(self.kind.accel(self.tau_at(t)?))
    }

    /// Inverse of `τ(t)` by bisection on the interpolant.
    pub fn time_at_tau(&self, tau: f64) -> Result<f64> {
        let last = *self.tau.last().expect("nonempty");
        if !(tau >= 1.0) || tau > last {
            return Err(Error::CurveCoverage(tau));
        }
        let i = self.tau.partition_point(|&v| v < tau).clamp(1, self.tau.len() - 1);
        let (mut lo, mut hi) = (self.times[i - 1], self.times[i]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tau_at(mid)? < tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Integrates the ODE to `t_end`; the first-integral residual of the result
/// is at most `10·tol` at every sample.
pub fn solve_dispersion(kind: OdeKind, t_end: f64, tol: f64) -> Result<DispersionCurve> {
    kind.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    if !(tol > 1e-14 && tol < 1e-4) {
        return Err(Error::InvalidParameter(format!("tol must be in (1e-14, 1e-4), got {tol}")));
    }
    let mut inner = tol * 1e-2;
    loop {
        let rk = Dopri5::<2> { h_max: t_end / 16.0, ..Dopri5::new(inner, inner) };
        let samples = rk.solve(
            |_, y| [y[1], kind.accel(y[0])],
            0.0,
            [1.0, 0.0],
            t_end,
            &[],
        )?;
        let curve = from_samples(kind, &samples, tol);
        let worst = first_integral_residual(&curve).into_iter().fold(0.0, f64::max);
        if worst <= 10.0 * tol {
            return Ok(curve);
        }
        if inner < 1e-15 {
            return Err(Error::Tolerance(tol));
        }
        inner *= 0.1;
    }
}

fn from_samples(kind: OdeKind, samples: &[Sample<2>], tol: f64) -> DispersionCurve {
    let mut times = Vec::with_capacity(samples.len());
    let mut tau = Vec::with_capacity(samples.len());
    let mut tau_dot = Vec::with_capacity(samples.len());
    for s in samples {
        times.push(s.t);
        tau.push(s.y[0]);
        tau_dot.push(s.y[1]);
    }
    DispersionCurve { kind, times, tau, tau_dot, tol }
}

/// `|τ̇² − F(τ)|` per sample.
pub fn first_integral_residual(curve: &DispersionCurve) -> Vec<f64> {
    curve
        .tau
        .iter()
        .zip(&curve.tau_dot)
        .map(|(&t, &td)| (td * td - curve.kind.first_integral(t)).abs())
        .collect()
}

/// Per-sample residual of arbitrary `(τ, τ̇)` pairs against `kind`.
pub fn residual_of(kind: OdeKind, tau: &[f64], tau_dot: &[f64]) -> Vec<f64> {
    tau.iter()
        .zip(tau_dot)
        .map(|(&t, &td)| (td * td - kind.first_integral(t)).abs())
        .collect()
}

/// Gap `w = τ_0 − τ_σ` and `ẇ` on `t_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauGap {
    pub t: Vec<f64>,
    pub tau0: Vec<f64>,
    pub tau0_dot: Vec<f64>,
    pub w: Vec<f64>,
    pub w_dot: Vec<f64>,
}

fn check_small_sigma(sigma: f64, d: usize) -> Result<()> {
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidParameter(format!("d must be 1 or 2, got {d}")));
    }
    if !(sigma > 0.0 && sigma < 0.5 / d as f64) {
        return Err(Error::InvalidParameter(format!(
            "sigma must lie in (0, 1/(2d)), got {sigma}"
        )));
    }
    Ok(())
}

/// Integrates `(τ_0, τ̇_0, w, ẇ)` as one system so the sign of `w` is
/// resolved relative to `w` itself rather than to `τ_0`.
pub fn tau_gap(sigma: f64, d: usize, t_grid: &[f64], tol: f64) -> Result<TauGap> {
    check_small_sigma(sigma, d)?;
    if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("t_grid must be increasing and nonnegative".into()));
    }
    let Some(&t_end) = t_grid.last() else {
        return Ok(TauGap { t: vec![], tau0: vec![], tau0_dot: vec![], w: vec![], w_dot: vec![] });
    };
    let a = d as f64 * sigma;
    let rhs = move |_t: f64, y: &[f64; 4]| {
        let (tau0, w) = (y[0], y[2]);
        let x = -a * tau0.ln() - (1.0 + a) * (-w / tau0).ln_1p();
        [y[1], 0.5 / tau0, y[3], -0.5 / tau0 * x.exp_m1()]
    };
    let mut rk = Dopri5::<4>::new(tol, tol);
    rk.atol[2] = tol * 1e-10;
    rk.atol[3] = tol * 1e-10;
    rk.h_max = (t_end / 16.0).max(1e-3);
    let samples = if t_end > 0.0 {
        rk.solve(rhs, 0.0, [1.0, 0.0, 0.0, 0.0], t_end, t_grid)?
    } else {
        vec![Sample { t: 0.0, y: [1.0, 0.0, 0.0, 0.0], dy: [0.0; 4] }]
    };
    let mut out = TauGap {
        t: Vec::with_capacity(t_grid.len()),
        tau0: Vec::with_capacity(t_grid.len()),
        tau0_dot: Vec::with_capacity(t_grid.len()),
        w: Vec::with_capacity(t_grid.len()),
        w_dot: Vec::with_capacity(t_grid.len()),
    };
    let mut j = 0;
    for &t in t_grid {
        while samples[j].t < t {
            j += 1;
        }
        let y = samples[j].y;
        out.t.push(t);
        out.tau0.push(y[0]);
        out.tau0_dot.push(y[1]);
        out.w.push(y[2]);
        out.w_dot.push(y[3]);
    }
    Ok(out)
}

/// `s_σ^max = −ln(dσ) / (4(1−dσ))`.
pub fn s_max(sigma: f64, d: usize) -> Result<f64> {
    let a = d as f64 * sigma;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < dσ < 1, got {a}")));
    }
    Ok(-a.ln() / (4.0 * (1.0 - a)))
}

/// `s` as a function of `τ` (constant of integration zero).
pub fn s_of_tau(sigma: f64, d: usize, tau: f64) -> Result<f64> {
    let a = d as f64 * sigma;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < dσ < 1, got {a}")));
    }
    if !(tau > 1.0) {
        return Err(Error::Domain(format!("s is -inf at tau = {tau}")));
    }
    let f = -(-a * tau.ln()).exp_m1() / a;
    Ok(f.ln() / (4.0 * (1.0 - a)))
}

/// Compactified time `s_σ(t) = ln(τ̇_σ²) / (4(1−dσ))` evaluated through the
/// first integral on the interpolated `τ_σ(t)`.
pub fn s_of_t(sigma: f64, d: usize, curve: &DispersionCurve, t: f64) -> Result<f64> {
    check_small_sigma(sigma, d)?;
    match curve.kind() {
        OdeKind::SigmaPower { sigma: s, d: dd } if s == sigma && dd == d => {}
        other => {
            return Err(Error::InvalidParameter(format!(
                "curve kind {other:?} does not match sigma {sigma}, d {d}"
            )))
        }
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("s_of_t needs t > 0, got {t}")));
    }
    s_of_tau(sigma, d, curve.tau_at(t)?)
}

/// `τ̃_σ(s) = (1 − dσ e^{4s(1−dσ)})^{−1/(dσ)}`.
pub fn tau_tilde(sigma: f64, d: usize, s: f64) -> Result<f64> {
    let smax = s_max(sigma, d)?;
    if !(s < smax) {
        return Err(Error::Domain(format!("s = {s} is not below s_max = {smax}")));
    }
    let a = d as f64 * sigma;
    let inner = a * (4.0 * s * (1.0 - a)).exp();
    Ok((-(-inner).ln_1p() / a).exp())
}

/// Lab time at which `s_σ(t) = s`.
pub fn t_of_s(sigma: f64, d: usize, curve: &DispersionCurve, s: f64) -> Result<f64> {
    curve.time_at_tau(tau_tilde(sigma, d, s)?)
}

/// Smallest power for which the global theory applies:
/// `(2 − d + √(d² + 12d + 4)) / (4d)`.
pub fn sigma0(d: usize) -> f64 {
    let d = d as f64;
    (2.0 - d + (d * d + 12.0 * d + 4.0).sqrt()) / (4.0 * d)
}

fn theta_expr(nu: f64, d: f64) -> f64 {
    ((2.0 - (d - 2.0) * nu) * nu / (nu + 1.0 - d * nu * nu)).min(1.0)
}

/// Continuity exponent `θ = inf_{|ν−σ|≤η} min(1, (2−(d−2)ν)ν / (ν+1−dν²))`.
pub fn theta_rate(sigma: f64, d: usize, eta: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let df = d as f64;
    let (lo, hi) = (sigma - eta, sigma + eta);
    if !(eta >= 0.0) || !(lo > 0.0) {
        return Err(Error::InvalidParameter(format!("interval [{lo}, {hi}] leaves (0, ∞)")));
    }
    if d > 2 && hi >= 2.0 / (df - 2.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma + eta = {hi} is not energy-subcritical in d = {d}"
        )));
    }
    let den = |nu: f64| nu + 1.0 - df * nu * nu;
    // The denominator is concave in ν, so positivity at both ends suffices.
    if !(den(lo) > 0.0 && den(hi) > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "denominator vanishes on [{lo}, {hi}]"
        )));
    }
    let mut best = theta_expr(lo, df).min(theta_expr(hi, df));
    // Stationary points solve (d+2)ν² − 2(d−2)ν + 2 = 0.
    let (qa, qb, qc) = (df + 2.0, -2.0 * (df - 2.0), 2.0);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        for r in [(-qb - disc.sqrt()) / (2.0 * qa), (-qb + disc.sqrt()) / (2.0 * qa)] {
            if r > lo && r < hi {
                best = best.min(theta_expr(r, df));
            }
        }
    }
    let m = 2048;
    for i in 1..m {
        let nu = lo + (hi - lo) * i as f64 / m as f64;
        best = best.min(theta_expr(nu, df));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_first_integral_small() {
        let tol = 1e-10;
        let c = solve_dispersion(OdeKind::Logarithmic, 50.0, tol).unwrap();
        assert!(first_integral_residual(&c).iter().all(|&r| r <= 10.0 * tol));
        assert_eq!(first_integral_residual(&c)[0], 0.0);
    }

    #[test]
    fn linear_dispersion_is_japanese_bracket() {
        let tol = 1e-11;
        let c = solve_dispersion(OdeKind::GenericPower { alpha: 2.0 }, 10.0, tol).unwrap();
        assert!((c.tau_at(1.0).unwrap() - 2f64.sqrt()).abs() <= 10.0 * tol);
        for &t in &[0.3, 2.5, 7.0] {
            assert!((c.tau_at(t).unwrap() - (1.0 + t * t).sqrt()).abs() <= 10.0 * tol);
            assert!((c.tau_dot_at(t).unwrap() - t / (1.0 + t * t).sqrt()).abs() <= 10.0 * tol);
        }
    }

    #[test]
    fn log_residual_zero_at_e() {
        assert_eq!(residual_of(OdeKind::Logarithmic, &[std::f64::consts::E], &[1.0]), vec![0.0]);
    }

    #[test]
    fn corrupted_curve_residual() {
        let c = solve_dispersion(OdeKind::Logarithmic, 100.0, 1e-10).unwrap();
        let bad: Vec<f64> = c.tau_dot().iter().map(|v| v * 1.01).collect();
        let r = residual_of(c.kind(), c.tau(), &bad);
        let last = bad.len() - 1;
        let td = c.tau_dot()[last];
        assert!((r[last] - 0.0201 * td * td).abs() < 1e-8);
    }

    #[test]
    fn sigma_curve_below_log_curve() {
        let log = solve_dispersion(OdeKind::Logarithmic, 100.0, 1e-10).unwrap();
        let sig = solve_dispersion(OdeKind::SigmaPower { sigma: 0.1, d: 1 }, 100.0, 1e-10).unwrap();
        for &t in sig.times() {
            assert!(sig.tau_at(t).unwrap() <= log.tau_at(t).unwrap() + 1e-9);
        }
    }

    #[test]
    fn sigma_rate_reaches_asymptote() {
        for sigma in [1.0f64, 1.5] {
            let t = 100.0 / sigma.sqrt();
            let c = solve_dispersion(OdeKind::SigmaPower { sigma, d: 1 }, t, 1e-10).unwrap();
            let rel = (c.tau_dot_at(t).unwrap() * sigma.sqrt() - 1.0).abs();
            assert!(rel < 0.01, "sigma {sigma}: {rel}");
        }
    }

    #[test]
    fn log_curve_asymptote() {
        let c = solve_dispersion(OdeKind::Logarithmic, 1e5, 1e-10).unwrap();
        for t in [1e3, 1e4, 1e5] {
            let ratio = c.tau_at(t).unwrap() / (t * f64::ln(t).sqrt());
            assert!((0.9..=1.1).contains(&ratio), "t {t}: {ratio}");
        }
    }

    #[test]
    fn gap_starts_at_zero_and_is_nonnegative() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let g = tau_gap(0.05, 1, &grid, 1e-11).unwrap();
        assert_eq!((g.w[0], g.w_dot[0]), (0.0, 0.0));
        assert!(g.w.iter().all(|&w| w >= 0.0));
        assert!(g.w_dot.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn s_max_closed_form() {
        let v = s_max(0.1, 1).unwrap();
        assert!((v - 10f64.ln() / 3.6).abs() < 1e-15);
        assert!((v - 0.6396069702).abs() < 1e-9);
    }

    #[test]
    fn tau_tilde_at_zero() {
        assert!((tau_tilde(0.5, 1, 0.0).unwrap() - 4.0).abs() < 1e-13);
        assert!(tau_tilde(0.1, 1, s_max(0.1, 1).unwrap()).is_err());
    }

    #[test]
    fn s_of_t_zero_where_rate_is_one() {
        let sigma = 0.1;
        let c = solve_dispersion(OdeKind::SigmaPower { sigma, d: 1 }, 20.0, 1e-12).unwrap();
        let tau_star = (1.0 / (1.0 - sigma)).powf(1.0 / sigma);
        let t_star = c.time_at_tau(tau_star).unwrap();
        assert!((c.tau_dot_at(t_star).unwrap() - 1.0).abs() < 1e-9);
        assert!(s_of_t(sigma, 1, &c, t_star).unwrap().abs() < 1e-9);
        assert!(s_of_t(sigma, 1, &c, 0.0).is_err());
    }

    #[test]
    fn sigma0_values() {
        assert!((sigma0(3) - 0.5).abs() < 1e-15);
        assert!((sigma0(1) - (1.0 + 17f64.sqrt()) / 4.0).abs() < 1e-15);
        for d in 1..=6 {
            let s = sigma0(d);
            assert!(s > 1.0 / d as f64 && s < 2.0 / d as f64);
        }
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta_rate(1.0, 1, 0.05).unwrap(), 1.0);
        assert!((theta_rate(0.25, 1, 0.0).unwrap() - 0.5625 / 1.1875).abs() < 1e-14);
        assert!(theta_rate(0.1, 1, 0.2).is_err());
    }
}

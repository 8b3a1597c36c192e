use serde::Serialize;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl RateFit {
    /// `None` unless there are at least two positive, finite pairs and
    /// the abscissae are not all equal.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Option<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return None;
        }
        if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return None;
        }
        let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
        if sxx <= 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
        Some(Self { xs: xs.to_vec(), ys: ys.to_vec(), slope, intercept: my - slope * mx, r2 })
    }

    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let xs = [0.02, 0.04, 0.08, 0.16];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let f = RateFit::fit(&xs, &ys).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!((f.predict(0.1) - 3.0 * 0.1f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(RateFit::fit(&[1.0], &[1.0]).is_none());
        assert!(RateFit::fit(&[1.0, 2.0], &[0.0, 1.0]).is_none());
        assert!(RateFit::fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }

    #[test]
    fn r2_in_unit_interval() {
        let f = RateFit::fit(&[1.0, 2.0, 3.0, 4.0], &[1.0, 5.0, 2.0, 7.0]).unwrap();
        assert!((0.0..=1.0).contains(&f.r2));
    }
}

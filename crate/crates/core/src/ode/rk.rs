use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Accepted integrator state with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

/// Dormand–Prince 5(4) with FSAL and per-component absolute tolerances.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol: [atol; N],
            h0: 1e-6,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }

    /// Integrates from `t0` to `t_end`, landing exactly on every time in
    /// `stops`. Returns all accepted states, including the initial one.
    pub fn solve<F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        stops: &[f64],
    ) -> Result<Vec<Sample<N>>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut out = vec![Sample { t, y, dy: k1 }];
        let mut h = self.h0;
        let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > t0 && s < t_end).collect();
        targets.push(t_end);
        let mut next = 0;
        let mut steps = 0;
        while next < targets.len() {
            let target = targets[next];
            if t >= target {
                next += 1;
                continue;
            }
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepUnderflow { t });
            }
            h = h.min(self.h_max);
            let hit = t + h >= target;
            let step = if hit { target - t } else { h };
            let (y_new, k7, err) = self.attempt(&f, t, &y, &k1, step);
            if !err.is_finite() {
                h = step * 0.2;
                if h < self.h_min * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t });
                }
                continue;
            }
            if err <= 1.0 {
                t = if hit { target } else { t + step };
                y = y_new;
                k1 = k7;
                out.push(Sample { t, y, dy: k1 });
                if hit {
                    next += 1;
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !hit || step >= h {
                    h = step * fac;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < self.h_min * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
        Ok(out)
    }

    fn attempt<F>(
        &self,
        f: &F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
    ) -> ([f64; N], [f64; N], f64)
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let comb = |terms: &[(&[f64; N], f64)]| {
            let mut out = *y;
            for (k, a) in terms {
                for i in 0..N {
                    out[i] += h * a * k[i];
                }
            }
            out
        };
        let k2 = f(t + C2 * h, &comb(&[(k1, A21)]));
        let k3 = f(t + C3 * h, &comb(&[(k1, A31), (&k2, A32)]));
        let k4 = f(t + C4 * h, &comb(&[(k1, A41), (&k2, A42), (&k3, A43)]));
        let k5 = f(t + C5 * h, &comb(&[(k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]));
        let k6 = f(
            t + h,
            &comb(&[(k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]),
        );
        let y_new = comb(&[(k1, A71), (&k3, A73), (&k4, A74), (&k5, A75), (&k6, A76)]);
        let k7 = f(t + h, &y_new);
        let mut acc = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol[i] + self.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        (y_new, k7, (acc / N as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let rk = Dopri5::<1>::new(1e-12, 1e-14);
        let s = rk.solve(|_, y| [y[0]], 0.0, [1.0], 2.0, &[]).unwrap();
        let last = s.last().unwrap();
        assert_eq!(last.t, 2.0);
        assert!((last.y[0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_hits_stops() {
        let rk = Dopri5::<2>::new(1e-11, 1e-13);
        let stops = [0.5, 1.0, 1.5];
        let s = rk.solve(|_, y| [y[1], -y[0]], 0.0, [1.0, 0.0], 3.0, &stops).unwrap();
        for st in stops {
            let p = s.iter().find(|p| p.t == st).expect("stop present");
            assert!((p.y[0] - st.cos()).abs() < 1e-9);
        }
    }
}

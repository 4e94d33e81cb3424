//! Adaptive Dormand–Prince 5(4) integrator for fixed-size systems.
//!
//! Runs in this crate are short (t ≤ 1 in natural units), so a high-order
//! explicit scheme with tight local tolerances is enough; conserved
//! quantities are monitored by callers instead of enforced by the scheme.

use nalgebra::SVector;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("exceeded {max_steps} steps before reaching t = {t_end}")]
    TooManySteps { max_steps: usize, t_end: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 200_000,
            min_step: 1e-14,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded 4th-order error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step statistics of a finished integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to each time in `stops` (sorted,
/// all ≥ t0), returning the state at every stop.
///
/// `project` is applied to every accepted state; it lets matrix-group
/// charts pull the state back onto the constraint surface.
pub fn integrate_to<const N: usize>(
    mut f: impl FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    t0: f64,
    y0: SVector<f64, N>,
    stops: &[f64],
    opts: &OdeOptions,
    mut project: impl FnMut(&mut SVector<f64, N>),
) -> Result<(Vec<SVector<f64, N>>, OdeStats), OdeError> {
    let mut out = Vec::with_capacity(stops.len());
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&y, &k1, opts);

    for &t_stop in stops {
        debug_assert!(t_stop >= t - 1e-15, "stops must be sorted");
        while t < t_stop {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(OdeError::TooManySteps {
                    max_steps: opts.max_steps,
                    t_end: t_stop,
                });
            }
            let remaining = t_stop - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            let k2 = f(t + C2 * step, &(y + step * (A21 * k1)));
            let k3 = f(t + C3 * step, &(y + step * (A31 * k1 + A32 * k2)));
            let k4 = f(t + C4 * step, &(y + step * (A41 * k1 + A42 * k2 + A43 * k3)));
            let k5 = f(
                t + C5 * step,
                &(y + step * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)),
            );
            let k6 = f(
                t + step,
                &(y + step * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)),
            );
            let y_new = y + step * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let k7 = f(t + step, &y_new);
            let err_vec = step * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

            let mut acc = 0.0;
            for i in 0..N {
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let e = err_vec[i] / scale;
                acc += e * e;
            }
            let err = (acc / N as f64).sqrt();
            if !err.is_finite() {
                return Err(OdeError::NonFinite { t });
            }

            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { t_stop } else { t + step };
                y = y_new;
                project(&mut y);
                k1 = f(t, &y);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h = step * fac;
                } else {
                    h = h.max(step * fac);
                }
            } else {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h < opts.min_step {
                    return Err(OdeError::StepUnderflow { t });
                }
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

/// Convenience wrapper returning only the state at `t1`.
pub fn integrate<const N: usize>(
    f: impl FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    t0: f64,
    y0: SVector<f64, N>,
    t1: f64,
    opts: &OdeOptions,
) -> Result<SVector<f64, N>, OdeError> {
    let (mut states, _) = integrate_to(f, t0, y0, &[t1], opts, |_| {})?;
    Ok(states.pop().expect("one stop requested"))
}

fn initial_step<const N: usize>(
    y: &SVector<f64, N>,
    dy: &SVector<f64, N>,
    opts: &OdeOptions,
) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let scale = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / scale).powi(2);
        d1 += (dy[i] / scale).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.clamp(1e-8, 0.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn harmonic_oscillator_one_period() {
        let opts = OdeOptions::with_tol(1e-12);
        let y = integrate(
            |_, y: &Vector2<f64>| Vector2::new(y[1], -y[0]),
            0.0,
            Vector2::new(1.0, 0.0),
            2.0 * std::f64::consts::PI,
            &opts,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
        assert!(y[1].abs() < 1e-10);
    }

    #[test]
    fn stops_are_hit_exactly() {
        let opts = OdeOptions::with_tol(1e-12);
        let stops = [0.25, 0.5, 1.0];
        let (ys, stats) = integrate_to(
            |_, y: &SVector<f64, 1>| *y,
            0.0,
            SVector::<f64, 1>::new(1.0),
            &stops,
            &opts,
            |_| {},
        )
        .unwrap();
        for (y, t) in ys.iter().zip(stops) {
            assert!((y[0] - f64::exp(t)).abs() < 1e-11);
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn blowup_is_reported() {
        let opts = OdeOptions::with_tol(1e-10);
        let r = integrate(
            |_, y: &SVector<f64, 1>| SVector::<f64, 1>::new(y[0] * y[0]),
            0.0,
            SVector::<f64, 1>::new(1.0),
            2.0,
            &opts,
        );
        assert!(r.is_err());
    }
}

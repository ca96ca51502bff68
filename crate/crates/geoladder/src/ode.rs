//! Embedded Dormand-Prince 5(4) integrator with proportional step control,
//! for the small smooth systems this crate integrates (dimension 1 to 3).

use crate::error::{Error, Result};

/// Integration settings. Defaults match the quality-dynamics requirements:
/// tight tolerances, generous step bounds.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted sample of the solution.
#[derive(Debug, Clone)]
pub struct OdeSample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

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
// 4th-order weights (with the FSAL stage)
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_end`, producing every accepted
/// step. `monitor` is called after each accepted step and may stop the run
/// early by returning `false` (the final state is still recorded).
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t_end: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut monitor: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<Vec<OdeSample<N>>> {
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(t_end - t0).max(opts.h_min);
    let mut out = vec![OdeSample { t, y }];
    let mut k1 = f(t, &y);

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(out);
        }
        h = h.min(t_end - t).min(opts.h_max);

        let mut y2 = [0.0; N];
        for i in 0..N {
            y2[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = f(t + h / 5.0, &y2);
        let mut y3 = [0.0; N];
        for i in 0..N {
            y3[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + 3.0 * h / 10.0, &y3);
        let mut y4 = [0.0; N];
        for i in 0..N {
            y4[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + 4.0 * h / 5.0, &y4);
        let mut y5 = [0.0; N];
        for i in 0..N {
            y5[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + 8.0 * h / 9.0, &y5);
        let mut y6 = [0.0; N];
        for i in 0..N {
            y6[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + h, &y6);
        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] =
                y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = f(t + h, &y_new);

        // embedded error estimate
        let mut err: f64 = 0.0;
        for i in 0..N {
            let y4th = y[i]
                + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max(((y_new[i] - y4th) / scale).abs());
        }

        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            out.push(OdeSample { t, y });
            if !monitor(t, &y) {
                return Ok(out);
            }
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < opts.h_min {
            return Err(Error::StepSizeUnderflow {
                t,
                state: y.to_vec(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let sol = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            5.0,
            [1.0],
            &OdeOptions::default(),
            |_, _| true,
        )
        .unwrap();
        let last = sol.last().unwrap();
        assert!((last.t - 5.0).abs() < 1e-12);
        assert!((last.y[0] - (-5.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let sol = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            2.0 * std::f64::consts::PI,
            [1.0, 0.0],
            &OdeOptions::default(),
            |_, _| true,
        )
        .unwrap();
        let last = sol.last().unwrap();
        assert!((last.y[0] - 1.0).abs() < 1e-7);
        assert!(last.y[1].abs() < 1e-7);
    }

    #[test]
    fn monitor_stops_early() {
        let sol = integrate(
            |_, y: &[f64; 1]| [y[0]],
            0.0,
            50.0,
            [1.0],
            &OdeOptions::default(),
            |_, y| y[0] < 10.0,
        )
        .unwrap();
        assert!(sol.last().unwrap().y[0] >= 10.0);
        assert!(sol.last().unwrap().t < 5.0);
    }
}

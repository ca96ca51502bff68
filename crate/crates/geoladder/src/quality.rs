//! Fast innovation/diffusion dynamics of the regions' average relative
//! qualities, their closed-form steady state, the frontier growth rate, and
//! the stationary cross-sectional quality distribution.
//!
//! The innovation hazards share a common scale that moves with the current
//! average quality level; the drift of each region's average quality balances
//! resets to the frontier against the frontier's own growth. With the hazard
//! scale taken as the mean of the two region averages, the unique fixed point
//! is the closed-form steady state below, and the ratio of the two averages
//! contracts monotonically to one from any interior state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::params::{ModelParams, TradeFreeness};
use crate::spillover::SpilloverSpec;

/// Instantaneous state of the fast quality dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityState {
    pub a1: f64,
    pub a2: f64,
    pub t: f64,
}

impl QualityState {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        for (name, v) in [("a1", a1), ("a2", a2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter {
                    name: if name == "a1" { "a1" } else { "a2" },
                    value: v,
                    constraint: "interior of (0,1)",
                });
            }
        }
        Ok(QualityState { a1, a2, t: 0.0 })
    }

    /// Lyapunov value of the quality ratio, (x-1)^2 / 2 with x = a1/a2.
    pub fn ratio_lyapunov(&self) -> f64 {
        let x = self.a1 / self.a2;
        0.5 * (x - 1.0) * (x - 1.0)
    }
}

/// Conditional steady state of the quality block at a fixed researcher share.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QualitySteadyState {
    /// Common steady-state relative quality of both regions.
    pub a_bar: f64,
    /// Frontier growth rate.
    pub g: f64,
    /// Power-law exponent of the stationary distribution, upsilon / g.
    pub theta: f64,
    /// Effective reset hazard (mean of the two regional hazards).
    pub upsilon: f64,
}

/// Closed-form conditional steady state:
///
/// a_bar = (F1+F2) / (F1+F2 + 2 omega [z F1 + (1-z) F2]),
/// g     = omega a_bar [z F1 + (1-z) F2],
/// upsilon = a_bar (F1+F2) / 2,  theta = upsilon / g.
///
/// In the linear regime with gamma = 1 this reduces to
/// a_bar = 1/(1 + 2 omega B(z)) and g = omega B(z)/(1 + 2 omega B(z)) with
/// B(z) = b(1-2z)^2 + 2z(1-z).
pub fn steady_state(
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
) -> Result<QualitySteadyState> {
    let f1 = spec.f1(z, phi, params)?;
    let f2 = spec.f2(z, phi, params)?;
    let sum = f1 + f2;
    let weighted = z * f1 + (1.0 - z) * f2;
    let a_bar = sum / (sum + 2.0 * params.omega * weighted);
    let g = params.omega * a_bar * weighted;
    let upsilon = 0.5 * a_bar * sum;
    let theta = upsilon / g;
    Ok(QualitySteadyState {
        a_bar,
        g,
        theta,
        upsilon,
    })
}

/// Drift of the two average relative qualities at an interior state. The
/// hazard scale is the mean of the current averages, so the closed-form
/// steady state is an exact fixed point and the boundary drifts point inward.
pub fn quality_rhs(
    state: &QualityState,
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
) -> Result<(f64, f64)> {
    let f1 = spec.f1(z, phi, params)?;
    let f2 = spec.f2(z, phi, params)?;
    let m = 0.5 * (state.a1 + state.a2);
    let upsilon = 0.5 * m * (f1 + f2);
    let g = params.omega * m * (z * f1 + (1.0 - z) * f2);
    Ok((
        upsilon * (1.0 - state.a1) - g * state.a1,
        upsilon * (1.0 - state.a2) - g * state.a2,
    ))
}

/// One sampled point of a quality trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QualitySample {
    pub t: f64,
    pub a1: f64,
    pub a2: f64,
    /// Lyapunov value of the quality ratio at this sample.
    pub v: f64,
}

/// Quality trajectory with adaptive sampling.
#[derive(Debug, Clone)]
pub struct QualityTrajectory {
    pub samples: Vec<QualitySample>,
    /// True when the run stopped because it reached the steady state within
    /// the requested tolerance (rather than exhausting the horizon).
    pub converged: bool,
    /// Number of times the interior clamp guard fired. Stays zero on all
    /// supported inputs.
    pub clamp_events: usize,
}

impl QualityTrajectory {
    pub fn terminal(&self) -> QualitySample {
        *self.samples.last().expect("trajectory has at least the initial sample")
    }
}

const CLAMP_LO: f64 = 1e-12;
const CLAMP_HI: f64 = 1.0 - 1e-12;

/// Integrates the fast quality dynamics from `initial` over `horizon`,
/// stopping early once both averages are within `tol` of the conditional
/// steady state.
pub fn integrate_quality(
    initial: &QualityState,
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
    horizon: f64,
    tol: f64,
) -> Result<QualityTrajectory> {
    let ss = steady_state(z, phi, params, spec)?;
    let f1 = spec.f1(z, phi, params)?;
    let f2 = spec.f2(z, phi, params)?;
    let sum = f1 + f2;
    let weighted = z * f1 + (1.0 - z) * f2;
    let omega = params.omega;

    let mut clamp_events = 0usize;
    let rhs = |_t: f64, y: &[f64; 2]| {
        let m = 0.5 * (y[0] + y[1]);
        let upsilon = 0.5 * m * sum;
        let g = omega * m * weighted;
        [
            upsilon * (1.0 - y[0]) - g * y[0],
            upsilon * (1.0 - y[1]) - g * y[1],
        ]
    };

    let opts = OdeOptions {
        rtol: 1e-9,
        atol: 1e-12,
        h_init: 1e-3,
        ..OdeOptions::default()
    };
    let mut converged = false;
    let sol = integrate(
        rhs,
        initial.t,
        initial.t + horizon,
        [initial.a1, initial.a2],
        &opts,
        |_t, y| {
            if (y[0] - ss.a_bar).abs() < tol && (y[1] - ss.a_bar).abs() < tol {
                converged = true;
                return false;
            }
            true
        },
    )?;

    let samples = sol
        .iter()
        .map(|s| {
            let mut a1 = s.y[0];
            let mut a2 = s.y[1];
            if !(CLAMP_LO..=CLAMP_HI).contains(&a1) {
                a1 = a1.clamp(CLAMP_LO, CLAMP_HI);
                clamp_events += 1;
            }
            if !(CLAMP_LO..=CLAMP_HI).contains(&a2) {
                a2 = a2.clamp(CLAMP_LO, CLAMP_HI);
                clamp_events += 1;
            }
            let x = a1 / a2;
            QualitySample {
                t: s.t,
                a1,
                a2,
                v: 0.5 * (x - 1.0) * (x - 1.0),
            }
        })
        .collect();

    Ok(QualityTrajectory {
        samples,
        converged,
        clamp_events,
    })
}

/// Stationary cross-sectional distribution of relative quality: a power law
/// H(a) = a^theta on [0, 1].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerLawDistribution {
    pub theta: f64,
}

impl PowerLawDistribution {
    pub fn cdf(&self, a: f64) -> f64 {
        a.clamp(0.0, 1.0).powf(self.theta)
    }

    pub fn mean(&self) -> f64 {
        self.theta / (self.theta + 1.0)
    }
}

/// Distribution descriptor from a steady state; errors when the frontier does
/// not grow (the distribution degenerates).
pub fn stationary_distribution(ss: &QualitySteadyState) -> Result<PowerLawDistribution> {
    if ss.g <= 0.0 {
        return Err(Error::DegenerateFrontier);
    }
    Ok(PowerLawDistribution {
        theta: ss.upsilon / ss.g,
    })
}

/// Exponential frontier path a_max(t) = a_max_0 exp(g t).
#[derive(Debug, Clone, Copy)]
pub struct FrontierPath {
    pub g: f64,
    pub a_max_0: f64,
    pub horizon: f64,
}

pub fn frontier_path(g: f64, a_max_0: f64, horizon: f64) -> FrontierPath {
    FrontierPath {
        g,
        a_max_0,
        horizon,
    }
}

impl FrontierPath {
    pub fn value_at(&self, t: f64) -> f64 {
        self.a_max_0 * (self.g * t).exp()
    }

    /// Uniformly sampled path over `[0, horizon]` with `n` intervals.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let t = self.horizon * i as f64 / n as f64;
                (t, self.value_at(t))
            })
            .collect()
    }

    /// Time for the frontier to double; infinite when g = 0.
    pub fn doubling_time(&self) -> f64 {
        2.0f64.ln() / self.g
    }
}

//! Slow migration dynamics: researchers drift toward the region offering the
//! higher utility, at a rate proportional to the utility gap. Includes the
//! reduced one-dimensional flow, the joint fast-slow system with explicit
//! quality states, and basin-of-attraction maps.

use serde::Serialize;

use crate::equilibrium::{find_equilibria, Equilibrium};
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::params::{ModelParams, TradeFreeness};
use crate::quality::QualityState;
use crate::shortrun::{utility_gap, utility_gap_offsteady};
use crate::spillover::SpilloverSpec;

/// Instantaneous state of the slow dynamics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MigrationState {
    pub z: f64,
    pub t: f64,
}

/// One sample of a reduced-form migration path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MigrationSample {
    pub t: f64,
    pub z: f64,
    pub gap: f64,
}

/// A migration run: the sampled path, whether it converged, and the
/// equilibrium it landed on.
#[derive(Debug, Clone)]
pub struct MigrationRun {
    pub samples: Vec<MigrationSample>,
    pub converged: bool,
    /// The matching rest point from the equilibrium enumeration, when the run
    /// converged to one within 1e-8.
    pub terminal: Option<Equilibrium>,
}

impl MigrationRun {
    pub fn terminal_z(&self) -> f64 {
        self.samples.last().expect("at least the initial sample").z
    }
}

/// Default |gap| tolerance that ends a run at an interior rest point.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Integrates dz/dt = kappa * gap(z) from `z0`, projecting onto [0, 1] and
/// stopping early at an interior rest point (|gap| < tol) or at an absorbing
/// boundary (boundary with outward drift).
pub fn simulate(
    z0: f64,
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
    horizon: f64,
    tol: f64,
) -> Result<MigrationRun> {
    if !(0.0..=1.0).contains(&z0) {
        return Err(Error::InvalidParameter {
            name: "z0",
            value: z0,
            constraint: "z0 in [0,1]",
        });
    }
    let kappa = params.kappa;
    let gap_at = |z: f64| utility_gap(z.clamp(0.0, 1.0), phi, params, spec);

    // surface spillover-domain errors before integrating
    gap_at(z0)?;
    let mut caught: Option<Error> = None;
    let rhs = |_t: f64, y: &[f64; 1]| match gap_at(y[0]) {
        Ok(g) => [kappa * g],
        Err(e) => {
            caught.get_or_insert(e);
            [f64::NAN]
        }
    };

    let mut done = false;
    let opts = OdeOptions {
        rtol: 1e-10,
        atol: 1e-13,
        h_init: 1e-3,
        ..OdeOptions::default()
    };
    let sol = integrate(rhs, 0.0, horizon, [z0], &opts, |_t, y| {
        let z = y[0].clamp(0.0, 1.0);
        let g = utility_gap(z, phi, params, spec).unwrap_or(f64::NAN);
        let interior_rest = z > 0.0 && z < 1.0 && g.abs() < tol;
        let absorbed = (z >= 1.0 && g > 0.0) || (z <= 0.0 && g < 0.0);
        if interior_rest || absorbed {
            done = true;
            return false;
        }
        true
    });
    let sol = match sol {
        Ok(s) => s,
        Err(Error::StepSizeUnderflow { t, state }) => {
            if let Some(e) = caught {
                return Err(e);
            }
            return Err(Error::StepSizeUnderflow { t, state });
        }
        Err(e) => return Err(e),
    };
    if let Some(e) = caught {
        return Err(e);
    }

    let samples: Vec<MigrationSample> = sol
        .iter()
        .map(|s| {
            let z = s.y[0].clamp(0.0, 1.0);
            MigrationSample {
                t: s.t,
                z,
                gap: utility_gap(z, phi, params, spec).expect("gap evaluated along the path"),
            }
        })
        .collect();

    let terminal = if done {
        let z_end = samples.last().unwrap().z;
        find_equilibria(params, phi, spec)?
            .into_iter()
            .filter(|e| (e.z_star - z_end).abs() < 1e-8)
            .min_by(|a, b| {
                (a.z_star - z_end)
                    .abs()
                    .total_cmp(&(b.z_star - z_end).abs())
            })
    } else {
        None
    };

    Ok(MigrationRun {
        samples,
        converged: done,
        terminal,
    })
}

/// One sample of a joint fast-slow path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoupledSample {
    pub t: f64,
    pub z: f64,
    pub a1: f64,
    pub a2: f64,
    pub gap: f64,
}

/// Jointly integrates the quality drift and the migration flow, with the
/// migration speed scaled down by `epsilon_ratio`. The utility gap is
/// evaluated at the current (possibly unequal) quality levels; as the ratio
/// shrinks, the researcher path approaches the reduced-form path of
/// [`simulate`] run at the same nominal speed.
pub fn simulate_coupled(
    z0: f64,
    quality0: &QualityState,
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
    horizon: f64,
    epsilon_ratio: f64,
) -> Result<Vec<CoupledSample>> {
    if !(0.0 < epsilon_ratio && epsilon_ratio < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon_ratio",
            value: epsilon_ratio,
            constraint: "0 < epsilon_ratio < 1",
        });
    }
    let kappa_eff = epsilon_ratio * params.kappa;
    let mut caught: Option<Error> = None;
    let rhs = |_t: f64, y: &[f64; 3]| {
        let z = y[0].clamp(0.0, 1.0);
        let (a1, a2) = (y[1], y[2]);
        let evals = (|| -> Result<(f64, f64, f64)> {
            let f1 = spec.f1(z, phi, params)?;
            let f2 = spec.f2(z, phi, params)?;
            let gap = utility_gap_offsteady(z, phi, params, spec, a1, a2)?;
            Ok((f1, f2, gap))
        })();
        match evals {
            Ok((f1, f2, gap)) => {
                let m = 0.5 * (a1 + a2);
                let upsilon = 0.5 * m * (f1 + f2);
                let g = params.omega * m * (z * f1 + (1.0 - z) * f2);
                [
                    kappa_eff * gap,
                    upsilon * (1.0 - a1) - g * a1,
                    upsilon * (1.0 - a2) - g * a2,
                ]
            }
            Err(e) => {
                caught.get_or_insert(e);
                [f64::NAN; 3]
            }
        }
    };
    let opts = OdeOptions {
        rtol: 1e-9,
        atol: 1e-12,
        h_init: 1e-3,
        ..OdeOptions::default()
    };
    let sol = integrate(
        rhs,
        0.0,
        horizon,
        [z0, quality0.a1, quality0.a2],
        &opts,
        |_, _| true,
    )?;
    if let Some(e) = caught {
        return Err(e);
    }
    Ok(sol
        .iter()
        .map(|s| {
            let z = s.y[0].clamp(0.0, 1.0);
            CoupledSample {
                t: s.t,
                z,
                a1: s.y[1],
                a2: s.y[2],
                gap: utility_gap_offsteady(z, phi, params, spec, s.y[1], s.y[2])
                    .expect("gap along the path"),
            }
        })
        .collect())
}

/// Basin map over a uniform grid of initial shares.
#[derive(Debug, Clone, Serialize)]
pub struct BasinMap {
    /// Stable rest points, ascending.
    pub attractors: Vec<f64>,
    /// `(z0, attractor index)` per grid point; `None` marks non-convergence
    /// within the horizon.
    pub assignments: Vec<(f64, Option<usize>)>,
}

/// Integrates every grid initial condition and assigns it to the stable
/// equilibrium it reaches. Deterministic by grid index.
pub fn basins(
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
    n_grid: usize,
) -> Result<BasinMap> {
    if n_grid < 2 {
        return Err(Error::Precondition(format!(
            "basin grid needs at least 2 points, got {n_grid}"
        )));
    }
    let eqs = find_equilibria(params, phi, spec)?;
    let attractors: Vec<f64> = eqs
        .iter()
        .filter(|e| e.regular && e.stable)
        .map(|e| e.z_star)
        .collect();
    let mut assignments = Vec::with_capacity(n_grid);
    for i in 0..n_grid {
        let z0 = i as f64 / (n_grid - 1) as f64;
        let run = simulate(z0, params, phi, spec, 1e6, CONVERGENCE_TOL)?;
        let idx = if run.converged {
            let z_end = run.terminal_z();
            attractors
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - z_end).abs().total_cmp(&(b.1 - z_end).abs()))
                .filter(|(_, &z)| (z - z_end).abs() < 1e-6)
                .map(|(k, _)| k)
        } else {
            None
        };
        assignments.push((z0, idx));
    }
    Ok(BasinMap {
        attractors,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::EquilibriumKind;

    fn phi(v: f64) -> TradeFreeness {
        TradeFreeness::new(v).unwrap()
    }

    fn fig1() -> ModelParams {
        ModelParams::baseline(2.0, 1.0, 5.0, 0.342).unwrap()
    }

    #[test]
    fn even_split_stays_put() {
        let run = simulate(
            0.5,
            &fig1(),
            phi(0.3),
            &SpilloverSpec::LinearLocalGlobal,
            100.0,
            CONVERGENCE_TOL,
        )
        .unwrap();
        assert!(run.converged);
        for s in &run.samples {
            assert_eq!(s.z, 0.5);
        }
    }

    #[test]
    fn converges_to_stable_asymmetric_equilibrium() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let run = simulate(0.6, &p, phi(0.3), &spec, 1e6, CONVERGENCE_TOL).unwrap();
        assert!(run.converged);
        let term = run.terminal.expect("terminal equilibrium matched");
        assert_eq!(term.kind, EquilibriumKind::AsymmetricDispersion);
        assert!(term.stable);
        assert!((run.terminal_z() - term.z_star).abs() < 1e-8);
        assert!((term.z_star - 0.9067).abs() < 1e-3);
    }

    #[test]
    fn flows_into_agglomeration_when_boundary_attracts() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let run = simulate(0.51, &p, phi(0.38), &spec, 1e6, CONVERGENCE_TOL).unwrap();
        assert!(run.converged);
        assert_eq!(run.terminal_z(), 1.0);
        let term = run.terminal.expect("matched boundary equilibrium");
        assert_eq!(term.kind, EquilibriumKind::Agglomeration);
        assert!(term.stable);
    }

    #[test]
    fn boundary_with_inward_drift_flows_inside() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let run = simulate(1.0, &p, phi(0.1), &spec, 1e6, CONVERGENCE_TOL).unwrap();
        assert!(run.converged);
        assert!((run.terminal_z() - 0.5).abs() < 1e-8);
        let term = run.terminal.expect("matched the symmetric rest point");
        assert_eq!(term.kind, EquilibriumKind::SymmetricDispersion);
    }

    #[test]
    fn paths_are_monotone_between_equilibria() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        for (ph, z0) in [(0.3, 0.6), (0.3, 0.95), (0.1, 0.8), (0.38, 0.7)] {
            let run = simulate(z0, &p, phi(ph), &spec, 1e6, CONVERGENCE_TOL).unwrap();
            let dir = (run.terminal_z() - z0).signum();
            for w in run.samples.windows(2) {
                assert!(
                    dir * (w[1].z - w[0].z) >= -1e-12,
                    "non-monotone step at t = {}",
                    w[1].t
                );
            }
        }
    }

    #[test]
    fn terminal_points_are_stable_equilibria() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        for ph in [0.1, 0.3, 0.38, 0.41] {
            for i in 0..20 {
                let z0 = 0.025 + 0.95 * i as f64 / 19.0;
                let run = simulate(z0, &p, phi(ph), &spec, 1e6, CONVERGENCE_TOL).unwrap();
                if let Some(term) = run.terminal {
                    assert!(
                        term.stable || !term.regular || (z0 - term.z_star).abs() < 1e-9,
                        "landed on unstable equilibrium {term:?} from z0 = {z0} at phi = {ph}"
                    );
                }
            }
        }
    }

    #[test]
    fn speed_rescaling_leaves_the_path_unchanged() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let fast = ModelParams { kappa: 2.0, ..p };
        for horizon in [5.0, 20.0, 80.0] {
            let slow_run = simulate(0.6, &p, phi(0.3), &spec, horizon, 0.0).unwrap();
            let fast_run = simulate(0.6, &fast, phi(0.3), &spec, horizon / 2.0, 0.0).unwrap();
            let a = slow_run.samples.last().unwrap().z;
            let b = fast_run.samples.last().unwrap().z;
            assert!((a - b).abs() < 1e-8, "horizon {horizon}: {a} vs {b}");
        }
    }

    fn interp(samples: &[CoupledSample], t: f64) -> f64 {
        let mut prev = samples[0];
        for s in samples {
            if s.t >= t {
                if s.t == prev.t {
                    return s.z;
                }
                let w = (t - prev.t) / (s.t - prev.t);
                return prev.z + w * (s.z - prev.z);
            }
            prev = *s;
        }
        samples.last().unwrap().z
    }

    fn interp_reduced(samples: &[MigrationSample], t: f64) -> f64 {
        let mut prev = samples[0];
        for s in samples {
            if s.t >= t {
                if s.t == prev.t {
                    return s.z;
                }
                let w = (t - prev.t) / (s.t - prev.t);
                return prev.z + w * (s.z - prev.z);
            }
            prev = *s;
        }
        samples.last().unwrap().z
    }

    #[test]
    fn coupled_path_approaches_reduced_path_as_separation_widens() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let ph = phi(0.3);
        let q0 = QualityState::new(0.3, 0.8).unwrap();
        // reduced path in slow time tau = eps * t, shares the same curve for
        // every eps once time is rescaled
        let tau_end = 3.0;
        let reduced = simulate(0.6, &p, ph, &spec, tau_end, 0.0).unwrap();
        let mut gaps = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3] {
            let run =
                simulate_coupled(0.6, &q0, &p, ph, &spec, tau_end / eps, eps).unwrap();
            let sup = (0..=60)
                .map(|k| {
                    let tau = tau_end * k as f64 / 60.0;
                    let zc = interp(&run, tau / eps);
                    let zr = interp_reduced(&reduced.samples, tau);
                    (zc - zr).abs()
                })
                .fold(0.0f64, f64::max);
            gaps.push(sup);
        }
        assert!(
            gaps[1] < gaps[0] && gaps[2] < gaps[1],
            "sup-norm gaps not decreasing: {gaps:?}"
        );
    }

    #[test]
    fn coupled_quality_ratio_equalizes() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let q0 = QualityState::new(0.2, 0.9).unwrap();
        let run = simulate_coupled(0.6, &q0, &p, phi(0.3), &spec, 400.0, 1e-2).unwrap();
        let mut prev_v = f64::INFINITY;
        for s in &run {
            let x = s.a1 / s.a2;
            let v = 0.5 * (x - 1.0) * (x - 1.0);
            assert!(v <= prev_v + 1e-12, "ratio Lyapunov rose at t = {}", s.t);
            prev_v = v;
        }
        let last = run.last().unwrap();
        assert!((last.a1 / last.a2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn even_split_with_asymmetric_quality_barely_moves() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let q0 = QualityState::new(0.3, 0.7).unwrap();
        let eps = 1e-3;
        let run = simulate_coupled(0.5, &q0, &p, phi(0.3), &spec, 200.0, eps).unwrap();
        let max_dev = run
            .iter()
            .map(|s| (s.z - 0.5).abs())
            .fold(0.0f64, f64::max);
        // the symmetric point only drifts at the slow rate while qualities
        // equalize, so the excursion scales with eps
        assert!(max_dev < 20.0 * eps, "excursion {max_dev}");
        let last = run.last().unwrap();
        assert!((last.a1 - last.a2).abs() < 1e-8);
    }

    #[test]
    fn basins_follow_the_unstable_separatrices() {
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;

        // phi past the restabilization point: three basins, the middle one
        // attracted to the even split and separated by the unstable pair
        let map = basins(&p, phi(0.402), &spec, 41).unwrap();
        assert_eq!(map.attractors.len(), 3);
        let eqs = find_equilibria(&p, phi(0.402), &spec).unwrap();
        let unstable: Vec<f64> = eqs
            .iter()
            .filter(|e| !e.stable && e.kind == EquilibriumKind::AsymmetricDispersion)
            .map(|e| e.z_star)
            .collect();
        assert_eq!(unstable.len(), 2);
        for (z0, idx) in &map.assignments {
            let idx = idx.expect("all grid points converge");
            let attractor = map.attractors[idx];
            if *z0 > unstable[0] + 1e-3 && *z0 < unstable[1] - 1e-3 {
                assert_eq!(attractor, 0.5, "z0 = {z0}");
            } else if *z0 < unstable[0] - 1e-3 {
                assert!(attractor < 0.5, "z0 = {z0}");
            } else if *z0 > unstable[1] + 1e-3 {
                assert!(attractor > 0.5, "z0 = {z0}");
            }
        }

        // low integration: a single basin to the even split
        let map = basins(&p, phi(0.1), &spec, 21).unwrap();
        assert_eq!(map.attractors, vec![0.5]);
        assert!(map
            .assignments
            .iter()
            .all(|(_, idx)| *idx == Some(0)));
    }
}

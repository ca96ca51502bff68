//! Enumeration and stability classification of long-run migration equilibria:
//! the symmetric split (always an equilibrium), interior roots of the utility
//! gap, and full agglomeration when the boundary gap is non-negative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, TradeFreeness};
use crate::roots::scan_roots;
use crate::shortrun::{symmetric_slope, utility_gap, utility_gap_slope};
use crate::spillover::SpilloverSpec;

/// Kind of long-run equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    SymmetricDispersion,
    AsymmetricDispersion,
    Agglomeration,
}

/// A located long-run rest point of the migration dynamics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Equilibrium {
    pub z_star: f64,
    pub kind: EquilibriumKind,
    /// Stability verdict. Meaningless when `regular` is false.
    pub stable: bool,
    /// False when the deciding quantity sits inside the classification
    /// tolerance, so no stability claim is made.
    pub regular: bool,
    /// |dv(z*)| for interior points, |dv| at the boundary for agglomeration.
    pub residual: f64,
    /// d(dv)/dz at interior points; NaN at the boundary.
    pub derivative: f64,
}

/// Tolerance below which a stability-deciding quantity is treated as zero and
/// the equilibrium flagged irregular.
pub const CLASSIFY_TOL: f64 = 1e-10;

/// Number of scan cells on (1/2, 1); the gap has at most four interior
/// critical points, so this cannot straddle two roots.
const SCAN_CELLS: usize = 2048;
const SCAN_MARGIN: f64 = 1e-9;
const ROOT_XTOL: f64 = 1e-12;
const ROOT_MERGE: f64 = 1e-9;

/// Enumerates all equilibria on [0, 1]: the symmetric split, every interior
/// root of the gap on (1/2, 1) located by sign scan and bisection, the
/// boundary when the gap there is non-negative, and the mirror images.
/// Results are sorted by location and classified.
///
/// Errors with [`Error::TooManyEquilibria`] if more than two equilibria are
/// located on (1/2, 1].
pub fn find_equilibria(
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
) -> Result<Vec<Equilibrium>> {
    // Custom spillovers may fail inside the scan; surface the first error.
    let mut first_err: Option<Error> = None;
    let mut gap = |z: f64| match utility_gap(z, phi, params, spec) {
        Ok(v) => v,
        Err(e) => {
            if first_err.is_none() {
                first_err = Some(e);
            }
            f64::NAN
        }
    };

    let interior = scan_roots(
        &mut gap,
        0.5 + SCAN_MARGIN,
        1.0 - SCAN_MARGIN,
        SCAN_CELLS,
        ROOT_XTOL,
        ROOT_MERGE,
    );
    if let Some(e) = first_err {
        return Err(e);
    }

    let boundary_gap = utility_gap(1.0, phi, params, spec)?;
    let n_upper = interior.len() + usize::from(boundary_gap >= 0.0);
    if n_upper > 2 {
        return Err(Error::TooManyEquilibria { count: n_upper });
    }

    let mut eqs = Vec::with_capacity(2 * n_upper + 1);
    eqs.push(classify_at(0.5, EquilibriumKind::SymmetricDispersion, params, phi, spec)?);
    for &z in &interior {
        eqs.push(classify_at(z, EquilibriumKind::AsymmetricDispersion, params, phi, spec)?);
        eqs.push(classify_at(
            1.0 - z,
            EquilibriumKind::AsymmetricDispersion,
            params,
            phi,
            spec,
        )?);
    }
    if boundary_gap >= 0.0 {
        eqs.push(classify_at(1.0, EquilibriumKind::Agglomeration, params, phi, spec)?);
        eqs.push(classify_at(0.0, EquilibriumKind::Agglomeration, params, phi, spec)?);
    }
    eqs.sort_by(|a, b| a.z_star.total_cmp(&b.z_star));
    Ok(eqs)
}

fn classify_at(
    z: f64,
    kind: EquilibriumKind,
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
) -> Result<Equilibrium> {
    let eq = Equilibrium {
        z_star: z,
        kind,
        stable: false,
        regular: true,
        residual: 0.0,
        derivative: f64::NAN,
    };
    classify_stability(eq, params, phi, spec)
}

/// Fills in the stability label, regularity flag, residual and derivative of
/// a located equilibrium.
///
/// Interior points are stable iff the gap slope there is below `-CLASSIFY_TOL`;
/// the boundary is stable iff the gap at it strictly exceeds `CLASSIFY_TOL`.
/// Values inside the tolerance yield `regular = false` with no stability
/// claim.
pub fn classify_stability(
    eq: Equilibrium,
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
) -> Result<Equilibrium> {
    let mut out = eq;
    match eq.kind {
        EquilibriumKind::Agglomeration => {
            let z = eq.z_star;
            let gap = utility_gap(z, phi, params, spec)?;
            // outward gap: positive at z=1, negative at z=0 means stable
            let outward = if z >= 0.5 { gap } else { -gap };
            out.residual = gap.abs();
            out.derivative = f64::NAN;
            if outward.abs() <= CLASSIFY_TOL {
                out.regular = false;
                out.stable = false;
            } else {
                out.regular = true;
                out.stable = outward > 0.0;
            }
        }
        EquilibriumKind::SymmetricDispersion | EquilibriumKind::AsymmetricDispersion => {
            let z = eq.z_star;
            out.residual = utility_gap(z, phi, params, spec)?.abs();
            // The symmetric point admits an exact slope in every regime;
            // elsewhere use the regime's gap slope.
            let slope = if z == 0.5 {
                symmetric_slope(phi, params, spec)
            } else {
                utility_gap_slope(z, phi, params, spec)?
            };
            out.derivative = slope;
            if slope.abs() <= CLASSIFY_TOL {
                out.regular = false;
                out.stable = false;
            } else {
                out.regular = true;
                out.stable = slope < 0.0;
            }
        }
    }
    Ok(out)
}

/// The stable subset, preserving order.
pub fn stable_set(eqs: &[Equilibrium]) -> Vec<Equilibrium> {
    eqs.iter().filter(|e| e.regular && e.stable).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::bisect;

    fn phi(v: f64) -> TradeFreeness {
        TradeFreeness::new(v).unwrap()
    }

    fn fig1() -> ModelParams {
        ModelParams::baseline(2.0, 1.0, 5.0, 0.342).unwrap()
    }

    fn kinds(eqs: &[Equilibrium]) -> Vec<(EquilibriumKind, bool)> {
        eqs.iter().map(|e| (e.kind, e.stable)).collect()
    }

    #[test]
    fn low_freeness_only_stable_symmetric() {
        let eqs = find_equilibria(&fig1(), phi(0.1), &SpilloverSpec::LinearLocalGlobal).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::SymmetricDispersion);
        assert!(eqs[0].stable && eqs[0].regular);
        assert_eq!(eqs[0].z_star, 0.5);
    }

    #[test]
    fn high_freeness_only_stable_symmetric() {
        let eqs = find_equilibria(&fig1(), phi(0.8), &SpilloverSpec::LinearLocalGlobal).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!(eqs[0].stable);
    }

    #[test]
    fn intermediate_freeness_stable_asymmetric_pair() {
        let eqs = find_equilibria(&fig1(), phi(0.3), &SpilloverSpec::LinearLocalGlobal).unwrap();
        // mirror pair of stable asymmetric equilibria around an unstable split
        assert_eq!(eqs.len(), 3);
        assert_eq!(
            kinds(&eqs),
            vec![
                (EquilibriumKind::AsymmetricDispersion, true),
                (EquilibriumKind::SymmetricDispersion, false),
                (EquilibriumKind::AsymmetricDispersion, true),
            ]
        );
        assert!((eqs[2].z_star - 0.9067).abs() < 1e-3);
        assert!((eqs[0].z_star + eqs[2].z_star - 1.0).abs() < 1e-9);
        for e in &eqs {
            assert!(e.residual < 1e-10);
        }
    }

    #[test]
    fn agglomeration_window() {
        let eqs = find_equilibria(&fig1(), phi(0.38), &SpilloverSpec::LinearLocalGlobal).unwrap();
        assert_eq!(eqs.len(), 3);
        assert_eq!(
            kinds(&eqs),
            vec![
                (EquilibriumKind::Agglomeration, true),
                (EquilibriumKind::SymmetricDispersion, false),
                (EquilibriumKind::Agglomeration, true),
            ]
        );
    }

    #[test]
    fn just_above_second_break_point_five_equilibria() {
        // For these parameters the symmetric split restabilizes at
        // phi = 0.401006...; slightly above it the gap still bulges positive,
        // giving the coexistence pattern: stable symmetric split, unstable
        // inner pair, stable outer pair, no agglomeration.
        let eqs = find_equilibria(&fig1(), phi(0.402), &SpilloverSpec::LinearLocalGlobal).unwrap();
        assert_eq!(eqs.len(), 5);
        assert_eq!(
            kinds(&eqs),
            vec![
                (EquilibriumKind::AsymmetricDispersion, true),
                (EquilibriumKind::AsymmetricDispersion, false),
                (EquilibriumKind::SymmetricDispersion, true),
                (EquilibriumKind::AsymmetricDispersion, false),
                (EquilibriumKind::AsymmetricDispersion, true),
            ]
        );
    }

    #[test]
    fn at_figure_parameters_phi_040_split_is_marginally_unstable() {
        // phi = 0.4 sits a hair below the restabilization point 0.401006...,
        // so the split is (barely) unstable and only the outer stable pair
        // remains.
        let eqs = find_equilibria(&fig1(), phi(0.4), &SpilloverSpec::LinearLocalGlobal).unwrap();
        assert_eq!(eqs.len(), 3);
        assert_eq!(
            kinds(&eqs),
            vec![
                (EquilibriumKind::AsymmetricDispersion, true),
                (EquilibriumKind::SymmetricDispersion, false),
                (EquilibriumKind::AsymmetricDispersion, true),
            ]
        );
    }

    #[test]
    fn symmetric_point_stable_at_very_low_freeness_scenario_i() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        let eqs = find_equilibria(&p, phi(0.05), &SpilloverSpec::LinearLocalGlobal).unwrap();
        let sym = eqs
            .iter()
            .find(|e| e.kind == EquilibriumKind::SymmetricDispersion)
            .unwrap();
        assert!(sym.stable && sym.regular);
    }

    #[test]
    fn irregular_boundary_at_a_sustain_point() {
        // Tune phi so that the boundary gap is exactly zero, then check the
        // classifier refuses to label it.
        let p = fig1();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let gap1 = |ph: f64| {
            utility_gap(1.0, phi(ph), &p, &spec).unwrap()
        };
        // gap(1) goes from negative (0.3) to positive (0.38)
        let phis = bisect(gap1, 0.3, 0.38, 1e-15);
        let eq = Equilibrium {
            z_star: 1.0,
            kind: EquilibriumKind::Agglomeration,
            stable: false,
            regular: true,
            residual: 0.0,
            derivative: f64::NAN,
        };
        let out = classify_stability(eq, &p, phi(phis), &spec).unwrap();
        assert!(!out.regular);
        assert!(out.residual <= CLASSIFY_TOL);
    }

    #[test]
    fn too_many_roots_is_an_internal_error() {
        // An oscillatory custom spillover violates the two-equilibria bound.
        let p = ModelParams::baseline(2.0, 1.0, 5.0, 0.5).unwrap();
        let spec = SpilloverSpec::custom(
            |z| 1.0 + 0.9 * (20.0 * std::f64::consts::PI * z).sin(),
            1.0,
            0.9 * 20.0 * std::f64::consts::PI,
        );
        match find_equilibria(&p, phi(0.5), &spec) {
            Err(Error::TooManyEquilibria { count }) => assert!(count > 2),
            other => panic!("expected TooManyEquilibria, got {other:?}"),
        }
    }

    #[test]
    fn custom_error_propagates_from_scan() {
        let p = ModelParams::baseline(2.0, 1.0, 5.0, 0.5).unwrap();
        let spec = SpilloverSpec::custom(|z| 0.6 - z, 0.1, -1.0);
        assert!(matches!(
            find_equilibria(&p, phi(0.5), &spec),
            Err(Error::SpilloverDomain { .. })
        ));
    }
}

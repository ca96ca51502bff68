//! Short-run equilibrium block: researcher wages, price indices, indirect
//! utilities and the utility gap `dv(z) = v1(z) - v2(z)` that drives
//! migration, together with its exact derivatives.
//!
//! All quantities are evaluated at the conditional quality steady state, where
//! the two regions share a common relative quality. The common additive
//! constant of the indirect utilities cancels in the gap and is omitted
//! throughout.

use serde::Serialize;

use crate::error::Result;
use crate::params::{ModelParams, TradeFreeness};
use crate::spillover::SpilloverSpec;

/// Central finite-difference step used by derivative fallbacks.
pub const FD_STEP: f64 = 1e-6;

/// Aggregate market size facing region-1 producers, in researcher-share
/// units: own demand plus freeness-discounted foreign demand.
#[inline]
pub(crate) fn market_size_1(z: f64, phi: f64) -> f64 {
    z + phi * (1.0 - z)
}

/// Mirrored market size facing region-2 producers. Written so that it equals
/// `market_size_1` bit-for-bit at z = 1/2.
#[inline]
pub(crate) fn market_size_2(z: f64, phi: f64) -> f64 {
    (1.0 - z) + phi * z
}

/// Market-access factor of region 1: demand-weighted inverse price terms that
/// multiply the spillover level in the wage.
#[inline]
pub fn market_access(z: f64, phi: f64, lambda: f64) -> f64 {
    (lambda / 2.0 + z) / market_size_1(z, phi)
        + phi * (lambda / 2.0 + 1.0 - z) / market_size_2(z, phi)
}

/// Utility gap dv(z) = v1(z) - v2(z) at the conditional quality steady state.
///
/// dv(z) = (mu/sigma) [F1(z) T(z) - F2(z) T(1-z)]
///       + (mu/(sigma-1)) ln[(z + phi(1-z)) / (phi z + 1-z)]
///
/// with T the market-access factor. Antisymmetric around z = 1/2 and linear
/// in mu.
pub fn utility_gap(
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
) -> Result<f64> {
    let p = phi.get();
    let f1 = spec.f1(z, phi, params)?;
    let f2 = spec.f2(z, phi, params)?;
    let t1 = market_access(z, p, params.lambda);
    let t2 = market_access(1.0 - z, p, params.lambda);
    let wage_term = (params.mu / params.sigma) * (f1 * t1 - f2 * t2);
    let price_term = (params.mu / (params.sigma - 1.0))
        * (market_size_1(z, p) / market_size_2(z, p)).ln();
    Ok(wage_term + price_term)
}

/// Quartic numerator of d(dv)/dz in the linear regime. The sign of the slope
/// is the sign of this polynomial; it has at most four real roots, which caps
/// the number of interior equilibria.
pub(crate) fn slope_quartic(z: f64, phi: f64, params: &ModelParams) -> f64 {
    let (l, g, s, b) = (params.lambda, params.gamma, params.sigma, params.b);
    let pm1 = phi - 1.0;
    let a1 = 4.0 * (1.0 - 2.0 * b) * g * (s - 1.0) * pm1.powi(3) * (phi + 1.0);
    let a2 = -2.0 * a1;
    let a3 = g * (s - 1.0)
        * (b * (phi + 1.0) * ((l - 2.0) * phi * phi - l + 18.0 * phi - 4.0)
            - phi * (l * pm1 * phi + l + 6.0 * phi)
            + l
            - 8.0 * phi
            + 2.0)
        + s * (phi + 1.0) * pm1 * pm1;
    let a4 = g * (s - 1.0)
        * (l * pm1 * (b * (phi + 1.0).powi(2) - phi * phi - 1.0)
            + 2.0 * phi * (b * (phi + 1.0) * (phi + 5.0) - phi * (phi + 2.0) - 3.0))
        + s * (phi + 1.0) * pm1 * pm1;
    let a5 = g * (s - 1.0)
        * (l * (phi * phi + 1.0) * (b * (phi + 1.0).powi(2) - phi * phi - 1.0)
            + 2.0 * phi
                * (b * (phi.powi(3) + 3.0 * phi * phi + phi - 1.0)
                    - phi * (phi * phi + phi + 1.0)
                    + 1.0))
        - 2.0 * s * phi * (phi * phi - 1.0);
    a1 * z.powi(4) + a2 * z.powi(3) - 2.0 * (1.0 - phi) * a3 * z * z
        + 2.0 * (1.0 - phi) * a4 * z
        + a5
}

/// d(dv)/dz. Exact rational closed form in the linear regime; central finite
/// difference (step `FD_STEP`) for the other variants.
pub fn utility_gap_slope(
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
) -> Result<f64> {
    match spec {
        SpilloverSpec::LinearLocalGlobal => {
            let p = phi.get();
            let d1 = z * (p - 1.0) + 1.0;
            let d2 = z * (1.0 - p) + p;
            let den = 2.0 * (params.sigma - 1.0) * params.sigma * d1 * d1 * d2 * d2;
            Ok(params.mu * slope_quartic(z, p, params) / den)
        }
        _ => {
            let h = FD_STEP;
            let up = utility_gap(z + h, phi, params, spec)?;
            let dn = utility_gap(z - h, phi, params, spec)?;
            Ok((up - dn) / (2.0 * h))
        }
    }
}

/// Exact slope of the utility gap at the symmetric point for any variant,
/// expressed through F(1/2) and F'(1/2):
///
/// d(dv)/dz(1/2) = 2 mu B / [sigma (sigma-1) (phi+1)^2]
///
/// where `B` is [`symmetric_break_general`]. Used wherever the symmetric
/// point's stability must be decided without finite-difference noise.
pub fn symmetric_slope(phi: TradeFreeness, params: &ModelParams, spec: &SpilloverSpec) -> f64 {
    let p = phi.get();
    let b = symmetric_break_general(
        spec.f_half(phi, params),
        spec.fprime_half(phi, params),
        p,
        params,
    );
    2.0 * params.mu * b / (params.sigma * (params.sigma - 1.0) * (p + 1.0) * (p + 1.0))
}

/// Symmetric-dispersion stability function for an arbitrary spillover level
/// `f0 = F(1/2)` and gradient `f1 = F'(1/2)`; the symmetric point is stable
/// iff the returned value is negative. Specializes to
/// [`crate::thresholds::symmetric_break_condition`] in the linear regime.
pub fn symmetric_break_general(f0: f64, f1: f64, phi: f64, params: &ModelParams) -> f64 {
    let (l, s) = (params.lambda, params.sigma);
    f1 * (s - 1.0) * (l + 1.0) * (phi + 1.0) * (phi + 1.0)
        - 2.0 * f0 * (s - 1.0) * (phi - 1.0) * (l * (phi - 1.0) + 2.0 * phi)
        + 2.0 * s * (1.0 - phi * phi)
}

/// d(dv)/db in the linear regime:
///
/// gamma mu (2z-1)(phi+1) {lambda - 4z^2 + phi[lambda + 4(z-1)z + 2] + 4z}
/// / (2 sigma [z(phi-1)+1][z(1-phi)+phi])
///
/// Positive on z in (1/2, 1): a larger local weight widens the gap in favour
/// of the bigger region.
pub fn utility_gap_db(z: f64, phi: TradeFreeness, params: &ModelParams) -> f64 {
    let p = phi.get();
    let (l, g, s, mu) = (params.lambda, params.gamma, params.sigma, params.mu);
    let brace = l - 4.0 * z * z + p * (l + 4.0 * (z - 1.0) * z + 2.0) + 4.0 * z;
    g * mu * (2.0 * z - 1.0) * (p + 1.0) * brace
        / (2.0 * s * (z * (p - 1.0) + 1.0) * (z * (1.0 - p) + p))
}

/// Utility gap away from the conditional steady state, with region qualities
/// `a1`, `a2` given explicitly. The innovation hazards are scaled by the mean
/// of the two qualities (the common-scale convention of the quality block),
/// so the expression reduces exactly to [`utility_gap`] when `a1 == a2`.
pub fn utility_gap_offsteady(
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
    a1: f64,
    a2: f64,
) -> Result<f64> {
    let p = phi.get();
    let m = 0.5 * (a1 + a2);
    let f1 = spec.f1(z, phi, params)?;
    let f2 = spec.f2(z, phi, params)?;
    let k1 = z * a1 + p * ((1.0 - z) * a2); // region-1 market size
    let k2 = (1.0 - z) * a2 + p * (z * a1); // region-2 market size
    let l = params.lambda;
    let t1 = (l / 2.0 + z) / k1 + p * (l / 2.0 + 1.0 - z) / k2;
    let t2 = (l / 2.0 + 1.0 - z) / k2 + p * (l / 2.0 + z) / k1;
    let wage_term = (params.mu / params.sigma) * m * (f1 * t1 - f2 * t2);
    let price_term = (params.mu / (params.sigma - 1.0)) * (k1 / k2).ln();
    Ok(wage_term + price_term)
}

/// Snapshot of the short-run general equilibrium at a given researcher share,
/// trade freeness and common relative quality. Indirect utilities omit the
/// additive constant that is common to both regions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShortRunQuantities {
    pub price_index_1: f64,
    pub price_index_2: f64,
    pub wage_1: f64,
    pub wage_2: f64,
    pub v_1: f64,
    pub v_2: f64,
    pub profit_tilde_1: f64,
    pub profit_tilde_2: f64,
}

/// Evaluates wages, price indices, quality-zero profits and indirect
/// utilities. `a_bar` is the common relative quality in (0, 1); the frontier
/// level is normalized to 1, so aggregate qualities are `z_i a_bar / alpha`.
pub fn short_run_quantities(
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
    a_bar: f64,
) -> Result<ShortRunQuantities> {
    let p = phi.get();
    let (mu, s, l) = (params.mu, params.sigma, params.lambda);
    let f1 = spec.f1(z, phi, params)?;
    let f2 = spec.f2(z, phi, params)?;
    let t1 = market_access(z, p, l);
    let t2 = market_access(1.0 - z, p, l);

    // Aggregate market size per region, in relative-quality units.
    let k1 = (a_bar / params.alpha) * market_size_1(z, p);
    let k2 = (a_bar / params.alpha) * market_size_2(z, p);
    let markup = params.beta * s / (s - 1.0);
    let price_index_1 = markup * k1.powf(1.0 / (1.0 - s));
    let price_index_2 = markup * k2.powf(1.0 / (1.0 - s));

    // Quality-zero profits: market access deflated by aggregate quality.
    let profit_tilde_1 = (mu / s) * (params.alpha / a_bar) * t1;
    let profit_tilde_2 = (mu / s) * (params.alpha / a_bar) * t2;

    let wage_1 = (mu / s) * f1 * t1;
    let wage_2 = (mu / s) * f2 * t2;

    let v_1 = wage_1 + (mu / (s - 1.0)) * market_size_1(z, p).ln();
    let v_2 = wage_2 + (mu / (s - 1.0)) * market_size_2(z, p).ln();

    Ok(ShortRunQuantities {
        price_index_1,
        price_index_2,
        wage_1,
        wage_2,
        v_1,
        v_2,
        profit_tilde_1,
        profit_tilde_2,
    })
}

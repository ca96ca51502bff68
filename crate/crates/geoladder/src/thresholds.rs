//! Closed-form critical values: break points where the symmetric split
//! changes stability, sustain points where full agglomeration changes
//! stability, the spillover-weight thresholds that govern their existence,
//! and the trade-coupled counterparts. Every closed form here is
//! cross-validated against an independent numeric root in the test suites.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, TradeFreeness};
use crate::roots::bisect;
use crate::shortrun::{symmetric_break_general, utility_gap};
use crate::spillover::SpilloverSpec;

/// Symmetric-dispersion stability function of the linear regime
/// (negative means the even split is stable):
///
/// B = gamma (sigma-1) [2 b (lambda+1)(phi+1)^2 - (2 lambda+3) phi^2
///     - 2 lambda - 1] + 2 sigma (1 - phi^2)
pub fn symmetric_break_condition(params: &ModelParams, phi: f64) -> f64 {
    let (l, g, s, b) = (params.lambda, params.gamma, params.sigma, params.b);
    g * (s - 1.0)
        * (2.0 * b * (l + 1.0) * (phi + 1.0) * (phi + 1.0)
            - (2.0 * l + 3.0) * phi * phi
            - 2.0 * l
            - 1.0)
        + 2.0 * s * (1.0 - phi * phi)
}

/// Agglomeration stability function (positive means agglomeration is
/// stable); equals the boundary utility gap divided by mu.
pub fn agglomeration_condition(params: &ModelParams, phi: f64) -> f64 {
    let (l, g, s, b) = (params.lambda, params.gamma, params.sigma, params.b);
    g * ((b - 1.0) * (l + 2.0) * phi * phi + 2.0 * b * (l + 1.0) * phi + (b - 1.0) * l)
        / (2.0 * s * phi)
        - phi.ln() / (s - 1.0)
}

/// Local-weight level above which agglomeration is stable for every spillover
/// intensity.
pub fn b_sustain_always(params: &ModelParams, phi: f64) -> f64 {
    let l = params.lambda;
    ((l + 2.0) * phi * phi + l) / ((phi + 1.0) * ((l + 2.0) * phi + l))
}

/// Local-weight level above which the symmetric split is unstable for every
/// spillover intensity.
pub fn b_dispersion_never(params: &ModelParams, phi: f64) -> f64 {
    let l = params.lambda;
    ((2.0 * l + 3.0) * phi * phi + 2.0 * l + 1.0) / (2.0 * (l + 1.0) * (phi + 1.0) * (phi + 1.0))
}

/// Vertical-asymptote location of `lambda_star` in the local weight.
pub fn b_hat(phi: f64) -> f64 {
    (phi * phi + 1.0) / ((phi + 1.0) * (phi + 1.0))
}

/// Lower bound on the local weight that keeps the sign-relevant factor of
/// `lambda_star` positive without further inspection.
pub fn b_under(z: f64, phi: f64) -> f64 {
    let w = (z - 1.0) * z * (phi * phi - 1.0);
    (w + phi * phi) / (2.0 * w + phi * (phi + 1.0))
}

fn log_ratio(z: f64, phi: f64) -> f64 {
    ((z * (phi - 1.0) + 1.0) / (z * (1.0 - phi) + phi)).ln()
}

/// Zero of `lambda_star` in the local weight: an interior equilibrium at `z`
/// supports a positive worker mass iff b lies in (max{0, b_tilde}, b_hat).
pub fn b_tilde(z: f64, phi: f64, params: &ModelParams) -> f64 {
    let (g, s) = (params.gamma, params.sigma);
    let num = g * (s - 1.0) * (2.0 * z - 1.0) * ((z - 1.0) * z * (phi * phi - 1.0) + phi * phi)
        - s * (z * (phi - 1.0) + 1.0) * (z * (phi - 1.0) - phi) * log_ratio(z, phi);
    let den =
        g * (s - 1.0) * (2.0 * z - 1.0) * (phi + 1.0) * (2.0 * (z - 1.0) * z * (phi - 1.0) + phi);
    num / den
}

/// Worker mass that makes `z` an interior equilibrium:
///
/// lambda*(z) = -2 [c1 c2 + c3 ln r] / c4
///
/// with the printed coefficients. Errors exactly at the pole b = b_hat.
pub fn lambda_star(z: f64, phi: TradeFreeness, params: &ModelParams) -> Result<f64> {
    let p = phi.get();
    let (g, s, b) = (params.gamma, params.sigma, params.b);
    let c1 = g * (s - 1.0) * (2.0 * z - 1.0);
    let c2 = p * p * (2.0 * b * (z - 1.0) * z + b - z * z + z - 1.0)
        + (1.0 - 2.0 * b) * (z - 1.0) * z
        + b * p;
    let c3 = s * (z * (p - 1.0) + 1.0) * (z * (p - 1.0) - p);
    let c4 = g * (s - 1.0) * (2.0 * z - 1.0) * (b * (p + 1.0) * (p + 1.0) - p * p - 1.0);
    if c4 == 0.0 {
        return Err(Error::LambdaStarPole { b, b_hat: b_hat(p) });
    }
    Ok(-2.0 * (c1 * c2 + c3 * log_ratio(z, p)) / c4)
}

/// Stability function of an interior asymmetric equilibrium (negative means
/// stable, conditional on `lambda_star(z) > 0`):
///
/// G = (2z-1)(phi^2-1)[(2b-1) gamma (sigma-1)(1-2z)^2 - sigma]
///   + sigma [2z^2(phi-1)^2 - 2z(phi-1)^2 + phi^2 + 1] ln r
pub fn asymmetric_stability_condition(z: f64, phi: f64, params: &ModelParams) -> f64 {
    let (g, s, b) = (params.gamma, params.sigma, params.b);
    let q = 2.0 * z * z * (phi - 1.0) * (phi - 1.0) - 2.0 * z * (phi - 1.0) * (phi - 1.0)
        + phi * phi
        + 1.0;
    (2.0 * z - 1.0)
        * (phi * phi - 1.0)
        * ((2.0 * b - 1.0) * g * (s - 1.0) * (1.0 - 2.0 * z) * (1.0 - 2.0 * z) - s)
        + s * q * log_ratio(z, phi)
}

/// Critical local weight for asymmetric stability: the stability function is
/// negative exactly when b exceeds this value. Always below 1/2 on
/// z in (1/2, 1), phi in (0, 1).
pub fn b_critical(z: f64, phi: f64, params: &ModelParams) -> f64 {
    let (g, s) = (params.gamma, params.sigma);
    let q = 2.0 * z * z * (phi - 1.0) * (phi - 1.0) - 2.0 * z * (phi - 1.0) * (phi - 1.0)
        + phi * phi
        + 1.0;
    let zm = 2.0 * z - 1.0;
    let num = zm * (1.0 - phi * phi) * (s + g * (s - 1.0) * zm * zm) + s * q * log_ratio(z, phi);
    num / (2.0 * g * (s - 1.0) * zm * zm * zm * (1.0 - phi * phi))
}

/// Verdict on an interior asymmetric equilibrium, with the quantities the
/// verdict rests on.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymmetricStability {
    pub stable: bool,
    /// Value of the stability function; stable iff negative.
    pub condition: f64,
    /// Critical local weight; stable iff `b > b_c`.
    pub b_c: f64,
    /// Worker mass supporting the equilibrium at `z`. The verdict is
    /// meaningful when this is positive.
    pub lambda_star: f64,
}

/// Classifies the asymmetric equilibrium at `z` in the linear regime.
pub fn asymmetric_stability(
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
) -> Result<AsymmetricStability> {
    let p = phi.get();
    let condition = asymmetric_stability_condition(z, p, params);
    Ok(AsymmetricStability {
        stable: condition < 0.0,
        condition,
        b_c: b_critical(z, p, params),
        lambda_star: lambda_star(z, phi, params)?,
    })
}

/// Spillover intensity above which the first break point can exist.
pub fn gamma_1(params: &ModelParams) -> f64 {
    2.0 * params.sigma / ((2.0 * params.lambda + 1.0) * (params.sigma - 1.0))
}

/// Lower edge of the local-weight window in which the first break point lies
/// inside (0, 1).
pub fn b_1(params: &ModelParams) -> f64 {
    let (l, g, s) = (params.lambda, params.gamma, params.sigma);
    (g * (2.0 * l + 1.0) * (s - 1.0) - 2.0 * s) * (g * (2.0 * l + 3.0) * (s - 1.0) + 2.0 * s)
        / (8.0 * g * g * (l + 1.0) * (l + 1.0) * (s - 1.0) * (s - 1.0))
}

/// Upper edge of that window.
pub fn b_2(params: &ModelParams) -> f64 {
    let (l, g, s) = (params.lambda, params.gamma, params.sigma);
    (g * (2.0 * l + 1.0) * (s - 1.0) - 2.0 * s) / (2.0 * g * (l + 1.0) * (s - 1.0))
}

/// Break points of the linear regime: the roots of
/// [`symmetric_break_condition`] in phi. A point is present iff the closed
/// form is real and lies in (0, 1), which reproduces the printed existence
/// conditions on gamma and b.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BreakPoints {
    pub phi_b1: Option<f64>,
    pub phi_b2: Option<f64>,
}

pub fn break_points_closed(params: &ModelParams) -> BreakPoints {
    let (l, g, s, b) = (params.lambda, params.gamma, params.sigma, params.b);
    let r = g * g
        * (s - 1.0)
        * (s - 1.0)
        * (8.0 * b * (l + 1.0) * (l + 1.0) - 4.0 * l * l - 8.0 * l - 3.0)
        + 4.0 * g * s * (s - 1.0)
        + 4.0 * s * s;
    if r < 0.0 {
        return BreakPoints::default();
    }
    let sq = r.sqrt();
    let den = g * (s - 1.0) * (2.0 * b * (l + 1.0) - 2.0 * l - 3.0) - 2.0 * s;
    let e = 2.0 * b * g * (l + 1.0) * (s - 1.0);
    let in_unit = |x: f64| (x > 0.0 && x < 1.0).then_some(x);
    BreakPoints {
        phi_b1: in_unit((sq - e) / den),
        phi_b2: in_unit(-(sq + e) / den),
    }
}

/// Sustain points of the linear regime: the roots of
/// [`agglomeration_condition`] in phi, located by bisection on either side of
/// its unique interior maximizer. Agglomeration is stable between the two
/// points (or above the single one when b > 1/2).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SustainPoints {
    pub phi_s1: Option<f64>,
    pub phi_s2: Option<f64>,
}

const PHI_EDGE: f64 = 1e-12;

pub fn sustain_points(params: &ModelParams) -> SustainPoints {
    let (l, g, s, b) = (params.lambda, params.gamma, params.sigma, params.b);
    // interior maximizer of the condition
    let inner = g * g * (b - 1.0) * (b - 1.0) * l * (l + 2.0) / (s * s)
        + 1.0 / ((s - 1.0) * (s - 1.0));
    let phi_peak =
        (s * (1.0 / (s - 1.0) - inner.sqrt()) / (g * (b - 1.0) * (l + 2.0))).clamp(PHI_EDGE, 1.0 - PHI_EDGE);

    let omega = |p: f64| agglomeration_condition(params, p);
    let mut out = SustainPoints::default();
    let f_lo = omega(PHI_EDGE);
    let f_peak = omega(phi_peak);
    let f_hi = omega(1.0 - PHI_EDGE);
    if f_lo < 0.0 && f_peak > 0.0 {
        out.phi_s1 = Some(bisect(omega, PHI_EDGE, phi_peak, 1e-12));
    }
    if f_peak > 0.0 && f_hi < 0.0 {
        out.phi_s2 = Some(bisect(omega, phi_peak, 1.0 - PHI_EDGE, 1e-12));
    } else if f_peak < 0.0 && f_hi > 0.0 {
        // increasing tail case: single crossing right of the peak
        out.phi_s1 = Some(bisect(omega, phi_peak, 1.0 - PHI_EDGE, 1e-12));
    }
    out
}

/// Break points for an arbitrary spillover shape, from its level `f_half`
/// and gradient `fprime_half` at the symmetric point, together with the
/// degenerate-bifurcation level of F(1/2) at each existing point.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct GeneralBreakPoints {
    pub phi_b1: Option<f64>,
    pub phi_b2: Option<f64>,
    pub f_b_at_b1: Option<f64>,
    pub f_b_at_b2: Option<f64>,
}

/// F(1/2) level at which the pitchfork at break point `phi_b` degenerates
/// (the parameter-crossing derivative of the gap slope vanishes).
pub fn degenerate_spillover_level(phi_b: f64, params: &ModelParams) -> f64 {
    let (l, s) = (params.lambda, params.sigma);
    -s * (phi_b + 1.0) / ((s - 1.0) * (2.0 * l * (phi_b - 1.0) + 3.0 * phi_b - 1.0))
}

pub fn general_break_points(
    f_half: f64,
    fprime_half: f64,
    params: &ModelParams,
) -> GeneralBreakPoints {
    let (l, s) = (params.lambda, params.sigma);
    let (f0, f1) = (f_half, fprime_half);
    let x = 2.0 * f0 * (l + 1.0) * (l + 1.0) * (s - 1.0) * (s - 1.0) * f1
        + (f0 * (s - 1.0) + s) * (f0 * (s - 1.0) + s);
    if x < 0.0 {
        return GeneralBreakPoints::default();
    }
    let disc = 2.0 * x.sqrt();
    let num = (l + 1.0) * (s - 1.0) * (f1 + 2.0 * f0);
    let den = 2.0 * (f0 * (l + 2.0) * (s - 1.0) + s) - (l + 1.0) * (s - 1.0) * f1;
    let in_unit = |v: f64| (v > 0.0 && v < 1.0).then_some(v);
    let phi_b1 = in_unit((num - disc) / den);
    let phi_b2 = in_unit((num + disc) / den);
    GeneralBreakPoints {
        phi_b1,
        phi_b2,
        f_b_at_b1: phi_b1.map(|p| degenerate_spillover_level(p, params)),
        f_b_at_b2: phi_b2.map(|p| degenerate_spillover_level(p, params)),
    }
}

/// Trade-coupled regime thresholds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TradeCoupledThresholds {
    /// Closed-form break point of the trade-coupled regime, as printed in the
    /// source derivations. See `trade_coupled_break_numeric` for the root of
    /// the exact symmetric-stability condition, which differs from this value.
    pub phi_b_g: f64,
    /// Unique sustain point on (b/(1-b), 1): agglomeration is stable below
    /// it and unstable above. Absent if the boundary gap does not change
    /// sign on the bracket.
    pub phi_s_g: Option<f64>,
}

/// Boundary stability function of the trade-coupled regime with unit
/// intensity and coupling (positive means agglomeration is stable); equals
/// the boundary utility gap under that normalization.
pub fn omega_g(params: &ModelParams, phi: f64) -> f64 {
    let (l, s, b, mu) = (params.lambda, params.sigma, params.b, params.mu);
    mu * ((b - 1.0) * (l + 2.0) * phi * phi + 3.0 * b * l + 2.0 * b - l) / (2.0 * s)
        - mu * phi.ln() / (s - 1.0)
}

/// Closed-form trade-coupled break point (independent of b).
pub fn trade_coupled_break_closed(params: &ModelParams) -> f64 {
    let (l, s) = (params.lambda, params.sigma);
    (2.0 * (l + 1.0) * (s - 1.0) - 2.0 * (2.0 * s - 1.0))
        / ((2.0 * l + 4.0) * (s - 1.0) + 2.0 * s)
}

/// Root of the exact symmetric-stability condition of the trade-coupled
/// regime, by bisection on (0, 1). This is the point where the even split
/// actually changes stability; it does not coincide with
/// [`trade_coupled_break_closed`].
pub fn trade_coupled_break_numeric(params: &ModelParams) -> Option<f64> {
    let spec = SpilloverSpec::TradeCoupled;
    let cond = |p: f64| {
        let phi = TradeFreeness::new(p).expect("interior phi");
        symmetric_break_general(
            spec.f_half(phi, params),
            spec.fprime_half(phi, params),
            p,
            params,
        )
    };
    let (lo, hi) = (PHI_EDGE, 1.0 - PHI_EDGE);
    (cond(lo) * cond(hi) < 0.0).then(|| bisect(cond, lo, hi, 1e-12))
}

/// Computes the trade-coupled thresholds. Requires the regime's assumptions:
/// global spillovers must be able to dominate (b < 1/2) and the immobile mass
/// must satisfy lambda > sigma/(sigma-1).
pub fn trade_coupled_thresholds(params: &ModelParams) -> Result<TradeCoupledThresholds> {
    if params.lambda <= params.sigma / (params.sigma - 1.0) {
        return Err(Error::Precondition(format!(
            "trade-coupled thresholds need lambda > sigma/(sigma-1) = {}, got lambda = {}",
            params.sigma / (params.sigma - 1.0),
            params.lambda
        )));
    }
    if params.b >= 0.5 {
        return Err(Error::Precondition(format!(
            "trade-coupled thresholds need b < 1/2, got b = {}",
            params.b
        )));
    }
    let spec = SpilloverSpec::TradeCoupled;
    let boundary_gap = |p: f64| {
        let phi = TradeFreeness::new(p).expect("interior phi");
        utility_gap(1.0, phi, params, &spec).expect("built-in spillover cannot fail")
    };
    let lo = (params.b / ((1.0 - params.b) * params.psi)).clamp(PHI_EDGE, 1.0 - 2.0 * PHI_EDGE);
    let hi = 1.0 - PHI_EDGE;
    let phi_s_g =
        (boundary_gap(lo) * boundary_gap(hi) < 0.0).then(|| bisect(boundary_gap, lo, hi, 1e-12));
    Ok(TradeCoupledThresholds {
        phi_b_g: trade_coupled_break_closed(params),
        phi_s_g,
    })
}

/// All closed-form critical values for one parameter point. Fields that do
/// not exist (or do not apply to the active regime) are `None`. The
/// z-dependent weight thresholds are evaluated at `z_ref` when one is given.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ThresholdSet {
    pub b_s: Option<f64>,
    pub b_d: Option<f64>,
    pub b_hat: Option<f64>,
    pub b_tilde: Option<f64>,
    pub b_under: Option<f64>,
    pub b_c: Option<f64>,
    pub b_star: Option<f64>,
    pub b_1: Option<f64>,
    pub b_2: Option<f64>,
    pub gamma_1: Option<f64>,
    pub phi_b1: Option<f64>,
    pub phi_b2: Option<f64>,
    pub phi_s1: Option<f64>,
    pub phi_s2: Option<f64>,
    pub phi_b1_g_general: Option<f64>,
    pub phi_b2_g_general: Option<f64>,
    pub f_b_at_b1: Option<f64>,
    pub f_b_at_b2: Option<f64>,
    pub phi_b_g: Option<f64>,
    pub phi_s_g: Option<f64>,
}

/// Pitchfork-criticality weight threshold at a break point (see the
/// bifurcation module for the criticality value itself).
pub fn b_star(phi_b: f64, params: &ModelParams) -> f64 {
    let (l, g, s) = (params.lambda, params.gamma, params.sigma);
    let num = s * (phi_b + 1.0) * (phi_b - 1.0) * (phi_b - 1.0)
        / (g * (s - 1.0) * (l * (phi_b - 1.0) + 2.0 * phi_b))
        + 3.0 * (phi_b * phi_b + 1.0);
    num / (3.0 * (phi_b + 1.0) * (phi_b + 1.0))
}

/// Assembles the full threshold report for a parameter point.
pub fn threshold_set(
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
    z_ref: Option<f64>,
) -> ThresholdSet {
    let p = phi.get();
    let mut t = ThresholdSet::default();
    match spec {
        SpilloverSpec::LinearLocalGlobal => {
            t.b_s = Some(b_sustain_always(params, p));
            t.b_d = Some(b_dispersion_never(params, p));
            t.b_hat = Some(b_hat(p));
            t.b_1 = Some(b_1(params));
            t.b_2 = Some(b_2(params));
            t.gamma_1 = Some(gamma_1(params));
            if let Some(z) = z_ref {
                t.b_tilde = Some(b_tilde(z, p, params));
                t.b_under = Some(b_under(z, p));
                t.b_c = Some(b_critical(z, p, params));
            }
            let bp = break_points_closed(params);
            t.phi_b1 = bp.phi_b1;
            t.phi_b2 = bp.phi_b2;
            let sp = sustain_points(params);
            t.phi_s1 = sp.phi_s1;
            t.phi_s2 = sp.phi_s2;
            t.b_star = bp.phi_b1.or(bp.phi_b2).map(|pb| b_star(pb, params));
            let gbp = general_break_points(
                spec.f_half(phi, params),
                spec.fprime_half(phi, params),
                params,
            );
            t.phi_b1_g_general = gbp.phi_b1;
            t.phi_b2_g_general = gbp.phi_b2;
            t.f_b_at_b1 = gbp.f_b_at_b1;
            t.f_b_at_b2 = gbp.f_b_at_b2;
        }
        SpilloverSpec::TradeCoupled => {
            if let Ok(tc) = trade_coupled_thresholds(params) {
                t.phi_b_g = Some(tc.phi_b_g);
                t.phi_s_g = tc.phi_s_g;
            }
        }
        SpilloverSpec::Custom { .. } => {
            let gbp = general_break_points(
                spec.f_half(phi, params),
                spec.fprime_half(phi, params),
                params,
            );
            t.phi_b1_g_general = gbp.phi_b1;
            t.phi_b2_g_general = gbp.phi_b2;
            t.f_b_at_b1 = gbp.f_b_at_b1;
            t.f_b_at_b2 = gbp.f_b_at_b2;
        }
    }
    t
}

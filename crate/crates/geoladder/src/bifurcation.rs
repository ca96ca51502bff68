//! Bifurcation analysis over the freeness of trade: branch continuation of
//! equilibria, pitchfork detection at break points with closed-form
//! criticality, numeric fold localization, and stability-region rasters over
//! the integration/spillover plane.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{find_equilibria, stable_set, EquilibriumKind};
use crate::error::{Error, Result};
use crate::params::{ModelParams, TradeFreeness};
use crate::quality::steady_state;
use crate::roots::{newton_bisect, scan_roots};
use crate::shortrun::{symmetric_slope, utility_gap, utility_gap_slope};
use crate::spillover::SpilloverSpec;
use crate::thresholds::{b_star, break_points_closed, symmetric_break_condition};

/// One continuation sample along an equilibrium branch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchPoint {
    pub phi: f64,
    pub z_star: f64,
    pub stable: bool,
    pub tangent_dz_dphi: f64,
}

/// Which equilibrium family a branch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchKind {
    Symmetric,
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub kind: BranchKind,
    pub points: Vec<BranchPoint>,
}

/// Pitchfork criticality classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criticality {
    Supercritical,
    Subcritical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Pitchfork,
    Fold,
}

/// A detected qualitative change of the equilibrium structure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub phi: f64,
    pub z_star: f64,
    /// Present for pitchforks.
    pub criticality: Option<Criticality>,
    /// Closed-form criticality value; present for pitchforks of the linear
    /// regime.
    pub varsigma: Option<f64>,
}

/// Degenerate-criticality band: |value| at or below this is not classified.
pub const CRITICALITY_TOL: f64 = 1e-10;

/// Full criticality report at a break point of the linear regime.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalityReport {
    pub varsigma: f64,
    pub criticality: Criticality,
    /// Local-weight threshold below which the pitchfork is supercritical
    /// (given the other two conditions).
    pub b_star: f64,
    /// Intensity threshold entering the supercriticality conditions.
    pub gamma_tilde: f64,
    pub cond_lambda: bool,
    pub cond_gamma: bool,
    pub cond_b: bool,
}

/// Closed-form pitchfork criticality at a break point `phi_b` of the linear
/// regime. Negative means supercritical (a stable asymmetric branch emerges
/// on the side where the split is unstable); positive means subcritical.
///
/// Errors unless `phi_b` actually is a break point (the symmetric stability
/// function must vanish there to 1e-6).
pub fn criticality_sigma(params: &ModelParams, phi_b: f64) -> Result<CriticalityReport> {
    let resid = symmetric_break_condition(params, phi_b);
    if resid.abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "phi = {phi_b} is not a break point (stability residual {resid:.3e})"
        )));
    }
    let (l, g, s, b) = (params.lambda, params.gamma, params.sigma, params.b);
    let pm1 = phi_b - 1.0;
    let varsigma = s * pm1 * pm1 * (phi_b + 1.0)
        - 3.0 * g
            * (s - 1.0)
            * (b * (phi_b + 1.0) * (phi_b + 1.0) - phi_b * phi_b - 1.0)
            * (l * pm1 + 2.0 * phi_b);
    let criticality = classify_criticality(varsigma);
    let gamma_tilde = -s * pm1 * pm1 * (phi_b + 1.0)
        / (3.0 * (s - 1.0) * (phi_b * phi_b + 1.0) * (l * pm1 + 2.0 * phi_b));
    let bs = b_star(phi_b, params);
    Ok(CriticalityReport {
        varsigma,
        criticality,
        b_star: bs,
        gamma_tilde,
        cond_lambda: l > 2.0 * phi_b / (1.0 - phi_b),
        cond_gamma: g > gamma_tilde,
        cond_b: b < bs,
    })
}

fn classify_criticality(value: f64) -> Criticality {
    if value < -CRITICALITY_TOL {
        Criticality::Supercritical
    } else if value > CRITICALITY_TOL {
        Criticality::Subcritical
    } else {
        Criticality::Degenerate
    }
}

/// Third derivative of the utility gap in z at the symmetric point, by the
/// five-point central stencil. Sign-classifies pitchforks in regimes without
/// a closed criticality form.
pub fn numeric_third_derivative(
    phi: TradeFreeness,
    params: &ModelParams,
    spec: &SpilloverSpec,
    h: f64,
) -> Result<f64> {
    let f = |z: f64| utility_gap(z, phi, params, spec);
    Ok((f(0.5 + 2.0 * h)? - 2.0 * f(0.5 + h)? + 2.0 * f(0.5 - h)? - f(0.5 - 2.0 * h)?)
        / (2.0 * h * h * h))
}

/// Continuation settings; defaults follow the analysis conventions.
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Initial continuation step in phi.
    pub step: f64,
    /// Step floor; persistent failure below it confirms a fold.
    pub step_floor: f64,
    /// Number of coarse seeding columns across the range.
    pub seed_columns: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            step: 1e-3,
            step_floor: 1e-9,
            seed_columns: 33,
        }
    }
}

/// Branches and events over a phi range.
#[derive(Debug, Clone, Serialize)]
pub struct BranchDiagram {
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
}

const Z_MARGIN: f64 = 1e-9;
const EDGE_SNAP: f64 = 1e-6;

struct GapSystem<'a> {
    params: &'a ModelParams,
    spec: &'a SpilloverSpec,
}

impl GapSystem<'_> {
    fn gap(&self, z: f64, phi: f64) -> f64 {
        let ph = TradeFreeness::new(phi).expect("phi inside unit interval");
        utility_gap(z, ph, self.params, self.spec).expect("gap evaluation")
    }

    fn slope(&self, z: f64, phi: f64) -> f64 {
        let ph = TradeFreeness::new(phi).expect("phi inside unit interval");
        utility_gap_slope(z, ph, self.params, self.spec).expect("slope evaluation")
    }

    fn stable_interior(&self, z: f64, phi: f64) -> bool {
        self.slope(z, phi) < 0.0
    }

    /// Locates the gap root nearest to `guess` within `[lo, hi]`, if any.
    fn correct(&self, guess: f64, phi: f64, lo: f64, hi: f64) -> Option<f64> {
        let lo = lo.max(0.5 + Z_MARGIN);
        let hi = hi.min(1.0 - Z_MARGIN);
        if lo >= hi {
            return None;
        }
        // bracket by local scan around the prediction
        let cells = 24;
        let mut prev_z = lo;
        let mut prev_f = self.gap(prev_z, phi);
        let mut best: Option<(f64, f64)> = None;
        for i in 1..=cells {
            let z = lo + (hi - lo) * i as f64 / cells as f64;
            let f = self.gap(z, phi);
            if prev_f == 0.0 {
                best = Some((prev_z, prev_z));
                break;
            }
            if f != 0.0 && prev_f.signum() != f.signum() {
                let mid = 0.5 * (prev_z + z);
                let better = match best {
                    None => true,
                    Some((a, b)) => (mid - guess).abs() < (0.5 * (a + b) - guess).abs(),
                };
                if better {
                    best = Some((prev_z, z));
                }
            }
            prev_z = z;
            prev_f = f;
        }
        let (blo, bhi) = best?;
        if blo == bhi {
            return Some(blo);
        }
        Some(newton_bisect(
            |z| (self.gap(z, phi), self.slope(z, phi)),
            blo,
            bhi,
            guess.clamp(blo, bhi),
            1e-13,
            60,
        ))
    }

    /// Critical points of the gap (slope roots) inside a z-window.
    fn critical_points(&self, phi: f64, lo: f64, hi: f64) -> Vec<f64> {
        scan_roots(|z| self.slope(z, phi), lo, hi, 192, 1e-13, 1e-10)
    }

    /// The critical point whose gap value is closest to zero: near a fold
    /// this is the extremum about to kiss the axis.
    fn kissing_extremum(&self, phi: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
        self.critical_points(phi, lo, hi)
            .into_iter()
            .map(|z| (z, self.gap(z, phi)))
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    }
}

/// Traces every equilibrium family over `phi_range`, emitting pitchfork
/// events at break points and fold events where asymmetric pairs collide.
/// Branches come mirrored across z = 1/2; events are reported for the upper
/// half-plane.
pub fn trace_branches(
    params: &ModelParams,
    spec: &SpilloverSpec,
    phi_range: (f64, f64),
    options: &TraceOptions,
) -> Result<BranchDiagram> {
    let (phi_lo, phi_hi) = phi_range;
    if !(0.0 < phi_lo && phi_lo < phi_hi && phi_hi < 1.0) {
        return Err(Error::Precondition(format!(
            "phi range ({phi_lo}, {phi_hi}) must sit strictly inside (0, 1)"
        )));
    }
    let sys = GapSystem { params, spec };
    let mut branches = Vec::new();
    let mut events = Vec::new();

    // Symmetric family: always present; sampled uniformly with exact slope.
    let n_cols = ((phi_hi - phi_lo) / options.step).ceil() as usize;
    let n_cols = n_cols.clamp(2, 4000);
    let mut sym_points = Vec::with_capacity(n_cols + 1);
    for i in 0..=n_cols {
        let p = phi_lo + (phi_hi - phi_lo) * i as f64 / n_cols as f64;
        let ph = TradeFreeness::new(p).expect("interior phi");
        sym_points.push(BranchPoint {
            phi: p,
            z_star: 0.5,
            stable: symmetric_slope(ph, params, spec) < 0.0,
            tangent_dz_dphi: 0.0,
        });
    }
    branches.push(Branch {
        kind: BranchKind::Symmetric,
        points: sym_points,
    });

    // Boundary family: present where the boundary gap is non-negative.
    let mut boundary_points = Vec::new();
    for i in 0..=n_cols {
        let p = phi_lo + (phi_hi - phi_lo) * i as f64 / n_cols as f64;
        let g1 = sys.gap(1.0, p);
        if g1 >= 0.0 {
            boundary_points.push(BranchPoint {
                phi: p,
                z_star: 1.0,
                stable: g1 > 0.0,
                tangent_dz_dphi: 0.0,
            });
        }
    }
    if !boundary_points.is_empty() {
        branches.push(Branch {
            kind: BranchKind::Boundary,
            points: boundary_points,
        });
    }

    // Interior families: seed on a coarse grid, then continue.
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for i in 0..=options.seed_columns {
        let p = phi_lo + (phi_hi - phi_lo) * i as f64 / options.seed_columns as f64;
        let ph = TradeFreeness::new(p).expect("interior phi");
        for eq in find_equilibria(params, ph, spec)? {
            if eq.kind == EquilibriumKind::AsymmetricDispersion && eq.z_star > 0.5 {
                seeds.push((p, eq.z_star));
            }
        }
    }

    let covered = |branches: &[Branch], p: f64, z: f64| {
        branches.iter().any(|br| {
            br.kind == BranchKind::Interior
                && br
                    .points
                    .iter()
                    .any(|q| (q.phi - p).abs() <= 1.5 * options.step && (q.z_star - z).abs() < 5e-3)
        })
    };

    for &(p0, z0) in &seeds {
        if covered(&branches, p0, z0) {
            continue;
        }
        let mut pts = vec![BranchPoint {
            phi: p0,
            z_star: z0,
            stable: sys.stable_interior(z0, p0),
            tangent_dz_dphi: 0.0,
        }];
        // continue right then left
        for dir in [1.0f64, -1.0] {
            let limit = if dir > 0.0 { phi_hi } else { phi_lo };
            let (half, fold) =
                continue_direction(&sys, p0, z0, dir, limit, options, (phi_lo, phi_hi));
            if dir > 0.0 {
                pts.extend(half);
            } else {
                let mut rev = half;
                rev.reverse();
                rev.extend(pts.drain(..));
                pts = rev;
            }
            if let Some(ev) = fold {
                if !events
                    .iter()
                    .any(|e: &BifurcationEvent| e.kind == EventKind::Fold && (e.phi - ev.phi).abs() < 1e-6)
                {
                    events.push(ev);
                }
            }
        }
        branches.push(Branch {
            kind: BranchKind::Interior,
            points: pts,
        });
    }

    // Pitchfork events where the symmetric family changes stability.
    let pitchforks: Vec<f64> = if spec.is_linear() {
        let bp = break_points_closed(params);
        [bp.phi_b1, bp.phi_b2]
            .into_iter()
            .flatten()
            .filter(|p| (phi_lo..=phi_hi).contains(p))
            .collect()
    } else {
        let cond = |p: f64| {
            let ph = TradeFreeness::new(p).expect("interior phi");
            symmetric_slope(ph, params, spec)
        };
        scan_roots(cond, phi_lo, phi_hi, 512, 1e-12, 1e-9)
    };
    for pb in pitchforks {
        let (criticality, varsigma) = if spec.is_linear() {
            let rep = criticality_sigma(params, pb)?;
            (rep.criticality, Some(rep.varsigma))
        } else {
            let ph = TradeFreeness::new(pb).expect("interior phi");
            let d3 = numeric_third_derivative(ph, params, spec, 1e-3)?;
            (classify_criticality(d3), None)
        };
        events.push(BifurcationEvent {
            kind: EventKind::Pitchfork,
            phi: pb,
            z_star: 0.5,
            criticality: Some(criticality),
            varsigma,
        });
    }

    // mirror the interior families
    let mirrored: Vec<Branch> = branches
        .iter()
        .filter(|b| b.kind == BranchKind::Interior)
        .map(|b| Branch {
            kind: BranchKind::Interior,
            points: b
                .points
                .iter()
                .map(|q| BranchPoint {
                    phi: q.phi,
                    z_star: 1.0 - q.z_star,
                    stable: q.stable,
                    tangent_dz_dphi: -q.tangent_dz_dphi,
                })
                .collect(),
        })
        .collect();
    branches.extend(mirrored);
    // mirror of the boundary family at z = 0
    if let Some(bnd) = branches.iter().find(|b| b.kind == BranchKind::Boundary).cloned() {
        branches.push(Branch {
            kind: BranchKind::Boundary,
            points: bnd
                .points
                .iter()
                .map(|q| BranchPoint {
                    phi: q.phi,
                    z_star: 0.0,
                    stable: q.stable,
                    tangent_dz_dphi: 0.0,
                })
                .collect(),
        });
    }

    events.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    Ok(BranchDiagram { branches, events })
}

/// Natural-parameter continuation in one direction. Returns the accepted
/// points (excluding the seed) and a fold event if the branch terminated in
/// one.
fn continue_direction(
    sys: &GapSystem<'_>,
    p0: f64,
    z0: f64,
    dir: f64,
    limit: f64,
    options: &TraceOptions,
    range: (f64, f64),
) -> (Vec<BranchPoint>, Option<BifurcationEvent>) {
    let mut pts = Vec::new();
    let mut phi = p0;
    let mut z = z0;
    let mut tangent = 0.0f64;
    let mut h = options.step;
    loop {
        if (dir > 0.0 && phi >= limit) || (dir < 0.0 && phi <= limit) {
            return (pts, None);
        }
        let mut phi_new = phi + dir * h;
        if dir > 0.0 {
            phi_new = phi_new.min(limit);
        } else {
            phi_new = phi_new.max(limit);
        }
        let dphi = phi_new - phi;
        let guess = z + tangent * dphi;
        let window = 0.05f64.max(3.0 * (tangent * dphi).abs());
        match sys.correct(guess, phi_new, guess - window, guess + window) {
            Some(z_new) => {
                tangent = if dphi.abs() > 0.0 {
                    (z_new - z) / dphi
                } else {
                    tangent
                };
                phi = phi_new;
                z = z_new;
                pts.push(BranchPoint {
                    phi,
                    z_star: z,
                    stable: sys.stable_interior(z, phi),
                    tangent_dz_dphi: tangent,
                });
                h = (h * 1.5).min(options.step);
                // pitchfork or boundary terminations
                if z <= 0.5 + EDGE_SNAP || z >= 1.0 - EDGE_SNAP {
                    return (pts, None);
                }
            }
            None => {
                h *= 0.5;
                if h < options.step_floor {
                    // candidate fold between phi and phi + dir*floor-ish:
                    // refine by bisection on pair existence in a window
                    let ev = refine_fold(sys, phi, z, dir, options, range);
                    return (pts, ev);
                }
            }
        }
    }
}

/// Localizes a fold after continuation stalled at `(phi_ok, z_ok)`: the
/// branch's root pair annihilates just past it, so the gap extremum between
/// the pair crosses zero. Track that extremum (the slope root whose gap value
/// sits nearest zero) and bisect its signed value to below 1e-8 in phi.
fn refine_fold(
    sys: &GapSystem<'_>,
    phi_ok: f64,
    z_ok: f64,
    dir: f64,
    options: &TraceOptions,
    range: (f64, f64),
) -> Option<BifurcationEvent> {
    let w = 0.25;
    let lo = (z_ok - w).max(0.5 + 1e-6);
    let hi = (z_ok + w).min(1.0 - 1e-6);
    let mval = |p: f64| sys.kissing_extremum(p, lo, hi).map(|(_, v)| v);
    let sign_ok = mval(phi_ok)?;
    if sign_ok == 0.0 {
        let (z_fold, _) = sys.kissing_extremum(phi_ok, lo, hi)?;
        return fold_event(phi_ok, z_fold);
    }
    // Before the fold the tracked extremum keeps the branch-side sign; past
    // it the value flips, and somewhat later the extremum pair itself
    // annihilates, so a missing extremum also means "past".
    let before = |p: f64| matches!(mval(p), Some(v) if v.signum() == sign_ok.signum());
    let mut a = phi_ok;
    let mut b = phi_ok;
    let mut step = options.step.max(1e-6);
    let mut found = false;
    for _ in 0..60 {
        b = (b + dir * step).clamp(range.0, range.1);
        if !before(b) {
            found = true;
            break;
        }
        a = b;
        step *= 2.0;
        if b == range.0 || b == range.1 {
            break;
        }
    }
    if !found {
        return None;
    }
    while (b - a).abs() > 1e-9 {
        let mid = 0.5 * (a + b);
        if before(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    let phi_fold = a;
    let (z_fold, _) = sys.kissing_extremum(phi_fold, lo, hi)?;
    fold_event(phi_fold, z_fold)
}

/// A collision at the symmetric point is the pitchfork, and one at the
/// boundary is the branch leaving through a sustain point; neither is a fold
/// of asymmetric equilibria.
fn fold_event(phi: f64, z_star: f64) -> Option<BifurcationEvent> {
    if z_star <= 0.5 + 1e-3 || z_star >= 1.0 - 1e-3 {
        return None;
    }
    Some(BifurcationEvent {
        kind: EventKind::Fold,
        phi,
        z_star,
        criticality: None,
        varsigma: None,
    })
}

/// Bit flags of the stability raster.
pub const REGION_AGGLOMERATION: u8 = 1;
pub const REGION_SYMMETRIC: u8 = 2;
pub const REGION_ASYMMETRIC: u8 = 4;

/// Cell-centered stability raster over the (phi, b) plane.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityRaster {
    pub phis: Vec<f64>,
    pub bs: Vec<f64>,
    /// Row-major masks, rows indexed by b, columns by phi.
    pub cells: Vec<u8>,
}

impl StabilityRaster {
    pub fn mask_at(&self, i_phi: usize, j_b: usize) -> u8 {
        self.cells[j_b * self.phis.len() + i_phi]
    }

    /// Number of cells where both agglomeration and symmetric dispersion are
    /// stable (overlap region).
    pub fn overlap_cells(&self) -> usize {
        self.cells
            .iter()
            .filter(|&&m| m & REGION_AGGLOMERATION != 0 && m & REGION_SYMMETRIC != 0)
            .count()
    }
}

/// Labels each cell of a `grid_phi x grid_b` raster with the stable
/// equilibrium kinds at the cell center. `params_base` supplies every
/// parameter except b, which sweeps the vertical axis.
pub fn stability_regions(
    params_base: &ModelParams,
    grid_phi: usize,
    grid_b: usize,
    spec: &SpilloverSpec,
) -> Result<StabilityRaster> {
    let phis: Vec<f64> = (0..grid_phi)
        .map(|i| (i as f64 + 0.5) / grid_phi as f64)
        .collect();
    let bs: Vec<f64> = (0..grid_b)
        .map(|j| (j as f64 + 0.5) / grid_b as f64)
        .collect();
    let rows: Vec<Vec<u8>> = bs
        .par_iter()
        .map(|&b| {
            let params = ModelParams {
                b,
                ..*params_base
            };
            phis.iter()
                .map(|&p| {
                    let ph = TradeFreeness::new(p).expect("cell center inside (0,1)");
                    cell_mask(&params, ph, spec)
                })
                .collect()
        })
        .collect();
    Ok(StabilityRaster {
        phis,
        bs,
        cells: rows.concat(),
    })
}

/// Stability mask of a single parameter point, by full enumeration.
pub fn cell_mask(params: &ModelParams, phi: TradeFreeness, spec: &SpilloverSpec) -> u8 {
    let mut mask = 0u8;
    if let Ok(eqs) = find_equilibria(params, phi, spec) {
        for eq in stable_set(&eqs) {
            mask |= match eq.kind {
                EquilibriumKind::Agglomeration => REGION_AGGLOMERATION,
                EquilibriumKind::SymmetricDispersion => REGION_SYMMETRIC,
                EquilibriumKind::AsymmetricDispersion => REGION_ASYMMETRIC,
            };
        }
    }
    mask
}

/// Growth and quality levels across the equilibrium set at one parameter
/// point, with extremality flags for the stable subset.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub entries: Vec<GrowthEntry>,
    /// True when some stable equilibrium attains the maximum growth rate
    /// among all equilibria.
    pub stable_attains_max_growth: bool,
    /// True when some stable equilibrium attains the minimum average
    /// relative quality among all equilibria.
    pub stable_attains_min_quality: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthEntry {
    pub z_star: f64,
    pub kind: EquilibriumKind,
    pub stable: bool,
    pub regular: bool,
    pub g: f64,
    pub a_bar: f64,
}

pub fn growth_at_stable(
    params: &ModelParams,
    phi: TradeFreeness,
    spec: &SpilloverSpec,
) -> Result<GrowthReport> {
    let eqs = find_equilibria(params, phi, spec)?;
    let mut entries = Vec::with_capacity(eqs.len());
    for eq in &eqs {
        let ss = steady_state(eq.z_star, phi, params, spec)?;
        entries.push(GrowthEntry {
            z_star: eq.z_star,
            kind: eq.kind,
            stable: eq.stable && eq.regular,
            regular: eq.regular,
            g: ss.g,
            a_bar: ss.a_bar,
        });
    }
    let max_g = entries.iter().map(|e| e.g).fold(f64::NEG_INFINITY, f64::max);
    let min_a = entries.iter().map(|e| e.a_bar).fold(f64::INFINITY, f64::min);
    let rel = 1e-12;
    let stable_attains_max_growth = entries
        .iter()
        .any(|e| e.stable && (max_g - e.g) <= rel * max_g.abs().max(1.0));
    let stable_attains_min_quality = entries
        .iter()
        .any(|e| e.stable && (e.a_bar - min_a) <= rel * min_a.abs().max(1.0));
    Ok(GrowthReport {
        entries,
        stable_attains_max_growth,
        stable_attains_min_quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::sustain_points;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phi(v: f64) -> TradeFreeness {
        TradeFreeness::new(v).unwrap()
    }

    #[test]
    fn criticality_requires_a_break_point() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        assert!(matches!(
            criticality_sigma(&p, 0.77),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn first_break_point_is_supercritical_in_high_lambda_scenario() {
        let p = ModelParams::baseline(4.0, 0.9, 8.0, 0.55).unwrap();
        let pb = break_points_closed(&p).phi_b1.unwrap();
        let rep = criticality_sigma(&p, pb).unwrap();
        assert_eq!(rep.criticality, Criticality::Supercritical);
        assert!(rep.cond_lambda && rep.cond_gamma && rep.cond_b);
    }

    #[test]
    fn high_local_weight_on_the_break_locus_is_supercritical() {
        // when the stability boundary sits above b = 1/2 the pitchfork there
        // is supercritical
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut seen = 0;
        while seen < 50 {
            let lam = rng.gen_range(0.5..6.0);
            let gam = rng.gen_range(0.3..2.0);
            let sig = rng.gen_range(2.0..12.0);
            let ph = rng.gen_range(0.05..0.95);
            // local weight that puts (phi, b) exactly on the stability
            // boundary
            let p0 = ModelParams::baseline(lam, gam, sig, 0.5).unwrap();
            let bb = {
                let (l, g, s) = (lam, gam, sig);
                (g * (s - 1.0) * ((2.0 * l + 3.0) * ph * ph + 2.0 * l + 1.0)
                    + 2.0 * s * (ph * ph - 1.0))
                    / (2.0 * g * (l + 1.0) * (s - 1.0) * (ph + 1.0) * (ph + 1.0))
            };
            let _ = p0;
            if !(0.5..1.0).contains(&bb) {
                continue;
            }
            let p = ModelParams::baseline(lam, gam, sig, bb).unwrap();
            let rep = criticality_sigma(&p, ph).unwrap();
            assert!(
                rep.varsigma < 0.0,
                "expected supercritical at b = {bb} > 1/2, got {}",
                rep.varsigma
            );
            seen += 1;
        }
    }

    #[test]
    fn criticality_sign_matches_numeric_third_derivative() {
        let spec = SpilloverSpec::LinearLocalGlobal;
        for (lam, gam, sig, b) in [
            (2.0, 0.9, 8.0, 0.33),
            (2.0, 0.9, 8.0, 0.338),
            (2.0, 0.9, 8.0, 0.339),
            (2.0, 0.9, 8.0, 0.35),
            (4.0, 0.9, 8.0, 0.55),
        ] {
            let p = ModelParams::baseline(lam, gam, sig, b).unwrap();
            let bp = break_points_closed(&p);
            for pb in [bp.phi_b1, bp.phi_b2].into_iter().flatten() {
                let rep = criticality_sigma(&p, pb).unwrap();
                let d3 = numeric_third_derivative(phi(pb), &p, &spec, 1e-3).unwrap();
                assert_eq!(
                    rep.varsigma > 0.0,
                    d3 > 0.0,
                    "criticality sign mismatch at {lam},{gam},{sig},{b} phi_b={pb}"
                );
            }
        }
    }

    #[test]
    fn bell_shaped_branch_without_fold() {
        // scenario with smooth agglomeration and smooth complete
        // re-dispersion
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let d = trace_branches(&p, &spec, (0.02, 0.98), &TraceOptions::default()).unwrap();
        assert!(d.events.iter().all(|e| e.kind != EventKind::Fold));
        let pitch: Vec<_> = d
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Pitchfork)
            .collect();
        assert_eq!(pitch.len(), 2);
        let bp = break_points_closed(&p);
        assert!((pitch[0].phi - bp.phi_b1.unwrap()).abs() < 1e-8);
        assert!((pitch[1].phi - bp.phi_b2.unwrap()).abs() < 1e-8);
        // upper interior branch: entirely stable, max z well inside (1/2, 1)
        let max_z = d
            .branches
            .iter()
            .filter(|b| b.kind == BranchKind::Interior)
            .flat_map(|b| b.points.iter())
            .map(|q| q.z_star)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_z > 0.6 && max_z < 0.85, "max z = {max_z}");
    }

    #[test]
    fn fold_detected_where_subcritical_branch_collides() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.339).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let d = trace_branches(&p, &spec, (0.02, 0.98), &TraceOptions::default()).unwrap();
        let folds: Vec<_> = d.events.iter().filter(|e| e.kind == EventKind::Fold).collect();
        assert_eq!(folds.len(), 1, "events: {:?}", d.events);
        let fold = folds[0];
        let pb2 = break_points_closed(&p).phi_b2.unwrap();
        assert!(fold.phi > pb2 && fold.phi < 1.0, "fold at {}", fold.phi);
        assert!(fold.z_star > 0.55 && fold.z_star < 0.98);
        // at the fold the gap and its slope both vanish
        let g = utility_gap(fold.z_star, phi(fold.phi), &p, &spec).unwrap();
        let s = utility_gap_slope(fold.z_star, phi(fold.phi), &p, &spec).unwrap();
        assert!(g.abs() < 1e-7, "gap at fold {g}");
        assert!(s.abs() < 1e-4, "slope at fold {s}");
    }

    #[test]
    fn branch_symmetry_mirrors_every_point() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.33).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let d = trace_branches(&p, &spec, (0.05, 0.9), &TraceOptions::default()).unwrap();
        for br in d.branches.iter().filter(|b| b.kind == BranchKind::Interior) {
            for q in &br.points {
                let mirrored = d.branches.iter().any(|other| {
                    other.points.iter().any(|m| {
                        (m.phi - q.phi).abs() < 1e-12 && (m.z_star - (1.0 - q.z_star)).abs() < 1e-9
                    })
                });
                assert!(mirrored, "no mirror for ({}, {})", q.phi, q.z_star);
            }
        }
    }

    #[test]
    fn stability_flips_across_a_fold() {
        // scenario (iii): the branch through the fold carries a stable and an
        // unstable side
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.339).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let d = trace_branches(&p, &spec, (0.35, 0.45), &TraceOptions::default()).unwrap();
        let fold = d
            .events
            .iter()
            .find(|e| e.kind == EventKind::Fold)
            .expect("fold exists");
        // points just below the fold on either sheet
        let near: Vec<_> = d
            .branches
            .iter()
            .filter(|b| b.kind == BranchKind::Interior)
            .flat_map(|b| b.points.iter())
            .filter(|q| q.z_star > 0.5 && (fold.phi - q.phi) < 2e-3 && q.phi < fold.phi)
            .collect();
        assert!(near.iter().any(|q| q.stable));
        assert!(near.iter().any(|q| !q.stable));
    }

    #[test]
    fn raster_has_thin_overlap_region() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.5).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let raster = stability_regions(&p, 48, 48, &spec).unwrap();
        let overlap = raster.overlap_cells();
        let total = raster.cells.len();
        assert!(overlap > 0, "overlap region empty");
        assert!(
            (overlap as f64) < 0.05 * total as f64,
            "overlap region should be thin: {overlap}/{total}"
        );
        // high phi, high b: agglomeration only
        let i = raster.phis.iter().position(|&x| x > 0.9).unwrap();
        let j = raster.bs.iter().position(|&x| x > 0.9).unwrap();
        assert_eq!(raster.mask_at(i, j), REGION_AGGLOMERATION);
    }

    #[test]
    fn raster_agrees_with_pointwise_classification() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.5).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let raster = stability_regions(&p, 24, 24, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let i = rng.gen_range(0..raster.phis.len());
            let j = rng.gen_range(0..raster.bs.len());
            let params = ModelParams {
                b: raster.bs[j],
                ..p
            };
            let mask = cell_mask(&params, phi(raster.phis[i]), &spec);
            assert_eq!(mask, raster.mask_at(i, j));
        }
    }

    #[test]
    fn growth_extrema_at_stable_equilibria() {
        let spec = SpilloverSpec::LinearLocalGlobal;
        // local spillovers dominate: stable agglomeration attains max growth
        let p = ModelParams::baseline(2.0, 1.0, 8.0, 0.55).unwrap();
        let rep = growth_at_stable(&p, phi(0.9), &spec).unwrap();
        assert!(rep.stable_attains_max_growth && rep.stable_attains_min_quality);
        let om = p.omega;
        let agg = rep
            .entries
            .iter()
            .find(|e| e.kind == EquilibriumKind::Agglomeration && e.z_star == 1.0)
            .unwrap();
        assert!((agg.g - om * p.b / (2.0 * om * p.b + 1.0)).abs() < 1e-15);

        // global spillovers dominate: stable symmetric split attains max g
        let p = ModelParams::baseline(2.0, 1.0, 8.0, 0.33).unwrap();
        let rep = growth_at_stable(&p, phi(0.9), &spec).unwrap();
        assert!(rep.stable_attains_max_growth && rep.stable_attains_min_quality);
        let sym = rep
            .entries
            .iter()
            .find(|e| e.kind == EquilibriumKind::SymmetricDispersion)
            .unwrap();
        assert!((sym.g - 0.5 * om / (om + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn trade_coupled_stable_path_disperses_monotonically() {
        let p = ModelParams::baseline(4.0, 1.0, 8.0, 0.2).unwrap();
        let spec = SpilloverSpec::TradeCoupled;
        // track max stable z across rising phi: weakly decreasing toward 1/2
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let ph = 0.05 + 0.9 * i as f64 / 39.0;
            let eqs = find_equilibria(&p, phi(ph), &spec).unwrap();
            let top = stable_set(&eqs)
                .iter()
                .map(|e| e.z_star)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                top <= prev + 1e-6,
                "stable path rose from {prev} to {top} at phi = {ph}"
            );
            prev = top;
        }
        // by high integration only the even split remains
        let eqs = find_equilibria(&p, phi(0.95), &spec).unwrap();
        let stables = stable_set(&eqs);
        assert_eq!(stables.len(), 1);
        assert_eq!(stables[0].z_star, 0.5);
    }

    #[test]
    fn scenario_v_branch_reaches_agglomeration() {
        let p = ModelParams::baseline(2.0, 0.9, 8.0, 0.55).unwrap();
        let spec = SpilloverSpec::LinearLocalGlobal;
        let d = trace_branches(&p, &spec, (0.02, 0.95), &TraceOptions::default()).unwrap();
        // no pitchfork (the split never changes stability), no fold
        assert!(d.events.is_empty(), "events: {:?}", d.events);
        // the interior branch climbs to the boundary near the sustain point
        let s1 = sustain_points(&p).phi_s1.unwrap();
        let max_pt = d
            .branches
            .iter()
            .filter(|b| b.kind == BranchKind::Interior)
            .flat_map(|b| b.points.iter())
            .max_by(|a, b| a.z_star.total_cmp(&b.z_star))
            .unwrap();
        assert!(max_pt.z_star > 0.99);
        assert!((max_pt.phi - s1).abs() < 0.01);
    }
}

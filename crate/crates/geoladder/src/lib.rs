//! Two-region spatial quality-ladder model: short-run equilibrium quantities,
//! fast quality-convergence dynamics, long-run migration equilibria with
//! stability classification, closed-form break/sustain thresholds, and
//! bifurcation diagrams / stability-region maps over the economic-integration
//! and spillover parameters.
//!
//! Everything is a pure function of its arguments; there is no shared mutable
//! state, so any of it may be evaluated concurrently.

pub mod bifurcation;
pub mod equilibrium;
pub mod error;
pub mod export;
pub mod migration;
pub mod ode;
pub mod params;
pub mod quality;
pub mod roots;
pub mod scenarios;
pub mod shortrun;
pub mod spillover;
pub mod thresholds;

pub use bifurcation::{
    criticality_sigma, growth_at_stable, stability_regions, trace_branches, BifurcationEvent,
    Branch, BranchDiagram, BranchPoint, Criticality, EventKind, StabilityRaster, TraceOptions,
};
pub use equilibrium::{classify_stability, find_equilibria, Equilibrium, EquilibriumKind};
pub use error::{Error, Result};
pub use migration::{basins, simulate, simulate_coupled, BasinMap, MigrationRun, MigrationState};
pub use params::{ModelParams, TradeFreeness};
pub use quality::{
    frontier_path, integrate_quality, quality_rhs, stationary_distribution, steady_state,
    QualitySteadyState, QualityState,
};
pub use scenarios::{scenario_params, scenario_runner, ScenarioId, ScenarioReport};
pub use shortrun::{
    short_run_quantities, utility_gap, utility_gap_db, utility_gap_slope, ShortRunQuantities,
};
pub use spillover::{spillover_f, SpilloverSpec};
pub use thresholds::{
    break_points_closed, general_break_points, lambda_star, sustain_points, threshold_set,
    trade_coupled_thresholds, ThresholdSet,
};

use thiserror::Error;

/// Errors produced by model evaluation and the numerical routines built on it.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural parameter violates its admissible range.
    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A custom spillover function returned a non-positive or non-finite value.
    #[error("spillover function returned {value} at z = {z}; F(z) must be finite and > 0")]
    SpilloverDomain { z: f64, value: f64 },

    /// The frontier growth rate is zero, so the cross-sectional quality
    /// distribution has no stationary power-law form.
    #[error("degenerate frontier: growth rate is zero")]
    DegenerateFrontier,

    /// The adaptive integrator could not take a step above its minimum size.
    /// Carries the last accepted state so callers can diagnose the blow-up.
    #[error("integrator step size underflow at t = {t} (state {state:?})")]
    StepSizeUnderflow { t: f64, state: Vec<f64> },

    /// The root scan located more interior equilibria on (1/2, 1] than the
    /// model admits.
    #[error("internal consistency violation: {count} equilibria located on (1/2, 1], at most 2 are admissible")]
    TooManyEquilibria { count: usize },

    /// `lambda_star` evaluated exactly at its vertical asymptote b = b_hat.
    #[error("lambda_star pole: b = {b} equals b_hat = {b_hat} where the denominator vanishes")]
    LambdaStarPole { b: f64, b_hat: f64 },

    /// An operation was called outside the regime or parameter range it is
    /// defined for.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Branch continuation stalled without a confirmed fold.
    #[error("continuation stagnated at phi = {phi} (step below floor without fold confirmation)")]
    ContinuationStagnated { phi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

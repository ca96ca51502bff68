use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::{ModelParams, TradeFreeness};

/// Regional spillover regime. `F_1(z)` is region 1's spillover level when a
/// share `z` of researchers lives there; region 2's level is the mirrored
/// evaluation.
#[derive(Clone)]
pub enum SpilloverSpec {
    /// F(z) = gamma * [b z + (1-b)(1-z)]: a fixed split between the local and
    /// the foreign researcher pool.
    LinearLocalGlobal,
    /// F_1 = gamma * [b z + phi psi (1-b)(1-z)]: the cross-region share scales
    /// with the freeness of trade.
    TradeCoupled,
    /// Externally supplied F(z) > 0 on [0, 1]. The values at the symmetric
    /// point are supplied by the caller rather than differenced numerically so
    /// that threshold formulas stay exact.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        f_half: f64,
        fprime_half: f64,
    },
}

impl fmt::Debug for SpilloverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpilloverSpec::LinearLocalGlobal => f.write_str("LinearLocalGlobal"),
            SpilloverSpec::TradeCoupled => f.write_str("TradeCoupled"),
            SpilloverSpec::Custom {
                f_half,
                fprime_half,
                ..
            } => f
                .debug_struct("Custom")
                .field("f_half", f_half)
                .field("fprime_half", fprime_half)
                .finish_non_exhaustive(),
        }
    }
}

impl SpilloverSpec {
    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_half: f64,
        fprime_half: f64,
    ) -> Self {
        SpilloverSpec::Custom {
            f: Arc::new(f),
            f_half,
            fprime_half,
        }
    }

    /// Region 1's spillover level F_1 at researcher share `z`.
    pub fn f1(&self, z: f64, phi: TradeFreeness, params: &ModelParams) -> Result<f64> {
        debug_assert!((0.0..=1.0).contains(&z));
        let v = match self {
            SpilloverSpec::LinearLocalGlobal => {
                params.gamma * (params.b * z + (1.0 - params.b) * (1.0 - z))
            }
            SpilloverSpec::TradeCoupled => {
                params.gamma
                    * (params.b * z + phi.get() * params.psi * (1.0 - params.b) * (1.0 - z))
            }
            SpilloverSpec::Custom { f, .. } => {
                let v = f(z);
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::SpilloverDomain { z, value: v });
                }
                v
            }
        };
        Ok(v)
    }

    /// Region 2's spillover level at researcher share `z` (of region 1): the
    /// mirrored evaluation appropriate to the variant.
    pub fn f2(&self, z: f64, phi: TradeFreeness, params: &ModelParams) -> Result<f64> {
        self.f1(1.0 - z, phi, params)
    }

    /// F(1/2): exact for the built-in variants, caller-supplied for custom.
    pub fn f_half(&self, phi: TradeFreeness, params: &ModelParams) -> f64 {
        match self {
            SpilloverSpec::LinearLocalGlobal => params.gamma * 0.5,
            SpilloverSpec::TradeCoupled => {
                params.gamma * 0.5 * (params.b + phi.get() * params.psi * (1.0 - params.b))
            }
            SpilloverSpec::Custom { f_half, .. } => *f_half,
        }
    }

    /// F'(1/2): exact for the built-in variants, caller-supplied for custom.
    pub fn fprime_half(&self, phi: TradeFreeness, params: &ModelParams) -> f64 {
        match self {
            SpilloverSpec::LinearLocalGlobal => params.gamma * (2.0 * params.b - 1.0),
            SpilloverSpec::TradeCoupled => {
                params.gamma * (params.b - phi.get() * params.psi * (1.0 - params.b))
            }
            SpilloverSpec::Custom { fprime_half, .. } => *fprime_half,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, SpilloverSpec::LinearLocalGlobal)
    }
}

/// Evaluates F_1 at `z`; errors if a custom function leaves the positive
/// domain.
pub fn spillover_f(
    spec: &SpilloverSpec,
    z: f64,
    phi: TradeFreeness,
    params: &ModelParams,
) -> Result<f64> {
    spec.f1(z, phi, params)
}

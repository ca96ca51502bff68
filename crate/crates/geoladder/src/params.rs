use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural scalars of the two-region model.
///
/// `omega` is derived (`ln(delta) / (delta * alpha)`) and kept in sync by the
/// constructor; it is the innovation-size scale that all growth-rate formulas
/// share. `beta` and `b_bar` are carried for configuration completeness only:
/// both live in the additive utility constant that is common to the two
/// regions, so they never influence utility gaps, equilibria or thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mass of immobile workers (> 0), split evenly across regions.
    pub lambda: f64,
    /// Overall spillover intensity (> 0).
    pub gamma: f64,
    /// Elasticity of substitution between varieties (> 1).
    pub sigma: f64,
    /// Weight of local spillovers (0 < b < 1); b > 1/2 means local dominates.
    pub b: f64,
    /// Manufacturing expenditure share (> 0). Utility gaps are linear in mu,
    /// so equilibria and stability labels do not depend on it.
    pub mu: f64,
    /// Quality step size of an innovation (> 1).
    pub delta: f64,
    /// Researchers employed per variety (> 0).
    pub alpha: f64,
    /// Trade-coupling intensity of cross-region spillovers (> 0); only the
    /// trade-coupled regime reads it.
    pub psi: f64,
    /// Migration speed (> 0).
    pub kappa: f64,
    /// Variable labour input per unit of output. Lives in the cancelling
    /// utility constant; never enters any computation.
    pub beta: f64,
    /// Numeraire endowment. Lives in the cancelling utility constant; never
    /// enters any computation.
    pub b_bar: f64,
    /// Derived scale ln(delta) / (delta * alpha).
    pub omega: f64,
}

impl ModelParams {
    /// Builds a parameter set, validating every invariant and deriving
    /// `omega`. `beta` defaults to 1 and `b_bar` to `10 * mu`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lambda: f64,
        gamma: f64,
        sigma: f64,
        b: f64,
        mu: f64,
        delta: f64,
        alpha: f64,
        psi: f64,
        kappa: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            lambda,
            gamma,
            sigma,
            b,
            mu,
            delta,
            alpha,
            psi,
            kappa,
            beta: 1.0,
            b_bar: 10.0 * mu,
            omega: delta.ln() / (delta * alpha),
        };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor with the defaults used throughout the
    /// analysis: mu = 1 (gap-irrelevant), delta = 1.2, alpha = 1, psi = 1,
    /// kappa = 1.
    pub fn baseline(lambda: f64, gamma: f64, sigma: f64, b: f64) -> Result<Self> {
        Self::new(lambda, gamma, sigma, b, 1.0, 1.2, 1.0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(name: &'static str, value: f64, ok: bool, constraint: &'static str) -> Result<()> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint,
                })
            }
        }
        check("lambda", self.lambda, self.lambda > 0.0, "lambda > 0")?;
        check("gamma", self.gamma, self.gamma > 0.0, "gamma > 0")?;
        check("sigma", self.sigma, self.sigma > 1.0, "sigma > 1")?;
        check("b", self.b, self.b > 0.0 && self.b < 1.0, "0 < b < 1")?;
        check("mu", self.mu, self.mu > 0.0, "mu > 0")?;
        check("delta", self.delta, self.delta > 1.0, "delta > 1")?;
        check("alpha", self.alpha, self.alpha > 0.0, "alpha > 0")?;
        check("psi", self.psi, self.psi > 0.0, "psi > 0")?;
        check("kappa", self.kappa, self.kappa > 0.0, "kappa > 0")?;
        let omega = self.delta.ln() / (self.delta * self.alpha);
        check(
            "omega",
            self.omega,
            self.omega == omega,
            "omega = ln(delta)/(delta*alpha)",
        )
    }

    /// Re-derives `omega` after a field edit.
    pub fn with_recomputed_omega(mut self) -> Self {
        self.omega = self.delta.ln() / (self.delta * self.alpha);
        self
    }
}

/// Freeness of trade, phi = tau^(1-sigma) in (0, 1); 1 is costless trade.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TradeFreeness(f64);

impl TradeFreeness {
    pub fn new(phi: f64) -> Result<Self> {
        if phi.is_finite() && phi > 0.0 && phi < 1.0 {
            Ok(TradeFreeness(phi))
        } else {
            Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                constraint: "0 < phi < 1",
            })
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// The iceberg cost tau implied by phi for a given sigma.
    pub fn tau(self, sigma: f64) -> f64 {
        self.0.powf(1.0 / (1.0 - sigma))
    }
}

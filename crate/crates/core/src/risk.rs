//! Exceedance risk for the maximum over `m` groups of `n` blocks each.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_finite, check_scale, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskQuery {
    pub m: u64,
    pub n: u64,
    pub threshold: f64,
    pub mu: f64,
    pub sigma: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskResult {
    pub cdf: f64,
    pub exceedance: f64,
    /// `1/(1 - F)`; `None` when `F = 1` to machine precision.
    pub return_period: Option<f64>,
}

impl RiskQuery {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidSpec("m and n must be at least 1".into()));
        }
        check_finite("threshold", self.threshold)?;
        check_finite("mu", self.mu)?;
        check_scale("sigma", self.sigma)?;
        check_alpha(self.alpha)
    }

    /// `ln(m (n e^{-(x-μ)/σ})^α)`
    fn ln_rate(&self) -> f64 {
        (self.m as f64).ln() + self.alpha * ((self.n as f64).ln() - (self.threshold - self.mu) / self.sigma)
    }
}

/// `F(x) = exp(-m (n e^{-(x-μ)/σ})^α)` and the return period `1/(1 - F(x))`.
pub fn risk_return_period(q: &RiskQuery) -> Result<RiskResult> {
    q.validate()?;
    let rate = q.ln_rate().exp();
    let exceedance = -(-rate).exp_m1();
    Ok(RiskResult {
        cdf: (-rate).exp(),
        exceedance,
        return_period: (exceedance > 0.0).then(|| 1.0 / exceedance),
    })
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Requested quantity does not exist for the point-mass law (alpha = 1).
    #[error("degenerate law (alpha = 1): {0} is undefined")]
    DegenerateLaw(&'static str),

    #[error("argument {value} outside the supported range [{lo:e}, {hi:e}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    #[error("derivative coefficients overflow at order n = {n}, alpha = {alpha}")]
    Capacity { n: usize, alpha: f64 },

    #[error("observation {value} outside the distribution support")]
    SupportViolation { value: f64 },

    #[error("parameters not identifiable: {0}")]
    NotIdentifiable(&'static str),

    #[error("optimization did not converge: {0}")]
    NonConvergence(String),

    #[error("covariance matrix not available")]
    MissingCovariance,

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("likelihood ratio statistic {0} is negative; the full model fit is worse than the reduced one")]
    NegativeStatistic(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must lie in (0, 1]",
        })
    }
}

pub(crate) fn check_scale(name: &'static str, sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: sigma,
            reason: "must be finite and positive",
        })
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn check_probability(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must lie in (0, 1)",
        })
    }
}

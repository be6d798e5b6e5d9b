//! Univariate Gumbel and generalized extreme value (GEV) laws.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_probability, check_scale, Error, Result};
use crate::numeric::{compensated_sum, EULER_GAMMA};
use crate::rng::seeded_rng;

/// Gumbel(μ, σ): `P(X ≤ x) = exp(-exp(-(x-μ)/σ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelParams {
    pub mu: f64,
    pub sigma: f64,
}

impl GumbelParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        Ok(GumbelParams { mu, sigma })
    }

    /// `exp(-(x-μ)/σ)`, the quantity raised to the stable index in mixtures.
    pub fn tail_weight(&self, x: f64) -> f64 {
        (-(x - self.mu) / self.sigma).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-self.tail_weight(x)).exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        -(-self.tail_weight(x)).exp_m1()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let y = (x - self.mu) / self.sigma;
        -self.sigma.ln() - y - (-y).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        Ok(self.mu - self.sigma * (-q.ln()).ln())
    }

    pub fn mean(&self) -> f64 {
        self.mu + EULER_GAMMA * self.sigma
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.mu - self.sigma * (-u.ln()).ln()
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

/// GEV(μ, σ, γ) with `γ ≠ 0`: `P(X ≤ x) = exp(-(1 + γ(x-μ)/σ)^(-1/γ))`.
///
/// The finite endpoint `δ = μ - σ/γ` is a lower bound of the support for
/// `γ > 0` and an upper bound for `γ < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, gamma: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        if !gamma.is_finite() || gamma == 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must be finite and nonzero (use the Gumbel type for gamma = 0)",
            });
        }
        Ok(GevParams { mu, sigma, gamma })
    }

    pub fn endpoint(&self) -> f64 {
        self.mu - self.sigma / self.gamma
    }

    /// `1 + γ(x-μ)/σ`; positive inside the support.
    fn support_term(&self, x: f64) -> f64 {
        1.0 + self.gamma * (x - self.mu) / self.sigma
    }

    pub fn in_support(&self, x: f64) -> bool {
        self.support_term(x) > 0.0
    }

    /// `(1 + γ(x-μ)/σ)^(-1/γ)`, clamped to `+∞` below a left endpoint and
    /// to `0` above a right endpoint.
    pub fn tail_weight(&self, x: f64) -> f64 {
        let t = self.support_term(x);
        if t <= 0.0 {
            if self.gamma > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            (-t.ln() / self.gamma).exp()
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-self.tail_weight(x)).exp()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let t = self.support_term(x);
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let ln_z = -t.ln() / self.gamma;
        -self.sigma.ln() + (1.0 + self.gamma) * ln_z - ln_z.exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_probability(q)?;
        let e = -q.ln();
        Ok(self.mu + self.sigma * (e.powf(-self.gamma) - 1.0) / self.gamma)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        let e = -u.ln();
        self.mu + self.sigma * (e.powf(-self.gamma) - 1.0) / self.gamma
    }

    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

/// Probability-weighted-moment estimate of Gumbel parameters.
///
/// `b0` is the sample mean and `b1 = (1/n) Σ (i-1)/(n-1) x_(i)` over the
/// ascending order statistics; `σ = (2 b1 - b0) / ln 2`, `μ = b0 - γ_E σ`.
pub fn pwm_fit_gumbel(data: &[f64]) -> Result<GumbelParams> {
    if data.len() < 2 {
        return Err(Error::InsufficientData("PWM fit needs at least two observations"));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("non-finite observation"));
    }
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let b0 = compensated_sum(xs.iter().copied()) / n;
    let b1 = compensated_sum(xs.iter().enumerate().map(|(i, &x)| i as f64 / (n - 1.0) * x)) / n;
    let sigma = (2.0 * b1 - b0) / std::f64::consts::LN_2;
    if !(sigma > 0.0) || sigma <= 1e-12 * b0.abs().max(1e-300) {
        return Err(Error::DegenerateSample("PWM scale estimate is not positive"));
    }
    Ok(GumbelParams {
        mu: b0 - EULER_GAMMA * sigma,
        sigma,
    })
}

/// Gumbel probability-plot coordinates `(x_(i), -ln(-ln p_i))` with
/// plotting positions `p_i = (i - 0.5)/n`, sorted by `x`.
pub fn gumbel_plot_coords(data: &[f64]) -> Vec<(f64, f64)> {
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.into_iter()
        .enumerate()
        .map(|(i, x)| {
            let p = (i as f64 + 0.5) / n;
            (x, -(-p.ln()).ln())
        })
        .collect()
}

//! GEV margins: every `exp(-(x-μ)/σ)` becomes `(1 + γ(x-μ)/σ)^(-1/γ)`.

use serde::{Deserialize, Serialize};

use super::{ExtremeModel, MixtureSpec};
use crate::error::{Error, Result};
use crate::evd::GevParams;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevMixtureSpec {
    base: MixtureSpec,
    margins: Vec<GevParams>,
}

/// Replaces the Gumbel margins of `spec` by GEV margins with common shape `gamma`.
pub fn gev_translate(spec: &MixtureSpec, gamma: f64) -> Result<GevMixtureSpec> {
    let margins = spec
        .locations()
        .iter()
        .zip(spec.scales())
        .map(|(&mu, &sigma)| GevParams::new(mu, sigma, gamma))
        .collect::<Result<Vec<_>>>()?;
    Ok(GevMixtureSpec {
        base: spec.clone(),
        margins,
    })
}

pub fn gev_joint_cdf(spec: &GevMixtureSpec, x: &[f64]) -> Result<f64> {
    spec.joint_cdf(x)
}

/// Exact draws from the GEV translation of `spec` with shape `gamma`.
pub fn gev_simulate(spec: &MixtureSpec, gamma: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(gev_translate(spec, gamma)?.simulate(n, seed))
}

impl GevMixtureSpec {
    /// Per-coordinate conditional margins, one per row of `base`.
    pub fn new(base: MixtureSpec, margins: Vec<GevParams>) -> Result<Self> {
        if margins.len() != base.dim() {
            return Err(Error::InvalidSpec(format!(
                "{} margins for {} coordinates",
                margins.len(),
                base.dim()
            )));
        }
        Ok(GevMixtureSpec { base, margins })
    }

    pub fn base(&self) -> &MixtureSpec {
        &self.base
    }

    pub fn margins(&self) -> &[GevParams] {
        &self.margins
    }

    /// Unconditional law of coordinate `t`. With `C = Σ_a c_{t,a}^α` it is
    /// GEV with shape `γ/α`, scale `σ C^{γ/α}/α` and the conditional endpoint;
    /// for `C = 1` the location is unchanged.
    pub fn marginal(&self, t: usize) -> Result<GevParams> {
        let m = self
            .margins
            .get(t)
            .ok_or_else(|| Error::InvalidSpec(format!("index {t} out of range")))?;
        let alpha = self.base.alpha();
        let total: f64 = self
            .base
            .coefficients()
            .get(t)
            .map(|row| row.iter().filter(|&&c| c > 0.0).map(|c| c.powf(alpha)).sum())
            .unwrap_or(1.0);
        let shape = m.gamma / alpha;
        let stretch = total.powf(m.gamma / alpha);
        let scale = m.sigma * stretch / alpha;
        let mu = if total == 1.0 {
            m.mu
        } else {
            scale / shape * (1.0 - (1.0 - m.gamma * m.mu / m.sigma) / stretch)
        };
        GevParams::new(mu, scale, shape)
    }
}

impl ExtremeModel for GevMixtureSpec {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn ln_joint_cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidSpec(format!("expected {} coordinates, got {}", self.dim(), x.len())));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidSpec("NaN coordinate".into()));
        }
        let ln_z: Vec<f64> = x
            .iter()
            .zip(&self.margins)
            .map(|(&v, m)| {
                if v == f64::INFINITY {
                    f64::NEG_INFINITY
                } else if v == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    m.tail_weight(v).ln()
                }
            })
            .collect();
        Ok(self.base.ln_cdf_from_ln_weights(&ln_z))
    }

    /// `X_t = H_t^γ E_t + (1 - H_t^γ) δ_t` with `H_t = Σ_a c_{t,a} S_a` and
    /// `E_t` drawn from the conditional GEV margin.
    fn sample_with(&self, rng: &mut SimRng) -> Vec<f64> {
        let ln_s = self.base.sample_ln_mixing(rng);
        let ln_h = self.base.ln_directing(&ln_s);
        ln_h.iter()
            .zip(&self.margins)
            .map(|(&lh, m)| {
                let e = m.sample(rng);
                let factor = (m.gamma * lh).exp();
                factor * e + (1.0 - factor) * m.endpoint()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{RandomEffectsSpec, simulate};
    use approx::assert_relative_eq;

    #[test]
    fn single_margin_matches_unconditional_gev() {
        let (mu, sigma, gamma, alpha) = (1.0, 2.0, 0.3, 0.6);
        let base = MixtureSpec::new(alpha, &[vec![1.0]], vec![mu], vec![sigma]).unwrap();
        let spec = gev_translate(&base, gamma).unwrap();
        let uncond = GevParams::new(mu, sigma / alpha, gamma / alpha).unwrap();
        assert_eq!(spec.marginal(0).unwrap(), uncond);
        for &x in &[-1.0, 0.0, 1.0, 5.0, 40.0] {
            let expected = (-(1.0 + (gamma / alpha) * (x - mu) / (sigma / alpha)).powf(-alpha / gamma)).exp();
            assert_relative_eq!(spec.joint_cdf(&[x]).unwrap(), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn endpoint_is_preserved() {
        for &alpha in &[0.2, 0.5, 0.9, 1.0] {
            let base = RandomEffectsSpec::new(0.0, 1.0, alpha, vec![2]).unwrap().to_mixture();
            let spec = gev_translate(&base, 0.5).unwrap();
            let delta = spec.margins()[0].endpoint();
            assert_eq!(spec.joint_cdf(&[delta, 3.0]).unwrap(), 0.0);
            assert!(spec.joint_cdf(&[delta + 0.5, 3.0]).unwrap() > 0.0);
        }
    }

    #[test]
    fn scaled_marginal_keeps_endpoint() {
        let base = MixtureSpec::new(0.7, &[vec![2.0, 0.5]], vec![0.4], vec![1.3]).unwrap();
        let spec = gev_translate(&base, -0.25).unwrap();
        let m = spec.marginal(0).unwrap();
        assert_relative_eq!(m.endpoint(), spec.margins()[0].endpoint(), max_relative = 1e-12);
        for &x in &[-2.0, 0.0, 1.5, 5.0] {
            assert_relative_eq!(spec.joint_cdf(&[x]).unwrap(), m.cdf(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn degenerate_alpha_returns_conditional_draws() {
        let base = MixtureSpec::new(1.0, &[vec![1.0]], vec![0.0], vec![1.0]).unwrap();
        let spec = gev_translate(&base, 0.4).unwrap();
        let draws = simulate(&spec, 50, 4);
        let mut rng = crate::rng::seeded_rng(crate::rng::substream_seed(4, 0));
        let e = spec.margins()[0].sample(&mut rng);
        assert_relative_eq!(draws[0][0], e, max_relative = 1e-14);
    }

    #[test]
    fn draws_respect_endpoints() {
        for &gamma in &[0.5, -0.5] {
            let base = RandomEffectsSpec::new(0.0, 1.0, 0.5, vec![3]).unwrap().to_mixture();
            let spec = gev_translate(&base, gamma).unwrap();
            let delta = spec.margins()[0].endpoint();
            for row in simulate(&spec, 2000, 8) {
                for v in row {
                    if gamma > 0.0 {
                        assert!(v > delta);
                    } else {
                        assert!(v < delta);
                    }
                }
            }
        }
    }
}

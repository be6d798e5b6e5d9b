//! Gumbel maximum-likelihood fits that treat groups as fixed effects.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{likelihood_ratio_test, FitResult, LrtResult, ParamKind, Reparameterization};
use crate::error::{Error, Result};
use crate::evd::GumbelParams;
use crate::numeric::{compensated_sum, find_root, log_sum_exp, mean};

/// Per-group location at a given scale, `μ_i(σ) = -σ ln mean_j e^{-x_ij/σ}`,
/// and the weighted mean `Σ x w / Σ w` with `w = e^{-x/σ}`.
fn profile(group: &[f64], sigma: f64) -> (f64, f64) {
    let ln_w: Vec<f64> = group.iter().map(|x| -x / sigma).collect();
    let ln_total = log_sum_exp(&ln_w);
    let weighted = compensated_sum(group.iter().zip(&ln_w).map(|(x, lw)| x * (lw - ln_total).exp()));
    let mu = -sigma * (ln_total - (group.len() as f64).ln());
    (mu, weighted)
}

/// Common-scale score `σ - (1/N) Σ_i n_i (x̄_i - weighted_i(σ))`; its root is the MLE.
fn common_scale_mle(groups: &[Vec<f64>]) -> Result<f64> {
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let spread = groups
        .iter()
        .map(|g| {
            let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(0.0, f64::max);
    let magnitude = groups.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(spread > 1e-12 * magnitude.max(1e-300)) {
        return Err(Error::DegenerateSample("no variation within groups"));
    }
    let score = |sigma: f64| {
        let s = compensated_sum(
            groups
                .iter()
                .zip(&means)
                .map(|(g, m)| g.len() as f64 * (m - profile(g, sigma).1)),
        );
        sigma - s / n
    };
    let lo = 1e-9 * spread;
    let mut hi = spread;
    while score(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonConvergence("scale score has no sign change".into()));
        }
    }
    find_root(score, lo, hi, 0.0).ok_or_else(|| Error::NonConvergence("scale score has no sign change".into()))
}

fn gumbel_loglik(groups: &[Vec<f64>], mus: &[f64], sigmas: &[f64]) -> f64 {
    compensated_sum(groups.iter().zip(mus).zip(sigmas).flat_map(|((g, &mu), &sigma)| {
        g.iter().map(move |&x| match GumbelParams::new(mu, sigma) {
            Ok(p) => p.ln_pdf(x),
            Err(_) => f64::NEG_INFINITY,
        })
    }))
}

fn assemble(model: &str, names: Vec<String>, estimates: Vec<f64>, loglik: f64) -> FitResult {
    FitResult {
        model: model.into(),
        names,
        estimates,
        loglik,
        std_errors: None,
        covariance: None,
        converged: true,
        n_starts_used: 1,
        best_start: 0,
        evaluations: 0,
        boundary: Vec::new(),
        derived: BTreeMap::new(),
        warnings: Vec::new(),
    }
}

fn location_scale(groups: &[Vec<f64>]) -> (f64, f64) {
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let m = mean(&pooled);
    let sd = crate::numeric::variance(&pooled).sqrt();
    (m, if sd > 0.0 { sd } else { 1.0 })
}

/// Gumbel MLE for groups sharing one scale but with separate locations.
pub fn fit_common_scale_gumbel(groups: &[Vec<f64>]) -> Result<FitResult> {
    if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InsufficientData("empty group"));
    }
    if groups.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("non-finite observation"));
    }
    let sigma = common_scale_mle(groups)?;
    let mus: Vec<f64> = groups.iter().map(|g| profile(g, sigma).0).collect();
    let m = groups.len();
    let loglik = |t: &[f64]| gumbel_loglik(groups, &t[..m], &vec![t[m]; m]);
    let mut estimates = mus.clone();
    estimates.push(sigma);
    let mut names: Vec<String> = (1..=m).map(|i| format!("mu_{i}")).collect();
    names.push("sigma".into());
    let mut fit = assemble("gumbel-common-scale", names, estimates.clone(), loglik(&estimates));
    let (loc, scale) = location_scale(groups);
    let mut kinds = vec![ParamKind::Location; m];
    kinds.push(ParamKind::Scale);
    let reparam = Reparameterization::new(kinds, loc, scale)?;
    fit.attach_covariance(reparam.covariance(&loglik, &estimates));
    Ok(fit)
}

/// Gumbel MLE for a single sample.
pub fn fit_gumbel_mle(data: &[f64]) -> Result<FitResult> {
    if data.len() < 2 {
        return Err(Error::InsufficientData("Gumbel fit needs at least two observations"));
    }
    let mut fit = fit_common_scale_gumbel(&[data.to_vec()])?;
    fit.model = "gumbel".into();
    fit.names = vec!["mu".into(), "sigma".into()];
    Ok(fit)
}

/// The three nested conditional Gumbel models: separate `(μ_i, σ_i)`,
/// separate `μ_i` with common `σ`, and one pooled `(μ, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalFits {
    /// Absent when some group is too small for its own scale.
    pub separate: Option<FitResult>,
    pub common_scale: FitResult,
    pub pooled: FitResult,
    pub separate_vs_common: Option<LrtResult>,
    pub common_vs_pooled: LrtResult,
    pub warnings: Vec<String>,
}

pub fn fit_conditional_gumbel_models(groups: &[Vec<f64>]) -> Result<ConditionalFits> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData("conditional models need at least two groups"));
    }
    let m = groups.len();
    let common_scale = fit_common_scale_gumbel(groups)?;
    let pooled_data: Vec<f64> = groups.iter().flatten().copied().collect();
    let pooled = fit_gumbel_mle(&pooled_data)?;
    let common_vs_pooled = likelihood_ratio_test(common_scale.loglik, pooled.loglik, m - 1)?;

    let mut warnings = Vec::new();
    let separate = if groups.iter().any(|g| g.len() < 2) {
        warnings.push("a group has a single observation; separate scales not fitted".into());
        None
    } else {
        let parts: Vec<FitResult> = groups.iter().map(|g| fit_gumbel_mle(g)).collect::<Result<_>>()?;
        let mus: Vec<f64> = parts.iter().map(|p| p.estimates[0]).collect();
        let sigmas: Vec<f64> = parts.iter().map(|p| p.estimates[1]).collect();
        let mut names: Vec<String> = (1..=m).map(|i| format!("mu_{i}")).collect();
        names.extend((1..=m).map(|i| format!("sigma_{i}")));
        let mut estimates = mus;
        estimates.extend(&sigmas);
        let loglik = compensated_sum(parts.iter().map(|p| p.loglik));
        let mut fit = assemble("gumbel-separate", names, estimates, loglik);
        // groups are independent, so the covariance is block diagonal
        if parts.iter().all(|p| p.covariance.is_some()) {
            let mut cov = vec![vec![0.0; 2 * m]; 2 * m];
            for (i, p) in parts.iter().enumerate() {
                let c = p.covariance.as_ref().expect("checked");
                for (a, ia) in [i, m + i].into_iter().enumerate() {
                    for (b, ib) in [i, m + i].into_iter().enumerate() {
                        cov[ia][ib] = c[a][b];
                    }
                }
            }
            fit.attach_covariance(Ok(cov));
        } else {
            fit.warnings.push("information matrix not invertible; covariance omitted".into());
        }
        Some(fit)
    };
    let separate_vs_common = match &separate {
        Some(s) => Some(likelihood_ratio_test(s.loglik, common_scale.loglik, m - 1)?),
        None => None,
    };
    Ok(ConditionalFits {
        separate,
        common_scale,
        pooled,
        separate_vs_common,
        common_vs_pooled,
        warnings,
    })
}

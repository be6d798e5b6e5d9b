//! Model checks for fitted random-effects models.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::estimation::{fit_conditional_gumbel_models, ConditionalFits, FitResult, LrtResult};
use crate::evd::gumbel_plot_coords;
use crate::stable::ExpSParams;

/// Quantile pairs of the estimated group locations against a fitted
/// exponential-stable law, with the least-squares line through them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqPlotData {
    pub theoretical: Vec<f64>,
    pub empirical: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

/// Theoretical quantiles at `p_i = (i - 0.5)/m` against the sorted locations.
pub fn exps_qq(locations: &[f64], fitted: &ExpSParams) -> Result<QqPlotData> {
    if locations.len() < 2 {
        return Err(Error::InsufficientData("qq-plot needs at least two locations"));
    }
    if fitted.alpha() == 1.0 {
        return Err(Error::DegenerateLaw("exponential-stable quantile plot"));
    }
    let m = locations.len() as f64;
    let mut empirical = locations.to_vec();
    empirical.sort_by(f64::total_cmp);
    let theoretical = (0..locations.len())
        .map(|i| fitted.quantile((i as f64 + 0.5) / m))
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept) = least_squares(&theoretical, &empirical);
    Ok(QqPlotData {
        theoretical,
        empirical,
        slope,
        intercept,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = crate::numeric::mean(x);
    let my = crate::numeric::mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Correlation `1 - α²` between two observations of one group.
pub fn implied_correlation(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(1.0 - alpha * alpha)
}

/// Pearson correlation over all unordered within-group pairs, each pair
/// counted in both orders, centered at the mean of the pair list.
pub fn within_group_correlation(groups: &[Vec<f64>]) -> Result<f64> {
    let weight = |g: &Vec<f64>| g.len().saturating_sub(1) as f64;
    let total_weight: f64 = groups.iter().map(|g| weight(g) * g.len() as f64).sum();
    if total_weight == 0.0 {
        return Err(Error::InsufficientData("no within-group pairs"));
    }
    let center = groups.iter().map(|g| weight(g) * g.iter().sum::<f64>()).sum::<f64>() / total_weight;
    let mut cross = 0.0;
    let mut square = 0.0;
    for g in groups.iter().filter(|g| g.len() >= 2) {
        let sum: f64 = g.iter().map(|x| x - center).sum();
        let sum_sq: f64 = g.iter().map(|x| (x - center) * (x - center)).sum();
        cross += sum * sum - sum_sq;
        square += weight(g) * sum_sq;
    }
    if !(square > 0.0) {
        return Err(Error::DegenerateSample("no variation in paired observations"));
    }
    Ok((cross / square).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelPlot {
    pub group: usize,
    /// `(x_(i), -ln(-ln p_i))`
    pub points: Vec<(f64, f64)>,
}

/// The random-effects scales next to their conditional-model counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleCheck {
    pub sigma: f64,
    pub common_sigma: f64,
    pub sigma_star: f64,
    pub pooled_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub gumbel_plots: Vec<GumbelPlot>,
    pub qq: Option<QqPlotData>,
    pub implied_correlation: f64,
    pub empirical_correlation: Option<f64>,
    pub correlation_convention: String,
    pub conditional: ConditionalFits,
    pub lrt_separate_vs_common: Option<LrtResult>,
    pub lrt_common_vs_pooled: LrtResult,
    pub scales: ScaleCheck,
    pub warnings: Vec<String>,
}

/// Bundles the model checks for a random-effects fit of `groups`.
pub fn diagnostic_report(fit: &FitResult, groups: &[Vec<f64>]) -> Result<DiagnosticReport> {
    let param = |name: &str| {
        fit.get(name)
            .ok_or_else(|| Error::InvalidSpec(format!("fit has no parameter `{name}`")))
    };
    let (mu, sigma, alpha) = (param("mu")?, param("sigma")?, param("alpha")?);
    let conditional = fit_conditional_gumbel_models(groups)?;
    let m = groups.len();
    let locations = &conditional.common_scale.estimates[..m];
    let mut warnings = conditional.warnings.clone();
    let qq = match ExpSParams::new(alpha, mu, sigma).and_then(|p| exps_qq(locations, &p)) {
        Ok(q) => Some(q),
        Err(e) => {
            warnings.push(format!("qq-plot unavailable: {e}"));
            None
        }
    };
    let empirical_correlation = match within_group_correlation(groups) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("empirical correlation unavailable: {e}"));
            None
        }
    };
    let scales = ScaleCheck {
        sigma,
        common_sigma: conditional.common_scale.get("sigma").unwrap_or(f64::NAN),
        sigma_star: sigma / alpha,
        pooled_sigma: conditional.pooled.get("sigma").unwrap_or(f64::NAN),
    };
    Ok(DiagnosticReport {
        gumbel_plots: groups
            .iter()
            .enumerate()
            .map(|(i, g)| GumbelPlot {
                group: i,
                points: gumbel_plot_coords(g),
            })
            .collect(),
        qq,
        implied_correlation: implied_correlation(alpha)?,
        empirical_correlation,
        correlation_convention: "pooled Pearson over all within-group pairs, centered at the pair-list mean".into(),
        lrt_separate_vs_common: conditional.separate_vs_common,
        lrt_common_vs_pooled: conditional.common_vs_pooled,
        conditional,
        scales,
        warnings,
    })
}

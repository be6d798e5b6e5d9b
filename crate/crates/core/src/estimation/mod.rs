//! Maximum-likelihood fitting of the random-effects and hidden MA(1) models.

mod conditional;
mod information;
mod optimize;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evd::pwm_fit_gumbel;
use crate::likelihood::{ma1_loglik, re_total_loglik, Ma1Params, ReParams, MAX_ORDER};
use crate::rng::seeded_rng;

pub use conditional::{fit_common_scale_gumbel, fit_conditional_gumbel_models, fit_gumbel_mle, ConditionalFits};
pub use information::{
    delta_method_interval, hessian, likelihood_ratio_test, observed_information, Interval, LrtResult,
};
pub use optimize::{nelder_mead, Minimum, NelderMeadOptions};

/// Bounds on the stable index during optimization.
pub const ALPHA_MIN: f64 = 0.02;
pub const ALPHA_MAX: f64 = 0.995;
/// Lower index bound for the MA(1) search. As `α → 0` with `b^α` fixed the
/// joint law approaches a singular max-autoregressive limit that the
/// likelihood can chase on independent data.
pub const MA1_ALPHA_MIN: f64 = 0.1;

/// How a natural parameter maps to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    /// `μ = location + scale · u`
    Location,
    /// `σ = scale · e^u`
    Scale,
    /// `α = α_min + (ALPHA_MAX - α_min) / (1 + e^{-u})`
    Index,
    /// `b = e^u`
    Coefficient,
}

/// Bijection between the open parameter region and `ℝ^d`, standardized by a
/// data location and scale so that fits are shift and scale equivariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reparameterization {
    pub kinds: Vec<ParamKind>,
    pub location: f64,
    pub scale: f64,
    pub alpha_min: f64,
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl Reparameterization {
    pub fn new(kinds: Vec<ParamKind>, location: f64, scale: f64) -> Result<Self> {
        crate::error::check_finite("location", location)?;
        crate::error::check_scale("scale", scale)?;
        Ok(Reparameterization {
            kinds,
            location,
            scale,
            alpha_min: ALPHA_MIN,
        })
    }

    pub fn with_alpha_min(mut self, alpha_min: f64) -> Result<Self> {
        if !(alpha_min > 0.0 && alpha_min < ALPHA_MAX) {
            return Err(Error::InvalidParameter {
                name: "alpha_min",
                value: alpha_min,
                reason: "must lie in (0, ALPHA_MAX)",
            });
        }
        self.alpha_min = alpha_min;
        Ok(self)
    }

    pub fn to_natural(&self, u: &[f64]) -> Vec<f64> {
        self.kinds
            .iter()
            .zip(u)
            .map(|(k, &v)| match k {
                ParamKind::Location => self.location + self.scale * v,
                ParamKind::Scale => self.scale * v.exp(),
                ParamKind::Index => self.alpha_min + (ALPHA_MAX - self.alpha_min) * logistic(v),
                ParamKind::Coefficient => v.exp(),
            })
            .collect()
    }

    pub fn to_unconstrained(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.kinds
            .iter()
            .zip(theta)
            .map(|(k, &v)| {
                let u = match k {
                    ParamKind::Location => (v - self.location) / self.scale,
                    ParamKind::Scale => (v / self.scale).ln(),
                    ParamKind::Index => {
                        let p = (v - self.alpha_min) / (ALPHA_MAX - self.alpha_min);
                        (p / (1.0 - p)).ln()
                    }
                    ParamKind::Coefficient => v.ln(),
                };
                if u.is_finite() {
                    Ok(u)
                } else {
                    Err(Error::InvalidParameter {
                        name: "theta",
                        value: v,
                        reason: "outside the open parameter region",
                    })
                }
            })
            .collect()
    }

    /// Diagonal of `dθ/du`.
    pub fn jacobian(&self, u: &[f64]) -> Vec<f64> {
        self.kinds
            .iter()
            .zip(u)
            .map(|(k, &v)| match k {
                ParamKind::Location => self.scale,
                ParamKind::Scale => self.scale * v.exp(),
                ParamKind::Index => {
                    let p = logistic(v);
                    (ALPHA_MAX - self.alpha_min) * p * (1.0 - p)
                }
                ParamKind::Coefficient => v.exp(),
            })
            .collect()
    }

    /// Observed-information covariance on the natural scale, computed on
    /// the unconstrained scale and mapped by the Jacobian.
    pub fn covariance<F: Fn(&[f64]) -> f64>(&self, loglik: &F, theta_hat: &[f64]) -> Result<Vec<Vec<f64>>> {
        let u = self.to_unconstrained(theta_hat)?;
        let cov = observed_information(|v: &[f64]| loglik(&self.to_natural(v)), &u)?;
        let j = self.jacobian(&u);
        Ok(cov
            .iter()
            .enumerate()
            .map(|(a, row)| row.iter().enumerate().map(|(b, c)| j[a] * c * j[b]).collect())
            .collect())
    }
}

/// Outcome of a likelihood maximization, on the natural parameter scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub loglik: f64,
    pub std_errors: Option<Vec<f64>>,
    pub covariance: Option<Vec<Vec<f64>>>,
    pub converged: bool,
    pub n_starts_used: usize,
    pub best_start: usize,
    pub evaluations: usize,
    /// Parameters whose estimate sits at or near a bound.
    pub boundary: Vec<String>,
    pub derived: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.index(name)?;
        self.std_errors.as_ref().map(|s| s[i])
    }

    pub(crate) fn attach_covariance(&mut self, cov: Result<Vec<Vec<f64>>>) {
        match cov {
            Ok(c) => {
                self.std_errors = Some((0..c.len()).map(|i| c[i][i].max(0.0).sqrt()).collect());
                self.covariance = Some(c);
            }
            Err(_) => self
                .warnings
                .push("information matrix not invertible; covariance omitted".into()),
        }
    }
}

/// Conditional-scale start for the MA(1) search, as a multiple of the PWM scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SigmaStart {
    Half,
    Double,
}

impl SigmaStart {
    fn factor(self) -> f64 {
        match self {
            SigmaStart::Half => 0.5,
            SigmaStart::Double => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub optimizer: NelderMeadOptions,
    /// Number of MA(1) starting points, the default start included.
    pub starts: usize,
    pub seed: u64,
    pub sigma_start: SigmaStart,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            optimizer: NelderMeadOptions::default(),
            starts: 20,
            seed: 0,
            sigma_start: SigmaStart::Half,
        }
    }
}

fn check_values(groups: &[Vec<f64>]) -> Result<()> {
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InsufficientData("empty group"));
    }
    if groups.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("non-finite observation"));
    }
    Ok(())
}

struct Search<'a> {
    reparam: Reparameterization,
    steps: Vec<f64>,
    objective: &'a dyn Fn(&[f64]) -> f64,
}

struct SearchOutcome {
    theta: Vec<f64>,
    loglik: f64,
    converged: bool,
    best_start: usize,
    evaluations: usize,
    start_logliks: Vec<f64>,
}

impl Search<'_> {
    /// Runs the simplex from every start; the highest final log-likelihood
    /// wins, ties going to the earliest start.
    fn run(&self, starts: &[Vec<f64>], opts: &NelderMeadOptions) -> Result<SearchOutcome> {
        let mut best: Option<(usize, Minimum)> = None;
        let mut evaluations = 0;
        let mut start_logliks = Vec::with_capacity(starts.len());
        for (i, s) in starts.iter().enumerate() {
            let u0 = self.reparam.to_unconstrained(s)?;
            start_logliks.push((self.objective)(s));
            let m = nelder_mead(
                |u: &[f64]| -(self.objective)(&self.reparam.to_natural(u)),
                &u0,
                &self.steps,
                opts,
            );
            evaluations += m.evals;
            if m.value.is_finite() && best.as_ref().is_none_or(|(_, b)| m.value < b.value) {
                best = Some((i, m));
            }
        }
        let (best_start, m) = best.ok_or_else(|| {
            Error::NonConvergence(format!("no finite log-likelihood reached from {} starts", starts.len()))
        })?;
        Ok(SearchOutcome {
            theta: self.reparam.to_natural(&m.x),
            loglik: -m.value,
            converged: m.converged,
            best_start,
            evaluations,
            start_logliks,
        })
    }
}

fn flag_index(alpha: f64, alpha_min: f64, fit: &mut FitResult) {
    if alpha > 0.99 || alpha < alpha_min + 5e-3 {
        fit.boundary.push("alpha".into());
        fit.warnings
            .push("alpha is at the edge of its range; Wald standard errors are unreliable".into());
    }
}

/// Fits the Gumbel random-effects model `X_ij = μ + σ ln S_i + G_ij` by
/// maximizing the exact likelihood from the PWM start `(μ₀, σ₀/2, 1/2)`.
pub fn fit_random_effects(groups: &[Vec<f64>], opts: &FitOptions) -> Result<FitResult> {
    if groups.len() < 2 {
        return Err(Error::NotIdentifiable("a single group"));
    }
    check_values(groups)?;
    if groups.iter().all(|g| g.len() == 1) {
        return Err(Error::NotIdentifiable("all groups have a single observation"));
    }
    if let Some(n) = groups.iter().map(Vec::len).find(|&n| n > MAX_ORDER) {
        return Err(Error::Capacity { n, alpha: 0.5 });
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let pwm = pwm_fit_gumbel(&pooled)?;
    let reparam = Reparameterization::new(
        vec![ParamKind::Location, ParamKind::Scale, ParamKind::Index],
        pwm.mu,
        pwm.sigma,
    )?;
    let loglik = |t: &[f64]| match ReParams::new(t[0], t[1], t[2]) {
        Ok(p) => re_total_loglik(&p, groups).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    };
    let search = Search {
        reparam,
        steps: vec![0.5, 0.5, 1.0],
        objective: &loglik,
    };
    let start = vec![pwm.mu, 0.5 * pwm.sigma, 0.5];
    let out = search.run(std::slice::from_ref(&start), &opts.optimizer)?;
    let mut fit = FitResult {
        model: "random-effects".into(),
        names: vec!["mu".into(), "sigma".into(), "alpha".into()],
        estimates: out.theta.clone(),
        loglik: out.loglik,
        std_errors: None,
        covariance: None,
        converged: out.converged,
        n_starts_used: 1,
        best_start: 0,
        evaluations: out.evaluations,
        boundary: Vec::new(),
        derived: BTreeMap::from([
            ("sigma_star".to_string(), out.theta[1] / out.theta[2]),
            ("start_loglik".to_string(), out.start_logliks[0]),
        ]),
        warnings: Vec::new(),
    };
    if !out.converged {
        fit.warnings.push("simplex did not converge within the evaluation budget".into());
    }
    fit.attach_covariance(search.reparam.covariance(&loglik, &out.theta));
    flag_index(out.theta[2], ALPHA_MIN, &mut fit);
    Ok(fit)
}

/// Smallest `b` used to start a search; `b = 0` itself lies on the boundary
/// of the log scale.
const B_START: f64 = 1e-2;

/// Fits the hidden MA(1) model with one location per series and common
/// `(b, σ, α)`, multi-started over `σ ∈ [0.1σ₀, σ₀]`, `α ∈ [0.1, 0.99]`,
/// `b ∈ [0, 2]`.
pub fn fit_ma1(series: &[Vec<f64>], opts: &FitOptions) -> Result<FitResult> {
    if series.is_empty() {
        return Err(Error::InsufficientData("no series"));
    }
    check_values(series)?;
    if series.iter().any(|s| s.len() < 2) {
        return Err(Error::InsufficientData("every series needs at least two observations"));
    }
    let k = series.len();
    let pooled: Vec<f64> = series.iter().flatten().copied().collect();
    let pwm = pwm_fit_gumbel(&pooled)?;
    let locations: Vec<f64> = series
        .iter()
        .map(|s| pwm_fit_gumbel(s).map(|g| g.mu).unwrap_or(pwm.mu))
        .collect();

    let mut kinds = vec![ParamKind::Location; k];
    kinds.extend([ParamKind::Coefficient, ParamKind::Scale, ParamKind::Index]);
    let reparam = Reparameterization::new(kinds, pwm.mu, pwm.sigma)?.with_alpha_min(MA1_ALPHA_MIN)?;

    let loglik = |t: &[f64]| {
        let (b, sigma, alpha) = (t[k], t[k + 1], t[k + 2]);
        let mut total = 0.0;
        for (s, &mu) in series.iter().zip(t) {
            let value = Ma1Params::new(mu, b, sigma, alpha).and_then(|p| ma1_loglik(&p, s));
            match value {
                Ok(v) => total += v,
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        total
    };

    // conditional locations matching the marginal PWM locations
    let start_at = |b: f64, sigma: f64, alpha: f64| {
        let shift = sigma / alpha * (1.0 + b.powf(alpha)).ln();
        let mut t: Vec<f64> = locations.iter().map(|m| m - shift).collect();
        t.extend([b, sigma, alpha]);
        t
    };
    let mut starts = vec![start_at(B_START, opts.sigma_start.factor() * pwm.sigma, 0.5)];
    let mut rng = seeded_rng(opts.seed);
    for _ in 1..opts.starts.max(1) {
        let sigma = pwm.sigma * rng.random_range(0.1..=1.0);
        let alpha = rng.random_range(0.1..=0.99f64).max(MA1_ALPHA_MIN + 0.01);
        let b = rng.random_range(0.0..=2.0f64).max(B_START);
        starts.push(start_at(b, sigma, alpha));
    }

    let mut steps = vec![0.5; k];
    steps.extend([1.0, 0.5, 1.0]);
    let search = Search {
        reparam,
        steps,
        objective: &loglik,
    };
    let out = search.run(&starts, &opts.optimizer)?;
    let t = &out.theta;
    let (b, sigma, alpha) = (t[k], t[k + 1], t[k + 2]);

    let mut names: Vec<String> = (1..=k).map(|i| format!("mu_{i}")).collect();
    names.extend(["b".to_string(), "sigma".to_string(), "alpha".to_string()]);
    let mut derived = BTreeMap::from([
        ("marginal_scale".to_string(), sigma / alpha),
        ("start_loglik".to_string(), out.start_logliks[0]),
    ]);
    let shift = sigma / alpha * (1.0 + b.powf(alpha)).ln();
    for (i, mu) in t[..k].iter().enumerate() {
        derived.insert(format!("marginal_location_{}", i + 1), mu + shift);
    }
    let mut fit = FitResult {
        model: "ma1".into(),
        names,
        estimates: t.clone(),
        loglik: out.loglik,
        std_errors: None,
        covariance: None,
        converged: out.converged,
        n_starts_used: starts.len(),
        best_start: out.best_start,
        evaluations: out.evaluations,
        boundary: Vec::new(),
        derived,
        warnings: Vec::new(),
    };
    if !out.converged {
        fit.warnings.push("best start did not converge within the evaluation budget".into());
    }
    fit.attach_covariance(search.reparam.covariance(&loglik, t));
    if b < 1e-3 {
        fit.boundary.push("b".into());
        fit.warnings.push("b is near zero; the model is close to independence".into());
    }
    flag_index(alpha, MA1_ALPHA_MIN, &mut fit);
    Ok(fit)
}

/// The MA(1) model with `b = 0`: independent Gumbel margins with a common
/// scale `σ/α`, which is all that remains identifiable.
pub fn fit_ma1_independent(series: &[Vec<f64>]) -> Result<FitResult> {
    let mut fit = fit_common_scale_gumbel(series)?;
    fit.model = "ma1-independent".into();
    Ok(fit)
}

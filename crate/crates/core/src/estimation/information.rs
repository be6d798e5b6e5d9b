//! Observed information, delta-method intervals and likelihood-ratio tests.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::FitResult;
use crate::error::{Error, Result};

fn step(theta: f64) -> f64 {
    1e-4 * theta.abs().max(1.0)
}

/// Central-difference Hessian of `f` at `theta`.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, theta: &[f64]) -> DMatrix<f64> {
    let d = theta.len();
    let f0 = f(theta);
    let mut h = DMatrix::zeros(d, d);
    let mut x = theta.to_vec();
    for i in 0..d {
        let hi = step(theta[i]);
        x[i] = theta[i] + hi;
        let up = f(&x);
        x[i] = theta[i] - hi;
        let down = f(&x);
        x[i] = theta[i];
        h[(i, i)] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in 0..i {
            let hj = step(theta[j]);
            let mut corner = |si: f64, sj: f64| {
                x[i] = theta[i] + si * hi;
                x[j] = theta[j] + sj * hj;
                let v = f(&x);
                x[i] = theta[i];
                x[j] = theta[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Inverse of the negative Hessian of `loglik` at its maximizer `theta_hat`.
///
/// Eigenvalues of the information below `1e-12 · trace` are floored there
/// before inverting; a clearly indefinite or non-finite information is
/// reported as [`Error::MissingCovariance`].
pub fn observed_information<F: Fn(&[f64]) -> f64>(loglik: F, theta_hat: &[f64]) -> Result<Vec<Vec<f64>>> {
    let info = -hessian(&loglik, theta_hat);
    invert_information(info)
}

pub(crate) fn invert_information(info: DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let d = info.nrows();
    if d == 0 || info.iter().any(|v| !v.is_finite()) {
        return Err(Error::MissingCovariance);
    }
    let trace = info.trace();
    if !(trace > 0.0) {
        return Err(Error::MissingCovariance);
    }
    let eigen = SymmetricEigen::new(info);
    let floor = 1e-12 * trace;
    if eigen.eigenvalues.iter().any(|&l| l < -1e-6 * trace) {
        return Err(Error::MissingCovariance);
    }
    let inv = DMatrix::from_diagonal(&eigen.eigenvalues.map(|l| 1.0 / l.max(floor)));
    let cov = &eigen.eigenvectors * inv * eigen.eigenvectors.transpose();
    Ok((0..d)
        .map(|i| (0..d).map(|j| 0.5 * (cov[(i, j)] + cov[(j, i)])).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub std_error: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

/// `g(θ̂) ± z · sqrt(∇gᵀ Σ ∇g)` with a central-difference gradient on the
/// natural parameter scale.
pub fn delta_method_interval<G: Fn(&[f64]) -> f64>(g: G, fit: &FitResult, level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter {
            name: "level",
            value: level,
            reason: "must lie in (0, 1)",
        });
    }
    let cov = fit.covariance.as_ref().ok_or(Error::MissingCovariance)?;
    let theta = &fit.estimates;
    let mut x = theta.clone();
    let grad: Vec<f64> = (0..theta.len())
        .map(|i| {
            let h = 1e-6 * theta[i].abs().max(1e-2);
            x[i] = theta[i] + h;
            let up = g(&x);
            x[i] = theta[i] - h;
            let down = g(&x);
            x[i] = theta[i];
            (up - down) / (2.0 * h)
        })
        .collect();
    let var: f64 = (0..grad.len())
        .flat_map(|i| (0..grad.len()).map(move |j| (i, j)))
        .map(|(i, j)| grad[i] * cov[i][j] * grad[j])
        .sum();
    let estimate = g(theta);
    let std_error = var.max(0.0).sqrt();
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * level);
    Ok(Interval {
        estimate,
        std_error,
        lo: estimate - z * std_error,
        hi: estimate + z * std_error,
        level,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// `2(ℓ_full - ℓ_reduced)` referred to a chi-square law with `df` degrees of freedom.
pub fn likelihood_ratio_test(loglik_full: f64, loglik_reduced: f64, df: usize) -> Result<LrtResult> {
    if df == 0 {
        return Err(Error::InvalidSpec("likelihood ratio test needs df >= 1".into()));
    }
    let mut statistic = 2.0 * (loglik_full - loglik_reduced);
    if statistic.is_nan() {
        return Err(Error::InvalidSpec("non-finite log-likelihood".into()));
    }
    if statistic < -1e-6 {
        return Err(Error::NegativeStatistic(statistic));
    }
    statistic = statistic.max(0.0);
    let chi2 = ChiSquared::new(df as f64).expect("df >= 1");
    Ok(LrtResult {
        statistic,
        df,
        p_value: chi2.sf(statistic),
    })
}

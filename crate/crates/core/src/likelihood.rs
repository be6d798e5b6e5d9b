//! Exact log-likelihoods for the random-effects and hidden MA(1) models.
//!
//! Both densities are mixed partial derivatives of a joint CDF of the form
//! `exp(-Σ_a (Σ_t c_{t,a} z_t)^α)`. The random-effects case reduces to the
//! moments `D_n(Δ) = E[S^n e^{-SΔ}] = (-1)^n dⁿ/dΔⁿ e^{-Δ^α}` of a positive
//! stable variable; the MA(1) case uses a three-term recursion.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_finite, check_scale, Error, Result};
use crate::numeric::{compensated_sum, log_sum_exp, SignedLog};

/// Largest derivative order accepted; the recursion is quadratic in `n`.
pub const MAX_ORDER: usize = 20_000;

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Coefficients `a_{n,j}`, `j = 1..=n`, of
/// `D_n(Δ) = e^{-Δ^α} Σ_j a_{n,j} Δ^{jα - n}`, stored as logarithms.
///
/// Built from `a_{1,1} = α` and `a_{n+1,j} = (n - jα) a_{n,j} + α a_{n,j-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeTable {
    order: usize,
    alpha: f64,
    ln_coefficients: Vec<f64>,
}

impl DerivativeTable {
    pub fn new(order: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if order > MAX_ORDER {
            return Err(Error::Capacity { n: order, alpha });
        }
        let ln_alpha = alpha.ln();
        let mut row: Vec<f64> = Vec::with_capacity(order);
        if order >= 1 {
            row.push(ln_alpha);
        }
        for n in 1..order {
            // row holds a_{n,1..=n}; extend to a_{n+1,1..=n+1} in place, right to left
            row.push(f64::NEG_INFINITY);
            for j in (1..=n + 1).rev() {
                let keep = if j <= n {
                    let w = n as f64 - j as f64 * alpha;
                    if w > 0.0 {
                        w.ln() + row[j - 1]
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    f64::NEG_INFINITY
                };
                let shift = if j >= 2 { ln_alpha + row[j - 2] } else { f64::NEG_INFINITY };
                row[j - 1] = ln_add(keep, shift);
            }
        }
        if row.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::Capacity { n: order, alpha });
        }
        Ok(DerivativeTable {
            order,
            alpha,
            ln_coefficients: row,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ln a_{n,j}` for `j = 1..=n`, `-∞` for vanishing coefficients.
    pub fn ln_coefficients(&self) -> &[f64] {
        &self.ln_coefficients
    }

    /// `a_{n,j}`, zero outside `1 ≤ j ≤ n`.
    pub fn coefficient(&self, j: usize) -> f64 {
        if j == 0 || j > self.order {
            0.0
        } else {
            self.ln_coefficients[j - 1].exp()
        }
    }

    /// `ln D_n(Δ)` from `ln Δ`.
    pub fn ln_eval(&self, ln_delta: f64) -> Result<f64> {
        let head = -(self.alpha * ln_delta).exp();
        if self.order == 0 {
            return Ok(head);
        }
        let n = self.order as f64;
        let terms: Vec<f64> = self
            .ln_coefficients
            .iter()
            .enumerate()
            .map(|(i, &la)| la + ((i + 1) as f64 * self.alpha - n) * ln_delta)
            .collect();
        let value = head + log_sum_exp(&terms);
        if value.is_nan() || value == f64::INFINITY {
            return Err(Error::Capacity {
                n: self.order,
                alpha: self.alpha,
            });
        }
        Ok(value)
    }
}

/// `ln D_n(Δ)`, the log of `(-1)^n dⁿ/dΔⁿ e^{-Δ^α}`.
pub fn ln_stable_derivative(n: usize, alpha: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be finite and positive",
        });
    }
    DerivativeTable::new(n, alpha)?.ln_eval(delta.ln())
}

/// `D_n(Δ) = E[S^n e^{-SΔ}]`; may underflow to zero where the log does not.
pub fn stable_derivative(n: usize, alpha: f64, delta: f64) -> Result<f64> {
    ln_stable_derivative(n, alpha, delta).map(f64::exp)
}

/// Location, scale and stable index of the Gumbel random-effects model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReParams {
    pub mu: f64,
    pub sigma: f64,
    pub alpha: f64,
}

impl ReParams {
    pub fn new(mu: f64, sigma: f64, alpha: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        Ok(ReParams { mu, sigma, alpha })
    }
}

/// GEV random-effects parameters; `gamma` is the conditional shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevReParams {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub alpha: f64,
}

impl GevReParams {
    pub fn new(mu: f64, sigma: f64, gamma: f64, alpha: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if !gamma.is_finite() || gamma == 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must be finite and nonzero",
            });
        }
        Ok(GevReParams { mu, sigma, gamma, alpha })
    }
}

fn group_loglik_with(table: &DerivativeTable, p: &ReParams, group: &[f64]) -> Result<f64> {
    let scaled: Vec<f64> = group.iter().map(|&x| (x - p.mu) / p.sigma).collect();
    let ln_w: Vec<f64> = scaled.iter().map(|y| -y).collect();
    let ln_delta = log_sum_exp(&ln_w);
    let n = group.len() as f64;
    Ok(-n * p.sigma.ln() - compensated_sum(scaled) + table.ln_eval(ln_delta)?)
}

fn check_group(group: &[f64]) -> Result<()> {
    if group.is_empty() {
        return Err(Error::InsufficientData("empty group"));
    }
    if let Some(&x) = group.iter().find(|x| !x.is_finite()) {
        return Err(Error::SupportViolation { value: x });
    }
    Ok(())
}

/// Log joint density of one group:
/// `-n ln σ - Σ (x_j-μ)/σ + ln D_n(Σ e^{-(x_j-μ)/σ})`.
pub fn re_group_loglik(params: &ReParams, group: &[f64]) -> Result<f64> {
    check_group(group)?;
    let table = DerivativeTable::new(group.len(), params.alpha)?;
    group_loglik_with(&table, params, group)
}

/// Sum of the group log-likelihoods, in the given group order.
pub fn re_total_loglik<G: AsRef<[f64]>>(params: &ReParams, groups: &[G]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::InsufficientData("no groups"));
    }
    let mut tables: Vec<Option<DerivativeTable>> = Vec::new();
    let mut total = Vec::with_capacity(groups.len());
    for g in groups {
        let g = g.as_ref();
        check_group(g)?;
        let n = g.len();
        if tables.len() <= n {
            tables.resize(n + 1, None);
        }
        let table = match &mut tables[n] {
            Some(t) => t,
            slot => slot.insert(DerivativeTable::new(n, params.alpha)?),
        };
        total.push(group_loglik_with(table, params, g)?);
    }
    Ok(compensated_sum(total))
}

/// Log joint density of one group with GEV conditional margins:
/// `Σ [(1+γ) ln z_j - ln σ] + ln D_n(Σ z_j)`, `z_j = (1+γ(x_j-μ)/σ)^{-1/γ}`.
pub fn gev_re_group_loglik(params: &GevReParams, group: &[f64]) -> Result<f64> {
    check_group(group)?;
    let mut ln_z = Vec::with_capacity(group.len());
    for &x in group {
        let t = 1.0 + params.gamma * (x - params.mu) / params.sigma;
        if !(t > 0.0) {
            return Err(Error::SupportViolation { value: x });
        }
        ln_z.push(-t.ln() / params.gamma);
    }
    let table = DerivativeTable::new(group.len(), params.alpha)?;
    let ln_sigma = params.sigma.ln();
    let jacobian = compensated_sum(ln_z.iter().map(|lz| (1.0 + params.gamma) * lz - ln_sigma));
    Ok(jacobian + table.ln_eval(log_sum_exp(&ln_z))?)
}

/// Hidden MA(1) parameters for one series: `H_t = S_t + b S_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ma1Params {
    pub mu: f64,
    pub b: f64,
    pub sigma: f64,
    pub alpha: f64,
}

impl Ma1Params {
    pub fn new(mu: f64, b: f64, sigma: f64, alpha: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                reason: "must be finite and nonnegative",
            });
        }
        if alpha == 1.0 && b > 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be below 1 when b > 0",
            });
        }
        Ok(Ma1Params { mu, b, sigma, alpha })
    }
}

/// Working sequences of the MA(1) recursion, all in log form.
///
/// `u_1 = b z_1`, `u_t = z_{t-1} + b z_t`, `u_{n+1} = z_n`, and
/// `Q_0 = 1`, `Q_i = -α(α-1) b u_i^{α-2} Q_{i-2} + α(b u_i^{α-1} + u_{i+1}^{α-1}) Q_{i-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaWorkspace {
    pub ln_z: Vec<f64>,
    pub ln_u: Vec<f64>,
    pub q: Vec<SignedLog>,
}

impl MaWorkspace {
    pub fn build(params: &Ma1Params, series: &[f64]) -> Result<Self> {
        check_group(series)?;
        let n = series.len();
        let alpha = params.alpha;
        let ln_b = if params.b > 0.0 { params.b.ln() } else { f64::NEG_INFINITY };
        let ln_z: Vec<f64> = series.iter().map(|&x| -(x - params.mu) / params.sigma).collect();

        let mut ln_u = Vec::with_capacity(n + 1);
        ln_u.push(ln_b + ln_z[0]);
        for t in 1..n {
            ln_u.push(ln_add(ln_z[t - 1], ln_b + ln_z[t]));
        }
        ln_u.push(ln_z[n - 1]);
        // u_t for t >= 2 contains z_{t-1} > 0, so only u_1 can vanish (b = 0)
        if ln_u[1..].iter().any(|v| !v.is_finite()) {
            return Err(Error::SupportViolation { value: f64::NAN });
        }

        let ln_alpha = alpha.ln();
        // b u_i^{α-1}, skipped when b = 0
        let own = |i: usize| {
            if params.b > 0.0 {
                SignedLog::from_ln(ln_b + (alpha - 1.0) * ln_u[i - 1], 1)
            } else {
                SignedLog::ZERO
            }
        };
        let next = |i: usize| SignedLog::from_ln((alpha - 1.0) * ln_u[i], 1);
        let coef = SignedLog::from_ln(ln_alpha, 1);
        let curvature = if params.b > 0.0 && alpha < 1.0 {
            // -α(α-1) > 0
            SignedLog::from_ln(ln_alpha + (1.0 - alpha).ln() + ln_b, 1)
        } else {
            SignedLog::ZERO
        };

        let mut q = Vec::with_capacity(n + 1);
        q.push(SignedLog::ONE);
        for i in 1..=n {
            let mut value = q[i - 1] * coef * (own(i) + next(i));
            if i >= 2 && !curvature.is_zero() {
                value = value + q[i - 2] * curvature * SignedLog::from_ln((alpha - 2.0) * ln_u[i - 1], 1);
            }
            q.push(value);
        }
        Ok(MaWorkspace { ln_z, ln_u, q })
    }
}

/// Log joint density of a hidden MA(1) series:
/// `ln Q_n - Σ_{t=1}^{n+1} u_t^α - Σ_t (x_t-μ)/σ - n ln σ`.
pub fn ma1_loglik(params: &Ma1Params, series: &[f64]) -> Result<f64> {
    if params.alpha == 1.0 && params.b > 0.0 {
        return Err(Error::DegenerateLaw("MA(1) likelihood with b > 0"));
    }
    let ws = MaWorkspace::build(params, series)?;
    let q_n = ws.q[series.len()];
    if q_n.sign <= 0 || !q_n.ln_abs.is_finite() {
        return Err(Error::NonConvergence(format!(
            "MA(1) recursion produced a non-positive value at n = {}",
            series.len()
        )));
    }
    let alpha = params.alpha;
    let exponent = compensated_sum(ws.ln_u.iter().map(|&lu| (alpha * lu).exp()));
    let n = series.len() as f64;
    Ok(q_n.ln_abs - exponent + compensated_sum(ws.ln_z.iter().copied()) - n * params.sigma.ln())
}

//! Positive-stable mixtures of Gumbel margins.
//!
//! A [`MixtureSpec`] describes `X_t = μ_t + σ_t log(Σ_a c_{t,a} S_a) + G_t`
//! with i.i.d. positive stable `S_a` (index α) and independent
//! `G_t ~ Gumbel(0, σ_t)`. Its joint distribution function is
//!
//! ```text
//! P(X_t ≤ x_t, t ∈ T) = Π_a exp(-(Σ_t c_{t,a} exp(-(x_t-μ_t)/σ_t))^α),
//! ```
//!
//! a multivariate extreme value law. The concrete model families in
//! [`models`] are all expressed through this object, except the two-layer
//! hierarchical model which has its own evaluator.

pub mod gev;
pub mod models;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_scale, Error, Result};
use crate::evd::GumbelParams;
use crate::numeric::log_sum_exp;
use crate::rng::{seeded_rng, substream_seed, SimRng};
use crate::stable::StableLaw;

pub use gev::{gev_joint_cdf, gev_simulate, gev_translate, GevMixtureSpec};
pub use models::{
    hierarchical_cdf, HiddenArSpec, HiddenMaSpec, HierarchicalSpec, Neighborhood, RandomEffectsSpec, SpatialMaSpec,
};

/// A model whose joint distribution function can be evaluated and which can
/// be simulated exactly.
pub trait ExtremeModel {
    /// Number of coordinates of one replicate.
    fn dim(&self) -> usize;

    /// Log of the joint distribution function. `+∞` coordinates are
    /// marginalized out; `-∞` gives `-∞`.
    fn ln_joint_cdf(&self, x: &[f64]) -> Result<f64>;

    fn joint_cdf(&self, x: &[f64]) -> Result<f64> {
        self.ln_joint_cdf(x).map(f64::exp)
    }

    /// One exact draw of the whole vector.
    fn sample_with(&self, rng: &mut SimRng) -> Vec<f64>;

    /// `n` replicates; replicate `r` uses its own sub-stream of `seed`, so
    /// any partition of the replicates into batches gives identical output.
    fn simulate(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|r| {
                let mut rng = seeded_rng(substream_seed(seed, r as u64));
                self.sample_with(&mut rng)
            })
            .collect()
    }
}

pub fn simulate<M: ExtremeModel + ?Sized>(model: &M, n: usize, seed: u64) -> Vec<Vec<f64>> {
    model.simulate(n, seed)
}

/// Nonzero coefficient of row `t`: mixing index and `ln c_{t,a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Entry {
    a: usize,
    ln_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    alpha: f64,
    mixing_dim: usize,
    rows: Vec<Vec<Entry>>,
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl MixtureSpec {
    /// Builds a spec from a dense `p × q` coefficient matrix.
    pub fn new(alpha: f64, coefficients: &[Vec<f64>], mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let q = coefficients.first().map_or(0, Vec::len);
        if coefficients.iter().any(|row| row.len() != q) {
            return Err(Error::InvalidSpec("coefficient rows differ in length".into()));
        }
        let rows = coefficients
            .iter()
            .map(|row| row.iter().enumerate().map(|(a, &c)| (a, c)).collect())
            .collect();
        Self::from_sparse(alpha, q, rows, mu, sigma)
    }

    /// Builds a spec from per-row `(mixing index, coefficient)` lists.
    pub fn from_sparse(
        alpha: f64,
        mixing_dim: usize,
        rows: Vec<Vec<(usize, f64)>>,
        mu: Vec<f64>,
        sigma: Vec<f64>,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let p = rows.len();
        if p == 0 {
            return Err(Error::InvalidSpec("index set T is empty".into()));
        }
        if mu.len() != p || sigma.len() != p {
            return Err(Error::InvalidSpec(format!(
                "{p} rows but {} locations and {} scales",
                mu.len(),
                sigma.len()
            )));
        }
        for &m in &mu {
            if !m.is_finite() {
                return Err(Error::InvalidSpec(format!("non-finite location {m}")));
            }
        }
        for &s in &sigma {
            check_scale("sigma", s)?;
        }
        let mut out = Vec::with_capacity(p);
        for (t, row) in rows.into_iter().enumerate() {
            let mut entries = Vec::new();
            for (a, c) in row {
                if a >= mixing_dim {
                    return Err(Error::InvalidSpec(format!("mixing index {a} out of range at row {t}")));
                }
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(Error::InvalidSpec(format!("coefficient c[{t}][{a}] = {c} must be finite and nonnegative")));
                }
                if c > 0.0 {
                    entries.push(Entry { a, ln_c: c.ln() });
                }
            }
            if entries.is_empty() {
                return Err(Error::InvalidSpec(format!("row {t} has no positive coefficient")));
            }
            entries.sort_by_key(|e| e.a);
            out.push(entries);
        }
        Ok(MixtureSpec {
            alpha,
            mixing_dim,
            rows: out,
            mu,
            sigma,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mixing_dim(&self) -> usize {
        self.mixing_dim
    }

    pub fn locations(&self) -> &[f64] {
        &self.mu
    }

    pub fn scales(&self) -> &[f64] {
        &self.sigma
    }

    pub fn coefficient(&self, t: usize, a: usize) -> f64 {
        self.rows[t]
            .iter()
            .find(|e| e.a == a)
            .map_or(0.0, |e| e.ln_c.exp())
    }

    /// Dense copy of the coefficient matrix.
    pub fn coefficients(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; self.mixing_dim];
                for e in row {
                    dense[e.a] = e.ln_c.exp();
                }
                dense
            })
            .collect()
    }

    /// Sub-model on the coordinates `keep` (in that order).
    pub fn marginal(&self, keep: &[usize]) -> Result<MixtureSpec> {
        let mut rows = Vec::with_capacity(keep.len());
        for &t in keep {
            let row = self
                .rows
                .get(t)
                .ok_or_else(|| Error::InvalidSpec(format!("index {t} out of range")))?;
            rows.push(row.clone());
        }
        Ok(MixtureSpec {
            alpha: self.alpha,
            mixing_dim: self.mixing_dim,
            rows,
            mu: keep.iter().map(|&t| self.mu[t]).collect(),
            sigma: keep.iter().map(|&t| self.sigma[t]).collect(),
        })
    }

    /// `-Σ_a exp(α · ln s_a)` with `ln s_a = logsumexp_t(ln c_{t,a} + ln z_t)`.
    fn ln_cdf_from_ln_weights(&self, ln_z: &[f64]) -> f64 {
        let mut per_a: Vec<Vec<f64>> = vec![Vec::new(); self.mixing_dim];
        for (row, &lz) in self.rows.iter().zip(ln_z) {
            if lz == f64::NEG_INFINITY {
                continue;
            }
            if lz == f64::INFINITY {
                return f64::NEG_INFINITY;
            }
            for e in row {
                per_a[e.a].push(e.ln_c + lz);
            }
        }
        let terms: Vec<f64> = per_a
            .iter()
            .filter(|v| !v.is_empty())
            .map(|v| self.alpha * log_sum_exp(v))
            .collect();
        if terms.is_empty() {
            return 0.0;
        }
        -log_sum_exp(&terms).exp()
    }

    /// The common scale, or an error if the scales of `subset` differ.
    fn common_scale(&self, subset: &[usize]) -> Result<f64> {
        let s0 = self.sigma[subset[0]];
        if subset.iter().any(|&t| self.sigma[t] != s0) {
            return Err(Error::InvalidSpec(
                "maxima over subsets require equal scale parameters".into(),
            ));
        }
        Ok(s0)
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::InvalidSpec("subset is empty".into()));
        }
        if let Some(&t) = subset.iter().find(|&&t| t >= self.rows.len()) {
            return Err(Error::InvalidSpec(format!("index {t} out of range")));
        }
        Ok(())
    }

    /// `ln c_{T1,a} = ln Σ_{t∈T1} c_{t,a} e^{μ_t/σ}` for every `a` (−∞ if absent).
    fn ln_subset_coefficients(&self, subset: &[usize], sigma: f64) -> Vec<f64> {
        let mut per_a: Vec<Vec<f64>> = vec![Vec::new(); self.mixing_dim];
        let mut seen = vec![false; self.rows.len()];
        for &t in subset {
            if std::mem::replace(&mut seen[t], true) {
                continue;
            }
            for e in &self.rows[t] {
                per_a[e.a].push(e.ln_c + self.mu[t] / sigma);
            }
        }
        per_a.iter().map(|v| log_sum_exp(v)).collect()
    }

    /// Law of `max_{t ∈ subset} X_t` (requires equal scales on the subset):
    /// Gumbel((σ/α) ln Σ_a (Σ_{t} c_{t,a} e^{μ_t/σ})^α, σ/α).
    pub fn max_distribution(&self, subset: &[usize]) -> Result<GumbelParams> {
        self.check_subset(subset)?;
        let sigma = self.common_scale(subset)?;
        let ln_c = self.ln_subset_coefficients(subset, sigma);
        let terms: Vec<f64> = ln_c
            .iter()
            .filter(|v| v.is_finite())
            .map(|v| self.alpha * v)
            .collect();
        let scale = sigma / self.alpha;
        GumbelParams::new(scale * log_sum_exp(&terms), scale)
    }

    /// `P(max_{T1} X ≤ x1, max_{T2} X ≤ x2)` for disjoint subsets.
    pub fn joint_max_cdf(&self, t1: &[usize], t2: &[usize], x1: f64, x2: f64) -> Result<f64> {
        self.check_subset(t1)?;
        self.check_subset(t2)?;
        if t1.iter().any(|t| t2.contains(t)) {
            return Err(Error::InvalidSpec("subsets overlap".into()));
        }
        let both: Vec<usize> = t1.iter().chain(t2).copied().collect();
        let sigma = self.common_scale(&both)?;
        if x1.is_nan() || x2.is_nan() {
            return Err(Error::InvalidSpec("NaN threshold".into()));
        }
        let c1 = self.ln_subset_coefficients(t1, sigma);
        let c2 = self.ln_subset_coefficients(t2, sigma);
        let mut terms = Vec::new();
        for (l1, l2) in c1.iter().zip(&c2) {
            let parts = [l1 - x1 / sigma, l2 - x2 / sigma];
            let ls = log_sum_exp(&parts);
            if ls == f64::INFINITY {
                return Ok(0.0);
            }
            if ls.is_finite() {
                terms.push(self.alpha * ls);
            }
        }
        if terms.is_empty() {
            return Ok(1.0);
        }
        Ok((-log_sum_exp(&terms).exp()).exp())
    }

    /// Draws `ln S_a` for every mixing index.
    fn sample_ln_mixing<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let law = StableLaw::new(self.alpha).expect("validated alpha");
        (0..self.mixing_dim).map(|_| law.sample_ln(rng)).collect()
    }

    /// `ln H_t = ln Σ_a c_{t,a} S_a` given `ln S_a`.
    fn ln_directing(&self, ln_s: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                let parts: Vec<f64> = row.iter().map(|e| e.ln_c + ln_s[e.a]).collect();
                log_sum_exp(&parts)
            })
            .collect()
    }
}

impl ExtremeModel for MixtureSpec {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn ln_joint_cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.rows.len() {
            return Err(Error::InvalidSpec(format!(
                "expected {} coordinates, got {}",
                self.rows.len(),
                x.len()
            )));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidSpec("NaN coordinate".into()));
        }
        let ln_z: Vec<f64> = x
            .iter()
            .zip(self.mu.iter().zip(&self.sigma))
            .map(|(&xt, (&m, &s))| -(xt - m) / s)
            .collect();
        Ok(self.ln_cdf_from_ln_weights(&ln_z))
    }

    fn sample_with(&self, rng: &mut SimRng) -> Vec<f64> {
        let ln_s = self.sample_ln_mixing(rng);
        let ln_h = self.ln_directing(&ln_s);
        ln_h.iter()
            .zip(self.mu.iter().zip(&self.sigma))
            .map(|(&lh, (&m, &s))| {
                let noise = GumbelParams { mu: 0.0, sigma: s }.sample(rng);
                m + s * lh + noise
            })
            .collect()
    }
}

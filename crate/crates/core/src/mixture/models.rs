//! Concrete model families and their coefficient matrices.

use serde::{Deserialize, Serialize};

use super::{ExtremeModel, MixtureSpec};
use crate::error::{check_alpha, check_finite, check_scale, Error, Result};
use crate::evd::GumbelParams;
use crate::numeric::log_sum_exp;
use crate::rng::SimRng;
use crate::stable::StableLaw;

/// One-way random effects: `X_{ij} = μ + τ_i + G_{ij}` with
/// `τ_i ~ ExpS(α, 0, σ)` and `G_{ij} ~ Gumbel(0, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomEffectsSpec {
    pub mu: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub group_sizes: Vec<usize>,
}

impl RandomEffectsSpec {
    pub fn new(mu: f64, sigma: f64, alpha: f64, group_sizes: Vec<usize>) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if group_sizes.is_empty() || group_sizes.contains(&0) {
            return Err(Error::InvalidSpec("need at least one group and nonempty groups".into()));
        }
        Ok(RandomEffectsSpec {
            mu,
            sigma,
            alpha,
            group_sizes,
        })
    }

    /// Coordinates ordered group by group; mixing index = group.
    pub fn to_mixture(&self) -> MixtureSpec {
        let rows: Vec<Vec<(usize, f64)>> = self
            .group_sizes
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(vec![(i, 1.0)], n))
            .collect();
        let p = rows.len();
        MixtureSpec::from_sparse(self.alpha, self.group_sizes.len(), rows, vec![self.mu; p], vec![self.sigma; p])
            .expect("validated random-effects spec")
    }

    /// Coordinate ranges of the groups in the flattened order.
    pub fn group_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.group_sizes
            .iter()
            .map(|&n| {
                let r = start..start + n;
                start += n;
                r
            })
            .collect()
    }
}

/// Hidden MA(q): `H_t = b_0 S_t + … + b_q S_{t-q}`, `X_t = μ_t + σ log H_t + G_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenMaSpec {
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub alpha: f64,
    pub b: Vec<f64>,
}

impl HiddenMaSpec {
    pub fn new(mu: Vec<f64>, sigma: f64, alpha: f64, b: Vec<f64>) -> Result<Self> {
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if mu.is_empty() {
            return Err(Error::InvalidSpec("series length must be at least one".into()));
        }
        for &m in &mu {
            check_finite("mu", m)?;
        }
        if b.is_empty() || b.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || b.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidSpec("MA coefficients must be nonnegative with one positive".into()));
        }
        Ok(HiddenMaSpec { mu, sigma, alpha, b })
    }

    /// MA(1) with `b_0 = 1`, `b_1 = b` and constant location.
    pub fn ma1(mu: f64, b: f64, sigma: f64, alpha: f64, n: usize) -> Result<Self> {
        Self::new(vec![mu; n], sigma, alpha, vec![1.0, b])
    }

    /// Mixing index `k` stands for innovation `S_{k+1-q}`.
    pub fn to_mixture(&self) -> MixtureSpec {
        let n = self.mu.len();
        let q = self.b.len() - 1;
        let rows = (0..n)
            .map(|t| {
                // time t+1 sees S_{t+1-l} for lag l, i.e. index k = t + q - l
                (0..=q)
                    .filter(|&l| self.b[l] > 0.0)
                    .map(|l| (t + q - l, self.b[l]))
                    .collect()
            })
            .collect();
        MixtureSpec::from_sparse(self.alpha, n + q, rows, self.mu.clone(), vec![self.sigma; n])
            .expect("validated MA spec")
    }
}

/// Hidden AR(1): `H_t = ρ H_{t-1} + S_t` started in stationarity, t = 0..n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenArSpec {
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub alpha: f64,
    pub rho: f64,
}

impl HiddenArSpec {
    pub fn new(mu: Vec<f64>, sigma: f64, alpha: f64, rho: f64) -> Result<Self> {
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if mu.is_empty() {
            return Err(Error::InvalidSpec("series length must be at least one".into()));
        }
        for &m in &mu {
            check_finite("mu", m)?;
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(HiddenArSpec { mu, sigma, alpha, rho })
    }

    /// `c_{t,0} = ρ^t (1-ρ^α)^{-1/α}`, `c_{t,a} = ρ^{t-a}` for `1 ≤ a ≤ t`.
    pub fn to_mixture(&self) -> MixtureSpec {
        let len = self.mu.len();
        let start = (1.0 - self.rho.powf(self.alpha)).powf(-1.0 / self.alpha);
        let rows = (0..len)
            .map(|t| {
                let mut row = vec![(0, self.rho.powi(t as i32) * start)];
                row.extend((1..=t).map(|a| (a, self.rho.powi((t - a) as i32))));
                row
            })
            .collect();
        MixtureSpec::from_sparse(self.alpha, len, rows, self.mu.clone(), vec![self.sigma; len])
            .expect("validated AR spec")
    }
}

/// Translation-invariant neighborhood given by offsets `(di, dj)`; it must
/// contain `(0, 0)` and be symmetric under negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighborhood {
    offsets: Vec<(i64, i64)>,
}

impl Neighborhood {
    pub fn new(offsets: Vec<(i64, i64)>) -> Result<Self> {
        if !offsets.contains(&(0, 0)) {
            return Err(Error::InvalidSpec("neighborhood must contain the point itself".into()));
        }
        if offsets.iter().any(|&(i, j)| !offsets.contains(&(-i, -j))) {
            return Err(Error::InvalidSpec("neighborhood must be symmetric".into()));
        }
        let mut offsets = offsets;
        offsets.sort_unstable();
        offsets.dedup();
        Ok(Neighborhood { offsets })
    }

    /// The point and its four nearest lattice neighbours.
    pub fn cross() -> Self {
        Neighborhood {
            offsets: vec![(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)],
        }
    }

    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }
}

impl Default for Neighborhood {
    fn default() -> Self {
        Self::cross()
    }
}

/// Spatial hidden MA on an `n × n` grid: `H_{ij} = δ Σ_{(k,l) ∈ n_(i,j)} S_{kl}`.
/// `mu` is row-major of length `n²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialMaSpec {
    pub n: usize,
    pub delta: f64,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub alpha: f64,
    pub neighborhood: Neighborhood,
}

impl SpatialMaSpec {
    pub fn new(n: usize, delta: f64, mu: Vec<f64>, sigma: f64, alpha: f64, neighborhood: Neighborhood) -> Result<Self> {
        check_scale("delta", delta)?;
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if n == 0 || mu.len() != n * n {
            return Err(Error::InvalidSpec(format!("grid size {n} needs {} locations", n * n)));
        }
        for &m in &mu {
            check_finite("mu", m)?;
        }
        Ok(SpatialMaSpec {
            n,
            delta,
            mu,
            sigma,
            alpha,
            neighborhood,
        })
    }

    /// Mixing indices are the lattice points whose neighborhoods meet the grid.
    pub fn to_mixture(&self) -> MixtureSpec {
        let n = self.n as i64;
        let mut sources: Vec<(i64, i64)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for &(di, dj) in self.neighborhood.offsets() {
                    sources.push((i + di, j + dj));
                }
            }
        }
        sources.sort_unstable();
        sources.dedup();
        let rows = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                // (i,j) ∈ n_(k,l) ⇔ (k,l) = (i,j) - offset, by symmetry
                let mut row: Vec<(usize, f64)> = self
                    .neighborhood
                    .offsets()
                    .iter()
                    .map(|&(di, dj)| {
                        let a = sources.binary_search(&(i - di, j - dj)).expect("source present");
                        (a, self.delta)
                    })
                    .collect();
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        MixtureSpec::from_sparse(self.alpha, sources.len(), rows, self.mu.clone(), vec![self.sigma; self.mu.len()])
            .expect("validated spatial spec")
    }
}

macro_rules! delegate_to_mixture {
    ($($ty:ty),*) => {$(
        impl ExtremeModel for $ty {
            fn dim(&self) -> usize {
                self.to_mixture().dim()
            }

            fn ln_joint_cdf(&self, x: &[f64]) -> Result<f64> {
                self.to_mixture().ln_joint_cdf(x)
            }

            fn sample_with(&self, rng: &mut SimRng) -> Vec<f64> {
                self.to_mixture().sample_with(rng)
            }

            fn simulate(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
                self.to_mixture().simulate(n, seed)
            }
        }
    )*};
}

delegate_to_mixture!(RandomEffectsSpec, HiddenMaSpec, HiddenArSpec, SpatialMaSpec);

/// Two-layer (nested logistic) model
/// `X_{ijk} = μ + τ_i + η_{ij} + G_{ijk}` with joint distribution function
/// `Π_i exp[-{Σ_j (Σ_k e^{-(x_{ijk}-μ)/σ})^α}^β]`.
///
/// `shape[i][j]` is the number of observations `r_{ij}` in cell `(i, j)`;
/// coordinates are flattened in `(i, j, k)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalSpec {
    pub mu: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub shape: Vec<Vec<usize>>,
}

impl HierarchicalSpec {
    pub fn new(mu: f64, sigma: f64, alpha: f64, beta: f64, shape: Vec<Vec<usize>>) -> Result<Self> {
        check_finite("mu", mu)?;
        check_scale("sigma", sigma)?;
        check_alpha(alpha)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must lie in (0, 1]",
            });
        }
        if shape.is_empty() || shape.iter().any(|row| row.is_empty() || row.contains(&0)) {
            return Err(Error::InvalidSpec("every outer and inner group must be nonempty".into()));
        }
        Ok(HierarchicalSpec {
            mu,
            sigma,
            alpha,
            beta,
            shape,
        })
    }
}

impl ExtremeModel for HierarchicalSpec {
    fn dim(&self) -> usize {
        self.shape.iter().flatten().sum()
    }

    fn ln_joint_cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidSpec(format!("expected {} coordinates, got {}", self.dim(), x.len())));
        }
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidSpec("NaN coordinate".into()));
        }
        let mut pos = 0;
        let mut outer_terms = Vec::with_capacity(self.shape.len());
        for row in &self.shape {
            let mut inner_terms = Vec::with_capacity(row.len());
            for &r in row {
                let ln_z: Vec<f64> = x[pos..pos + r].iter().map(|&v| -(v - self.mu) / self.sigma).collect();
                pos += r;
                let ls = log_sum_exp(&ln_z);
                if ls == f64::INFINITY {
                    return Ok(f64::NEG_INFINITY);
                }
                inner_terms.push(self.alpha * ls);
            }
            let ls = log_sum_exp(&inner_terms);
            if ls > f64::NEG_INFINITY {
                outer_terms.push(self.beta * ls);
            }
        }
        if outer_terms.is_empty() {
            return Ok(0.0);
        }
        Ok(-log_sum_exp(&outer_terms).exp())
    }

    /// Shift `σ ln S_{ij} + (σ/α) ln S_i` with `S_i` of index β and `S_{ij}`
    /// of index α, plus Gumbel(0, σ) noise.
    fn sample_with(&self, rng: &mut SimRng) -> Vec<f64> {
        let outer = StableLaw::new(self.beta).expect("validated beta");
        let inner = StableLaw::new(self.alpha).expect("validated alpha");
        let noise = GumbelParams {
            mu: 0.0,
            sigma: self.sigma,
        };
        let mut out = Vec::with_capacity(self.dim());
        for row in &self.shape {
            let ln_si = outer.sample_ln(rng);
            for &r in row {
                let shift = self.sigma * inner.sample_ln(rng) + self.sigma / self.alpha * ln_si;
                for _ in 0..r {
                    out.push(self.mu + shift + noise.sample(rng));
                }
            }
        }
        out
    }
}

/// Joint distribution function of the hierarchical model.
pub fn hierarchical_cdf(spec: &HierarchicalSpec, x: &[f64]) -> Result<f64> {
    spec.joint_cdf(x)
}

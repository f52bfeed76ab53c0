//! Constant-eigenvalue toy model: intersection numbers, a quadrature-sampled
//! `d_0` field and the subsolution slack.

use serde::{Deserialize, Serialize};

use crate::binom::binomial;
use crate::error::{GiskError, Result};
use crate::stability::{phi, subsets, cone_membership};
use crate::symmfunc::{elementary, f_partial_unchecked, GiskCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D0Sample {
    #[serde(rename = "v")]
    pub value: f64,
    #[serde(rename = "w")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyModel {
    pub n: usize,
    pub mu: Vec<f64>,
    #[serde(rename = "d0")]
    pub d0_samples: Vec<D0Sample>,
    #[serde(rename = "volume", default = "unit_volume")]
    pub total_volume: f64,
}

fn unit_volume() -> f64 {
    1.0
}

impl ToyModel {
    pub fn new(n: usize, mu: Vec<f64>, d0_samples: Vec<D0Sample>, total_volume: f64) -> Result<Self> {
        let m = ToyModel {
            n,
            mu,
            d0_samples,
            total_volume,
        };
        m.validate()?;
        Ok(m)
    }

    /// Model with a constant field `d_0 ≡ value`.
    pub fn constant(n: usize, mu: Vec<f64>, value: f64) -> Result<Self> {
        ToyModel::new(n, mu, vec![D0Sample { value, weight: 1.0 }], 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(GiskError::DegreeTooLow { min: 2, got: self.n });
        }
        if self.mu.len() != self.n {
            return Err(GiskError::DimensionMismatch {
                expected: self.n,
                got: self.mu.len(),
            });
        }
        if self.mu.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(GiskError::InvalidModel("mu entries must be positive".into()));
        }
        if !(self.total_volume > 0.0) {
            return Err(GiskError::InvalidModel("volume must be positive".into()));
        }
        if self.d0_samples.is_empty() {
            return Err(GiskError::InvalidModel("d0 field has no samples".into()));
        }
        if self
            .d0_samples
            .iter()
            .any(|s| !(s.weight > 0.0) || !s.value.is_finite())
        {
            return Err(GiskError::InvalidModel("weights must be positive".into()));
        }
        let total: f64 = self.d0_samples.iter().map(|s| s.weight).sum();
        if (total - self.total_volume).abs() > 1e-12 * self.total_volume.max(1.0) {
            return Err(GiskError::InvalidModel(format!(
                "weights sum to {total}, volume is {}",
                self.total_volume
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionNumbers {
    /// `Ω_0, …, Ω_n`.
    pub omega: Vec<f64>,
}

impl IntersectionNumbers {
    pub fn n(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn volume(&self) -> f64 {
        self.omega[self.n()]
    }
}

/// `Ω_i = V σ_{n−i}(μ) / C(n, n−i)`.
pub fn intersection_numbers(m: &ToyModel) -> IntersectionNumbers {
    let e = elementary(m.mu.iter().copied());
    let n = m.n;
    IntersectionNumbers {
        omega: (0..=n)
            .map(|i| m.total_volume * e[n - i] / binomial(n, n - i))
            .collect(),
    }
}

pub fn mean_d0(m: &ToyModel) -> f64 {
    m.d0_samples.iter().map(|s| s.value * s.weight).sum::<f64>() / m.total_volume
}

/// `Ω_0 − Σ_{k=1}^{n−2} d_k C(n,k) Ω_{n−k}`.
pub fn upper_pairing(c: &GiskCoeffs, omega: &IntersectionNumbers) -> f64 {
    let n = c.n;
    omega.omega[0]
        - (1..n - 1)
            .map(|k| c.coeff(k) * binomial(n, k) * omega.omega[n - k])
            .sum::<f64>()
}

fn check_model_dim(m: &ToyModel, c: &GiskCoeffs) -> Result<()> {
    if m.n != c.n {
        return Err(GiskError::DimensionMismatch {
            expected: m.n,
            got: c.n,
        });
    }
    Ok(())
}

pub fn integrability_residual(m: &ToyModel, c: &GiskCoeffs) -> Result<f64> {
    check_model_dim(m, c)?;
    let omega = intersection_numbers(m);
    Ok(upper_pairing(c, &omega) - mean_d0(m) * omega.volume())
}

/// `Ω_0 − Σ_{k=l}^{n−2} d_k C(n−l,k−l) Ω_{n−k}` for `1 ≤ l ≤ n−1`.
pub fn level_pairing(c: &GiskCoeffs, omega: &IntersectionNumbers, l: usize) -> f64 {
    let n = c.n;
    omega.omega[0]
        - (l..n - 1)
            .map(|k| c.coeff(k) * binomial(n - l, k - l) * omega.omega[n - k])
            .sum::<f64>()
}

/// The same quantity assembled from the cone partials at `μ`:
/// `V / C(n,l) · Σ_{|S|=l} (Π_{i∈S} μ_i) f_S(μ)`.
pub fn level_pairing_from_partials(m: &ToyModel, c: &GiskCoeffs, l: usize) -> f64 {
    let total: f64 = subsets(m.n, l)
        .iter()
        .map(|s| s.iter().map(|&i| m.mu[i]).product::<f64>() * f_partial_unchecked(c, &m.mu, s))
        .sum();
    m.total_volume * total / binomial(m.n, l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionSlack {
    pub kappa: f64,
    pub per_subset_slacks: Vec<f64>,
}

/// Half the largest `κ` keeping `μ − 2κ·1` in the first cone of `c`.
pub fn subsolution_slack(m: &ToyModel, c: &GiskCoeffs) -> Result<SubsolutionSlack> {
    check_model_dim(m, c)?;
    phi(c)?;
    point_subsolution_slack(&m.mu, c)
}

/// Slack at a bare eigenvalue vector; `c` is assumed stable.
pub fn point_subsolution_slack(mu: &[f64], c: &GiskCoeffs) -> Result<SubsolutionSlack> {
    let inside = |kappa: f64| -> Result<bool> {
        let p: Vec<f64> = mu.iter().map(|v| v - 2.0 * kappa).collect();
        cone_membership(c, &p, 1)
    };
    if !inside(0.0)? {
        return Err(GiskError::NotSubsolution);
    }
    let mut lo = 0.0;
    let mut hi = mu.iter().fold(0.0f64, |m, v| m.max(*v)) / 2.0 + 1.0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let per_subset_slacks = (0..c.n).map(|i| f_partial_unchecked(c, mu, &[i])).collect();
    Ok(SubsolutionSlack {
        kappa: lo / 2.0,
        per_subset_slacks,
    })
}

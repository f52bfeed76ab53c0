//! Elementary symmetric polynomials and the multilinear polynomial
//! `f(λ) = λ_1⋯λ_n − Σ_{k≤n−2} d_k σ_k(λ)` with its partials and the
//! normalized quotient `h`.

use serde::{Deserialize, Serialize};

use crate::error::{GiskError, Result};
use crate::tol::EPS_CMP;

/// Eigenvalue vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LambdaPoint {
    pub entries: Vec<f64>,
}

impl LambdaPoint {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(GiskError::DegreeTooLow {
                min: 2,
                got: entries.len(),
            });
        }
        Ok(LambdaPoint { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn sorted_desc(&self) -> LambdaPoint {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| b.total_cmp(a));
        LambdaPoint { entries: e }
    }
}

impl std::ops::Deref for LambdaPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.entries
    }
}

/// Reduced coefficients `(d_{n−2}, …, d_1, d_0)`; the `σ_{n−1}` slot is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiskCoeffs {
    pub n: usize,
    pub d: Vec<f64>,
    /// Set once the strict stability test has passed.
    #[serde(default, skip_serializing)]
    pub verified_stable: bool,
}

impl GiskCoeffs {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(GiskError::DegreeTooLow { min: 2, got: n });
        }
        if d.len() != n - 1 {
            return Err(GiskError::DimensionMismatch {
                expected: n - 1,
                got: d.len(),
            });
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(GiskError::InvalidCoefficients("non-finite entry".into()));
        }
        Ok(GiskCoeffs {
            n,
            d,
            verified_stable: false,
        })
    }

    /// Builds from ascending coefficients `[d_0, d_1, …, d_{n−2}]`.
    pub fn from_ascending(n: usize, asc: &[f64]) -> Result<Self> {
        GiskCoeffs::new(n, asc.iter().rev().copied().collect())
    }

    pub fn zero(n: usize) -> Self {
        GiskCoeffs {
            n,
            d: vec![0.0; n - 1],
            verified_stable: false,
        }
    }

    /// Coefficient of `σ_k`; zero for `k ≥ n − 1`.
    pub fn coeff(&self, k: usize) -> f64 {
        if k + 2 > self.n {
            0.0
        } else {
            self.d[self.n - 2 - k]
        }
    }

    /// `[d_0, d_1, …, d_{n−2}]`.
    pub fn ascending(&self) -> Vec<f64> {
        self.d.iter().rev().copied().collect()
    }

    pub fn scaled(&self, t: f64) -> GiskCoeffs {
        GiskCoeffs {
            n: self.n,
            d: self.d.iter().map(|v| v * t).collect(),
            verified_stable: false,
        }
    }

    /// Magnitude used to scale absolute tolerances.
    pub fn magnitude(&self) -> f64 {
        self.d.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(GiskError::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

/// Unreduced coefficients `(c_{n−1}, …, c_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullCoeffs {
    pub n: usize,
    pub c: Vec<f64>,
}

impl FullCoeffs {
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(GiskError::DegreeTooLow { min: 2, got: n });
        }
        if c.len() != n {
            return Err(GiskError::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        Ok(FullCoeffs { n, c })
    }

    pub fn coeff(&self, k: usize) -> f64 {
        if k >= self.n {
            0.0
        } else {
            self.c[self.n - 1 - k]
        }
    }
}

/// All elementary symmetric polynomials `e_0..e_m` of `values`.
pub fn elementary<I: IntoIterator<Item = f64>>(values: I) -> Vec<f64> {
    let mut e = vec![1.0];
    for x in values {
        e.push(0.0);
        for k in (1..e.len()).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

/// Elementary symmetric polynomials of the entries not flagged in `excluded`.
pub fn elementary_excluding(lambda: &[f64], excluded: &[usize]) -> Vec<f64> {
    elementary(
        lambda
            .iter()
            .enumerate()
            .filter(|(i, _)| !excluded.contains(i))
            .map(|(_, &v)| v),
    )
}

fn check_indices(n: usize, idx: &[usize]) -> Result<()> {
    for (j, &i) in idx.iter().enumerate() {
        if i >= n {
            return Err(GiskError::IndexOutOfRange(format!("index {i} with n = {n}")));
        }
        if idx[..j].contains(&i) {
            return Err(GiskError::IndexOutOfRange(format!("repeated index {i}")));
        }
    }
    Ok(())
}

/// `σ_k` of the entries of `lambda` outside `excluded` (0-based indices).
pub fn sigma(k: usize, lambda: &[f64], excluded: &[usize]) -> Result<f64> {
    check_indices(lambda.len(), excluded)?;
    let e = elementary_excluding(lambda, excluded);
    e.get(k).copied().ok_or_else(|| {
        GiskError::IndexOutOfRange(format!("k = {k} exceeds {} remaining entries", e.len() - 1))
    })
}

/// `λ_1⋯λ_n − Σ_{k=0}^{n−2} d_k σ_k(λ)`.
pub fn f_eval(c: &GiskCoeffs, lambda: &[f64]) -> Result<f64> {
    c.check_dim(lambda.len())?;
    Ok(f_eval_unchecked(c, lambda))
}

pub(crate) fn f_eval_unchecked(c: &GiskCoeffs, lambda: &[f64]) -> f64 {
    let e = elementary(lambda.iter().copied());
    let n = c.n;
    e[n] - (0..n - 1).map(|k| c.coeff(k) * e[k]).sum::<f64>()
}

/// `Σ_{k=l}^{n−2} d_k σ_{k−l}(λ_{;S})` for `|S| = l`.
pub fn tail_sum(c: &GiskCoeffs, lambda: &[f64], excluded: &[usize], l: usize) -> f64 {
    let e = elementary_excluding(lambda, excluded);
    (l..c.n.saturating_sub(1))
        .map(|k| c.coeff(k) * e[k - l])
        .sum()
}

/// The partial derivative of `f` in the variables `indices`.
pub fn f_partial(c: &GiskCoeffs, lambda: &[f64], indices: &[usize]) -> Result<f64> {
    c.check_dim(lambda.len())?;
    check_indices(lambda.len(), indices)?;
    let l = indices.len();
    if l == 0 || l >= c.n {
        return Err(GiskError::IndexOutOfRange(format!(
            "partial order {l} outside 1..{}",
            c.n - 1
        )));
    }
    Ok(f_partial_unchecked(c, lambda, indices))
}

pub(crate) fn f_partial_unchecked(c: &GiskCoeffs, lambda: &[f64], indices: &[usize]) -> f64 {
    let l = indices.len();
    let e = elementary_excluding(lambda, indices);
    let lead = e[c.n - l];
    lead - (l..c.n - 1).map(|k| c.coeff(k) * e[k - l]).sum::<f64>()
}

/// Returns `λ_n` placing `(head, λ_n)` on the level set `f = 0`.
pub fn solve_for_last(c: &GiskCoeffs, head: &[f64]) -> Result<f64> {
    if head.len() + 1 != c.n {
        return Err(GiskError::DimensionMismatch {
            expected: c.n - 1,
            got: head.len(),
        });
    }
    let e = elementary(head.iter().copied());
    let n = c.n;
    let num: f64 = (0..n - 1).map(|k| c.coeff(k) * e[k]).sum();
    let den = e[n - 1] - (1..n - 1).map(|k| c.coeff(k) * e[k - 1]).sum::<f64>();
    if den <= EPS_CMP {
        return Err(GiskError::DegenerateDenominator(den));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HValues {
    pub h: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

/// `h = Σ d_k σ_k(λ) / λ_1⋯λ_n` with gradient and Hessian.
pub fn h_eval(c: &GiskCoeffs, lambda: &[f64]) -> Result<HValues> {
    c.check_dim(lambda.len())?;
    if lambda.iter().any(|&v| v <= 0.0) {
        return Err(GiskError::NonpositiveEigenvalue);
    }
    let n = c.n;
    let weighted = |e: &[f64]| -> f64 {
        (0..n - 1)
            .filter(|&k| k < e.len())
            .map(|k| c.coeff(k) * e[k])
            .sum()
    };
    let prod: f64 = lambda.iter().product();
    let h = weighted(&elementary(lambda.iter().copied())) / prod;
    let single: Vec<f64> = (0..n)
        .map(|i| weighted(&elementary_excluding(lambda, &[i])))
        .collect();
    let grad: Vec<f64> = (0..n).map(|i| -single[i] / (prod * lambda[i])).collect();
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = 2.0 * single[i] / (prod * lambda[i] * lambda[i]);
        for j in 0..i {
            let s = weighted(&elementary_excluding(lambda, &[i, j]));
            let v = s / (prod * lambda[i] * lambda[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(HValues { h, grad, hess })
}

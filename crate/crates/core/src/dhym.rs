//! Expansion of the deformed Hermitian–Yang–Mills equation into coefficient
//! form and the shift that removes the `σ_{n−1}` term.

use serde::{Deserialize, Serialize};

use crate::binom::binomial;
use crate::error::{GiskError, Result};
use crate::stability::{check_stability, Status};
use crate::symmfunc::{elementary, FullCoeffs, GiskCoeffs};
use crate::unipoly::UniPoly;

const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhymSpec {
    pub n: usize,
    pub theta: f64,
}

/// Integer signs of `σ_k` in `Im` and `Re` of `Π(1 + iλ_j) = Σ i^k σ_k`.
pub fn expansion_signs(n: usize) -> (Vec<i8>, Vec<i8>) {
    let mut im = vec![0i8; n + 1];
    let mut re = vec![0i8; n + 1];
    for k in 0..=n {
        let s = if (k / 2) % 2 == 0 { 1 } else { -1 };
        if k % 2 == 0 {
            re[k] = s;
        } else {
            im[k] = s;
        }
    }
    (im, re)
}

/// Coefficients `c_k` with `σ_n = Σ_{k<n} c_k σ_k` on the locus
/// `cos θ · Im − sin θ · Re = 0`.
pub fn dhym_coefficients(spec: DhymSpec) -> Result<FullCoeffs> {
    let n = spec.n;
    if n < 2 {
        return Err(GiskError::DegreeTooLow { min: 2, got: n });
    }
    let (im, re) = expansion_signs(n);
    let (s, c) = spec.theta.sin_cos();
    let a: Vec<f64> = (0..=n).map(|k| c * im[k] as f64 - s * re[k] as f64).collect();
    if a[n].abs() < DEGENERATE {
        return Err(GiskError::DegeneratePhase);
    }
    let desc = (0..n).rev().map(|k| -a[k] / a[n]).collect();
    FullCoeffs::new(n, desc)
}

/// `xⁿ − Σ_{k<n} c_k C(n,k) x^k`.
pub fn full_diagonal_restriction(full: &FullCoeffs) -> UniPoly {
    let n = full.n;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    for (k, slot) in coeffs.iter_mut().enumerate().take(n) {
        *slot = -full.coeff(k) * binomial(n, k);
    }
    UniPoly::new(coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub reduced: GiskCoeffs,
    pub shift: f64,
}

/// Substitutes `x → x + c_{n−1}` so the `x^{n−1}` term disappears.
pub fn reduce_coefficients(full: &FullCoeffs) -> Result<Reduction> {
    let n = full.n;
    let shift = full.coeff(n - 1);
    let r = full_diagonal_restriction(full);
    let q = r.taylor_shift(shift);
    let mut qc = q.coeffs().to_vec();
    qc.resize(n + 1, 0.0);
    let scale = r.magnitude(shift).max(1.0);
    if qc[n - 1].abs() > DEGENERATE * scale {
        return Err(GiskError::ReductionFailed(qc[n - 1]));
    }
    let asc: Vec<f64> = (0..n - 1).map(|k| -qc[k] / binomial(n, k)).collect();
    Ok(Reduction {
        reduced: GiskCoeffs::from_ascending(n, &asc)?,
        shift,
    })
}

/// `cos θ · Im Π(1 + iλ_j) − sin θ · Re Π(1 + iλ_j)` evaluated directly.
pub fn phase_residual(theta: f64, lambda: &[f64]) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for &l in lambda {
        (re, im) = (re - im * l, im + re * l);
    }
    theta.cos() * im - theta.sin() * re
}

/// `σ_n(λ) − Σ_{k<n} c_k σ_k(λ)` in the unreduced format, with its magnitude.
pub fn full_f_eval(full: &FullCoeffs, lambda: &[f64]) -> Result<(f64, f64)> {
    let n = full.n;
    if lambda.len() != n {
        return Err(GiskError::DimensionMismatch { expected: n, got: lambda.len() });
    }
    let e = elementary(lambda.iter().copied());
    let terms = (0..n).map(|k| full.coeff(k) * e[k]);
    let value = e[n] - terms.clone().sum::<f64>();
    let magnitude = e[n].abs() + terms.map(f64::abs).sum::<f64>();
    Ok((value, magnitude))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub theta: f64,
    /// `None` where the phase is degenerate.
    pub status: Option<Status>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaWindow {
    pub n: usize,
    pub samples: Vec<ThetaSample>,
    /// Longest run of strictly stable grid angles, as `[first, last]`.
    pub stable_window: Option<[f64; 2]>,
}

/// Stability of the reduced coefficients over an open grid on `(0, π)`.
pub fn scan_theta_window(n: usize, points: usize) -> Result<ThetaWindow> {
    if n < 2 {
        return Err(GiskError::DegreeTooLow { min: 2, got: n });
    }
    if points < 2 {
        return Err(GiskError::InvalidParameter("need at least two grid angles".into()));
    }
    let pi = std::f64::consts::PI;
    let samples: Vec<ThetaSample> = (1..=points)
        .map(|j| {
            let theta = pi * j as f64 / (points + 1) as f64;
            let status = dhym_coefficients(DhymSpec { n, theta })
                .and_then(|full| reduce_coefficients(&full))
                .ok()
                .map(|r| check_stability(&r.reduced).status);
            ThetaSample { theta, status }
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (j, s) in samples.iter().enumerate() {
        if s.status == Some(Status::StrictlyStable) {
            let a = *start.get_or_insert(j);
            if best.is_none_or(|(lo, hi)| j - a > hi - lo) {
                best = Some((a, j));
            }
        } else {
            start = None;
        }
    }
    Ok(ThetaWindow {
        n,
        stable_window: best.map(|(a, b)| [samples[a].theta, samples[b].theta]),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * 1f64.max(b.abs())
    }

    #[test]
    fn low_dimensional_expansions() {
        let th = 0.7f64;
        let c = dhym_coefficients(DhymSpec { n: 2, theta: th }).unwrap();
        assert!(close(c.coeff(1), -1.0 / th.tan()) && close(c.coeff(0), 1.0));
        let c = dhym_coefficients(DhymSpec { n: 3, theta: th }).unwrap();
        assert!(close(c.coeff(2), th.tan()));
        assert!(close(c.coeff(1), 1.0));
        assert!(close(c.coeff(0), -th.tan()));
        let c = dhym_coefficients(DhymSpec { n: 3, theta: 0.0 }).unwrap();
        assert_eq!(c.c, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn degenerate_phase() {
        let e = dhym_coefficients(DhymSpec {
            n: 3,
            theta: std::f64::consts::FRAC_PI_2,
        });
        assert_eq!(e, Err(GiskError::DegeneratePhase));
        assert!(dhym_coefficients(DhymSpec { n: 2, theta: 0.0 }).is_err());
    }

    #[test]
    fn phase_residual_matches_expansion() {
        let theta = 1.1;
        let full = dhym_coefficients(DhymSpec { n: 3, theta }).unwrap();
        let lam = [0.4, 2.0, (theta - 0.4f64.atan() - 2f64.atan()).tan()];
        assert!(phase_residual(theta, &lam).abs() < 1e-12);
        let (v, mag) = full_f_eval(&full, &lam).unwrap();
        assert!(v.abs() <= 1e-12 * mag);
    }

    #[test]
    fn theta_window_is_found() {
        let w = scan_theta_window(3, 90).unwrap();
        let [lo, hi] = w.stable_window.unwrap();
        assert!(lo < hi);
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_coefficients(&FullCoeffs::new(3, vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(r.shift, 1.0);
        assert_eq!(r.reduced.d, vec![1.0, 2.0]);
        let r = reduce_coefficients(&FullCoeffs::new(3, vec![0.0, 1.5, -2.0]).unwrap()).unwrap();
        assert_eq!(r.shift, 0.0);
        assert_eq!(r.reduced.d, vec![1.5, -2.0]);
    }
}

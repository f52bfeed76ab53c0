//! Seeded samplers for stable coefficients, level-set points, unitary
//! conjugations and toy models.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::binom::binomial;
use crate::stability::{check_stability, cone_membership, psi, psi_closure, RootTuple, Status};
use crate::symmfunc::{elementary, solve_for_last, GiskCoeffs};
use crate::tol::EPS_CMP;
use crate::toymodel::{D0Sample, ToyModel};

pub type CaseRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Per-case seed derived from the master seed, a stream name and an index.
pub fn case_seed(master: u64, stream: &str, index: u64) -> u64 {
    splitmix(master ^ splitmix(fnv1a(stream) ^ splitmix(index)))
}

pub fn case_rng(master: u64, stream: &str, index: u64) -> CaseRng {
    ChaCha8Rng::seed_from_u64(case_seed(master, stream, index))
}

pub fn rng_from_seed(seed: u64) -> CaseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fraction of stable samples pushed against the strictness boundary.
pub const NEAR_BOUNDARY_FRACTION: f64 = 0.1;

/// Sorted exponential root tuple with a strict first gap; when
/// `near_boundary` the gap is `10·ε_cmp`.
pub fn sample_root_tuple<R: Rng>(rng: &mut R, n: usize, near_boundary: bool) -> RootTuple {
    let mut ys: Vec<f64> = (0..n - 1).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    ys.sort_by(|a, b| b.total_cmp(a));
    let x1 = if n > 2 { ys[1] } else { 0.0 };
    ys[0] = if near_boundary {
        x1 + 10.0 * EPS_CMP
    } else {
        ys[0] + 0.1 * x1 + 0.1
    };
    RootTuple::from_levels(n, &ys).unwrap()
}

/// Strictly stable coefficients with their root tuple.
pub fn sample_stable<R: Rng>(rng: &mut R, n: usize, near_boundary_fraction: f64) -> (RootTuple, GiskCoeffs) {
    let near = rng.random::<f64>() < near_boundary_fraction;
    let x = sample_root_tuple(rng, n, near);
    let c = psi(&x).unwrap();
    (x, c)
}

/// Closure point with random ties between consecutive roots, including
/// `x_0 = x_1` and runs of zeros at the bottom of the chain.
pub fn sample_closure<R: Rng>(rng: &mut R, n: usize) -> (RootTuple, GiskCoeffs) {
    let mut xs = vec![0.0; n];
    let zero_tail = rng.random::<f64>() < 0.25;
    let mut v = if zero_tail { 0.0 } else { rng.sample::<f64, _>(Exp1) * 0.5 };
    for l in (0..n - 1).rev() {
        if rng.random::<f64>() >= 0.3 || (l == 0 && v == 0.0) {
            v += rng.sample::<f64, _>(Exp1);
        }
        xs[l] = v;
    }
    xs.truncate(n - 1);
    let x = RootTuple::from_levels(n, &xs).unwrap();
    let c = psi_closure(&x).unwrap();
    (x, c)
}

/// Point on `{f = 0}` in the boundary of the stable component, sorted
/// descending, or `None` after `tries` rejections.
pub fn sample_level_set<R: Rng>(rng: &mut R, c: &GiskCoeffs, x0: f64, tries: usize) -> Option<Vec<f64>> {
    let n = c.n;
    let (lo, hi) = ((x0 * 0.1).ln(), (x0 * 1e3).ln());
    for _ in 0..tries {
        let head: Vec<f64> = (0..n - 1).map(|_| rng.random_range(lo..hi).exp()).collect();
        let last = match solve_for_last(c, &head) {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            _ => continue,
        };
        let mut lam = head;
        lam.push(last);
        lam.sort_by(|a, b| b.total_cmp(a));
        if cone_membership(c, &lam, 1).unwrap_or(false) {
            return Some(lam);
        }
    }
    None
}

/// Squared moduli `|U_ij|²` of a unitary from orthonormalized complex Gaussians.
pub fn random_unitary_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for z in &mut v {
            *z /= norm;
        }
        cols.push(v);
    }
    (0..n)
        .map(|i| (0..n).map(|k| cols[k][i].norm_sqr()).collect())
        .collect()
}

/// Diagonal of `U diag(λ) U*` from the weights `|U_ik|²`.
pub fn conjugated_diagonal(weights: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .map(|row| row.iter().zip(lambda).map(|(w, l)| w * l).sum())
        .collect()
}

/// Smallest `d_0` keeping `(d_{n−2}, …, d_1, d_0)` strictly stable, given `x_1`.
pub fn d0_threshold(c: &GiskCoeffs, x1: f64) -> f64 {
    let n = c.n;
    x1.powi(n as i32)
        - (1..n - 1)
            .map(|k| c.coeff(k) * binomial(n, k) * x1.powi(k as i32))
            .sum::<f64>()
}

/// A toy model whose constant eigenvalues form a subsolution for the
/// returned target, with integrability built in.
#[derive(Debug, Clone)]
pub struct SampledModel {
    pub target: GiskCoeffs,
    pub roots: RootTuple,
    pub model: ToyModel,
}

pub fn sample_toy_model<R: Rng>(rng: &mut R, n: usize, field_size: usize) -> SampledModel {
    loop {
        let (x, c) = sample_stable(rng, n, 0.0);
        let Some(lam) = sample_level_set(rng, &c, x.x0(), 200) else {
            continue;
        };
        let shift = x.x0() * rng.random_range(-0.3..0.6);
        let mu: Vec<f64> = lam.iter().map(|v| v + shift).collect();
        if mu.iter().any(|&v| v <= 0.0) || !cone_membership(&c, &mu, 1).unwrap_or(false) {
            continue;
        }
        let e = elementary(mu.iter().copied());
        let d0 = e[n] - (1..n - 1).map(|k| c.coeff(k) * e[k]).sum::<f64>();
        let mut asc = c.ascending();
        asc[0] = d0;
        let target = GiskCoeffs::from_ascending(n, &asc).unwrap();
        let cert = check_stability(&target);
        if cert.status != Status::StrictlyStable {
            continue;
        }
        let roots = cert.roots.unwrap();
        let room = d0 - d0_threshold(&target, roots.x1());
        let weights: Vec<f64> = (0..field_size).map(|_| rng.random_range(0.2..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        let raw: Vec<f64> = (0..field_size).map(|_| rng.random_range(-0.5..0.5)).collect();
        let centre = raw.iter().zip(&weights).map(|(r, w)| r * w).sum::<f64>() / wsum;
        let field: Vec<D0Sample> = raw
            .iter()
            .zip(&weights)
            .map(|(r, w)| D0Sample {
                value: d0 + 0.5 * room * (r - centre),
                weight: w / wsum,
            })
            .collect();
        let total: f64 = field.iter().map(|s| s.weight).sum();
        let Ok(model) = ToyModel::new(n, mu, field, total) else {
            continue;
        };
        return SampledModel { target, roots, model };
    }
}

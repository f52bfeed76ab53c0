//! Continuity paths in coefficient space and verification of their four
//! constraints (topological, boundary, stability, dominance).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::binom::{binomial, binomial_exact};
use crate::error::{GiskError, Result};
use crate::stability::{
    check_stability, diagonal_restriction, is_cy, phi, polyhedron_slacks_at, slacks_admissible, RootTuple,
    Status,
};
use crate::symmfunc::GiskCoeffs;
use crate::toymodel::{intersection_numbers, integrability_residual, level_pairing, mean_d0, IntersectionNumbers, ToyModel};

/// Relative tolerance on topological residuals.
pub const TOPOLOGICAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "which", rename_all = "snake_case")]
pub enum PathKind {
    Thm41,
    P42,
    Eq48 { ell: f64 },
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GiskError::InvalidParameter(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

fn check_omega(c: &GiskCoeffs, omega: &IntersectionNumbers) -> Result<()> {
    if omega.omega.len() != c.n + 1 {
        return Err(GiskError::DimensionMismatch {
            expected: c.n + 1,
            got: omega.omega.len(),
        });
    }
    if !(omega.volume() > 0.0) {
        return Err(GiskError::InvalidModel("Ω_n must be positive".into()));
    }
    Ok(())
}

/// Topological residual `Ω_0 − Σ_{k≥1} d_k C(n,k) Ω_{n−k} − d_0 Ω_n` and its scale.
pub fn topological_residual(c: &GiskCoeffs, omega: &IntersectionNumbers) -> (f64, f64) {
    let n = c.n;
    let mut scale = omega.omega[0].abs() + (c.coeff(0) * omega.volume()).abs();
    let mut r = omega.omega[0] - c.coeff(0) * omega.volume();
    for k in 1..n - 1 {
        let term = c.coeff(k) * binomial(n, k) * omega.omega[n - k];
        r -= term;
        scale += term.abs();
    }
    (r, scale.max(1.0))
}

fn check_integrable(d: &GiskCoeffs, omega: &IntersectionNumbers) -> Result<()> {
    let (r, scale) = topological_residual(d, omega);
    if r.abs() > TOPOLOGICAL_TOL * scale {
        return Err(GiskError::IntegrabilityViolation { residual: r });
    }
    Ok(())
}

/// `d_0` closing the topological constraint for the given upper coefficients.
fn closing_d0(upper_asc: &[f64], omega: &IntersectionNumbers, n: usize) -> f64 {
    let mut v = omega.omega[0];
    for k in 1..n - 1 {
        v -= upper_asc[k] * binomial(n, k) * omega.omega[n - k];
    }
    v / omega.volume()
}

fn thm41_unchecked(d: &GiskCoeffs, omega: &IntersectionNumbers, t: f64) -> GiskCoeffs {
    let n = d.n;
    let mut asc = vec![0.0; n - 1];
    for (k, slot) in asc.iter_mut().enumerate().skip(1) {
        *slot = t.powi((n - k) as i32) * d.coeff(k);
    }
    asc[0] = closing_d0(&asc, omega, n);
    GiskCoeffs::from_ascending(n, &asc).unwrap()
}

/// Scales `d_k` by `t^{n−k}` and closes the topological constraint with `d_0`.
pub fn path_thm41(d: &GiskCoeffs, omega: &IntersectionNumbers, t: f64) -> Result<GiskCoeffs> {
    check_t(t)?;
    check_omega(d, omega)?;
    phi(d)?;
    check_integrable(d, omega)?;
    if t == 1.0 {
        return Ok(GiskCoeffs::new(d.n, d.d.clone())?);
    }
    Ok(thm41_unchecked(d, omega, t))
}

/// Interpolates the `d_0` field toward its mean; one vector per sample.
pub fn path_42(d: &GiskCoeffs, m: &ToyModel, t: f64) -> Result<Vec<GiskCoeffs>> {
    check_t(t)?;
    if m.n != d.n {
        return Err(GiskError::DimensionMismatch {
            expected: m.n,
            got: d.n,
        });
    }
    let mean = mean_d0(m);
    let mut asc = d.ascending();
    Ok(m.d0_samples
        .iter()
        .map(|s| {
            asc[0] = t * s.value + (1.0 - t) * mean;
            GiskCoeffs::from_ascending(d.n, &asc).unwrap()
        })
        .collect())
}

pub(crate) fn signed_two_thirds(v: f64) -> f64 {
    let r = v.cbrt();
    r * r
}

/// Four-dimensional path bending `d_2` while `d_1` shrinks linearly.
pub fn path_eq48(d: &GiskCoeffs, omega: &IntersectionNumbers, ell: f64, t: f64) -> Result<GiskCoeffs> {
    check_t(t)?;
    if d.n != 4 {
        return Err(GiskError::DimensionMismatch { expected: 4, got: d.n });
    }
    check_omega(d, omega)?;
    let (d2, d1) = (d.coeff(2), d.coeff(1));
    if d2 < 0.0 {
        return Err(GiskError::InvalidParameter("d_2 must be nonnegative".into()));
    }
    let d2t = signed_two_thirds(d2.powf(1.5) + (1.0 - t) * ell * d1 / 2.0);
    let d1t = t * d1;
    let o = &omega.omega;
    let d0t = (o[0] - 6.0 * d2t * o[2] - 4.0 * d1t * o[3]) / o[4];
    GiskCoeffs::new(4, vec![d2t, d1t, d0t])
}

/// The value of `ℓ` that sends the start of the four-dimensional path to the
/// Monge–Ampère stratum.
pub fn eq48_critical_ell(d: &GiskCoeffs) -> f64 {
    -2.0 * d.coeff(2).powf(1.5) / d.coeff(1)
}

/// Left-hand side of the positivity claim along the scaled path.
pub fn claim_residual(d: &GiskCoeffs, omega: &IntersectionNumbers, t: f64) -> f64 {
    let n = d.n;
    let mut v = omega.omega[0] - t.powi(n as i32) * d.coeff(0) * omega.volume();
    for k in 1..n - 1 {
        v -= t.powi((n - k) as i32) * d.coeff(k) * binomial(n, k) * omega.omega[n - k];
    }
    v
}

/// The claim rebuilt as `Σ_l a_l(t)·P_l + (1−t)ⁿ Ω_0`, where `P_l` are the
/// level pairings; equal to [`claim_residual`] whenever `d` is integrable.
pub fn claim_reconstruction(d: &GiskCoeffs, omega: &IntersectionNumbers, t: f64) -> f64 {
    let n = d.n;
    let a = binomial_weights_f64(n, t);
    let mut v = (1.0 - t).powi(n as i32) * omega.omega[0];
    for (l, al) in a.iter().enumerate().skip(1) {
        v += al * level_pairing(d, omega, l);
    }
    v
}

fn binomial_weights_f64(n: usize, t: f64) -> Vec<f64> {
    (0..n)
        .map(|l| binomial(n, l) * t.powi((n - l) as i32) * (1.0 - t).powi(l as i32))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinomialSequence {
    pub recurrence: Vec<BigRational>,
    pub closed_form: Vec<BigRational>,
}

fn rpow(base: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

/// The weights `a_0..a_{n−1}` by the recurrence and by the closed form.
pub fn binomial_sequence(n: usize, t: &BigRational) -> Result<BinomialSequence> {
    if n < 2 {
        return Err(GiskError::DegreeTooLow { min: 2, got: n });
    }
    if *t < BigRational::zero() || *t > BigRational::one() {
        return Err(GiskError::InvalidParameter(format!("t = {t} outside [0, 1]")));
    }
    let c = |a: usize, b: usize| BigRational::from_integer(binomial_exact(a, b));
    let mut rec: Vec<BigRational> = Vec::with_capacity(n);
    for l in 0..n {
        let mut v = c(n, l) * rpow(t, n - l);
        for (k, ak) in rec.iter().enumerate() {
            v -= ak * c(n - k, l - k);
        }
        rec.push(v);
    }
    let s = BigRational::one() - t;
    let closed = (0..n).map(|l| c(n, l) * rpow(t, n - l) * rpow(&s, l)).collect();
    Ok(BinomialSequence {
        recurrence: rec,
        closed_form: closed,
    })
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub topological: f64,
    pub topological_scale: f64,
    pub boundary: bool,
    /// Worst stability status over the coefficient vectors at this time.
    pub positivstellensatz: Status,
    pub dominance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub coeffs: Vec<GiskCoeffs>,
    /// `(x_1, x_0)` per coefficient vector when right-Noetherian.
    pub roots: Vec<Option<[f64; 2]>>,
    /// Diagonal restriction at `x_1`; negative exactly when strictly stable.
    pub diagonal_at_x1: Vec<Option<f64>>,
    pub constraints: Constraints,
    /// Positivity claim along the scaled path, for that path only.
    pub claim: Option<f64>,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointCheck {
    pub t0_in_cy: bool,
    /// The path's own starting condition: Monge–Ampère stratum for the
    /// scaled paths, a constant `d_0` field for the averaging path.
    pub t0_start_ok: bool,
    pub t1_matches_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub schema: u32,
    pub path: PathKind,
    pub n: usize,
    pub target: GiskCoeffs,
    pub omega: Vec<f64>,
    pub samples: Vec<PathSample>,
    pub all_pass: bool,
    pub endpoint_check: EndpointCheck,
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0, 1.0];
    }
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

fn severity(s: Status) -> u8 {
    match s {
        Status::StrictlyStable => 0,
        Status::Boundary => 1,
        Status::StableNonstrict => 2,
        Status::Unstable => 3,
    }
}

fn coeffs_match(a: &GiskCoeffs, b: &GiskCoeffs) -> bool {
    a.d.iter()
        .zip(&b.d)
        .all(|(x, y)| (x - y).abs() <= 1e-12 * 1f64.max(x.abs()).max(y.abs()))
}

pub fn verify_path(d: &GiskCoeffs, m: &ToyModel, which: PathKind, t_grid: &[f64]) -> Result<PathReport> {
    m.validate()?;
    if m.n != d.n {
        return Err(GiskError::DimensionMismatch {
            expected: m.n,
            got: d.n,
        });
    }
    for &t in t_grid {
        check_t(t)?;
    }
    if !t_grid.contains(&0.0) || !t_grid.contains(&1.0) {
        return Err(GiskError::InvalidParameter("grid must contain 0 and 1".into()));
    }
    let omega = intersection_numbers(m);
    let xd = phi(d)?;
    match which {
        PathKind::P42 => {
            let r = integrability_residual(m, d)?;
            let (_, scale) = topological_residual(d, &omega);
            if r.abs() > TOPOLOGICAL_TOL * scale {
                return Err(GiskError::IntegrabilityViolation { residual: r });
            }
        }
        PathKind::Eq48 { ell } => {
            if d.n != 4 {
                return Err(GiskError::DimensionMismatch { expected: 4, got: d.n });
            }
            if !ell.is_finite() {
                return Err(GiskError::InvalidParameter("ell must be finite".into()));
            }
            check_integrable(d, &omega)?;
        }
        PathKind::Thm41 => check_integrable(d, &omega)?,
    }

    // Targets per coefficient vector: the scaled paths aim at `d`, the
    // averaging path at `(d_upper, v_z)` for each field sample.
    let targets: Vec<(GiskCoeffs, RootTuple)> = match which {
        PathKind::P42 => path_42(d, m, 1.0)?
            .into_iter()
            .map(|c| {
                let r = phi(&c)?;
                Ok((c, r))
            })
            .collect::<Result<_>>()?,
        _ => vec![(d.clone(), xd.clone())],
    };
    let mean = mean_d0(m);

    let mut samples = Vec::with_capacity(t_grid.len());
    let mut endpoint = EndpointCheck {
        t0_in_cy: false,
        t0_start_ok: false,
        t1_matches_target: false,
    };
    for &t in t_grid {
        let coeffs: Vec<GiskCoeffs> = match which {
            PathKind::Thm41 => vec![path_thm41(d, &omega, t)?],
            PathKind::P42 => path_42(d, m, t)?,
            PathKind::Eq48 { ell } => vec![path_eq48(d, &omega, ell, t)?],
        };
        let (topological, topological_scale) = match which {
            PathKind::P42 => {
                let (_, scale) = topological_residual(&coeffs[0], &omega);
                let integral: f64 = m
                    .d0_samples
                    .iter()
                    .zip(&coeffs)
                    .map(|(s, c)| s.weight * c.coeff(0))
                    .sum();
                let (upper, _) = topological_residual(&GiskCoeffs::from_ascending(d.n, &{
                    let mut a = d.ascending();
                    a[0] = 0.0;
                    a
                })?, &omega);
                (upper - integral, scale)
            }
            _ => topological_residual(&coeffs[0], &omega),
        };
        let mut worst = Status::StrictlyStable;
        let mut dominance_ok = true;
        let mut roots = Vec::with_capacity(coeffs.len());
        let mut diag = Vec::with_capacity(coeffs.len());
        for (c, (_, xt)) in coeffs.iter().zip(targets.iter().cycle()) {
            let cert = check_stability(c);
            if severity(cert.status) > severity(worst) {
                worst = cert.status;
            }
            match &cert.roots {
                Some(r) => {
                    roots.push(Some([r.x1(), r.x0()]));
                    diag.push(Some(diagonal_restriction(c).eval(r.x1())));
                }
                None => {
                    roots.push(None);
                    diag.push(None);
                }
            }
            let slacks = polyhedron_slacks_at(c, xt);
            if !slacks_admissible(&slacks, xt) {
                dominance_ok = false;
            }
        }
        let boundary = if t == 0.0 {
            let in_cy = coeffs.iter().all(is_cy);
            let start = match which {
                PathKind::P42 => coeffs
                    .iter()
                    .all(|c| (c.coeff(0) - mean).abs() <= 1e-12 * mean.abs().max(1.0)),
                _ => in_cy,
            };
            endpoint.t0_in_cy = in_cy;
            endpoint.t0_start_ok = start;
            start
        } else if t == 1.0 {
            let ok = coeffs.iter().zip(&targets).all(|(c, (g, _))| coeffs_match(c, g));
            endpoint.t1_matches_target = ok;
            ok
        } else {
            true
        };
        let claim = match which {
            PathKind::Thm41 => Some(claim_residual(d, &omega, t)),
            _ => None,
        };
        let passes = topological.abs() <= TOPOLOGICAL_TOL * topological_scale
            && worst == Status::StrictlyStable
            && dominance_ok
            && boundary;
        samples.push(PathSample {
            t,
            coeffs,
            roots,
            diagonal_at_x1: diag,
            constraints: Constraints {
                topological,
                topological_scale,
                boundary,
                positivstellensatz: worst,
                dominance: dominance_ok,
            },
            claim,
            passes,
        });
    }
    let all_pass = samples.iter().all(|s| s.passes);
    Ok(PathReport {
        schema: 1,
        path: which,
        n: d.n,
        target: d.clone(),
        omega: omega.omega,
        samples,
        all_pass,
        endpoint_check: endpoint,
    })
}

/// Column names of the path CSV for dimension `n`.
pub fn path_csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "z".to_string()];
    for k in (0..n - 1).rev() {
        h.push(format!("d{k}"));
    }
    for s in ["x1", "x0", "topological", "diagonal_at_x1", "claim"] {
        h.push(s.to_string());
    }
    h
}

/// One row per time and coefficient vector; missing values are empty.
pub fn path_csv_rows(report: &PathReport) -> Vec<Vec<String>> {
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut rows = Vec::new();
    for s in &report.samples {
        for (z, c) in s.coeffs.iter().enumerate() {
            let mut row = vec![s.t.to_string(), z.to_string()];
            row.extend(c.d.iter().map(|v| v.to_string()));
            let r = s.roots[z];
            row.push(fmt(r.map(|r| r[0])));
            row.push(fmt(r.map(|r| r[1])));
            row.push(s.constraints.topological.to_string());
            row.push(fmt(s.diagonal_at_x1[z]));
            row.push(fmt(s.claim));
            rows.push(row);
        }
    }
    rows
}

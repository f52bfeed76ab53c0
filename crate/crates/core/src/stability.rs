//! Stability test through the diagonal restriction, the root maps between
//! coefficient space and root-tuple space, cone membership, dominance and
//! the scaling threshold `T`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::binom::binomial;
use crate::error::{GiskError, Result};
use crate::symmfunc::{elementary_excluding, GiskCoeffs};
use crate::tol::EPS_CMP;
use crate::unipoly::{cmp_tol, right_noetherian_report, UniPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    StrictlyStable,
    StableNonstrict,
    Unstable,
    Boundary,
}

impl Status {
    pub fn is_closure(self) -> bool {
        self != Status::Unstable
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::StrictlyStable => "strictly_stable",
            Status::StableNonstrict => "stable_nonstrict",
            Status::Unstable => "unstable",
            Status::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

/// Root tuple `(x_{n−2}, …, x_1, x_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootTuple {
    pub n: usize,
    pub x: Vec<f64>,
}

impl RootTuple {
    pub fn new(n: usize, x: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(GiskError::DegreeTooLow { min: 2, got: n });
        }
        if x.len() != n - 1 {
            return Err(GiskError::DimensionMismatch {
                expected: n - 1,
                got: x.len(),
            });
        }
        Ok(RootTuple { n, x })
    }

    /// Builds from `[x_0, x_1, …, x_{n−2}]`.
    pub fn from_levels(n: usize, levels: &[f64]) -> Result<Self> {
        RootTuple::new(n, levels.iter().rev().copied().collect())
    }

    /// `x_l`, with `x_{n−1} = 0`.
    pub fn root(&self, l: usize) -> f64 {
        if l + 1 >= self.n {
            0.0
        } else {
            self.x[self.n - 2 - l]
        }
    }

    pub fn x0(&self) -> f64 {
        self.root(0)
    }

    pub fn x1(&self) -> f64 {
        self.root(1)
    }

    /// `[x_0, …, x_{n−2}]`.
    pub fn levels(&self) -> Vec<f64> {
        self.x.iter().rev().copied().collect()
    }

    /// Checks `x_0 > x_1 ≥ ⋯ ≥ x_{n−2} ≥ 0`; `closure` relaxes the first gap.
    pub fn validate(&self, closure: bool) -> Result<()> {
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(GiskError::InvalidRootTuple("non-finite entry".into()));
        }
        let (x0, x1) = (self.x0(), self.x1());
        if !(x0 > x1 || (closure && x0 >= x1)) {
            return Err(GiskError::InvalidRootTuple(format!("x_0 = {x0} must exceed x_1 = {x1}")));
        }
        for l in 1..self.n - 1 {
            if self.root(l) < self.root(l + 1) {
                return Err(GiskError::InvalidRootTuple(format!(
                    "x_{l} < x_{}",
                    l + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strata {
    pub dimension: usize,
    /// Entry `l − 1` records whether `x_l > x_{l+1}` for `l = 1..n−2`.
    pub signature: Vec<bool>,
}

impl Strata {
    pub fn of(roots: &RootTuple) -> Strata {
        let signature: Vec<bool> = (1..roots.n - 1)
            .map(|l| {
                let (a, b) = (roots.root(l), roots.root(l + 1));
                a - b > cmp_tol(a, b)
            })
            .collect();
        Strata {
            dimension: 1 + signature.iter().filter(|&&s| s).count(),
            signature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCertificate {
    pub status: Status,
    /// Largest roots when the chain is right-Noetherian.
    pub roots: Option<RootTuple>,
    /// Largest real root per derivative level `0..n−1`, as found.
    pub level_roots: Vec<Option<f64>>,
    pub diagonal: UniPoly,
    pub strata: Option<Strata>,
}

/// `r(x) = xⁿ − Σ d_k C(n,k) x^k`.
pub fn diagonal_restriction(c: &GiskCoeffs) -> UniPoly {
    let n = c.n;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    for (k, slot) in coeffs.iter_mut().enumerate().take(n - 1) {
        *slot = -c.coeff(k) * binomial(n, k);
    }
    UniPoly::new(coeffs)
}

pub fn check_stability(c: &GiskCoeffs) -> StabilityCertificate {
    let diagonal = diagonal_restriction(c);
    let report = right_noetherian_report(&diagonal).expect("degree at least 2");
    let level_roots: Vec<Option<f64>> = report.roots.levels.iter().map(|l| l.largest_real_root).collect();
    if !report.is_rn {
        return StabilityCertificate {
            status: Status::Unstable,
            roots: None,
            level_roots,
            diagonal,
            strata: None,
        };
    }
    let levels: Vec<f64> = level_roots[..c.n - 1].iter().map(|r| r.unwrap()).collect();
    let roots = RootTuple::from_levels(c.n, &levels).unwrap();
    let status = if report.is_strict {
        Status::StrictlyStable
    } else if roots.x0() == roots.x1() {
        Status::StableNonstrict
    } else {
        Status::Boundary
    };
    let strata = Some(Strata::of(&roots));
    StabilityCertificate {
        status,
        roots: Some(roots),
        level_roots,
        diagonal,
        strata,
    }
}

/// Coefficients to root tuple.
pub fn phi(c: &GiskCoeffs) -> Result<RootTuple> {
    let cert = check_stability(c);
    match (cert.status, cert.roots) {
        (Status::StrictlyStable, Some(r)) => Ok(r),
        (s, _) => Err(GiskError::NotStrictlyStable(s.to_string())),
    }
}

/// Root tuple to coefficients.
pub fn psi(x: &RootTuple) -> Result<GiskCoeffs> {
    x.validate(false)?;
    Ok(psi_unchecked(x))
}

/// Same recursion on the closure, allowing `x_0 = x_1`.
pub fn psi_closure(x: &RootTuple) -> Result<GiskCoeffs> {
    x.validate(true)?;
    Ok(psi_unchecked(x))
}

fn psi_unchecked(x: &RootTuple) -> GiskCoeffs {
    let n = x.n;
    let mut asc = vec![0.0; n - 1];
    for l in (0..n - 1).rev() {
        let xl = x.root(l);
        let mut v = xl.powi((n - l) as i32);
        for k in l + 1..n - 1 {
            v -= asc[k] * binomial(n - l, k - l) * xl.powi((k - l) as i32);
        }
        asc[l] = v;
    }
    GiskCoeffs::from_ascending(n, &asc).unwrap()
}

pub fn subsets(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(l);
    fn rec(start: usize, n: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < l - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, l, cur, out);
            cur.pop();
        }
    }
    rec(0, n, l, &mut cur, &mut out);
    out
}

/// Number of points sampled along the certification segment.
/// `t ↦ f_S(λ + t·1)` for the partial of `c` in the variables `S`.
pub fn partial_along_diagonal(c: &GiskCoeffs, lambda: &[f64], excluded: &[usize]) -> UniPoly {
    let n = c.n;
    let l = excluded.len();
    let m = n - l;
    let e = elementary_excluding(lambda, excluded);
    let mut q = vec![0.0; m + 1];
    // σ_j(μ + t) = Σ_p C(m−j+p, p) σ_{j−p}(μ) t^p
    let mut add = |j: usize, weight: f64| {
        for (p, slot) in q.iter_mut().enumerate().take(j + 1) {
            *slot += weight * binomial(m - j + p, p) * e[j - p];
        }
    };
    add(m, 1.0);
    for k in l..n - 1 {
        add(k - l, -c.coeff(k));
    }
    UniPoly::new(q)
}

/// Membership in the `l`-th cone: every `l`-th partial is positive at `λ`
/// and stays positive along the diagonal ray `λ + t·1`, `t ≥ 0`.
pub fn cone_membership(c: &GiskCoeffs, lambda: &[f64], l: usize) -> Result<bool> {
    c.check_dim(lambda.len())?;
    if l == 0 || l >= c.n {
        return Err(GiskError::IndexOutOfRange(format!("cone order {l} outside 1..{}", c.n - 1)));
    }
    Ok(subsets(c.n, l).iter().all(|s| {
        let q = partial_along_diagonal(c, lambda, s);
        q.eval(0.0) > 0.0 && q.largest_real_root().map_or(true, |r| r < 0.0)
    }))
}

pub fn upsilon_cone_membership(c: &GiskCoeffs, lambda: &[f64], l: usize) -> Result<bool> {
    phi(c)?;
    cone_membership(c, lambda, l)
}

pub fn is_c_subsolution_point(c: &GiskCoeffs, mu: &[f64]) -> Result<bool> {
    upsilon_cone_membership(c, mu, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub dominates: bool,
    /// Normalized `l`-th derivative of `c`'s diagonal restriction at `x_l(d)`, `l = 1..n−2`.
    pub per_level_slack: Vec<f64>,
}

fn same_dim(c: &GiskCoeffs, d: &GiskCoeffs) -> Result<()> {
    if c.n != d.n {
        return Err(GiskError::DimensionMismatch {
            expected: d.n,
            got: c.n,
        });
    }
    Ok(())
}

fn level_tol(x: f64, power: usize) -> f64 {
    EPS_CMP * 1f64.max(x.abs().powi(power as i32))
}

/// Whether the first cone of `d` sits inside that of `c`, via derivatives of
/// `c`'s diagonal restriction at the roots of `d`.
pub fn dominance(c: &GiskCoeffs, d: &GiskCoeffs) -> Result<DominanceVerdict> {
    same_dim(c, d)?;
    phi(c)?;
    let xd = phi(d)?;
    let n = c.n;
    let r = diagonal_restriction(c);
    let mut dominates = true;
    let per_level_slack: Vec<f64> = (1..n - 1)
        .map(|l| {
            let norm: f64 = ((n - l + 1)..=n).map(|j| j as f64).product();
            let xl = xd.root(l);
            let v = r.derivative(l).eval(xl) / norm;
            if v < -level_tol(xl, n - l) {
                dominates = false;
            }
            v
        })
        .collect();
    Ok(DominanceVerdict {
        dominates,
        per_level_slack,
    })
}

/// Left-hand sides of the polyhedron inequalities in `c` at the roots of `d`.
pub fn polyhedron_slacks(c: &GiskCoeffs, d: &GiskCoeffs) -> Result<Vec<f64>> {
    same_dim(c, d)?;
    phi(c)?;
    let xd = phi(d)?;
    Ok(polyhedron_slacks_at(c, &xd))
}

pub fn polyhedron_slacks_at(c: &GiskCoeffs, xd: &RootTuple) -> Vec<f64> {
    let n = c.n;
    (1..n - 1)
        .map(|l| {
            let xl = xd.root(l);
            let mut v = xl.powi((n - l) as i32);
            for k in l..n - 1 {
                v -= c.coeff(k) * binomial(n - l, k - l) * xl.powi((k - l) as i32);
            }
            v
        })
        .collect()
}

pub fn slacks_admissible(slacks: &[f64], xd: &RootTuple) -> bool {
    let n = xd.n;
    slacks
        .iter()
        .enumerate()
        .all(|(i, &s)| s >= -level_tol(xd.root(i + 1), n - i - 1))
}

pub fn in_polyhedron(c: &GiskCoeffs, d: &GiskCoeffs) -> Result<bool> {
    let slacks = polyhedron_slacks(c, d)?;
    Ok(slacks_admissible(&slacks, &phi(d)?))
}

/// Component-wise comparison `x_l(d) ≥ x_l(c)` for `l = 1..n−2`.
pub fn root_dominates(c: &GiskCoeffs, d: &GiskCoeffs) -> Result<bool> {
    same_dim(c, d)?;
    let (xc, xd) = (phi(c)?, phi(d)?);
    Ok((1..c.n - 1).all(|l| {
        let (a, b) = (xd.root(l), xc.root(l));
        a >= b - cmp_tol(a, b)
    }))
}

/// Extended-real value of the scaling threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tee {
    Finite(f64),
    Infinite,
}

impl Tee {
    pub fn as_f64(self) -> f64 {
        match self {
            Tee::Finite(v) => v,
            Tee::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Tee {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tee::Finite(v) => s.serialize_f64(*v),
            Tee::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Tee {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Tee::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Tee::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

/// Membership in the Monge–Ampère stratum `(0, …, 0, c_0 > 0)`.
pub fn is_cy(c: &GiskCoeffs) -> bool {
    let c0 = c.coeff(0);
    let upper = (1..c.n - 1).fold(0.0f64, |m, k| m.max(c.coeff(k).abs()));
    c0 > 0.0 && upper <= EPS_CMP * (1.0 + c0.abs())
}

pub fn tee(c: &GiskCoeffs) -> Result<Tee> {
    let x = phi(c)?;
    if is_cy(c) {
        return Ok(Tee::Infinite);
    }
    Ok(Tee::Finite(tee_closed_form(c, x.x0())))
}

fn tee_closed_form(c: &GiskCoeffs, x0: f64) -> f64 {
    let n = c.n;
    let den: f64 = (1..n - 1)
        .map(|k| c.coeff(k) * binomial(n - 1, k - 1) * x0.powi((k - 1) as i32))
        .sum();
    x0.powi((n - 1) as i32) / den
}

/// Largest root of `x^{n−1} − t Σ_{k≥1} c_k C(n−1,k−1) x^{k−1}`, the first
/// derivative level of the diagonal restriction of `t·c`.
pub fn first_level_root(c: &GiskCoeffs, t: f64) -> Result<f64> {
    let n = c.n;
    let mut coeffs = vec![0.0; n];
    coeffs[n - 1] = 1.0;
    for k in 1..n - 1 {
        coeffs[k - 1] = -t * c.coeff(k) * binomial(n - 1, k - 1);
    }
    UniPoly::new(coeffs).largest_real_root()
}

/// Roots of `t·c` for `t ≥ 1` and `c` in the closure.
pub fn scale_roots(c: &GiskCoeffs, t: f64) -> Result<RootTuple> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(GiskError::InvalidParameter(format!("scale {t} must be ≥ 1")));
    }
    if !check_stability(c).status.is_closure() {
        return Err(GiskError::NotStable);
    }
    check_stability(&c.scaled(t)).roots.ok_or(GiskError::NotStable)
}

pub fn boundary_touch(c: &GiskCoeffs, l: usize) -> Result<bool> {
    if l + 1 >= c.n {
        return Err(GiskError::IndexOutOfRange(format!("level {l} outside 0..{}", c.n - 2)));
    }
    let roots = check_stability(c).roots.ok_or(GiskError::NotStable)?;
    let (a, b) = (roots.root(l), roots.root(l + 1));
    Ok((a - b).abs() <= cmp_tol(a, b))
}

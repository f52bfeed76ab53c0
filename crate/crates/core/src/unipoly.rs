//! Dense real univariate polynomials, derivative chains and the
//! right-Noetherian test.

use serde::{Deserialize, Serialize};

use crate::binom::binomial;
use crate::error::{GiskError, Result};
use crate::tol::{EPS_CMP, ZERO_GUARD};

/// Dense polynomial; `coeffs[i]` multiplies `x^i`. Trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

impl From<Vec<f64>> for UniPoly {
    fn from(coeffs: Vec<f64>) -> Self {
        UniPoly::new(coeffs)
    }
}

impl From<UniPoly> for Vec<f64> {
    fn from(p: UniPoly) -> Self {
        p.coeffs
    }
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![0.0] }
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r * a;
            }
            c = next;
        }
        UniPoly::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative by a single Horner pass.
    fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for &c in self.coeffs.iter().rev() {
            d = d * x + v;
            v = v * x + c;
        }
        (v, d)
    }

    /// Sum of |p_i||x|^i, the rounding-error magnitude of a Horner evaluation.
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    /// True when `p(x)` cannot be told apart from zero in floating point.
    pub fn vanishes_at(&self, x: f64) -> bool {
        let bound = ZERO_GUARD * (self.degree().max(1) as f64) * self.magnitude(x);
        self.eval(x).abs() <= bound
    }

    pub fn derivative(&self, l: usize) -> UniPoly {
        if l > self.degree() {
            return UniPoly::zero();
        }
        let c = (l..self.coeffs.len())
            .map(|i| {
                let falling: f64 = ((i - l + 1)..=i).map(|j| j as f64).product();
                self.coeffs[i] * falling
            })
            .collect();
        UniPoly::new(c)
    }

    /// Returns `q` with `q(x) = p(x + a)`.
    ///
    /// Each coefficient `Σ_i p_i C(i,j) a^{i−j}` is accumulated in
    /// double-double, so cancellation between large terms costs nothing
    /// beyond the final rounding.
    pub fn taylor_shift(&self, a: f64) -> UniPoly {
        let n = self.coeffs.len();
        let mut powers = vec![DoubleDouble::from(1.0); n];
        for i in 1..n {
            powers[i] = powers[i - 1].mul_f64(a);
        }
        let c = (0..n)
            .map(|j| {
                (j..n)
                    .fold(DoubleDouble::from(0.0), |acc, i| {
                        acc.add(powers[i - j].mul_f64(self.coeffs[i] * binomial(i, j)))
                    })
                    .value()
            })
            .collect();
        UniPoly::new(c)
    }

    /// Cauchy bound: every real root lies in `(-b, b)`.
    fn root_bound(&self) -> f64 {
        let lead = self.leading().abs();
        1.0 + self.coeffs[..self.degree()]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs() / lead))
    }

    /// All distinct real roots in ascending order.
    pub fn real_roots(&self) -> Vec<f64> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let chain: Vec<UniPoly> = (0..self.degree()).map(|l| self.derivative(l)).collect();
        let mut above: Vec<f64> = Vec::new();
        for q in chain.iter().rev() {
            above = roots_between_critical(q, &above);
        }
        above
    }

    pub fn largest_real_root(&self) -> Result<f64> {
        if self.degree() == 0 {
            return Err(GiskError::DegreeTooLow { min: 1, got: 0 });
        }
        self.real_roots().last().copied().ok_or(GiskError::NoRealRoot)
    }
}

/// Real roots of `p` given the sorted real roots of `p'`. Between consecutive
/// critical points `p` is monotone, so each gap holds at most one simple root;
/// a critical point where `p` vanishes is a root of even or higher multiplicity.
fn roots_between_critical(p: &UniPoly, critical: &[f64]) -> Vec<f64> {
    match p.degree() {
        0 => return Vec::new(),
        // Adding zero turns a -0.0 root into 0.0.
        1 => return vec![-p.coeffs[0] / p.coeffs[1] + 0.0],
        _ => {}
    }
    let b = p.root_bound();
    let mut pts = Vec::with_capacity(critical.len() + 2);
    pts.push(-b);
    pts.extend_from_slice(critical);
    pts.push(b);
    let vals: Vec<f64> = pts.iter().map(|&x| p.eval(x)).collect();
    let last = pts.len() - 1;
    let zero: Vec<bool> = pts
        .iter()
        .enumerate()
        .map(|(i, &x)| i != 0 && i != last && p.vanishes_at(x))
        .collect();
    let mut roots = Vec::new();
    for j in 0..last {
        if j > 0 && zero[j] {
            roots.push(pts[j]);
        }
        if zero[j] || zero[j + 1] {
            continue;
        }
        let (va, vb) = (vals[j], vals[j + 1]);
        if (va < 0.0) != (vb < 0.0) && va != 0.0 && vb != 0.0 {
            roots.push(refine(p, pts[j], pts[j + 1], va));
        }
    }
    roots.dedup();
    roots
}

/// Safeguarded Newton iteration inside a sign-change bracket.
fn refine(p: &UniPoly, mut a: f64, mut b: f64, va: f64) -> f64 {
    let neg_at_a = va < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (v, d) = p.eval_with_slope(x);
        if v == 0.0 {
            return x;
        }
        if (v < 0.0) == neg_at_a {
            a = x;
        } else {
            b = x;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return x;
        }
        let newton = x - v / d;
        let next = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            mid
        };
        if (next - x).abs() <= f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        x = next;
    }
    x
}

/// Largest real root per derivative level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRoot {
    pub level: usize,
    pub largest_real_root: Option<f64>,
    pub has_real_root: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub levels: Vec<LevelRoot>,
}

impl RootReport {
    pub fn largest(&self, l: usize) -> Option<f64> {
        self.levels.get(l).and_then(|r| r.largest_real_root)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoetherianReport {
    pub is_rn: bool,
    pub is_strict: bool,
    /// Right-Noetherian with `x_0` and `x_1` numerically tied.
    pub boundary: bool,
    pub roots: RootReport,
}

/// Ordering tolerance used when comparing two roots.
pub fn cmp_tol(x: f64, y: f64) -> f64 {
    EPS_CMP * 1f64.max(x.abs()).max(y.abs())
}

pub fn right_noetherian_report(p: &UniPoly) -> Result<NoetherianReport> {
    let n = p.degree();
    if n < 2 {
        return Err(GiskError::DegreeTooLow { min: 2, got: n });
    }
    let mut levels = vec![
        LevelRoot {
            level: 0,
            largest_real_root: None,
            has_real_root: false
        };
        n
    ];
    let mut above: Vec<f64> = Vec::new();
    for l in (0..n).rev() {
        let q = p.derivative(l);
        above = roots_between_critical(&q, &above);
        levels[l] = LevelRoot {
            level: l,
            largest_real_root: above.last().copied(),
            has_real_root: !above.is_empty(),
        };
    }
    let roots = RootReport { levels };
    let is_rn = (0..=n - 2).all(|l| match (roots.largest(l), roots.largest(l + 1)) {
        (Some(lo), Some(hi)) => lo >= hi - cmp_tol(lo, hi),
        _ => false,
    });
    let (x0, x1) = (roots.largest(0), roots.largest(1));
    let (is_strict, boundary) = match (is_rn, x0, x1) {
        (true, Some(x0), Some(x1)) => {
            let t = cmp_tol(x0, x1);
            (x0 > x1 + t, (x0 - x1).abs() <= t)
        }
        _ => (false, false),
    };
    Ok(NoetherianReport {
        is_rn,
        is_strict,
        boundary,
        roots,
    })
}

/// Unevaluated sum `hi + lo` carrying about twice the working precision.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl DoubleDouble {
    fn mul_f64(self, b: f64) -> DoubleDouble {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p) + self.lo * b;
        let (hi, lo) = two_sum(p, e);
        DoubleDouble { hi, lo }
    }

    fn add(self, o: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = two_sum(s, e + self.lo + o.lo);
        DoubleDouble { hi, lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

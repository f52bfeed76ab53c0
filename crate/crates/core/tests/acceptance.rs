//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! terminal. The process fails when the set of failing criteria differs from
//! `KNOWN_FAILURES`; a known failure that stops reproducing is also an error,
//! so the list cannot go stale silently.

use std::collections::BTreeSet;
use std::time::Instant;

use gisk_core::binom::binomial;
use gisk_core::continuity::{
    binomial_sequence, claim_reconstruction, claim_residual, path_thm41, rational, uniform_grid, verify_path,
    PathKind,
};
use gisk_core::dhym::{dhym_coefficients, expansion_signs, full_f_eval, phase_residual, scan_theta_window, DhymSpec};
use gisk_core::proplab::{run_named_suite, SuiteConfig, SuiteResult, SUITES};
use gisk_core::sampling::{case_rng, sample_stable, sample_toy_model};
use gisk_core::stability::{
    check_stability, first_level_root, is_c_subsolution_point, is_cy, phi, psi, scale_roots, tee, Status,
};
use gisk_core::symmfunc::h_eval;
use gisk_core::toymodel::{integrability_residual, intersection_numbers};
use gisk_core::{GiskCoeffs, RootTuple, Tee};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

const SEED: u64 = 42;

/// Criteria whose failure is expected and must reproduce.
///
/// 10: the upper bound `h_n ≤ −B/λ_n` (with `B = 1 − Σ c_k C(n−1,k−1) x_0^{k−n}`)
/// and the two aggregate lower bounds built on it fail on level-set points
/// with one very large eigenvalue, for `n ≥ 4`.
const KNOWN_FAILURES: [u32; 1] = [10];

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn summary(r: &SuiteResult) -> String {
    format!(
        "{}: {} cases, {} checks, {} failures",
        r.suite_name, r.cases_run, r.checks_run, r.failure_count
    )
}

fn failing_checks(r: &SuiteResult) -> String {
    let names: BTreeSet<&str> = r.failures.iter().map(|f| f.check.as_str()).collect();
    names.into_iter().collect::<Vec<_>>().join(",")
}

/// Stable sample; one in ten has its first gap shrunk to `1e-4` relative,
/// the closest approach at which strictness is still numerically decidable.
fn stable_sample(rng: &mut impl Rng, n: usize) -> (RootTuple, GiskCoeffs) {
    let (x, c) = sample_stable(rng, n, 0.0);
    if rng.random::<f64>() >= 0.1 {
        return (x, c);
    }
    let mut levels = x.levels();
    let x1 = x.x1();
    levels[0] = x1 + 1e-4 * x1.max(1.0);
    let x = RootTuple::from_levels(n, &levels).unwrap();
    let c = psi(&x).unwrap();
    (x, c)
}

fn round_trip() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 2..=8 {
        let mut rng = case_rng(SEED, "acceptance/roundtrip", n as u64);
        for _ in 0..1000 {
            let (x, c) = stable_sample(&mut rng, n);
            let c2 = psi(&phi(&c).unwrap()).unwrap();
            let x2 = phi(&psi(&x).unwrap()).unwrap();
            for (a, b) in c.d.iter().zip(&c2.d).chain(x.x.iter().zip(&x2.x)) {
                worst = worst.max(rel(*a, *b));
            }
            count += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        id: 1,
        title: "coefficient/root round trip",
        pass: worst <= 1e-8 && secs < 5.0,
        detail: format!("{count} samples, max rel error {worst:.2e}, {secs:.2}s"),
    }
}

fn cubic_closed_forms() -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let x1 = 0.3 * i as f64;
            let x0 = x1 + 0.05 + 0.4 * j as f64;
            let c = psi(&RootTuple::from_levels(3, &[x0, x1]).unwrap()).unwrap();
            worst = worst.max((c.coeff(1) - x1 * x1).abs() / (1.0 + x1 * x1));
            let c0 = x0.powi(3) - 3.0 * x0 * x1 * x1;
            worst = worst.max((c.coeff(0) - c0).abs() / (1.0 + x0.powi(3)));
            let back = phi(&c).unwrap();
            worst = worst.max((back.x1() - c.coeff(1).sqrt()).abs());
            worst = worst.max((back.x0() - x0).abs() / x0.max(1.0));
        }
    }
    Verdict {
        id: 2,
        title: "n = 3 closed forms",
        pass: worst <= 1e-10,
        detail: format!("100 grid points, max error {worst:.2e}"),
    }
}

/// Root levels with `x_l > x_{l+1}` exactly where `pattern[l−1]` holds.
fn tie_pattern(n: usize, pattern: &[bool], rng: &mut impl Rng) -> RootTuple {
    let mut levels = vec![0.0; n - 1];
    let mut v = 0.0;
    for l in (1..n - 1).rev() {
        if pattern[l - 1] {
            v += rng.random_range(0.25..2.0);
        }
        levels[l] = v;
    }
    levels[0] = v + rng.random_range(0.25..2.0);
    RootTuple::from_levels(n, &levels).unwrap()
}

fn strata_census() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 3..=7 {
        let mut rng = case_rng(SEED, "acceptance/strata", n as u64);
        let mut seen = BTreeSet::new();
        let mut by_dim = vec![0usize; n];
        for mask in 0..1u32 << (n - 2) {
            let pattern: Vec<bool> = (0..n - 2).map(|b| mask >> b & 1 == 1).collect();
            for _ in 0..5 {
                let c = psi(&tie_pattern(n, &pattern, &mut rng)).unwrap();
                let strata = check_stability(&c).strata.unwrap();
                ok &= strata.signature == pattern;
                if seen.insert(strata.signature.clone()) {
                    by_dim[strata.dimension] += 1;
                }
            }
        }
        let expected: Vec<usize> = (0..n).map(|l| if l == 0 { 0 } else { binomial(n - 2, l - 1) as usize }).collect();
        ok &= by_dim == expected && seen.len() == 1 << (n - 2);
        notes.push(format!("n={n}:{}", seen.len()));
    }
    Verdict {
        id: 3,
        title: "strata census",
        pass: ok,
        detail: format!("signatures {}", notes.join(" ")),
    }
}

/// `sup{t ≥ 1 : x_1(t·c) ≤ x_0(c)}` by bisection on the monotone first-level root.
fn tee_by_bisection(c: &GiskCoeffs, x0: f64) -> f64 {
    let (mut lo, mut hi) = (1.0, 2.0);
    while first_level_root(c, hi).unwrap() < x0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if first_level_root(c, mid).unwrap() < x0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn tee_function() -> Verdict {
    let (mut worst_oracle, mut worst_touch): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for n in 3..=6 {
        let mut rng = case_rng(SEED, "acceptance/tee", n as u64);
        while count < 200 * (n - 2) {
            let (x, c) = stable_sample(&mut rng, n);
            if is_cy(&c) {
                continue;
            }
            let t = tee(&c).unwrap().as_f64();
            worst_oracle = worst_oracle.max(rel(t, tee_by_bisection(&c, x.x0())));
            worst_touch = worst_touch.max((first_level_root(&c, t).unwrap() - x.x0()).abs());
            count += 1;
        }
    }
    let worked = tee(&GiskCoeffs::new(3, vec![1.0, 2.0]).unwrap()).unwrap();
    let worked_err = (worked.as_f64() - 4.0).abs();
    let cy_infinite = tee(&GiskCoeffs::new(4, vec![0.0, 0.0, 5.0]).unwrap()).unwrap() == Tee::Infinite;
    Verdict {
        id: 4,
        title: "scaling threshold T",
        pass: worst_oracle <= 1e-6 && worst_touch <= 1e-6 && worked_err <= 1e-10 && cy_infinite,
        detail: format!(
            "{count} cases, oracle rel {worst_oracle:.2e}, |x1(T)-x0| {worst_touch:.2e}, T((1,2)) error {worked_err:.1e}"
        ),
    }
}

fn scaling_law() -> Verdict {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for n in 2..=8 {
        let mut rng = case_rng(SEED, "acceptance/scaling", n as u64);
        for _ in 0..200 {
            let (x, c) = stable_sample(&mut rng, n);
            for i in 0..=60 {
                let t = 1.0 + 0.25 * i as f64;
                let xt = scale_roots(&c, t).unwrap().x0();
                worst = worst.min(xt - t.powf(1.0 / n as f64) * x.x0());
            }
            count += 1;
        }
    }
    Verdict {
        id: 5,
        title: "root growth under scaling",
        pass: worst >= -1e-8,
        detail: format!("{count} cases on t in [1,16], min margin {worst:.2e}"),
    }
}

struct PathOutcome {
    v6: Verdict,
    v8: Verdict,
}

fn continuity_paths() -> PathOutcome {
    let start = Instant::now();
    let grid = uniform_grid(101);
    let (mut models, mut passing) = (0, 0);
    let (mut path_ok, mut claim_ok) = (true, true);
    let (mut worst_scaling, mut worst_recon, mut min_claim): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for n in 3..=6 {
        let mut rng = case_rng(SEED, "acceptance/paths", n as u64);
        for _ in 0..50 {
            let s = sample_toy_model(&mut rng, n, 8);
            models += 1;
            let mu_ok = is_c_subsolution_point(&s.target, &s.model.mu).unwrap();
            let integ = integrability_residual(&s.model, &s.target).unwrap();
            let scale = s.model.mu.iter().product::<f64>().max(1.0);
            let report = verify_path(&s.target, &s.model, PathKind::Thm41, &grid).unwrap();
            let ok = mu_ok && integ.abs() <= 1e-9 * scale && report.all_pass && report.endpoint_check.t0_in_cy;
            path_ok &= ok;
            let omega = intersection_numbers(&s.model);
            for &t in &grid[1..] {
                let xt = phi(&path_thm41(&s.target, &omega, t).unwrap()).unwrap();
                for l in 1..n - 1 {
                    let want = t * s.roots.root(l);
                    worst_scaling = worst_scaling.max((xt.root(l) - want).abs() / want.max(1.0));
                }
            }
            if !ok {
                continue;
            }
            passing += 1;
            for &t in &grid[1..grid.len() - 1] {
                let a = claim_residual(&s.target, &omega, t);
                let b = claim_reconstruction(&s.target, &omega, t);
                min_claim = min_claim.min(a / omega.omega[0]);
                worst_recon = worst_recon.max((a - b).abs() / a.abs().max(b.abs()));
                claim_ok &= a > 0.0;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    PathOutcome {
        v6: Verdict {
            id: 6,
            title: "continuity path constraints",
            pass: path_ok && worst_scaling <= 1e-8 && secs < 30.0,
            detail: format!("{passing}/{models} models pass at 101 points, root scaling error {worst_scaling:.2e}, {secs:.1}s"),
        },
        v8: Verdict {
            id: 8,
            title: "claim positivity",
            pass: passing > 0 && claim_ok && worst_recon <= 1e-9,
            detail: format!(
                "{passing} models x 99 interior points, min claim/Omega_0 {min_claim:.3e}, reconstruction rel {worst_recon:.2e}"
            ),
        },
    }
}

fn binomial_identities() -> Verdict {
    let mut ok = true;
    let mut count = 0;
    let ts = [(1, 7), (1, 3), (1, 2), (9, 10), (0, 1), (1, 1), (5, 13)];
    for n in 2..=12 {
        for &(p, q) in &ts {
            let t = rational(p, q);
            let seq = binomial_sequence(n, &t).unwrap();
            ok &= seq.recurrence == seq.closed_form;
            let sum = seq.recurrence.iter().fold(BigRational::zero(), |acc, a| acc + a);
            let mut tail = BigRational::one();
            for _ in 0..n {
                tail *= BigRational::one() - &t;
            }
            ok &= sum == BigRational::one() - tail;
            count += 1;
        }
    }
    Verdict {
        id: 7,
        title: "binomial weight identities",
        pass: ok,
        detail: format!("{count} (n, t) pairs in exact rationals"),
    }
}

fn hadamard() -> Verdict {
    let cfg = SuiteConfig {
        master_seed: SEED,
        dims: vec![2, 3, 4],
        ..SuiteConfig::default()
    };
    let r = run_named_suite("hadamard", &cfg).unwrap();
    Verdict {
        id: 9,
        title: "unitary conjugation (Hadamard)",
        pass: r.passed,
        detail: summary(&r),
    }
}

fn h_bounds(levelset: &SuiteResult, gapbounds: &SuiteResult) -> Verdict {
    let c = GiskCoeffs::new(3, vec![1.0, 2.0]).unwrap();
    let h3 = h_eval(&c, &[3.0, 3.0, 1.0]).unwrap().grad[2];
    let worked = (h3 + 8.0 / 9.0).abs() <= 1e-12 && (-1.0..=-0.75).contains(&h3);
    let mut detail = format!("h_3(3,3,1) = {h3:.15}; {}; {}", summary(levelset), summary(gapbounds));
    if gapbounds.failure_count > 0 {
        detail += &format!(" [{}]", failing_checks(gapbounds));
    }
    Verdict {
        id: 10,
        title: "gradient bounds on the level set",
        pass: worked && levelset.passed && gapbounds.passed,
        detail,
    }
}

fn level_sets(levelset: &SuiteResult, convexity: &SuiteResult) -> Verdict {
    Verdict {
        id: 11,
        title: "level-set inequalities and convexity",
        pass: levelset.passed && convexity.passed,
        detail: format!("{}; {}", summary(levelset), summary(convexity)),
    }
}

fn dhym() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut zeros = 0;
    for n in 2..=4 {
        let mut rng = case_rng(SEED, "acceptance/dhym", n as u64);
        let mut done = 0;
        while done < 500 {
            let lam: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
            let phase: f64 = lam.iter().map(|l| l.atan()).sum();
            let on_locus = phase.rem_euclid(std::f64::consts::PI);
            let off_locus = (on_locus + rng.random_range(0.2..2.9)).rem_euclid(std::f64::consts::PI);
            let mut usable = true;
            for (theta, expect_zero) in [(on_locus, true), (off_locus, false)] {
                let Ok(full) = dhym_coefficients(DhymSpec { n, theta }) else {
                    usable = false;
                    continue;
                };
                if theta.cos().abs() < 1e-3 {
                    usable = false;
                    continue;
                }
                let (im, re) = expansion_signs(n);
                let lead = theta.cos() * im[n] as f64 - theta.sin() * re[n] as f64;
                let (f, mag) = full_f_eval(&full, &lam).unwrap();
                let direct = phase_residual(theta, &lam);
                worst = worst.max((f * lead - direct).abs() / (mag * lead.abs()).max(1.0));
                if expect_zero {
                    worst = worst.max(f.abs() / mag.max(1.0));
                    zeros += 1;
                }
            }
            if usable {
                done += 1;
            }
        }
    }
    let mut windows = Vec::new();
    let mut stable = true;
    for n in 2..=4 {
        let w = scan_theta_window(n, 90).unwrap();
        match w.stable_window {
            Some([a, b]) => {
                let inside = w.samples.iter().filter(|s| s.theta >= a && s.theta <= b);
                stable &= inside.clone().all(|s| s.status == Some(Status::StrictlyStable));
                windows.push(format!("n={n}: [{a:.4}, {b:.4}] ({} angles)", inside.count()));
            }
            None => {
                stable &= n == 2;
                windows.push(format!("n={n}: none"));
            }
        }
    }
    Verdict {
        id: 12,
        title: "dHYM expansion and stable window",
        pass: worst <= 1e-9 && stable,
        detail: format!("{zeros} locus points, max rel residual {worst:.2e}; windows {}", windows.join(", ")),
    }
}

fn run_all() -> Vec<SuiteResult> {
    let cfg = SuiteConfig {
        master_seed: SEED,
        ..SuiteConfig::default()
    };
    SUITES.iter().map(|name| run_named_suite(name, &cfg).unwrap()).collect()
}

fn main() {
    let mut verdicts = vec![round_trip(), cubic_closed_forms(), strata_census(), tee_function(), scaling_law()];
    let paths = continuity_paths();
    verdicts.push(paths.v6);
    verdicts.push(binomial_identities());
    verdicts.push(paths.v8);
    verdicts.push(hadamard());

    let first = run_all();
    let second = run_all();
    let by_name = |name: &str| first.iter().find(|r| r.suite_name == name).unwrap();
    verdicts.push(h_bounds(by_name("levelset"), by_name("gapbounds")));
    verdicts.push(level_sets(by_name("levelset"), by_name("convexity")));
    verdicts.push(dhym());
    let a = serde_json::to_vec(&first).unwrap();
    let b = serde_json::to_vec(&second).unwrap();
    verdicts.push(Verdict {
        id: 13,
        title: "determinism of the full property run",
        pass: a == b,
        detail: format!("{} suites, {} report bytes, identical: {}", first.len(), a.len(), a == b),
    });

    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let known = if !v.pass && KNOWN_FAILURES.contains(&v.id) { " (known)" } else { "" };
        println!("{tag} [{:>2}] {}{known}: {}", v.id, v.title, v.detail);
    }
    let failed: BTreeSet<u32> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    let expected: BTreeSet<u32> = KNOWN_FAILURES.into_iter().collect();
    println!(
        "acceptance: {} passed, {} failed, expected failures {:?}",
        verdicts.len() - failed.len(),
        failed.len(),
        expected
    );
    if failed != expected {
        eprintln!("unexpected outcome: failing {failed:?}, expected {expected:?}");
        std::process::exit(1);
    }
}

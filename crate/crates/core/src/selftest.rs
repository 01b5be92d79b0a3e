//! Reduced-size invariant suite. The census routine is injectable so that a
//! deliberately broken implementation can be shown to fail the oracle checks.

use crate::asymptotics::{
    count_changes, parseval_pattern_checks, signchange_criterion, Criterion, GeneralizedTrigSum,
    PatternCase, Term,
};
use crate::enumsearch::{average_roots, AverageMode};
use crate::oddcase::{derivative_parseval, group_and_decompose, DifferenceSinePoly, OddPattern};
use crate::polycore::{build_q, family_g, parse_signs, LittlewoodPoly};
use crate::rootcount::{
    count_cosine_roots, count_littlewood, grid_unimodular_sign_changes, ZCount,
};
use crate::spectral::{
    autocorrelation, coefficient_sign_change_test, fejer_riesz_factor, find_sign_change,
    max_coeff_error, SignChangeSearch, SignChangeVerdict, TrigPoly,
};
use crate::structure::{
    decompose, majority_pattern, min_blocks_dp, to_corollary_form, to_geometric,
};
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type CensusFn = fn(&LittlewoodPoly) -> ZCount;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Palindromic ±1 coefficient vector of degree `n`.
pub fn random_reciprocal<R: Rng>(rng: &mut R, n: usize) -> LittlewoodPoly {
    let mut c = vec![1i8; n + 1];
    for k in 0..=n / 2 {
        let s = if rng.gen::<bool>() { 1 } else { -1 };
        c[k] = s;
        c[n - k] = s;
    }
    LittlewoodPoly::new(c).expect("nonempty ±1 vector")
}

/// Valid odd pattern of length `d` (even, ≥ 4).
pub fn random_odd_pattern<R: Rng>(rng: &mut R, d: usize) -> OddPattern {
    let mut eps = vec![0i64; d];
    for m in (1..d / 2).step_by(2) {
        let s = if rng.gen::<bool>() { 1 } else { -1 };
        eps[m] = s;
        eps[d - m] = -s;
    }
    OddPattern::new(eps).expect("valid by construction")
}

/// Terms `(m, p)` with `ε_{m mod D} ≠ 0` and `|m| ≥ |m − pD|`.
pub fn random_terms<R: Rng>(
    rng: &mut R,
    pattern: &OddPattern,
    count: usize,
    p_max: i64,
) -> Vec<(i64, i64)> {
    let d = pattern.d() as i64;
    (0..count)
        .map(|_| {
            let p = rng.gen_range(1..=p_max);
            let mut m = rng.gen_range(p * d / 2 + 1..p * d / 2 + 2000);
            while pattern.eps_at(m) == 0 {
                m += 1;
            }
            (m, p)
        })
        .collect()
}

/// Sum `a_0 + 2Re(b e(ρu) + a e(u))` satisfying the sign-change criterion.
pub fn random_criterion_sum<R: Rng>(rng: &mut R) -> GeneralizedTrigSum {
    use crate::asymptotics::Frequency;
    let a0 = rng.gen_range(0.1..2.0);
    let al = a0 / 2.0 + rng.gen_range(0.0..1.0);
    let rho = rng.gen_range(0.15..0.85);
    let mid = if rng.gen::<bool>() {
        Frequency::Rational {
            num: (rho * 10.0f64).round().clamp(1.0, 9.0) as i64,
            den: 10,
        }
    } else {
        Frequency::Irrational {
            value: rho * 0.999 + 2f64.sqrt() * 1e-3,
            label: "rho".into(),
            pair: None,
        }
    };
    GeneralizedTrigSum::symmetric(
        a0,
        vec![
            Term {
                amp: Complex64::new(rng.gen_range(0.2..1.2), 0.0),
                freq: mid,
            },
            Term {
                amp: Complex64::new(al, 0.0),
                freq: Frequency::Rational { num: 1, den: 1 },
            },
        ],
    )
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

pub fn selftest(seed: u64) -> SelfTestReport {
    selftest_with(seed, count_littlewood)
}

pub fn selftest_with(seed: u64, census: CensusFn) -> SelfTestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let z = census(&parse_signs("+--+").expect("valid literal"));
    checks.push(check(
        "census_known_value",
        (
            z.distinct,
            z.with_multiplicity,
            z.at_plus_one,
            z.at_minus_one,
        ) == (2, 3, 2, 1),
        format!("+--+ -> {z:?}"),
    ));

    let mut mismatches = 0;
    let trials = 200;
    for _ in 0..trials {
        let n = rng.gen_range(1..=30);
        let p = random_reciprocal(&mut rng, n);
        let grid = grid_unimodular_sign_changes(&p, 1 << 14).expect("reciprocal");
        if census(&p).odd_multiplicity_count != grid {
            mismatches += 1;
        }
    }
    checks.push(check(
        "census_vs_grid_oracle",
        mismatches == 0,
        format!("{mismatches}/{trials} oracle mismatches"),
    ));

    let worst = (0..=40)
        .map(|n| {
            count_cosine_roots(&family_g(n))
                .map(|z| z.distinct)
                .unwrap_or(usize::MAX)
        })
        .max();
    checks.push(check(
        "family_g_two_roots",
        worst <= Some(2),
        format!("max distinct roots {worst:?}"),
    ));

    let mut ok = true;
    for n in 1..=10usize {
        let avg = average_roots(n, AverageMode::Exhaustive, 1)
            .ok()
            .and_then(|a| a.exact());
        ok &= avg.is_some_and(|a| a >= Ratio::new(n as u64, 4));
    }
    checks.push(check("average_at_least_quarter", ok, "N = 1..10".into()));

    let mut bad = 0;
    for _ in 0..100 {
        let d = rng.gen_range(1..=16);
        let even: Vec<i64> = (0..d)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        bad +=
            usize::from(!parseval_pattern_checks(&even, PatternCase::Even).is_ok_and(|r| r.holds));
        let odd: Vec<i64> = (0..2 * d)
            .map(|m| {
                if m % 2 == 0 {
                    0
                } else if rng.gen::<bool>() {
                    1
                } else {
                    -1
                }
            })
            .collect();
        bad += usize::from(!parseval_pattern_checks(&odd, PatternCase::Odd).is_ok_and(|r| r.holds));
    }
    checks.push(check(
        "parseval_patterns",
        bad == 0,
        format!("{bad} failures"),
    ));

    let mut worst = 0.0f64;
    let mut errors = 0;
    for _ in 0..30 {
        let n = rng.gen_range(1..=16);
        let d: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let w = autocorrelation(&d);
        match fejer_riesz_factor(&w, 1e-9) {
            Ok(f) => worst = worst.max(max_coeff_error(&autocorrelation(&f.d), &w)),
            Err(_) => errors += 1,
        }
    }
    checks.push(check(
        "fejer_riesz_round_trip",
        errors == 0 && worst <= 1e-8,
        format!("max error {worst:.3e}, {errors} errors"),
    ));

    let mut unconfirmed = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let c: Vec<f64> = (0..=n).map(|_| rng.gen_range(-4..=4) as f64).collect();
        let Ok(w) = TrigPoly::from_real(&c) else {
            continue;
        };
        if let Ok(SignChangeVerdict::HasSignChange) = coefficient_sign_change_test(&w) {
            if !matches!(find_sign_change(&w, 1 << 12), SignChangeSearch::Found(_)) {
                unconfirmed += 1;
            }
        }
    }
    checks.push(check(
        "sign_change_certified",
        unconfirmed == 0,
        format!("{unconfirmed} unconfirmed positives"),
    ));

    let mut bad = 0;
    for _ in 0..100 {
        let d = rng.gen_range(1..=6);
        let len = rng.gen_range(1..=120);
        let c: Vec<i64> = (0..len)
            .map(|_| if rng.gen_bool(0.8) { 1 } else { -1 })
            .collect();
        let aligned = rng.gen::<bool>();
        let dec = decompose(&c, d, aligned).expect("nonempty");
        bad += usize::from(dec.len() != min_blocks_dp(&c, d, aligned));
        if aligned {
            bad += usize::from(!to_geometric(&dec, &c).is_ok_and(|g| g.verify(&c)));
        }
        let eps = majority_pattern(&c, d);
        bad += usize::from(!to_corollary_form(&c, d, &eps).is_ok_and(|f| f.verify(&c)));
    }
    for _ in 0..50 {
        let n = 2 * rng.gen_range(1..40) + 1;
        let p = random_reciprocal(&mut rng, n);
        let q: Vec<i64> = build_q(&p)
            .expect("reciprocal")
            .coeffs()
            .iter()
            .map(|&x| x as i64)
            .collect();
        let d = 2 * rng.gen_range(1..=4);
        let eps = majority_pattern(&q, d);
        bad += usize::from(
            !to_corollary_form(&q, d, &eps).is_ok_and(|f| f.deltas_in_flip_set && f.verify(&q)),
        );
    }
    checks.push(check(
        "structure_optimal_and_exact",
        bad == 0,
        format!("{bad} failures"),
    ));

    let mut bad = 0;
    for _ in 0..50 {
        let d = [4usize, 8, 12][rng.gen_range(0..3)];
        let pattern = random_odd_pattern(&mut rng, d);
        let count = rng.gen_range(1..=5);
        let terms = random_terms(&mut rng, &pattern, count, 10);
        let s = DifferenceSinePoly::from_pattern(&pattern, &terms).expect("valid terms");
        let dec = group_and_decompose(&s, s.p_max(), 8);
        bad += usize::from(dec.reconstruction_error > 1e-10);
        for g in &dec.groups {
            bad += usize::from(!derivative_parseval(&pattern, g).is_ok_and(|id| id.lhs == id.rhs));
        }
        let scale: f64 = s.terms.iter().map(|t| t.m as f64).sum::<f64>().max(1.0);
        bad += (0..d)
            .filter(|&r| {
                s.eval(2.0 * std::f64::consts::PI * r as f64 / d as f64)
                    .abs()
                    > 1e-12 * scale
            })
            .count();
    }
    checks.push(check(
        "oddcase_identity",
        bad == 0,
        format!("{bad} failures"),
    ));

    let mut bad = 0;
    for _ in 0..10 {
        let h = random_criterion_sum(&mut rng);
        let ok = signchange_criterion(&h) == Ok(Criterion::InfinitelyMany)
            && matches!(
                (count_changes(&h, 0.0, 50.0, 256 * 50), count_changes(&h, 0.0, 100.0, 256 * 100)),
                (Ok(a), Ok(b)) if b > a
            );
        bad += usize::from(!ok);
    }
    checks.push(check(
        "signchange_growth",
        bad == 0,
        format!("{bad} failures"),
    ));

    SelfTestReport { seed, checks }
}

//! The acceptance suite: nine numbered criteria with frozen expected
//! values and per-criterion time limits.  The CLI `selftest` subcommand
//! and the `acceptance` integration test both run these.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{classify_case, verify_construction, CaseId, Group, PairFamily};
use crate::measures::{FiniteDistribution, SubgroupMixture};
use crate::quotient::Multiplier;
use crate::symmetry::{
    conditional_symmetry_check, difference_chain_check, enumerate_grid_solutions,
    fourier_symmetry_check, monte_carlo_symmetry, random_grid_distribution, subgroup_of_ones,
    support_subgroup, RealTable, DEFAULT_ENUMERATION_BUDGET,
};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
    pub details: Value,
}

fn r(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn two_tier(p: u64, level: u32, a: &BigRational) -> SubgroupMixture {
    SubgroupMixture::new(p, level, vec![(0, a.clone()), (1, BigRational::one() - a)])
        .expect("valid two-tier mixture")
}

// ---------------------------------------------------------------------------
// Criterion 1: two-tier characteristic table reproduction
// ---------------------------------------------------------------------------

fn criterion_1() -> (bool, Value) {
    let mut checked = 0usize;
    for p in [2u64, 3, 5] {
        for a in [r(1, 3), r(1, 2)] {
            for level in 1..=3u32 {
                let table = two_tier(p, level, &a).char_fn_exact();
                let values = table.exact_values().expect("mixture tables are exact");
                let tier = p.pow(level - 1);
                for y in 0..p.pow(level) {
                    let expected = if y == 0 {
                        BigRational::one()
                    } else if y % tier == 0 {
                        BigRational::one() - &a
                    } else {
                        BigRational::from_integer(0.into())
                    };
                    if values[y as usize] != expected {
                        return (
                            false,
                            json!({"p": p, "level": level, "y": y, "a": crate::ratio::format(&a)}),
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    (true, json!({ "values_checked": checked }))
}

// ---------------------------------------------------------------------------
// Criterion 2: power-case tier tables
// ---------------------------------------------------------------------------

fn criterion_2() -> (bool, Value) {
    let mut checked = 0usize;
    for k in [2u32, 3] {
        let level = k + 1;
        let order = 2u64.pow(level);
        for a in [r(1, 3), r(1, 2)] {
            let (mu1, mu2) =
                crate::constructions::construct_case(CaseId::Case2iv, 2, k as i64, &a, level)
                    .expect("admissible");
            let f = mu1.char_fn_exact();
            let g = mu2.char_fn_exact();
            let f = f.exact_values().unwrap();
            let g = g.exact_values().unwrap();
            let one_minus_a = BigRational::one() - &a;
            let zero = BigRational::from_integer(0.into());
            // membership in Z(2^j) at level n: multiples of 2^(n-j)
            let in_sub = |y: u64, j: u32| y % 2u64.pow(level - j) == 0;
            for y in 0..order {
                let expected_f = if in_sub(y, k - 1) {
                    BigRational::one()
                } else if in_sub(y, k) {
                    one_minus_a.clone()
                } else {
                    zero.clone()
                };
                let expected_g = if y == 0 {
                    BigRational::one()
                } else if in_sub(y, k - 1) {
                    one_minus_a.clone()
                } else {
                    zero.clone()
                };
                if f[y as usize] != expected_f || g[y as usize] != expected_g {
                    return (false, json!({"k": k, "y": y, "a": crate::ratio::format(&a)}));
                }
                checked += 2;
            }
        }
    }
    (true, json!({ "values_checked": checked }))
}

// ---------------------------------------------------------------------------
// Criterion 3: oracle equivalence on random instances
// ---------------------------------------------------------------------------

fn criterion_3() -> (bool, Value) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let primes = [2u64, 3, 5];
    let mut agreements = 0usize;
    for instance in 0..1000 {
        let p = primes[rng.random_range(0..primes.len())];
        let level = rng.random_range(1..=3u32);
        let order = p.pow(level);
        let t = Multiplier::from_residue(p, level, rng.random_range(0..order)).unwrap();
        let d = rng.random_range(1..=6u64);
        let mu1 = random_grid_distribution(p, level, d, &mut rng);
        let mu2 = random_grid_distribution(p, level, d, &mut rng);

        let fourier = fourier_symmetry_check(&mu1.char_fn(), &mu2.char_fn(), &t).unwrap();
        let conditional = conditional_symmetry_check(&mu1, &mu2, &t).unwrap();
        if fourier.holds != conditional.holds {
            return (
                false,
                json!({
                    "instance": instance, "p": p, "level": level, "t": t.t(),
                    "fourier_residual": fourier.max_residual,
                    "conditional_residual": conditional.max_residual,
                }),
            );
        }
        agreements += 1;
    }
    (true, json!({ "instances": agreements }))
}

// ---------------------------------------------------------------------------
// Criterion 4: the counterexample families verify end to end
// ---------------------------------------------------------------------------

fn criterion_4() -> (bool, Value) {
    let grid: Vec<(PairFamily, u64, i64, Vec<u64>)> = vec![
        (PairFamily::Case2i, 3, 0, vec![2]),
        (PairFamily::Case2i, 5, 0, vec![4]),
        (PairFamily::Case2ii, 2, 0, vec![1, 1]),
        (PairFamily::Case2iii, 2, 1, vec![1]),
        (PairFamily::Case2iv, 2, 2, vec![1]),
        (PairFamily::Case2iv, 2, 3, vec![1]),
        (PairFamily::Case2iv, 3, 2, vec![1]),
        (PairFamily::Case2iv, 3, 3, vec![1]),
        (PairFamily::Case2iv, 5, 2, vec![1]),
        (PairFamily::Case2iv, 5, 3, vec![1]),
    ];
    let mut verified = 0usize;
    for (family, p, k, c) in &grid {
        let level = k.unsigned_abs() as u32 + 1;
        for a in [r(1, 3), r(1, 2)] {
            let report = verify_construction(*family, *p, *k, c, &a, level).unwrap();
            if !report.passed {
                return (
                    false,
                    json!({
                        "family": family.as_str(), "p": p, "k": k,
                        "a": crate::ratio::format(&a), "report": serde_json::to_value(&report).unwrap(),
                    }),
                );
            }
            verified += 1;
        }
    }
    (true, json!({ "pairs_verified": verified }))
}

// ---------------------------------------------------------------------------
// Criterion 5: exhaustive classification at desk scale
// ---------------------------------------------------------------------------

fn criterion_5() -> (bool, Value) {
    // t = 2: five degenerate pairs with x1 + 2 x2 ≡ 0 plus the uniform pair
    let res2 = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
    let mut ok = res2.summary.total == 6
        && res2.summary.degenerate_pairs == 5
        && res2.summary.idempotent_pairs == 1
        && res2.summary.other == 0;
    let uniform = FiniteDistribution::haar_on_subgroup(5, 0, 1).unwrap();
    for pair in &res2.solutions {
        // every solution must be a pair of idempotent shifts, and must be
        // re-confirmed by the independent Fourier oracle
        ok &= pair.mu1.is_idempotent_shift() && pair.mu2.is_idempotent_shift();
        let t = Multiplier::from_residue(5, 1, 2).unwrap();
        ok &= fourier_symmetry_check(&pair.mu1.char_fn(), &pair.mu2.char_fn(), &t)
            .unwrap()
            .holds;
        if pair.mu1.is_degenerate() && pair.mu2.is_degenerate() {
            let x1 = pair.mu1.support()[0];
            let x2 = pair.mu2.support()[0];
            ok &= (x1 + 2 * x2) % 5 == 0;
        } else {
            ok &= pair.mu1 == uniform && pair.mu2 == uniform;
        }
    }

    // t = 1: exactly the five degenerate pairs with x1 + x2 ≡ 0
    let res1 = enumerate_grid_solutions(5, 1, 1, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
    ok &= res1.summary.total == 5 && res1.summary.degenerate_pairs == 5;
    for pair in &res1.solutions {
        let t = Multiplier::from_residue(5, 1, 1).unwrap();
        ok &= fourier_symmetry_check(&pair.mu1.char_fn(), &pair.mu2.char_fn(), &t)
            .unwrap()
            .holds;
        ok &= pair.mu1.is_degenerate() && pair.mu2.is_degenerate();
        let x1 = pair.mu1.support()[0];
        let x2 = pair.mu2.support()[0];
        ok &= (x1 + x2) % 5 == 0;
    }

    (
        ok,
        json!({
            "multiplier_2": serde_json::to_value(res2.summary).unwrap(),
            "multiplier_1": serde_json::to_value(res1.summary).unwrap(),
        }),
    )
}

// ---------------------------------------------------------------------------
// Criterion 6: reference pairs at the classification boundary
// ---------------------------------------------------------------------------

fn criterion_6() -> (bool, Value) {
    let k1 = verify_construction(PairFamily::K1Pair, 3, 1, &[1], &r(1, 2), 2).unwrap();
    let mut ok = k1.passed && !k1.mu1_idempotent && k1.mu2_idempotent;

    let mut haar_reports = Vec::new();
    for c0 in [2u64, 3] {
        let report = verify_construction(PairFamily::HaarPair, 5, 0, &[c0], &r(1, 2), 2).unwrap();
        ok &= report.passed && report.mu1_idempotent && report.mu2_idempotent;
        haar_reports.push(json!({"c0": c0, "t": report.t, "passed": report.passed}));
    }
    (
        ok,
        json!({
            "k1_pair": {"passed": k1.passed, "mu1_idempotent": k1.mu1_idempotent, "mu2_idempotent": k1.mu2_idempotent},
            "haar_pair": haar_reports,
        }),
    )
}

// ---------------------------------------------------------------------------
// Criterion 7: structural properties of enumerated solutions
// ---------------------------------------------------------------------------

fn criterion_7() -> (bool, Value) {
    let mut ok = true;
    let mut pairs_checked = 0usize;
    for t in [2u64, 1] {
        let res = enumerate_grid_solutions(5, 1, t, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        for pair in &res.solutions {
            let s1 = pair.mu1.symmetrize();
            let s2 = pair.mu2.symmetrize();
            let f = s1.char_fn();
            let g = s2.char_fn();
            // symmetrized solutions have nonnegative tables; their
            // ones-set must be a subgroup
            let ones = subgroup_of_ones(&f, &g).unwrap();
            ok &= ones.is_subgroup;
            // nondegenerate solutions must concentrate their spectrum on
            // a proper subgroup
            if !(s1.is_degenerate() && s2.is_degenerate()) {
                ok &= support_subgroup(&f, &g).unwrap().is_proper();
            }
            pairs_checked += 1;
        }
    }

    // the three-step reduction's step identities are algebraic: they hold
    // on arbitrary non-solution inputs
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let values1: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 2.0).collect();
        let values2: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 2.0).collect();
        let psi1 = RealTable::new(3, 2, values1).unwrap();
        let psi2 = RealTable::new(3, 2, values2).unwrap();
        let t = rng.random_range(0..9u64);
        let (k1, k2, k3) = (
            rng.random_range(0..9u64),
            rng.random_range(0..9u64),
            rng.random_range(0..9u64),
        );
        let report = difference_chain_check(&psi1, &psi2, t, k1, k2, k3).unwrap();
        for resid in report.step_identity_residuals {
            worst = worst.max(resid);
        }
    }
    ok &= worst <= 1e-12;

    (
        ok,
        json!({ "solution_pairs_checked": pairs_checked, "worst_step_identity_residual": worst }),
    )
}

// ---------------------------------------------------------------------------
// Criterion 8: classifier exhaustiveness
// ---------------------------------------------------------------------------

/// Independent restatement of the branch conditions used to audit the
/// classifier.
fn matching_branches(p: u64, k: i64, c0: u64, c1: u64) -> Vec<CaseId> {
    let mut hits = Vec::new();
    if p > 2 && k == 0 && c0 != p - 1 {
        hits.push(CaseId::Case1i);
    }
    if p == 2 && k == 0 && c0 == 1 && c1 == 0 {
        hits.push(CaseId::Case1ii);
    }
    if p > 2 && k.unsigned_abs() == 1 {
        hits.push(CaseId::Case1iii);
    }
    if p > 2 && k == 0 && c0 == p - 1 {
        hits.push(CaseId::Case2i);
    }
    if p == 2 && k == 0 && c0 == 1 && c1 == 1 {
        hits.push(CaseId::Case2ii);
    }
    if p == 2 && k.unsigned_abs() == 1 {
        hits.push(CaseId::Case2iii);
    }
    if k.unsigned_abs() >= 2 {
        hits.push(CaseId::Case2iv);
    }
    hits
}

fn criterion_8() -> (bool, Value) {
    let mut combos = 0usize;
    for p in [2u64, 3, 5, 7, 11, 13] {
        for k in -4i64..=4 {
            for c0 in 1..p {
                for c1 in 0..p {
                    let branches = matching_branches(p, k, c0, c1);
                    if branches.len() != 1 {
                        return (false, json!({"p": p, "k": k, "c0": c0, "c1": c1}));
                    }
                    let label = classify_case(Group::Omega, p, k, &[c0, c1]).unwrap();
                    if label.case != branches[0] {
                        return (false, json!({"p": p, "k": k, "c0": c0, "c1": c1}));
                    }
                    combos += 1;
                }
            }
        }
    }

    // hand-labeled fixtures from the case table
    let fixtures: Vec<(u64, i64, Vec<u64>, CaseId, bool)> = vec![
        (3, 0, vec![2], CaseId::Case2i, false),
        (2, 0, vec![1, 0], CaseId::Case1ii, false),
        (5, 1, vec![1], CaseId::Case1iii, false),
        (2, 3, vec![1], CaseId::Case2iv, false),
        (3, 0, vec![1], CaseId::Case1i, true),
        (5, 0, vec![2], CaseId::Case1i, false),
        (5, 0, vec![4], CaseId::Case2i, false),
        (2, 0, vec![1, 1], CaseId::Case2ii, false),
        (2, -1, vec![1], CaseId::Case2iii, false),
        (7, -4, vec![3], CaseId::Case2iv, false),
    ];
    for (p, k, c, expected, degenerate) in &fixtures {
        let label = classify_case(Group::Omega, *p, *k, c).unwrap();
        if label.case != *expected || label.degenerate_subcase != *degenerate {
            return (false, json!({"fixture": [p, k, c]}));
        }
    }
    (true, json!({ "combinations": combos, "fixtures": fixtures.len() }))
}

// ---------------------------------------------------------------------------
// Criterion 9: Monte Carlo sanity
// ---------------------------------------------------------------------------

fn criterion_9() -> (bool, Value) {
    // symmetric construction at p=3, a=1/2, level 1, t = 2
    let mu = two_tier(3, 1, &r(1, 2)).to_distribution();
    let t = Multiplier::from_residue(3, 1, 2).unwrap();
    let symmetric_stat = monte_carlo_symmetry(&mu, &mu, &t, 100_000, 42).unwrap();

    // the failing point-mass pair from the oracle examples
    let pm = FiniteDistribution::point_mass(3, 1, 1).unwrap();
    let t1 = Multiplier::from_residue(3, 1, 1).unwrap();
    let asymmetric_stat = monte_carlo_symmetry(&pm, &pm, &t1, 100_000, 42).unwrap();

    let ok = symmetric_stat < 0.02 && asymmetric_stat >= 0.5;
    (
        ok,
        json!({ "symmetric_statistic": symmetric_stat, "asymmetric_statistic": asymmetric_stat }),
    )
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

const CRITERIA: [(u32, &str, u128, fn() -> (bool, Value)); 9] = [
    (1, "two-tier characteristic table reproduction", 1_000, criterion_1),
    (2, "power-case tier tables", 1_000, criterion_2),
    (3, "oracle equivalence on 1000 random instances", 60_000, criterion_3),
    (4, "counterexample families verify exactly", 10_000, criterion_4),
    (5, "exhaustive grid classification at p=5", 120_000, criterion_5),
    (6, "boundary reference pairs", 1_000, criterion_6),
    (7, "structural properties and difference chain", 30_000, criterion_7),
    (8, "classifier exhaustiveness", 1_000, criterion_8),
    (9, "Monte Carlo sanity", 30_000, criterion_9),
];

pub fn run_criterion(id: u32) -> Option<CriterionReport> {
    let (id, name, limit_ms, f) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (mut passed, details) = f();
    let elapsed_ms = start.elapsed().as_millis();
    passed &= elapsed_ms <= *limit_ms;
    Some(CriterionReport { id: *id, name, passed, elapsed_ms, limit_ms: *limit_ms, details })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().map(|c| run_criterion(c.0).expect("known id")).collect()
}

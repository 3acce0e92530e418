//! The verification engine for the conditional-symmetry functional
//! equation `f(u+v) g(u+tv) = f(u-v) g(u-tv)` on the level-n dual group.
//!
//! Two independent oracles decide whether a pair (μ1, μ2) solves the
//! equation for a multiplier t:
//!
//! * the Fourier route checks the equation on characteristic-function
//!   tables, exactly when both tables are exact;
//! * the conditional route never touches characteristic functions: it
//!   builds the exact joint law of `(L1, L2) = (ξ1+ξ2, ξ1+t·ξ2)` and
//!   requires it to equal the joint law of `(L1, -L2)`.
//!
//! On a finite group both statements are equivalent, which is what the
//! cross-check exercises.  The module also provides the subgroup/support
//! structure probes, the finite-difference machinery, exhaustive grid
//! enumeration of solutions, and a seeded Monte Carlo statistic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{CharTable, CharValues, FiniteDistribution, CHAR_TOL};
use crate::padic::{checked_group_order, Automorphism};
use crate::quotient::{add_mod, mul_mod, neg_mod, Multiplier, Subgroup};
use crate::ratio;

/// Verdict of a symmetry check.  Exact paths report a residual of 0 when
/// the equation holds and the magnitude of the worst violation otherwise;
/// float paths compare against [`CHAR_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub holds: bool,
    pub max_residual: f64,
    pub witness: Option<(u64, u64)>,
}

// ---------------------------------------------------------------------------
// Case normalization
// ---------------------------------------------------------------------------

/// Reduce to a nonnegative power of p: the symmetry of `L2 = ξ1 + αξ2`
/// given `L1` is unchanged by replacing α with its inverse, provided the
/// two coefficient slots swap roles.  Returns the normalized automorphism
/// and whether the slots were swapped.
pub fn normalize_case(alpha: &Automorphism) -> Result<(Automorphism, bool)> {
    if alpha.k() < 0 {
        Ok((alpha.inverse()?, true))
    } else {
        Ok((alpha.clone(), false))
    }
}

// ---------------------------------------------------------------------------
// Fourier-side check
// ---------------------------------------------------------------------------

fn check_multiplier(f: &CharTable, t: &Multiplier) -> Result<()> {
    if f.p() != t.p() {
        return Err(Error::PrimeMismatch(f.p(), t.p()));
    }
    if f.level() != t.level() {
        return Err(Error::LevelMismatch(f.level(), t.level()));
    }
    Ok(())
}

/// Verify `f(u+v) g(u+tv) = f(u-v) g(u-tv)` over all pairs (u, v).
///
/// Runs exactly when both tables are exact, otherwise on floats with
/// tolerance [`CHAR_TOL`].  The witness is the first worst-violation pair
/// in (u, v) scan order.
pub fn fourier_symmetry_check(f: &CharTable, g: &CharTable, t: &Multiplier) -> Result<SymmetryReport> {
    f.check_compatible(g)?;
    check_multiplier(f, t)?;
    let order = f.order();

    if let (CharValues::Exact(fv), CharValues::Exact(gv)) = (f.values(), g.values()) {
        let mut max_residual = BigRational::zero();
        let mut witness = None;
        for u in 0..order {
            for v in 0..order {
                let tv = t.apply(v);
                let lhs = &fv[add_mod(u, v, order) as usize] * &gv[add_mod(u, tv, order) as usize];
                let rhs = &fv[add_mod(u, neg_mod(v, order), order) as usize]
                    * &gv[add_mod(u, neg_mod(tv, order), order) as usize];
                let residual = (lhs - rhs).abs();
                if residual > max_residual {
                    max_residual = residual;
                    witness = Some((u, v));
                }
            }
        }
        let holds = max_residual.is_zero();
        return Ok(SymmetryReport {
            holds,
            max_residual: ratio::to_f64(&max_residual),
            witness: if holds { None } else { witness },
        });
    }

    let mut max_residual = 0.0f64;
    let mut witness = None;
    for u in 0..order {
        for v in 0..order {
            let tv = t.apply(v);
            let lhs = f.value_float(add_mod(u, v, order)) * g.value_float(add_mod(u, tv, order));
            let rhs = f.value_float(add_mod(u, neg_mod(v, order), order))
                * g.value_float(add_mod(u, neg_mod(tv, order), order));
            let residual = (lhs - rhs).norm();
            if residual > max_residual {
                max_residual = residual;
                witness = Some((u, v));
            }
        }
    }
    let holds = max_residual <= CHAR_TOL;
    Ok(SymmetryReport { holds, max_residual, witness: if holds { None } else { witness } })
}

// ---------------------------------------------------------------------------
// Conditional-distribution oracle
// ---------------------------------------------------------------------------

/// Probability-side oracle: the joint law `J(l, s) = P(L1 = l, L2 = s)`
/// must satisfy `J(l, s) = J(l, -s)` exactly.  This never evaluates a
/// characteristic function.
pub fn conditional_symmetry_check(
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
    t: &Multiplier,
) -> Result<SymmetryReport> {
    if mu1.p() != mu2.p() {
        return Err(Error::PrimeMismatch(mu1.p(), mu2.p()));
    }
    if mu1.level() != mu2.level() {
        return Err(Error::LevelMismatch(mu1.level(), mu2.level()));
    }
    if mu1.p() != t.p() {
        return Err(Error::PrimeMismatch(mu1.p(), t.p()));
    }
    if mu1.level() != t.level() {
        return Err(Error::LevelMismatch(mu1.level(), t.level()));
    }
    let order = mu1.order();

    let mut joint: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
    for x1 in 0..order {
        let p1 = mu1.prob(x1);
        if p1.is_zero() {
            continue;
        }
        for x2 in 0..order {
            let p2 = mu2.prob(x2);
            if p2.is_zero() {
                continue;
            }
            let l = add_mod(x1, x2, order);
            let s = add_mod(x1, t.apply(x2), order);
            *joint.entry((l, s)).or_insert_with(BigRational::zero) += p1 * p2;
        }
    }

    let zero = BigRational::zero();
    let mut max_residual = BigRational::zero();
    let mut witness = None;
    for (&(l, s), mass) in &joint {
        let reflected = joint.get(&(l, neg_mod(s, order))).unwrap_or(&zero);
        let residual = (mass - reflected).abs();
        if residual > max_residual {
            max_residual = residual;
            witness = Some((l, s));
        }
    }
    let holds = max_residual.is_zero();
    Ok(SymmetryReport {
        holds,
        max_residual: ratio::to_f64(&max_residual),
        witness: if holds { None } else { witness },
    })
}

/// Run both oracles on the same instance and report whether their
/// verdicts agree: the float Fourier route on `char_fn` tables against the
/// exact conditional route.
pub fn oracles_agree(
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
    t: &Multiplier,
) -> Result<bool> {
    let fourier = fourier_symmetry_check(&mu1.char_fn(), &mu2.char_fn(), t)?;
    let conditional = conditional_symmetry_check(mu1, mu2, t)?;
    Ok(fourier.holds == conditional.holds)
}

/// Everything the CLI `check` command reports for a distribution pair and
/// an automorphism: the normalized multiplier, whether the slots were
/// swapped, and both oracle verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub t: u64,
    pub swapped: bool,
    pub fourier: SymmetryReport,
    pub conditional: SymmetryReport,
    pub agree: bool,
    pub holds: bool,
}

/// Normalize the automorphism, derive the induced multiplier and run both
/// symmetry oracles on the (possibly swapped) pair.
pub fn check_pair_with_automorphism(
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
    alpha: &Automorphism,
    level: u32,
) -> Result<PairCheck> {
    let (normalized, swapped) = normalize_case(alpha)?;
    let t = crate::quotient::induced_endomorphism(&normalized, level)?;
    let (first, second) = if swapped { (mu2, mu1) } else { (mu1, mu2) };
    let fourier = fourier_symmetry_check(&first.char_fn(), &second.char_fn(), &t)?;
    let conditional = conditional_symmetry_check(first, second, &t)?;
    Ok(PairCheck {
        t: t.t(),
        swapped,
        agree: fourier.holds == conditional.holds,
        holds: conditional.holds,
        fourier,
        conditional,
    })
}

// ---------------------------------------------------------------------------
// Structure probes
// ---------------------------------------------------------------------------

/// The set `E = { y : f(y) = g(y) = 1 }` and whether it is a subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OnesSet {
    pub elements: Vec<u64>,
    pub is_subgroup: bool,
}

impl OnesSet {
    /// For a subgroup of a cyclic p-group, recover its canonical label.
    pub fn as_subgroup(&self, p: u64, level: u32) -> Option<Subgroup> {
        if !self.is_subgroup {
            return None;
        }
        let mut exponent = 0u32;
        let mut size = 1u64;
        while size < self.elements.len() as u64 {
            size *= p;
            exponent += 1;
        }
        if size != self.elements.len() as u64 {
            return None;
        }
        Subgroup::new(p, level, exponent).ok()
    }
}

fn is_one(table: &CharTable, y: u64) -> bool {
    match table.values() {
        CharValues::Exact(v) => v[y as usize].is_one(),
        CharValues::Float(v) => (v[y as usize] - Complex64::new(1.0, 0.0)).norm() <= CHAR_TOL,
    }
}

fn is_zero_at(table: &CharTable, y: u64) -> bool {
    match table.values() {
        CharValues::Exact(v) => v[y as usize].is_zero(),
        CharValues::Float(v) => v[y as usize].norm() <= CHAR_TOL,
    }
}

/// Compute `E = { y : f(y) = g(y) = 1 }` (exactly on exact tables, with
/// tolerance on float tables) and test closure under addition.
pub fn subgroup_of_ones(f: &CharTable, g: &CharTable) -> Result<OnesSet> {
    f.check_compatible(g)?;
    let order = f.order();
    let elements: Vec<u64> = (0..order).filter(|&y| is_one(f, y) && is_one(g, y)).collect();
    let member: std::collections::BTreeSet<u64> = elements.iter().copied().collect();
    let is_subgroup = member.contains(&0)
        && elements
            .iter()
            .all(|&a| elements.iter().all(|&b| member.contains(&add_mod(a, b, order))));
    Ok(OnesSet { elements, is_subgroup })
}

/// The smallest subgroup containing the supports of both tables.  In a
/// cyclic p-group this is generated by the gcd of the support residues,
/// so it is always one of the canonical subgroups; the whole group comes
/// back when the supports generate everything.
pub fn support_subgroup(f: &CharTable, g: &CharTable) -> Result<Subgroup> {
    f.check_compatible(g)?;
    let order = f.order();
    let p = f.p();
    let level = f.level();
    let mut gcd = order;
    for y in 0..order {
        if !is_zero_at(f, y) || !is_zero_at(g, y) {
            gcd = num_integer::gcd(gcd, y);
        }
    }
    // gcd divides p^level, so it is p^j; the subgroup it generates has
    // p^(level - j) elements.
    let mut j = 0u32;
    let mut rest = gcd;
    while rest > 1 {
        rest /= p;
        j += 1;
    }
    Subgroup::new(p, level, level - j)
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// A real-valued table on a cyclic p-group (a subgroup of the dual,
/// addressed by its own indices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealTable {
    p: u64,
    level: u32,
    values: Vec<f64>,
}

impl RealTable {
    pub fn new(p: u64, level: u32, values: Vec<f64>) -> Result<Self> {
        let order = checked_group_order(p, level)? as usize;
        if values.len() != order {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                order,
                values.len()
            )));
        }
        Ok(Self { p, level, values })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.level)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, y: u64) -> f64 {
        self.values[(y % self.order()) as usize]
    }
}

/// The finite difference `Δ_h ψ(y) = ψ(y+h) - ψ(y)` with group addition.
pub fn finite_difference(psi: &RealTable, h: u64) -> RealTable {
    let order = psi.order();
    let values = (0..order)
        .map(|y| psi.value(add_mod(y, h % order, order)) - psi.value(y))
        .collect();
    RealTable { p: psi.p, level: psi.level, values }
}

///`-log` of a strictly positive characteristic-function table, the form
/// the difference chain consumes.
pub fn neg_log_table(table: &CharTable) -> Result<RealTable> {
    let order = table.order();
    let mut values = Vec::with_capacity(order as usize);
    for y in 0..order {
        let v = table.value_float(y);
        if v.re <= 0.0 || v.im.abs() > CHAR_TOL {
            return Err(Error::NonpositiveTableEntry { index: y as usize, value: v.re });
        }
        values.push(-v.re.ln());
    }
    Ok(RealTable { p: table.p(), level: table.level(), values })
}

/// Shift lengths produced by the three substitution steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainShifts {
    pub l11: u64,
    pub l12: u64,
    pub l13: u64,
    pub l21: u64,
    pub l22: u64,
    pub l31: u64,
}

/// Residuals of the difference-chain derivation.
///
/// `step_identity_residuals` measure algebraic identities that hold for
/// arbitrary inputs: each substitution/subtraction step must equal the
/// difference of base-equation residuals at shifted arguments.
/// `eq_residual_max` and `triple_difference_max` vanish exactly when the
/// tables come from `-log` of a strictly positive solution pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceChainReport {
    pub shifts: ChainShifts,
    pub eq_residual_max: f64,
    pub step_identity_residuals: [f64; 3],
    pub triple_difference_max: f64,
}

/// Run the three-step finite-difference reduction of the additive form
/// `ψ1(u+v) + ψ2(u+tv) - ψ1(u-v) - ψ2(u-tv) = 0` for shift parameters
/// (k1, k2, k3), reporting the residual of the base equation, the
/// step-identity residuals, and the final triple difference of ψ1.
pub fn difference_chain_check(
    psi1: &RealTable,
    psi2: &RealTable,
    t: u64,
    k1: u64,
    k2: u64,
    k3: u64,
) -> Result<DifferenceChainReport> {
    if psi1.p != psi2.p {
        return Err(Error::PrimeMismatch(psi1.p, psi2.p));
    }
    if psi1.level != psi2.level {
        return Err(Error::LevelMismatch(psi1.level, psi2.level));
    }
    let order = psi1.order();
    let t = t % order;
    let (k1, k2, k3) = (k1 % order, k2 % order, k3 % order);

    // step shifts: h1 - t·k1 = 0, h2 - k2 = 0, h3 + t·k3 = 0
    let h1 = mul_mod(t, k1, order);
    let h2 = k2;
    let h3 = neg_mod(mul_mod(t, k3, order), order);
    let shifts = ChainShifts {
        l11: add_mod(mul_mod(t, k1, order), k1, order),
        l12: mul_mod(2 % order, mul_mod(t, k1, order), order),
        l13: add_mod(mul_mod(t, k1, order), neg_mod(k1, order), order),
        l21: mul_mod(2 % order, k2, order),
        l22: add_mod(k2, mul_mod(t, k2, order), order),
        l31: add_mod(k3, neg_mod(mul_mod(t, k3, order), order), order),
    };

    let base = |u: u64, v: u64| {
        let tv = mul_mod(t, v, order);
        psi1.value(add_mod(u, v, order)) + psi2.value(add_mod(u, tv, order))
            - psi1.value(add_mod(u, neg_mod(v, order), order))
            - psi2.value(add_mod(u, neg_mod(tv, order), order))
    };

    let d1_l11 = finite_difference(psi1, shifts.l11);
    let d2_l12 = finite_difference(psi2, shifts.l12);
    let d1_l13 = finite_difference(psi1, shifts.l13);
    let step1 = |u: u64, v: u64| {
        let tv = mul_mod(t, v, order);
        d1_l11.value(add_mod(u, v, order)) + d2_l12.value(add_mod(u, tv, order))
            - d1_l13.value(add_mod(u, neg_mod(v, order), order))
    };

    let d1_l21_l11 = finite_difference(&d1_l11, shifts.l21);
    let d2_l22_l12 = finite_difference(&d2_l12, shifts.l22);
    let step2 = |u: u64, v: u64| {
        let tv = mul_mod(t, v, order);
        d1_l21_l11.value(add_mod(u, v, order)) + d2_l22_l12.value(add_mod(u, tv, order))
    };

    let d1_triple = finite_difference(&d1_l21_l11, shifts.l31);
    let step3 = |u: u64, v: u64| d1_triple.value(add_mod(u, v, order));

    let mut eq_residual_max = 0.0f64;
    let mut step_identity_residuals = [0.0f64; 3];
    let mut triple_difference_max = 0.0f64;
    for u in 0..order {
        for v in 0..order {
            eq_residual_max = eq_residual_max.max(base(u, v).abs());

            let s1_from_base = base(add_mod(u, h1, order), add_mod(v, k1, order)) - base(u, v);
            step_identity_residuals[0] =
                step_identity_residuals[0].max((step1(u, v) - s1_from_base).abs());

            let s2_from_step1 = step1(add_mod(u, h2, order), add_mod(v, k2, order)) - step1(u, v);
            step_identity_residuals[1] =
                step_identity_residuals[1].max((step2(u, v) - s2_from_step1).abs());

            let s3_from_step2 = step2(add_mod(u, h3, order), add_mod(v, k3, order)) - step2(u, v);
            step_identity_residuals[2] =
                step_identity_residuals[2].max((step3(u, v) - s3_from_step2).abs());

            triple_difference_max = triple_difference_max.max(step3(u, v).abs());
        }
    }

    Ok(DifferenceChainReport {
        shifts,
        eq_residual_max,
        step_identity_residuals,
        triple_difference_max,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive grid enumeration
// ---------------------------------------------------------------------------

/// Default cap on the number of grid distributions per side.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000;

/// Structural class of a solution pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairClass {
    #[serde(rename = "degenerate-pair")]
    DegeneratePair,
    #[serde(rename = "idempotent-pair")]
    IdempotentPair,
    #[serde(rename = "other")]
    Other,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionPair {
    pub mu1: FiniteDistribution,
    pub mu2: FiniteDistribution,
    pub class: PairClass,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolutionSummary {
    pub degenerate_pairs: usize,
    pub idempotent_pairs: usize,
    pub other: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationResult {
    pub grid_denominator: u64,
    pub solutions: Vec<SolutionPair>,
    pub summary: SolutionSummary,
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// All probability vectors of length `cells` with entries j/d, in
/// lexicographic order.
fn grid_vectors(cells: usize, d: u64) -> Vec<Vec<BigRational>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; cells];
    fn rec(current: &mut Vec<u64>, idx: usize, remaining: u64, out: &mut Vec<Vec<u64>>) {
        if idx + 1 == current.len() {
            current[idx] = remaining;
            out.push(current.clone());
            return;
        }
        for v in 0..=remaining {
            current[idx] = v;
            rec(current, idx + 1, remaining - v, out);
        }
    }
    let mut raw = Vec::new();
    rec(&mut current, 0, d, &mut raw);
    for counts in raw {
        out.push(
            counts
                .iter()
                .map(|&c| BigRational::new(c.into(), d.into()))
                .collect(),
        );
    }
    out
}

/// Exhaustively test every ordered pair of grid distributions against the
/// exact conditional-symmetry oracle.
///
/// Solutions come back sorted lexicographically by probability vectors and
/// classified via the idempotent-shift test, and the result is identical
/// for every `jobs` setting.
pub fn enumerate_grid_solutions(
    p: u64,
    level: u32,
    t: u64,
    d: u64,
    budget: u128,
    jobs: usize,
) -> Result<EnumerationResult> {
    let order = checked_group_order(p, level)?;
    if d == 0 {
        return Err(Error::InvalidParameter("grid denominator must be positive".into()));
    }
    let candidates = binomial(d as u128 + order as u128 - 1, order as u128 - 1)
        .unwrap_or(u128::MAX);
    if candidates > budget {
        return Err(Error::BudgetExceeded { candidates, budget });
    }

    let vectors = grid_vectors(order as usize, d);
    let dists: Vec<FiniteDistribution> = vectors
        .into_iter()
        .map(|probs| FiniteDistribution::new(p, level, probs).expect("grid vector sums to 1"))
        .collect();
    let t = Multiplier::from_residue(p, level, t)?;

    let jobs = jobs.max(1).min(dists.len().max(1));
    let chunk = dists.len().div_ceil(jobs);
    let mut hits: Vec<(usize, usize)> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for worker in 0..jobs {
            let lo = worker * chunk;
            let hi = ((worker + 1) * chunk).min(dists.len());
            let dists = &dists;
            let t = &t;
            handles.push(scope.spawn(move || {
                let mut local = Vec::new();
                for i in lo..hi {
                    for j in 0..dists.len() {
                        let verdict = conditional_symmetry_check(&dists[i], &dists[j], t)
                            .expect("compatible by construction");
                        if verdict.holds {
                            local.push((i, j));
                        }
                    }
                }
                local
            }));
        }
        for handle in handles {
            hits.extend(handle.join().expect("worker panicked"));
        }
    });
    hits.sort_unstable();

    let mut solutions = Vec::with_capacity(hits.len());
    let mut summary = SolutionSummary::default();
    for (i, j) in hits {
        let mu1 = dists[i].clone();
        let mu2 = dists[j].clone();
        let class = if mu1.is_degenerate() && mu2.is_degenerate() {
            summary.degenerate_pairs += 1;
            PairClass::DegeneratePair
        } else if mu1.is_idempotent_shift() && mu2.is_idempotent_shift() {
            summary.idempotent_pairs += 1;
            PairClass::IdempotentPair
        } else {
            summary.other += 1;
            PairClass::Other
        };
        summary.total += 1;
        solutions.push(SolutionPair { mu1, mu2, class });
    }

    Ok(EnumerationResult { grid_denominator: d, solutions, summary })
}

// ---------------------------------------------------------------------------
// Monte Carlo statistic
// ---------------------------------------------------------------------------

/// Sample `(ξ1, ξ2)` pairs, build the empirical joint law of
/// `(L1, L2) = (ξ1+ξ2, ξ1+t·ξ2)` and return the worst total-variation
/// distance between an empirical conditional of `L2` and its reflection.
/// Deterministic for a fixed seed.
pub fn monte_carlo_symmetry(
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
    t: &Multiplier,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if mu1.p() != mu2.p() || mu1.p() != t.p() {
        return Err(Error::PrimeMismatch(mu1.p(), mu2.p().max(t.p())));
    }
    if mu1.level() != mu2.level() || mu1.level() != t.level() {
        return Err(Error::LevelMismatch(mu1.level(), mu2.level().max(t.level())));
    }
    let order = mu1.order();

    let cumulative = |mu: &FiniteDistribution| -> Vec<f64> {
        let mut acc = 0.0;
        let mut cum: Vec<f64> = mu.probs().iter().map(|q| {
            acc += ratio::to_f64(q);
            acc
        }).collect();
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        cum
    };
    let cum1 = cumulative(mu1);
    let cum2 = cumulative(mu2);
    let draw = |cum: &[f64], u: f64| cum.partition_point(|&c| c <= u) as u64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![vec![0u64; order as usize]; order as usize];
    for _ in 0..samples {
        let x1 = draw(&cum1, rng.random::<f64>());
        let x2 = draw(&cum2, rng.random::<f64>());
        let l = add_mod(x1, x2, order);
        let s = add_mod(x1, t.apply(x2), order);
        counts[l as usize][s as usize] += 1;
    }

    let mut statistic = 0.0f64;
    for row in counts.iter() {
        let total: u64 = row.iter().sum();
        if total == 0 {
            continue;
        }
        let mut tv = 0.0f64;
        for s in 0..order {
            let a = row[s as usize] as f64;
            let b = row[neg_mod(s, order) as usize] as f64;
            tv += (a - b).abs();
        }
        statistic = statistic.max(tv / (2.0 * total as f64));
    }
    Ok(statistic)
}

/// Random grid distribution: `d` unit masses dropped uniformly into the
/// p^level cells.  Shared by the randomized oracle-equivalence suites.
pub fn random_grid_distribution<R: Rng>(
    p: u64,
    level: u32,
    d: u64,
    rng: &mut R,
) -> FiniteDistribution {
    let order = p.pow(level);
    let mut counts = vec![0u64; order as usize];
    for _ in 0..d {
        counts[rng.random_range(0..order) as usize] += 1;
    }
    FiniteDistribution::new(
        p,
        level,
        counts
            .iter()
            .map(|&c| BigRational::new(c.into(), d.into()))
            .collect(),
    )
    .expect("counts sum to d")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::SubgroupMixture;
    use crate::padic::PAdicInt;
    use crate::quotient::induced_endomorphism;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn r(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn mult(p: u64, level: u32, t: u64) -> Multiplier {
        Multiplier::from_residue(p, level, t).unwrap()
    }

    fn two_tier(p: u64, level: u32, a: BigRational) -> SubgroupMixture {
        let rest = BigRational::one() - &a;
        SubgroupMixture::new(p, level, vec![(0, a), (1, rest)]).unwrap()
    }

    #[test]
    fn normalize_flips_negative_powers() {
        let a = Automorphism::from_digits(3, 2, &[2], 3).unwrap();
        let (norm, swapped) = normalize_case(&a).unwrap();
        assert!(!swapped);
        assert_eq!(norm, a);

        let b = Automorphism::from_digits(3, -1, &[2], 2).unwrap();
        let (norm, swapped) = normalize_case(&b).unwrap();
        assert!(swapped);
        assert_eq!(norm.k(), 1);
        assert_eq!(norm.c(), &PAdicInt::from_digits(3, &[2, 1]).unwrap());

        let c = Automorphism::from_digits(5, 0, &[3], 1).unwrap();
        assert_eq!(normalize_case(&c).unwrap(), (c, false));
    }

    #[test]
    fn fourier_all_ones_holds_for_any_multiplier() {
        let table = CharTable::all_ones(3, 2).unwrap();
        for t in 0..9 {
            let report = fourier_symmetry_check(&table, &table, &mult(3, 2, t)).unwrap();
            assert!(report.holds);
            assert_eq!(report.max_residual, 0.0);
            assert!(report.witness.is_none());
        }
    }

    #[test]
    fn fourier_negation_case_holds_exactly() {
        // two-tier table with t ≡ -1 at level 1
        let table = two_tier(3, 1, r(1, 2)).char_fn_exact();
        let report = fourier_symmetry_check(&table, &table, &mult(3, 1, 2)).unwrap();
        assert!(report.holds);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn fourier_point_mass_fails_with_witness() {
        let table = FiniteDistribution::point_mass(3, 1, 1).unwrap().char_fn();
        let report = fourier_symmetry_check(&table, &table, &mult(3, 1, 1)).unwrap();
        assert!(!report.holds);
        assert_eq!(report.witness, Some((0, 1)));
        assert!(report.max_residual > 1.0);
    }

    #[test]
    fn conditional_self_inverse_point_mass_holds() {
        // x = 1 on ℤ/4: L2 ≡ 2 ≡ -2
        let pm = FiniteDistribution::point_mass(2, 2, 1).unwrap();
        let report = conditional_symmetry_check(&pm, &pm, &mult(2, 2, 1)).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn conditional_point_mass_fails_on_odd_group() {
        let pm = FiniteDistribution::point_mass(3, 1, 1).unwrap();
        let report = conditional_symmetry_check(&pm, &pm, &mult(3, 1, 1)).unwrap();
        assert!(!report.holds);
        assert!(report.witness.is_some());
        assert!((report.max_residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_power_case_pair_holds() {
        // k=2 construction at p=2, n=3, a=1/2, t = 4·s_3 = 4
        let mu1 = SubgroupMixture::new(2, 3, vec![(1, r(1, 2)), (2, r(1, 2))])
            .unwrap()
            .to_distribution();
        let mu2 = SubgroupMixture::new(2, 3, vec![(0, r(1, 2)), (1, r(1, 2))])
            .unwrap()
            .to_distribution();
        let alpha = Automorphism::from_digits(2, 2, &[1], 3).unwrap();
        let t = induced_endomorphism(&alpha, 3).unwrap();
        assert_eq!(t.t(), 4);
        let report = conditional_symmetry_check(&mu1, &mu2, &t).unwrap();
        assert!(report.holds, "residual {}", report.max_residual);
        // and the Fourier route agrees on the exact tables
        let f = SubgroupMixture::new(2, 3, vec![(1, r(1, 2)), (2, r(1, 2))]).unwrap().char_fn_exact();
        let g = SubgroupMixture::new(2, 3, vec![(0, r(1, 2)), (1, r(1, 2))]).unwrap().char_fn_exact();
        assert!(fourier_symmetry_check(&f, &g, &t).unwrap().holds);
    }

    #[test]
    fn oracle_equivalence_known_instances() {
        let haar = FiniteDistribution::haar_on_subgroup(3, 0, 1).unwrap();
        assert!(oracles_agree(&haar, &haar, &mult(3, 1, 2)).unwrap());

        let pm = FiniteDistribution::point_mass(3, 1, 1).unwrap();
        assert!(oracles_agree(&pm, &pm, &mult(3, 1, 1)).unwrap());

        let mu = two_tier(3, 1, r(1, 2)).to_distribution();
        assert!(oracles_agree(&mu, &mu, &mult(3, 1, 2)).unwrap());
    }

    #[test]
    fn check_pair_handles_negative_power_by_swapping() {
        // k=-1 with the power-case pair given in reverse order
        let mu1 = SubgroupMixture::new(3, 2, vec![(0, r(1, 2)), (1, r(1, 2))])
            .unwrap()
            .to_distribution();
        let mu2 = FiniteDistribution::haar_on_subgroup(3, 0, 2).unwrap();
        // α = p^{-1}: normalized inverse has k=1, and slots swap, giving
        // the k=1 reference pair (two-tier, uniform)
        let alpha = Automorphism::from_digits(3, -1, &[1], 2).unwrap();
        let report = check_pair_with_automorphism(&mu2, &mu1, &alpha, 2).unwrap();
        assert!(report.swapped);
        assert!(report.holds);
        assert!(report.agree);
    }

    #[test]
    fn ones_set_examples() {
        let ones = CharTable::all_ones(3, 1).unwrap();
        let e = subgroup_of_ones(&ones, &ones).unwrap();
        assert_eq!(e.elements, vec![0, 1, 2]);
        assert!(e.is_subgroup);
        assert_eq!(e.as_subgroup(3, 1).unwrap().order_exponent(), 1);

        // two-tier pair has E = {0}
        let table = two_tier(3, 2, r(1, 2)).char_fn_exact();
        let e = subgroup_of_ones(&table, &table).unwrap();
        assert_eq!(e.elements, vec![0]);
        assert!(e.is_subgroup);

        // a non-subgroup ones-set, cooked by hand
        let mut values = vec![r(0, 1); 9];
        values[0] = r(1, 1);
        values[1] = r(1, 1);
        let f = CharTable::from_exact(3, 2, values).unwrap();
        let e = subgroup_of_ones(&f, &f).unwrap();
        assert_eq!(e.elements, vec![0, 1]);
        assert!(!e.is_subgroup);
        assert!(e.as_subgroup(3, 2).is_none());
    }

    #[test]
    fn support_subgroup_examples() {
        // Haar pair: support {0}
        let uniform = FiniteDistribution::haar_on_subgroup(5, 0, 1).unwrap().char_fn();
        let m = support_subgroup(&uniform, &uniform).unwrap();
        assert!(m.is_trivial());
        assert!(m.is_proper());

        // two-tier at n=2: support is the order-p subgroup
        let table = two_tier(3, 2, r(1, 2)).char_fn_exact();
        let m = support_subgroup(&table, &table).unwrap();
        assert_eq!(m.order_exponent(), 1);
        assert!(m.is_proper());

        // degenerate pair: full group
        let pm = FiniteDistribution::point_mass(3, 2, 1).unwrap().char_fn();
        let m = support_subgroup(&pm, &pm).unwrap();
        assert!(!m.is_proper());
    }

    #[test]
    fn finite_difference_examples() {
        let constant = RealTable::new(3, 2, vec![5.0; 9]).unwrap();
        assert!(finite_difference(&constant, 4).values().iter().all(|&v| v == 0.0));

        // ψ(y) = y² lifted to reals on ℤ/9, h = 3
        let squares = RealTable::new(3, 2, (0..9).map(|y| (y * y) as f64).collect()).unwrap();
        let d = finite_difference(&squares, 3);
        for y in 0..9u64 {
            let expected = if y < 6 {
                (6 * y + 9) as f64
            } else {
                ((y as i64 - 6).pow(2) - (y as i64).pow(2)) as f64
            };
            assert_eq!(d.value(y), expected, "y={y}");
        }

        // additive-mod-1 table: differences are constant mod 1
        let a = 2u64;
        let frac = RealTable::new(
            3,
            2,
            (0..9).map(|y| (a * y % 9) as f64 / 9.0).collect(),
        )
        .unwrap();
        let d = finite_difference(&frac, 3);
        let base = d.value(0).rem_euclid(1.0);
        for y in 0..9 {
            let diff = (d.value(y).rem_euclid(1.0) - base).abs();
            assert!(diff < 1e-12 || (diff - 1.0).abs() < 1e-12, "y={y}");
        }
    }

    #[test]
    fn neg_log_rejects_zeros() {
        let table = two_tier(3, 2, r(1, 2)).char_fn_exact();
        assert!(matches!(
            neg_log_table(&table),
            Err(Error::NonpositiveTableEntry { .. })
        ));
        assert!(neg_log_table(&CharTable::all_ones(3, 2).unwrap()).is_ok());
    }

    #[test]
    fn difference_chain_zero_tables() {
        let zero = RealTable::new(3, 1, vec![0.0; 3]).unwrap();
        let report = difference_chain_check(&zero, &zero, 2, 1, 1, 1).unwrap();
        assert_eq!(report.eq_residual_max, 0.0);
        assert_eq!(report.step_identity_residuals, [0.0; 3]);
        assert_eq!(report.triple_difference_max, 0.0);
    }

    #[test]
    fn difference_chain_shift_lengths() {
        let zero = RealTable::new(5, 1, vec![0.0; 5]).unwrap();
        let report = difference_chain_check(&zero, &zero, 2, 1, 1, 1).unwrap();
        // t=2: l11 = 3, l12 = 4, l13 = 1, l21 = 2, l22 = 3, l31 = 4 (mod 5)
        assert_eq!(
            report.shifts,
            ChainShifts { l11: 3, l12: 4, l13: 1, l21: 2, l22: 3, l31: 4 }
        );
    }

    #[test]
    fn difference_chain_step_identities_hold_for_arbitrary_tables() {
        // not solutions, just arbitrary data
        let psi1 = RealTable::new(3, 2, (0..9).map(|y| ((y * 37 % 11) as f64).sin()).collect()).unwrap();
        let psi2 = RealTable::new(3, 2, (0..9).map(|y| ((y * 17 % 13) as f64).cos()).collect()).unwrap();
        for t in [1u64, 2, 3, 5] {
            let report = difference_chain_check(&psi1, &psi2, t, 2, 5, 1).unwrap();
            for (i, resid) in report.step_identity_residuals.iter().enumerate() {
                assert!(*resid < 1e-12, "t={t} step {i}: {resid}");
            }
            // arbitrary tables do not satisfy the base equation
            assert!(report.eq_residual_max > 1e-6);
        }
    }

    #[test]
    fn difference_chain_vanishes_on_positive_solution() {
        // f = g strictly positive solves the equation when t ≡ -1:
        // both sides are f(u+v)f(u-v)
        let mu = FiniteDistribution::new(3, 1, vec![r(1, 2), r(1, 4), r(1, 4)]).unwrap();
        let t = mult(3, 1, 2);
        assert!(conditional_symmetry_check(&mu, &mu, &t).unwrap().holds);
        let table = mu.char_fn();
        let psi = neg_log_table(&table).unwrap();
        let report = difference_chain_check(&psi, &psi, 2, 1, 2, 1).unwrap();
        assert!(report.eq_residual_max < 1e-12);
        assert!(report.triple_difference_max < 1e-12);

        // all-ones solution
        let ones = neg_log_table(&CharTable::all_ones(3, 1).unwrap()).unwrap();
        let report = difference_chain_check(&ones, &ones, 1, 1, 1, 1).unwrap();
        assert_eq!(report.triple_difference_max, 0.0);
    }

    #[test]
    fn enumeration_five_adic_multiplier_two() {
        let result = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        assert_eq!(result.summary.total, 6);
        assert_eq!(result.summary.degenerate_pairs, 5);
        assert_eq!(result.summary.idempotent_pairs, 1);
        assert_eq!(result.summary.other, 0);
        // degenerate solutions satisfy x1 + 2·x2 ≡ 0 mod 5
        for pair in &result.solutions {
            match pair.class {
                PairClass::DegeneratePair => {
                    let x1 = pair.mu1.support()[0];
                    let x2 = pair.mu2.support()[0];
                    assert_eq!((x1 + 2 * x2) % 5, 0);
                }
                PairClass::IdempotentPair => {
                    assert_eq!(pair.mu1, FiniteDistribution::haar_on_subgroup(5, 0, 1).unwrap());
                    assert_eq!(pair.mu2, FiniteDistribution::haar_on_subgroup(5, 0, 1).unwrap());
                }
                PairClass::Other => panic!("unexpected class"),
            }
        }
    }

    #[test]
    fn enumeration_five_adic_identity_multiplier() {
        let result = enumerate_grid_solutions(5, 1, 1, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        assert_eq!(result.summary.total, 5);
        assert_eq!(result.summary.degenerate_pairs, 5);
        for pair in &result.solutions {
            let x1 = pair.mu1.support()[0];
            let x2 = pair.mu2.support()[0];
            assert_eq!((x1 + x2) % 5, 0);
        }
    }

    #[test]
    fn enumeration_mod_two_includes_uniform_pair() {
        let result = enumerate_grid_solutions(2, 1, 1, 2, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        // on ℤ/2 with t=1, L2 = L1 identically, so every pair solves
        assert_eq!(result.summary.total, 9);
        assert_eq!(result.summary.other, 0);
        let uniform = FiniteDistribution::haar_on_subgroup(2, 0, 1).unwrap();
        assert!(result
            .solutions
            .iter()
            .any(|pair| pair.mu1 == uniform && pair.mu2 == uniform));
        assert!(result.summary.degenerate_pairs < result.summary.total);
    }

    #[test]
    fn enumeration_respects_budget() {
        let err = enumerate_grid_solutions(5, 2, 2, 5, 100, 1).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn enumeration_deterministic_across_jobs() {
        let one = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        let four = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 4).unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&four).unwrap()
        );
    }

    #[test]
    fn enumerated_solutions_stay_solutions_after_symmetrization() {
        let result = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        let t = mult(5, 1, 2);
        for pair in &result.solutions {
            let s1 = pair.mu1.symmetrize();
            let s2 = pair.mu2.symmetrize();
            assert!(conditional_symmetry_check(&s1, &s2, &t).unwrap().holds);
        }
    }

    #[test]
    fn enumerated_solutions_with_nonnegative_tables_have_subgroup_ones() {
        let result = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
        for pair in &result.solutions {
            let f = pair.mu1.char_fn();
            let g = pair.mu2.char_fn();
            let nonneg = |table: &CharTable| {
                (0..table.order()).all(|y| {
                    let v = table.value_float(y);
                    v.im.abs() <= CHAR_TOL && v.re >= -CHAR_TOL
                })
            };
            if nonneg(&f) && nonneg(&g) {
                assert!(subgroup_of_ones(&f, &g).unwrap().is_subgroup);
            }
        }
    }

    #[test]
    fn monte_carlo_asymmetric_pair_saturates() {
        let pm = FiniteDistribution::point_mass(3, 1, 1).unwrap();
        let stat = monte_carlo_symmetry(&pm, &pm, &mult(3, 1, 1), 1000, 7).unwrap();
        assert_eq!(stat, 1.0);
    }

    #[test]
    fn monte_carlo_symmetric_pair_shrinks_with_samples() {
        let mu = two_tier(3, 1, r(1, 2)).to_distribution();
        let t = mult(3, 1, 2);
        let small = monte_carlo_symmetry(&mu, &mu, &t, 1_000, 42).unwrap();
        let large = monte_carlo_symmetry(&mu, &mu, &t, 100_000, 42).unwrap();
        assert!(large < small, "small={small} large={large}");
        assert!(large < 0.02, "large={large}");
    }

    #[test]
    fn monte_carlo_deterministic_for_fixed_seed() {
        let mu = two_tier(3, 1, r(1, 2)).to_distribution();
        let t = mult(3, 1, 2);
        let a = monte_carlo_symmetry(&mu, &mu, &t, 10_000, 9).unwrap();
        let b = monte_carlo_symmetry(&mu, &mu, &t, 10_000, 9).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn oracle_equivalence_randomized(
            p in prop::sample::select(vec![2u64, 3, 5]),
            n in 1u32..3,
            t in 0u64..30,
            seed in 0u64..10_000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu1 = random_grid_distribution(p, n, 4, &mut rng);
            let mu2 = random_grid_distribution(p, n, 4, &mut rng);
            let t = mult(p, n, t);
            prop_assert!(oracles_agree(&mu1, &mu2, &t).unwrap());
        }

        #[test]
        fn step_identities_randomized(
            seed in 0u64..10_000,
            t in 0u64..9,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values1: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 2.0).collect();
            let values2: Vec<f64> = (0..9).map(|_| rng.random::<f64>() * 2.0).collect();
            let psi1 = RealTable::new(3, 2, values1).unwrap();
            let psi2 = RealTable::new(3, 2, values2).unwrap();
            let k1 = rng.random_range(0..9);
            let k2 = rng.random_range(0..9);
            let k3 = rng.random_range(0..9);
            let report = difference_chain_check(&psi1, &psi2, t, k1, k2, k3).unwrap();
            for resid in report.step_identity_residuals {
                prop_assert!(resid < 1e-12);
            }
        }
    }
}

//! The case classifier for automorphisms `p^k c` and the explicit
//! distribution families attached to each case.
//!
//! Cases 1(i)-1(iii) are the classification branches (idempotent shifts /
//! degenerate / one idempotent); cases 2(i)-2(iv) admit non-idempotent
//! solution pairs built from two-tier Haar mixtures.  Two reference pairs
//! sharpen the boundary: the identical Haar pair (idempotent but not
//! degenerate solutions exist in the shift-classification case) and the
//! k=1 pair (exactly one idempotent marginal).

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::SubgroupMixture;
use crate::padic::{is_prime, Automorphism};
use crate::quotient::induced_endomorphism;
use crate::ratio;
use crate::symmetry::{
    conditional_symmetry_check, fourier_symmetry_check, normalize_case, SymmetryReport,
};

/// Which group the random variables live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    /// The p-adic numbers; automorphisms are `p^k c` with any `k`.
    Omega,
    /// The p-adic integers; automorphisms are units, so `k = 0`.
    Delta,
}

/// Case identifier in the main classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "1i")]
    Case1i,
    #[serde(rename = "1ii")]
    Case1ii,
    #[serde(rename = "1iii")]
    Case1iii,
    #[serde(rename = "2i")]
    Case2i,
    #[serde(rename = "2ii")]
    Case2ii,
    #[serde(rename = "2iii")]
    Case2iii,
    #[serde(rename = "2iv")]
    Case2iv,
}

impl CaseId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseId::Case1i => "1i",
            CaseId::Case1ii => "1ii",
            CaseId::Case1iii => "1iii",
            CaseId::Case2i => "2i",
            CaseId::Case2ii => "2ii",
            CaseId::Case2iii => "2iii",
            CaseId::Case2iv => "2iv",
        }
    }
}

/// The unique case label of an admissible `(group, p, k, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseLabel {
    pub group: Group,
    pub case: CaseId,
    /// Set on case 1(i) when `c_0 = 1`: only degenerate solutions.
    pub degenerate_subcase: bool,
    pub p: u64,
    pub k: i64,
    pub c0: u64,
    pub c1: u64,
}

/// Classify `(group, p, k, c)` into its case.  Total and single-valued
/// over every prime p, every k (k = 0 for Delta) and every unit digit
/// pattern; digits beyond those given are zero.
pub fn classify_case(group: Group, p: u64, k: i64, c_digits: &[u64]) -> Result<CaseLabel> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    for &d in c_digits {
        if d >= p {
            return Err(Error::DigitOutOfRange { digit: d, p });
        }
    }
    let c0 = c_digits.first().copied().unwrap_or(0);
    let c1 = c_digits.get(1).copied().unwrap_or(0);
    if c0 == 0 {
        return Err(Error::NotAUnit);
    }
    if group == Group::Delta && k != 0 {
        return Err(Error::InvalidParameter(
            "automorphisms of the p-adic integers have k = 0".into(),
        ));
    }

    let label = |case: CaseId, degenerate_subcase: bool| CaseLabel {
        group,
        case,
        degenerate_subcase,
        p,
        k,
        c0,
        c1,
    };

    let case = match (k.unsigned_abs(), p) {
        (0, 2) => {
            // c0 = 1 is forced; split on c1
            if c1 == 0 {
                label(CaseId::Case1ii, false)
            } else {
                label(CaseId::Case2ii, false)
            }
        }
        (0, _) => {
            if c0 == p - 1 {
                label(CaseId::Case2i, false)
            } else {
                label(CaseId::Case1i, c0 == 1)
            }
        }
        (1, 2) => label(CaseId::Case2iii, false),
        (1, _) => label(CaseId::Case1iii, false),
        (_, _) => label(CaseId::Case2iv, false),
    };
    Ok(case)
}

// ---------------------------------------------------------------------------
// Solution-pair families
// ---------------------------------------------------------------------------

/// Families of explicit solution pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairFamily {
    #[serde(rename = "2i")]
    Case2i,
    #[serde(rename = "2ii")]
    Case2ii,
    #[serde(rename = "2iii")]
    Case2iii,
    #[serde(rename = "2iv")]
    Case2iv,
    /// Identical Haar distributions on the whole group.
    #[serde(rename = "haar-pair")]
    HaarPair,
    /// Two-tier mixture against the full Haar distribution, for k = 1.
    #[serde(rename = "k1-pair")]
    K1Pair,
}

impl PairFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            PairFamily::Case2i => "2i",
            PairFamily::Case2ii => "2ii",
            PairFamily::Case2iii => "2iii",
            PairFamily::Case2iv => "2iv",
            PairFamily::HaarPair => "haar-pair",
            PairFamily::K1Pair => "k1-pair",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2i" => Ok(PairFamily::Case2i),
            "2ii" => Ok(PairFamily::Case2ii),
            "2iii" => Ok(PairFamily::Case2iii),
            "2iv" => Ok(PairFamily::Case2iv),
            "haar-pair" => Ok(PairFamily::HaarPair),
            "k1-pair" => Ok(PairFamily::K1Pair),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }

    /// Expected idempotent-shift verdicts for the built pair (normalized
    /// coordinates, k >= 0).
    pub fn expected_idempotent(&self) -> (bool, bool) {
        match self {
            PairFamily::HaarPair => (true, true),
            PairFamily::K1Pair => (false, true),
            _ => (false, false),
        }
    }

    /// The identifier of the characteristic-function tier pattern the
    /// family reproduces, for provenance blocks.
    pub fn tier_pattern(&self) -> &'static str {
        match self {
            PairFamily::Case2i | PairFamily::Case2ii => "29a",
            PairFamily::Case2iii | PairFamily::Case2iv | PairFamily::K1Pair => "20b",
            PairFamily::HaarPair => "1a",
        }
    }
}

fn check_weight(a: &BigRational) -> Result<()> {
    let one = BigRational::one();
    if a <= &BigRational::from_integer(0.into()) || a >= &one {
        return Err(Error::InvalidParameter(format!(
            "mixture weight {} must lie strictly between 0 and 1",
            ratio::format(a)
        )));
    }
    Ok(())
}

fn two_tier(p: u64, level: u32, m_hi: u32, m_lo: u32, a: &BigRational) -> Result<SubgroupMixture> {
    SubgroupMixture::new(
        p,
        level,
        vec![(m_hi, a.clone()), (m_lo, BigRational::one() - a)],
    )
}

fn full_haar(p: u64, level: u32) -> Result<SubgroupMixture> {
    SubgroupMixture::new(p, level, vec![(0, BigRational::one())])
}

/// Build the solution pair of a case-2 family at an explicit level.
///
/// The pair is emitted for the normalized automorphism (`k >= 0`); passing
/// a negative `k` yields the same pair with the slots swapped, matching
/// the role exchange performed by [`normalize_case`].  Requires
/// `level >= |k| + 1`.
pub fn construct_case(
    case: CaseId,
    p: u64,
    k: i64,
    a: &BigRational,
    level: u32,
) -> Result<(SubgroupMixture, SubgroupMixture)> {
    let family = match case {
        CaseId::Case2i => PairFamily::Case2i,
        CaseId::Case2ii => PairFamily::Case2ii,
        CaseId::Case2iii => PairFamily::Case2iii,
        CaseId::Case2iv => PairFamily::Case2iv,
        other => {
            return Err(Error::CaseMismatch(format!(
                "case {} has no counterexample construction",
                other.as_str()
            )))
        }
    };
    construct_family(family, p, k, a, level)
}

/// Build the pair of any family, including the two reference pairs.
pub fn construct_family(
    family: PairFamily,
    p: u64,
    k: i64,
    a: &BigRational,
    level: u32,
) -> Result<(SubgroupMixture, SubgroupMixture)> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    check_weight(a)?;
    let kk = k.unsigned_abs();
    if u64::from(level) < kk + 1 {
        return Err(Error::InvalidParameter(format!(
            "level {level} too small: need at least |k| + 1 = {}",
            kk + 1
        )));
    }
    let kk = kk as u32;

    let pair = match family {
        PairFamily::Case2i => {
            if p <= 2 || k != 0 {
                return Err(Error::CaseMismatch("2i needs p > 2 and k = 0".into()));
            }
            let mu = two_tier(p, level, 0, 1, a)?;
            (mu.clone(), mu)
        }
        PairFamily::Case2ii => {
            if p != 2 || k != 0 {
                return Err(Error::CaseMismatch("2ii needs p = 2 and k = 0".into()));
            }
            let mu = two_tier(p, level, 0, 1, a)?;
            (mu.clone(), mu)
        }
        PairFamily::Case2iii => {
            if p != 2 || kk != 1 {
                return Err(Error::CaseMismatch("2iii needs p = 2 and |k| = 1".into()));
            }
            (two_tier(p, level, 1, 2, a)?, two_tier(p, level, 0, 1, a)?)
        }
        PairFamily::Case2iv => {
            if kk < 2 {
                return Err(Error::CaseMismatch("2iv needs |k| >= 2".into()));
            }
            (two_tier(p, level, kk - 1, kk, a)?, two_tier(p, level, 0, kk - 1, a)?)
        }
        PairFamily::HaarPair => {
            // needs some unit digit c0 outside {1, p-1}, which exists
            // only for p >= 5
            if p < 5 || k != 0 {
                return Err(Error::CaseMismatch(
                    "haar-pair needs k = 0 and p >= 5 (no admissible c0 below)".into(),
                ));
            }
            (full_haar(p, level)?, full_haar(p, level)?)
        }
        PairFamily::K1Pair => {
            if p <= 2 || kk != 1 {
                return Err(Error::CaseMismatch("k1-pair needs p > 2 and |k| = 1".into()));
            }
            (two_tier(p, level, 0, 1, a)?, full_haar(p, level)?)
        }
    };

    if k < 0 {
        Ok((pair.1, pair.0))
    } else {
        Ok(pair)
    }
}

// ---------------------------------------------------------------------------
// End-to-end verification
// ---------------------------------------------------------------------------

/// Full verification record for one constructed pair.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub family: PairFamily,
    pub p: u64,
    pub k: i64,
    pub level: u32,
    pub a: String,
    pub t: u64,
    pub swapped: bool,
    pub fourier: SymmetryReport,
    pub conditional: SymmetryReport,
    pub mu1_idempotent: bool,
    pub mu2_idempotent: bool,
    pub expected_idempotent: (bool, bool),
    pub symmetry_ok: bool,
    pub idempotency_ok: bool,
    pub passed: bool,
}

fn family_admits(family: PairFamily, p: u64, k: i64, c0: u64, c1: u64) -> Result<()> {
    let ok = match family {
        PairFamily::Case2i => p > 2 && k == 0 && c0 == p - 1,
        PairFamily::Case2ii => p == 2 && k == 0 && c0 == 1 && c1 == 1,
        PairFamily::Case2iii => p == 2 && k.unsigned_abs() == 1,
        PairFamily::Case2iv => k.unsigned_abs() >= 2,
        PairFamily::HaarPair => p > 2 && k == 0 && c0 != 1 && c0 != p - 1,
        PairFamily::K1Pair => p > 2 && k.unsigned_abs() == 1,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::CaseMismatch(format!(
            "automorphism (p={p}, k={k}, c0={c0}, c1={c1}) is not admissible for family {}",
            family.as_str()
        )))
    }
}

/// Build the family's pair for the given automorphism, then check both
/// symmetry oracles exactly and the idempotent-shift expectations.
///
/// Every sub-check is expected to pass; a failure indicates an
/// implementation bug, and the report says which check broke.
pub fn verify_construction(
    family: PairFamily,
    p: u64,
    k: i64,
    c_digits: &[u64],
    a: &BigRational,
    level: u32,
) -> Result<VerifyReport> {
    let precision = (level as usize).max(c_digits.len());
    let alpha = Automorphism::from_digits(p, k, c_digits, precision)?;
    let c0 = alpha.c().digit(0);
    let c1 = alpha.c().digit(1);
    family_admits(family, p, k, c0, c1)?;

    let (mu1, mu2) = construct_family(family, p, k, a, level)?;

    // verify in normalized coordinates (k >= 0, slots possibly swapped)
    let (normalized, swapped) = normalize_case(&alpha)?;
    let t = induced_endomorphism(&normalized, level)?;
    let (first, second) = if swapped { (&mu2, &mu1) } else { (&mu1, &mu2) };
    let fourier = fourier_symmetry_check(&first.char_fn_exact(), &second.char_fn_exact(), &t)?;
    let conditional =
        conditional_symmetry_check(&first.to_distribution(), &second.to_distribution(), &t)?;

    let mu1_idempotent = mu1.to_distribution().is_idempotent_shift();
    let mu2_idempotent = mu2.to_distribution().is_idempotent_shift();
    let expected = {
        let (e1, e2) = family.expected_idempotent();
        if swapped {
            (e2, e1)
        } else {
            (e1, e2)
        }
    };

    let symmetry_ok = fourier.holds && conditional.holds;
    let idempotency_ok = (mu1_idempotent, mu2_idempotent) == expected;
    Ok(VerifyReport {
        family,
        p,
        k,
        level,
        a: ratio::format(a),
        t: t.t(),
        swapped,
        fourier,
        conditional,
        mu1_idempotent,
        mu2_idempotent,
        expected_idempotent: expected,
        symmetry_ok,
        idempotency_ok,
        passed: symmetry_ok && idempotency_ok,
    })
}

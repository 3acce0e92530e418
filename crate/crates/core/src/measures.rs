//! Exact probability distributions on the level-n quotient and their
//! characteristic functions.
//!
//! Probabilities are exact rationals end to end.  Floating point appears
//! only inside characteristic-function tables; whenever a table is known
//! to be rational (Haar mixtures) the exact variant is used instead, so
//! accept/reject decisions never depend on floats.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::checked_group_order;
use crate::quotient::{add_mod, annihilator, mul_mod, neg_mod, root_of_unity, Subgroup};
use crate::ratio;

/// Tolerance for float-side characteristic-function comparisons.
pub const CHAR_TOL: f64 = 1e-9;

/// An exact probability vector on the p^level residues of Δ_p/p^levelΔ_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDistribution {
    p: u64,
    level: u32,
    probs: Vec<BigRational>,
}

impl FiniteDistribution {
    pub fn new(p: u64, level: u32, probs: Vec<BigRational>) -> Result<Self> {
        let order = checked_group_order(p, level)? as usize;
        if probs.len() != order {
            return Err(Error::InvalidParameter(format!(
                "expected {} probabilities, got {}",
                order,
                probs.len()
            )));
        }
        let mut total = BigRational::zero();
        for q in &probs {
            if q.is_negative() {
                return Err(Error::InvalidParameter("negative probability".into()));
            }
            total += q;
        }
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {}, not 1",
                ratio::format(&total)
            )));
        }
        Ok(Self { p, level, probs })
    }

    /// The Haar distribution of (the image of) p^mΔ_p: uniform on the
    /// residues divisible by p^m.
    pub fn haar_on_subgroup(p: u64, m: u32, level: u32) -> Result<Self> {
        let order = checked_group_order(p, level)? as usize;
        if m > level {
            return Err(Error::SubgroupIndexOutOfRange { m, level });
        }
        let step = p.pow(m) as usize;
        let count = order / step;
        let weight = BigRational::new(1.into(), (count as u64).into());
        let mut probs = vec![BigRational::zero(); order];
        for x in (0..order).step_by(step) {
            probs[x] = weight.clone();
        }
        Ok(Self { p, level, probs })
    }

    pub fn point_mass(p: u64, level: u32, x: u64) -> Result<Self> {
        let order = checked_group_order(p, level)?;
        let mut probs = vec![BigRational::zero(); order as usize];
        probs[(x % order) as usize] = BigRational::one();
        Ok(Self { p, level, probs })
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

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, x: u64) -> &BigRational {
        &self.probs[(x % self.order()) as usize]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    /// Convolution: `(μ*ν)(z) = Σ_x μ(x) ν(z-x)`, exact.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let order = self.order();
        let mut probs = vec![BigRational::zero(); order as usize];
        for x in 0..order {
            let px = &self.probs[x as usize];
            if px.is_zero() {
                continue;
            }
            for y in 0..order {
                let py = &other.probs[y as usize];
                if py.is_zero() {
                    continue;
                }
                let z = add_mod(x, y, order) as usize;
                probs[z] += px * py;
            }
        }
        Ok(Self { p: self.p, level: self.level, probs })
    }

    /// The distribution of `-ξ`: probability at x moves to -x.
    pub fn reflect(&self) -> Self {
        let order = self.order();
        let mut probs = vec![BigRational::zero(); order as usize];
        for x in 0..order {
            probs[neg_mod(x, order) as usize] = self.probs[x as usize].clone();
        }
        Self { p: self.p, level: self.level, probs }
    }

    /// `μ * reflect(μ)`; its characteristic function is `|μ̂|²`.
    pub fn symmetrize(&self) -> Self {
        self.convolve(&self.reflect()).expect("same group")
    }

    /// Float-valued characteristic function `μ̂(y) = Σ_x (x,y) μ(x)`.
    pub fn char_fn(&self) -> CharTable {
        let order = self.order();
        let roots: Vec<Complex64> = (0..order).map(|j| root_of_unity(j, order)).collect();
        let weights: Vec<f64> = self.probs.iter().map(ratio::to_f64).collect();
        let values = (0..order)
            .map(|y| {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..order {
                    if weights[x as usize] != 0.0 {
                        acc += weights[x as usize] * roots[mul_mod(x, y, order) as usize];
                    }
                }
                acc
            })
            .collect();
        CharTable { p: self.p, level: self.level, values: CharValues::Float(values) }
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.order()).filter(|&x| !self.probs[x as usize].is_zero()).collect()
    }

    /// True iff some residue carries probability 1.
    pub fn is_degenerate(&self) -> bool {
        self.probs.iter().any(|q| q.is_one())
    }

    /// Structural test for membership in the idempotent class: uniform on
    /// a single coset `x + K` of a subgroup K.  Returns the subgroup index
    /// m (K is the image of p^mΔ_p) and the canonical shift on success.
    pub fn idempotent_shift(&self) -> Option<IdempotentShift> {
        let support = self.support();
        let size = support.len() as u64;
        let weight = BigRational::new(1.into(), size.into());
        if support.iter().any(|&x| self.probs[x as usize] != weight) {
            return None;
        }
        // subgroups of a cyclic p-group have p-power order
        let mut m = self.level;
        let mut subgroup_order = 1u64;
        while subgroup_order < size {
            subgroup_order *= self.p;
            m -= 1;
        }
        if subgroup_order != size {
            return None;
        }
        // a coset of <p^m> is a congruence class mod p^m
        let modulus = self.p.pow(m);
        let shift = support[0] % modulus;
        if support.iter().any(|&x| x % modulus != shift) {
            return None;
        }
        Some(IdempotentShift { subgroup_index: m, shift })
    }

    pub fn is_idempotent_shift(&self) -> bool {
        self.idempotent_shift().is_some()
    }
}

impl Serialize for FiniteDistribution {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            p: u64,
            level: u32,
            probs: ProbSeq<'a>,
        }
        struct ProbSeq<'a>(&'a [BigRational]);
        impl Serialize for ProbSeq<'_> {
            fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
                ser.collect_seq(self.0.iter().map(ratio::format))
            }
        }
        Wire { p: self.p, level: self.level, probs: ProbSeq(&self.probs) }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FiniteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            p: u64,
            level: u32,
            #[serde(with = "ratio::serde_vec")]
            probs: Vec<BigRational>,
        }
        let w = Wire::deserialize(de)?;
        FiniteDistribution::new(w.p, w.level, w.probs).map_err(serde::de::Error::custom)
    }
}

/// Successful idempotent-shift verdict: the distribution is uniform on
/// `shift + image(p^subgroup_index Δ_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IdempotentShift {
    pub subgroup_index: u32,
    pub shift: u64,
}

/// A convex combination of Haar distributions `Σ a_i m_{p^{m_i}Δ_p}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupMixture {
    p: u64,
    level: u32,
    terms: Vec<MixtureTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureTerm {
    pub m: u32,
    #[serde(with = "ratio::serde_one")]
    pub a: BigRational,
}

impl SubgroupMixture {
    pub fn new(p: u64, level: u32, terms: Vec<(u32, BigRational)>) -> Result<Self> {
        checked_group_order(p, level)?;
        if terms.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one term".into()));
        }
        let mut total = BigRational::zero();
        for (m, a) in &terms {
            if *m > level {
                return Err(Error::SubgroupIndexOutOfRange { m: *m, level });
            }
            if !a.is_positive() {
                return Err(Error::InvalidParameter("mixture weights must be positive".into()));
            }
            total += a;
        }
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {}, not 1",
                ratio::format(&total)
            )));
        }
        Ok(Self {
            p,
            level,
            terms: terms.into_iter().map(|(m, a)| MixtureTerm { m, a }).collect(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn terms(&self) -> &[MixtureTerm] {
        &self.terms
    }

    /// Expand into an explicit probability vector.
    pub fn to_distribution(&self) -> FiniteDistribution {
        let order = self.p.pow(self.level);
        let mut probs = vec![BigRational::zero(); order as usize];
        for term in &self.terms {
            let haar = FiniteDistribution::haar_on_subgroup(self.p, term.m, self.level)
                .expect("validated at construction");
            for (slot, q) in probs.iter_mut().zip(haar.probs.iter()) {
                *slot += &term.a * q;
            }
        }
        FiniteDistribution { p: self.p, level: self.level, probs }
    }

    /// Exact characteristic function: each Haar term contributes its
    /// weight on the annihilator of its subgroup, so
    /// `μ̂(y) = Σ_{i : y ∈ A_i} a_i`, a rational number.
    pub fn char_fn_exact(&self) -> CharTable {
        let order = self.p.pow(self.level);
        let annihilators: Vec<Subgroup> = self
            .terms
            .iter()
            .map(|t| annihilator(self.p, t.m, self.level).expect("validated"))
            .collect();
        let values = (0..order)
            .map(|y| {
                let mut acc = BigRational::zero();
                for (term, ann) in self.terms.iter().zip(&annihilators) {
                    if ann.contains(y) {
                        acc += &term.a;
                    }
                }
                acc
            })
            .collect();
        CharTable { p: self.p, level: self.level, values: CharValues::Exact(values) }
    }
}

impl Serialize for SubgroupMixture {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            p: u64,
            level: u32,
            terms: &'a [MixtureTerm],
        }
        Wire { p: self.p, level: self.level, terms: &self.terms }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SubgroupMixture {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            p: u64,
            level: u32,
            terms: Vec<MixtureTerm>,
        }
        let w = Wire::deserialize(de)?;
        SubgroupMixture::new(w.p, w.level, w.terms.into_iter().map(|t| (t.m, t.a)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Characteristic-function values on the dual group, indexed by residue.
#[derive(Debug, Clone, PartialEq)]
pub enum CharValues {
    /// All values real rational (Haar mixtures and friends).
    Exact(Vec<BigRational>),
    /// General complex table from the float transform.
    Float(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharTable {
    p: u64,
    level: u32,
    values: CharValues,
}

impl CharTable {
    pub fn from_exact(p: u64, level: u32, values: Vec<BigRational>) -> Result<Self> {
        let order = checked_group_order(p, level)? as usize;
        if values.len() != order {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                order,
                values.len()
            )));
        }
        Ok(Self { p, level, values: CharValues::Exact(values) })
    }

    pub fn all_ones(p: u64, level: u32) -> Result<Self> {
        let order = checked_group_order(p, level)? as usize;
        Ok(Self { p, level, values: CharValues::Exact(vec![BigRational::one(); order]) })
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

    pub fn is_exact(&self) -> bool {
        matches!(self.values, CharValues::Exact(_))
    }

    pub fn values(&self) -> &CharValues {
        &self.values
    }

    pub fn exact_values(&self) -> Option<&[BigRational]> {
        match &self.values {
            CharValues::Exact(v) => Some(v),
            CharValues::Float(_) => None,
        }
    }

    pub fn value_float(&self, y: u64) -> Complex64 {
        let idx = (y % self.order()) as usize;
        match &self.values {
            CharValues::Exact(v) => Complex64::new(ratio::to_f64(&v[idx]), 0.0),
            CharValues::Float(v) => v[idx],
        }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    /// Invariants every characteristic function satisfies: value 1 at the
    /// trivial character, modulus at most 1, Hermitian symmetry.
    pub fn validate(&self) -> Result<()> {
        let order = self.order();
        match &self.values {
            CharValues::Exact(v) => {
                if !v[0].is_one() {
                    return Err(Error::InvalidParameter("exact table must be 1 at y=0".into()));
                }
                let one = BigRational::one();
                for (y, q) in v.iter().enumerate() {
                    if q.abs() > one {
                        return Err(Error::InvalidParameter(format!("|value({y})| > 1")));
                    }
                    let neg = neg_mod(y as u64, order) as usize;
                    if v[neg] != *q {
                        return Err(Error::InvalidParameter(format!(
                            "exact table breaks symmetry at y={y}"
                        )));
                    }
                }
            }
            CharValues::Float(v) => {
                if (v[0] - Complex64::new(1.0, 0.0)).norm() > CHAR_TOL {
                    return Err(Error::InvalidParameter("float table must be 1 at y=0".into()));
                }
                for (y, z) in v.iter().enumerate() {
                    if z.norm() > 1.0 + CHAR_TOL {
                        return Err(Error::InvalidParameter(format!("|value({y})| > 1")));
                    }
                    let neg = neg_mod(y as u64, order) as usize;
                    if (v[neg] - z.conj()).norm() > CHAR_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "float table breaks Hermitian symmetry at y={y}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Inverse transform, recovering the probability vector as floats.
    pub fn inverse_transform(&self) -> Vec<f64> {
        let order = self.order();
        let roots: Vec<Complex64> = (0..order).map(|j| root_of_unity(j, order)).collect();
        (0..order)
            .map(|x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..order {
                    acc += self.value_float(y) * roots[mul_mod(x, y, order) as usize].conj();
                }
                acc.re / order as f64
            })
            .collect()
    }
}

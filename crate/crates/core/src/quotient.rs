//! The finite quotients Δ_p/p^nΔ_p and their duals.
//!
//! Both the quotient and the level-n subgroup Z(p^n) of the Prüfer group
//! are represented as residues mod p^n, paired by
//! `(x, y) = exp(2πi x y / p^n)`.  An automorphism `p^k c` of Ω_p descends
//! to the quotient's dual as multiplication by `t = p^k s_n mod p^n`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{checked_group_order, Automorphism, PAdicNumber};

/// A coset of p^nΔ_p in Δ_p, i.e. a residue mod p^n.  Under duality the
/// same representation reads as the character `residue / p^n` of Z(p^n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientElement {
    p: u64,
    level: u32,
    residue: u64,
}

impl QuotientElement {
    pub fn new(p: u64, level: u32, residue: u64) -> Result<Self> {
        let order = checked_group_order(p, level)?;
        Ok(Self { p, level, residue: residue % order })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.level)
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

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            residue: add_mod(self.residue, other.residue, self.order()),
            ..*self
        })
    }

    pub fn neg(&self) -> Self {
        Self { residue: neg_mod(self.residue, self.order()), ..*self }
    }

    pub fn scale(&self, t: u64) -> Self {
        Self { residue: mul_mod(self.residue, t, self.order()), ..*self }
    }
}

pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn neg_mod(a: u64, m: u64) -> u64 {
    if a == 0 {
        0
    } else {
        m - a
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// The endomorphism `y -> t·y` that an automorphism induces on the level-n
/// dual group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplier {
    p: u64,
    level: u32,
    t: u64,
}

impl Multiplier {
    pub fn from_residue(p: u64, level: u32, t: u64) -> Result<Self> {
        let order = checked_group_order(p, level)?;
        Ok(Self { p, level, t: t % order })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Invertible exactly when t is coprime to p (the k = 0 case).
    pub fn is_invertible(&self) -> bool {
        self.t % self.p != 0
    }

    pub fn apply(&self, y: u64) -> u64 {
        mul_mod(self.t, y, self.p.pow(self.level))
    }
}

/// The endomorphism induced on Z(p^n) by `α = p^k c`: multiplication by
/// `p^k s_n mod p^n`.  Negative powers must be normalized away first.
pub fn induced_endomorphism(alpha: &Automorphism, level: u32) -> Result<Multiplier> {
    if alpha.k() < 0 {
        return Err(Error::MustNormalize(alpha.k()));
    }
    let p = alpha.p();
    let order = checked_group_order(p, level)?;
    let s = alpha.c().unit_multiplier(level)?;
    let mut t = s % order;
    for _ in 0..alpha.k() {
        t = mul_mod(t, p, order);
        if t == 0 {
            break;
        }
    }
    Multiplier::from_residue(p, level, t)
}

/// A subgroup of the cyclic group of order p^level: the unique subgroup
/// with p^order_exponent elements, i.e. the multiples of
/// p^(level - order_exponent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    p: u64,
    level: u32,
    order_exponent: u32,
}

impl Subgroup {
    pub fn new(p: u64, level: u32, order_exponent: u32) -> Result<Self> {
        checked_group_order(p, level)?;
        if order_exponent > level {
            return Err(Error::SubgroupIndexOutOfRange { m: order_exponent, level });
        }
        Ok(Self { p, level, order_exponent })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn order_exponent(&self) -> u32 {
        self.order_exponent
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.order_exponent)
    }

    /// Generator: p^(level - order_exponent), or 0 for the trivial subgroup.
    pub fn generator(&self) -> u64 {
        if self.order_exponent == 0 {
            0
        } else {
            self.p.pow(self.level - self.order_exponent)
        }
    }

    pub fn contains(&self, residue: u64) -> bool {
        if self.order_exponent == self.level {
            return true;
        }
        residue % self.p.pow(self.level - self.order_exponent) == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.order_exponent == 0
    }

    /// Proper means not the whole group.
    pub fn is_proper(&self) -> bool {
        self.order_exponent < self.level
    }

    /// Members in increasing residue order.
    pub fn members(&self) -> Vec<u64> {
        let step = if self.order_exponent == 0 {
            return vec![0];
        } else {
            self.p.pow(self.level - self.order_exponent)
        };
        (0..self.order()).map(|j| j * step).collect()
    }
}

/// Annihilator of (the image of) p^mΔ_p inside the level-n dual: the
/// solutions of `p^m y ≡ 0 mod p^n`, a subgroup with p^m elements.
pub fn annihilator(p: u64, m: u32, level: u32) -> Result<Subgroup> {
    if m > level {
        return Err(Error::SubgroupIndexOutOfRange { m, level });
    }
    Subgroup::new(p, level, m)
}

/// The isomorphism of Ω_p/p^lΔ_p onto the Prüfer group: the digits below
/// index `l` read as the exact rational `Σ x_i p^(i-l)` in [0, 1).
pub fn tau(x: &PAdicNumber, level: i64) -> BigRational {
    let p = BigInt::from(x.p());
    let mut acc = BigRational::zero();
    if x.is_zero() {
        return acc;
    }
    let (valuation, unit) = x.decompose().expect("nonzero");
    for i in valuation..level {
        let d = x.digit(i);
        if d == 0 {
            continue;
        }
        // p^(i - l) with i < l is 1 / p^(l - i)
        let denom = p.pow((level - i) as u32);
        acc += BigRational::new(BigInt::from(d), denom);
    }
    let _ = unit;
    acc
}

/// Exact form of the duality pairing: the root-of-unity index
/// `x·y mod p^n`, so that `(x, y) = exp(2πi · index / p^n)`.
pub fn pairing_index(x: &QuotientElement, y: &QuotientElement) -> Result<u64> {
    x.check_compatible(y)?;
    Ok(mul_mod(x.residue, y.residue, x.order()))
}

/// `exp(2πi j / m)`.
pub fn root_of_unity(j: u64, m: u64) -> Complex64 {
    let theta = std::f64::consts::TAU * (j as f64) / (m as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// The duality pairing as a complex number of modulus 1.
pub fn pairing(x: &QuotientElement, y: &QuotientElement) -> Result<Complex64> {
    Ok(root_of_unity(pairing_index(x, y)?, x.order()))
}

//! Finite-precision arithmetic in the p-adic integers and p-adic numbers.
//!
//! A p-adic integer is stored as its canonical residue in `[0, p^N)` for an
//! explicit digit precision `N`; the digit sequence `(x_0, ..., x_{N-1})`
//! with `value = Σ x_i p^i` is derived on demand and is the serialized form.
//! Mixed-precision or mixed-prime operations are rejected, never truncated.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial-division primality check; inputs here are desk-scale.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// An element of Δ_p/p^N Δ_p: `N` base-p digits with exact carry arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicInt {
    p: u64,
    precision: usize,
    value: BigUint,
}

impl PAdicInt {
    /// Build from an explicit digit sequence `(x_0, ..., x_{N-1})`.
    pub fn from_digits(p: u64, digits: &[u64]) -> Result<Self> {
        check_prime(p)?;
        if digits.is_empty() {
            return Err(Error::InvalidParameter("precision must be at least 1".into()));
        }
        let mut value = BigUint::zero();
        let big_p = BigUint::from(p);
        for &d in digits.iter().rev() {
            if d >= p {
                return Err(Error::DigitOutOfRange { digit: d, p });
            }
            value = value * &big_p + BigUint::from(d);
        }
        Ok(Self { p, precision: digits.len(), value })
    }

    /// Build from a digit sequence, zero-extended to `precision` digits.
    pub fn from_digits_padded(p: u64, digits: &[u64], precision: usize) -> Result<Self> {
        if digits.len() > precision {
            return Err(Error::PrecisionMismatch(digits.len(), precision));
        }
        let mut padded = digits.to_vec();
        padded.resize(precision, 0);
        Self::from_digits(p, &padded)
    }

    /// Build from a residue, reduced mod p^precision.
    pub fn from_value(p: u64, precision: usize, value: BigUint) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::InvalidParameter("precision must be at least 1".into()));
        }
        let modulus = BigUint::from(p).pow(precision as u32);
        Ok(Self { p, precision, value: value % modulus })
    }

    pub fn zero(p: u64, precision: usize) -> Result<Self> {
        Self::from_value(p, precision, BigUint::zero())
    }

    pub fn one(p: u64, precision: usize) -> Result<Self> {
        Self::from_value(p, precision, BigUint::one())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Canonical residue in `[0, p^N)`.
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Digit `x_i`, zero for `i >= precision`.
    pub fn digit(&self, i: usize) -> u64 {
        if i >= self.precision {
            return 0;
        }
        let big_p = BigUint::from(self.p);
        ((&self.value / big_p.pow(i as u32)) % self.p).to_u64().unwrap()
    }

    /// The full digit sequence `(x_0, ..., x_{N-1})`.
    pub fn digits(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.precision);
        let mut rest = self.value.clone();
        let big_p = BigUint::from(self.p);
        for _ in 0..self.precision {
            let (q, r) = rest.div_rem(&big_p);
            out.push(r.to_u64().unwrap());
            rest = q;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// A unit of Δ_p has nonzero leading digit.
    pub fn is_unit(&self) -> bool {
        !(&self.value % self.p).is_zero()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.precision != other.precision {
            return Err(Error::PrecisionMismatch(self.precision, other.precision));
        }
        Ok(())
    }

    fn modulus(&self) -> BigUint {
        BigUint::from(self.p).pow(self.precision as u32)
    }

    /// Digit-wise addition with carry, truncated at `N` digits.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let value = (&self.value + &other.value) % self.modulus();
        Ok(Self { p: self.p, precision: self.precision, value })
    }

    /// Multiplication mod p^N.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let value = (&self.value * &other.value) % self.modulus();
        Ok(Self { p: self.p, precision: self.precision, value })
    }

    /// Additive inverse mod p^N.
    pub fn neg(&self) -> Self {
        let m = self.modulus();
        let value = if self.value.is_zero() { BigUint::zero() } else { m - &self.value };
        Self { p: self.p, precision: self.precision, value }
    }

    /// Multiplicative inverse of a unit, via the extended Euclid algorithm
    /// mod p^N.
    pub fn inv(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        let modulus = BigInt::from(self.modulus());
        let ext = BigInt::from(self.value.clone()).extended_gcd(&modulus);
        debug_assert!(ext.gcd.is_one());
        let inv = ext.x.mod_floor(&modulus);
        Ok(Self {
            p: self.p,
            precision: self.precision,
            value: inv.to_biguint().unwrap(),
        })
    }

    /// Split off the p-power: returns `(k, c)` with `self = p^k c`, `c` a
    /// unit of precision `N - k`.
    pub fn decompose(&self) -> Result<(usize, PAdicInt)> {
        if self.value.is_zero() {
            return Err(Error::ZeroDecomposition);
        }
        let big_p = BigUint::from(self.p);
        let mut k = 0usize;
        let mut rest = self.value.clone();
        while (&rest % &big_p).is_zero() {
            rest /= &big_p;
            k += 1;
        }
        Ok((k, PAdicInt { p: self.p, precision: self.precision - k, value: rest }))
    }

    /// The multiplier `s_n = c_0 + c_1 p + ... + c_{n-1} p^{n-1}` mod p^n
    /// that a unit induces on the level-n quotient.
    pub fn unit_multiplier(&self, n: u32) -> Result<u64> {
        if n as usize > self.precision {
            return Err(Error::InsufficientPrecision { level: n, precision: self.precision });
        }
        let modulus = checked_group_order(self.p, n)?;
        Ok((&self.value % BigUint::from(modulus)).to_u64().unwrap())
    }
}

impl Serialize for PAdicInt {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            p: u64,
            digits: &'a [u64],
        }
        Wire { p: self.p, digits: &self.digits() }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PAdicInt {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            p: u64,
            digits: Vec<u64>,
        }
        let w = Wire::deserialize(de)?;
        PAdicInt::from_digits(w.p, &w.digits).map_err(serde::de::Error::custom)
    }
}

/// p^n as a `u64`, rejecting anything past the desk-scale cap.
pub fn checked_group_order(p: u64, n: u32) -> Result<u64> {
    const CAP: u64 = 1 << 20;
    match p.checked_pow(n) {
        Some(order) if order <= CAP => Ok(order),
        _ => Err(Error::LevelTooLarge { p, level: n }),
    }
}

/// A nonzero element of Ω_p in the form `g = p^v u` with `u` a unit, or zero.
///
/// The valuation is carried separately; only the unit's digits are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicNumber {
    valuation: i64,
    unit: PAdicInt,
}

impl PAdicNumber {
    pub fn new(valuation: i64, unit: PAdicInt) -> Result<Self> {
        if !unit.is_unit() {
            return Err(Error::NotAUnit);
        }
        Ok(Self { valuation, unit })
    }

    pub fn zero(p: u64, precision: usize) -> Result<Self> {
        Ok(Self { valuation: 0, unit: PAdicInt::zero(p, precision)? })
    }

    /// Build from a raw digit stream starting at index `lowest_index`
    /// (negative indices are the fractional digits of Ω_p).
    pub fn from_digit_range(p: u64, lowest_index: i64, digits: &[u64]) -> Result<Self> {
        let raw = PAdicInt::from_digits(p, digits)?;
        if raw.is_zero() {
            return Self::zero(p, digits.len());
        }
        let (shift, unit) = raw.decompose()?;
        Ok(Self { valuation: lowest_index + shift as i64, unit })
    }

    pub fn p(&self) -> u64 {
        self.unit.p()
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn unit(&self) -> &PAdicInt {
        &self.unit
    }

    /// Returns `(k, c)` with `self = p^k c`.
    pub fn decompose(&self) -> Result<(i64, PAdicInt)> {
        if self.is_zero() {
            return Err(Error::ZeroDecomposition);
        }
        Ok((self.valuation, self.unit.clone()))
    }

    /// Digit at index `i` of the two-sided expansion.
    pub fn digit(&self, i: i64) -> u64 {
        if i < self.valuation {
            return 0;
        }
        self.unit.digit((i - self.valuation) as usize)
    }
}

impl Serialize for PAdicNumber {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            p: u64,
            digits: &'a [u64],
            valuation: i64,
        }
        Wire { p: self.p(), digits: &self.unit.digits(), valuation: self.valuation }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PAdicNumber {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            p: u64,
            digits: Vec<u64>,
            valuation: i64,
        }
        let w = Wire::deserialize(de)?;
        PAdicNumber::from_digit_range(w.p, w.valuation, &w.digits).map_err(serde::de::Error::custom)
    }
}

/// A topological automorphism of Ω_p: multiplication by `p^k c` with `c` a
/// unit of Δ_p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphism {
    k: i64,
    c: PAdicInt,
}

impl Automorphism {
    pub fn new(k: i64, c: PAdicInt) -> Result<Self> {
        if !c.is_unit() {
            return Err(Error::NotAUnit);
        }
        Ok(Self { k, c })
    }

    /// Convenience constructor from unit digits, zero-extended to `precision`.
    pub fn from_digits(p: u64, k: i64, c_digits: &[u64], precision: usize) -> Result<Self> {
        Self::new(k, PAdicInt::from_digits_padded(p, c_digits, precision)?)
    }

    pub fn p(&self) -> u64 {
        self.c.p()
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn c(&self) -> &PAdicInt {
        &self.c
    }

    /// `(p^k c)^{-1} = p^{-k} c^{-1}`.
    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { k: -self.k, c: self.c.inv()? })
    }

    /// Composition acts as multiplication: powers add, units multiply.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self { k: self.k + other.k, c: self.c.mul(&other.c)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(p: u64, digits: &[u64]) -> PAdicInt {
        PAdicInt::from_digits(p, digits).unwrap()
    }

    #[test]
    fn add_carry_wraps_modulus() {
        // 8 + 1 ≡ 0 mod 9
        let a = int(3, &[2, 2]);
        let b = int(3, &[1, 0]);
        assert_eq!(a.add(&b).unwrap(), int(3, &[0, 0]));
    }

    #[test]
    fn add_single_carry() {
        // 1 + 1 = 2 in base 2
        let a = int(2, &[1, 0, 0]);
        assert_eq!(a.add(&a).unwrap(), int(2, &[0, 1, 0]));
    }

    #[test]
    fn add_residue_oracle() {
        // 3 + 4 ≡ 2 mod 5
        let a = int(5, &[3]);
        let b = int(5, &[4]);
        assert_eq!(a.add(&b).unwrap().value().to_u64().unwrap(), (3 + 4) % 5);
    }

    #[test]
    fn mul_residue_oracle() {
        // 2·2 = 4 = 1 + 1·3
        let a = int(3, &[2, 0]);
        assert_eq!(a.mul(&a).unwrap(), int(3, &[1, 1]));
        // 3·3 = 9 ≡ 1 mod 4
        let b = int(2, &[1, 1]);
        assert_eq!(b.mul(&b).unwrap(), int(2, &[1, 0]));
    }

    #[test]
    fn mul_identity() {
        let a = int(7, &[3, 5, 1]);
        let one = PAdicInt::one(7, 3).unwrap();
        assert_eq!(a.mul(&one).unwrap(), a);
    }

    #[test]
    fn mixed_precision_rejected() {
        let a = int(3, &[1, 0]);
        let b = int(3, &[1]);
        assert_eq!(a.add(&b), Err(Error::PrecisionMismatch(2, 1)));
        let c = int(5, &[1, 0]);
        assert_eq!(a.mul(&c), Err(Error::PrimeMismatch(3, 5)));
    }

    #[test]
    fn inv_small_cases() {
        // 2·3 = 6 ≡ 1 mod 5
        assert_eq!(int(5, &[2]).inv().unwrap(), int(5, &[3]));
        // 2·5 = 10 ≡ 1 mod 9, and 5 = (2,1) base 3
        assert_eq!(int(3, &[2, 0]).inv().unwrap(), int(3, &[2, 1]));
        // 7·7 = 49 ≡ 1 mod 8
        assert_eq!(int(2, &[1, 1, 1]).inv().unwrap(), int(2, &[1, 1, 1]));
    }

    #[test]
    fn inv_rejects_non_unit() {
        assert_eq!(int(3, &[0, 1]).inv(), Err(Error::NotAUnit));
    }

    #[test]
    fn decompose_examples() {
        // (0,0,2) base 3 is 9·2
        let (k, c) = int(3, &[0, 0, 2]).decompose().unwrap();
        assert_eq!((k, c), (2, int(3, &[2])));
        // a unit decomposes trivially
        let u = int(5, &[4, 1]);
        assert_eq!(u.decompose().unwrap(), (0, u.clone()));
        // 6 = 2·3 in base 2
        let (k, c) = int(2, &[0, 1, 1]).decompose().unwrap();
        assert_eq!((k, c), (1, int(2, &[1, 1])));
        assert_eq!(int(3, &[0, 0]).decompose(), Err(Error::ZeroDecomposition));
    }

    #[test]
    fn unit_multiplier_examples() {
        let c = int(3, &[2, 1, 0]);
        assert_eq!(c.unit_multiplier(2).unwrap(), 5);
        assert_eq!(c.unit_multiplier(1).unwrap(), 2);
        assert_eq!(int(2, &[1, 1]).unit_multiplier(2).unwrap(), 3);
        assert_eq!(
            int(2, &[1]).unit_multiplier(2),
            Err(Error::InsufficientPrecision { level: 2, precision: 1 })
        );
    }

    #[test]
    fn unit_multiplier_is_unit_iff_leading_digit_nonzero() {
        for digits in [[1u64, 0], [2, 1], [0, 1], [0, 2]] {
            let x = int(3, &digits);
            let s = x.unit_multiplier(2).unwrap();
            assert_eq!(s % 3 != 0, x.is_unit());
        }
    }

    #[test]
    fn padic_number_digit_stream() {
        let g = PAdicNumber::from_digit_range(3, -2, &[1, 2]).unwrap();
        assert_eq!(g.valuation(), -2);
        assert_eq!(g.digit(-2), 1);
        assert_eq!(g.digit(-1), 2);
        assert_eq!(g.digit(0), 0);

        // leading zeros shift the valuation
        let h = PAdicNumber::from_digit_range(2, -1, &[0, 1, 1]).unwrap();
        assert_eq!(h.valuation(), 0);
        assert_eq!(h.decompose().unwrap().1.digits(), vec![1, 1]);
    }

    #[test]
    fn padic_number_zero_has_no_decomposition() {
        let z = PAdicNumber::zero(5, 3).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.decompose(), Err(Error::ZeroDecomposition));
    }

    #[test]
    fn automorphism_inverse_and_compose() {
        let a = Automorphism::from_digits(3, -1, &[2], 2).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(inv.k(), 1);
        assert_eq!(inv.c(), &int(3, &[2, 1])); // 2^{-1} = 5 mod 9
        let id = a.compose(&inv).unwrap();
        assert_eq!(id.k(), 0);
        assert!(id.c().mul(&PAdicInt::one(3, 2).unwrap()).unwrap().is_unit());
    }

    #[test]
    fn serde_wire_format() {
        let x = int(3, &[2, 1, 0]);
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, r#"{"p":3,"digits":[2,1,0]}"#);
        assert_eq!(serde_json::from_str::<PAdicInt>(&json).unwrap(), x);

        let g = PAdicNumber::from_digit_range(2, -1, &[1, 1]).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"p":2,"digits":[1,1],"valuation":-1}"#);
        assert_eq!(serde_json::from_str::<PAdicNumber>(&json).unwrap(), g);
    }

    #[test]
    fn rejects_bad_digits_and_composite_p() {
        assert!(PAdicInt::from_digits(4, &[1]).is_err());
        assert_eq!(
            PAdicInt::from_digits(3, &[3]),
            Err(Error::DigitOutOfRange { digit: 3, p: 3 })
        );
    }

    proptest! {
        #[test]
        fn ring_laws_match_residue_oracle(
            p in prop::sample::select(vec![2u64, 3, 5]),
            n in 1usize..4,
            a in 0u64..200,
            b in 0u64..200,
            c in 0u64..200,
        ) {
            let make = |v: u64| PAdicInt::from_value(p, n, BigUint::from(v)).unwrap();
            let modulus = p.pow(n as u32);
            let (x, y, z) = (make(a), make(b), make(c));

            // values agree with plain modular arithmetic
            prop_assert_eq!(
                x.add(&y).unwrap().value().to_u64().unwrap(),
                (a + b) % modulus
            );
            prop_assert_eq!(
                x.mul(&y).unwrap().value().to_u64().unwrap(),
                (a % modulus) * (b % modulus) % modulus
            );

            // associativity, commutativity, distributivity
            prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
            prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
            prop_assert_eq!(
                x.add(&y).unwrap().add(&z).unwrap(),
                x.add(&y.add(&z).unwrap()).unwrap()
            );
            prop_assert_eq!(
                x.mul(&y).unwrap().mul(&z).unwrap(),
                x.mul(&y.mul(&z).unwrap()).unwrap()
            );
            prop_assert_eq!(
                x.mul(&y.add(&z).unwrap()).unwrap(),
                x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
            );
        }

        #[test]
        fn inverse_of_every_unit(
            p in prop::sample::select(vec![2u64, 3, 5, 7]),
            n in 1usize..4,
            raw in 1u64..500,
        ) {
            let candidate = PAdicInt::from_value(p, n, BigUint::from(raw)).unwrap();
            prop_assume!(candidate.is_unit());
            let inv = candidate.inv().unwrap();
            prop_assert_eq!(candidate.mul(&inv).unwrap(), PAdicInt::one(p, n).unwrap());
        }

        #[test]
        fn decompose_compose_round_trip(
            p in prop::sample::select(vec![2u64, 3, 5]),
            n in 1usize..5,
            raw in 1u64..600,
        ) {
            let x = PAdicInt::from_value(p, n, BigUint::from(raw)).unwrap();
            prop_assume!(!x.is_zero());
            let (k, c) = x.decompose().unwrap();
            let rebuilt = BigUint::from(p).pow(k as u32) * c.value();
            prop_assert_eq!(&rebuilt, x.value());
            prop_assert!(c.is_unit());
        }
    }
}

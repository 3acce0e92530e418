//! Exact harmonic analysis on the finite quotients of the p-adic integers.
//!
//! The crate provides digit-level p-adic arithmetic, duality with the
//! Prüfer group, exact rational probability distributions on Δ_p/p^nΔ_p
//! with their characteristic functions, and a verification engine for the
//! conditional-symmetry functional equation
//! `f(u+v) g(u+tv) = f(u-v) g(u-tv)` driven by an automorphism `p^k c`,
//! together with the explicit distribution families that solve it.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod measures;
pub mod padic;
pub mod quotient;
pub mod ratio;
pub mod selftest;
pub mod symmetry;

pub use error::{Error, Result};
pub use measures::{CharTable, FiniteDistribution, SubgroupMixture};
pub use padic::{Automorphism, PAdicInt, PAdicNumber};
pub use quotient::{Multiplier, QuotientElement, Subgroup};

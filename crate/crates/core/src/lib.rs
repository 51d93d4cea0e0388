//! Computational core for Selmer-stable abelian ℓ-extensions of Q.
//!
//! Everything here is pure arithmetic: no IO, no threads, no global state.
//! The crate is `#![no_std]` and needs only `alloc`; the `selstab` crate
//! layers files, the CLI and prime-range parallelism on top.
//!
//! Module map:
//!
//! - [`modarith`]: modular exponentiation, prime sieving, primitive roots
//!   and ℓ-power residue indices (the canonical identification of
//!   μ_ℓ ⊂ F_q^× with Z/ℓ via the least primitive root).
//! - [`curve`]: integral Weierstrass models, reductions, point counts and
//!   traces of Frobenius.
//! - [`fields`]: abelian ℓ-extensions of Q described by groups of
//!   prime-conductor Dirichlet characters.
//! - [`sieve`]: membership in the prime set 𝔗_{E,K}, densities and
//!   multi-condition prime searches.
//! - [`groups`]: finite ℓ-groups as multiplication tables, H²(G, Z/ℓ) and
//!   central extensions.
//! - [`selmer`]: Selmer / dual Selmer dimensions for Z/ℓ with free and zero
//!   local conditions, S₀ selection, W_T enumeration and vanishing
//!   certificates.
//! - [`counting`]: Dirichlet coefficients, partial sums and lower-bound
//!   counts of Selmer-stable fields.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod counting;
pub mod curve;
pub mod fields;
pub mod groups;
pub mod linalg;
pub mod modarith;
pub mod selmer;
pub mod sieve;

use alloc::string::String;
use core::fmt;

/// Exact rational numbers used for densities and exponents.
pub type Rational = num_rational::Ratio<i64>;

/// Errors shared by every module of the core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A modulus below 2 was supplied.
    InvalidModulus(u64),
    /// An argument that must be prime is not.
    NotPrime(u64),
    /// An operation was called outside its documented domain.
    Precondition(String),
    /// Malformed or inconsistent input data.
    InvalidInput(String),
    /// A configured size cap would be exceeded.
    Resource {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    /// An enumeration hit its cap; `lower_bound` is what was counted so far.
    Incomplete {
        what: &'static str,
        lower_bound: u128,
    },
    /// A construction collapsed (e.g. a twist that kills the twisted layer).
    Degenerate(String),
    /// Text could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModulus(m) => write!(f, "invalid modulus {m} (must be >= 2)"),
            Error::NotPrime(n) => write!(f, "{n} is not prime"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Resource {
                what,
                requested,
                cap,
            } => write!(f, "resource cap exceeded for {what}: requested {requested}, cap {cap}"),
            Error::Incomplete { what, lower_bound } => {
                write!(f, "{what} reached before completion; partial lower bound {lower_bound}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate construction: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! precondition {
    ($($arg:tt)*) => {
        $crate::Error::Precondition(alloc::format!($($arg)*))
    };
}
pub(crate) use precondition;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;

/// Serde adapter writing rationals as "p/q" strings.
pub(crate) mod rational_string {
    use alloc::string::{String, ToString};

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

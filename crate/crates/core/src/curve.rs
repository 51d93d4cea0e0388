//! Elliptic curves over Q and their reductions modulo primes.
//!
//! Curves are given by integral long Weierstrass models
//! `y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6`. The model is taken as
//! supplied: bad primes are read off its discriminant, so a non-minimal
//! model reports spurious bad primes. Callers are expected to pass a
//! globally minimal model.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::modarith::{is_prime, legendre_table, mul_mod, pow_mod, reduce, sqrt_mod};
use crate::{invalid, precondition, Error, Result};

/// Trial division bound used when factoring discriminants.
pub const DISC_TRIAL_BOUND: u64 = 10_000_000;

/// Primes above this use baby-step giant-step instead of the Legendre sum.
pub const DEFAULT_BSGS_THRESHOLD: u64 = 2_000_000;

/// Long Weierstrass coefficients `[a1, a2, a3, a4, a6]`.
pub type Coefficients = [i64; 5];

/// Discriminant of the model, not minimalized.
pub fn discriminant(a: &Coefficients) -> BigInt {
    let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
    let b2 = &a1 * &a1 + 4 * &a2;
    let b4 = 2 * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + 4 * &a6;
    let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
    let lead: BigInt = &b2 * &b2 * &b8;
    -lead - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
}

/// An elliptic curve over Q with its discriminant and bad primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveQ {
    coeffs: Coefficients,
    #[serde(with = "bigint_string")]
    disc: BigInt,
    bad_primes: Vec<u64>,
}

impl CurveQ {
    pub fn new(coeffs: Coefficients) -> Result<Self> {
        let disc = discriminant(&coeffs);
        if disc.is_zero() {
            return Err(invalid!("singular model {:?}: discriminant is 0", coeffs));
        }
        let bad_primes = factor_primes(disc.magnitude())?;
        Ok(CurveQ {
            coeffs,
            disc,
            bad_primes,
        })
    }

    /// The short model `y² = x³ + a·x + b`.
    pub fn short(a: i64, b: i64) -> Result<Self> {
        Self::new([0, 0, 0, a, b])
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    /// Primes dividing the discriminant, ascending.
    pub fn bad_primes(&self) -> &[u64] {
        &self.bad_primes
    }

    /// Σ = {ℓ} ∪ {p : p | Δ}, ascending.
    pub fn sigma(&self, ell: u64) -> Vec<u64> {
        let mut s = self.bad_primes.clone();
        if let Err(pos) = s.binary_search(&ell) {
            s.insert(pos, ell);
        }
        s
    }

    /// Canonical key `"a1.a2.a3.a4.a6"`.
    pub fn key(&self) -> String {
        let [a1, a2, a3, a4, a6] = self.coeffs;
        format!("{a1}.{a2}.{a3}.{a4}.{a6}")
    }

    pub fn has_good_reduction(&self, p: u64) -> bool {
        self.bad_primes.binary_search(&p).is_err()
    }

    fn b_invariants(&self) -> [i128; 3] {
        let [a1, a2, a3, a4, a6] = self.coeffs.map(|x| x as i128);
        [a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6]
    }
}

/// Distinct prime factors of a discriminant by trial division up to
/// [`DISC_TRIAL_BOUND`]; the cofactor must then be 1 or a prime below 2⁶⁴.
fn factor_primes(n: &BigUint) -> Result<Vec<u64>> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= DISC_TRIAL_BOUND {
        if let Some(small) = n.to_u64() {
            if d.saturating_mul(d) > small {
                break;
            }
        }
        if (&n % d).is_zero() {
            out.push(d);
            while (&n % d).is_zero() {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigUint::from(1u8) {
        match n.to_u64() {
            Some(r) if is_prime(r) => out.push(r),
            _ => {
                return Err(invalid!(
                    "discriminant has a cofactor {n} beyond trial division; supply a curve with a smaller discriminant"
                ))
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `a_p` together with the reduction type at `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub p: u64,
    /// Meaningful only when `good`.
    pub ap: i64,
    pub good: bool,
}

/// Point counter with a configurable switch-over to baby-step giant-step.
#[derive(Debug, Clone, Copy)]
pub struct PointCounter {
    pub bsgs_threshold: u64,
}

impl Default for PointCounter {
    fn default() -> Self {
        PointCounter {
            bsgs_threshold: DEFAULT_BSGS_THRESHOLD,
        }
    }
}

impl PointCounter {
    pub fn count(&self, curve: &CurveQ, p: u64) -> Result<u64> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if !curve.has_good_reduction(p) {
            return Err(precondition!("{p} is a prime of bad reduction for {}", curve.key()));
        }
        let n = if p == 2 {
            count_points_exhaustive(curve, 2)
        } else if p > self.bsgs_threshold && p > 3 {
            match count_points_bsgs(curve, p) {
                Some(n) => n,
                None => count_points_legendre(curve, p)?,
            }
        } else {
            count_points_legendre(curve, p)?
        };
        assert!(in_hasse_interval(n, p), "#E(F_{p}) = {n} violates the Hasse bound");
        Ok(n)
    }

    pub fn trace(&self, curve: &CurveQ, p: u64) -> Result<i64> {
        Ok(p as i64 + 1 - self.count(curve, p)? as i64)
    }
}

/// `#Ẽ(F_p)` with the default counter.
pub fn count_points(curve: &CurveQ, p: u64) -> Result<u64> {
    PointCounter::default().count(curve, p)
}

/// `a_p = p + 1 − #Ẽ(F_p)`.
pub fn trace_of_frobenius(curve: &CurveQ, p: u64) -> Result<i64> {
    PointCounter::default().trace(curve, p)
}

pub fn prime_record(curve: &CurveQ, p: u64) -> Result<PrimeRecord> {
    if curve.has_good_reduction(p) {
        Ok(PrimeRecord {
            p,
            ap: trace_of_frobenius(curve, p)?,
            good: true,
        })
    } else {
        Ok(PrimeRecord { p, ap: 0, good: false })
    }
}

/// `Ẽ(F_p)[ℓ] = 0`, i.e. ℓ does not divide `#Ẽ(F_p)`.
pub fn ell_torsion_trivial(curve: &CurveQ, p: u64, ell: u64) -> Result<bool> {
    let n = count_points(curve, p)?;
    Ok(n % ell != 0)
}

/// `|a_p| <= 2√p`, i.e. `a_p² <= 4p`.
pub fn within_hasse(ap: i64, p: u64) -> bool {
    (ap as i128) * (ap as i128) <= 4 * p as i128
}

fn in_hasse_interval(n: u64, p: u64) -> bool {
    within_hasse(p as i64 + 1 - n as i64, p)
}

/// Brute force over all affine pairs; used for p = 2 and as a test oracle.
pub fn count_points_exhaustive(curve: &CurveQ, p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = curve.coeffs.map(|c| reduce(c as i128, p));
    let mut n = 1;
    for x in 0..p {
        let rhs = (pow_mod(x, 3, p) + mul_mod(a2, mul_mod(x, x, p), p) + mul_mod(a4, x, p) + a6) % p;
        for y in 0..p {
            let lhs = (mul_mod(y, y, p) + mul_mod(mul_mod(a1, x, p), y, p) + mul_mod(a3, y, p)) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// `1 + Σ_x #{y : y² = 4x³ + b2x² + 2b4x + b6}` for odd p, stepping the
/// cubic by forward differences.
pub fn count_points_legendre(curve: &CurveQ, p: u64) -> Result<u64> {
    let squares = legendre_table(p)?;
    let [b2, b4, b6] = curve.b_invariants();
    let c3 = 4u64 % p;
    let c2 = reduce(b2, p);
    let c1 = reduce(2 * b4, p);
    let c0 = reduce(b6, p);
    let eval = |x: u64| {
        let mut v = c3;
        v = (mul_mod(v, x, p) + c2) % p;
        v = (mul_mod(v, x, p) + c1) % p;
        (mul_mod(v, x, p) + c0) % p
    };
    // f(0), Δf(0), Δ²f(0), Δ³f = 6·c3
    let f0 = eval(0);
    let f1 = eval(1 % p);
    let f2 = eval(2 % p);
    let f3 = eval(3 % p);
    let sub = |a: u64, b: u64| (a + p - b) % p;
    let mut f = f0;
    let mut d1 = sub(f1, f0);
    let mut d2 = sub(sub(f2, f1), d1);
    let d3 = sub(sub(sub(f3, f2), sub(f2, f1)), d2);
    let mut n = 1u64;
    for _ in 0..p {
        n += squares.root_count(f);
        f += d1;
        if f >= p {
            f -= p;
        }
        d1 += d2;
        if d1 >= p {
            d1 -= p;
        }
        d2 += d3;
        if d2 >= p {
            d2 -= p;
        }
    }
    Ok(n)
}

type Affine = Option<(u64, u64)>;

struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

impl ShortCurve {
    fn inv(&self, x: u64) -> u64 {
        pow_mod(x, self.p - 2, self.p)
    }

    fn neg(&self, pt: Affine) -> Affine {
        pt.map(|(x, y)| (x, (self.p - y) % self.p))
    }

    fn add(&self, u: Affine, v: Affine) -> Affine {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, q) | (q, None) => return q,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (3 * mul_mod(x1, x1, p) % p + self.a) % p;
            mul_mod(num, self.inv(2 * y1 % p), p)
        } else {
            mul_mod((y2 + p - y1) % p, self.inv((x2 + p - x1) % p), p)
        };
        let x3 = (mul_mod(lambda, lambda, p) + 2 * p - x1 - x2) % p;
        let y3 = (mul_mod(lambda, (x1 + p - x3) % p, p) + p - y1) % p;
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, mut pt: Affine) -> Affine {
        let mut acc = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, pt);
            }
            pt = self.add(pt, pt);
            k >>= 1;
        }
        acc
    }

    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(self.a, x, p) + self.b) % p
    }
}

/// Mestre-style order finding: intersect the multiples of point orders that
/// fall in the Hasse interval until one candidate survives.
pub fn count_points_bsgs(curve: &CurveQ, p: u64) -> Option<u64> {
    if p <= 3 {
        return None;
    }
    let [b2, b4, b6] = curve.b_invariants();
    let c4 = b2 * b2 - 24 * b4;
    let c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6;
    let e = ShortCurve {
        a: reduce(-27 * c4, p),
        b: reduce(-54 * c6, p),
        p,
    };
    let root = libm::sqrt(p as f64) as u64;
    let lo = (p + 1).saturating_sub(2 * root + 2).max(1);
    let hi = p + 1 + 2 * root + 2;
    let width = hi - lo + 1;
    let step = (libm::sqrt(width as f64) as u64).max(1) + 1;

    let mut candidates: Option<Vec<u64>> = None;
    let mut x = 0u64;
    for _ in 0..64 {
        let pt = loop {
            x += 1;
            if x >= p {
                return None;
            }
            let r = e.rhs(x);
            if r != 0 {
                if let Some(y) = sqrt_mod(r, p) {
                    break Some((x, y));
                }
            }
        };
        let mut baby: Vec<((u64, u64), u64)> = Vec::with_capacity(step as usize);
        let mut cur: Affine = None;
        for j in 0..step {
            if let Some(c) = cur {
                baby.push((c, j));
            }
            cur = e.add(cur, pt);
        }
        baby.sort_unstable();
        let giant = e.mul(step, pt);
        let mut r = e.mul(lo, pt);
        let mut found = Vec::new();
        let mut i = 0u64;
        while lo + i * step <= hi {
            // r + j·P = O  ⇔  j·P = −r
            let base = lo + i * step;
            match e.neg(r) {
                None => found.push(base),
                Some(target) => {
                    let start = baby.partition_point(|(q, _)| *q < target);
                    for &(q, j) in &baby[start..] {
                        if q != target {
                            break;
                        }
                        found.push(base + j);
                    }
                }
            }
            r = e.add(r, giant);
            i += 1;
        }
        found.retain(|&m| m >= lo && m <= hi && in_hasse_interval(m, p));
        found.sort_unstable();
        found.dedup();
        let next: Vec<u64> = match candidates.take() {
            None => found,
            Some(prev) => prev.into_iter().filter(|m| found.binary_search(m).is_ok()).collect(),
        };
        if next.len() == 1 {
            return Some(next[0]);
        }
        if next.is_empty() {
            return None;
        }
        candidates = Some(next);
    }
    None
}

mod bigint_string {
    use alloc::string::{String, ToString};
    use core::str::FromStr;

    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::sieve_primes;

    fn e11() -> CurveQ {
        CurveQ::short(1, 1).unwrap()
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(&[0, 0, 0, 1, 1]), BigInt::from(-496));
        assert_eq!(discriminant(&[0, 0, 0, 0, 1]), BigInt::from(-432));
        assert!(discriminant(&[0, 0, 0, 0, 0]).is_zero());
        assert!(CurveQ::new([0, 0, 0, 0, 0]).is_err());
        // 11a1: y² + y = x³ − x² − 10x − 20, Δ = −11⁵
        assert_eq!(discriminant(&[0, -1, 1, -10, -20]), BigInt::from(-161051));
    }

    #[test]
    fn bad_primes_and_sigma() {
        let e = e11();
        assert_eq!(e.bad_primes(), [2, 31]);
        assert_eq!(e.sigma(5), [2, 5, 31]);
        assert!(e.has_good_reduction(11));
        assert!(!e.has_good_reduction(31));
        assert!(!e.has_good_reduction(2));
        assert_eq!(e.key(), "0.0.0.1.1");
    }

    #[test]
    fn point_count_examples() {
        let e = e11();
        assert_eq!(count_points(&e, 5).unwrap(), 9);
        assert_eq!(count_points(&e, 11).unwrap(), 14);
        assert_eq!(trace_of_frobenius(&e, 5).unwrap(), -3);
        assert_eq!(trace_of_frobenius(&e, 11).unwrap(), -2);
        assert!(count_points(&e, 31).is_err());
        assert!(ell_torsion_trivial(&e, 11, 5).unwrap());
        // ℓ larger than the Hasse upper end cannot divide the group order
        assert!(ell_torsion_trivial(&e, 11, 101).unwrap());
    }

    #[test]
    fn legendre_sum_matches_double_loop() {
        let curves = [
            e11(),
            CurveQ::new([0, -1, 1, -10, -20]).unwrap(),
            CurveQ::new([1, 0, 1, 4, -6]).unwrap(),
        ];
        for e in &curves {
            for p in sieve_primes(400) {
                if !e.has_good_reduction(p) {
                    continue;
                }
                let n = count_points(e, p).unwrap();
                assert_eq!(n, count_points_exhaustive(e, p), "{} at {p}", e.key());
            }
        }
    }

    #[test]
    fn torsion_congruence_for_split_primes() {
        let e = e11();
        for p in sieve_primes(3000).into_iter().filter(|p| p % 5 == 1) {
            if !e.has_good_reduction(p) {
                continue;
            }
            let ap = trace_of_frobenius(&e, p).unwrap();
            assert_eq!(
                ell_torsion_trivial(&e, p, 5).unwrap(),
                ap.rem_euclid(5) != 2,
                "p = {p}"
            );
        }
    }

    #[test]
    fn bsgs_agrees_with_legendre() {
        let curves = [e11(), CurveQ::new([1, 0, 1, 4, -6]).unwrap()];
        for e in &curves {
            for p in sieve_primes(60_000).into_iter().filter(|&p| p > 1000).step_by(97) {
                if !e.has_good_reduction(p) {
                    continue;
                }
                let slow = count_points_legendre(e, p).unwrap();
                assert_eq!(count_points_bsgs(e, p), Some(slow), "{} at {p}", e.key());
            }
        }
        let low = PointCounter { bsgs_threshold: 100 };
        assert_eq!(low.trace(&e11(), 1009).unwrap(), trace_of_frobenius(&e11(), 1009).unwrap());
    }

    #[test]
    fn large_prime_via_bsgs_is_in_hasse_interval() {
        let p = 1_000_000_007;
        let ap = trace_of_frobenius(&e11(), p).unwrap();
        assert!(within_hasse(ap, p));
    }
}

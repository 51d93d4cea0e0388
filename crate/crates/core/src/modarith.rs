//! Exact modular arithmetic on machine words.
//!
//! All moduli are below 2⁶³ and every product goes through a `u128`
//! intermediate. Residue indices fix the identification of μ_ℓ ⊂ F_q^× with
//! Z/ℓ through the *least* primitive root of q, which makes every index
//! reproducible.

use alloc::vec;
use alloc::vec::Vec;

use crate::{precondition, Error, Result};

/// Largest table (in entries) `legendre_table` is willing to allocate.
pub const LEGENDRE_TABLE_CAP: u64 = 1 << 28;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Square-and-multiply with `a` already reduced mod `m`.
#[inline]
pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn reduce(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// `a^e mod m` for any integer `a`.
pub fn mod_pow(a: i64, e: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidModulus(m));
    }
    Ok(pow_mod(reduce(a as i128, m), e, m))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller–Rabin, exact for every `n < 2⁶⁴`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime divisors of `n`, ascending, by trial division.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Exponent of the prime `p` in `n` (for `n > 0`).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// All primes `<= bound`, ascending. Odd-only bit sieve.
pub fn sieve_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    // bit i stands for the odd number 2i + 1
    let slots = (bound as usize).div_ceil(2) + 1;
    let mut composite = vec![0u64; slots.div_ceil(64)];
    let mut out = vec![2];
    let mut i = 1usize;
    while 2 * i < bound as usize {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            let p = 2 * i + 1;
            out.push(p as u64);
            let mut j = p * p;
            while j <= bound as usize {
                composite[j / 2 / 64] |= 1 << (j / 2 % 64);
                j += 2 * p;
            }
        }
        i += 1;
    }
    out
}

/// Smallest generator of (Z/q)^×.
pub fn least_primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q == 2 {
        return Ok(1);
    }
    let factors = prime_divisors(q - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, (q - 1) / r, q) != 1))
        .ok_or_else(|| precondition!("no primitive root found mod {q}"))
}

/// χ^{(q)}(a) as an element of Z/ℓ, relative to the least primitive root of q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueIndex {
    pub value: u64,
    pub generator: u64,
}

impl ResidueIndex {
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

/// Discrete log of `a^{(q-1)/m}` to base `g^{(q-1)/m}` where `g` is the
/// least primitive root of `q` and `m | q - 1`; the result lies in `[0, m)`.
///
/// `m` must be small: the log is found by walking the order-`m` subgroup.
pub fn residue_index_mod(a: i64, q: u64, m: u64, g: u64) -> Result<u64> {
    if m == 0 || !(q - 1).is_multiple_of(m) {
        return Err(precondition!("{q} is not 1 mod {m}"));
    }
    let a = reduce(a as i128, q);
    if a == 0 {
        return Err(precondition!("{q} divides the argument"));
    }
    let cofactor = (q - 1) / m;
    let target = pow_mod(a, cofactor, q);
    let step = pow_mod(g, cofactor, q);
    let mut cur = 1u64;
    for j in 0..m {
        if cur == target {
            return Ok(j);
        }
        cur = mul_mod(cur, step, q);
    }
    Err(precondition!("discrete log not found; is {g} a primitive root mod {q}?"))
}

/// The ℓ-th power residue index of `a` modulo the prime `q ≡ 1 (mod ℓ)`.
pub fn ell_power_residue_index(a: i64, q: u64, ell: u64) -> Result<ResidueIndex> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if !(q - 1).is_multiple_of(ell) {
        return Err(precondition!("{q} is not 1 mod {ell}"));
    }
    let g = least_primitive_root(q)?;
    let value = residue_index_mod(a, q, ell, g)?;
    Ok(ResidueIndex {
        value,
        generator: g,
    })
}

/// Whether `a` is an ℓ-th power modulo `q` (`q ≡ 1 mod ℓ`, `q ∤ a`).
#[inline]
pub fn is_ell_power(a: u64, q: u64, ell: u64) -> bool {
    pow_mod(a, (q - 1) / ell, q) == 1
}

/// A square root of `a` modulo the odd prime `p` (Tonelli–Shanks), if any.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Square flags for F_p:`is_square(x)` iff `x ≡ y² (mod p)` for some `y`.
#[derive(Debug, Clone)]
pub struct SquareTable {
    p: u64,
    flags: Vec<bool>,
}

impl SquareTable {
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn is_square(&self, x: u64) -> bool {
        self.flags[(x % self.p) as usize]
    }

    /// Number of `y` with `y² = x`: 1 at zero, 2 at nonzero squares, else 0.
    #[inline]
    pub fn root_count(&self, x: u64) -> u64 {
        let x = x % self.p;
        if x == 0 {
            1
        } else if self.flags[x as usize] {
            2
        } else {
            0
        }
    }
}

pub fn legendre_table(p: u64) -> Result<SquareTable> {
    if p > LEGENDRE_TABLE_CAP {
        return Err(Error::Resource {
            what: "legendre table",
            requested: p as u128,
            cap: LEGENDRE_TABLE_CAP as u128,
        });
    }
    if p == 2 || !is_prime(p) {
        return Err(precondition!("legendre table needs an odd prime, got {p}"));
    }
    let mut flags = vec![false; p as usize];
    // y and p - y share a square
    let mut sq = 0u64;
    for y in 0..=p / 2 {
        flags[sq as usize] = true;
        sq += 2 * y + 1;
        if sq >= p {
            sq %= p;
        }
    }
    Ok(SquareTable { p, flags })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(bound: u64) -> Vec<u64> {
        (2..=bound)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn sieve_small_cases() {
        assert_eq!(sieve_primes(10), [2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), [2]);
        assert_eq!(sieve_primes(3), [2, 3]);
        assert!(sieve_primes(1).is_empty());
        assert!(sieve_primes(0).is_empty());
    }

    #[test]
    fn sieve_matches_trial_division() {
        let oracle = trial_division_primes(10_000);
        assert_eq!(oracle.len(), 1229);
        assert_eq!(sieve_primes(10_000), oracle);
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(2, 10, 11).unwrap(), 1);
        assert_eq!(mod_pow(2, 5, 11).unwrap(), 10);
        assert_eq!(mod_pow(7, 0, 12).unwrap(), 1);
        assert_eq!(mod_pow(-1, 3, 7).unwrap(), 6);
        assert_eq!(mod_pow(2, 3, 1), Err(Error::InvalidModulus(1)));
        assert_eq!(mod_pow(2, 3, 0), Err(Error::InvalidModulus(0)));
    }

    #[test]
    fn mod_pow_matches_naive() {
        for m in 2..120u64 {
            for a in 0..m.min(40) {
                let mut naive = 1 % m;
                for e in 0..60 {
                    assert_eq!(pow_mod(a, e, m), naive, "{a}^{e} mod {m}");
                    naive = naive * a % m;
                }
            }
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(least_primitive_root(11).unwrap(), 2);
        assert_eq!(least_primitive_root(7).unwrap(), 3);
        assert_eq!(least_primitive_root(5).unwrap(), 2);
        assert_eq!(least_primitive_root(41).unwrap(), 6);
        assert_eq!(least_primitive_root(9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn primitive_root_has_full_order() {
        for q in sieve_primes(10_000).into_iter().skip(1) {
            let g = least_primitive_root(q).unwrap();
            let mut x = g;
            let mut order = 1;
            while x != 1 {
                x = mul_mod(x, g, q);
                order += 1;
            }
            assert_eq!(order, q - 1, "q = {q}");
        }
    }

    #[test]
    fn residue_index_examples() {
        assert_eq!(ell_power_residue_index(1, 11, 5).unwrap().value, 0);
        let two = ell_power_residue_index(2, 11, 5).unwrap();
        assert_ne!(two.value, 0);
        assert_eq!(two.generator, 2);
        // 2 is the generator itself, so its index is 1
        assert_eq!(two.value, 1);
        assert_eq!(ell_power_residue_index(23, 11, 5).unwrap().value, 0);
        assert!(ell_power_residue_index(2, 13, 5).is_err());
        assert!(ell_power_residue_index(22, 11, 5).is_err());
    }

    #[test]
    fn residue_index_zero_iff_ell_power() {
        for ell in [3u64, 5, 7] {
            for q in sieve_primes(1000).into_iter().filter(|q| q % ell == 1) {
                let powers: Vec<bool> = {
                    let mut f = vec![false; q as usize];
                    for x in 1..q {
                        f[pow_mod(x, ell, q) as usize] = true;
                    }
                    f
                };
                for a in 1..q.min(200) {
                    let idx = ell_power_residue_index(a as i64, q, ell).unwrap();
                    assert_eq!(idx.is_zero(), powers[a as usize], "a={a} q={q} ell={ell}");
                    assert_eq!(is_ell_power(a, q, ell), powers[a as usize]);
                }
            }
        }
    }

    #[test]
    fn legendre_examples() {
        let squares = |p: u64| -> Vec<u64> {
            let t = legendre_table(p).unwrap();
            (0..p).filter(|&x| t.is_square(x)).collect()
        };
        assert_eq!(squares(5), [0, 1, 4]);
        assert_eq!(squares(11), [0, 1, 3, 4, 5, 9]);
        assert_eq!(squares(3), [0, 1]);
        assert!(legendre_table(2).is_err());
        assert!(matches!(
            legendre_table(LEGENDRE_TABLE_CAP + 1),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn sqrt_mod_roundtrip() {
        for p in [3u64, 5, 13, 17, 41, 97, 257, 65537, 1_000_000_007] {
            for a in 0..200u64 {
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!(mul_mod(r, r, p), a % p),
                    None => assert_ne!(pow_mod(a % p, (p - 1) / 2, p), 1),
                }
            }
        }
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = sieve_primes(20_000);
        let mut it = primes.iter().peekable();
        for n in 0..=20_000u64 {
            let expect = it.peek().is_some_and(|&&p| p == n);
            if expect {
                it.next();
            }
            assert_eq!(is_prime(n), expect, "n = {n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn index_is_a_homomorphism(qi in 0usize..150, a in 1u64..100_000, b in 1u64..100_000) {
                let qs: Vec<u64> = sieve_primes(5000).into_iter().filter(|q| q % 5 == 1).collect();
                let q = qs[qi % qs.len()];
                prop_assume!(a % q != 0 && b % q != 0);
                let ia = ell_power_residue_index(a as i64, q, 5).unwrap().value;
                let ib = ell_power_residue_index(b as i64, q, 5).unwrap().value;
                let iab = ell_power_residue_index((a * b) as i64, q, 5).unwrap().value;
                prop_assert_eq!((ia + ib) % 5, iab);
            }
        }
    }
}

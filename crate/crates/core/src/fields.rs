//! Abelian ℓ-extensions of Q presented by their Dirichlet character groups.
//!
//! A field is never given by a polynomial. Instead a descriptor lists
//! generators of its character group; each generator is a combination of
//! canonical characters ψ_{q,k} of prime conductor q ≡ 1 (mod ℓ^k) and
//! order ℓ^k, where ψ_{q,k}(a) is the discrete log of `a` to the least
//! primitive root of q, read mod ℓ^k. Splitting, ramification, inertial
//! degrees and discriminants all reduce to evaluating such logs.
//!
//! Internally every character is a vector over the conductors with entries
//! in Z/ℓ^M, where ℓ^M is the largest order in play: `a·ψ_{q,k}` becomes
//! the entry `a·ℓ^{M−k}`. Evaluation at a prime r is then
//! `Σ_q x_q · log_q(r) (mod ℓ^M)`.
//!
//! # Inertial degree in a compositum
//!
//! For a ramified prime p, the maximal subextension unramified at p is cut
//! out by the characters whose p-entry vanishes. The residue degree f(v|p)
//! is the order of Frobenius there, i.e. the size of `{χ(p)}` as χ runs over
//! that subgroup. Example, ℓ = 5: in L^{11}·L^{31} the characters unramified
//! at 31 are the powers of ψ_{11,1}; 31 ≡ 9 (mod 11) and 9² = 81 ≢ 1, so
//! ψ_{11,1}(31) ≠ 0 and f = 5.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::modarith::{
    is_prime, least_primitive_root, mul_mod, pow_mod, residue_index_mod, valuation,
};
use crate::{invalid, precondition, Error, Result};

/// Largest character group that will be enumerated element by element.
pub const ENUMERATION_CAP: u64 = 1 << 20;

/// `exponent · ψ_{conductor, k}` with ψ of order `ell^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CyclicCharacter {
    pub conductor: u64,
    pub order_exp: u32,
    /// A unit modulo `ell^order_exp`.
    pub exponent: u64,
}

/// A product of cyclic characters with pairwise distinct conductors,
/// kept sorted by conductor. The empty product is the trivial character.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Generator(pub Vec<CyclicCharacter>);

impl Generator {
    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }

    /// The order-ℓ generator `Σ c_q ψ_{q,1}` from a coefficient map.
    pub fn from_coefficients(ell: u64, coeffs: &BTreeMap<u64, u64>) -> Self {
        Generator(
            coeffs
                .iter()
                .filter(|(_, c)| *c % ell != 0)
                .map(|(&q, &c)| CyclicCharacter {
                    conductor: q,
                    order_exp: 1,
                    exponent: c % ell,
                })
                .collect(),
        )
    }
}

/// Per-conductor data: the conductor, the largest order exponent used at it
/// and its least primitive root.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Slot {
    q: u64,
    k_max: u32,
    root: u64,
}

/// An abelian ℓ-extension of Q given by generators of its character group.
///
/// One generator may be marked as the twistable top layer; [`twist`] acts on
/// it. The trivial descriptor (no generators) is Q.
#[derive(Debug, Clone)]
pub struct AbelianFieldDesc {
    ell: u64,
    generators: Vec<Generator>,
    top: Option<usize>,
    slots: Vec<Slot>,
    m: u32,
    /// generators embedded in (Z/ℓ^m)^slots
    vectors: Vec<Vec<u64>>,
}

impl PartialEq for AbelianFieldDesc {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell && self.generators == other.generators && self.top == other.top
    }
}

impl Eq for AbelianFieldDesc {}

impl AbelianFieldDesc {
    /// Q itself.
    pub fn trivial(ell: u64) -> Result<Self> {
        Self::new(ell, Vec::new(), None)
    }

    /// Q with a marked trivial layer, ready to be twisted.
    pub fn trivial_layer(ell: u64) -> Result<Self> {
        Self::new(ell, vec![Generator::default()], Some(0))
    }

    pub fn new(ell: u64, generators: Vec<Generator>, top: Option<usize>) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if let Some(t) = top {
            if t >= generators.len() {
                return Err(invalid!("top layer index {t} out of range"));
            }
        }
        let mut k_max: BTreeMap<u64, u32> = BTreeMap::new();
        let mut generators = generators;
        for g in generators.iter_mut() {
            *g = normalize_generator(ell, core::mem::take(g))?;
            for c in &g.0 {
                let e = k_max.entry(c.conductor).or_insert(0);
                *e = (*e).max(c.order_exp);
            }
        }
        let m = k_max.values().copied().max().unwrap_or(1);
        if (m as f64) * libm::log2(ell as f64) > 62.0 {
            return Err(invalid!("character order {ell}^{m} too large"));
        }
        let mut slots = Vec::with_capacity(k_max.len());
        for (&q, &k) in &k_max {
            let ek = ell.pow(k);
            if !is_prime(q) {
                return Err(Error::NotPrime(q));
            }
            if q == ell {
                return Err(invalid!(
                    "conductor {q} equals ell; only tamely ramified conductors are supported"
                ));
            }
            if (q - 1) % ek != 0 {
                return Err(invalid!("conductor {q} is not 1 mod {ell}^{k}"));
            }
            slots.push(Slot {
                q,
                k_max: k,
                root: least_primitive_root(q)?,
            });
        }
        let modulus = ell.pow(m);
        let vectors = generators
            .iter()
            .map(|g| {
                let mut v = vec![0u64; slots.len()];
                for c in &g.0 {
                    let i = slots.binary_search_by_key(&c.conductor, |s| s.q).unwrap();
                    v[i] = c.exponent * ell.pow(m - c.order_exp) % modulus;
                }
                v
            })
            .collect();
        Ok(AbelianFieldDesc {
            ell,
            generators,
            top,
            slots,
            m,
            vectors,
        })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn top_layer(&self) -> Option<usize> {
        self.top
    }

    /// Conductors appearing in some generator, ascending.
    pub fn conductors(&self) -> Vec<u64> {
        self.slots.iter().map(|s| s.q).collect()
    }

    fn modulus(&self) -> u64 {
        self.ell.pow(self.m)
    }

    /// Invariant factors of the character group (each a power of ℓ > 1).
    pub fn invariants(&self) -> Vec<u64> {
        let n = self.modulus();
        let mut out: Vec<u64> = smith_valuations(&self.vectors, self.slots.len(), self.ell, self.m)
            .into_iter()
            .map(|v| n / self.ell.pow(v))
            .collect();
        out.sort_unstable();
        out
    }

    /// `[F : Q]`, the order of the character group.
    pub fn degree(&self) -> u64 {
        self.invariants().iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.degree() == 1
    }

    /// `log_q(r)` reduced mod ℓ^{k_max(q)} for every slot.
    fn logs_at(&self, r: u64) -> Result<Vec<u64>> {
        self.slots
            .iter()
            .map(|s| {
                let order = self.ell.pow(s.k_max);
                residue_index_mod((r % s.q) as i64, s.q, order, s.root)
            })
            .collect()
    }

    /// `χ(r)` in Z/ℓ^M for an embedded character, given logs at r.
    fn eval_embedded(&self, chi: &[u64], logs: &[u64], skip: Option<usize>) -> u64 {
        let n = self.modulus();
        let mut acc = 0u64;
        for (i, (&x, &l)) in chi.iter().zip(logs).enumerate() {
            if Some(i) == skip || x == 0 {
                continue;
            }
            acc = (acc + mul_mod(x, l, n)) % n;
        }
        acc
    }

    /// All elements of the character group, embedded. Errors above the cap.
    fn elements(&self) -> Result<Vec<Vec<u64>>> {
        let degree = self.degree();
        if degree > ENUMERATION_CAP {
            return Err(Error::Resource {
                what: "character group enumeration",
                requested: degree as u128,
                cap: ENUMERATION_CAP as u128,
            });
        }
        let n = self.modulus();
        let mut set: BTreeSet<Vec<u64>> = BTreeSet::new();
        set.insert(vec![0; self.slots.len()]);
        for g in &self.vectors {
            let current: Vec<Vec<u64>> = set.iter().cloned().collect();
            for base in current {
                let mut x = base;
                loop {
                    for (a, b) in x.iter_mut().zip(g) {
                        *a = (*a + b) % n;
                    }
                    if !set.insert(x.clone()) {
                        break;
                    }
                }
            }
        }
        debug_assert_eq!(set.len() as u64, degree);
        Ok(set.into_iter().collect())
    }

    fn slot_of(&self, p: u64) -> Option<usize> {
        self.slots.binary_search_by_key(&p, |s| s.q).ok()
    }

    /// Whether the prime `r` (not a conductor) splits completely.
    pub fn splits_completely(&self, r: u64) -> Result<bool> {
        if self.slot_of(r).is_some() {
            return Err(precondition!(
                "{r} is ramified in the field; use inertial_degree for ramified primes"
            ));
        }
        if self.vectors.is_empty() {
            return Ok(true);
        }
        let logs = self.logs_at(r)?;
        Ok(self.vectors.iter().all(|g| self.eval_embedded(g, &logs, None) == 0))
    }

    /// Conductors that actually ramify, ascending.
    pub fn ramified_primes(&self) -> Vec<u64> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(i, _)| self.vectors.iter().any(|g| g[*i] != 0))
            .map(|(_, s)| s.q)
            .collect()
    }

    /// Residue degree f(v|p) of a ramified prime.
    pub fn inertial_degree(&self, p: u64) -> Result<u64> {
        let i = match self.slot_of(p) {
            Some(i) if self.vectors.iter().any(|g| g[i] != 0) => i,
            _ => {
                return Err(precondition!(
                    "{p} is unramified in the field; use splits_completely instead"
                ))
            }
        };
        // the log at p's own slot is undefined and never used
        let logs = self
            .slots
            .iter()
            .enumerate()
            .map(|(j, s)| {
                if j == i {
                    Ok(0)
                } else {
                    residue_index_mod((p % s.q) as i64, s.q, self.ell.pow(s.k_max), s.root)
                }
            })
            .collect::<Result<Vec<u64>>>()?;
        let values: BTreeSet<u64> = self
            .elements()?
            .iter()
            .filter(|chi| chi[i] == 0)
            .map(|chi| self.eval_embedded(chi, &logs, Some(i)))
            .collect();
        Ok(values.len() as u64)
    }

    /// `|Δ_F| = Π_q q^{#{χ : χ ramified at q}}` (conductor–discriminant).
    pub fn discriminant_abs(&self) -> BigUint {
        let degree = self.degree();
        let mut disc = BigUint::one();
        for (i, s) in self.slots.iter().enumerate() {
            // the q-projection of the group is cyclic of order ℓ^{m - min v}
            let min_v = self
                .vectors
                .iter()
                .filter(|g| g[i] != 0)
                .map(|g| valuation(g[i], self.ell))
                .min();
            if let Some(v) = min_v {
                let image = self.ell.pow(self.m - v);
                let exponent = degree - degree / image;
                disc *= BigUint::from(s.q).pow(exponent as u32);
            }
        }
        disc
    }

    /// Same discriminant by summing conductors over every group element.
    pub fn discriminant_by_enumeration(&self) -> Result<BigUint> {
        let mut disc = BigUint::one();
        for chi in self.elements()? {
            for (i, s) in self.slots.iter().enumerate() {
                if chi[i] != 0 {
                    disc *= s.q;
                }
            }
        }
        Ok(disc)
    }

    /// Whether `other` has the same character group (hence is the same field).
    pub fn same_field(&self, other: &AbelianFieldDesc) -> Result<bool> {
        if self.ell != other.ell || self.degree() != other.degree() {
            return Ok(false);
        }
        let mine = self.character_set()?;
        let theirs = other.character_set()?;
        Ok(mine == theirs)
    }

    /// Characters as conductor → (value as a fraction with denominator ℓ^M).
    fn character_set(&self) -> Result<BTreeSet<Vec<(u64, u64, u32)>>> {
        Ok(self
            .elements()?
            .into_iter()
            .map(|chi| {
                chi.iter()
                    .zip(&self.slots)
                    .filter(|(x, _)| **x != 0)
                    .map(|(&x, s)| {
                        // reduce x / ℓ^m to lowest terms
                        let v = valuation(x, self.ell).min(self.m);
                        (s.q, x / self.ell.pow(v), self.m - v)
                    })
                    .collect()
            })
            .collect())
    }
}

/// Bring exponents to canonical form: `a·ψ_{q,k}` with `a = ℓ^j·u` becomes
/// `u·ψ_{q,k−j}`; zero components disappear; conductors sorted.
fn normalize_generator(ell: u64, g: Generator) -> Result<Generator> {
    let mut by_q: BTreeMap<u64, CyclicCharacter> = BTreeMap::new();
    for c in g.0 {
        if c.order_exp == 0 {
            return Err(invalid!("character order exponent must be positive"));
        }
        if by_q.contains_key(&c.conductor) {
            return Err(invalid!("conductor {} repeated within a generator", c.conductor));
        }
        let order = ell
            .checked_pow(c.order_exp)
            .ok_or_else(|| invalid!("order {ell}^{} overflows", c.order_exp))?;
        let mut a = c.exponent % order;
        if a == 0 {
            continue;
        }
        let mut k = c.order_exp;
        while a % ell == 0 {
            a /= ell;
            k -= 1;
        }
        by_q.insert(
            c.conductor,
            CyclicCharacter {
                conductor: c.conductor,
                order_exp: k,
                exponent: a % ell.pow(k),
            },
        );
    }
    Ok(Generator(by_q.into_values().collect()))
}

fn inv_unit(u: u64, ell: u64, m: u32) -> u64 {
    let n = ell.pow(m);
    let phi = n / ell * (ell - 1);
    pow_mod(u, phi - 1, n)
}

/// Valuations of the nonzero Smith diagonal of a matrix over Z/ℓ^m.
fn smith_valuations(rows: &[Vec<u64>], ncols: usize, ell: u64, m: u32) -> Vec<u32> {
    let n = ell.pow(m);
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % n).collect()).collect();
    let nrows = a.len();
    let mut out = Vec::new();
    let mut t = 0;
    while t < nrows && t < ncols {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let v = valuation(x, ell);
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        a.swap(t, i);
        for row in a.iter_mut() {
            row.swap(t, j);
        }
        let pv = ell.pow(v);
        let unit = a[t][t] / pv;
        let inv = inv_unit(unit, ell, m);
        for x in a[t].iter_mut() {
            *x = mul_mod(*x, inv, n);
        }
        // a[t][t] == ℓ^v now; every other entry in row/col t is a multiple
        for i in 0..nrows {
            if i != t && a[i][t] != 0 {
                let f = a[i][t] / pv;
                for j in 0..ncols {
                    let sub = mul_mod(f, a[t][j], n);
                    a[i][j] = (a[i][j] + n - sub) % n;
                }
            }
        }
        for j in 0..ncols {
            if j != t && a[t][j] != 0 {
                let f = a[t][j] / pv;
                for row in a.iter_mut() {
                    let sub = mul_mod(f, row[t], n);
                    row[j] = (row[j] + n - sub) % n;
                }
            }
        }
        out.push(v);
        t += 1;
    }
    out
}

/// Whether every ramified p is ≡ 1 (mod ℓ^N) and totally ramified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScholzReport {
    pub level: u32,
    pub holds: bool,
    pub failures: Vec<ScholzFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScholzFailure {
    pub prime: u64,
    /// `"congruence"` or `"total-ramification"`.
    pub clause: String,
    pub detail: String,
}

pub fn scholz_check(desc: &AbelianFieldDesc, level: u32) -> Result<ScholzReport> {
    let modulus = desc
        .ell
        .checked_pow(level)
        .ok_or_else(|| invalid!("Scholz level {level} overflows"))?;
    let mut failures = Vec::new();
    for p in desc.ramified_primes() {
        if (p - 1) % modulus != 0 {
            failures.push(ScholzFailure {
                prime: p,
                clause: "congruence".into(),
                detail: format!("{p} is not 1 mod {modulus}"),
            });
        }
        let f = desc.inertial_degree(p)?;
        if f != 1 {
            failures.push(ScholzFailure {
                prime: p,
                clause: "total-ramification".into(),
                detail: format!("inertial degree {f}"),
            });
        }
    }
    Ok(ScholzReport {
        level,
        holds: failures.is_empty(),
        failures,
    })
}

/// The degree-ℓ field cut out by `Σ c_q χ^{(q)}`, marked as twistable.
pub fn character_field(ell: u64, coeffs: &BTreeMap<u64, u64>) -> Result<AbelianFieldDesc> {
    for &q in coeffs.keys() {
        if q % ell != 1 {
            return Err(precondition!("{q} is not 1 mod {ell}"));
        }
    }
    let g = Generator::from_coefficients(ell, coeffs);
    if g.is_trivial() {
        return AbelianFieldDesc::trivial(ell);
    }
    AbelianFieldDesc::new(ell, vec![g], Some(0))
}

/// Multiply the marked top generator by the order-ℓ character `f`.
pub fn twist(desc: &AbelianFieldDesc, f: &BTreeMap<u64, u64>) -> Result<AbelianFieldDesc> {
    let ell = desc.ell;
    let top = desc
        .top
        .ok_or_else(|| precondition!("descriptor has no marked top layer to twist"))?;
    let mut sum: BTreeMap<u64, (u32, u64)> = BTreeMap::new();
    for c in &desc.generators[top].0 {
        sum.insert(c.conductor, (c.order_exp, c.exponent));
    }
    for (&q, &c) in f {
        if c % ell == 0 {
            continue;
        }
        if q % ell != 1 {
            return Err(precondition!("{q} is not 1 mod {ell}"));
        }
        // c·ψ_{q,1} = c·ℓ^{k−1}·ψ_{q,k}
        let entry = sum.entry(q).or_insert((1, 0));
        let k = entry.0;
        let order = ell.pow(k);
        entry.1 = (entry.1 + c % ell * ell.pow(k - 1)) % order;
    }
    let twisted = Generator(
        sum.into_iter()
            .map(|(q, (k, a))| CyclicCharacter {
                conductor: q,
                order_exp: k,
                exponent: a,
            })
            .collect(),
    );
    let twisted = normalize_generator(ell, twisted)?;
    if twisted.is_trivial() {
        return Err(Error::Degenerate(
            "twist collapses the top layer to the trivial character".into(),
        ));
    }
    let mut gens = desc.generators.clone();
    gens[top] = twisted;
    AbelianFieldDesc::new(ell, gens, Some(top))
}

fn fmt_generator(ell: u64, g: &Generator, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if g.is_trivial() {
        return f.write_str("1");
    }
    for (i, c) in g.0.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        write!(f, "{}^{}", c.conductor, c.exponent)?;
        if c.order_exp > 1 {
            write!(f, "[{}]", ell.pow(c.order_exp))?;
        }
    }
    Ok(())
}

/// Canonical text form, e.g. `ell=5; gen: 11^1*31^2; top: 101^3[25]`.
///
/// `q^a` is `a·ψ_{q,1}`; `q^a[ℓ^k]` carries order ℓ^k. The marked top layer
/// is written `top:`, the trivial character `1`.
impl fmt::Display for AbelianFieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ell={}", self.ell)?;
        for (i, g) in self.generators.iter().enumerate() {
            f.write_str(if Some(i) == self.top { "; top: " } else { "; gen: " })?;
            fmt_generator(self.ell, g, f)?;
        }
        Ok(())
    }
}

impl FromStr for AbelianFieldDesc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(';').map(str::trim);
        let head = parts.next().unwrap_or_default();
        let ell: u64 = head
            .strip_prefix("ell=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected 'ell=<prime>', got '{head}'")))?;
        let mut gens = Vec::new();
        let mut top = None;
        for part in parts {
            if part.is_empty() {
                continue;
            }
            let (kind, body) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected 'gen:' or 'top:', got '{part}'")))?;
            match kind.trim() {
                "gen" => {}
                "top" if top.is_none() => top = Some(gens.len()),
                "top" => return Err(Error::Parse("more than one top layer".into())),
                other => return Err(Error::Parse(format!("unknown field '{other}'"))),
            }
            gens.push(parse_generator(ell, body.trim())?);
        }
        AbelianFieldDesc::new(ell, gens, top)
    }
}

fn parse_generator(ell: u64, body: &str) -> Result<Generator> {
    if body == "1" {
        return Ok(Generator::default());
    }
    let mut out = Vec::new();
    for term in body.split('*').map(str::trim) {
        let bad = || Error::Parse(format!("bad character term '{term}'"));
        let (base, order) = match term.split_once('[') {
            Some((b, rest)) => {
                let o: u64 = rest.strip_suffix(']').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                (b, o)
            }
            None => (term, ell),
        };
        let (q, a) = base.split_once('^').ok_or_else(bad)?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let mut k = 0;
        let mut o = order;
        while o > 1 && o % ell == 0 {
            o /= ell;
            k += 1;
        }
        if o != 1 || k == 0 {
            return Err(Error::Parse(format!("order {order} is not a positive power of {ell}")));
        }
        out.push(CyclicCharacter {
            conductor: q,
            order_exp: k,
            exponent: a,
        });
    }
    Ok(Generator(out))
}

impl Serialize for AbelianFieldDesc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AbelianFieldDesc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Evaluate `χ^{(q)}`-combinations quickly at many primes: the data needed
/// for splitting tests of a fixed descriptor, precomputed once.
#[derive(Debug, Clone)]
pub struct SplitTester {
    desc: AbelianFieldDesc,
}

impl SplitTester {
    pub fn new(desc: AbelianFieldDesc) -> Self {
        SplitTester { desc }
    }

    /// `false` for conductors (ramified primes never split completely).
    pub fn splits(&self, r: u64) -> bool {
        if self.desc.slot_of(r).is_some() {
            return false;
        }
        if self.desc.vectors.is_empty() {
            return true;
        }
        // fast path for order-ℓ single-slot generators: ℓ-th power tests
        if self.desc.m == 1 && self.desc.slots.len() == 1 {
            let s = &self.desc.slots[0];
            return pow_mod(r % s.q, (s.q - 1) / self.desc.ell, s.q) == 1;
        }
        self.desc.splits_completely(r).unwrap_or(false)
    }
}

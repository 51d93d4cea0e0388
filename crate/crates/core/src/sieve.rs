//! The prime set 𝔗_{E,K} and Chebotarev-style prime searches.
//!
//! A prime p lies in 𝔗_{E,K} when
//!
//! - (a) p ≠ ℓ,
//! - (b) E has good reduction at p,
//! - (c) p splits completely in K(μ_ℓ), tested as p ≡ 1 (mod ℓ) together
//!   with complete splitting in K (K is an ℓ-power extension, so it is
//!   linearly disjoint from Q(μ_ℓ)),
//! - (d) a_p ≢ 2 (mod ℓ).
//!
//! Clauses are evaluated in that order so the point count, by far the most
//! expensive step, only runs for primes that survive the congruences.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveQ, PointCounter};
use crate::fields::{AbelianFieldDesc, SplitTester};
use crate::modarith::{is_prime, least_primitive_root, pow_mod, residue_index_mod, sieve_primes};
use crate::{invalid, precondition, Error, Rational, Result};

/// Anything that can supply a_p for good primes: a point counter or a cache.
pub trait TraceSource {
    fn trace(&self, curve: &CurveQ, p: u64) -> Result<i64>;
}

impl TraceSource for PointCounter {
    fn trace(&self, curve: &CurveQ, p: u64) -> Result<i64> {
        PointCounter::trace(self, curve, p)
    }
}

/// Curve, ℓ and base field K defining 𝔗_{E,K}.
#[derive(Debug, Clone)]
pub struct TEParams {
    curve: CurveQ,
    ell: u64,
    base: AbelianFieldDesc,
    splitter: SplitTester,
}

impl TEParams {
    /// Any prime ℓ; use [`TEParams::theorem`] to insist on ℓ ≥ 5.
    pub fn new(curve: CurveQ, ell: u64, base: AbelianFieldDesc) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if base.ell() != ell {
            return Err(invalid!("base field is an {}-extension, expected ell = {ell}", base.ell()));
        }
        Ok(TEParams {
            splitter: SplitTester::new(base.clone()),
            curve,
            ell,
            base,
        })
    }

    /// Parameters for which the surrounding theory applies (ℓ ≥ 5).
    pub fn theorem(curve: CurveQ, ell: u64, base: AbelianFieldDesc) -> Result<Self> {
        if ell < 5 {
            return Err(precondition!("theorem mode needs ell >= 5, got {ell}"));
        }
        Self::new(curve, ell, base)
    }

    /// 𝔗_{E,Q}.
    pub fn over_q(curve: CurveQ, ell: u64) -> Result<Self> {
        Self::new(curve, ell, AbelianFieldDesc::trivial(ell)?)
    }

    pub fn curve(&self) -> &CurveQ {
        &self.curve
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn base(&self) -> &AbelianFieldDesc {
        &self.base
    }

    /// Σ: ℓ and the bad primes of the curve.
    pub fn sigma(&self) -> Vec<u64> {
        self.curve.sigma(self.ell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TEClause {
    /// p ≠ ℓ
    A,
    /// good reduction
    B,
    /// split in K(μ_ℓ)
    C,
    /// a_p ≢ 2 mod ℓ
    D,
}

impl TEClause {
    pub fn label(self) -> &'static str {
        match self {
            TEClause::A => "a",
            TEClause::B => "b",
            TEClause::C => "c",
            TEClause::D => "d",
        }
    }
}

/// Outcome of each clause; `None` means evaluation stopped earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TEReport {
    pub p: u64,
    pub a: bool,
    pub b: Option<bool>,
    pub c: Option<bool>,
    pub d: Option<bool>,
    pub ap: Option<i64>,
}

impl TEReport {
    pub fn member(&self) -> bool {
        self.a && self.b == Some(true) && self.c == Some(true) && self.d == Some(true)
    }

    pub fn first_failure(&self) -> Option<TEClause> {
        if !self.a {
            Some(TEClause::A)
        } else if self.b != Some(true) {
            Some(TEClause::B)
        } else if self.c != Some(true) {
            Some(TEClause::C)
        } else if self.d != Some(true) {
            Some(TEClause::D)
        } else {
            None
        }
    }
}

/// Clause-by-clause membership of the prime `p` in 𝔗_{E,K}.
pub fn in_te_report<S: TraceSource + ?Sized>(p: u64, params: &TEParams, source: &S) -> Result<TEReport> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let ell = params.ell;
    let mut r = TEReport {
        p,
        a: p != ell,
        b: None,
        c: None,
        d: None,
        ap: None,
    };
    if !r.a {
        return Ok(r);
    }
    let good = params.curve.has_good_reduction(p);
    r.b = Some(good);
    if !good {
        return Ok(r);
    }
    let split = p % ell == 1 && params.splitter.splits(p);
    r.c = Some(split);
    if !split {
        return Ok(r);
    }
    let ap = source.trace(&params.curve, p)?;
    r.ap = Some(ap);
    r.d = Some(ap.rem_euclid(ell as i64) != 2 % ell as i64);
    Ok(r)
}

pub fn in_te<S: TraceSource + ?Sized>(p: u64, params: &TEParams, source: &S) -> Result<bool> {
    Ok(in_te_report(p, params, source)?.member())
}

/// `(ℓ²−ℓ−1) / ([K:Q]·(ℓ²−1)(ℓ−1))`, the natural density of 𝔗_{E,K}
/// when the mod-ℓ image is GL₂(F_ℓ) and K ∩ Q(E[ℓ]) = Q.
pub fn theoretical_density(ell: u64, base_degree: u64) -> Rational {
    let l = ell as i64;
    Rational::new(l * l - l - 1, base_degree as i64 * (l * l - 1) * (l - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub count: u64,
    pub total: u64,
    pub estimate: f64,
    #[serde(with = "crate::rational_string")]
    pub theoretical: Rational,
    pub bound: u64,
}

/// Proportion of primes `p ≤ bound` lying in 𝔗_{E,K}.
pub fn empirical_density<S: TraceSource + ?Sized>(
    params: &TEParams,
    bound: u64,
    source: &S,
) -> Result<DensityReport> {
    let primes = sieve_primes(bound);
    let mut count = 0;
    for &p in &primes {
        if in_te(p, params, source)? {
            count += 1;
        }
    }
    Ok(density_report(params, bound, count, primes.len() as u64))
}

/// Assemble a report from externally computed counts.
pub fn density_report(params: &TEParams, bound: u64, count: u64, total: u64) -> DensityReport {
    DensityReport {
        count,
        total,
        estimate: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        theoretical: theoretical_density(params.ell, params.base.degree()),
        bound,
    }
}

/// Conjunction of conditions on a prime p.
#[derive(Debug, Clone, Default)]
pub struct SearchSpec {
    /// p ≡ 1 (mod ℓ^level); 0 imposes nothing.
    pub level: u32,
    pub in_te: bool,
    pub avoid: BTreeSet<u64>,
    pub split_in: Vec<AbelianFieldDesc>,
    /// `(v, c_v)`: the ℓ-th power residue index of v modulo p must be c_v.
    pub symbol_targets: Vec<(u64, u64)>,
    /// Products `Π v^e` that must not be ℓ-th powers modulo p.
    pub not_ell_power: Vec<Vec<(u64, u64)>>,
    /// Restrict the search to this single prime.
    pub pinned: Option<u64>,
}

impl SearchSpec {
    /// The congruence level actually enforced: symbol targets force p ≡ 1 mod ℓ.
    pub fn effective_level(&self) -> u32 {
        if self.symbol_targets.is_empty() && self.not_ell_power.is_empty() && !self.in_te {
            self.level
        } else {
            self.level.max(1)
        }
    }

    /// Reject specifications that no prime can satisfy for syntactic reasons.
    pub fn validate(&self, ell: u64) -> Result<()> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        let modulus = ell
            .checked_pow(self.effective_level())
            .ok_or_else(|| invalid!("level {} overflows", self.level))?;
        for &(v, c) in &self.symbol_targets {
            if c >= ell {
                return Err(invalid!("symbol target {c} for {v} is not in [0, {ell})"));
            }
            if v < 2 {
                return Err(invalid!("symbol target base {v} must be at least 2"));
            }
        }
        for prod in &self.not_ell_power {
            if prod.iter().all(|&(_, e)| e % ell == 0) {
                return Err(invalid!("inconsistent search: an ell-th power is required to be a non-power"));
            }
        }
        if let Some(p) = self.pinned {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if modulus > 1 && p % modulus != 1 {
                return Err(invalid!(
                    "inconsistent search: pinned prime {p} is not 1 mod {modulus}"
                ));
            }
            if self.avoid.contains(&p) {
                return Err(invalid!("inconsistent search: pinned prime {p} is also avoided"));
            }
            if self.symbol_targets.iter().any(|&(v, _)| v % p == 0) {
                return Err(invalid!("inconsistent search: pinned prime {p} divides a symbol base"));
            }
        }
        Ok(())
    }

    /// `1 / [L(μ_{ℓ^N}, ℓ-th roots of the symbol bases) : Q]`, ignoring the
    /// 𝔗 condition and assuming the pieces are linearly disjoint; each
    /// non-power condition contributes a factor (ℓ−1)/ℓ.
    pub fn reference_density(&self, ell: u64) -> f64 {
        let n = self.effective_level();
        let mut degree = if n == 0 { 1.0 } else { (ell - 1) as f64 * libm::pow(ell as f64, n as f64 - 1.0) };
        for d in &self.split_in {
            degree *= d.degree() as f64;
        }
        degree *= libm::pow(ell as f64, self.symbol_targets.len() as f64);
        let nonpower = (ell - 1) as f64 / ell as f64;
        libm::pow(nonpower, self.not_ell_power.len() as f64) / degree
    }
}

/// A compiled search: per-target data precomputed once.
#[derive(Debug, Clone)]
pub struct Matcher<'a> {
    spec: &'a SearchSpec,
    params: Option<&'a TEParams>,
    ell: u64,
    modulus: u64,
    splitters: Vec<SplitTester>,
}

impl<'a> Matcher<'a> {
    pub fn new(spec: &'a SearchSpec, ell: u64, params: Option<&'a TEParams>) -> Result<Self> {
        spec.validate(ell)?;
        if spec.in_te {
            match params {
                None => return Err(precondition!("in_TE search needs curve parameters")),
                Some(t) if t.ell != ell => {
                    return Err(invalid!("search ell {ell} differs from 𝔗 parameters ell {}", t.ell))
                }
                _ => {}
            }
        }
        Ok(Matcher {
            spec,
            params,
            ell,
            modulus: ell.pow(spec.effective_level()),
            splitters: spec.split_in.iter().cloned().map(SplitTester::new).collect(),
        })
    }

    /// Whether the prime `p` meets every clause; cheapest checks first.
    pub fn matches<S: TraceSource + ?Sized>(&self, p: u64, source: &S) -> Result<bool> {
        if self.spec.pinned.is_some_and(|q| q != p) || self.spec.avoid.contains(&p) {
            return Ok(false);
        }
        if self.modulus > 1 && p % self.modulus != 1 {
            return Ok(false);
        }
        if !self.splitters.iter().all(|s| s.splits(p)) {
            return Ok(false);
        }
        if !self.spec.symbol_targets.is_empty() {
            if self.spec.symbol_targets.iter().any(|&(v, _)| v % p == 0) {
                return Ok(false);
            }
            let g = least_primitive_root(p)?;
            for &(v, c) in &self.spec.symbol_targets {
                let idx = if c == 0 {
                    // cheap ℓ-th power test
                    if pow_mod(v % p, (p - 1) / self.ell, p) == 1 { 0 } else { 1 }
                } else {
                    residue_index_mod(v as i64, p, self.ell, g)?
                };
                if idx != c {
                    return Ok(false);
                }
            }
        }
        for prod in &self.spec.not_ell_power {
            let mut b = 1u64;
            for &(v, e) in prod {
                if v % p == 0 {
                    return Ok(false);
                }
                b = crate::modarith::mul_mod(b, pow_mod(v % p, e, p), p);
            }
            if pow_mod(b, (p - 1) / self.ell, p) == 1 {
                return Ok(false);
            }
        }
        if self.spec.in_te {
            let params = self.params.expect("checked in new");
            if !in_te(p, params, source)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// When to stop scanning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimit {
    pub max_hits: Option<usize>,
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub primes: Vec<u64>,
    /// primes examined
    pub scanned: u64,
    pub hit_rate: f64,
    pub reference_density: f64,
    /// the bound was reached before `max_hits`; an empty result is only
    /// "not found below the bound"
    pub exhausted: bool,
    pub bound: u64,
}

impl SearchOutcome {
    pub fn not_found(&self) -> bool {
        self.primes.is_empty()
    }
}

/// Ascending primes `≤ limit.bound` satisfying `spec`.
pub fn find_primes<S: TraceSource + ?Sized>(
    spec: &SearchSpec,
    ell: u64,
    params: Option<&TEParams>,
    limit: SearchLimit,
    source: &S,
) -> Result<SearchOutcome> {
    let matcher = Matcher::new(spec, ell, params)?;
    let candidates: Vec<u64> = match spec.pinned {
        Some(p) if p <= limit.bound => Vec::from([p]),
        Some(_) => Vec::new(),
        None => sieve_primes(limit.bound),
    };
    let mut primes = Vec::new();
    let mut scanned = 0u64;
    let mut exhausted = true;
    for p in candidates {
        if limit.max_hits.is_some_and(|m| primes.len() >= m) {
            exhausted = false;
            break;
        }
        scanned += 1;
        if matcher.matches(p, source)? {
            primes.push(p);
        }
    }
    if limit.max_hits.is_some_and(|m| primes.len() >= m) {
        exhausted = false;
    }
    Ok(SearchOutcome {
        hit_rate: if scanned == 0 { 0.0 } else { primes.len() as f64 / scanned as f64 },
        reference_density: spec.reference_density(ell),
        primes,
        scanned,
        exhausted,
        bound: limit.bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObstructionKind {
    /// every sampled Frobenius has a reducible characteristic polynomial
    Borel,
    /// some witness from the checklist never appeared
    SmallImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurjectivityVerdict {
    NoObstruction,
    Obstruction(ObstructionKind),
    /// fewer than 100 primes requested
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessKind {
    /// x² − a_p x + p has two distinct roots mod ℓ
    SplitFrobenius,
    /// no roots mod ℓ
    IrreducibleFrobenius,
    /// a repeated root with a_p ≢ 0 mod ℓ
    RepeatedNonzeroTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub p: u64,
    pub ap: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityReport {
    pub verdict: SurjectivityVerdict,
    pub witnesses: Vec<Witness>,
    pub sampled: u64,
    pub note: String,
}

/// Number of distinct roots of x² − a x + p in F_ℓ.
fn frobenius_roots(a: u64, p: u64, ell: u64) -> usize {
    (0..ell)
        .filter(|&x| (x * x % ell + ell * ell - a * x % ell + p).is_multiple_of(ell))
        .count()
}

/// Look for an obstruction to surjectivity of the mod-ℓ representation.
///
/// The image contains GL₂(F_ℓ)'s three kinds of semisimple-ish elements
/// once the scan has seen a split Frobenius, an irreducible one and a
/// non-scalar-trace element with a repeated eigenvalue. Missing any of them
/// is reported; nothing here is a proof either way.
pub fn surjectivity_heuristic<S: TraceSource + ?Sized>(
    curve: &CurveQ,
    ell: u64,
    bound: u64,
    source: &S,
) -> Result<SurjectivityReport> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    if bound < 100 {
        return Ok(SurjectivityReport {
            verdict: SurjectivityVerdict::Inconclusive,
            witnesses: Vec::new(),
            sampled: 0,
            note: "bound below 100".into(),
        });
    }
    let mut found: [Option<Witness>; 3] = [None; 3];
    let mut sampled = 0;
    for p in sieve_primes(bound) {
        if p == ell || !curve.has_good_reduction(p) {
            continue;
        }
        sampled += 1;
        let ap = source.trace(curve, p)?;
        let a = ap.rem_euclid(ell as i64) as u64;
        let (slot, kind) = match frobenius_roots(a, p % ell, ell) {
            2 => (0, WitnessKind::SplitFrobenius),
            0 => (1, WitnessKind::IrreducibleFrobenius),
            _ if a != 0 => (2, WitnessKind::RepeatedNonzeroTrace),
            _ => continue,
        };
        if found[slot].is_none() {
            found[slot] = Some(Witness { kind, p, ap });
        }
        if found.iter().all(Option::is_some) {
            break;
        }
    }
    let witnesses: Vec<Witness> = found.iter().flatten().copied().collect();
    let (verdict, note) = if found[1].is_none() {
        (SurjectivityVerdict::Obstruction(ObstructionKind::Borel), "no irreducible Frobenius seen")
    } else if found[0].is_none() || found[2].is_none() {
        (
            SurjectivityVerdict::Obstruction(ObstructionKind::SmallImage),
            "witness checklist incomplete",
        )
    } else {
        (SurjectivityVerdict::NoObstruction, "all witnesses found")
    };
    Ok(SurjectivityReport {
        verdict,
        witnesses,
        sampled,
        note: note.into(),
    })
}

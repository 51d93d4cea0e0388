//! Counting Selmer-stable extensions: the Dirichlet series
//! g(s) = Π_{q ∈ pool} (1 + (ℓ−1) q^{−s}), its partial sums, lower-bound
//! counts for M(G, E; X) and exponent diagnostics.
//!
//! For G cyclic of order ℓ (n = 1) every twist f ∈ W is an order-ℓ character
//! of prime conductors and the discriminant of its field is exactly
//! (Π_{q | cond f} q)^{ℓ−1}, so the n = 1 counts need no unknown constant.
//! For n ≥ 2 the discriminant is only bounded by c₂ (Π_{S₀ ∪ T} q)^{ℓ^{n−1}(ℓ−1)}
//! with a c₂ the theory does not make explicit; such counts are labelled
//! conditional on the c₂ supplied.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::groups::{malle_invariant, GroupTable};
use crate::modarith::{is_prime, sieve_primes};
use crate::selmer::{enumerate_w_t, CharacterVector, S0Result, SelmerSpec};
use crate::sieve::{in_te, TEParams, TraceSource};
use crate::{invalid, precondition, Error, Rational, Result};

/// Default cap on DFS nodes visited by [`partial_sum`].
pub const DEFAULT_DFS_CAP: u64 = 50_000_000;

/// Ascending primes from 𝔗_{E,L} \ Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePool {
    pub ell: u64,
    pub primes: Vec<u64>,
    /// what the primes were drawn from, for reports
    pub provenance: String,
}

impl PrimePool {
    pub fn new(ell: u64, primes: Vec<u64>) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid!("pool primes must be strictly ascending"));
        }
        if let Some(&q) = primes.iter().find(|&&q| !is_prime(q)) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimePool {
            ell,
            primes,
            provenance: "explicit".into(),
        })
    }

    /// 𝔗_{E,L} ∩ [2, bound] with Z removed.
    pub fn from_te<S: TraceSource + ?Sized>(
        params: &TEParams,
        z: &BTreeSet<u64>,
        bound: u64,
        source: &S,
    ) -> Result<Self> {
        let mut primes = Vec::new();
        for p in sieve_primes(bound) {
            if !z.contains(&p) && in_te(p, params, source)? {
                primes.push(p);
            }
        }
        Ok(PrimePool {
            ell: params.ell(),
            primes,
            provenance: format!(
                "T(E={}, L={}) <= {bound} minus Z={:?}",
                params.curve().key(),
                params.base(),
                z
            ),
        })
    }

    /// Primes `≤ bound` only.
    pub fn truncated(&self, bound: u64) -> Self {
        PrimePool {
            ell: self.ell,
            primes: self.primes.iter().copied().take_while(|&q| q <= bound).collect(),
            provenance: format!("{} truncated at {bound}", self.provenance),
        }
    }
}

/// a_n = (ℓ−1)^{ω(n)} for squarefree n built from pool primes, else 0.
pub fn dirichlet_coefficient(pool: &PrimePool, n: u64) -> Result<u128> {
    if n == 0 {
        return Err(precondition!("a_n is defined for n >= 1"));
    }
    let mut rest = n;
    let mut r = 0u32;
    for &q in &pool.primes {
        if q > rest {
            break;
        }
        if rest.is_multiple_of(q) {
            rest /= q;
            if rest.is_multiple_of(q) {
                return Ok(0);
            }
            r += 1;
        }
    }
    if rest != 1 {
        return Ok(0);
    }
    Ok((pool.ell as u128 - 1).pow(r))
}

/// Visit every squarefree product of pool primes `≤ limit` (including the
/// empty product) in DFS order, primes ascending. Stops after `cap` nodes.
fn for_each_product(
    primes: &[u64],
    limit: u128,
    cap: u64,
    visit: &mut dyn FnMut(&[u64], u128),
) -> core::result::Result<(), u64> {
    fn go(
        primes: &[u64],
        start: usize,
        product: u128,
        limit: u128,
        chosen: &mut Vec<u64>,
        visited: &mut u64,
        cap: u64,
        visit: &mut dyn FnMut(&[u64], u128),
    ) -> bool {
        if *visited >= cap {
            return false;
        }
        *visited += 1;
        visit(chosen, product);
        for i in start..primes.len() {
            let next = product * primes[i] as u128;
            if next > limit {
                break;
            }
            chosen.push(primes[i]);
            let ok = go(primes, i + 1, next, limit, chosen, visited, cap, visit);
            chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut visited = 0;
    if limit >= 1 && !go(primes, 0, 1, limit, &mut Vec::new(), &mut visited, cap, visit) {
        return Err(visited);
    }
    Ok(())
}

/// S(X) = Σ_{n ≤ X} a_n, exactly.
pub fn partial_sum(pool: &PrimePool, x: u128) -> Result<u128> {
    partial_sum_capped(pool, x, DEFAULT_DFS_CAP)
}

pub fn partial_sum_capped(pool: &PrimePool, x: u128, cap: u64) -> Result<u128> {
    if x == 0 {
        return Err(precondition!("partial sums start at X = 1"));
    }
    let w = pool.ell as u128 - 1;
    let mut total = 0u128;
    let res = for_each_product(&pool.primes, x, cap, &mut |chosen, _| {
        total += w.pow(chosen.len() as u32);
    });
    match res {
        Ok(()) => Ok(total),
        Err(_) => Err(Error::Incomplete {
            what: "partial_sum enumeration cap",
            lower_bound: total,
        }),
    }
}

/// The part of an S₀ computation the counts need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct S0Data {
    pub primes: Vec<u64>,
    pub dim_v: usize,
}

impl From<&S0Result> for S0Data {
    fn from(r: &S0Result) -> Self {
        S0Data {
            primes: r.s0.clone(),
            dim_v: r.dim_v,
        }
    }
}

/// Least-squares estimates for log S = c + a log X + (δ−1) log log X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub constant: f64,
    pub a: f64,
    pub delta_minus_one: f64,
    /// root mean square of the log residuals
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    #[serde(with = "biguint_string")]
    pub x: BigUint,
    pub value: u128,
    #[serde(with = "crate::rational_string")]
    pub exponent_target: Rational,
    #[serde(with = "crate::rational_string")]
    pub delta: Rational,
    /// true when the count depends on the supplied c₂
    pub conditional_on_c2: bool,
    pub fit: Option<Fit>,
}

/// `e = ℓ^{n−1}(ℓ−1)`.
pub fn disc_exponent(ell: u64, n: u32) -> Result<u32> {
    if n == 0 {
        return Err(precondition!("group order exponent n must be at least 1"));
    }
    let e = ell
        .checked_pow(n - 1)
        .and_then(|x| x.checked_mul(ell - 1))
        .ok_or_else(|| invalid!("exponent ell^(n-1)(ell-1) overflows"))?;
    u32::try_from(e).map_err(|_| invalid!("exponent {e} too large"))
}

/// δ = (ℓ² − ℓ − 1) / (ℓ^{n−1}(ℓ² − 1)).
pub fn delta(ell: u64, n: u32) -> Result<Rational> {
    let l = ell as i64;
    let scale = ell.checked_pow(n.saturating_sub(1)).ok_or_else(|| invalid!("ell^(n-1) overflows"))? as i64;
    Ok(Rational::new(l * l - l - 1, scale * (l * l - 1)))
}

/// Lower-bound count for M(G, E; X): Σ over T ⊂ pool with
/// c₂ (Π_{S₀} q · Π_T q)^{ℓ^{n−1}(ℓ−1)} ≤ X of (ℓ−1)^{#T} ℓ^{dim V_{S₀}}.
///
/// For n = 1 the admissible T are those with (Π_T q)^{ℓ−1} ≤ X and c₂ is
/// ignored. A twist f ∈ W_T may also be ramified at primes of S₀, so its
/// field can have a larger discriminant; [`census_n1`] counts those exactly.
pub fn count_lower_bound_m(
    pool: &PrimePool,
    s0: &S0Data,
    x: &BigUint,
    n: u32,
    c2: Rational,
) -> Result<CountReport> {
    let ell = pool.ell;
    let e = disc_exponent(ell, n)?;
    let c2 = if n == 1 { Rational::one() } else { c2 };
    if *c2.numer() <= 0 || *c2.denom() <= 0 {
        return Err(precondition!("c2 must be positive, got {c2}"));
    }
    if s0.primes.iter().any(|q| pool.primes.contains(q)) {
        return Err(precondition!("pool and S0 must be disjoint"));
    }
    let num = BigUint::from(*c2.numer() as u64);
    let den = BigUint::from(*c2.denom() as u64);
    let rhs = den * x;
    // n = 1: the T-part of the conductor, (Π_T q)^{ℓ−1}, is the exact
    // discriminant; n ≥ 2: the c₂ bound over S₀ ∪ T
    let s0_prod: BigUint = if n == 1 {
        BigUint::one()
    } else {
        s0.primes.iter().map(|&q| BigUint::from(q)).product()
    };
    let admissible = |t_prod: u128| -> bool {
        let base = &s0_prod * BigUint::from(t_prod);
        &num * base.pow(e) <= rhs
    };
    // largest Π_T that can pass, to bound the DFS
    let cap = x.to_u128().unwrap_or(u128::MAX);
    let limit = max_admissible_product(&admissible, cap);
    let w = ell as u128 - 1;
    let v_size = (ell as u128)
        .checked_pow(s0.dim_v as u32)
        .ok_or_else(|| invalid!("#V_S0 overflows"))?;
    let mut value = 0u128;
    if let Some(limit) = limit {
        let res = for_each_product(&pool.primes, limit, DEFAULT_DFS_CAP, &mut |chosen, _| {
            value += w.pow(chosen.len() as u32) * v_size;
        });
        if res.is_err() {
            return Err(Error::Incomplete {
                what: "count_lower_bound_M enumeration cap",
                lower_bound: value,
            });
        }
    }
    Ok(CountReport {
        x: x.clone(),
        value,
        exponent_target: Rational::new(1, e as i64),
        delta: delta(ell, n)?,
        conditional_on_c2: n > 1,
        fit: None,
    })
}

/// Largest P ≤ X with `admissible(P)`, by bisection (admissibility is
/// monotone decreasing in P); `None` if even P = 1 fails.
fn max_admissible_product(admissible: &dyn Fn(u128) -> bool, x: u128) -> Option<u128> {
    if !admissible(1) {
        return None;
    }
    let (mut lo, mut hi) = (1u128, x.max(1));
    if admissible(hi) {
        return Some(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// ⌊X^{1/k}⌋ exactly.
pub fn integer_root(x: u128, k: u32) -> u128 {
    if k == 1 || x < 2 {
        return x;
    }
    let mut r = libm::pow(x as f64, 1.0 / k as f64) as u128;
    let pow_le = |r: u128| r.checked_pow(k).is_some_and(|p| p <= x);
    while r > 0 && !pow_le(r) {
        r -= 1;
    }
    while pow_le(r + 1) {
        r += 1;
    }
    r
}

/// Characters f ∈ W with exact discriminant (Π_{q | cond f} q)^{ℓ−1} ≤ X,
/// for the cyclic case n = 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub x: u128,
    pub members: Vec<CharacterVector>,
    /// Σ #W_T over T with (Π_T q)^{ℓ−1} ≤ X; equals partial_sum(⌊X^{1/(ℓ−1)}⌋)
    pub w_total: u128,
    /// number of T examined
    pub t_sets: u64,
}

impl Census {
    pub fn count(&self) -> u128 {
        self.members.len() as u128
    }

    /// Distinct fields: f and c·f cut out the same field.
    pub fn field_count(&self, ell: u64) -> u128 {
        let trivial = self.members.iter().filter(|f| f.coefficients.is_empty()).count() as u128;
        trivial + (self.count() - trivial) / (ell as u128 - 1)
    }
}

/// Enumerate W_T for every T ⊂ pool with (Π_T q)^{ℓ−1} ≤ X and keep the
/// characters whose full conductor passes the same bound.
pub fn census_n1(pool: &PrimePool, spec_s0: &SelmerSpec, x: u128, cap: u128) -> Result<Census> {
    let ell = pool.ell;
    if spec_s0.ell() != ell {
        return Err(invalid!("pool and Selmer spec disagree on ell"));
    }
    let e = (ell - 1) as u32;
    let t_limit = integer_root(x, e);
    let mut t_sets: Vec<Vec<u64>> = Vec::new();
    let res = for_each_product(&pool.primes, t_limit, DEFAULT_DFS_CAP, &mut |chosen, _| {
        t_sets.push(chosen.to_vec());
    });
    if res.is_err() {
        return Err(Error::Resource {
            what: "census T enumeration",
            requested: t_sets.len() as u128,
            cap: DEFAULT_DFS_CAP as u128,
        });
    }
    let mut members = Vec::new();
    let mut w_total = 0u128;
    for t in &t_sets {
        let w = enumerate_w_t(spec_s0, &t.iter().copied().collect(), cap)?;
        w_total += w.len() as u128;
        for f in w {
            let conductor: u128 = f.coefficients.keys().map(|&q| q as u128).product();
            if conductor <= t_limit {
                members.push(f);
            }
        }
    }
    members.sort();
    Ok(Census {
        x,
        members,
        w_total,
        t_sets: t_sets.len() as u64,
    })
}

/// Fit log S = c + a log X + (δ−1) log log X to `(X, S)` pairs.
pub fn fit_exponents(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 5 {
        return Err(precondition!("need at least 5 reports, got {}", points.len()));
    }
    if points.iter().any(|&(x, s)| !(x > 1.0) || !(s > 0.0)) {
        return Err(precondition!("fit needs X > 1 and S > 0"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    if libm::log10(hi) - libm::log10(lo) < 3.0 - 1e-9 {
        return Err(precondition!("reports must span at least 3 decades of X"));
    }
    let rows: Vec<([f64; 3], f64)> = points
        .iter()
        .map(|&(x, s)| {
            let lx = libm::log(x);
            ([1.0, lx, libm::log(lx)], libm::log(s))
        })
        .collect();
    // normal equations AᵀA β = Aᵀy
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (a, y) in &rows {
        for i in 0..3 {
            aty[i] += a[i] * y;
            for j in 0..3 {
                ata[i][j] += a[i] * a[j];
            }
        }
    }
    let beta = solve3(ata, aty).ok_or_else(|| Error::Degenerate("singular design matrix in exponent fit".into()))?;
    let sse: f64 = rows
        .iter()
        .map(|(a, y)| {
            let r = y - (beta[0] * a[0] + beta[1] * a[1] + beta[2] * a[2]);
            r * r
        })
        .sum();
    Ok(Fit {
        constant: beta[0],
        a: beta[1],
        delta_minus_one: beta[2],
        residual: libm::sqrt(sse / rows.len() as f64),
    })
}

/// Gaussian elimination with partial pivoting on a 3×3 system.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(libm::fabs(*x)));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| libm::fabs(m[i][col]).total_cmp(&libm::fabs(m[j][col])))?;
        if libm::fabs(m[piv][col]) <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    Some(x)
}

/// Attach fitted exponents to a series of reports from one pool.
pub fn fit_reports(reports: &mut [CountReport]) -> Result<Fit> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.x.to_f64().unwrap_or(f64::INFINITY), r.value as f64))
        .collect();
    let fit = fit_exponents(&pts)?;
    for r in reports.iter_mut() {
        r.fit = Some(fit);
    }
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalleReference {
    #[serde(with = "crate::rational_string")]
    pub a: Rational,
    #[serde(with = "crate::rational_string")]
    pub delta: Rational,
    pub bracket: String,
}

/// a(G) = 1/(ℓ^{n−1}(ℓ−1)) for #G = ℓ^n, with the weak Malle bracket.
pub fn malle_reference(ell: u64, n: u32) -> Result<MalleReference> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let e = disc_exponent(ell, n)?;
    let a = Rational::new(1, e as i64);
    Ok(MalleReference {
        a,
        delta: delta(ell, n)?,
        bracket: format!("c1(G) X^{a} <= N(G; X) <= c2(G, eps) X^({a} + eps)"),
    })
}

/// [`malle_reference`] checked against orbit counting on a table.
pub fn malle_reference_for(ell: u64, group: &GroupTable) -> Result<MalleReference> {
    let n = crate::groups::ell_power_exponent(group.order(), ell)
        .filter(|&k| k >= 1)
        .ok_or_else(|| invalid!("table of order {} is not a nontrivial {ell}-group", group.order()))?;
    let r = malle_reference(ell, n)?;
    let (_, a) = malle_invariant(group)?;
    if a != r.a {
        return Err(Error::Degenerate(format!("orbit count gives a = {a}, closed form {}", r.a)));
    }
    Ok(r)
}

mod biguint_string {
    use alloc::string::{String, ToString};

    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn pool(primes: &[u64]) -> PrimePool {
        PrimePool::new(5, primes.to_vec()).unwrap()
    }

    #[test]
    fn coefficients() {
        let p = pool(&[11, 31]);
        assert_eq!(dirichlet_coefficient(&p, 1).unwrap(), 1);
        assert_eq!(dirichlet_coefficient(&p, 341).unwrap(), 16);
        assert_eq!(dirichlet_coefficient(&p, 121).unwrap(), 0);
        assert_eq!(dirichlet_coefficient(&p, 11 * 7).unwrap(), 0);
        assert!(dirichlet_coefficient(&p, 0).is_err());
    }

    #[test]
    fn partial_sums() {
        let p = pool(&[11, 31]);
        assert_eq!(partial_sum(&p, 350).unwrap(), 25);
        assert_eq!(partial_sum(&p, 1).unwrap(), 1);
        assert_eq!(partial_sum(&p, 10).unwrap(), 1);
        let big = pool(&crate::modarith::sieve_primes(2000));
        assert!(matches!(
            partial_sum_capped(&big, 1 << 60, 1000),
            Err(Error::Incomplete { lower_bound, .. }) if lower_bound > 0
        ));
    }

    #[test]
    fn partial_sum_matches_trial_division() {
        let primes = [11u64, 31, 41, 61, 71, 101, 131, 151, 181, 191, 211, 241];
        for k in [3usize, 6, 12] {
            let p = pool(&primes[..k]);
            for x in [1u64, 100, 5000, 100_000, 1_000_000] {
                let mut brute = 0u128;
                for m in 1..=x {
                    let mut rest = m;
                    let mut r = 0;
                    let mut ok = true;
                    for &q in &primes[..k] {
                        if rest % q == 0 {
                            rest /= q;
                            r += 1;
                            if rest % q == 0 {
                                ok = false;
                            }
                        }
                    }
                    if ok && rest == 1 {
                        brute += 4u128.pow(r);
                    }
                }
                assert_eq!(partial_sum(&p, x as u128).unwrap(), brute, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn partial_sum_matches_expanded_product() {
        let primes = [11u64, 31, 41, 61, 71, 101];
        // expand Π (1 + 4 q^{-s}) as a map n → coefficient
        let mut series: BTreeMap<u128, u128> = [(1, 1)].into();
        for &q in &primes {
            let mut next = series.clone();
            for (&n, &c) in &series {
                *next.entry(n * q as u128).or_insert(0) += 4 * c;
            }
            series = next;
        }
        let p = pool(&primes);
        for x in [1u128, 500, 10_000, 1_000_000, 10_000_000_000] {
            let expected: u128 = series.range(..=x).map(|(_, c)| c).sum();
            assert_eq!(partial_sum(&p, x).unwrap(), expected);
        }
    }

    #[test]
    fn partial_sum_monotone_in_pool_bound() {
        let full = pool(&[11, 31, 41, 61, 71, 101, 131]);
        let mut prev = 0;
        for b in [10, 11, 40, 70, 200] {
            let s = partial_sum(&full.truncated(b), 100_000).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn lower_bound_examples() {
        let p = pool(&[11, 31]);
        let s0 = S0Data {
            primes: vec![],
            dim_v: 0,
        };
        let x = 341u128.pow(4);
        let r = count_lower_bound_m(&p, &s0, &x.into(), 1, Rational::new(7, 3)).unwrap();
        assert_eq!(r.value, 25);
        assert!(!r.conditional_on_c2);
        assert_eq!(r.exponent_target, Rational::new(1, 4));
        assert_eq!(r.delta, Rational::new(19, 24));
        assert_eq!(count_lower_bound_m(&p, &s0, &(11u128.pow(4) - 1).into(), 1, Rational::one()).unwrap().value, 1);
        let mut prev = 0;
        for x in [1u128, 10_000, 14_641, 1 << 30, x, 1 << 60] {
            let v = count_lower_bound_m(&p, &s0, &x.into(), 1, Rational::one()).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
        // n = 2 depends on c2
        let x = BigUint::from(11u32).pow(20);
        let r = count_lower_bound_m(&p, &s0, &x, 2, Rational::one()).unwrap();
        assert!(r.conditional_on_c2);
        assert_eq!(r.value, 5);
        assert_eq!(count_lower_bound_m(&p, &s0, &x, 2, Rational::new(2, 1)).unwrap().value, 1);
        assert!(count_lower_bound_m(&p, &s0, &x, 2, Rational::new(-1, 1)).is_err());
        let with_s0 = S0Data {
            primes: vec![41],
            dim_v: 1,
        };
        let r = count_lower_bound_m(&p, &with_s0, &31u128.pow(4).into(), 1, Rational::one()).unwrap();
        assert_eq!(r.value, 5 * (1 + 4 + 4));
        // n = 2 pays for S₀: (41·11)^20 ≤ X < (41·31)^20
        let r = count_lower_bound_m(&p, &with_s0, &BigUint::from(451u32).pow(20), 2, Rational::one()).unwrap();
        assert_eq!(r.value, 5 * (1 + 4));
    }

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(10u128.pow(10), 4), 316);
        assert_eq!(integer_root(341u128.pow(4), 4), 341);
        assert_eq!(integer_root(341u128.pow(4) - 1, 4), 340);
        assert_eq!(integer_root(1, 4), 1);
    }

    #[test]
    fn synthetic_fit_round_trip() {
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|i| {
                let x = libm::pow(10.0, 6.0 + 0.5 * i as f64);
                let lx = libm::log(x);
                (x, 3.7 * libm::pow(x, 0.25) * libm::pow(lx, 19.0 / 24.0 - 1.0))
            })
            .collect();
        let fit = fit_exponents(&pts).unwrap();
        assert!((fit.a - 0.25).abs() < 1e-6, "{fit:?}");
        assert!((fit.delta_minus_one + 5.0 / 24.0).abs() < 1e-6, "{fit:?}");
        assert!(fit.residual < 1e-9);
        assert!(fit_exponents(&pts[..4]).is_err());
        let narrow: Vec<(f64, f64)> = (0..6).map(|i| (1e6 + i as f64, 10.0)).collect();
        assert!(fit_exponents(&narrow).is_err());
    }

    #[test]
    fn malle_references() {
        assert_eq!(malle_reference(5, 1).unwrap().a, Rational::new(1, 4));
        assert_eq!(malle_reference(5, 2).unwrap().a, Rational::new(1, 20));
        assert_eq!(malle_reference(5, 2).unwrap().delta, Rational::new(19, 120));
        assert_eq!(malle_reference(7, 1).unwrap().a, Rational::new(1, 6));
        let h = GroupTable::heisenberg(3).unwrap();
        assert_eq!(malle_reference_for(3, &h).unwrap().a, Rational::new(1, 18));
    }

    mod props {
        use super::*;
        use crate::modarith::sieve_primes;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn partial_sum_monotone_in_x(
                pool in prop::sample::subsequence(sieve_primes(500).into_iter().filter(|q| q % 5 == 1).collect::<Vec<_>>(), 0..8),
                x in 1u128..2_000_000,
                dx in 0u128..100_000,
            ) {
                let pool = PrimePool::new(5, pool).unwrap();
                prop_assert!(partial_sum(&pool, x).unwrap() <= partial_sum(&pool, x + dx).unwrap());
            }
        }
    }
}

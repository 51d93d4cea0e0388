//! The acceptance suite behind `selstab selftest` and the `acceptance` test
//! target. Each check recomputes its reference values by an independent
//! route (naive enumeration, brute-force indices, subgroup search) rather
//! than trusting the code under test.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use num_bigint::BigUint;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use selstab_core::counting::{
    census_n1, count_lower_bound_m, fit_exponents, integer_root, partial_sum, PrimePool, S0Data,
};
use selstab_core::curve::{within_hasse, CurveQ};
use selstab_core::fields::SplitTester;
use selstab_core::groups::{center, corpus, extension_class, h2, malle_invariant, GroupTable};
use selstab_core::modarith::{pow_mod, reduce, sieve_primes};
use selstab_core::selmer::{
    certify_selmer_vanishing, dual_dimension, enumerate_w_t, find_s0, vs_dimension, wiles_difference,
    CharacterVector, SelmerSpec,
};
use selstab_core::sieve::{
    in_te_report, surjectivity_heuristic, theoretical_density, SurjectivityVerdict, TEParams, TraceSource,
};
use selstab_core::Rational;

use crate::cache::ApCache;

/// Curves tried in order for the density check; the first without a
/// detected obstruction to surjectivity is used.
pub const DENSITY_CURVES: &[(&str, [i64; 5])] = &[
    ("y^2=x^3+x+1", [0, 0, 0, 1, 1]),
    ("37a1", [0, 0, 1, -1, 0]),
    ("389a1", [0, 1, 1, -2, 0]),
];

/// Curves for the point-count oracle.
pub const POINT_COUNT_CURVES: &[(&str, [i64; 5])] = &[
    ("y^2=x^3+x+1", [0, 0, 0, 1, 1]),
    ("11a1", [0, -1, 1, -10, -20]),
    ("37a1", [0, 0, 1, -1, 0]),
];

/// The group tables shipped in `data/groups`.
pub const SHIPPED_TABLES: &[(u64, &str, &str)] = &[
    (2, "c2", include_str!("../data/groups/2/c2.tbl")),
    (2, "c4", include_str!("../data/groups/2/c4.tbl")),
    (2, "c8", include_str!("../data/groups/2/c8.tbl")),
    (2, "c2e2", include_str!("../data/groups/2/c2e2.tbl")),
    (2, "c2e3", include_str!("../data/groups/2/c2e3.tbl")),
    (2, "heis2", include_str!("../data/groups/2/heis2.tbl")),
    (2, "c4xc2", include_str!("../data/groups/2/c4xc2.tbl")),
    (3, "c3", include_str!("../data/groups/3/c3.tbl")),
    (3, "c9", include_str!("../data/groups/3/c9.tbl")),
    (3, "c27", include_str!("../data/groups/3/c27.tbl")),
    (3, "c3e2", include_str!("../data/groups/3/c3e2.tbl")),
    (3, "c3e3", include_str!("../data/groups/3/c3e3.tbl")),
    (3, "heis3", include_str!("../data/groups/3/heis3.tbl")),
    (3, "c9xc3", include_str!("../data/groups/3/c9xc3.tbl")),
    (5, "c5", include_str!("../data/groups/5/c5.tbl")),
    (5, "c25", include_str!("../data/groups/5/c25.tbl")),
    (5, "c125", include_str!("../data/groups/5/c125.tbl")),
    (5, "c5e2", include_str!("../data/groups/5/c5e2.tbl")),
    (5, "c5e3", include_str!("../data/groups/5/c5e3.tbl")),
    (5, "heis5", include_str!("../data/groups/5/heis5.tbl")),
    (5, "c25xc5", include_str!("../data/groups/5/c25xc5.tbl")),
];

#[derive(Debug, Clone)]
pub struct Options {
    pub cache_dir: Option<PathBuf>,
    pub density_bound: u64,
    pub chebotarev_bound: u64,
    pub wiles_specs: usize,
    pub random_t: usize,
    pub census_max_exp: u32,
    pub point_count_bound: u64,
    pub seed: u64,
}

impl Options {
    pub fn full() -> Self {
        Options {
            cache_dir: None,
            density_bound: 200_000,
            chebotarev_bound: 1_000_000,
            wiles_specs: 200,
            random_t: 50,
            census_max_exp: 10,
            point_count_bound: 1000,
            seed: 20_240_601,
        }
    }

    pub fn quick() -> Self {
        Options {
            density_bound: 50_000,
            chebotarev_bound: 200_000,
            wiles_specs: 40,
            random_t: 10,
            census_max_exp: 9,
            point_count_bound: 200,
            ..Self::full()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub pass: bool,
    /// reported but does not fail the suite
    pub diagnostic: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: &str, title: &str, pass: bool, detail: String) -> Self {
        CriterionResult {
            id: id.into(),
            title: title.into(),
            pass,
            diagnostic: false,
            detail,
        }
    }

    fn diagnostic(mut self) -> Self {
        self.diagnostic = true;
        self
    }

    fn error(id: &str, title: &str, e: impl std::fmt::Display) -> Self {
        Self::new(id, title, false, format!("error: {e}"))
    }

    pub fn gating_failure(&self) -> bool {
        !self.pass && !self.diagnostic
    }

    pub fn line(&self) -> String {
        let status = match (self.pass, self.diagnostic) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (diagnostic)",
        };
        format!("{status} [{}] {}: {}", self.id, self.title, self.detail)
    }
}

pub fn run_all(opts: &Options) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    out.extend(density(opts));
    out.extend(chebotarev(opts));
    out.extend(wiles(opts));
    out.extend(s0_and_w_t(opts));
    out.extend(cohomology());
    out.extend(census(opts));
    out.extend(malle());
    out.extend(point_counts(opts));
    out
}

fn cache_for(opts: &Options, curve: &CurveQ) -> ApCache {
    ApCache::with_dir(opts.cache_dir.as_deref(), curve).unwrap_or_else(|_| ApCache::memory(curve))
}

fn test_curve() -> CurveQ {
    CurveQ::short(1, 1).expect("y^2 = x^3 + x + 1 is nonsingular")
}

// ---------------------------------------------------------------- 1

pub fn density(opts: &Options) -> Vec<CriterionResult> {
    const TITLE: &str = "density of T(E,Q), ell = 5";
    let run = || -> Result<CriterionResult, Box<dyn std::error::Error>> {
        let mut chosen = None;
        let mut skipped = Vec::new();
        for (label, coeffs) in DENSITY_CURVES {
            let curve = CurveQ::new(*coeffs)?;
            let cache = cache_for(opts, &curve);
            let s = surjectivity_heuristic(&curve, 5, 10_000, &cache)?;
            if s.verdict == SurjectivityVerdict::NoObstruction {
                chosen = Some((label, curve, cache));
                break;
            }
            skipped.push(format!("{label}: {:?}", s.verdict));
        }
        let Some((label, curve, mut cache)) = chosen else {
            return Ok(CriterionResult::new("1", TITLE, false, format!("no usable curve ({})", skipped.join("; "))));
        };
        let params = TEParams::theorem(curve, 5, selstab_core::fields::AbelianFieldDesc::trivial(5)?)?;
        let primes = sieve_primes(opts.density_bound);
        let members = primes
            .par_iter()
            .map(|&p| Ok(in_te_report(p, &params, &cache)?.member()))
            .collect::<selstab_core::Result<Vec<bool>>>()?;
        let _ = cache.save();
        let count = members.iter().filter(|&&m| m).count();
        let est = count as f64 / primes.len() as f64;
        let target = theoretical_density(5, 1);
        let t = *target.numer() as f64 / *target.denom() as f64;
        let pass = (est - t).abs() <= 0.02 && target == Rational::new(19, 96);
        Ok(CriterionResult::new(
            "1",
            TITLE,
            pass,
            format!(
                "curve {label}, {count}/{} primes <= {} = {est:.5}, target {target} = {t:.5}, |diff| = {:.5}{}",
                primes.len(),
                opts.density_bound,
                (est - t).abs(),
                if skipped.is_empty() { String::new() } else { format!(" (skipped {})", skipped.join("; ")) }
            ),
        ))
    };
    vec![run().unwrap_or_else(|e| CriterionResult::error("1", TITLE, e))]
}

// ---------------------------------------------------------------- 2

pub fn chebotarev(opts: &Options) -> Vec<CriterionResult> {
    let primes = sieve_primes(opts.chebotarev_bound);
    let cases = [("2a", "ell=5; gen: 11^1", 5.0), ("2b", "ell=5; gen: 11^1; gen: 31^1", 25.0)];
    cases
        .iter()
        .map(|(id, desc, deg)| {
            let title = format!("splitting in {desc}");
            let field = match desc.parse() {
                Ok(f) => f,
                Err(e) => return CriterionResult::error(id, &title, e),
            };
            let tester = SplitTester::new(field);
            let split = primes.par_iter().filter(|&&r| tester.splits(r)).count();
            let frac = split as f64 / primes.len() as f64;
            let pass = (frac - 1.0 / deg).abs() <= 0.01;
            CriterionResult::new(
                id,
                &title,
                pass,
                format!("{split}/{} primes <= {} = {frac:.5}, target 1/{deg}", primes.len(), opts.chebotarev_bound),
            )
        })
        .collect()
}

// ---------------------------------------------------------------- 3

fn te_primes(curve: &CurveQ, bound: u64, cache: &ApCache) -> selstab_core::Result<Vec<u64>> {
    let params = TEParams::over_q(curve.clone(), 5)?;
    let mut out = Vec::new();
    for p in sieve_primes(bound) {
        if in_te_report(p, &params, cache)?.member() {
            out.push(p);
        }
    }
    Ok(out)
}

pub fn wiles(opts: &Options) -> Vec<CriterionResult> {
    const TITLE: &str = "vs_dim - dual_dim = Wiles difference";
    let run = |extended: bool| -> Result<CriterionResult, Box<dyn std::error::Error>> {
        let curve = test_curve();
        let cache = cache_for(opts, &curve);
        let sigma = curve.sigma(5);
        let te = te_primes(&curve, 10_000, &cache)?;
        let s_pool: Vec<u64> = if extended {
            sieve_primes(10_000).into_iter().filter(|q| q % 5 == 1 && !sigma.contains(q)).collect()
        } else {
            te.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + extended as u64);
        let mut mismatches = Vec::new();
        let mut dims = BTreeMap::<(usize, usize), usize>::new();
        for _ in 0..opts.wiles_specs {
            let k = rng.random_range(0..=5);
            let s: BTreeSet<u64> = s_pool.choose_multiple(&mut rng, k).copied().collect();
            let extra_pool: Vec<u64> = te.iter().copied().filter(|q| !s.contains(q)).collect();
            let e = rng.random_range(0..=2);
            let mut z: BTreeSet<u64> = sigma.iter().copied().collect();
            z.extend(extra_pool.choose_multiple(&mut rng, e).copied());
            let spec = SelmerSpec::trivial(5, s.iter().copied(), z.iter().copied())?;
            let vs = vs_dimension(&spec)?.0;
            let dual = dual_dimension(&spec)?.0;
            *dims.entry((vs, dual)).or_default() += 1;
            if vs as i64 - dual as i64 != wiles_difference(&spec) {
                mismatches.push(format!("S={s:?} Z={z:?}"));
            }
        }
        let (id, title) = if extended {
            ("3x", "same identity, S outside T(E,Q) (extended domain)")
        } else {
            ("3", TITLE)
        };
        let r = CriterionResult::new(
            id,
            title,
            mismatches.is_empty(),
            format!(
                "{} seeded specs, {} mismatches, (dim V, dim V*) histogram {dims:?}{}",
                opts.wiles_specs,
                mismatches.len(),
                mismatches.first().map(|m| format!(", first: {m}")).unwrap_or_default()
            ),
        );
        Ok(if extended { r.diagnostic() } else { r })
    };
    vec![
        run(false).unwrap_or_else(|e| CriterionResult::error("3", TITLE, e)),
        run(true).unwrap_or_else(|e| CriterionResult::error("3x", TITLE, e).diagnostic()),
    ]
}

// ---------------------------------------------------------------- 4

/// Least primitive root by direct order computation.
fn naive_primitive_root(q: u64) -> u64 {
    (2..q)
        .find(|&g| {
            let mut x = 1u64;
            for k in 1..q {
                x = x * g % q;
                if x == 1 {
                    return k == q - 1;
                }
            }
            false
        })
        .unwrap_or(1)
}

/// index(v mod q) in Z/ℓ by walking powers of ζ = g^{(q−1)/ℓ}.
fn naive_index(v: u64, q: u64, ell: u64, g: u64) -> u64 {
    let t = pow_mod(v % q, (q - 1) / ell, q);
    let zeta = pow_mod(g, (q - 1) / ell, q);
    let mut x = 1;
    for k in 0..ell {
        if x == t {
            return k;
        }
        x = x * zeta % q;
    }
    panic!("{v} mod {q}: (q-1)/ell power is not an ell-th root of unity")
}

/// Whether some nonzero Π_{v ∈ Z} v^{e_v} is an ℓ-th power mod every q ∈ S.
fn naive_dual_nonzero(z: &[u64], s: &[u64], ell: u64) -> bool {
    let total = ell.pow(z.len() as u32);
    (1..total).any(|code| {
        s.iter().all(|&q| {
            let mut c = code;
            let mut b = 1u64;
            for &v in z {
                b = b * pow_mod(v % q, c % ell, q) % q;
                c /= ell;
            }
            pow_mod(b, (q - 1) / ell, q) == 1
        })
    })
}

pub fn s0_and_w_t(opts: &Options) -> Vec<CriterionResult> {
    const TITLE: &str = "S0 and W_T laws";
    let run = || -> Result<Vec<CriterionResult>, Box<dyn std::error::Error>> {
        let curve = test_curve();
        let cache = cache_for(opts, &curve);
        let params = TEParams::over_q(curve.clone(), 5)?;
        let z: BTreeSet<u64> = params.sigma().into_iter().collect();
        let res = find_s0(&params, &z, 100_000, &cache)?;
        let z_list: Vec<u64> = z.iter().copied().collect();
        let independent_zero = !naive_dual_nonzero(&z_list, &res.s0, 5);
        let spec = SelmerSpec::trivial(5, res.s0.clone(), z.clone())?;
        let first = CriterionResult::new(
            "4a",
            "find_S0 terminates with zero dual Selmer group",
            res.complete && res.dual_dim == 0 && dual_dimension(&spec)?.0 == 0 && independent_zero,
            format!(
                "Z = {z_list:?}, S0 = {:?}, dim V_S0 = {}, brute-force dual check over {} Kummer classes: {}",
                res.s0,
                res.dim_v,
                5u64.pow(z_list.len() as u32),
                if independent_zero { "zero" } else { "NONZERO" }
            ),
        );
        let mut avoid = z.clone();
        avoid.extend(&res.s0);
        let pool: Vec<u64> = te_primes(&curve, 3000, &cache)?
            .into_iter()
            .filter(|q| !avoid.contains(q))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x57);
        let mut ts: BTreeSet<BTreeSet<u64>> = BTreeSet::new();
        let mut attempts = 0;
        while ts.len() < opts.random_t && attempts < 100 * opts.random_t {
            attempts += 1;
            let k = rng.random_range(0..=3);
            ts.insert(pool.choose_multiple(&mut rng, k).copied().collect());
        }
        let mut owner: HashMap<CharacterVector, &BTreeSet<u64>> = HashMap::new();
        let mut bad_size = Vec::new();
        let mut overlaps = 0;
        let mut total = 0usize;
        for t in &ts {
            let w = enumerate_w_t(&spec, t, 1 << 20)?;
            let expected = 4usize.pow(t.len() as u32) * 5usize.pow(res.dim_v as u32);
            if w.len() != expected {
                bad_size.push(format!("{t:?}: {} != {expected}", w.len()));
            }
            total += w.len();
            for f in w {
                if owner.insert(f, t).is_some() {
                    overlaps += 1;
                }
            }
        }
        let second = CriterionResult::new(
            "4b",
            "#W_T = (l-1)^#T * l^dim V_S0, W_T pairwise disjoint",
            bad_size.is_empty() && overlaps == 0 && ts.len() >= opts.random_t,
            format!(
                "{} distinct T (#T <= 3) from {} pool primes, {total} twists, {} size mismatches, {overlaps} shared twists{}",
                ts.len(),
                pool.len(),
                bad_size.len(),
                bad_size.first().map(|b| format!(", first: {b}")).unwrap_or_default()
            ),
        );
        Ok(vec![first, second])
    };
    run().unwrap_or_else(|e| vec![CriterionResult::error("4", TITLE, e)])
}

// ---------------------------------------------------------------- 5

/// dim H² for ℓ = 2 from all 2^(n²) maps G × G → Z/2.
fn h2_exhaustive_ell2(g: &GroupTable) -> usize {
    let n = g.order();
    let cocycle = |bits: u64| {
        let t = |a: usize, b: usize| (bits >> (a * n + b)) & 1;
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| (t(a, b) + t(g.mul(a, b), c)) % 2 == (t(b, c) + t(a, g.mul(b, c))) % 2))
        })
    };
    let z = (0u64..1 << (n * n)).filter(|&b| cocycle(b)).count() as u64;
    let mut b = BTreeSet::new();
    for f in 0u64..1 << n {
        let bit = |x: usize| (f >> x) & 1;
        let theta: u64 = (0..n * n)
            .map(|i| ((bit(i / n) + bit(i % n) + bit(g.mul(i / n, i % n))) % 2) << i)
            .sum();
        b.insert(theta);
    }
    (z / b.len() as u64).trailing_zeros() as usize
}

/// dim H² by counting normalized cocycles with backtracking.
fn h2_backtrack(g: &GroupTable, ell: u64) -> usize {
    let n = g.order();
    let mut last: Vec<Vec<[usize; 4]>> = vec![Vec::new(); n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v = [a * n + b, g.mul(a, b) * n + c, b * n + c, a * n + g.mul(b, c)];
                last[*v.iter().max().unwrap()].push(v);
            }
        }
    }
    fn go(i: usize, theta: &mut [u64], last: &[Vec<[usize; 4]>], n: usize, ell: u64) -> u64 {
        if i == theta.len() {
            return 1;
        }
        let choices = if i / n == 0 || i.is_multiple_of(n) { 1 } else { ell };
        let mut total = 0;
        for v in 0..choices {
            theta[i] = v;
            if last[i]
                .iter()
                .all(|e| (theta[e[0]] + theta[e[1]]) % ell == (theta[e[2]] + theta[e[3]]) % ell)
            {
                total += go(i + 1, theta, last, n, ell);
            }
        }
        theta[i] = 0;
        total
    }
    let z = go(0, &mut vec![0; n * n], &last, n, ell);
    // normalized coboundaries ≅ maps f with f(1) = 0 modulo homomorphisms
    let homs = (0..ell.pow(n as u32 - 1))
        .filter(|&code| {
            let mut f = vec![0u64; n];
            let mut c = code;
            for x in f.iter_mut().skip(1) {
                *x = c % ell;
                c /= ell;
            }
            (0..n).all(|a| (0..n).all(|b| f[g.mul(a, b)] == (f[a] + f[b]) % ell))
        })
        .count() as u64;
    let b = ell.pow(n as u32 - 1) / homs;
    let mut ratio = z / b;
    let mut d = 0;
    while ratio > 1 {
        ratio /= ell;
        d += 1;
    }
    d
}

/// Search for a subgroup of index ℓ avoiding `kernel`, generated by at most
/// three elements (enough for every group here).
fn has_complement_subgroup(gt: &GroupTable, kernel: &[usize], ell: u64) -> bool {
    let target = gt.order() / ell as usize;
    let kset: BTreeSet<usize> = kernel.iter().copied().collect();
    let outside: Vec<usize> = (0..gt.order()).filter(|x| !kset.contains(x)).collect();
    let ok = |gens: &[usize]| {
        let h = gt.generated(gens);
        h.len() == target && h.iter().all(|x| *x == 0 || !kset.contains(x))
    };
    if target == 1 {
        return true;
    }
    for (i, &a) in outside.iter().enumerate() {
        let ha = gt.generated(&[a]);
        if ha.iter().any(|x| *x != 0 && kset.contains(x)) {
            continue;
        }
        if ha.len() == target {
            return true;
        }
        for (j, &b) in outside.iter().enumerate().skip(i + 1) {
            if ha.contains(&b) {
                continue;
            }
            if ok(&[a, b]) {
                return true;
            }
            for &c in outside.iter().skip(j + 1) {
                if ok(&[a, b, c]) {
                    return true;
                }
            }
        }
    }
    false
}

pub fn cohomology() -> Vec<CriterionResult> {
    let mut out = Vec::new();
    let run_h2 = || -> selstab_core::Result<(bool, String)> {
        let mut detail = Vec::new();
        let mut pass = true;
        let small2 = [
            ("1", GroupTable::trivial()),
            ("C2", GroupTable::cyclic_ell(2, 1)?),
            ("C4", GroupTable::cyclic_ell(2, 2)?),
            ("C2^2", GroupTable::elementary_abelian(2, 2)?),
        ];
        for (name, g) in &small2 {
            let (a, b) = (h2(g, 2)?.dim(), h2_exhaustive_ell2(g));
            pass &= a == b;
            detail.push(format!("{name}:{a}/{b}"));
        }
        let small3 = [
            ("1", GroupTable::trivial()),
            ("C3", GroupTable::cyclic_ell(3, 1)?),
            ("C9", GroupTable::cyclic_ell(3, 2)?),
            ("C3^2", GroupTable::elementary_abelian(3, 2)?),
        ];
        for (name, g) in &small3 {
            let (a, b) = (h2(g, 3)?.dim(), h2_backtrack(g, 3));
            pass &= a == b;
            detail.push(format!("{name}:{a}/{b}"));
        }
        Ok((pass, format!("solver/oracle dims {}", detail.join(" "))))
    };
    out.push(match run_h2() {
        Ok((pass, d)) => CriterionResult::new("5a", "H^2 dimension vs cocycle enumeration", pass, d),
        Err(e) => CriterionResult::error("5a", "H^2 dimension vs cocycle enumeration", e),
    });
    let run_ext = || -> selstab_core::Result<(bool, String)> {
        let mut checked = 0;
        let mut disagreements = Vec::new();
        let mut named = Vec::new();
        for ell in [2u64, 3, 5] {
            for (name, gt) in corpus(ell)? {
                let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
                for z in center(&gt) {
                    if z == 0 || gt.element_order(z) != ell {
                        continue;
                    }
                    let sub = gt.generated(&[z]);
                    if !seen.insert(sub.clone()) {
                        continue;
                    }
                    let (g, pi) = gt.quotient(&sub)?;
                    let class = extension_class(&gt, &g, &pi, ell)?;
                    let by_subgroups = has_complement_subgroup(&gt, &sub, ell);
                    checked += 1;
                    if class.is_split() != by_subgroups || class.split_by_complement != by_subgroups {
                        disagreements.push(format!("{name} mod <{z}>"));
                    }
                }
                let nonsplit_expected = name.starts_with("Heis") || name == format!("C{}", ell * ell);
                if nonsplit_expected {
                    // the center (Heisenberg) or the order-ℓ subgroup (cyclic) is unique
                    let z = center(&gt).into_iter().find(|&z| z != 0 && gt.element_order(z) == ell).unwrap();
                    let sub = gt.generated(&[z]);
                    let (g, pi) = gt.quotient(&sub)?;
                    let split = extension_class(&gt, &g, &pi, ell)?.is_split();
                    if split {
                        disagreements.push(format!("{name} reported split"));
                    }
                    named.push(format!("{name}:{}", if split { "split" } else { "non-split" }));
                }
            }
        }
        Ok((
            disagreements.is_empty(),
            format!(
                "{checked} central quotients across the l = 2, 3, 5 corpora, {} disagreements; {}",
                disagreements.len(),
                named.join(" ")
            ),
        ))
    };
    out.push(match run_ext() {
        Ok((pass, d)) => CriterionResult::new("5b", "extension split verdict vs complement search", pass, d),
        Err(e) => CriterionResult::error("5b", "extension split verdict vs complement search", e),
    });
    out
}

// ---------------------------------------------------------------- 6

/// Every character Σ c_q χ^{(q)} over S0 ∪ T with c ≠ 0 on T that vanishes
/// at every v ∈ Z, by direct enumeration with naive indices.
fn naive_w_t(z: &[u64], s0: &[u64], t: &[u64], ell: u64, roots: &HashMap<u64, u64>) -> Vec<BTreeMap<u64, u64>> {
    let support: Vec<u64> = s0.iter().chain(t).copied().collect();
    let idx: Vec<Vec<u64>> = z
        .iter()
        .map(|&v| support.iter().map(|&q| naive_index(v, q, ell, roots[&q])).collect())
        .collect();
    let mut out = Vec::new();
    let total = ell.pow(support.len() as u32);
    'maps: for code in 0..total {
        let mut c = code;
        let coeffs: Vec<u64> = support
            .iter()
            .map(|_| {
                let x = c % ell;
                c /= ell;
                x
            })
            .collect();
        if coeffs[s0.len()..].contains(&0) {
            continue;
        }
        for row in &idx {
            if row.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<u64>() % ell != 0 {
                continue 'maps;
            }
        }
        out.push(support.iter().copied().zip(coeffs).filter(|(_, x)| *x != 0).collect());
    }
    out
}

/// Subsets of `pool` with product ≤ `limit`.
fn subsets_below(pool: &[u64], limit: u128) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &q in pool {
        let mut add = Vec::new();
        for s in &out {
            let prod: u128 = s.iter().map(|&x| x as u128).product::<u128>() * q as u128;
            if prod <= limit {
                let mut t = s.clone();
                t.push(q);
                add.push(t);
            }
        }
        out.extend(add);
    }
    out
}

pub fn census(opts: &Options) -> Vec<CriterionResult> {
    const TITLE: &str = "n = 1 census";
    let run = || -> Result<Vec<CriterionResult>, Box<dyn std::error::Error>> {
        let ell = 5u64;
        let curve = test_curve();
        let cache = cache_for(opts, &curve);
        let params = TEParams::theorem(curve.clone(), ell, selstab_core::fields::AbelianFieldDesc::trivial(ell)?)?;
        let z: BTreeSet<u64> = params.sigma().into_iter().collect();
        let s0 = find_s0(&params, &z, 100_000, &cache)?;
        let mut avoid = z.clone();
        avoid.extend(&s0.s0);
        let pool = PrimePool::from_te(&params, &avoid, 300, &cache)?;
        let spec = SelmerSpec::trivial(ell, s0.s0.clone(), z.clone())?;
        let s0_data = S0Data::from(&s0);
        let x_max = 10u128.pow(opts.census_max_exp);
        let census = census_n1(&pool, &spec, x_max, 1 << 24)?;

        // independent enumeration of coefficient maps
        let z_list: Vec<u64> = z.iter().copied().collect();
        let mut roots = HashMap::new();
        for &q in s0.s0.iter().chain(&pool.primes) {
            roots.insert(q, naive_primitive_root(q));
        }
        let t_limit = integer_root(x_max, (ell - 1) as u32);
        let mut brute_all = Vec::new();
        for t in subsets_below(&pool.primes, t_limit) {
            brute_all.extend(naive_w_t(&z_list, &s0.s0, &t, ell, &roots));
        }
        let mut brute_exact: Vec<BTreeMap<u64, u64>> = brute_all
            .iter()
            .filter(|f| f.keys().map(|&q| q as u128).product::<u128>() <= t_limit)
            .cloned()
            .collect();
        brute_exact.sort();
        let members: Vec<BTreeMap<u64, u64>> = census.members.iter().map(|f| f.coefficients.clone()).collect();

        let mut certified = 0;
        let mut disc_ok = true;
        for f in &brute_all {
            let field = selstab_core::fields::character_field(ell, f)?;
            if certify_selmer_vanishing(&curve, ell, &field, true, &cache)?.is_certified() {
                certified += 1;
            }
            let conductor: BigUint = f.keys().map(|&q| BigUint::from(q)).product();
            disc_ok &= field.discriminant_abs() == conductor.pow((ell - 1) as u32);
        }
        let ps = partial_sum(&pool, t_limit)?;
        let m = count_lower_bound_m(&pool, &s0_data, &BigUint::from(x_max), 1, Rational::from(1))?;
        let mut out = vec![
            CriterionResult::new(
                "6a",
                "census matches brute-force coefficient maps",
                brute_all.len() as u128 == census.w_total && brute_exact == members,
                format!(
                    "S0 = {:?}, pool = {:?}; X = 1e{}: {} twists with (prod_T q)^4 <= X ({} by brute force), \
                     {} with exact |disc| <= X ({} by brute force)",
                    s0.s0,
                    pool.primes,
                    opts.census_max_exp,
                    census.w_total,
                    brute_all.len(),
                    census.count(),
                    brute_exact.len()
                ),
            ),
            CriterionResult::new(
                "6b",
                "every census twist certifies",
                certified == brute_all.len() && disc_ok,
                format!("{certified}/{} certified, |disc| = conductor^4 for all: {disc_ok}", brute_all.len()),
            ),
            CriterionResult::new(
                "6c",
                "partial_sum cross-check",
                ps == census.w_total && m.value == ps,
                format!("S({t_limit}) = {ps}, M_lower(X) = {}, census total {}", m.value, census.w_total),
            ),
        ];

        // exponent diagnostics
        let synth: Vec<(f64, f64)> = (0..17)
            .map(|i| {
                let x = 10f64.powf(6.0 + 0.25 * i as f64);
                (x, 2.5 * x.powf(0.25) * x.ln().powf(19.0 / 24.0 - 1.0))
            })
            .collect();
        let fit = fit_exponents(&synth)?;
        out.push(CriterionResult::new(
            "6d",
            "fit recovers synthetic exponents",
            (fit.a - 0.25).abs() < 1e-6 && (fit.delta_minus_one + 5.0 / 24.0).abs() < 1e-6,
            format!("a = {:.9}, delta-1 = {:.9}", fit.a, fit.delta_minus_one),
        ));
        let mut pts = Vec::new();
        let mut strict = Vec::new();
        for i in 0..=(4 * (opts.census_max_exp - 6)) {
            let x = if i % 4 == 0 {
                10u128.pow(6 + i / 4)
            } else {
                10f64.powf(6.0 + i as f64 / 4.0).round() as u128
            };
            let v = count_lower_bound_m(&pool, &s0_data, &BigUint::from(x), 1, Rational::from(1))?.value;
            pts.push((x as f64, v as f64));
            strict.push(census_n1(&pool, &spec, x, 1 << 24)?.count());
        }
        let real = fit_exponents(&pts);
        let detail = match &real {
            Ok(f) => format!(
                "a = {:.4}, delta-1 = {:.4}, rms = {:.3} on {} points, counts {:?}; exact-disc counts {:?}",
                f.a,
                f.delta_minus_one,
                f.residual,
                pts.len(),
                pts.iter().map(|p| p.1 as u64).collect::<Vec<_>>(),
                strict
            ),
            Err(e) => format!("fit failed: {e}"),
        };
        let pass = real.as_ref().is_ok_and(|f| (0.15..=0.35).contains(&f.a));
        out.push(CriterionResult::new("6e", "real-census fitted a in [0.15, 0.35]", pass, detail).diagnostic());
        Ok(out)
    };
    run().unwrap_or_else(|e| vec![CriterionResult::error("6", TITLE, e)])
}

// ---------------------------------------------------------------- 7

pub fn malle() -> Vec<CriterionResult> {
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for &(ell, name, text) in SHIPPED_TABLES {
        let res = GroupTable::from_text(text, Some(ell)).and_then(|g| {
            let n = selstab_core::groups::ell_power_exponent(g.order(), ell).unwrap_or(0);
            let (_, a) = malle_invariant(&g)?;
            Ok((n, a))
        });
        match res {
            Ok((n, a)) => {
                let want = Rational::new(1, (ell.pow(n - 1) * (ell - 1)) as i64);
                if a != want {
                    bad.push(format!("{name}: {a} != {want}"));
                }
                seen.push(format!("{name}:{a}"));
            }
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    vec![CriterionResult::new(
        "7",
        "Malle invariant 1/(l^(n-1)(l-1)) on shipped tables",
        bad.is_empty(),
        format!("{} tables [{}]{}", SHIPPED_TABLES.len(), seen.join(" "), if bad.is_empty() { String::new() } else { format!("; bad: {}", bad.join(", ")) }),
    )]
}

// ---------------------------------------------------------------- 8

/// #Ẽ(F_p) by the double loop over (x, y), plus the point at infinity.
fn naive_count(a: &[i64; 5], p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = a.map(|c| reduce(c as i128, p));
    let mut n = 1;
    for x in 0..p {
        let rhs = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
        for y in 0..p {
            let lhs = (y * y + a1 * x % p * y + a3 * y) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

pub fn point_counts(opts: &Options) -> Vec<CriterionResult> {
    let mut mismatches = Vec::new();
    let mut hasse_fail = Vec::new();
    let mut checked = 0usize;
    let mut specials = String::new();
    for (label, coeffs) in POINT_COUNT_CURVES {
        let curve = match CurveQ::new(*coeffs) {
            Ok(c) => c,
            Err(e) => return vec![CriterionResult::error("8", "point counts", e)],
        };
        let cache = cache_for(opts, &curve);
        let primes: Vec<u64> = sieve_primes(opts.point_count_bound)
            .into_iter()
            .filter(|&p| curve.has_good_reduction(p))
            .collect();
        let results: Vec<(u64, Result<i64, String>, i64)> = primes
            .par_iter()
            .map(|&p| {
                let naive = p as i64 + 1 - naive_count(coeffs, p) as i64;
                (p, cache.trace(&curve, p).map_err(|e| e.to_string()), naive)
            })
            .collect();
        for (p, got, naive) in results {
            checked += 1;
            match got {
                Ok(ap) => {
                    if ap != naive {
                        mismatches.push(format!("{label} p={p}: {ap} vs {naive}"));
                    }
                    if !within_hasse(ap, p) {
                        hasse_fail.push(format!("{label} p={p}"));
                    }
                }
                Err(e) => mismatches.push(format!("{label} p={p}: {e}")),
            }
        }
        if coeffs == &[0, 0, 0, 1, 1] {
            let a5 = cache.trace(&curve, 5).ok();
            let a11 = cache.trace(&curve, 11).ok();
            if a5 != Some(-3) || a11 != Some(-2) {
                mismatches.push(format!("a_5 = {a5:?}, a_11 = {a11:?}"));
            }
            specials = format!("a_5 = {}, a_11 = {}", a5.unwrap_or(0), a11.unwrap_or(0));
        }
    }
    vec![CriterionResult::new(
        "8",
        "trace of Frobenius vs naive enumeration",
        mismatches.is_empty() && hasse_fail.is_empty(),
        format!(
            "{checked} (curve, p) pairs with p <= {}, {} mismatches, {} Hasse violations; {specials}{}",
            opts.point_count_bound,
            mismatches.len(),
            hasse_fail.len(),
            mismatches.first().map(|m| format!("; first: {m}")).unwrap_or_default()
        ),
    )]
}

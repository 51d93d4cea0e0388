//! Finite groups as multiplication tables, with the ℓ-group toolkit needed
//! for central extensions: centre, Frattini subgroup, central filtrations,
//! fibre products, H²(G, Z/ℓ) for the trivial action and extension classes.
//!
//! Elements are indices `0..n`; index 0 is always the identity.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Echelon, SparseRref};
use crate::modarith::is_prime;
use crate::{invalid, precondition, Error, Rational, Result};

/// Largest order checked for associativity triple by triple.
pub const EXHAUSTIVE_ASSOCIATIVITY_CAP: usize = 512;
/// Sampled triples above that cap.
pub const ASSOCIATIVITY_SAMPLES: usize = 200_000;
/// Largest group order accepted by [`h2`].
pub const H2_ORDER_CAP: usize = 64;

/// A validated group multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTable {
    order: usize,
    /// row-major, `table[a * n + b] = a·b`
    table: Vec<u32>,
    inverse: Vec<u32>,
    ell: Option<u64>,
}

/// `Some(k)` when `n = ell^k`.
pub fn ell_power_exponent(n: usize, ell: u64) -> Option<u32> {
    let mut n = n as u64;
    let mut k = 0;
    while n > 1 {
        if !n.is_multiple_of(ell) {
            return None;
        }
        n /= ell;
        k += 1;
    }
    (n == 1).then_some(k)
}

impl GroupTable {
    /// Validate a table given as rows; identity must be index 0.
    pub fn from_rows(rows: &[Vec<usize>], ell: Option<u64>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid!("empty group table"));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid!("row {i} has {} entries, expected {n}", row.len()));
            }
            for &x in row {
                if x >= n {
                    return Err(invalid!("entry {x} out of range in row {i}"));
                }
                table.push(x as u32);
            }
        }
        Self::from_flat(n, table, ell)
    }

    fn from_flat(n: usize, table: Vec<u32>, ell: Option<u64>) -> Result<Self> {
        for a in 0..n {
            if table[a] as usize != a || table[a * n] as usize != a {
                return Err(invalid!("index 0 is not the identity (fails at {a})"));
            }
        }
        let mut inverse = vec![u32::MAX; n];
        for a in 0..n {
            let mut seen = vec![false; n];
            for b in 0..n {
                let c = table[a * n + b] as usize;
                if seen[c] {
                    return Err(invalid!("row {a} repeats element {c}; not a group"));
                }
                seen[c] = true;
                if c == 0 {
                    inverse[a] = b as u32;
                }
            }
        }
        let g = GroupTable {
            order: n,
            table,
            inverse,
            ell,
        };
        g.check_associative()?;
        if let Some(l) = ell {
            if !is_prime(l) || ell_power_exponent(n, l).is_none() {
                return Err(invalid!("order {n} is not a power of the prime {l}"));
            }
        }
        Ok(g)
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.order;
        let bad = |a: usize, b: usize, c: usize| {
            invalid!("table is not associative at ({a}, {b}, {c})")
        };
        if n <= EXHAUSTIVE_ASSOCIATIVITY_CAP {
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mul(a, b);
                    for c in 0..n {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return Err(bad(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..ASSOCIATIVITY_SAMPLES {
                let a = (rng.next_u64() % n as u64) as usize;
                let b = (rng.next_u64() % n as u64) as usize;
                let c = (rng.next_u64() % n as u64) as usize;
                if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                    return Err(bad(a, b, c));
                }
            }
        }
        Ok(())
    }

    /// Build from a multiplication closure on `0..n` (identity 0).
    pub fn from_fn(n: usize, ell: Option<u64>, mul: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(mul(a, b) as u32);
            }
        }
        Self::from_flat(n, table, ell)
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// Z/n, element i ↔ i.
    pub fn cyclic(n: usize) -> Self {
        Self::from_fn(n, None, |a, b| (a + b) % n).expect("cyclic table is a group")
    }

    /// Z/ℓ^k tagged with ℓ.
    pub fn cyclic_ell(ell: u64, k: u32) -> Result<Self> {
        let n = ell.pow(k) as usize;
        Self::from_fn(n, Some(ell), |a, b| (a + b) % n)
    }

    /// (Z/ℓ)^r, elements as base-ℓ digit vectors.
    pub fn elementary_abelian(ell: u64, r: u32) -> Result<Self> {
        let l = ell as usize;
        let n = l.pow(r);
        Self::from_fn(n, Some(ell), |mut a, mut b| {
            let (mut out, mut place) = (0, 1);
            for _ in 0..r {
                out += ((a % l + b % l) % l) * place;
                a /= l;
                b /= l;
                place *= l;
            }
            out
        })
    }

    /// Upper unitriangular 3×3 matrices over F_ℓ:
    /// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab'), index a·ℓ² + b·ℓ + c.
    pub fn heisenberg(ell: u64) -> Result<Self> {
        let l = ell as usize;
        let split = |x: usize| (x / (l * l), x / l % l, x % l);
        Self::from_fn(l * l * l, Some(ell), |x, y| {
            let (a, b, c) = split(x);
            let (a2, b2, c2) = split(y);
            ((a + a2) % l) * l * l + ((b + b2) % l) * l + (c + c2 + a * b2) % l
        })
    }

    /// G × H, index `g·|H| + h`.
    pub fn direct_product(g: &GroupTable, h: &GroupTable) -> Result<Self> {
        let m = h.order;
        let ell = match (g.ell, h.ell) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        Self::from_fn(g.order * m, ell, |x, y| {
            g.mul(x / m, y / m) * m + h.mul(x % m, y % m)
        })
    }

    /// Parse `n` followed by `n` rows of `n` indices.
    pub fn from_text(text: &str, ell: Option<u64>) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group table file".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be the order n".into()))?;
        let mut rows = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row: core::result::Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
            rows.push(row.map_err(|_| Error::Parse(format!("row {i}: non-integer entry")))?);
        }
        if rows.len() != n {
            return Err(Error::Parse(format!("expected {n} rows, found {}", rows.len())));
        }
        Self::from_rows(&rows, ell)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.order);
        for a in 0..self.order {
            let row: Vec<String> = (0..self.order).map(|b| format!("{}", self.mul(a, b))).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn ell(&self) -> Option<u64> {
        self.ell
    }

    pub fn with_ell(mut self, ell: u64) -> Result<Self> {
        if !is_prime(ell) || ell_power_exponent(self.order, ell).is_none() {
            return Err(invalid!("order {} is not a power of the prime {ell}", self.order));
        }
        self.ell = Some(ell);
        Ok(self)
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let (mut x, mut k) = (a, 1);
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// a⁻¹b⁻¹ab
    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_cyclic(&self) -> bool {
        (0..self.order).any(|a| self.element_order(a) == self.order as u64)
    }

    /// Sorted element set of the subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order];
        inside[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !inside[y] {
                    inside[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order).filter(|&x| inside[x]).collect()
    }

    /// Greedy generating set: lowest index not yet reached, repeatedly.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![0usize];
        while span.len() < self.order {
            let next = (0..self.order).find(|x| span.binary_search(x).is_err()).unwrap();
            gens.push(next);
            span = self.generated(&gens);
        }
        gens
    }

    pub fn is_normal(&self, sub: &[usize]) -> bool {
        let set: BTreeSet<usize> = sub.iter().copied().collect();
        (0..self.order).all(|g| sub.iter().all(|&h| set.contains(&self.mul(self.mul(self.inv(g), h), g))))
    }

    /// Quotient by a normal subgroup and the projection map.
    pub fn quotient(&self, normal: &[usize]) -> Result<(GroupTable, Vec<usize>)> {
        if !self.is_normal(normal) || normal.first() != Some(&0) {
            return Err(precondition!("subgroup is not normal"));
        }
        let mut coset = vec![usize::MAX; self.order];
        let mut reps = Vec::new();
        for g in 0..self.order {
            if coset[g] == usize::MAX {
                for &h in normal {
                    coset[self.mul(g, h)] = reps.len();
                }
                reps.push(g);
            }
        }
        let m = reps.len();
        let ell = self.ell;
        let q = GroupTable::from_fn(m, ell, |a, b| coset[self.mul(reps[a], reps[b])])?;
        Ok((q, coset))
    }

    fn require_ell_group(&self, ell: u64) -> Result<u32> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        ell_power_exponent(self.order, ell)
            .ok_or_else(|| invalid!("group of order {} is not an {ell}-group", self.order))
    }

    /// Whether `f: self → target` (as an index map) is a homomorphism.
    pub fn is_homomorphism(&self, target: &GroupTable, f: &[usize]) -> bool {
        f.len() == self.order
            && f.iter().all(|&x| x < target.order)
            && (0..self.order)
                .all(|a| (0..self.order).all(|b| f[self.mul(a, b)] == target.mul(f[a], f[b])))
    }
}

/// `{z : zg = gz for all g}`.
pub fn center(g: &GroupTable) -> Vec<usize> {
    (0..g.order)
        .filter(|&z| (0..g.order).all(|x| g.mul(z, x) == g.mul(x, z)))
        .collect()
}

/// Φ(G) = G^ℓ[G, G] for an ℓ-group G.
pub fn frattini(g: &GroupTable, ell: u64) -> Result<Vec<usize>> {
    g.require_ell_group(ell)?;
    let mut gens: BTreeSet<usize> = (0..g.order).map(|x| g.pow(x, ell)).collect();
    for a in 0..g.order {
        for b in 0..a {
            gens.insert(g.commutator(a, b));
        }
    }
    gens.remove(&0);
    Ok(g.generated(&gens.into_iter().collect::<Vec<_>>()))
}

/// G = G₀ ⊃ G₁ ⊃ … ⊃ G_n = 1 with central steps of order ℓ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    /// `subgroups[i]` is G_i as a sorted element list.
    pub subgroups: Vec<Vec<usize>>,
}

impl Filtration {
    /// Number of steps n.
    pub fn len(&self) -> usize {
        self.subgroups.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Check normality, indices ℓ and centrality of every step.
    pub fn verify(&self, g: &GroupTable, ell: u64) -> bool {
        let first_ok = self.subgroups.first().is_some_and(|s| s.len() == g.order);
        let last_ok = self.subgroups.last().is_some_and(|s| s == &[0]);
        first_ok
            && last_ok
            && self.subgroups.windows(2).all(|w| {
                let (upper, lower) = (&w[0], &w[1]);
                let lower_set: BTreeSet<usize> = lower.iter().copied().collect();
                g.is_normal(lower)
                    && upper.len() as u64 == lower.len() as u64 * ell
                    && lower.iter().all(|x| upper.binary_search(x).is_ok())
                    && upper
                        .iter()
                        .all(|&u| (0..g.order).all(|x| lower_set.contains(&g.commutator(x, u))))
            })
    }
}

/// Central filtration built from the bottom: each step adjoins the
/// lowest-index central element of order ℓ in the current quotient.
pub fn central_filtration(g: &GroupTable, ell: u64) -> Result<Filtration> {
    let n = g.require_ell_group(ell)? as usize;
    let mut chain = vec![vec![0usize]];
    let mut current = vec![0usize];
    for _ in 0..n {
        let (q, proj) = g.quotient(&current)?;
        let z = center(&q)
            .into_iter()
            .find(|&z| z != 0 && q.element_order(z) == ell)
            .expect("a nontrivial ℓ-group has central elements of order ℓ");
        // lift: preimage of ⟨z⟩
        let target: BTreeSet<usize> = q.generated(&[z]).into_iter().collect();
        current = (0..g.order).filter(|x| target.contains(&proj[*x])).collect();
        chain.push(current.clone());
    }
    chain.reverse();
    let f = Filtration { subgroups: chain };
    assert!(f.verify(g, ell), "central filtration failed its own verification");
    Ok(f)
}

/// G₁ ×_G G₂ with its two projections.
#[derive(Debug, Clone)]
pub struct FibreProduct {
    pub group: GroupTable,
    /// element i is the pair `pairs[i]`
    pub pairs: Vec<(usize, usize)>,
    pub proj1: Vec<usize>,
    pub proj2: Vec<usize>,
}

pub fn fibre_product(
    g1: &GroupTable,
    g2: &GroupTable,
    g: &GroupTable,
    f1: &[usize],
    f2: &[usize],
) -> Result<FibreProduct> {
    for (name, src, f) in [("f1", g1, f1), ("f2", g2, f2)] {
        if !src.is_homomorphism(g, f) {
            return Err(precondition!("{name} is not a homomorphism onto G"));
        }
        let image: BTreeSet<usize> = f.iter().copied().collect();
        if image.len() != g.order {
            return Err(precondition!("{name} is not surjective"));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..g1.order)
        .flat_map(|a| (0..g2.order).filter(move |&b| f1[a] == f2[b]).map(move |b| (a, b)))
        .collect();
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let ell = match (g1.ell, g2.ell) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    };
    let group = GroupTable::from_fn(pairs.len(), ell, |x, y| {
        let (a, b) = pairs[x];
        let (c, d) = pairs[y];
        index[&(g1.mul(a, c), g2.mul(b, d))]
    })?;
    Ok(FibreProduct {
        proj1: pairs.iter().map(|p| p.0).collect(),
        proj2: pairs.iter().map(|p| p.1).collect(),
        group,
        pairs,
    })
}

/// H²(G, Z/ℓ) for the trivial action.
#[derive(Debug, Clone)]
pub struct H2 {
    pub ell: u64,
    pub order: usize,
    pub z2_dim: usize,
    pub b2_dim: usize,
    /// Normalized cocycles (θ(1, ·) = θ(·, 1) = 0) whose classes form a basis;
    /// entry `g·n + h` is θ(g, h).
    pub basis: Vec<Vec<u32>>,
}

impl H2 {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Rows of δ: one per (g,h), n columns.
pub fn coboundary_matrix(g: &GroupTable, p: u32) -> Vec<Vec<u32>> {
    let n = g.order;
    (0..n * n)
        .map(|idx| {
            let (a, b) = (idx / n, idx % n);
            let mut row = vec![0u32; n];
            row[a] = (row[a] + 1) % p;
            row[b] = (row[b] + 1) % p;
            let ab = g.mul(a, b);
            row[ab] = (row[ab] + p - 1) % p;
            row
        })
        .collect()
}

/// Compute dim Z² − dim B² and a basis of classes by elimination.
pub fn h2(g: &GroupTable, ell: u64) -> Result<H2> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    let n = g.order;
    if n > H2_ORDER_CAP {
        return Err(Error::Resource {
            what: "H² linear system (group order)",
            requested: n as u128,
            cap: H2_ORDER_CAP as u128,
        });
    }
    let p = ell as u32;
    let var = |a: usize, b: usize| a * n + b;
    let mut sys = SparseRref::new(n * n, p);
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            for c in 0..n {
                // θ(a,b) + θ(ab,c) − θ(b,c) − θ(a,bc) = 0
                sys.insert(&[
                    (var(a, b), 1),
                    (var(ab, c), 1),
                    (var(b, c), -1),
                    (var(a, g.mul(b, c)), -1),
                ]);
            }
        }
    }
    let z2 = sys.kernel();
    let delta = coboundary_matrix(g, p);
    // B² is the column span of δ
    let mut span = Echelon::new(n * n, p);
    for f in 0..n {
        span.insert(delta.iter().map(|row| row[f]).collect());
    }
    let b2_dim = span.rank();
    let mut basis = Vec::new();
    for z in z2.iter() {
        let z = normalize_cocycle(z, p);
        if span.insert(z.clone()) {
            basis.push(z);
        }
    }
    Ok(H2 {
        ell,
        order: n,
        z2_dim: z2.len(),
        b2_dim,
        basis,
    })
}

/// For a cocycle θ(1,h) = θ(g,1) = θ(1,1); a constant is the coboundary of
/// a constant map, so subtracting θ(1,1) normalizes without changing the class.
pub fn normalize_cocycle(theta: &[u32], p: u32) -> Vec<u32> {
    let c = theta[0];
    theta.iter().map(|&x| (x + p - c) % p).collect()
}

/// θ(g,h) + θ(gh,k) = θ(h,k) + θ(g,hk) for all triples.
pub fn is_cocycle(g: &GroupTable, theta: &[u32], p: u32) -> bool {
    let n = g.order;
    (0..n).all(|a| {
        (0..n).all(|b| {
            let ab = g.mul(a, b);
            (0..n).all(|c| {
                (theta[a * n + b] + theta[ab * n + c]) % p
                    == (theta[b * n + c] + theta[a * n + g.mul(b, c)]) % p
            })
        })
    })
}

/// Solve δf = θ; `Some(f)` exactly when θ is a coboundary.
pub fn coboundary_preimage(g: &GroupTable, theta: &[u32], p: u32) -> Option<Vec<u32>> {
    let n = g.order;
    linalg::solve(&coboundary_matrix(g, p), theta, n, p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocycleClass {
    /// `theta[g·n + h]`
    pub theta: Vec<u32>,
    pub is_coboundary: bool,
    /// `None` when G is beyond the H² cap.
    pub h2_coordinates: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionClass {
    pub class: CocycleClass,
    pub kernel_generator: usize,
    /// split by the coboundary test
    pub split_by_cocycle: bool,
    /// split by finding a complement subgroup
    pub split_by_complement: bool,
}

impl ExtensionClass {
    pub fn is_split(&self) -> bool {
        self.split_by_cocycle
    }
}

/// The class θ ∈ H²(G, Z/ℓ) of a central extension 1 → Z/ℓ → G̃ → G → 1
/// given by `pi: G̃ → G`.
pub fn extension_class(gt: &GroupTable, g: &GroupTable, pi: &[usize], ell: u64) -> Result<ExtensionClass> {
    if !is_prime(ell) {
        return Err(Error::NotPrime(ell));
    }
    if !gt.is_homomorphism(g, pi) || pi.iter().collect::<BTreeSet<_>>().len() != g.order {
        return Err(precondition!("pi is not a surjective homomorphism"));
    }
    let kernel: Vec<usize> = (0..gt.order).filter(|&x| pi[x] == 0).collect();
    if kernel.len() as u64 != ell {
        return Err(precondition!("kernel has order {}, expected {ell}", kernel.len()));
    }
    if kernel.iter().any(|&k| (0..gt.order).any(|x| gt.mul(k, x) != gt.mul(x, k))) {
        return Err(precondition!("kernel is not central"));
    }
    let z = kernel[1];
    let mut log = BTreeMap::new();
    let mut x = 0;
    for i in 0..ell as u32 {
        log.insert(x, i);
        x = gt.mul(x, z);
    }
    let n = g.order;
    let mut section = vec![usize::MAX; n];
    for x in (0..gt.order).rev() {
        section[pi[x]] = x;
    }
    let mut theta = vec![0u32; n * n];
    for a in 0..n {
        for b in 0..n {
            let t = gt.mul(gt.mul(section[a], section[b]), gt.inv(section[g.mul(a, b)]));
            theta[a * n + b] = log[&t];
        }
    }
    let p = ell as u32;
    debug_assert!(is_cocycle(g, &theta, p));
    let split_by_cocycle = coboundary_preimage(g, &theta, p).is_some();
    let split_by_complement = has_complement(gt, g, pi, &kernel, &section);
    assert_eq!(
        split_by_cocycle, split_by_complement,
        "coboundary and complement tests disagree"
    );
    let h2_coordinates = if n <= H2_ORDER_CAP {
        let h = h2(g, ell)?;
        Some(coordinates(&h, g, &theta))
    } else {
        None
    };
    Ok(ExtensionClass {
        class: CocycleClass {
            theta,
            is_coboundary: split_by_cocycle,
            h2_coordinates,
        },
        kernel_generator: z,
        split_by_cocycle,
        split_by_complement,
    })
}

/// Coordinates of the class of θ in the basis of `h`.
pub fn coordinates(h: &H2, g: &GroupTable, theta: &[u32]) -> Vec<u32> {
    let n = g.order;
    let p = h.ell as u32;
    let k = h.basis.len();
    let delta = coboundary_matrix(g, p);
    let rows: Vec<Vec<u32>> = (0..n * n)
        .map(|idx| {
            let mut row: Vec<u32> = h.basis.iter().map(|b| b[idx]).collect();
            row.extend_from_slice(&delta[idx]);
            row
        })
        .collect();
    let x = linalg::solve(&rows, theta, k + n, p).expect("cocycle must lie in Z²");
    x[..k].to_vec()
}

/// Search for a homomorphic section s: G → G̃ by choosing images of a
/// generating set (ℓ choices each) and closing up.
fn has_complement(gt: &GroupTable, g: &GroupTable, pi: &[usize], kernel: &[usize], section: &[usize]) -> bool {
    let gens = g.generating_set();
    let choices = kernel.len();
    let total = choices.pow(gens.len() as u32);
    'candidates: for code in 0..total {
        let mut s = vec![usize::MAX; g.order];
        s[0] = 0;
        let mut c = code;
        let images: Vec<usize> = gens
            .iter()
            .map(|&x| {
                let k = kernel[c % choices];
                c /= choices;
                gt.mul(section[x], k)
            })
            .collect();
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (&gen, &img) in gens.iter().zip(&images) {
                let y = g.mul(x, gen);
                let sy = gt.mul(s[x], img);
                if s[y] == usize::MAX {
                    s[y] = sy;
                    queue.push_back(y);
                } else if s[y] != sy {
                    continue 'candidates;
                }
            }
        }
        debug_assert!((0..g.order).all(|x| pi[s[x]] == x));
        if (0..g.order).all(|a| (0..g.order).all(|b| s[g.mul(a, b)] == gt.mul(s[a], s[b]))) {
            return true;
        }
    }
    false
}

/// G̃ = G × Z/ℓ with (g,a)(h,b) = (gh, a + b + θ(g,h)); element (g,a) is
/// index `g·ℓ + a`. θ must be a normalized cocycle.
pub fn extension_from_cocycle(g: &GroupTable, theta: &[u32], ell: u64) -> Result<(GroupTable, Vec<usize>)> {
    let p = ell as u32;
    if theta.len() != g.order * g.order || !is_cocycle(g, theta, p) {
        return Err(precondition!("not a cocycle on a group of order {}", g.order));
    }
    if theta[0] != 0 {
        return Err(precondition!("cocycle is not normalized"));
    }
    let l = ell as usize;
    let n = g.order;
    let tag = g.ell.filter(|&e| e == ell);
    let gt = GroupTable::from_fn(n * l, tag, |x, y| {
        let (a, i) = (x / l, x % l);
        let (b, j) = (y / l, y % l);
        g.mul(a, b) * l + (i + j + theta[a * n + b] as usize) % l
    })?;
    let pi = (0..n * l).map(|x| x / l).collect();
    Ok((gt, pi))
}

/// `min_{g≠1} (#G − #G/ord(g))` and a(G), its reciprocal.
pub fn malle_invariant(g: &GroupTable) -> Result<(u64, Rational)> {
    let n = g.order as u64;
    let min = (1..g.order)
        .map(|x| n - n / g.element_order(x))
        .min()
        .ok_or_else(|| precondition!("Malle invariant is undefined for the trivial group"))?;
    Ok((min, Rational::new(1, min as i64)))
}

/// Standard small ℓ-groups: cyclic of order ℓ^k (k ≤ 3), elementary
/// abelian of rank ≤ 3, Heisenberg of order ℓ³ and Z/ℓ² × Z/ℓ.
pub fn corpus(ell: u64) -> Result<Vec<(String, GroupTable)>> {
    let mut out = Vec::new();
    for k in 1..=3 {
        out.push((format!("C{}", ell.pow(k)), GroupTable::cyclic_ell(ell, k)?));
    }
    for r in 2..=3 {
        out.push((format!("C{ell}^{r}"), GroupTable::elementary_abelian(ell, r)?));
    }
    out.push((format!("Heis({ell})"), GroupTable::heisenberg(ell)?));
    let prod = GroupTable::direct_product(&GroupTable::cyclic_ell(ell, 2)?, &GroupTable::cyclic_ell(ell, 1)?)?;
    out.push((format!("C{}xC{ell}", ell * ell), prod));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quotient_map(g: &GroupTable, sub: &[usize]) -> (GroupTable, Vec<usize>) {
        g.quotient(sub).unwrap()
    }

    #[test]
    fn centers() {
        let c9 = GroupTable::cyclic_ell(3, 2).unwrap();
        assert_eq!(center(&c9).len(), 9);
        for ell in [2, 3, 5] {
            assert_eq!(center(&GroupTable::heisenberg(ell).unwrap()).len(), ell as usize);
        }
        assert_eq!(center(&GroupTable::trivial()), [0]);
    }

    #[test]
    fn frattini_examples() {
        for ell in [2u64, 3, 5] {
            let c = GroupTable::cyclic_ell(ell, 2).unwrap();
            let phi = frattini(&c, ell).unwrap();
            assert_eq!(phi.len() as u64, ell);
            assert!(phi.iter().all(|&x| (x as u64).is_multiple_of(ell)));
            assert_eq!(frattini(&GroupTable::elementary_abelian(ell, 2).unwrap(), ell).unwrap(), [0]);
        }
        assert!(frattini(&GroupTable::cyclic(6), 2).is_err());
    }

    #[test]
    fn cyclic_iff_frattini_quotient_has_order_ell() {
        for ell in [2u64, 3, 5] {
            for (name, g) in corpus(ell).unwrap() {
                let phi = frattini(&g, ell).unwrap();
                let (q, _) = quotient_map(&g, &phi);
                // G/Φ is elementary abelian
                assert!(q.is_abelian() && (1..q.order()).all(|x| q.element_order(x) == ell), "{name}");
                assert_eq!(g.is_cyclic(), q.order() as u64 == ell, "{name}");
            }
        }
    }

    #[test]
    fn filtrations() {
        for ell in [2u64, 3, 5] {
            let c = GroupTable::cyclic_ell(ell, 2).unwrap();
            let f = central_filtration(&c, ell).unwrap();
            assert_eq!(f.len(), 2);
            assert_eq!(f.subgroups[1], frattini(&c, ell).unwrap());
            let e = GroupTable::elementary_abelian(ell, 2).unwrap();
            let f = central_filtration(&e, ell).unwrap();
            assert_eq!(f.len(), 2);
            assert_eq!(f.subgroups[1], e.generated(&[1]));
            for (_, g) in corpus(ell).unwrap() {
                let f = central_filtration(&g, ell).unwrap();
                assert!(f.verify(&g, ell));
            }
        }
        assert!(central_filtration(&GroupTable::trivial(), 5).unwrap().is_empty());
        assert!(central_filtration(&GroupTable::cyclic(6), 3).is_err());
    }

    #[test]
    fn fibre_products() {
        let ell = 3u64;
        let g1 = GroupTable::cyclic_ell(ell, 2).unwrap();
        let g2 = GroupTable::elementary_abelian(ell, 2).unwrap();
        let triv = GroupTable::trivial();
        let fp = fibre_product(&g1, &g2, &triv, &[0; 9], &[0; 9]).unwrap();
        assert_eq!(fp.group.order(), 81);
        let id: Vec<usize> = (0..9).collect();
        let diag = fibre_product(&g1, &g1, &g1, &id, &id).unwrap();
        assert_eq!(diag.group.order(), 9);
        assert!(diag.group.is_cyclic());
        let z3 = GroupTable::cyclic_ell(ell, 1).unwrap();
        let f1: Vec<usize> = (0..9).map(|x| x % 3).collect();
        let f2: Vec<usize> = (0..9).map(|x| x % 3).collect();
        let fp = fibre_product(&g1, &g2, &z3, &f1, &f2).unwrap();
        assert_eq!(fp.group.order(), 27);
        assert!(fp.group.is_homomorphism(&g1, &fp.proj1));
        assert!(fp.group.is_homomorphism(&g2, &fp.proj2));
        assert!(fibre_product(&g1, &g2, &z3, &[0; 9], &f2).is_err());
    }

    /// All 2^(n²) maps θ for ℓ = 2; returns log₂(|Z²| / |B²|).
    fn h2_exhaustive_ell2(g: &GroupTable) -> usize {
        let n = g.order();
        let mut z = 0u64;
        for bits in 0u64..1 << (n * n) {
            let theta: Vec<u32> = (0..n * n).map(|i| (bits >> i & 1) as u32).collect();
            if is_cocycle(g, &theta, 2) {
                z += 1;
            }
        }
        let mut b = BTreeSet::new();
        for f in 0u32..1 << n {
            let theta: Vec<u32> = (0..n * n)
                .map(|i| {
                    let (x, y) = (i / n, i % n);
                    ((f >> x & 1) + (f >> y & 1) + (f >> g.mul(x, y) & 1)) % 2
                })
                .collect();
            b.insert(theta);
        }
        (z / b.len() as u64).trailing_zeros() as usize
    }

    /// Count normalized cocycles by backtracking, checking each identity
    /// once its last variable is assigned; divides by normalized coboundaries.
    fn h2_backtrack(g: &GroupTable, ell: u32) -> usize {
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
        let fixed: Vec<bool> = (0..n * n).map(|i| i / n == 0 || i % n == 0).collect();
        fn go(i: usize, theta: &mut Vec<u32>, last: &[Vec<[usize; 4]>], fixed: &[bool], ell: u32) -> u64 {
            if i == theta.len() {
                return 1;
            }
            let choices = if fixed[i] { 1 } else { ell };
            let mut total = 0;
            for v in 0..choices {
                theta[i] = v;
                let ok = last[i].iter().all(|e| {
                    (theta[e[0]] + theta[e[1]]) % ell == (theta[e[2]] + theta[e[3]]) % ell
                });
                if ok {
                    total += go(i + 1, theta, last, fixed, ell);
                }
            }
            theta[i] = 0;
            total
        }
        let z = go(0, &mut vec![0; n * n], &last, &fixed, ell);
        // normalized coboundaries: δf with f(0) = 0
        let mut b = BTreeSet::new();
        let total_f = (ell as u64).pow(n as u32 - 1);
        for code in 0..total_f {
            let mut f = vec![0u32; n];
            let mut c = code;
            for x in f.iter_mut().skip(1) {
                *x = (c % ell as u64) as u32;
                c /= ell as u64;
            }
            let theta: Vec<u32> = (0..n * n)
                .map(|i| (f[i / n] + f[i % n] + ell - f[g.mul(i / n, i % n)]) % ell)
                .collect();
            b.insert(theta);
        }
        let mut ratio = z / b.len() as u64;
        let mut d = 0;
        while ratio > 1 {
            ratio /= ell as u64;
            d += 1;
        }
        d
    }

    #[test]
    fn h2_examples() {
        assert_eq!(h2(&GroupTable::trivial(), 5).unwrap().dim(), 0);
        assert_eq!(h2(&GroupTable::cyclic_ell(2, 1).unwrap(), 2).unwrap().dim(), 1);
        assert_eq!(h2(&GroupTable::elementary_abelian(2, 2).unwrap(), 2).unwrap().dim(), 3);
        let big = GroupTable::elementary_abelian(5, 3).unwrap();
        assert!(matches!(h2(&big, 5), Err(Error::Resource { .. })));
    }

    #[test]
    fn h2_matches_exhaustive_enumeration() {
        let groups = [
            GroupTable::trivial(),
            GroupTable::cyclic_ell(2, 1).unwrap(),
            GroupTable::cyclic_ell(2, 2).unwrap(),
            GroupTable::elementary_abelian(2, 2).unwrap(),
        ];
        for g in groups {
            assert_eq!(h2(&g, 2).unwrap().dim(), h2_exhaustive_ell2(&g), "order {}", g.order());
        }
    }

    #[test]
    fn h2_matches_backtracking_order_9() {
        for g in [
            GroupTable::cyclic_ell(3, 1).unwrap(),
            GroupTable::cyclic_ell(3, 2).unwrap(),
            GroupTable::elementary_abelian(3, 2).unwrap(),
        ] {
            assert_eq!(h2(&g, 3).unwrap().dim(), h2_backtrack(&g, 3), "order {}", g.order());
        }
        // a non-abelian case for the backtracker too
        let d8 = GroupTable::heisenberg(2).unwrap();
        assert_eq!(h2(&d8, 2).unwrap().dim(), h2_backtrack(&d8, 2));
    }

    #[test]
    fn h2_abelian_rank_formula() {
        for ell in [2u64, 3, 5] {
            for r in 1..=3u32 {
                let g = GroupTable::elementary_abelian(ell, r).unwrap();
                if g.order() > H2_ORDER_CAP {
                    continue;
                }
                let expected = (r * (r + 1) / 2) as usize;
                assert_eq!(h2(&g, ell).unwrap().dim(), expected, "ell={ell} r={r}");
            }
            let c = GroupTable::cyclic_ell(ell, 2).unwrap();
            assert_eq!(h2(&c, ell).unwrap().dim(), 1);
        }
        let g = GroupTable::direct_product(&GroupTable::cyclic_ell(3, 2).unwrap(), &GroupTable::cyclic_ell(3, 1).unwrap()).unwrap();
        assert_eq!(h2(&g, 3).unwrap().dim(), 3);
    }

    #[test]
    fn extension_examples() {
        for ell in [2u64, 3, 5] {
            let g = GroupTable::elementary_abelian(ell, 2).unwrap();
            let z = GroupTable::cyclic_ell(ell, 1).unwrap();
            let prod = GroupTable::direct_product(&g, &z).unwrap();
            let l = ell as usize;
            let pi: Vec<usize> = (0..prod.order()).map(|x| x / l).collect();
            let ext = extension_class(&prod, &g, &pi, ell).unwrap();
            assert!(ext.is_split() && ext.split_by_complement);
            assert!(ext.class.h2_coordinates.as_ref().unwrap().iter().all(|&c| c == 0));

            let c2 = GroupTable::cyclic_ell(ell, 2).unwrap();
            let pi: Vec<usize> = (0..l * l).map(|x| x % l).collect();
            let ext = extension_class(&c2, &z, &pi, ell).unwrap();
            assert!(!ext.is_split() && !ext.split_by_complement);

            let h = GroupTable::heisenberg(ell).unwrap();
            let (q, pi) = h.quotient(&center(&h)).unwrap();
            let ext = extension_class(&h, &q, &pi, ell).unwrap();
            assert!(!ext.is_split());
        }
    }

    #[test]
    fn extension_rejects_bad_kernels() {
        let c8 = GroupTable::cyclic_ell(2, 3).unwrap();
        let z2 = GroupTable::cyclic_ell(2, 1).unwrap();
        let pi: Vec<usize> = (0..8).map(|x| x % 2).collect();
        assert!(extension_class(&c8, &z2, &pi, 2).is_err());
        let not_hom: Vec<usize> = (0..8).map(|x| (x == 1) as usize).collect();
        assert!(extension_class(&c8, &z2, &not_hom, 2).is_err());
    }

    #[test]
    fn every_class_round_trips_through_its_extension() {
        for (ell, g) in [
            (2u64, GroupTable::elementary_abelian(2, 2).unwrap()),
            (3, GroupTable::elementary_abelian(3, 2).unwrap()),
            (3, GroupTable::cyclic_ell(3, 2).unwrap()),
            (2, GroupTable::heisenberg(2).unwrap()),
        ] {
            let h = h2(&g, ell).unwrap();
            let p = ell as u32;
            let n = g.order();
            let classes = (ell as usize).pow(h.dim() as u32);
            for code in 0..classes {
                let mut coeffs = vec![0u32; h.dim()];
                let mut c = code;
                for x in coeffs.iter_mut() {
                    *x = (c % ell as usize) as u32;
                    c /= ell as usize;
                }
                let theta: Vec<u32> = (0..n * n)
                    .map(|i| h.basis.iter().zip(&coeffs).map(|(b, &k)| b[i] * k).sum::<u32>() % p)
                    .collect();
                let (gt, pi) = extension_from_cocycle(&g, &theta, ell).unwrap();
                let ext = extension_class(&gt, &g, &pi, ell).unwrap();
                assert_eq!(ext.split_by_complement, code == 0);
                assert_eq!(ext.class.h2_coordinates.unwrap(), coeffs);
            }
        }
    }

    #[test]
    fn malle_examples() {
        let (m, a) = malle_invariant(&GroupTable::cyclic_ell(5, 1).unwrap()).unwrap();
        assert_eq!((m, a), (4, Rational::new(1, 4)));
        for g in [GroupTable::cyclic_ell(5, 2).unwrap(), GroupTable::elementary_abelian(5, 2).unwrap()] {
            assert_eq!(malle_invariant(&g).unwrap(), (20, Rational::new(1, 20)));
        }
        assert_eq!(malle_invariant(&GroupTable::cyclic(2)).unwrap(), (1, Rational::new(1, 1)));
        assert!(malle_invariant(&GroupTable::trivial()).is_err());
    }

    #[test]
    fn text_round_trip_and_validation() {
        let h = GroupTable::heisenberg(3).unwrap();
        assert_eq!(GroupTable::from_text(&h.to_text(), Some(3)).unwrap(), h);
        assert!(GroupTable::from_text("2\n0 1\n1 1\n", None).is_err());
        assert!(GroupTable::from_text("2\n1 0\n0 1\n", None).is_err());
        // Latin square that is not associative
        let rows = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(GroupTable::from_rows(&rows, None).is_err());
        assert!(GroupTable::cyclic(6).with_ell(2).is_err());
    }
}

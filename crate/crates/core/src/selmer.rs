//! Selmer groups for C = Z/ℓ with free and zero local conditions, computed
//! in explicit global models.
//!
//! Let S carry the free condition (all of H¹(Q_q, Z/ℓ)) and Z the zero
//! condition, with ℓ ∈ Z and every q ∈ S congruent to 1 mod ℓ; S̃ = S ∪ Z.
//!
//! - Character side: V_S is spanned by the χ^{(q)}, q ∈ S. A combination
//!   f = Σ c_q χ^{(q)} restricts to zero at v ∈ Z exactly when
//!   Σ c_q · index(v mod q) = 0, so dim V_S = #S − rank M with
//!   M[v, q] = index(v mod q).
//! - Kummer side: the dual Selmer group sits in Q^×/(Q^×)^ℓ as classes
//!   b = Π_{v ∈ S̃} v^{e_v}. Local triviality at q ∈ S needs e_q = 0 and
//!   Σ_v e_v · index(v mod q) = 0. Primes of Z impose nothing.
//!
//! Both models rely on Q having trivial class group and (ℓ odd) −1 being an
//! ℓ-th power; ℓ = 2 is rejected.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::curve::CurveQ;
use crate::fields::AbelianFieldDesc;
use crate::linalg;
use crate::modarith::{is_prime, least_primitive_root, residue_index_mod};
use crate::sieve::{find_primes, SearchLimit, SearchSpec, TEParams, TraceSource};
use crate::{invalid, precondition, Error, Result};

/// Which coefficient module the local conditions refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficient {
    /// C = Z/ℓ
    Trivial,
    /// C* = μ_ℓ
    Dual,
}

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Finite(u64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalCondition {
    /// all of H¹
    Free,
    /// zero subspace
    Zero,
    /// H¹_ur, of dimension h⁰
    Unramified,
}

/// `dim H⁰(Q_v, C)` for odd ℓ.
pub fn local_h0_dim(place: Place, coefficient: Coefficient, ell: u64) -> u32 {
    match (coefficient, place) {
        (Coefficient::Trivial, _) => 1,
        (Coefficient::Dual, Place::Infinity) => 0,
        (Coefficient::Dual, Place::Finite(q)) => (q != ell && q % ell == 1) as u32,
    }
}

/// `dim H¹(Q_q, C) = h⁰(C) + h⁰(C*) + [q = ℓ]` by the local Euler
/// characteristic and duality; at infinity H¹ vanishes for odd ℓ.
pub fn local_h1_dim(place: Place, coefficient: Coefficient, ell: u64) -> u32 {
    match place {
        Place::Infinity => 0,
        Place::Finite(q) => {
            let other = match coefficient {
                Coefficient::Trivial => Coefficient::Dual,
                Coefficient::Dual => Coefficient::Trivial,
            };
            local_h0_dim(place, coefficient, ell) + local_h0_dim(place, other, ell) + (q == ell) as u32
        }
    }
}

/// `h⁰(Q, C) − h⁰(Q, C*) + Σ_v (dim 𝓛_v − h⁰(Q_v, C))` over the given
/// places; the infinite place is added with the zero condition if absent.
pub fn wiles_rhs(ell: u64, coefficient: Coefficient, conditions: &[(Place, LocalCondition)]) -> i64 {
    let dual = match coefficient {
        Coefficient::Trivial => Coefficient::Dual,
        Coefficient::Dual => Coefficient::Trivial,
    };
    // global H⁰: Z/ℓ is fixed by G_Q, μ_ℓ is not (ℓ odd)
    let global = |c: Coefficient| (c == Coefficient::Trivial) as i64;
    let mut total = global(coefficient) - global(dual);
    let mut saw_infinity = false;
    for &(place, cond) in conditions {
        saw_infinity |= place == Place::Infinity;
        let h0 = local_h0_dim(place, coefficient, ell) as i64;
        let dim_l = match cond {
            LocalCondition::Free => local_h1_dim(place, coefficient, ell) as i64,
            LocalCondition::Zero => 0,
            LocalCondition::Unramified => h0,
        };
        total += dim_l - h0;
    }
    if !saw_infinity {
        total -= local_h0_dim(Place::Infinity, coefficient, ell) as i64;
    }
    total
}

/// Free conditions on `s`, zero conditions on `z_part`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerSpec {
    ell: u64,
    s: BTreeSet<u64>,
    z_part: BTreeSet<u64>,
    coefficient: Coefficient,
}

impl SelmerSpec {
    pub fn new(ell: u64, s: BTreeSet<u64>, z_part: BTreeSet<u64>, coefficient: Coefficient) -> Result<Self> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if ell == 2 {
            return Err(precondition!("the global models need an odd ell"));
        }
        if let Some(q) = s.intersection(&z_part).next() {
            return Err(invalid!("{q} is in both S and Z"));
        }
        if !z_part.contains(&ell) {
            return Err(invalid!("Z must contain ell = {ell}"));
        }
        for &q in s.iter().chain(&z_part) {
            if !is_prime(q) {
                return Err(Error::NotPrime(q));
            }
        }
        if let Some(q) = s.iter().find(|&&q| q % ell != 1) {
            return Err(invalid!("S-prime {q} is not 1 mod {ell}"));
        }
        Ok(SelmerSpec {
            ell,
            s,
            z_part,
            coefficient,
        })
    }

    pub fn trivial(ell: u64, s: impl IntoIterator<Item = u64>, z: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::new(ell, s.into_iter().collect(), z.into_iter().collect(), Coefficient::Trivial)
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn s(&self) -> &BTreeSet<u64> {
        &self.s
    }

    pub fn z_part(&self) -> &BTreeSet<u64> {
        &self.z_part
    }

    pub fn coefficient(&self) -> Coefficient {
        self.coefficient
    }

    /// S̃ = S ∪ Z, ascending.
    pub fn s_tilde(&self) -> Vec<u64> {
        self.s.union(&self.z_part).copied().collect()
    }

    /// The same spec with extra free primes.
    pub fn with_free(&self, extra: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = self.s.clone();
        s.extend(extra);
        Self::new(self.ell, s, self.z_part.clone(), self.coefficient)
    }

    fn local_conditions(&self) -> Vec<(Place, LocalCondition)> {
        let mut out: Vec<(Place, LocalCondition)> =
            self.s.iter().map(|&q| (Place::Finite(q), LocalCondition::Free)).collect();
        out.extend(self.z_part.iter().map(|&q| (Place::Finite(q), LocalCondition::Zero)));
        out.push((Place::Infinity, LocalCondition::Zero));
        out
    }

    fn require_trivial(&self) -> Result<()> {
        if self.coefficient != Coefficient::Trivial {
            return Err(precondition!("explicit models are implemented for C = Z/ell only"));
        }
        Ok(())
    }
}

/// dim Sel − dim Sel* from local data alone.
pub fn wiles_difference(spec: &SelmerSpec) -> i64 {
    wiles_rhs(spec.ell, spec.coefficient, &spec.local_conditions())
}

/// `f = Σ c_q χ^{(q)}`; only nonzero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CharacterVector {
    pub coefficients: BTreeMap<u64, u64>,
}

impl CharacterVector {
    pub fn support(&self) -> BTreeSet<u64> {
        self.coefficients.keys().copied().collect()
    }

    /// The cyclic degree-ℓ field cut out by f.
    pub fn field(&self, ell: u64) -> Result<AbelianFieldDesc> {
        crate::fields::character_field(ell, &self.coefficients)
    }
}

/// `b = Π v^{e_v}` modulo ℓ-th powers; only nonzero exponents are stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KummerVector {
    pub exponents: BTreeMap<u64, u64>,
}

/// Memoized residue indices index(v mod q).
#[derive(Debug, Default)]
struct IndexTable {
    roots: BTreeMap<u64, u64>,
}

impl IndexTable {
    fn index(&mut self, v: u64, q: u64, ell: u64) -> Result<u64> {
        let g = match self.roots.get(&q) {
            Some(&g) => g,
            None => {
                let g = least_primitive_root(q)?;
                self.roots.insert(q, g);
                g
            }
        };
        residue_index_mod(v as i64, q, ell, g)
    }
}

/// M[v, q] = index(v mod q), rows v ∈ Z, columns q ∈ S.
fn constraint_matrix(spec: &SelmerSpec, idx: &mut IndexTable) -> Result<Vec<Vec<u32>>> {
    spec.z_part
        .iter()
        .map(|&v| {
            spec.s
                .iter()
                .map(|&q| idx.index(v, q, spec.ell).map(|x| x as u32))
                .collect()
        })
        .collect()
}

/// dim V_S and a basis.
pub fn vs_dimension(spec: &SelmerSpec) -> Result<(usize, Vec<CharacterVector>)> {
    spec.require_trivial()?;
    let m = constraint_matrix(spec, &mut IndexTable::default())?;
    let s: Vec<u64> = spec.s.iter().copied().collect();
    let basis: Vec<CharacterVector> = linalg::kernel(&m, s.len(), spec.ell as u32)
        .into_iter()
        .map(|k| CharacterVector {
            coefficients: s
                .iter()
                .zip(k)
                .filter(|(_, c)| *c != 0)
                .map(|(&q, c)| (q, c as u64))
                .collect(),
        })
        .collect();
    Ok((basis.len(), basis))
}

fn dual_system(spec: &SelmerSpec, idx: &mut IndexTable) -> Result<(Vec<u64>, Vec<Vec<u32>>)> {
    let tilde = spec.s_tilde();
    let mut rows = Vec::new();
    for &q in &spec.s {
        let mut pin = vec![0u32; tilde.len()];
        let mut index_row = vec![0u32; tilde.len()];
        for (j, &v) in tilde.iter().enumerate() {
            if v == q {
                pin[j] = 1;
            } else {
                index_row[j] = idx.index(v, q, spec.ell)? as u32;
            }
        }
        rows.push(pin);
        rows.push(index_row);
    }
    Ok((tilde, rows))
}

/// dim V_S^⊥ and a basis.
pub fn dual_dimension(spec: &SelmerSpec) -> Result<(usize, Vec<KummerVector>)> {
    spec.require_trivial()?;
    let (tilde, rows) = dual_system(spec, &mut IndexTable::default())?;
    let basis: Vec<KummerVector> = linalg::kernel(&rows, tilde.len(), spec.ell as u32)
        .into_iter()
        .map(|k| KummerVector {
            exponents: tilde
                .iter()
                .zip(k)
                .filter(|(_, e)| *e != 0)
                .map(|(&v, e)| (v, e as u64))
                .collect(),
        })
        .collect();
    Ok((basis.len(), basis))
}

/// Result of the greedy S₀ construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct S0Result {
    pub s0: Vec<u64>,
    /// dim V_{S₀}^⊥ on exit; 0 unless the search bound ran out
    pub dual_dim: usize,
    /// dim V_{S₀}
    pub dim_v: usize,
    pub complete: bool,
    pub note: String,
}

/// Add primes of 𝔗_{E,L} outside Z to S until the dual Selmer group dies.
///
/// Each round takes the first dual basis vector b and the least prime
/// q ∈ 𝔗_{E,L} \ (Z ∪ S₀) at which b is not an ℓ-th power; adding q cuts the
/// dual dimension by one.
pub fn find_s0<S: TraceSource + ?Sized>(
    params: &TEParams,
    z: &BTreeSet<u64>,
    search_bound: u64,
    source: &S,
) -> Result<S0Result> {
    extend_s0(params, z, &BTreeSet::new(), search_bound, source)
}

/// [`find_s0`] starting from free primes already in `start`; the result
/// lists only the primes added.
pub fn extend_s0<S: TraceSource + ?Sized>(
    params: &TEParams,
    z: &BTreeSet<u64>,
    start: &BTreeSet<u64>,
    search_bound: u64,
    source: &S,
) -> Result<S0Result> {
    let ell = params.ell();
    for q in params.sigma().into_iter().chain(params.base().ramified_primes()) {
        if !z.contains(&q) {
            return Err(precondition!("Z must contain Σ and the ramified primes of L; missing {q}"));
        }
    }
    let mut s0: Vec<u64> = Vec::new();
    loop {
        let free = start.iter().chain(&s0).copied().collect();
        let spec = SelmerSpec::new(ell, free, z.clone(), Coefficient::Trivial)?;
        let (dual_dim, basis) = dual_dimension(&spec)?;
        if dual_dim == 0 {
            let (dim_v, _) = vs_dimension(&spec)?;
            return Ok(S0Result {
                s0,
                dual_dim,
                dim_v,
                complete: true,
                note: "dual Selmer group is zero".into(),
            });
        }
        let b = &basis[0];
        let search = SearchSpec {
            in_te: true,
            avoid: z.iter().chain(start).chain(&s0).copied().collect(),
            not_ell_power: vec![b.exponents.iter().map(|(&v, &e)| (v, e)).collect()],
            ..Default::default()
        };
        let limit = SearchLimit {
            max_hits: Some(1),
            bound: search_bound,
        };
        let found = find_primes(&search, ell, Some(params), limit, source)?;
        match found.primes.first() {
            Some(&q) => {
                s0.push(q);
                let next = spec.with_free([q])?;
                let (after, _) = dual_dimension(&next)?;
                assert_eq!(after + 1, dual_dim, "adding {q} must cut the dual dimension by one");
            }
            None => {
                let (dim_v, _) = vs_dimension(&spec)?;
                return Ok(S0Result {
                    s0,
                    dual_dim,
                    dim_v,
                    complete: false,
                    note: format!("no suitable prime below {search_bound}; dual dimension still {dual_dim}"),
                });
            }
        }
    }
}

/// `(ℓ−1)^{#T} · ℓ^{dim V_{S₀}}`, saturating.
pub fn predicted_wt_size(ell: u64, t: usize, dim_v: usize) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..t {
        n = n.saturating_mul(ell as u128 - 1);
    }
    for _ in 0..dim_v {
        n = n.saturating_mul(ell as u128);
    }
    n
}

/// All f ∈ V_{S₀ ∪ T} ramified at every prime of T.
///
/// Requires V_{S₀}^⊥ = 0, so that localization V_{S₀∪T} → ⊕_T Z/ℓ is onto
/// with kernel V_{S₀}; both the dimension count and the final cardinality
/// are checked.
pub fn enumerate_w_t(spec_s0: &SelmerSpec, t: &BTreeSet<u64>, cap: u128) -> Result<Vec<CharacterVector>> {
    spec_s0.require_trivial()?;
    let ell = spec_s0.ell;
    if let Some(q) = t.iter().find(|q| spec_s0.s.contains(q) || spec_s0.z_part.contains(q)) {
        return Err(precondition!("T-prime {q} meets Z ∪ S₀"));
    }
    let (dual, _) = dual_dimension(spec_s0)?;
    if dual != 0 {
        return Err(precondition!("V_S0^⊥ has dimension {dual}; run find_s0 first"));
    }
    let (dim0, basis0) = vs_dimension(spec_s0)?;
    let predicted = predicted_wt_size(ell, t.len(), dim0);
    if predicted > cap {
        return Err(Error::Resource {
            what: "W_T enumeration",
            requested: predicted,
            cap,
        });
    }
    let full = spec_s0.with_free(t.iter().copied())?;
    let (dim_full, basis_full) = vs_dimension(&full)?;
    if dim_full != dim0 + t.len() {
        return Err(Error::Degenerate(format!(
            "localization onto T is not surjective: dim V = {dim_full}, expected {}",
            dim0 + t.len()
        )));
    }
    let p = ell as u32;
    let t_list: Vec<u64> = t.iter().copied().collect();
    // T-coordinates of the basis of V_{S₀∪T}: a t × dim matrix
    let proj: Vec<Vec<u32>> = t_list
        .iter()
        .map(|q| basis_full.iter().map(|f| f.coefficients.get(q).copied().unwrap_or(0) as u32).collect())
        .collect();
    let combine = |coeffs: &[u32], basis: &[CharacterVector]| -> BTreeMap<u64, u64> {
        let mut acc: BTreeMap<u64, u64> = BTreeMap::new();
        for (c, f) in coeffs.iter().zip(basis) {
            if *c == 0 {
                continue;
            }
            for (&q, &x) in &f.coefficients {
                let e = acc.entry(q).or_insert(0);
                *e = (*e + *c as u64 * x) % ell;
            }
        }
        acc.retain(|_, v| *v != 0);
        acc
    };
    let kernel_elems: Vec<BTreeMap<u64, u64>> = (0..(ell as usize).pow(dim0 as u32))
        .map(|code| {
            let digits = base_digits(code, ell as usize, dim0);
            combine(&digits, &basis0)
        })
        .collect();
    let mut out = BTreeSet::new();
    let nonzero_targets = (ell as usize - 1).pow(t_list.len() as u32);
    for code in 0..nonzero_targets {
        let target: Vec<u32> = base_digits(code, ell as usize - 1, t_list.len()).iter().map(|d| d + 1).collect();
        let x = linalg::solve(&proj, &target, basis_full.len(), p).expect("projection is onto");
        let lift = combine(&x, &basis_full);
        for k in &kernel_elems {
            let mut f = lift.clone();
            for (&q, &c) in k {
                let e = f.entry(q).or_insert(0);
                *e = (*e + c) % ell;
            }
            f.retain(|_, v| *v != 0);
            out.insert(CharacterVector { coefficients: f });
        }
    }
    if out.len() as u128 != predicted {
        return Err(Error::Degenerate(format!(
            "W_T has {} elements, predicted {predicted}",
            out.len()
        )));
    }
    debug_assert!(out.iter().all(|f| t.iter().all(|q| f.coefficients.contains_key(q))));
    Ok(out.into_iter().collect())
}

fn base_digits(mut code: usize, base: usize, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = code % base;
            code /= base;
            d as u32
        })
        .collect()
}

/// One checked condition of a vanishing certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub prime: Option<u64>,
    pub witness: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum Verdict {
    Certified,
    Rejected { clause: String, prime: Option<u64> },
}

/// Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub curve: String,
    pub ell: u64,
    pub field_descriptor: String,
    pub clauses: Vec<Clause>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

pub const CLAUSE_BASE: &str = "i.base-selmer-zero";
pub const CLAUSE_SPLIT: &str = "ii.sigma-split";
pub const CLAUSE_INERTIA: &str = "iii.inertial-degree";
pub const CLAUSE_TORSION: &str = "iii.torsion-trivial";

/// Check the sufficient conditions for Sel_ℓ(E/F) = 0: the caller's
/// assertion Sel_ℓ(E/Q) = 0, complete splitting of Σ in F, and for every
/// ramified p inertial degree 1 with Ẽ(F_p)[ℓ] = 0.
///
/// Every clause is evaluated and recorded; the verdict names the first
/// failure.
pub fn certify_selmer_vanishing<S: TraceSource + ?Sized>(
    curve: &CurveQ,
    ell: u64,
    field: &AbelianFieldDesc,
    base_assertion: bool,
    source: &S,
) -> Result<Certificate> {
    if field.ell() != ell {
        return Err(invalid!("field is an {}-extension, expected ell = {ell}", field.ell()));
    }
    let mut clauses = vec![Clause {
        name: CLAUSE_BASE.into(),
        prime: None,
        witness: if base_assertion { "asserted by caller" } else { "not asserted" }.into(),
        pass: base_assertion,
    }];
    let ramified = field.ramified_primes();
    for q in curve.sigma(ell) {
        let (pass, witness) = if ramified.contains(&q) {
            (false, "ramified in F".to_string())
        } else if field.splits_completely(q)? {
            (true, "all generator characters vanish at q".to_string())
        } else {
            (false, "some generator character is nonzero at q".to_string())
        };
        clauses.push(Clause {
            name: CLAUSE_SPLIT.into(),
            prime: Some(q),
            witness,
            pass,
        });
    }
    for p in ramified {
        let f = field.inertial_degree(p)?;
        clauses.push(Clause {
            name: CLAUSE_INERTIA.into(),
            prime: Some(p),
            witness: format!("f = {f}"),
            pass: f == 1,
        });
        let (pass, witness) = if !curve.has_good_reduction(p) {
            (false, "bad reduction".to_string())
        } else {
            let ap = source.trace(curve, p)?;
            let n = (p as i64 + 1 - ap) as u64;
            (!n.is_multiple_of(ell), format!("#E(F_p) = {n}, a_p = {ap}"))
        };
        clauses.push(Clause {
            name: CLAUSE_TORSION.into(),
            prime: Some(p),
            witness,
            pass,
        });
    }
    let verdict = match clauses.iter().find(|c| !c.pass) {
        None => Verdict::Certified,
        Some(c) => Verdict::Rejected {
            clause: c.name.clone(),
            prime: c.prime,
        },
    };
    Ok(Certificate {
        curve: curve.key(),
        ell,
        field_descriptor: field.to_string(),
        clauses,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::PointCounter;
    use crate::modarith::{ell_power_residue_index, sieve_primes};

    fn set(xs: &[u64]) -> BTreeSet<u64> {
        xs.iter().copied().collect()
    }

    #[test]
    fn local_dimensions() {
        use Coefficient::*;
        assert_eq!(local_h0_dim(Place::Finite(11), Trivial, 5), 1);
        assert_eq!(local_h0_dim(Place::Finite(11), Dual, 5), 1);
        assert_eq!(local_h0_dim(Place::Infinity, Dual, 5), 0);
        assert_eq!(local_h0_dim(Place::Finite(5), Dual, 5), 0);
        assert_eq!(local_h1_dim(Place::Finite(11), Trivial, 5), 2);
        assert_eq!(local_h1_dim(Place::Finite(7), Trivial, 5), 1);
        assert_eq!(local_h1_dim(Place::Finite(5), Trivial, 5), 2);
    }

    #[test]
    fn wiles_examples() {
        let unram: Vec<(Place, LocalCondition)> = [5u64, 7, 11]
            .iter()
            .map(|&q| (Place::Finite(q), LocalCondition::Unramified))
            .chain([(Place::Infinity, LocalCondition::Zero)])
            .collect();
        assert_eq!(wiles_rhs(5, Coefficient::Trivial, &unram), 0);
        let spec = SelmerSpec::trivial(5, [11, 31, 41], [5, 7, 61]).unwrap();
        assert_eq!(wiles_difference(&spec), 0);
        let spec = SelmerSpec::trivial(5, [], [5]).unwrap();
        assert_eq!(wiles_difference(&spec), -1);
        assert_eq!(vs_dimension(&spec).unwrap().0, 0);
        let (d, basis) = dual_dimension(&spec).unwrap();
        assert_eq!(d, 1);
        assert_eq!(basis[0].exponents, [(5, 1)].into());
    }

    #[test]
    fn vs_small_cases() {
        let spec = SelmerSpec::trivial(5, [11, 31], [5]).unwrap();
        let i11 = ell_power_residue_index(5, 11, 5).unwrap().value;
        let i31 = ell_power_residue_index(5, 31, 5).unwrap().value;
        let rank = (i11 != 0 || i31 != 0) as usize;
        let (d, basis) = vs_dimension(&spec).unwrap();
        assert_eq!(d, 2 - rank);
        for f in &basis {
            let s: u64 = f.coefficients.iter().map(|(&q, &c)| c * if q == 11 { i11 } else { i31 }).sum();
            assert_eq!(s % 5, 0);
        }
        // a single S-prime where ℓ is a fifth power: the constraint row is zero
        let q = sieve_primes(5000)
            .into_iter()
            .find(|&q| q % 5 == 1 && ell_power_residue_index(5, q, 5).unwrap().is_zero())
            .unwrap();
        assert_eq!(vs_dimension(&SelmerSpec::trivial(5, [q], [5]).unwrap()).unwrap().0, 1);
        assert!(SelmerSpec::trivial(5, [7], [5]).is_err());
        assert!(SelmerSpec::trivial(5, [11], [11, 5]).is_err());
        assert!(SelmerSpec::trivial(5, [11], [7]).is_err());
    }

    #[test]
    fn dual_rank_one_drop() {
        let spec = SelmerSpec::trivial(5, [], [5, 7]).unwrap();
        assert_eq!(dual_dimension(&spec).unwrap().0, 2);
        // a q where 7 is not a fifth power but 5 is: the pin and index rows are independent
        let q = sieve_primes(10_000)
            .into_iter()
            .find(|&q| {
                q % 5 == 1
                    && ell_power_residue_index(5, q, 5).unwrap().is_zero()
                    && !ell_power_residue_index(7, q, 5).unwrap().is_zero()
            })
            .unwrap();
        assert_eq!(dual_dimension(&spec.with_free([q]).unwrap()).unwrap().0, 1);
    }

    #[test]
    fn identity_and_increments_on_fixed_specs() {
        let z = set(&[2, 3, 5, 31]);
        let s_primes: Vec<u64> = sieve_primes(2000).into_iter().filter(|q| q % 5 == 1 && !z.contains(q)).collect();
        let mut spec = SelmerSpec::new(5, BTreeSet::new(), z, Coefficient::Trivial).unwrap();
        let mut prev = (vs_dimension(&spec).unwrap().0 as i64, dual_dimension(&spec).unwrap().0 as i64);
        for &q in s_primes.iter().take(12) {
            spec = spec.with_free([q]).unwrap();
            let now = (vs_dimension(&spec).unwrap().0 as i64, dual_dimension(&spec).unwrap().0 as i64);
            assert_eq!(now.0 - now.1, wiles_difference(&spec));
            let step = (now.0 - prev.0, now.1 - prev.1);
            assert!(step == (1, 0) || step == (0, -1), "{step:?}");
            prev = now;
        }
    }

    fn params() -> TEParams {
        TEParams::over_q(CurveQ::short(1, 1).unwrap(), 5).unwrap()
    }

    #[test]
    fn s0_and_w_t() {
        let pc = PointCounter::default();
        let p = params();
        let z: BTreeSet<u64> = p.sigma().into_iter().collect();
        let r = find_s0(&p, &z, 100_000, &pc).unwrap();
        assert!(r.complete);
        assert_eq!(r.s0.len(), z.len());
        assert_eq!(r.dim_v, 0);
        let spec = SelmerSpec::new(5, r.s0.iter().copied().collect(), z.clone(), Coefficient::Trivial).unwrap();
        assert_eq!(dual_dimension(&spec).unwrap().0, 0);
        let te: Vec<u64> = sieve_primes(3000)
            .into_iter()
            .filter(|&q| !z.contains(&q) && !r.s0.contains(&q) && crate::sieve::in_te(q, &p, &pc).unwrap())
            .take(2)
            .collect();
        let w = enumerate_w_t(&spec, &te.iter().copied().collect(), 1 << 20).unwrap();
        assert_eq!(w.len(), 16);
        let empty = enumerate_w_t(&spec, &BTreeSet::new(), 10).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].coefficients.is_empty());
        assert!(matches!(
            enumerate_w_t(&spec, &te.iter().copied().collect(), 10),
            Err(Error::Resource { requested: 16, .. })
        ));
    }

    #[test]
    fn s0_edge_cases() {
        let pc = PointCounter::default();
        let p = params();
        let z: BTreeSet<u64> = p.sigma().into_iter().collect();
        let r = find_s0(&p, &z, 100_000, &pc).unwrap();
        let again = extend_s0(&p, &z, &r.s0.iter().copied().collect(), 100_000, &pc).unwrap();
        assert!(again.complete && again.s0.is_empty());
        let short = find_s0(&p, &z, 12, &pc).unwrap();
        assert!(!short.complete && short.dual_dim > 0);
        assert!(find_s0(&p, &[2, 5].into(), 100, &pc).is_err());
    }

    #[test]
    fn certificates() {
        let pc = PointCounter::default();
        let e = CurveQ::short(1, 1).unwrap();
        let q = AbelianFieldDesc::trivial(5).unwrap();
        assert!(certify_selmer_vanishing(&e, 5, &q, true, &pc).unwrap().is_certified());
        assert!(!certify_selmer_vanishing(&e, 5, &q, false, &pc).unwrap().is_certified());
        // p ∈ 𝔗_E with every Σ-prime a fifth power mod p
        let sigma = e.sigma(5);
        let p = sieve_primes(200_000)
            .into_iter()
            .find(|&p| {
                crate::sieve::in_te(p, &params(), &pc).unwrap()
                    && sigma.iter().all(|&v| ell_power_residue_index(v as i64, p, 5).unwrap().is_zero())
            })
            .unwrap();
        let f = crate::fields::character_field(5, &[(p, 1)].into()).unwrap();
        let cert = certify_selmer_vanishing(&e, 5, &f, true, &pc).unwrap();
        assert!(cert.is_certified(), "{cert:?}");
        // a_p ≡ 2 mod 5 with p ≡ 1 mod 5: the excluded case
        let bad = sieve_primes(10_000)
            .into_iter()
            .find(|&p| p % 5 == 1 && e.has_good_reduction(p) && pc.trace(&e, p).unwrap().rem_euclid(5) == 2)
            .unwrap();
        let f = crate::fields::character_field(5, &[(bad, 1)].into()).unwrap();
        let cert = certify_selmer_vanishing(&e, 5, &f, true, &pc).unwrap();
        let torsion_failed = cert
            .clauses
            .iter()
            .any(|c| c.name == CLAUSE_TORSION && c.prime == Some(bad) && !c.pass);
        assert!(torsion_failed);
        assert!(!cert.is_certified());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn te_primes() -> Vec<u64> {
            let pc = PointCounter::default();
            let p = params();
            sieve_primes(10_000).into_iter().filter(|&q| crate::sieve::in_te(q, &p, &pc).unwrap()).collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn wiles_identity_and_one_step(
                (s, extra) in prop::sample::subsequence(te_primes(), 1..=6).prop_map(|mut v| {
                    let extra = v.remove(v.len() / 2);
                    (v, extra)
                })
            ) {
                let z: BTreeSet<u64> = params().sigma().into_iter().collect();
                let spec = SelmerSpec::new(5, s.into_iter().collect(), z, Coefficient::Trivial).unwrap();
                let before = (vs_dimension(&spec).unwrap().0 as i64, dual_dimension(&spec).unwrap().0 as i64);
                prop_assert_eq!(before.0 - before.1, wiles_difference(&spec));
                let grown = spec.with_free([extra]).unwrap();
                let after = (vs_dimension(&grown).unwrap().0 as i64, dual_dimension(&grown).unwrap().0 as i64);
                prop_assert_eq!(after.0 - after.1, wiles_difference(&grown));
                let step = (after.0 - before.0, after.1 - before.1);
                prop_assert!(step == (1, 0) || step == (0, -1), "{:?}", step);
            }
        }
    }
}

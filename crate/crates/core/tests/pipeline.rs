//! End-to-end n = 1 pipeline on y² = x³ + x + 1, ℓ = 5.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use selstab_core::counting::{census_n1, count_lower_bound_m, integer_root, partial_sum, PrimePool, S0Data};
use selstab_core::curve::{CurveQ, PointCounter};
use selstab_core::selmer::{certify_selmer_vanishing, dual_dimension, find_s0, SelmerSpec};
use selstab_core::sieve::TEParams;
use selstab_core::Rational;

struct Setup {
    curve: CurveQ,
    spec_s0: SelmerSpec,
    s0: S0Data,
    pool: PrimePool,
}

fn setup(pool_bound: u64) -> Setup {
    let curve = CurveQ::short(1, 1).unwrap();
    let params = TEParams::over_q(curve.clone(), 5).unwrap();
    let src = PointCounter::default();
    let z: BTreeSet<u64> = params.sigma().into_iter().collect();
    let res = find_s0(&params, &z, 10_000, &src).unwrap();
    assert!(res.complete);
    let spec_s0 = SelmerSpec::trivial(5, res.s0.clone(), z.clone()).unwrap();
    assert_eq!(dual_dimension(&spec_s0).unwrap().0, 0);
    let mut zs = z.clone();
    zs.extend(&res.s0);
    let pool = PrimePool::from_te(&params, &zs, pool_bound, &src).unwrap();
    Setup {
        curve,
        spec_s0,
        s0: S0Data::from(&res),
        pool,
    }
}

#[test]
fn every_counted_twist_certifies() {
    let s = setup(2000);
    let src = PointCounter::default();
    let x: u128 = 700u128.pow(4);
    let census = census_n1(&s.pool, &s.spec_s0, x, 1 << 16).unwrap();
    assert!(census.w_total > 1);
    let m = count_lower_bound_m(&s.pool, &s.s0, &BigUint::from(x), 1, Rational::from(1)).unwrap();
    assert_eq!(m.value, census.w_total);
    assert_eq!(partial_sum(&s.pool, integer_root(x, 4)).unwrap(), census.w_total);
    // all of W_T, not just the members below X
    let mut checked = 0;
    for t in s.pool.primes.iter().take_while(|&&q| q <= 700) {
        let w = selstab_core::selmer::enumerate_w_t(&s.spec_s0, &[*t].into(), 64).unwrap();
        for f in w {
            let field = f.field(5).unwrap();
            let cert = certify_selmer_vanishing(&s.curve, 5, &field, true, &src).unwrap();
            assert!(cert.is_certified(), "{cert:?}");
            checked += 1;
        }
    }
    assert!(checked >= 4);
}

#[test]
fn census_members_respect_exact_discriminant() {
    let s = setup(2000);
    let x: u128 = 10u128.pow(14);
    let census = census_n1(&s.pool, &s.spec_s0, x, 1 << 16).unwrap();
    for f in &census.members {
        let disc = f.field(5).unwrap().discriminant_abs();
        assert!(disc <= BigUint::from(x));
    }
    assert!(census.count() <= census.w_total);
    assert_eq!(census.field_count(5) * 4, census.count() + 3);
}

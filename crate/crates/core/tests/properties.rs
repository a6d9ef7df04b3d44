use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use mwsieve::arith::{is_prime, primes_below, squarefree_fields_below};
use mwsieve::sieve::Limits;
use mwsieve::{
    builtin_model, legendre_symbol, squarefree_part, CurveModelData, ResidueSet, SieveConfig,
    SieveContext, SparsePolynomial, Verdict,
};

fn odd_primes() -> impl Strategy<Value = u64> {
    prop::sample::select(
        primes_below(1000)
            .into_iter()
            .filter(|&p| p > 2)
            .collect::<Vec<_>>(),
    )
}

fn brute_symbol(a: i64, ell: u64) -> i8 {
    let r = a.rem_euclid(ell as i64) as u64;
    if r == 0 {
        0
    } else if (1..ell).any(|x| x * x % ell == r) {
        1
    } else {
        -1
    }
}

#[test]
fn legendre_agrees_with_squaring_below_100() {
    for ell in primes_below(100).into_iter().filter(|&p| p > 2) {
        let residues = (1..ell as i64)
            .filter(|&a| legendre_symbol(a, ell).unwrap() == 1)
            .count();
        assert_eq!(residues as u64, (ell - 1) / 2);
        for a in -(2 * ell as i64)..(2 * ell as i64) {
            assert_eq!(
                legendre_symbol(a, ell).unwrap(),
                brute_symbol(a, ell),
                "({a}/{ell})"
            );
        }
    }
}

#[test]
fn legendre_rejects_non_primes() {
    for n in [0u64, 1, 2, 9, 15, 91] {
        assert!(legendre_symbol(3, n).is_err());
    }
}

proptest! {
    #[test]
    fn legendre_is_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000, ell in odd_primes()) {
        let ab = legendre_symbol(a * b, ell).unwrap();
        prop_assert_eq!(ab, legendre_symbol(a, ell).unwrap() * legendre_symbol(b, ell).unwrap());
    }

    #[test]
    fn squarefree_part_is_idempotent(n in (-(1i64 << 40)..(1i64 << 40)).prop_filter("nonzero", |&n| n != 0)) {
        let s = squarefree_part(n).unwrap();
        prop_assert_eq!(squarefree_part(s).unwrap(), s);
        prop_assert_eq!(s.signum(), n.signum());
        prop_assert_eq!(n % s, 0);
        let k2 = n / s;
        let k = (k2 as f64).sqrt().round() as i64;
        prop_assert_eq!(k * k, k2);
    }

    #[test]
    fn squarefree_part_ignores_square_factors(d in prop::sample::select(squarefree_fields_below(1000)), k in 1i64..1000) {
        prop_assert_eq!(squarefree_part(d * k * k).unwrap(), d);
    }
}

fn residue_constraint() -> impl Strategy<Value = (u64, Vec<u64>)> {
    (1u64..60)
        .prop_flat_map(|g| {
            (
                Just(g),
                prop::collection::btree_set(0..g, 0..g as usize + 1),
            )
        })
        .prop_map(|(g, s)| (g, s.into_iter().collect()))
}

fn intersect_all(constraints: &[(u64, Vec<u64>)]) -> ResidueSet {
    constraints.iter().fold(ResidueSet::full(), |acc, (g, s)| {
        acc.intersect(*g, s, &Limits::default()).unwrap()
    })
}

proptest! {
    #[test]
    fn intersect_matches_definition(a in residue_constraint(), b in residue_constraint()) {
        let got = intersect_all(&[a.clone(), b.clone()]);
        let l = num_integer::lcm(a.0, b.0);
        let want: Vec<u64> = (0..l)
            .filter(|r| a.1.contains(&(r % a.0)) && b.1.contains(&(r % b.0)))
            .collect();
        prop_assert_eq!(got.modulus(), l);
        prop_assert_eq!(got.residues(), want.as_slice());
    }

    #[test]
    fn intersect_order_does_not_matter(cs in prop::collection::vec(residue_constraint(), 1..5), seed in any::<u64>()) {
        let mut shuffled = cs.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(i as u64 + 7) % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        let x = intersect_all(&cs);
        let y = intersect_all(&shuffled);
        prop_assert_eq!(x.modulus(), y.modulus());
        prop_assert_eq!(x.residues(), y.residues());
        if n >= 2 {
            let ab_c = intersect_all(&cs);
            let bc: ResidueSet = intersect_all(&cs[1..]);
            let a_bc = ResidueSet::new(cs[0].0, cs[0].1.clone())
                .unwrap()
                .intersect(bc.modulus(), bc.residues(), &Limits::default())
                .unwrap();
            prop_assert_eq!(ab_c.residues(), a_bc.residues());
        }
    }
}

fn polynomial(nvars: usize) -> impl Strategy<Value = SparsePolynomial> {
    let coeff = prop_oneof![
        (-50i64..50).prop_map(BigInt::from),
        any::<i128>().prop_map(BigInt::from),
    ];
    prop::collection::vec((coeff, prop::collection::vec(0u32..3, nvars)), 1..6)
        .prop_map(move |terms| SparsePolynomial::new(nvars, terms).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_json_round_trips(q in polynomial(3), extra in polynomial(3), big in any::<i128>()) {
        let mut m: CurveModelData = builtin_model(53).unwrap().unwrap();
        m.q_poly = q;
        m.c_equations.push(extra);
        m.expected_d = Some(vec![-3, 5]);
        m.e_coeffs[4] = BigInt::from(big);
        let text = m.to_json();
        let back = CurveModelData::from_json(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.content_hash(), m.content_hash());
    }
}

fn x53() -> CurveModelData {
    builtin_model(53).unwrap().unwrap()
}

fn small_fields() -> Vec<i64> {
    squarefree_fields_below(60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sieve_is_deterministic(d in prop::sample::select(small_fields())) {
        let m = x53();
        let a = SieveContext::new(&m, SieveConfig::default()).unwrap().run(d).unwrap();
        let ctx = SieveContext::new(&m, SieveConfig::default()).unwrap();
        let b = ctx.run(d).unwrap();
        let c = ctx.run(d).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&b, &c);
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }

    /// Dropping primes from the tail can only let more classes through.
    #[test]
    fn fewer_primes_never_exclude_more(d in prop::sample::select(small_fields()), keep in 1usize..40) {
        let m = x53();
        let ctx = SieveContext::new(&m, SieveConfig::default()).unwrap();
        let primes = ctx.choose_primes(d).unwrap();
        let keep = keep.min(primes.len());
        let full = ctx.run_with_primes(d, &primes).unwrap();
        let part = ctx.run_with_primes(d, &primes[..keep]).unwrap();
        match (&full, &part) {
            (_, Verdict::Contradiction { .. }) => prop_assert!(full.is_contradiction()),
            (Verdict::Survivors { residues: f, .. }, Verdict::Survivors { residues: p, .. }) => {
                prop_assert_eq!(f.modulus() % p.modulus(), 0);
                for &r in f.residues() {
                    prop_assert!(p.contains(r as i64));
                }
            }
            (Verdict::Contradiction { .. }, Verdict::Survivors { .. }) => {}
        }
    }
}

#[test]
fn prime_order_does_not_change_survivors() {
    let m = x53();
    let ctx = SieveContext::new(&m, SieveConfig::default()).unwrap();
    let primes: Vec<u64> = ctx
        .choose_primes(-11)
        .unwrap()
        .into_iter()
        .take(14)
        .collect();
    let forward = ctx.run_with_primes(-11, &primes).unwrap();
    let mut rev = primes.clone();
    rev.reverse();
    let backward = ctx.run_with_primes(-11, &rev).unwrap();
    let (Verdict::Survivors { residues: a, .. }, Verdict::Survivors { residues: b, .. }) =
        (&forward, &backward)
    else {
        panic!("-11 must survive");
    };
    assert_eq!(a, b);
    assert!(a.contains(1));
}

#[test]
fn known_points_always_survive() {
    let m = x53();
    let ctx = SieveContext::new(&m, SieveConfig::default()).unwrap();
    for d in [-43, -11, -7, -1] {
        let v = ctx.run(d).unwrap();
        assert!(!v.is_contradiction(), "d={d}");
    }
    // d and d k^2 name the same field.
    assert_eq!(ctx.run(-44).unwrap(), ctx.run(-11).unwrap());
    let used: BTreeSet<u64> = ctx.run(-11).unwrap().primes_used().into_iter().collect();
    assert!(used.iter().all(|&p| is_prime(p)));
}

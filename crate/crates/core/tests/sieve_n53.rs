use mwsieve::arith::{primes_below, squarefree_fields_below};
use mwsieve::quadpoint::fingerprint;
use mwsieve::{
    builtin_model, compute_dn, compute_local_data, fiber_square_class, identify_field,
    legendre_symbol, Coset, CurveModelData, Error, SieveConfig, SieveContext, SquareClass, Verdict,
};

fn x53() -> CurveModelData {
    builtin_model(53).unwrap().unwrap()
}

fn ctx_with(m: &CurveModelData, config: SieveConfig) -> SieveContext<'_> {
    SieveContext::new(m, config).unwrap()
}

#[test]
fn local_tables_at_small_primes() {
    let m = x53();
    let table = |ell| compute_local_data(&m, ell).unwrap();
    assert_eq!(table(5).order, 6);
    assert_eq!(table(7).order, 12);
    assert_eq!(table(11).order, 12);
    for ell in [5, 7, 11] {
        assert!(table(ell).torsion_cases.is_none());
    }
}

#[test]
fn minus_47_trace() {
    let m = x53();
    let config = SieveConfig {
        primes: Some(vec![5, 7, 11]),
        ..SieveConfig::default()
    };
    let v = ctx_with(&m, config).run(-47).unwrap();
    let lines: Vec<String> = v.trace().iter().map(|s| s.to_string()).collect();
    assert_eq!(
        lines,
        [
            "ℓ=5 inert: m ≡ 3,5 (mod 6); combined: m ≡ 3,5 (mod 6)",
            "ℓ=7 split: m ≡ 0,3,4,7,11 (mod 12); combined: m ≡ 3,11 (mod 12)",
            "ℓ=11 inert: m ≡ 1,2,5,7,10 (mod 12); combined: none (mod 12)",
        ]
    );
    assert!(v.is_contradiction());
}

#[test]
fn three_dies_at_three() {
    let m = x53();
    let v = ctx_with(&m, SieveConfig::default()).run(3).unwrap();
    assert!(v.is_contradiction());
    assert_eq!(v.primes_used(), vec![3]);
}

#[test]
fn minus_11_survivors() {
    let m = x53();
    let v = ctx_with(&m, SieveConfig::default()).run(-11).unwrap();
    let Verdict::Survivors { residues, .. } = v else {
        panic!("-11 has a quadratic point");
    };
    assert_eq!(residues.modulus(), 63_504_000);
    assert!(residues.contains(1));
    let small: Vec<u64> = residues
        .residues()
        .iter()
        .copied()
        .filter(|&r| r < 1_905_121)
        .collect();
    assert_eq!(small, vec![1]);
    assert!(residues.contains(1_905_121));
}

#[test]
fn field_of_t_equal_one() {
    let m = x53();
    let ctx = ctx_with(&m, SieveConfig::default());
    let cands = squarefree_fields_below(100);
    assert_eq!(
        identify_field(&ctx, 1, Coset::Base, &cands).unwrap(),
        vec![-11]
    );
}

#[test]
fn identification_shrinks_with_budget() {
    let m = x53();
    let cands = squarefree_fields_below(100);
    for t in [1, 2, 3, -3] {
        let mut prev: Option<Vec<i64>> = None;
        for budget in [12, 20, 30, 40, 60] {
            let ctx = ctx_with(
                &m,
                SieveConfig {
                    prime_budget: budget,
                    ..SieveConfig::default()
                },
            );
            let got = identify_field(&ctx, t, Coset::Base, &cands).unwrap();
            if let Some(p) = &prev {
                assert!(got.iter().all(|d| p.contains(d)), "t={t} budget={budget}");
            }
            prev = Some(got);
        }
    }
}

#[test]
fn t_one_fibers_follow_minus_11() {
    let m = x53();
    let ctx = ctx_with(&m, SieveConfig::default());
    let mut informative = 0;
    for ell in primes_below(200)
        .into_iter()
        .filter(|&p| !m.is_bad_prime(p))
    {
        let c = fiber_square_class(&ctx, ell, 1, Coset::Base).unwrap();
        let want = match legendre_symbol(-11, ell).unwrap() {
            1 => SquareClass::Square,
            -1 => SquareClass::Nonsquare,
            _ => continue,
        };
        if c == SquareClass::Zero {
            continue;
        }
        informative += 1;
        assert_eq!(c, want, "ell={ell}");
    }
    assert!(informative > 30);
    let fp = fingerprint(&ctx, 1, Coset::Base, 40).unwrap();
    assert_eq!(fp.observations.len(), 40);
    assert_eq!(fp.mismatches(-11), 0);
}

#[test]
fn torsion_coset_needs_torsion() {
    let m = x53();
    let ctx = ctx_with(&m, SieveConfig::default());
    let err = identify_field(&ctx, 0, Coset::Torsion, &[-11]).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)), "{err:?}");
    assert!(mwsieve::run_sieve_with_torsion(&m, -11, &SieveConfig::default()).is_err());
}

#[test]
fn fields_for_level_53() {
    let m = x53();
    let ctx = ctx_with(&m, SieveConfig::default());
    assert_eq!(
        compute_dn(&ctx, 100, 5).unwrap(),
        m.expected_d.clone().unwrap()
    );
}

//! Fiber tables and point enumeration checked against the direct solve in
//! `common/direct.rs`.

use std::collections::BTreeSet;

use mwsieve::arith::primes_below;
use mwsieve::model::PsiImage;
use mwsieve::{
    builtin_model, compute_local_data, enumerate_c_points, load_model, CurveModelData,
    ProjectivePoint, SieveConfig, SieveContext, SparsePolynomial,
};

#[path = "common/direct.rs"]
mod direct;
use direct::{direct_cases, scan_c, Direct};

const INVERSE_MODEL: &str = include_str!("data/x0_53_inverse.json");

fn x53() -> CurveModelData {
    builtin_model(53).unwrap().unwrap()
}

fn odd_good_primes(bound: u64) -> Vec<u64> {
    primes_below(bound)
        .into_iter()
        .filter(|&p| p != 2 && p != 53)
        .collect()
}

#[test]
fn enumeration_matches_full_scan() {
    let m = x53();
    for ell in odd_good_primes(32) {
        let got: Vec<Vec<u64>> = enumerate_c_points(&m, ell)
            .unwrap()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect();
        let unique: BTreeSet<&Vec<u64>> = got.iter().collect();
        assert_eq!(unique.len(), got.len(), "duplicates at {ell}");
        let want: BTreeSet<Vec<u64>> = scan_c(&m, ell).into_iter().map(|p| p.to_vec()).collect();
        assert_eq!(
            unique.into_iter().cloned().collect::<BTreeSet<_>>(),
            want,
            "ell={ell}"
        );
    }
}

#[test]
fn plane_cubic_has_as_many_points_as_e() {
    let m = x53();
    for ell in odd_good_primes(100) {
        let reduced = m.reduce(ell).unwrap();
        assert_eq!(
            reduced.enumerate_c_points().len() as u64,
            reduced.curve().count_points()
        );
    }
}

#[test]
fn psi_images_stay_on_e() {
    let m = x53();
    for ell in odd_good_primes(100) {
        let reduced = m.reduce(ell).unwrap();
        let mut seen = BTreeSet::new();
        for c in reduced.enumerate_c_points() {
            match reduced.psi_image(&c).unwrap() {
                PsiImage::Point(e) => {
                    assert!(reduced.curve().contains(&e));
                    seen.insert(e);
                }
                PsiImage::Unresolved => panic!("unresolved at {ell}: {c}"),
            }
        }
        assert_eq!(
            seen.len() as u64,
            reduced.curve().count_points(),
            "psi not bijective at {ell}"
        );
    }
}

#[test]
fn base_point_images_match_chord_construction() {
    let m = x53();
    for ell in odd_good_primes(60) {
        let mut direct = Direct::new(&m, ell);
        let base: Vec<usize> = (0..direct.images.len())
            .filter(|&i| direct.images[i].is_none())
            .collect();
        assert!(!base.is_empty());
        direct.resolve_base_points();
        for i in base {
            let p =
                ProjectivePoint::normalize(direct.reduced.field(), &direct.c_points[i]).unwrap();
            let PsiImage::Point(img) = direct.reduced.psi_image(&p).unwrap() else {
                panic!("unresolved");
            };
            assert_eq!(Some(img), direct.images[i], "ell={ell} base point {p}");
        }
    }
}

#[test]
fn local_data_matches_direct_solve() {
    let m = x53();
    for ell in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        let want = direct_cases(&m, ell);
        let got = compute_local_data(&m, ell).unwrap();
        assert_eq!(got.order as usize, want.len());
        assert_eq!(got.cases, want, "ell={ell}");
    }
}

#[test]
fn inverse_map_path_agrees_with_enumeration() {
    let plain = x53();
    let inv = load_model(INVERSE_MODEL).unwrap();
    assert!(inv.inverse_map.is_some());
    for ell in odd_good_primes(200) {
        let a = compute_local_data(&plain, ell).unwrap();
        let b = compute_local_data(&inv, ell).unwrap();
        assert_eq!(a, b, "ell={ell}");
    }
    let v1 = SieveContext::new(&plain, SieveConfig::default())
        .unwrap()
        .run(-11)
        .unwrap();
    let v2 = SieveContext::new(&inv, SieveConfig::default())
        .unwrap()
        .run(-11)
        .unwrap();
    assert_eq!(v1, v2);
}

#[test]
fn flipped_sign_in_c_fails_validation() {
    let text = mwsieve::model::builtin_model_text(53).unwrap();
    let mut m = x53();
    let mut terms = m.c_equations[0].terms().to_vec();
    terms[0].0 = -terms[0].0.clone();
    m.c_equations[0] = SparsePolynomial::new(3, terms).unwrap();
    let report = mwsieve::validate_model(&m, &[3, 5, 7, 11, 13]);
    assert!(!report.is_ok());
    assert!(load_model(&m.to_json()).is_err());
    assert!(load_model(text).is_ok());
}

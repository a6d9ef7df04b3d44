//! Direct solve for fiber tables: scan all of `P^2(F_ell)`, evaluate the map,
//! and find images at base points from the group law instead of local
//! expansions.
//!
//! On a plane cubic isomorphic to `E`, the images of the three points on any
//! line sum to one fixed point `S`. A base point `b` on a line meeting `C` in
//! `b, a, a'` therefore maps to `S - psi(a) - psi(a')`.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mwsieve::model::ReducedModel;
use mwsieve::{CurveModelData, CurvePoint, FiberCase, SparsePolynomial};

pub fn projective_plane(ell: u64) -> Vec<[u64; 3]> {
    let mut out = vec![[0, 0, 1]];
    out.extend((0..ell).map(|z| [0, 1, z]));
    for y in 0..ell {
        for z in 0..ell {
            out.push([1, y, z]);
        }
    }
    out
}

pub fn eval(poly: &SparsePolynomial, p: &[u64; 3], ell: u64) -> u64 {
    poly.evaluate_mod(p, ell).unwrap()
}

pub fn scan_c(model: &CurveModelData, ell: u64) -> Vec<[u64; 3]> {
    projective_plane(ell)
        .into_iter()
        .filter(|p| model.c_equations.iter().all(|e| eval(e, p, ell) == 0))
        .collect()
}

pub fn brute_is_square(a: u64, ell: u64) -> bool {
    (1..ell).any(|x| x * x % ell == a)
}

pub struct Direct {
    pub reduced: ReducedModel,
    pub c_points: Vec<[u64; 3]>,
    pub images: Vec<Option<CurvePoint>>,
}

impl Direct {
    pub fn new(model: &CurveModelData, ell: u64) -> Self {
        let reduced = model.reduce(ell).unwrap();
        let c_points = scan_c(model, ell);
        let images = c_points
            .iter()
            .map(|p| {
                let v: Vec<u64> = model.psi.iter().map(|f| eval(f, p, ell)).collect();
                if v.iter().all(|&c| c == 0) {
                    None
                } else {
                    Some(
                        reduced
                            .curve()
                            .point_from_projective([v[0], v[1], v[2]])
                            .unwrap(),
                    )
                }
            })
            .collect();
        Direct {
            reduced,
            c_points,
            images,
        }
    }

    pub fn lines(&self) -> Vec<Vec<usize>> {
        let ell = self.reduced.field().modulus();
        projective_plane(ell)
            .into_iter()
            .map(|l| {
                (0..self.c_points.len())
                    .filter(|&i| {
                        let p = self.c_points[i];
                        (l[0] * p[0] + l[1] * p[1] + l[2] * p[2]).is_multiple_of(ell)
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|on| on.len() == 3)
            .collect()
    }

    /// Fills in images at base points by the chord construction.
    pub fn resolve_base_points(&mut self) {
        let curve = self.reduced.curve().clone();
        let lines = self.lines();
        let sums: BTreeSet<CurvePoint> = lines
            .iter()
            .filter(|l| l.iter().all(|&i| self.images[i].is_some()))
            .map(|l| {
                l.iter().fold(CurvePoint::Infinity, |acc, &i| {
                    curve.add(&acc, &self.images[i].unwrap()).unwrap()
                })
            })
            .collect();
        assert_eq!(sums.len(), 1, "chord sums disagree: {sums:?}");
        let s = *sums.first().unwrap();
        for b in 0..self.c_points.len() {
            if self.images[b].is_some() {
                continue;
            }
            let line = lines
                .iter()
                .find(|l| {
                    l.contains(&b)
                        && l.iter()
                            .filter(|&&i| i != b)
                            .all(|&i| self.images[i].is_some())
                })
                .expect("line through base point");
            let mut img = s;
            for &i in line.iter().filter(|&&i| i != b) {
                img = curve
                    .add(&img, &curve.neg(&self.images[i].unwrap()))
                    .unwrap();
            }
            self.images[b] = Some(img);
        }
    }

    pub fn cases(&self, model: &CurveModelData) -> Vec<FiberCase> {
        let ell = self.reduced.field().modulus();
        let curve = self.reduced.curve();
        let r = curve.reduce_point(&model.generator).unwrap();
        let mut multiples = vec![CurvePoint::Infinity];
        loop {
            let next = curve.add(multiples.last().unwrap(), &r).unwrap();
            if next == CurvePoint::Infinity {
                break;
            }
            multiples.push(next);
        }
        multiples
            .iter()
            .map(|target| {
                let over: Vec<usize> = (0..self.c_points.len())
                    .filter(|&i| self.images[i] == Some(*target))
                    .collect();
                match over.as_slice() {
                    [i] => {
                        let q = eval(&model.q_poly, &self.c_points[*i], ell);
                        if q == 0 {
                            FiberCase::Single
                        } else if brute_is_square(q, ell) {
                            FiberCase::PairOverBase
                        } else {
                            FiberCase::ConjugatePair
                        }
                    }
                    _ => FiberCase::Unknown,
                }
            })
            .collect()
    }
}

/// Fiber table for the base coset, computed from scratch.
pub fn direct_cases(model: &CurveModelData, ell: u64) -> Vec<FiberCase> {
    let mut d = Direct::new(model, ell);
    d.resolve_base_points();
    d.cases(model)
}

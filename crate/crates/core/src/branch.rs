//! Evaluation of a rational map at points where its defining polynomials
//! all vanish.
//!
//! At a smooth point of a curve the map extends uniquely. We lift a local
//! branch of the curve through the point as a power series in a coordinate
//! that is a local parameter there, evaluate the map along the branch, and
//! read off the leading coefficients after removing the common power of `t`.

use crate::arith::Fp;
use crate::poly::{PowerSeries, ReducedPoly};

const PRECISIONS: [usize; 3] = [8, 16, 32];

/// Image of `point` under `map` restricted to the curve cut out by
/// `equations`, both given as homogeneous polynomials in the same projective
/// coordinates. Returns `None` when the point is singular on the curve or the
/// map vanishes to the maximum tried precision.
pub fn extend_map_at(
    field: &Fp,
    equations: &[ReducedPoly],
    map: &[ReducedPoly],
    point: &[u64],
) -> Option<Vec<u64>> {
    let chart = point.iter().position(|&c| c != 0)?;
    let scale = field.inv(point[chart])?;
    let point: Vec<u64> = point.iter().map(|&c| field.mul(c, scale)).collect();
    let point = point.as_slice();
    let n = point.len();
    let affine: Vec<usize> = (0..n).filter(|&v| v != chart).collect();
    let eqs: Vec<ReducedPoly> = equations.iter().map(|e| e.dehomogenize(chart)).collect();
    let comps: Vec<ReducedPoly> = map.iter().map(|m| m.dehomogenize(chart)).collect();

    let jac: Vec<Vec<u64>> = eqs
        .iter()
        .map(|e| {
            affine
                .iter()
                .map(|&v| e.derivative(v).eval(point))
                .collect()
        })
        .collect();
    let pivots = pivot_columns(field, jac.clone());
    if pivots.len() + 1 != affine.len() {
        return None;
    }
    let param = (0..affine.len()).find(|c| !pivots.contains(c))?;
    let dependent: Vec<usize> = pivots.iter().map(|&c| affine[c]).collect();
    let jac_dep: Vec<Vec<u64>> = jac
        .iter()
        .map(|row| pivots.iter().map(|&c| row[c]).collect())
        .collect();

    for prec in PRECISIONS {
        let mut branch: Vec<PowerSeries> = point
            .iter()
            .map(|&c| PowerSeries::constant(c, prec))
            .collect();
        branch[affine[param]].coeffs[1] = 1;
        let mut ok = true;
        for order in 1..prec {
            let residual: Vec<u64> = eqs
                .iter()
                .map(|e| field.neg(e.eval_series(&branch).coeffs[order]))
                .collect();
            match solve(field, &jac_dep, &residual) {
                Some(step) => {
                    for (&v, c) in dependent.iter().zip(step) {
                        branch[v].coeffs[order] = c;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok
            || eqs
                .iter()
                .any(|e| e.eval_series(&branch).valuation().is_some())
        {
            return None;
        }
        let values: Vec<PowerSeries> = comps.iter().map(|c| c.eval_series(&branch)).collect();
        if let Some(v) = values.iter().filter_map(PowerSeries::valuation).min() {
            return Some(values.iter().map(|s| s.coeffs[v]).collect());
        }
    }
    None
}

/// Pivot columns of the row echelon form of `m`.
#[allow(clippy::needless_range_loop)]
fn pivot_columns(field: &Fp, mut m: Vec<Vec<u64>>) -> Vec<usize> {
    let cols = m.first().map(Vec::len).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(sel) = (row..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, sel);
        let inv = field.inv(m[row][col]).expect("nonzero pivot");
        for c in 0..cols {
            m[row][c] = field.mul(m[row][c], inv);
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let factor = m[r][col];
                for c in 0..cols {
                    let sub = field.mul(factor, m[row][c]);
                    m[r][c] = field.sub(m[r][c], sub);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Solves `a x = b` for a full-column-rank `a`; `None` if inconsistent.
#[allow(clippy::needless_range_loop)]
fn solve(field: &Fp, a: &[Vec<u64>], b: &[u64]) -> Option<Vec<u64>> {
    let cols = a.first().map(Vec::len).unwrap_or(0);
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let mut row = 0;
    for col in 0..cols {
        let sel = (row..m.len()).find(|&r| m[r][col] != 0)?;
        m.swap(row, sel);
        let inv = field.inv(m[row][col]).expect("nonzero pivot");
        for c in 0..=cols {
            m[row][c] = field.mul(m[row][c], inv);
        }
        for r in 0..m.len() {
            if r != row && m[r][col] != 0 {
                let factor = m[r][col];
                for c in 0..=cols {
                    let sub = field.mul(factor, m[row][c]);
                    m[r][c] = field.sub(m[r][c], sub);
                }
            }
        }
        row += 1;
    }
    if m[row..].iter().any(|r| r[cols] != 0) {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::SparsePolynomial;

    #[test]
    fn conic_projection_from_a_point_on_it() {
        // Projecting the conic x^2 + y^2 = z^2 from (1 : 0 : 1) is given by
        // (x : y : z) -> (y : z - x), undefined at the centre. The limit along
        // the conic is the image of the tangent line x = z, which is (1 : 0).
        let f = Fp::new(13).unwrap();
        let conic =
            SparsePolynomial::from_i64(3, &[(1, &[2, 0, 0]), (1, &[0, 2, 0]), (-1, &[0, 0, 2])])
                .unwrap()
                .reduce(&f);
        let map = [
            SparsePolynomial::from_i64(3, &[(1, &[0, 1, 0])])
                .unwrap()
                .reduce(&f),
            SparsePolynomial::from_i64(3, &[(1, &[0, 0, 1]), (-1, &[1, 0, 0])])
                .unwrap()
                .reduce(&f),
        ];
        let img = extend_map_at(&f, &[conic], &map, &[1, 0, 1]).unwrap();
        assert_ne!(img[0], 0);
        assert_eq!(img[1], 0);
    }

    #[test]
    fn singular_point_is_rejected() {
        // Nodal cubic y^2 z = x^2 (x + z) is singular at (0 : 0 : 1).
        let f = Fp::new(11).unwrap();
        let cubic =
            SparsePolynomial::from_i64(3, &[(1, &[0, 2, 1]), (-1, &[3, 0, 0]), (-1, &[2, 0, 1])])
                .unwrap()
                .reduce(&f);
        let map = [SparsePolynomial::from_i64(3, &[(1, &[1, 0, 0])])
            .unwrap()
            .reduce(&f)];
        assert!(extend_map_at(&f, &[cubic], &map, &[0, 0, 1]).is_none());
    }
}

//! Elliptic curves in long Weierstrass form over prime fields.
//!
//! The curve is `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`. Coefficients
//! are kept in long form because the quotient curves handled here have
//! `a1, a3 != 0` and the sieve never needs a short model.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, symbol_in, Fp};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CurvePoint {
    Infinity,
    Affine(u64, u64),
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => f.write_str("O"),
            CurvePoint::Affine(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassCurve {
    field: Fp,
    a1: u64,
    a2: u64,
    a3: u64,
    a4: u64,
    a6: u64,
}

/// Discriminant of `[a1, a2, a3, a4, a6]` over the integers.
pub fn discriminant(a: &[BigInt; 5]) -> BigInt {
    let [a1, a2, a3, a4, a6] = a;
    let b2: BigInt = a1 * a1 + 4 * a2;
    let b4: BigInt = 2 * a4 + a1 * a3;
    let b6: BigInt = a3 * a3 + 4 * a6;
    let b8: BigInt = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    let neg: BigInt = -(&b2 * &b2 * &b8);
    neg - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
}

/// Whether the projective integer triple lies on the curve over Q.
pub fn on_curve_over_q(a: &[BigInt; 5], p: &[BigInt; 3]) -> bool {
    let [a1, a2, a3, a4, a6] = a;
    let [x, y, z] = p;
    if x.is_zero() && y.is_zero() && z.is_zero() {
        return false;
    }
    let lhs = y * y * z + a1 * x * y * z + a3 * y * z * z;
    let rhs = x * x * x + a2 * x * x * z + a4 * x * z * z + a6 * z * z * z;
    lhs == rhs
}

impl WeierstrassCurve {
    /// Reduces integer coefficients modulo `ell`, rejecting singular reductions.
    pub fn new(ell: u64, coeffs: &[BigInt; 5]) -> Result<Self> {
        let field = Fp::new(ell)?;
        if field.from_bigint(&discriminant(coeffs)) == 0 {
            return invalid(format!("curve has bad reduction at {ell}"));
        }
        let [a1, a2, a3, a4, a6] = coeffs.clone().map(|c| field.from_bigint(&c));
        Ok(WeierstrassCurve {
            field,
            a1,
            a2,
            a3,
            a4,
            a6,
        })
    }

    pub fn from_i64(ell: u64, coeffs: [i64; 5]) -> Result<Self> {
        Self::new(ell, &coeffs.map(BigInt::from))
    }

    pub fn field(&self) -> &Fp {
        &self.field
    }

    pub fn ell(&self) -> u64 {
        self.field.modulus()
    }

    fn lhs_minus_rhs(&self, x: u64, y: u64, z: u64) -> u64 {
        let f = &self.field;
        let z2 = f.mul(z, z);
        let lhs = f.mul(
            y,
            f.add(
                f.add(f.mul(y, z), f.mul(self.a1, f.mul(x, z))),
                f.mul(self.a3, z2),
            ),
        );
        let x2 = f.mul(x, x);
        let rhs = f.add(
            f.add(f.mul(x2, x), f.mul(self.a2, f.mul(x2, z))),
            f.add(f.mul(self.a4, f.mul(x, z2)), f.mul(self.a6, f.mul(z2, z))),
        );
        f.sub(lhs, rhs)
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match *p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine(x, y) => {
                x < self.ell() && y < self.ell() && self.lhs_minus_rhs(x, y, 1) == 0
            }
        }
    }

    /// Interprets a projective triple of field elements as a curve point.
    pub fn point_from_projective(&self, coords: [u64; 3]) -> Result<CurvePoint> {
        let f = &self.field;
        let [x, y, z] = coords.map(|c| c % f.modulus());
        if x == 0 && y == 0 && z == 0 {
            return invalid("projective triple is identically zero");
        }
        if self.lhs_minus_rhs(x, y, z) != 0 {
            return Err(Error::Validation {
                check: "point off curve".into(),
                prime: Some(self.ell()),
            });
        }
        match f.inv(z) {
            None => Ok(CurvePoint::Infinity),
            Some(zi) => Ok(CurvePoint::Affine(f.mul(x, zi), f.mul(y, zi))),
        }
    }

    /// Reduces a projective integer point modulo `ell`.
    pub fn reduce_point(&self, coords: &[BigInt; 3]) -> Result<CurvePoint> {
        let reduced = coords.clone().map(|c| self.field.from_bigint(&c));
        if reduced.iter().all(|&c| c == 0) {
            return invalid(format!(
                "all coordinates vanish modulo {}; input is not reduced",
                self.ell()
            ));
        }
        self.point_from_projective(reduced).map_err(|e| match e {
            Error::Validation { prime, .. } => Error::Validation {
                check: "reduced point off curve (model/prime mismatch)".into(),
                prime,
            },
            other => other,
        })
    }

    fn check(&self, p: &CurvePoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            invalid(format!("point {p} is not on the curve mod {}", self.ell()))
        }
    }

    pub fn neg(&self, p: &CurvePoint) -> CurvePoint {
        let f = &self.field;
        match *p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine(x, y) => {
                CurvePoint::Affine(x, f.sub(f.neg(y), f.add(f.mul(self.a1, x), self.a3)))
            }
        }
    }

    /// Group law; both inputs are assumed to lie on the curve.
    pub(crate) fn add_unchecked(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let f = &self.field;
        let (x1, y1, x2, y2) = match (*p, *q) {
            (CurvePoint::Infinity, _) => return *q,
            (_, CurvePoint::Infinity) => return *p,
            (CurvePoint::Affine(x1, y1), CurvePoint::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            let denom = f.add(f.add(f.add(y1, y1), f.mul(self.a1, x1)), self.a3);
            if y1 != y2 || denom == 0 {
                return CurvePoint::Infinity;
            }
            let x1sq = f.mul(x1, x1);
            let num = f.sub(
                f.add(
                    f.add(f.mul(3, x1sq), f.mul(f.add(self.a2, self.a2), x1)),
                    self.a4,
                ),
                f.mul(self.a1, y1),
            );
            f.mul(num, f.inv(denom).expect("nonzero"))
        } else {
            f.mul(f.sub(y2, y1), f.inv(f.sub(x2, x1)).expect("nonzero"))
        };
        let nu = f.sub(y1, f.mul(lambda, x1));
        let x3 = f.sub(
            f.sub(
                f.sub(
                    f.add(f.mul(lambda, lambda), f.mul(self.a1, lambda)),
                    self.a2,
                ),
                x1,
            ),
            x2,
        );
        let y3 = f.sub(f.sub(f.neg(f.mul(f.add(lambda, self.a1), x3)), nu), self.a3);
        CurvePoint::Affine(x3, y3)
    }

    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    pub(crate) fn mul_unchecked(&self, k: i64, p: &CurvePoint) -> CurvePoint {
        let mut base = if k < 0 { self.neg(p) } else { *p };
        let mut n = k.unsigned_abs();
        let mut acc = CurvePoint::Infinity;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            base = self.add_unchecked(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn scalar_mul(&self, k: i64, p: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        Ok(self.mul_unchecked(k, p))
    }

    /// `#E(F_ell)` including the point at infinity, by a linear scan over x.
    pub fn count_points(&self) -> u64 {
        let f = &self.field;
        let mut total = 1u64;
        for x in 0..f.modulus() {
            // y^2 + b y - c = 0 has 1 + (disc / ell) solutions.
            let b = f.add(f.mul(self.a1, x), self.a3);
            let c = f.add(
                f.mul(f.add(f.mul(f.add(x, self.a2), x), self.a4), x),
                self.a6,
            );
            let disc = f.add(f.mul(b, b), f.mul(4, c));
            total += (1 + symbol_in(f, disc) as i64) as u64;
        }
        total
    }

    /// All points of `E(F_ell)`, infinity first.
    pub fn points(&self) -> Vec<CurvePoint> {
        let mut out = vec![CurvePoint::Infinity];
        for x in 0..self.ell() {
            for y in 0..self.ell() {
                if self.lhs_minus_rhs(x, y, 1) == 0 {
                    out.push(CurvePoint::Affine(x, y));
                }
            }
        }
        out
    }

    /// Exact order of `p`, dividing out primes from the group order.
    pub fn point_order(&self, p: &CurvePoint) -> Result<u64> {
        self.check(p)?;
        Ok(self.order_with_group_order(p, self.count_points()))
    }

    pub(crate) fn order_with_group_order(&self, p: &CurvePoint, group_order: u64) -> u64 {
        let mut order = group_order;
        for (q, _) in factorize(group_order) {
            while order.is_multiple_of(q)
                && self.mul_unchecked((order / q) as i64, p) == CurvePoint::Infinity
            {
                order /= q;
            }
        }
        order
    }
}

/// Reduces a projective integer triple to its primitive representative.
pub fn primitive_triple(p: &[BigInt; 3]) -> [BigInt; 3] {
    let g = p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return p.clone();
    }
    p.clone().map(|c| c / &g)
}

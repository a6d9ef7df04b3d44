//! Integer and modular arithmetic: prime fields, quadratic symbols,
//! splitting of odd primes in quadratic fields, squarefree kernels.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Arithmetic in the prime field of order `p`, with elements stored as
/// canonical representatives in `[0, p)`.
///
/// Moduli are restricted to `p < 2^32` so that products fit in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 {
            return invalid(format!("modulus {p} exceeds 32 bits"));
        }
        if p == 2 || !is_prime(p) {
            return invalid(format!("{p} is not an odd prime"));
        }
        Ok(Fp { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        mod_pow(a, e, self.p)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a.is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    pub fn from_bigint(&self, a: &BigInt) -> u64 {
        a.mod_floor(&BigInt::from(self.p))
            .to_u64()
            .expect("reduced value fits in u64")
    }

    /// Euler's criterion: 1 for nonzero squares, p - 1 for nonsquares, 0 for 0.
    pub fn euler(&self, a: u64) -> u64 {
        self.pow(a, (self.p - 1) / 2)
    }

    pub fn is_square(&self, a: u64) -> bool {
        a == 0 || self.euler(a) == 1
    }
}

/// `a^e mod m` for `m < 2^63`.
pub fn mod_pow(a: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut base = (a % m) as u128;
    let mut acc: u128 = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes strictly below `bound`, ascending.
pub fn primes_below(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n];
    let mut out = Vec::new();
    for i in 2..n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Prime factorization by trial division, as ascending `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// True when every prime factor of `n` is at most `bound`.
pub fn is_smooth(n: u64, bound: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(p, _)| p <= bound)
}

/// The quadratic residue symbol `(a / ell)` for an odd prime `ell`.
pub fn legendre_symbol(a: i64, ell: u64) -> Result<i8> {
    let field = Fp::new(ell)?;
    Ok(symbol_in(&field, field.from_i64(a)))
}

pub(crate) fn symbol_in(field: &Fp, a: u64) -> i8 {
    match field.euler(a) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// How an odd prime decomposes in the quadratic field `Q(sqrt(d))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplittingType::Split => "split",
            SplittingType::Inert => "inert",
            SplittingType::Ramified => "ramified",
        })
    }
}

pub fn is_squarefree(n: i64) -> bool {
    n != 0 && factorize(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

pub fn splitting_type(d: i64, ell: u64) -> Result<SplittingType> {
    check_field_discriminant(d)?;
    Ok(match legendre_symbol(d, ell)? {
        0 => SplittingType::Ramified,
        1 => SplittingType::Split,
        _ => SplittingType::Inert,
    })
}

/// Rejects values of `d` that do not name a quadratic field in canonical form.
pub fn check_field_discriminant(d: i64) -> Result<()> {
    if d == 0 || d == 1 {
        return invalid(format!("d = {d} does not define a quadratic field"));
    }
    if !is_squarefree(d) {
        return invalid(format!("d = {d} is not squarefree"));
    }
    Ok(())
}

/// The squarefree integer `d` with `n = d * k^2` for some positive `k`.
pub fn squarefree_part(n: i64) -> Result<i64> {
    if n == 0 {
        return invalid("squarefree part of 0");
    }
    let kernel: u64 = factorize(n.unsigned_abs())
        .into_iter()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(p, _)| p)
        .product();
    Ok(n.signum() * kernel as i64)
}

/// Squarefree integers `d` with `|d| < bound`, excluding 0 and 1, ascending.
pub fn squarefree_fields_below(bound: i64) -> Vec<i64> {
    (-(bound - 1)..bound)
        .filter(|&d| d != 0 && d != 1 && is_squarefree(d))
        .collect()
}

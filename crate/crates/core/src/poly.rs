//! Sparse multivariate polynomials with integer coefficients, and their
//! reductions modulo a prime.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::Fp;
use crate::error::{invalid, Result};

/// Integer polynomial in `nvars` variables.
///
/// Terms are sorted by exponent vector in descending lexicographic order,
/// with no duplicate exponents and no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparsePolynomial {
    nvars: usize,
    terms: Vec<(BigInt, Vec<u32>)>,
}

impl SparsePolynomial {
    pub fn zero(nvars: usize) -> Self {
        SparsePolynomial {
            nvars,
            terms: Vec::new(),
        }
    }

    /// Builds a polynomial in canonical form, merging repeated monomials.
    pub fn new(nvars: usize, terms: Vec<(BigInt, Vec<u32>)>) -> Result<Self> {
        if let Some((_, e)) = terms.iter().find(|(_, e)| e.len() != nvars) {
            return invalid(format!(
                "exponent vector of length {} in a polynomial in {nvars} variables",
                e.len()
            ));
        }
        let mut terms = terms;
        terms.sort_by(|a, b| b.1.cmp(&a.1));
        let mut merged: Vec<(BigInt, Vec<u32>)> = Vec::with_capacity(terms.len());
        for (c, e) in terms {
            match merged.last_mut() {
                Some((acc, last)) if *last == e => *acc += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        Ok(SparsePolynomial {
            nvars,
            terms: merged,
        })
    }

    pub fn from_i64(nvars: usize, terms: &[(i64, &[u32])]) -> Result<Self> {
        Self::new(
            nvars,
            terms
                .iter()
                .map(|(c, e)| (BigInt::from(*c), e.to_vec()))
                .collect(),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(BigInt, Vec<u32>)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, e)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.iter().map(|(_, e)| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn negate(&self) -> Self {
        SparsePolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(c, e)| (-c, e.clone())).collect(),
        }
    }

    pub fn reduce(&self, field: &Fp) -> ReducedPoly {
        let terms = self
            .terms
            .iter()
            .map(|(c, e)| (field.from_bigint(c), e.clone()))
            .filter(|(c, _)| *c != 0)
            .collect();
        ReducedPoly {
            field: *field,
            nvars: self.nvars,
            terms,
        }
    }

    /// Value at `point` modulo `ell`.
    pub fn evaluate_mod(&self, point: &[u64], ell: u64) -> Result<u64> {
        if point.len() != self.nvars {
            return invalid(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.nvars
            ));
        }
        let field = Fp::new(ell)?;
        Ok(self.reduce(&field).eval(point))
    }

    /// Exact value at an integer point.
    pub fn evaluate_int(&self, point: &[BigInt]) -> BigInt {
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(point)
                    .fold(c.clone(), |acc, (&k, x)| acc * x.pow(k))
            })
            .sum()
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, names }
    }
}

struct PolyDisplay<'a> {
    poly: &'a SparsePolynomial,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, e)) in self.poly.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let abs = c.abs();
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| {
                    let name = self
                        .names
                        .get(v)
                        .cloned()
                        .unwrap_or_else(|| format!("v{v}"));
                    if k == 1 {
                        name
                    } else {
                        format!("{name}^{k}")
                    }
                })
                .collect();
            if monomial.is_empty() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                f.write_str(&monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A polynomial with coefficients reduced into a prime field.
#[derive(Debug, Clone)]
pub struct ReducedPoly {
    field: Fp,
    nvars: usize,
    terms: Vec<(u64, Vec<u32>)>,
}

impl ReducedPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, point: &[u64]) -> u64 {
        let f = &self.field;
        self.terms.iter().fold(0, |acc, (c, e)| {
            let mono = e
                .iter()
                .zip(point)
                .fold(*c, |m, (&k, &x)| f.mul(m, f.pow(x, k as u64)));
            f.add(acc, mono)
        })
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> ReducedPoly {
        let f = &self.field;
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[var] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[var] -= 1;
                (f.mul(*c, e[var] as u64 % f.modulus()), e2)
            })
            .filter(|(c, _)| *c != 0)
            .collect();
        ReducedPoly {
            field: self.field,
            nvars: self.nvars,
            terms,
        }
    }

    /// Sets variable `var` to 1, keeping the variable count.
    pub fn dehomogenize(&self, var: usize) -> ReducedPoly {
        let f = &self.field;
        let mut terms: Vec<(u64, Vec<u32>)> = self
            .terms
            .iter()
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[var] = 0;
                (*c, e2)
            })
            .collect();
        terms.sort_by(|a, b| b.1.cmp(&a.1));
        let mut merged: Vec<(u64, Vec<u32>)> = Vec::with_capacity(terms.len());
        for (c, e) in terms {
            match merged.last_mut() {
                Some((acc, last)) if *last == e => *acc = f.add(*acc, c),
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|(c, _)| *c != 0);
        ReducedPoly {
            field: self.field,
            nvars: self.nvars,
            terms: merged,
        }
    }

    /// Coefficients in the last variable, with the other variables fixed to
    /// `prefix`. Index `k` holds the coefficient of `x_last^k`.
    pub fn univariate_in_last(&self, prefix: &[u64], out: &mut Vec<u64>) {
        let f = &self.field;
        let last = self.nvars - 1;
        out.clear();
        for (c, e) in &self.terms {
            let k = e[last] as usize;
            if out.len() <= k {
                out.resize(k + 1, 0);
            }
            let mono = e[..last]
                .iter()
                .zip(prefix)
                .fold(*c, |m, (&k, &x)| f.mul(m, f.pow(x, k as u64)));
            out[k] = f.add(out[k], mono);
        }
    }

    /// Evaluates on a vector of truncated power series.
    pub fn eval_series(&self, point: &[PowerSeries]) -> PowerSeries {
        let prec = point.first().map(|s| s.coeffs.len()).unwrap_or(1);
        let mut acc = PowerSeries::zero(prec);
        for (c, e) in &self.terms {
            let mut mono = PowerSeries::constant(*c, prec);
            for (&k, s) in e.iter().zip(point) {
                for _ in 0..k {
                    mono = mono.mul(s, &self.field);
                }
            }
            acc = acc.add(&mono, &self.field);
        }
        acc
    }
}

/// Power series over a prime field truncated at a fixed precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    pub coeffs: Vec<u64>,
}

impl PowerSeries {
    pub fn zero(prec: usize) -> Self {
        PowerSeries {
            coeffs: vec![0; prec],
        }
    }

    pub fn constant(c: u64, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        s.coeffs[0] = c;
        s
    }

    pub fn add(&self, other: &Self, f: &Fp) -> Self {
        PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self, f: &Fp) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        PowerSeries { coeffs: out }
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }
}

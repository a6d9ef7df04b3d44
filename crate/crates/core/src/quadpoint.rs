//! Fields of definition of the quadratic points in the fibers over small
//! multiples of the generator.
//!
//! A pair of points `(b1 sqrt(d) : a2 : .. : ag)` reduces at a prime `ell` not
//! dividing `b1 d` to a fiber whose `q`-value has the square class of `d`. So
//! reading the square class of `q` over `t R~` at many primes gives a
//! fingerprint of `d`; a wrong candidate disagrees at about half the primes.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_squarefree, legendre_symbol, squarefree_fields_below};
use crate::error::{Error, Result};
use crate::sieve::{Coset, FiberCase, SieveContext, TraceStep, Verdict};

/// Fewest nonzero observations accepted by [`identify_field`].
pub const MIN_OBSERVATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SquareClass {
    Square,
    Nonsquare,
    Zero,
    Unknown,
}

impl SquareClass {
    fn symbol(self) -> Option<i8> {
        match self {
            SquareClass::Square => Some(1),
            SquareClass::Nonsquare => Some(-1),
            _ => None,
        }
    }
}

impl From<FiberCase> for SquareClass {
    fn from(c: FiberCase) -> Self {
        match c {
            FiberCase::PairOverBase => SquareClass::Square,
            FiberCase::ConjugatePair => SquareClass::Nonsquare,
            FiberCase::Single => SquareClass::Zero,
            FiberCase::Unknown => SquareClass::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFingerprint {
    pub t: i64,
    pub coset: Coset,
    pub observations: Vec<(u64, SquareClass)>,
}

impl FieldFingerprint {
    /// Observations with a nonzero square class.
    pub fn informative(&self) -> impl Iterator<Item = (u64, i8)> + '_ {
        self.observations
            .iter()
            .filter_map(|&(ell, c)| c.symbol().map(|s| (ell, s)))
    }

    /// Number of informative observations where `(d / ell)` disagrees.
    pub fn mismatches(&self, d: i64) -> usize {
        self.informative()
            .filter(|&(ell, s)| legendre_symbol(d, ell) != Ok(s))
            .count()
    }
}

/// Square class of `q` at the point of `C` over `t R~` (or `t R~ + Q~`).
pub fn fiber_square_class(
    ctx: &SieveContext<'_>,
    ell: u64,
    t: i64,
    coset: Coset,
) -> Result<SquareClass> {
    let local = ctx.local_data(ell)?;
    let k = t.rem_euclid(local.order as i64) as usize;
    Ok(local.cases_for(coset)?[k].into())
}

/// Observations at the first `budget` usable primes not dividing `2N`.
pub fn fingerprint(
    ctx: &SieveContext<'_>,
    t: i64,
    coset: Coset,
    budget: usize,
) -> Result<FieldFingerprint> {
    if coset == Coset::Torsion && !ctx.model().has_torsion() {
        return Err(Error::InvalidArgument("model has no torsion coset".into()));
    }
    let mut observations = Vec::with_capacity(budget);
    let mut ell = 2u64;
    // Far more candidates than any budget needs; primes that fail are skipped.
    let limit = 1000 + 40 * budget as u64;
    while observations.len() < budget && ell < limit {
        ell += 1;
        if !crate::arith::is_prime(ell) || ctx.model().is_bad_prime(ell) {
            continue;
        }
        match fiber_square_class(ctx, ell, t, coset) {
            Ok(c) => observations.push((ell, c)),
            Err(Error::UnusablePrime { .. }) | Err(Error::InvalidArgument(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(FieldFingerprint {
        t,
        coset,
        observations,
    })
}

/// Candidates `d` whose quadratic characters match the fingerprint of the
/// fiber over `t R` at all but `mismatch_tolerance` informative primes.
pub fn identify_field(
    ctx: &SieveContext<'_>,
    t: i64,
    coset: Coset,
    candidates: &[i64],
) -> Result<Vec<i64>> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&d) = candidates.iter().find(|&&d| d == 1 || !is_squarefree(d)) {
        return Err(Error::InvalidArgument(format!(
            "candidate {d} is not a squarefree d != 0, 1"
        )));
    }
    let fp = fingerprint(ctx, t, coset, ctx.config().prime_budget)?;
    let informative = fp.informative().count();
    if informative < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "only {informative} informative primes for t = {t}"
        )));
    }
    let tol = ctx.config().mismatch_tolerance;
    Ok(candidates
        .iter()
        .copied()
        .filter(|&d| fp.mismatches(d) <= tol)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identification {
    pub t: i64,
    pub coset: Coset,
    pub fields: Vec<i64>,
}

impl fmt::Display for Identification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.coset {
            Coset::Base => format!("t={}", self.t),
            Coset::Torsion => format!("t={} (+Q)", self.t),
        };
        match self.fields.as_slice() {
            [] => write!(f, "{what}: no field with |d| in range"),
            [d] => write!(f, "{what}: Q(sqrt({d}))"),
            many => write!(f, "{what}: ambiguous {many:?}"),
        }
    }
}

/// Outcome of the sieve for one `d` in a table run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveSummary {
    pub d: i64,
    pub contradiction: bool,
    pub primes_used: usize,
    pub last_prime: Option<u64>,
    pub modulus: u64,
    pub survivors: usize,
}

impl SieveSummary {
    fn from_verdict(d: i64, v: &Verdict) -> Self {
        let primes = v.primes_used();
        let (modulus, survivors) = match v {
            Verdict::Contradiction { trace } => (last_modulus(trace), 0),
            Verdict::Survivors {
                residues,
                torsion_residues,
                ..
            } => (
                residues.modulus(),
                residues.len() + torsion_residues.as_ref().map_or(0, |t| t.len()),
            ),
        };
        SieveSummary {
            d,
            contradiction: v.is_contradiction(),
            primes_used: primes.len(),
            last_prime: primes.last().copied(),
            modulus,
            survivors,
        }
    }
}

fn last_modulus(trace: &[TraceStep]) -> u64 {
    trace
        .iter()
        .rev()
        .find_map(|s| match s {
            TraceStep::Applied { modulus, .. } => Some(*modulus),
            TraceStep::Skipped { .. } => None,
        })
        .unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnReport {
    pub level: u64,
    pub d_bound: i64,
    pub t_bound: i64,
    /// Fields with a quadratic point found among the fibers over small multiples.
    pub fields: Vec<i64>,
    pub identifications: Vec<Identification>,
    pub sieve: Vec<SieveSummary>,
    pub inconsistencies: Vec<String>,
}

/// Identifies fields from `t R` with `0 < |t| <= t_bound` (and `t R + Q` with
/// `|t| <= t_bound` when there is torsion), then sieves every squarefree
/// `|d| < d_bound` and cross-checks both directions.
pub fn compute_dn_report(ctx: &SieveContext<'_>, d_bound: i64, t_bound: i64) -> Result<DnReport> {
    let candidates = squarefree_fields_below(d_bound);
    let mut jobs: Vec<(i64, Coset)> = (-t_bound..=t_bound)
        .filter(|&t| t != 0)
        .map(|t| (t, Coset::Base))
        .collect();
    if ctx.model().has_torsion() {
        jobs.extend((-t_bound..=t_bound).map(|t| (t, Coset::Torsion)));
    }
    let identifications = jobs
        .par_iter()
        .map(|&(t, coset)| {
            identify_field(ctx, t, coset, &candidates).map(|fields| Identification {
                t,
                coset,
                fields,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fields: BTreeSet<i64> = identifications
        .iter()
        .filter(|i| i.fields.len() == 1)
        .map(|i| i.fields[0])
        .collect();

    let mut all_primes: BTreeSet<u64> = BTreeSet::new();
    for &d in &candidates {
        all_primes.extend(ctx.choose_primes(d)?);
    }
    ctx.prefetch(&all_primes.into_iter().collect::<Vec<_>>());

    let sieve = candidates
        .par_iter()
        .map(|&d| ctx.run(d).map(|v| SieveSummary::from_verdict(d, &v)))
        .collect::<Result<Vec<_>>>()?;

    let mut inconsistencies = Vec::new();
    for i in identifications.iter().filter(|i| i.fields.len() > 1) {
        inconsistencies.push(format!("ambiguous identification {i}"));
    }
    for s in &sieve {
        match (fields.contains(&s.d), s.contradiction) {
            (true, true) => inconsistencies.push(format!(
                "d = {} has a quadratic point but the sieve reached a contradiction",
                s.d
            )),
            (false, false) => inconsistencies.push(format!(
                "d = {}: {} classes survive mod {} with no quadratic point found",
                s.d, s.survivors, s.modulus
            )),
            _ => {}
        }
    }
    Ok(DnReport {
        level: ctx.model().level,
        d_bound,
        t_bound,
        fields: fields.into_iter().collect(),
        identifications,
        sieve,
        inconsistencies,
    })
}

/// The set of `d` with `|d| < d_bound` over which quadratic points exist,
/// failing if the sieve and the identified points disagree.
pub fn compute_dn(ctx: &SieveContext<'_>, d_bound: i64, t_bound: i64) -> Result<Vec<i64>> {
    let report = compute_dn_report(ctx, d_bound, t_bound)?;
    if !report.inconsistencies.is_empty() {
        return Err(Error::Inconsistency(report.inconsistencies.join("; ")));
    }
    Ok(report.fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_model;
    use crate::sieve::SieveConfig;

    #[test]
    fn empty_candidates() {
        let m = builtin_model(53).unwrap().unwrap();
        let ctx = SieveContext::new(&m, SieveConfig::default()).unwrap();
        assert!(identify_field(&ctx, 1, Coset::Base, &[])
            .unwrap()
            .is_empty());
        assert!(identify_field(&ctx, 1, Coset::Base, &[4]).is_err());
    }

    #[test]
    fn t_one_is_over_minus_11() {
        let m = builtin_model(53).unwrap().unwrap();
        let ctx = SieveContext::new(&m, SieveConfig::default()).unwrap();
        let cands = squarefree_fields_below(100);
        assert_eq!(
            identify_field(&ctx, 1, Coset::Base, &cands).unwrap(),
            vec![-11]
        );
    }

    #[test]
    fn tiny_budget_is_insufficient() {
        let m = builtin_model(53).unwrap().unwrap();
        let config = SieveConfig {
            prime_budget: 5,
            ..SieveConfig::default()
        };
        let ctx = SieveContext::new(&m, config).unwrap();
        assert!(matches!(
            identify_field(&ctx, 1, Coset::Base, &[-11]),
            Err(Error::InsufficientData(_))
        ));
    }
}

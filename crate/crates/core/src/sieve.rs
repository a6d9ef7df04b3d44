//! The Mordell-Weil sieve.
//!
//! Suppose `P` is a quadratic point over `Q(sqrt(d))` with `psi(P) = m R`. At
//! each good prime `ell`, the fiber of the reduced map over `m R~` must be
//! compatible with how `ell` splits in `Q(sqrt(d))`. This bounds `m` modulo
//! the order of `R~`, and the constraints from many primes are combined by
//! the Chinese remainder theorem until no residue class is left or the primes
//! run out.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    check_field_discriminant, is_prime, is_smooth, primes_below, splitting_type, squarefree_part,
    Fp, SplittingType,
};
use crate::ec::CurvePoint;
use crate::error::{invalid, Error, Result};
use crate::model::{CurveModelData, ProjectivePoint, PsiImage, ReducedModel};

/// Shape of the fiber of `X0(N) -> X0+(N)` over one point, read off from
/// `x1^2 = q` at the point of `C` below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FiberCase {
    /// Two distinct points over `F_ell`.
    PairOverBase,
    /// Two conjugate points over `F_ell^2`.
    ConjugatePair,
    /// One ramification point.
    Single,
    /// No point of `C` was found over this multiple.
    Unknown,
}

impl FiberCase {
    pub fn code(self) -> char {
        match self {
            FiberCase::PairOverBase => 'P',
            FiberCase::ConjugatePair => 'C',
            FiberCase::Single => 'S',
            FiberCase::Unknown => 'U',
        }
    }

    /// Whether a quadratic point can reduce into a fiber of this shape at a
    /// prime with the given splitting. Unknown fibers are never excluded.
    pub fn compatible_with(self, s: SplittingType) -> bool {
        match self {
            FiberCase::Single | FiberCase::Unknown => true,
            FiberCase::PairOverBase => s == SplittingType::Split,
            FiberCase::ConjugatePair => s == SplittingType::Inert,
        }
    }
}

pub fn classify_fiber(field: &Fp, q: u64) -> FiberCase {
    let q = q % field.modulus();
    if q == 0 {
        FiberCase::Single
    } else if field.is_square(q) {
        FiberCase::PairOverBase
    } else {
        FiberCase::ConjugatePair
    }
}

/// Which coset of `<R>` a point of `X0+(N)(Q)` lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coset {
    Base,
    Torsion,
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coset::Base => "m*R",
            Coset::Torsion => "m*R + Q",
        })
    }
}

/// Fiber shapes over every multiple of the reduced generator at one prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalData {
    pub level: u64,
    pub ell: u64,
    /// Order of the reduced generator.
    pub order: u64,
    pub cases: Vec<FiberCase>,
    /// Fibers over `k R~ + Q~`, present when the model has torsion.
    pub torsion_cases: Option<Vec<FiberCase>>,
}

impl LocalData {
    pub fn cases_for(&self, coset: Coset) -> Result<&[FiberCase]> {
        match coset {
            Coset::Base => Ok(&self.cases),
            Coset::Torsion => self
                .torsion_cases
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("model has no torsion coset".into())),
        }
    }

    /// Residues `k mod G` that survive a prime with splitting `s`.
    pub fn allowed_residues(&self, s: SplittingType, coset: Coset) -> Result<Vec<u64>> {
        Ok(self
            .cases_for(coset)?
            .iter()
            .enumerate()
            .filter(|(_, c)| c.compatible_with(s))
            .map(|(k, _)| k as u64)
            .collect())
    }

    pub fn case_string(&self, coset: Coset) -> Result<String> {
        Ok(self.cases_for(coset)?.iter().map(|c| c.code()).collect())
    }
}

/// Accumulates fiber shapes per index; several points landing on one index
/// make it unknown.
struct CaseTable {
    cases: Vec<Option<FiberCase>>,
}

impl CaseTable {
    fn new(n: usize) -> Self {
        CaseTable {
            cases: vec![None; n],
        }
    }

    fn record(&mut self, k: usize, case: FiberCase) {
        self.cases[k] = match self.cases[k] {
            None => Some(case),
            Some(_) => Some(FiberCase::Unknown),
        };
    }

    fn finish(self) -> Vec<FiberCase> {
        self.cases
            .into_iter()
            .map(|c| c.unwrap_or(FiberCase::Unknown))
            .collect()
    }
}

/// Builds the table of fiber shapes at `ell`.
pub fn compute_local_data(model: &CurveModelData, ell: u64) -> Result<LocalData> {
    let reduced = model.reduce(ell)?;
    let curve = reduced.curve();
    let r = curve.reduce_point(&model.generator)?;
    let order = curve.point_order(&r)?;

    let mut multiples = Vec::with_capacity(order as usize);
    let mut index: HashMap<CurvePoint, usize> = HashMap::with_capacity(order as usize);
    let mut p = CurvePoint::Infinity;
    for k in 0..order as usize {
        index.insert(p, k);
        multiples.push(p);
        p = curve.add_unchecked(&p, &r);
    }
    let torsion = model
        .torsion
        .as_ref()
        .map(|t| curve.reduce_point(t))
        .transpose()?;
    let shifted: Option<Vec<CurvePoint>> = torsion.map(|q| {
        multiples
            .iter()
            .map(|m| curve.add_unchecked(m, &q))
            .collect()
    });
    let shifted_index: Option<HashMap<CurvePoint, usize>> = shifted
        .as_ref()
        .map(|s| s.iter().enumerate().map(|(k, p)| (*p, k)).collect());

    let field = *reduced.field();
    let mut base = CaseTable::new(order as usize);
    let mut coset = shifted.as_ref().map(|_| CaseTable::new(order as usize));

    if reduced.has_inverse_map() {
        let fill = |targets: &[CurvePoint], table: &mut CaseTable| -> Result<()> {
            for (k, e) in targets.iter().enumerate() {
                if let Some(c) = preimage_via_inverse(&reduced, e)? {
                    table.record(k, classify_fiber(&field, reduced.q_value(&c)));
                }
            }
            Ok(())
        };
        fill(&multiples, &mut base)?;
        if let (Some(s), Some(t)) = (&shifted, coset.as_mut()) {
            fill(s, t)?;
        }
    } else {
        for c in reduced.enumerate_c_points() {
            let image = match reduced.psi_image(&c)? {
                PsiImage::Point(e) => e,
                PsiImage::Unresolved => {
                    return Err(Error::UnusablePrime {
                        ell,
                        reason: format!("psi cannot be evaluated at {c}"),
                    })
                }
            };
            let case = classify_fiber(&field, reduced.q_value(&c));
            if let Some(&k) = index.get(&image) {
                base.record(k, case);
            }
            if let (Some(idx), Some(t)) = (&shifted_index, coset.as_mut()) {
                if let Some(&k) = idx.get(&image) {
                    t.record(k, case);
                }
            }
        }
    }
    Ok(LocalData {
        level: model.level,
        ell,
        order,
        cases: base.finish(),
        torsion_cases: coset.map(CaseTable::finish),
    })
}

fn preimage_via_inverse(reduced: &ReducedModel, e: &CurvePoint) -> Result<Option<ProjectivePoint>> {
    let Some(c) = reduced.inverse_image(e) else {
        return Ok(None);
    };
    match reduced.psi_image(&c)? {
        PsiImage::Point(back) if back != *e => Ok(None),
        _ => Ok(Some(c)),
    }
}

// ---------------------------------------------------------------------------
// Residue sets

/// Limits guarding against runaway growth of the residue sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_residue_count: usize,
    pub max_modulus: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_residue_count: 10_000_000,
            max_modulus: 1_000_000_000_000,
        }
    }
}

/// Residue classes modulo `modulus`, sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueSet {
    modulus: u64,
    residues: Vec<u64>,
}

impl ResidueSet {
    /// Every integer: the single class modulo 1.
    pub fn full() -> Self {
        ResidueSet {
            modulus: 1,
            residues: vec![0],
        }
    }

    pub fn new(modulus: u64, mut residues: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return invalid("modulus must be positive");
        }
        if let Some(r) = residues.iter().find(|&&r| r >= modulus) {
            return invalid(format!("residue {r} out of range mod {modulus}"));
        }
        residues.sort_unstable();
        residues.dedup();
        Ok(ResidueSet { modulus, residues })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn contains(&self, m: i64) -> bool {
        let r = m.rem_euclid(self.modulus as i64) as u64;
        self.residues.binary_search(&r).is_ok()
    }

    /// Classes modulo `lcm(M, G)` lying in `self` and in `constraint` mod `G`.
    pub fn intersect(&self, g: u64, constraint: &[u64], limits: &Limits) -> Result<ResidueSet> {
        let other = ResidueSet::new(g, constraint.to_vec())?;
        let l = self
            .modulus
            .checked_div(self.modulus.gcd(&g))
            .and_then(|a| a.checked_mul(g))
            .filter(|&l| l <= limits.max_modulus)
            .ok_or_else(|| {
                Error::CombinatorialExplosion(format!(
                    "modulus lcm({}, {g}) exceeds {}",
                    self.modulus, limits.max_modulus
                ))
            })?;

        // Lift whichever side produces fewer candidates, test against the other.
        let lift_self = self.residues.len() as u128 * (l / self.modulus) as u128;
        let lift_other = other.residues.len() as u128 * (l / g) as u128;
        let (lifted, fixed) = if lift_self <= lift_other {
            (self, &other)
        } else {
            (&other, self)
        };
        let mut member = None;
        if fixed.modulus <= 1 << 24 {
            let mut bits = vec![false; fixed.modulus as usize];
            for &r in &fixed.residues {
                bits[r as usize] = true;
            }
            member = Some(bits);
        }
        let mut out = Vec::new();
        let steps = l / lifted.modulus;
        for j in 0..steps {
            let offset = j * lifted.modulus;
            for &r in &lifted.residues {
                let x = offset + r;
                let rm = x % fixed.modulus;
                let hit = match &member {
                    Some(bits) => bits[rm as usize],
                    None => fixed.residues.binary_search(&rm).is_ok(),
                };
                if hit {
                    if out.len() == limits.max_residue_count {
                        return Err(Error::CombinatorialExplosion(format!(
                            "more than {} residue classes modulo {l}",
                            limits.max_residue_count
                        )));
                    }
                    out.push(x);
                }
            }
        }
        Ok(ResidueSet {
            modulus: l,
            residues: out,
        })
    }
}

impl fmt::Display for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m ≡ {} (mod {})", join(&self.residues), self.modulus)
    }
}

pub(crate) fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

// ---------------------------------------------------------------------------
// Configuration and caching

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    /// Tail primes are taken below this bound.
    pub prime_bound: u64,
    /// Tail primes must have a generator order with no prime factor above this.
    pub smoothness: u64,
    pub max_residue_count: usize,
    pub max_modulus: u64,
    /// Number of primes consulted when identifying a field of definition.
    pub prime_budget: usize,
    /// Observations a candidate field may disagree with and still survive.
    pub mismatch_tolerance: usize,
    /// Explicit prime list replacing the automatic choice.
    pub primes: Option<Vec<u64>>,
}

impl Default for SieveConfig {
    fn default() -> Self {
        let limits = Limits::default();
        SieveConfig {
            prime_bound: 1000,
            smoothness: 7,
            max_residue_count: limits.max_residue_count,
            max_modulus: limits.max_modulus,
            prime_budget: 40,
            mismatch_tolerance: 2,
            primes: None,
        }
    }
}

impl SieveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.prime_bound == 0
            || self.max_residue_count == 0
            || self.max_modulus == 0
            || self.prime_budget == 0
        {
            return invalid("all bounds must be positive");
        }
        if self.smoothness < 2 {
            return invalid("smoothness must be at least 2");
        }
        Ok(())
    }

    pub fn limits(&self) -> Limits {
        Limits {
            max_residue_count: self.max_residue_count,
            max_modulus: self.max_modulus,
        }
    }
}

/// Persistent storage for local data, keyed by model hash and prime.
pub trait LocalStore: Send + Sync {
    fn load(&self, model_hash: &str, level: u64, ell: u64) -> Option<LocalData>;
    fn store(&self, model_hash: &str, data: &LocalData);
}

/// In-memory cache of per-prime data, shared by concurrent readers.
#[derive(Default)]
pub struct LocalCache {
    local: RwLock<HashMap<u64, Result<Arc<LocalData>>>>,
    orders: RwLock<HashMap<u64, Option<u64>>>,
}

// ---------------------------------------------------------------------------
// Running the sieve

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceStep {
    Applied {
        ell: u64,
        splitting: SplittingType,
        coset: Coset,
        order: u64,
        allowed: Vec<u64>,
        modulus: u64,
        count: usize,
        /// The combined residues, when there are at most [`TRACE_PREVIEW`].
        combined: Option<Vec<u64>>,
    },
    Skipped {
        ell: u64,
        reason: String,
    },
}

pub const TRACE_PREVIEW: usize = 32;

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Applied {
                ell,
                splitting,
                coset,
                order,
                allowed,
                modulus,
                count,
                combined,
            } => {
                if *coset == Coset::Torsion {
                    write!(f, "[{coset}] ")?;
                }
                write!(
                    f,
                    "ℓ={ell} {splitting}: m ≡ {} (mod {order}); combined: ",
                    join(allowed)
                )?;
                match combined {
                    Some(v) if v.is_empty() => write!(f, "none (mod {modulus})"),
                    Some(v) => write!(f, "m ≡ {} (mod {modulus})", join(v)),
                    None => write!(f, "{count} classes (mod {modulus})"),
                }
            }
            TraceStep::Skipped { ell, reason } => write!(f, "ℓ={ell} skipped: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Contradiction {
        trace: Vec<TraceStep>,
    },
    Survivors {
        residues: ResidueSet,
        /// Survivors for `m R + Q` when the model has torsion.
        torsion_residues: Option<ResidueSet>,
        trace: Vec<TraceStep>,
    },
}

impl Verdict {
    pub fn is_contradiction(&self) -> bool {
        matches!(self, Verdict::Contradiction { .. })
    }

    pub fn trace(&self) -> &[TraceStep] {
        match self {
            Verdict::Contradiction { trace } | Verdict::Survivors { trace, .. } => trace,
        }
    }

    /// Primes consumed in order, one entry per prime.
    pub fn primes_used(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for step in self.trace() {
            let ell = match step {
                TraceStep::Applied { ell, .. } | TraceStep::Skipped { ell, .. } => *ell,
            };
            if out.last() != Some(&ell) {
                out.push(ell);
            }
        }
        out
    }
}

/// A model with its configuration and the per-prime cache.
pub struct SieveContext<'a> {
    model: &'a CurveModelData,
    config: SieveConfig,
    model_hash: String,
    cache: LocalCache,
    store: Option<Arc<dyn LocalStore>>,
}

impl<'a> SieveContext<'a> {
    pub fn new(model: &'a CurveModelData, config: SieveConfig) -> Result<Self> {
        config.validate()?;
        Ok(SieveContext {
            model,
            config,
            model_hash: model.content_hash(),
            cache: LocalCache::default(),
            store: None,
        })
    }

    pub fn with_store(mut self, store: Arc<dyn LocalStore>) -> Self {
        self.store = Some(store);
        self
    }

    pub fn model(&self) -> &CurveModelData {
        self.model
    }

    pub fn config(&self) -> &SieveConfig {
        &self.config
    }

    pub fn model_hash(&self) -> &str {
        &self.model_hash
    }

    /// Order of the reduced generator at `ell`, or `None` at primes where the
    /// Weierstrass model reduces badly.
    pub fn generator_order(&self, ell: u64) -> Option<u64> {
        if let Some(o) = self.cache.orders.read().expect("lock").get(&ell) {
            return *o;
        }
        let order = self.model.reduce(ell).ok().and_then(|m| {
            let r = m.curve().reduce_point(&self.model.generator).ok()?;
            m.curve().point_order(&r).ok()
        });
        self.cache.orders.write().expect("lock").insert(ell, order);
        order
    }

    /// Local data at `ell`, computed once and shared.
    pub fn local_data(&self, ell: u64) -> Result<Arc<LocalData>> {
        if let Some(r) = self.cache.local.read().expect("lock").get(&ell) {
            return r.clone();
        }
        let stored = self
            .store
            .as_ref()
            .and_then(|s| s.load(&self.model_hash, self.model.level, ell))
            .filter(|d| d.ell == ell && d.level == self.model.level);
        let result = match stored {
            Some(d) => Ok(Arc::new(d)),
            None => {
                let computed = compute_local_data(self.model, ell).map(Arc::new);
                if let (Ok(d), Some(s)) = (&computed, &self.store) {
                    s.store(&self.model_hash, d);
                }
                computed
            }
        };
        self.cache
            .local
            .write()
            .expect("lock")
            .entry(ell)
            .or_insert(result)
            .clone()
    }

    /// Computes local data for `primes` in parallel.
    pub fn prefetch(&self, primes: &[u64]) {
        primes.par_iter().for_each(|&ell| {
            let _ = self.local_data(ell);
        });
    }

    fn check_prime(&self, ell: u64) -> Result<()> {
        if !is_prime(ell) || self.model.is_bad_prime(ell) {
            return invalid(format!(
                "{ell} is not an odd prime coprime to 2N = {}",
                2 * self.model.level
            ));
        }
        Ok(())
    }

    /// The ordered prime list for `d`: ramified primes first, then primes
    /// below the bound whose generator order is smooth.
    pub fn choose_primes(&self, d: i64) -> Result<Vec<u64>> {
        check_field_discriminant(d)?;
        if let Some(explicit) = &self.config.primes {
            for &ell in explicit {
                self.check_prime(ell)?;
            }
            return Ok(explicit.clone());
        }
        let d_abs = d.unsigned_abs();
        let mut out: Vec<u64> = crate::arith::factorize(d_abs)
            .into_iter()
            .map(|(p, _)| p)
            .filter(|&p| !self.model.is_bad_prime(p))
            .collect();
        for ell in primes_below(self.config.prime_bound) {
            if self.model.is_bad_prime(ell) || d_abs.is_multiple_of(ell) {
                continue;
            }
            if let Some(g) = self.generator_order(ell) {
                if is_smooth(g, self.config.smoothness) {
                    out.push(ell);
                }
            }
        }
        Ok(out)
    }

    /// Runs the sieve for `Q(sqrt(d))`; `d` is replaced by its squarefree part.
    pub fn run(&self, d: i64) -> Result<Verdict> {
        let d = normalize_d(d)?;
        let primes = self.choose_primes(d)?;
        self.run_with_primes(d, &primes)
    }

    pub fn run_with_primes(&self, d: i64, primes: &[u64]) -> Result<Verdict> {
        let d = normalize_d(d)?;
        let cosets: &[Coset] = if self.model.has_torsion() {
            &[Coset::Base, Coset::Torsion]
        } else {
            &[Coset::Base]
        };
        let limits = self.config.limits();
        let mut acc: Vec<ResidueSet> = cosets.iter().map(|_| ResidueSet::full()).collect();
        let mut trace = Vec::new();
        for &ell in primes {
            self.check_prime(ell)?;
            let local = match self.local_data(ell) {
                Ok(l) => l,
                Err(Error::UnusablePrime { reason, .. }) => {
                    trace.push(TraceStep::Skipped { ell, reason });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let splitting = splitting_type(d, ell)?;
            for (set, &coset) in acc.iter_mut().zip(cosets) {
                if set.is_empty() {
                    continue;
                }
                let allowed = local.allowed_residues(splitting, coset)?;
                *set = set.intersect(local.order, &allowed, &limits)?;
                trace.push(TraceStep::Applied {
                    ell,
                    splitting,
                    coset,
                    order: local.order,
                    allowed,
                    modulus: set.modulus(),
                    count: set.len(),
                    combined: (set.len() <= TRACE_PREVIEW).then(|| set.residues().to_vec()),
                });
            }
            if acc.iter().all(ResidueSet::is_empty) {
                return Ok(Verdict::Contradiction { trace });
            }
        }
        let mut acc = acc.into_iter();
        Ok(Verdict::Survivors {
            residues: acc.next().expect("base coset"),
            torsion_residues: acc.next(),
            trace,
        })
    }
}

fn normalize_d(d: i64) -> Result<i64> {
    let d = squarefree_part(d)?;
    if d == 1 {
        return invalid("d is a perfect square, so Q(sqrt(d)) = Q");
    }
    Ok(d)
}

/// One-shot sieve run for `Q(sqrt(d))`.
pub fn run_sieve(model: &CurveModelData, d: i64, config: &SieveConfig) -> Result<Verdict> {
    SieveContext::new(model, config.clone())?.run(d)
}

/// One-shot sieve run over both cosets `m R` and `m R + Q`.
pub fn run_sieve_with_torsion(
    model: &CurveModelData,
    d: i64,
    config: &SieveConfig,
) -> Result<Verdict> {
    if !model.has_torsion() {
        return invalid(format!("level {} has no torsion point", model.level));
    }
    run_sieve(model, d, config)
}

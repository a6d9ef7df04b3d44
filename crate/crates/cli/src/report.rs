//! Report documents written by the subcommands, in JSON and plain text.

use std::fmt::Write as _;

use mwsieve::quadpoint::{DnReport, Identification, SieveSummary};
use mwsieve::{LocalData, ResidueSet, TraceStep, ValidationReport, Verdict};
use serde::Serialize;

pub const SCHEMA: &str = "mwsieve-report/1";

/// Survivor residues listed in full up to this many.
pub const SURVIVOR_PREVIEW: usize = 64;

#[derive(Debug, Serialize)]
pub struct SurvivorSet {
    pub modulus: u64,
    pub count: usize,
    pub residues: Vec<u64>,
    pub truncated: bool,
}

impl From<&ResidueSet> for SurvivorSet {
    fn from(s: &ResidueSet) -> Self {
        SurvivorSet {
            modulus: s.modulus(),
            count: s.len(),
            residues: s
                .residues()
                .iter()
                .take(SURVIVOR_PREVIEW)
                .copied()
                .collect(),
            truncated: s.len() > SURVIVOR_PREVIEW,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SieveReport {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(rename = "N")]
    pub level: u64,
    pub d: i64,
    pub model_hash: String,
    pub primes: Vec<u64>,
    pub trace: Vec<TraceStep>,
    pub verdict: &'static str,
    pub survivors: Option<SurvivorSet>,
    pub torsion_survivors: Option<SurvivorSet>,
}

impl SieveReport {
    pub fn new(level: u64, d: i64, model_hash: String, primes: Vec<u64>, v: &Verdict) -> Self {
        let (verdict, survivors, torsion_survivors) = match v {
            Verdict::Contradiction { .. } => ("contradiction", None, None),
            Verdict::Survivors {
                residues,
                torsion_residues,
                ..
            } => (
                "survivors",
                Some(residues.into()),
                torsion_residues.as_ref().map(SurvivorSet::from),
            ),
        };
        SieveReport {
            schema: SCHEMA,
            command: "sieve",
            level,
            d,
            model_hash,
            primes,
            trace: v.trace().to_vec(),
            verdict,
            survivors,
            torsion_survivors,
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "N={} d={} primes: {}",
            self.level,
            self.d,
            join(&self.primes)
        );
        for step in &self.trace {
            let _ = writeln!(s, "{step}");
        }
        match (&self.survivors, &self.torsion_survivors) {
            (None, _) => s.push_str("CONTRADICTION\n"),
            (Some(base), tors) => {
                s.push_str("SURVIVORS\n");
                write_survivors(&mut s, "m*R", base);
                if let Some(t) = tors {
                    write_survivors(&mut s, "m*R + Q", t);
                }
            }
        }
        s
    }
}

fn write_survivors(s: &mut String, label: &str, set: &SurvivorSet) {
    let more = if set.truncated { ", ..." } else { "" };
    let _ = writeln!(
        s,
        "{label}: {} classes mod {}: {}{more}",
        set.count,
        set.modulus,
        join(&set.residues)
    );
}

#[derive(Debug, Serialize)]
pub struct TableReport {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(rename = "N")]
    pub level: u64,
    pub dmax: i64,
    pub tmax: i64,
    #[serde(rename = "D")]
    pub fields: Vec<i64>,
    #[serde(rename = "expected_D")]
    pub expected: Option<Vec<i64>>,
    pub consistent: bool,
    pub inconsistencies: Vec<String>,
    pub identifications: Vec<Identification>,
    pub sieve: Vec<SieveSummary>,
}

impl TableReport {
    pub fn new(r: DnReport, expected: Option<Vec<i64>>) -> Self {
        TableReport {
            schema: SCHEMA,
            command: "table",
            level: r.level,
            dmax: r.d_bound,
            tmax: r.t_bound,
            fields: r.fields,
            expected,
            consistent: r.inconsistencies.is_empty(),
            inconsistencies: r.inconsistencies,
            identifications: r.identifications,
            sieve: r.sieve,
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "N={} |d|<{} |t|<={}", self.level, self.dmax, self.tmax);
        for i in self.identifications.iter().filter(|i| !i.fields.is_empty()) {
            let _ = writeln!(s, "  {i}");
        }
        for r in &self.sieve {
            let outcome = if r.contradiction {
                format!(
                    "contradiction after {} primes (last {})",
                    r.primes_used,
                    opt(r.last_prime)
                )
            } else {
                format!("{} classes survive mod {}", r.survivors, r.modulus)
            };
            let _ = writeln!(s, "  d={}: {outcome}", r.d);
        }
        for i in &self.inconsistencies {
            let _ = writeln!(s, "INCONSISTENT: {i}");
        }
        let _ = writeln!(s, "D = {{{}}}", join(&self.fields));
        s
    }
}

#[derive(Debug, Serialize)]
pub struct LocalDataReport {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(rename = "N")]
    pub level: u64,
    pub ell: u64,
    pub group_order: u64,
    #[serde(rename = "G")]
    pub order: u64,
    pub cases: String,
    pub torsion_cases: Option<String>,
}

impl LocalDataReport {
    pub fn new(d: &LocalData, group_order: u64) -> Self {
        let codes = |v: &[mwsieve::FiberCase]| v.iter().map(|c| c.code()).collect::<String>();
        LocalDataReport {
            schema: SCHEMA,
            command: "localdata",
            level: d.level,
            ell: d.ell,
            group_order,
            order: d.order,
            cases: codes(&d.cases),
            torsion_cases: d.torsion_cases.as_deref().map(codes),
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "N={} ℓ={}: #E={} G={}",
            self.level, self.ell, self.group_order, self.order
        );
        let _ = writeln!(s, "cases (k = 0..G-1): {}", self.cases);
        if let Some(t) = &self.torsion_cases {
            let _ = writeln!(s, "cases over k*R + Q: {t}");
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct FindPointsReport {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(rename = "N")]
    pub level: u64,
    pub dmax: i64,
    pub tmax: i64,
    pub identifications: Vec<Identification>,
}

impl FindPointsReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for i in &self.identifications {
            let _ = writeln!(s, "{i}");
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct ValidateReport {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(rename = "N")]
    pub level: u64,
    pub model_hash: String,
    pub ok: bool,
    pub failures: Vec<String>,
    pub unusable_primes: Vec<u64>,
    pub point_counts: Vec<PointCount>,
}

#[derive(Debug, Serialize)]
pub struct PointCount {
    pub ell: u64,
    pub points: usize,
}

impl ValidateReport {
    pub fn new(level: u64, model_hash: String, r: &ValidationReport) -> Self {
        ValidateReport {
            schema: SCHEMA,
            command: "validate",
            level,
            model_hash,
            ok: r.is_ok(),
            failures: r.failures.iter().map(|f| f.to_string()).collect(),
            unusable_primes: r.unusable_primes.clone(),
            point_counts: r
                .point_counts
                .iter()
                .map(|&(ell, points)| PointCount { ell, points })
                .collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "N={} model {}", self.level, self.model_hash);
        for p in &self.point_counts {
            let _ = writeln!(s, "  ℓ={}: {} points on C", p.ell, p.points);
        }
        if !self.unusable_primes.is_empty() {
            let _ = writeln!(
                s,
                "  psi unresolved at primes {}",
                join(&self.unusable_primes)
            );
        }
        for f in &self.failures {
            let _ = writeln!(s, "FAIL: {f}");
        }
        s.push_str(if self.ok { "OK\n" } else { "INVALID\n" });
        s
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn opt(v: Option<u64>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

//! Command-line front end for the sieve.
//!
//! [`run_command`] parses arguments, runs one subcommand and writes its
//! report; the binary is a thin wrapper around it.

pub mod cache;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mwsieve::arith::squarefree_fields_below;
use mwsieve::model::{builtin_model_text, VALIDATION_PRIMES};
use mwsieve::quadpoint::Identification;
use mwsieve::{
    compute_dn_report, identify_field, load_model, validate_model, Coset, CurveModelData, Error,
    SieveConfig, SieveContext,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::DiskCache;
use crate::report::{
    FindPointsReport, LocalDataReport, SieveReport, TableReport, ValidateReport, SCHEMA,
};

pub const EXIT_OK: i32 = 0;
/// A contradiction was demanded and not reached.
pub const EXIT_NO_CONTRADICTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mwsieve",
    version,
    about = "Mordell-Weil sieve for quadratic points on X0(N)"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Model file; overrides the lookup by level.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Directory holding model files named x0_<N>.json.
    #[arg(long, global = true, env = "MWSIEVE_MODEL_DIR")]
    model_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Directory for cached per-prime data.
    #[arg(long, global = true, env = "MWSIEVE_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1000)]
    prime_bound: u64,
    #[arg(long, global = true, default_value_t = 7)]
    smoothness: u64,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    max_residues: usize,
    #[arg(long, global = true, default_value_t = 1_000_000_000_000)]
    max_modulus: u64,
    /// Primes consulted when identifying fields.
    #[arg(long, global = true, default_value_t = 40)]
    prime_budget: usize,
    #[arg(long, global = true, default_value_t = 2)]
    mismatch_tolerance: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sieve for one quadratic field.
    #[command(allow_negative_numbers = true)]
    Sieve {
        #[arg(long)]
        level: Option<u64>,
        #[arg(long)]
        d: i64,
        /// Explicit comma-separated prime list.
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        /// Exit with status 1 unless the sieve reaches a contradiction.
        #[arg(long)]
        expect_contradiction: bool,
    },
    /// Sieve every squarefree |d| < dmax and identify the fields with points.
    Table {
        #[arg(long)]
        level: Option<u64>,
        #[arg(long, default_value_t = 100)]
        dmax: i64,
        #[arg(long, default_value_t = 5)]
        tmax: i64,
    },
    /// Fiber shapes over the multiples of the generator at one prime.
    Localdata {
        #[arg(long)]
        level: Option<u64>,
        #[arg(long)]
        ell: u64,
    },
    /// Fields of definition of the points over t*R for |t| <= tmax.
    FindPoints {
        #[arg(long)]
        level: Option<u64>,
        #[arg(long, default_value_t = 5)]
        tmax: i64,
        #[arg(long, default_value_t = 100)]
        dmax: i64,
    },
    /// Check a model file.
    Validate {
        #[arg(long)]
        level: Option<u64>,
    },
}

impl Command {
    fn level(&self) -> Option<u64> {
        match self {
            Command::Sieve { level, .. }
            | Command::Table { level, .. }
            | Command::Localdata { level, .. }
            | Command::FindPoints { level, .. }
            | Command::Validate { level } => *level,
        }
    }
}

#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(e.to_string())
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run_command<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let outcome = match cli.common.workers {
        Some(0) => Err(Failure("--workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli, &mut buf))),
        None => dispatch(&cli, &mut buf),
    };
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    match outcome {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn config(c: &Common, primes: Option<Vec<u64>>) -> SieveConfig {
    SieveConfig {
        prime_bound: c.prime_bound,
        smoothness: c.smoothness,
        max_residue_count: c.max_residues,
        max_modulus: c.max_modulus,
        prime_budget: c.prime_budget,
        mismatch_tolerance: c.mismatch_tolerance,
        primes,
    }
}

/// The model text for the invocation and where it came from.
fn model_text(c: &Common, level: Option<u64>) -> Result<(String, String), Failure> {
    if let Some(path) = &c.model {
        return Ok((read(path)?, path.display().to_string()));
    }
    let level = level.ok_or_else(|| Failure("give --level or --model".into()))?;
    mwsieve::model::check_level(level)?;
    let from_dir = c
        .model_dir
        .as_ref()
        .map(|d| d.join(format!("x0_{level}.json")));
    match from_dir.filter(|p| p.exists()) {
        Some(path) => Ok((read(&path)?, path.display().to_string())),
        None => match builtin_model_text(level) {
            Some(t) => Ok((t.to_string(), format!("built-in model for N={level}"))),
            None => Err(Failure(format!("no model file for N={level}"))),
        },
    }
}

fn check_requested_level(
    model: &CurveModelData,
    level: Option<u64>,
    origin: &str,
) -> Result<(), Failure> {
    match level {
        Some(l) if l != model.level => Err(Failure(format!(
            "{origin} is a model for N={}, not {l}",
            model.level
        ))),
        _ => Ok(()),
    }
}

fn resolve_model(c: &Common, level: Option<u64>) -> Result<CurveModelData, Failure> {
    let (text, origin) = model_text(c, level)?;
    let model = load_model(&text).map_err(|e| Failure(format!("{origin}: {e}")))?;
    check_requested_level(&model, level, &origin)?;
    Ok(model)
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn context<'a>(
    c: &Common,
    model: &'a CurveModelData,
    primes: Option<Vec<u64>>,
) -> Result<SieveContext<'a>, Failure> {
    let ctx = SieveContext::new(model, config(c, primes))?;
    Ok(match &c.cache_dir {
        Some(dir) => ctx.with_store(Arc::new(DiskCache::new(dir)?)),
        None => ctx,
    })
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    report: &T,
    text: impl FnOnce(&T) -> String,
) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let s = serde_json::to_string_pretty(report).map_err(|e| Failure(e.to_string()))?;
            writeln!(out, "{s}")?;
        }
        Format::Text => write!(out, "{}", text(report))?,
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Result<i32, Failure> {
    let c = &cli.common;
    if let Command::Validate { level } = &cli.command {
        return validate(c, *level, out);
    }
    let model = resolve_model(c, cli.command.level())?;
    match &cli.command {
        Command::Sieve {
            d,
            primes,
            expect_contradiction,
            ..
        } => {
            let ctx = context(c, &model, primes.clone())?;
            let d = mwsieve::squarefree_part(*d)?;
            let list = ctx.choose_primes(d)?;
            let verdict = ctx.run_with_primes(d, &list)?;
            let report =
                SieveReport::new(model.level, d, ctx.model_hash().to_string(), list, &verdict);
            emit(out, c.format, &report, SieveReport::text)?;
            Ok(if *expect_contradiction && !verdict.is_contradiction() {
                EXIT_NO_CONTRADICTION
            } else {
                EXIT_OK
            })
        }
        Command::Table { dmax, tmax, .. } => {
            check_bounds(*dmax, *tmax)?;
            let ctx = context(c, &model, None)?;
            let report = TableReport::new(
                compute_dn_report(&ctx, *dmax, *tmax)?,
                model.expected_d.clone(),
            );
            emit(out, c.format, &report, TableReport::text)?;
            Ok(if report.consistent {
                EXIT_OK
            } else {
                EXIT_NO_CONTRADICTION
            })
        }
        Command::Localdata { ell, .. } => {
            let ctx = context(c, &model, None)?;
            let data = ctx.local_data(*ell)?;
            let group_order = model.reduce(*ell)?.curve().count_points();
            emit(
                out,
                c.format,
                &LocalDataReport::new(&data, group_order),
                LocalDataReport::text,
            )?;
            Ok(EXIT_OK)
        }
        Command::FindPoints { tmax, dmax, .. } => {
            check_bounds(*dmax, *tmax)?;
            let ctx = context(c, &model, None)?;
            let candidates = squarefree_fields_below(*dmax);
            let mut jobs: Vec<(i64, Coset)> = (-*tmax..=*tmax)
                .filter(|&t| t != 0)
                .map(|t| (t, Coset::Base))
                .collect();
            if model.has_torsion() {
                jobs.extend((-*tmax..=*tmax).map(|t| (t, Coset::Torsion)));
            }
            let identifications = jobs
                .par_iter()
                .map(|&(t, coset)| {
                    identify_field(&ctx, t, coset, &candidates).map(|fields| Identification {
                        t,
                        coset,
                        fields,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = FindPointsReport {
                schema: SCHEMA,
                command: "find-points",
                level: model.level,
                dmax: *dmax,
                tmax: *tmax,
                identifications,
            };
            emit(out, c.format, &report, FindPointsReport::text)?;
            Ok(EXIT_OK)
        }
        Command::Validate { .. } => unreachable!("handled above"),
    }
}

/// Structural and per-prime checks, reporting every failure found.
fn validate(c: &Common, level: Option<u64>, out: &mut dyn Write) -> Result<i32, Failure> {
    let (text, origin) = model_text(c, level)?;
    let model = CurveModelData::from_json(&text).map_err(|e| Failure(format!("{origin}: {e}")))?;
    check_requested_level(&model, level, &origin)?;
    mwsieve::model::check_level(model.level)?;
    let mut v = mwsieve::ValidationReport {
        failures: mwsieve::model::check_structure(&model),
        ..Default::default()
    };
    if v.failures.is_empty() {
        let primes: Vec<u64> = VALIDATION_PRIMES
            .iter()
            .copied()
            .filter(|&p| !model.is_bad_prime(p))
            .collect();
        v = validate_model(&model, &primes);
    }
    let report = ValidateReport::new(model.level, model.content_hash(), &v);
    emit(out, c.format, &report, ValidateReport::text)?;
    Ok(if report.ok { EXIT_OK } else { EXIT_USAGE })
}

fn check_bounds(dmax: i64, tmax: i64) -> Result<(), Failure> {
    if dmax < 2 || tmax < 1 {
        return Err(Failure(
            "--dmax must be at least 2 and --tmax at least 1".into(),
        ));
    }
    Ok(())
}

//! Curve-model data: ingestion, validation, reduction modulo primes and
//! enumeration of the projected curve `C` over prime fields.
//!
//! A model of `X0(N)` is stored in eliminated form. The diagonal quadric is
//! solved as `x1^2 = q(x2, .., xg)`, and the remaining equations cut out the
//! image `C` of the projection forgetting `x1`. The map `psi` sends `C` to a
//! Weierstrass model of `X0+(N)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{is_prime, Fp};
use crate::branch::extend_map_at;
use crate::ec::{discriminant, on_curve_over_q, CurvePoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::poly::{ReducedPoly, SparsePolynomial};

/// Levels the sieve is designed for.
pub const SUPPORTED_LEVELS: [u64; 8] = [53, 61, 65, 79, 83, 89, 101, 131];

/// Level whose quotient has a rational 2-torsion point.
pub const TORSION_LEVEL: u64 = 65;

/// Primes checked by [`load_model`], before removing divisors of `2N`.
pub const VALIDATION_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveModelData {
    pub level: u64,
    pub genus: usize,
    pub variables: Vec<String>,
    pub q_poly: SparsePolynomial,
    pub c_equations: Vec<SparsePolynomial>,
    pub psi: [SparsePolynomial; 3],
    pub e_coeffs: [BigInt; 5],
    pub generator: [BigInt; 3],
    pub torsion: Option<[BigInt; 3]>,
    /// Optional map from the Weierstrass model back to `C`, in `X, Y, Z`.
    pub inverse_map: Option<Vec<SparsePolynomial>>,
    pub expected_d: Option<Vec<i64>>,
}

/// A point of `P^{g-2}(F_ell)` whose first nonzero coordinate is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint(Vec<u64>);

impl ProjectivePoint {
    /// Normalizes `coords`; `None` when all coordinates vanish.
    pub fn normalize(field: &Fp, coords: &[u64]) -> Option<Self> {
        let lead = coords.iter().copied().find(|&c| c % field.modulus() != 0)?;
        let inv = field.inv(lead)?;
        Some(ProjectivePoint(
            coords
                .iter()
                .map(|&c| field.mul(c % field.modulus(), inv))
                .collect(),
        ))
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(" : "))
    }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Coeff {
    Int(i64),
    Str(String),
}

impl Coeff {
    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            Coeff::Int(v) => Ok(BigInt::from(*v)),
            Coeff::Str(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("bad integer literal {s:?}"))),
        }
    }

    fn from_bigint(v: &BigInt) -> Self {
        match v.to_i64() {
            Some(x) => Coeff::Int(x),
            None => Coeff::Str(v.to_string()),
        }
    }
}

type TermList = Vec<(Coeff, Vec<u32>)>;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "N")]
    level: u64,
    genus: usize,
    variables: Vec<String>,
    q_poly: TermList,
    c_equations: Vec<TermList>,
    psi: Vec<TermList>,
    e_coeffs: Vec<Coeff>,
    generator: Vec<Coeff>,
    torsion: Option<Vec<Coeff>>,
    inverse_map: Option<Vec<TermList>>,
    #[serde(rename = "expected_D")]
    expected_d: Option<Vec<i64>>,
}

fn poly_from_terms(nvars: usize, terms: &TermList, what: &str) -> Result<SparsePolynomial> {
    let parsed = terms
        .iter()
        .map(|(c, e)| Ok((c.to_bigint()?, e.clone())))
        .collect::<Result<Vec<_>>>()?;
    SparsePolynomial::new(nvars, parsed).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn terms_from_poly(p: &SparsePolynomial) -> TermList {
    p.terms()
        .iter()
        .map(|(c, e)| (Coeff::from_bigint(c), e.clone()))
        .collect()
}

fn triple(values: &[Coeff], what: &str) -> Result<[BigInt; 3]> {
    let v = values
        .iter()
        .map(Coeff::to_bigint)
        .collect::<Result<Vec<_>>>()?;
    v.try_into()
        .map_err(|_| Error::Parse(format!("{what} must have three coordinates")))
}

impl CurveModelData {
    /// Parses the JSON model format without mathematical validation.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.genus < 3 {
            return Err(Error::Parse(format!("genus {} is too small", file.genus)));
        }
        let nvars = file.genus - 1;
        if file.variables.len() != nvars {
            return Err(Error::Parse(format!(
                "expected {nvars} variable names, found {}",
                file.variables.len()
            )));
        }
        let q_poly = poly_from_terms(nvars, &file.q_poly, "q_poly")?;
        let c_equations = file
            .c_equations
            .iter()
            .map(|t| poly_from_terms(nvars, t, "c_equations"))
            .collect::<Result<Vec<_>>>()?;
        let psi: [SparsePolynomial; 3] = file
            .psi
            .iter()
            .map(|t| poly_from_terms(nvars, t, "psi"))
            .collect::<Result<Vec<_>>>()?
            .try_into()
            .map_err(|_| Error::Parse("psi must have three components".into()))?;
        let e_coeffs: [BigInt; 5] = file
            .e_coeffs
            .iter()
            .map(Coeff::to_bigint)
            .collect::<Result<Vec<_>>>()?
            .try_into()
            .map_err(|_| Error::Parse("e_coeffs must list a1, a2, a3, a4, a6".into()))?;
        let generator = triple(&file.generator, "generator")?;
        let torsion = file
            .torsion
            .as_deref()
            .map(|t| triple(t, "torsion"))
            .transpose()?;
        let inverse_map = match &file.inverse_map {
            None => None,
            Some(maps) => {
                if maps.len() != nvars {
                    return Err(Error::Parse(format!(
                        "inverse_map must have {nvars} components"
                    )));
                }
                Some(
                    maps.iter()
                        .map(|t| poly_from_terms(3, t, "inverse_map"))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        Ok(CurveModelData {
            level: file.level,
            genus: file.genus,
            variables: file.variables,
            q_poly,
            c_equations,
            psi,
            e_coeffs,
            generator,
            torsion,
            inverse_map,
            expected_d: file.expected_d,
        })
    }

    /// Canonical JSON serialization.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            level: self.level,
            genus: self.genus,
            variables: self.variables.clone(),
            q_poly: terms_from_poly(&self.q_poly),
            c_equations: self.c_equations.iter().map(terms_from_poly).collect(),
            psi: self.psi.iter().map(terms_from_poly).collect(),
            e_coeffs: self.e_coeffs.iter().map(Coeff::from_bigint).collect(),
            generator: self.generator.iter().map(Coeff::from_bigint).collect(),
            torsion: self
                .torsion
                .as_ref()
                .map(|t| t.iter().map(Coeff::from_bigint).collect()),
            inverse_map: self
                .inverse_map
                .as_ref()
                .map(|m| m.iter().map(terms_from_poly).collect()),
            expected_d: self.expected_d.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn has_torsion(&self) -> bool {
        self.torsion.is_some()
    }

    /// Whether `ell` divides `2N`.
    pub fn is_bad_prime(&self, ell: u64) -> bool {
        ell == 2 || self.level.is_multiple_of(ell)
    }

    /// Reduces every part of the model modulo `ell`.
    pub fn reduce(&self, ell: u64) -> Result<ReducedModel> {
        if self.is_bad_prime(ell) {
            return Err(Error::InvalidArgument(format!(
                "{ell} divides 2N = {}",
                2 * self.level
            )));
        }
        let field = Fp::new(ell)?;
        let curve = WeierstrassCurve::new(ell, &self.e_coeffs)?;
        let e_equation = weierstrass_equation(&self.e_coeffs).reduce(&field);
        Ok(ReducedModel {
            field,
            q: self.q_poly.reduce(&field),
            c: self.c_equations.iter().map(|p| p.reduce(&field)).collect(),
            psi: self.psi.iter().map(|p| p.reduce(&field)).collect(),
            inverse: self
                .inverse_map
                .as_ref()
                .map(|m| m.iter().map(|p| p.reduce(&field)).collect()),
            e_equation,
            curve,
            nvars: self.genus - 1,
        })
    }
}

/// `Y^2 Z + a1 XYZ + a3 YZ^2 - X^3 - a2 X^2 Z - a4 XZ^2 - a6 Z^3`.
fn weierstrass_equation(a: &[BigInt; 5]) -> SparsePolynomial {
    let [a1, a2, a3, a4, a6] = a.clone();
    SparsePolynomial::new(
        3,
        vec![
            (BigInt::from(1), vec![0, 2, 1]),
            (a1, vec![1, 1, 1]),
            (a3, vec![0, 1, 2]),
            (BigInt::from(-1), vec![3, 0, 0]),
            (-a2, vec![2, 0, 1]),
            (-a4, vec![1, 0, 2]),
            (-a6, vec![0, 0, 3]),
        ],
    )
    .expect("three variables")
}

// ---------------------------------------------------------------------------
// Per-prime view

/// Image of a point of `C` under `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiImage {
    Point(CurvePoint),
    /// `psi` vanishes at the point and could not be extended there.
    Unresolved,
}

/// A model reduced modulo one prime.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    field: Fp,
    q: ReducedPoly,
    c: Vec<ReducedPoly>,
    psi: Vec<ReducedPoly>,
    inverse: Option<Vec<ReducedPoly>>,
    e_equation: ReducedPoly,
    curve: WeierstrassCurve,
    nvars: usize,
}

impl ReducedModel {
    pub fn field(&self) -> &Fp {
        &self.field
    }

    pub fn curve(&self) -> &WeierstrassCurve {
        &self.curve
    }

    pub fn has_inverse_map(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn q_value(&self, p: &ProjectivePoint) -> u64 {
        self.q.eval(p.coords())
    }

    pub fn on_c(&self, coords: &[u64]) -> bool {
        self.c.iter().all(|e| e.eval(coords) == 0)
    }

    /// `psi(p)`, extending along the curve where the components all vanish.
    /// Errors when the image is off the Weierstrass curve.
    pub fn psi_image(&self, p: &ProjectivePoint) -> Result<PsiImage> {
        let mut coords: Vec<u64> = self.psi.iter().map(|c| c.eval(p.coords())).collect();
        if coords.iter().all(|&c| c == 0) {
            match extend_map_at(&self.field, &self.c, &self.psi, p.coords()) {
                Some(v) => coords = v,
                None => return Ok(PsiImage::Unresolved),
            }
        }
        let image = self
            .curve
            .point_from_projective([coords[0], coords[1], coords[2]])
            .map_err(|_| Error::Validation {
                check: "psi image off-curve".into(),
                prime: Some(self.field.modulus()),
            })?;
        Ok(PsiImage::Point(image))
    }

    /// Preimage on `C` of a point of the Weierstrass curve through the
    /// optional inverse map, if the map is present and defined there.
    pub fn inverse_image(&self, e: &CurvePoint) -> Option<ProjectivePoint> {
        let maps = self.inverse.as_ref()?;
        let xyz = match *e {
            CurvePoint::Infinity => [0, 1, 0],
            CurvePoint::Affine(x, y) => [x, y, 1],
        };
        let mut coords: Vec<u64> = maps.iter().map(|m| m.eval(&xyz)).collect();
        if coords.iter().all(|&c| c == 0) {
            coords = extend_map_at(
                &self.field,
                std::slice::from_ref(&self.e_equation),
                maps,
                &xyz,
            )?;
        }
        let p = ProjectivePoint::normalize(&self.field, &coords)?;
        self.on_c(p.coords()).then_some(p)
    }

    /// All points of `C(F_ell)`, each once, ordered by affine patch.
    pub fn enumerate_c_points(&self) -> Vec<ProjectivePoint> {
        let ell = self.field.modulus();
        let n = self.nvars;
        let f = &self.field;
        let mut out = Vec::new();
        let mut coeffs = Vec::new();
        for lead in 0..n {
            let mut coords = vec![0u64; n];
            coords[lead] = 1;
            if lead == n - 1 {
                if self.on_c(&coords) {
                    out.push(ProjectivePoint(coords));
                }
                continue;
            }
            // Free coordinates lead+1 .. n-1; the last one is solved by a scan
            // of the first equation restricted to a line.
            let free_prefix = n - lead - 2;
            let total = (ell as usize).pow(free_prefix as u32);
            for idx in 0..total {
                let mut rem = idx as u64;
                for v in (lead + 1..n - 1).rev() {
                    coords[v] = rem % ell;
                    rem /= ell;
                }
                match self.c.first() {
                    None => {
                        for x in 0..ell {
                            coords[n - 1] = x;
                            out.push(ProjectivePoint(coords.clone()));
                        }
                    }
                    Some(first) => {
                        first.univariate_in_last(&coords[..n - 1], &mut coeffs);
                        for x in 0..ell {
                            let v = coeffs
                                .iter()
                                .rev()
                                .fold(0, |acc, &c| f.add(f.mul(acc, x), c));
                            if v != 0 {
                                continue;
                            }
                            coords[n - 1] = x;
                            if self.c[1..].iter().all(|e| e.eval(&coords) == 0) {
                                out.push(ProjectivePoint(coords.clone()));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Convenience wrapper over [`ReducedModel::enumerate_c_points`].
pub fn enumerate_c_points(model: &CurveModelData, ell: u64) -> Result<Vec<ProjectivePoint>> {
    Ok(model.reduce(ell)?.enumerate_c_points())
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationFailure {
    pub check: String,
    pub prime: Option<u64>,
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prime {
            Some(p) => write!(f, "{} at prime {p}", self.check),
            None => f.write_str(&self.check),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<ValidationFailure>,
    /// Primes where `psi` could not be evaluated at some point of `C`.
    pub unusable_primes: Vec<u64>,
    /// Number of points of `C(F_ell)` checked per prime.
    pub point_counts: Vec<(u64, usize)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Structural checks over Q, independent of any prime.
pub fn check_structure(model: &CurveModelData) -> Vec<ValidationFailure> {
    let mut failures = Vec::new();
    let mut fail = |check: &str| {
        failures.push(ValidationFailure {
            check: check.to_string(),
            prime: None,
        })
    };
    if discriminant(&model.e_coeffs).is_zero() {
        fail("singular Weierstrass model");
    }
    if !model.q_poly.is_homogeneous() || model.q_poly.degree() != 2 {
        fail("q_poly is not a quadratic form");
    }
    if model
        .c_equations
        .iter()
        .any(|e| !e.is_homogeneous() || e.is_zero())
    {
        fail("c_equations must be nonzero homogeneous polynomials");
    }
    let degs: Vec<u32> = model
        .psi
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| p.degree())
        .collect();
    if model.psi.iter().any(|p| !p.is_homogeneous()) || degs.windows(2).any(|w| w[0] != w[1]) {
        fail("psi components must be homogeneous of one degree");
    }
    if !on_curve_over_q(&model.e_coeffs, &model.generator) {
        fail("generator off-curve");
    }
    match &model.torsion {
        None if model.level == TORSION_LEVEL => fail("torsion required for N = 65"),
        None => {}
        Some(t) => {
            let [a1, _, a3, _, _] = &model.e_coeffs;
            let [x, y, z] = t;
            if !on_curve_over_q(&model.e_coeffs, t) {
                fail("torsion point off-curve");
            } else if z.is_zero() || !(BigInt::from(2) * y + a1 * x + a3 * z).is_zero() {
                fail("torsion not 2-torsion");
            }
        }
    }
    failures
}

/// Checks the model modulo each prime in `primes`.
pub fn validate_model(model: &CurveModelData, primes: &[u64]) -> ValidationReport {
    let mut report = ValidationReport::default();
    for &ell in primes {
        let fail = |check: &str| ValidationFailure {
            check: check.to_string(),
            prime: Some(ell),
        };
        if !is_prime(ell) || model.is_bad_prime(ell) {
            report
                .failures
                .push(fail("prime divides 2N or is not an odd prime"));
            continue;
        }
        let reduced = match model.reduce(ell) {
            Ok(r) => r,
            Err(_) => {
                report
                    .failures
                    .push(fail("bad reduction of the Weierstrass model"));
                continue;
            }
        };
        let curve = reduced.curve();
        if curve.reduce_point(&model.generator).is_err() {
            report.failures.push(fail("generator off-curve"));
        }
        if let Some(t) = &model.torsion {
            match curve.reduce_point(t) {
                Ok(q) if curve.mul_unchecked(2, &q) == CurvePoint::Infinity => {}
                _ => report.failures.push(fail("torsion not 2-torsion")),
            }
        }
        let points = reduced.enumerate_c_points();
        report.point_counts.push((ell, points.len()));
        let mut unusable = false;
        for p in &points {
            match reduced.psi_image(p) {
                Ok(PsiImage::Point(_)) => {}
                Ok(PsiImage::Unresolved) => unusable = true,
                Err(_) => {
                    report.failures.push(fail("psi image off-curve"));
                    break;
                }
            }
        }
        if unusable {
            report.unusable_primes.push(ell);
        }
    }
    report
}

/// Parses and fully validates a model file.
pub fn load_model(text: &str) -> Result<CurveModelData> {
    let model = CurveModelData::from_json(text)?;
    check_level(model.level)?;
    if let Some(f) = check_structure(&model).into_iter().next() {
        return Err(Error::Validation {
            check: f.check,
            prime: f.prime,
        });
    }
    let primes: Vec<u64> = VALIDATION_PRIMES
        .iter()
        .copied()
        .filter(|&p| !model.is_bad_prime(p))
        .collect();
    let report = validate_model(&model, &primes);
    if let Some(f) = report.failures.into_iter().next() {
        return Err(Error::Validation {
            check: f.check,
            prime: f.prime,
        });
    }
    if !report.unusable_primes.is_empty() {
        log::warn!(
            "level {}: psi cannot be evaluated everywhere on C at primes {:?}",
            model.level,
            report.unusable_primes
        );
    }
    Ok(model)
}

/// Rejects the levels where the sieve is known not to apply.
pub fn check_level(level: u64) -> Result<()> {
    match level {
        37 => Err(Error::UnsupportedLevel(
            37,
            "X0(37) is hyperelliptic, so quadratic points do not all come from the quotient".into(),
        )),
        43 => Err(Error::UnsupportedLevel(
            43,
            "X0(43) has a non-cuspidal rational point fixed by the Atkin-Lehner involution".into(),
        )),
        _ => Ok(()),
    }
}

/// Model files compiled into the library.
pub fn builtin_model_text(level: u64) -> Option<&'static str> {
    match level {
        53 => Some(include_str!("../data/x0_53.json")),
        _ => None,
    }
}

pub fn builtin_model(level: u64) -> Option<Result<CurveModelData>> {
    builtin_model_text(level).map(load_model)
}

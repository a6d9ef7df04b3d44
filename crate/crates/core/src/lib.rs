//! A Mordell-Weil sieve for quadratic points on the bielliptic modular
//! curves `X0(N)` whose quotient `X0+(N)` is an elliptic curve of rank one.
//!
//! Given a model of `X0(N)` on which the Atkin-Lehner involution acts by
//! `x1 -> -x1`, the sieve decides for a quadratic field `Q(sqrt(d))` whether
//! any quadratic point over it can exist, by constraining the index `m` with
//! `psi(P) = m R` prime by prime.

pub mod arith;
pub mod branch;
pub mod ec;
pub mod error;
pub mod model;
pub mod poly;
pub mod quadpoint;
pub mod sieve;

pub use arith::{legendre_symbol, splitting_type, squarefree_part, SplittingType};
pub use ec::{CurvePoint, WeierstrassCurve};
pub use error::{Error, Result};
pub use model::{
    builtin_model, enumerate_c_points, load_model, validate_model, CurveModelData, ProjectivePoint,
    ValidationReport,
};
pub use poly::SparsePolynomial;
pub use quadpoint::{
    compute_dn, compute_dn_report, fiber_square_class, identify_field, SquareClass,
};
pub use sieve::{
    classify_fiber, compute_local_data, run_sieve, run_sieve_with_torsion, Coset, FiberCase,
    LocalData, LocalStore, ResidueSet, SieveConfig, SieveContext, TraceStep, Verdict,
};

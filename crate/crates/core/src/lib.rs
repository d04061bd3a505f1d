//! Numerical laboratory for multilinear fractional maximal and integral
//! operators on dyadic grids of the unit torus.
//!
//! - [`grid`]: exact calculus for piecewise-constant functions, cube families.
//! - [`operators`]: maximal, strong maximal and potential operators.
//! - [`weights`]: weight-class constants as suprema over cube families.
//! - [`verify`]: empirical norm estimates, extremal constructions, suites.
//! - [`config`]: experiment configuration and weight generators.

pub mod config;
pub mod error;
pub mod grid;
pub mod operators;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{
    average, enumerate, integrate, lp_norm, translate, weak_lq_norm, Cube, CubeFamily, DyadicCube,
    ExponentConfig, GridFunction, ProductFamily,
};
pub use operators::{DistanceMode, OperatorKind, OperatorSpec, Quadrature};
pub use verify::{SuiteResult, TestFunctionFamily, Verdict};
pub use weights::{ConditionReport, WeightSystem};

/// Pretty JSON with lexicographically sorted keys and a trailing newline.
pub fn canonical_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

use num_complex::Complex64;
use thiserror::Error;

use crate::koenigs::FixedPointClass;

pub type Result<T> = std::result::Result<T, GermError>;

/// Errors shared by every numerical kernel in the crate.
#[derive(Debug, Error)]
pub enum GermError {
    #[error("point {z} lies outside the validity radius {radius}")]
    OutsideDomain { z: Complex64, radius: f64 },

    #[error("denominator vanished while evaluating near {z}")]
    DenominatorVanished { z: Complex64 },

    #[error("orbit left the validity radius at step {step}")]
    OrbitEscape { step: usize },

    #[error("{context}: no convergence after {steps} steps (last delta {last_delta:.3e})")]
    NoConvergence {
        context: &'static str,
        steps: usize,
        last_delta: f64,
    },

    #[error("derivative vanished near {z}; cannot take a Newton step")]
    DerivativeVanished { z: Complex64 },

    #[error("map is not complex-analytic; use the Wirtinger estimator instead")]
    NotAnalytic,

    #[error("{invalid} of {total} grid nodes were invalid (more than 1%)")]
    TooManyInvalidNodes { invalid: usize, total: usize },

    #[error("query point {t:.3e} exceeds the sampled range (max {t_max:.3e})")]
    ExtrapolationNeeded { t: f64, t_max: f64 },

    #[error("degenerate input: {what}")]
    DegenerateInput { what: &'static str },

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("power-law fit failed: {why}")]
    FitFailed { why: &'static str },

    #[error("expected a {expected} fixed point, found {found}")]
    WrongClass {
        expected: FixedPointClass,
        found: FixedPointClass,
    },

    #[error("control condition violated: |f^n(z)/(lambda^n z)| = {ratio:.3e} at n = {step}")]
    ControlViolated { ratio: f64, step: usize },

    #[error("continuity breach of {mismatch:.3e} across the ring at |z| = {radius:.6e}")]
    ContinuityBreach { radius: f64, mismatch: f64 },

    #[error("branch ambiguity: {what}")]
    BranchAmbiguity { what: &'static str },

    #[error("coordinate grids do not match: {why}")]
    GridMismatch { why: &'static str },

    #[error("leading coefficient modulus {modulus:.3e} is numerically zero")]
    DegenerateLeading { modulus: f64 },

    #[error("non-crossing bound violated: |h(c,z)| = {value:.6e} against r = {r:.6e}")]
    NonCrossingViolated { value: f64, r: f64 },

    #[error("boundary values stray from the identity: |h/z - 1| = {deviation:.3e}")]
    BranchFailure { deviation: f64 },

    #[error("grid is not inside the immediate basin: |g(z)| >= |z| at z = {z}")]
    OutsideBasin { z: Complex64 },

    #[error("invalid configuration: {what}")]
    InvalidConfig { what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

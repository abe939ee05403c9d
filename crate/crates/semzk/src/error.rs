//! Crate-wide error type.
//!
//! Errors are split into two classes so callers (in particular the CLI)
//! can map them onto distinct exit codes: configuration / precondition
//! failures versus numerical failures detected at run time (NaN, overflow
//! guards).

use thiserror::Error;

/// How an error should be classified by a caller that reports failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: sizes, parameter ranges, support conditions.
    Validation,
    /// The computation itself failed: NaN, overflow guard tripped.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid sizes must be even and >= 8, got {nx}x{ny}")]
    BadGridSize { nx: usize, ny: usize },

    #[error("domain lengths must be positive, got {lx}x{ly}")]
    BadDomainLength { lx: f64, ly: f64 },

    #[error("non-finite value in input field")]
    NonFinite,

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("exponent p must satisfy 1 < p < inf, got {0}")]
    BadExponent(f64),

    #[error("weight must be strictly positive everywhere")]
    NonPositiveWeight,

    #[error("ball family is empty")]
    EmptyBallFamily,

    #[error("search budget must be >= 1")]
    EmptyBudget,

    #[error("time step dt={dt} exceeds stability heuristic {limit} (set override to force)")]
    UnstableDt { dt: f64, limit: f64 },

    #[error("invalid solver config: {0}")]
    BadSolverConfig(String),

    #[error("model {0} is residual-only and cannot be time-integrated")]
    ResidualOnlyModel(&'static str),

    #[error("NaN detected at step {step} (max |u| = {max_abs})")]
    NanDetected { step: usize, max_abs: f64 },

    #[error("invariant {name} drifted by {drift:.3e} (tolerance {tol:.3e}) at t={t}")]
    InvariantDrift {
        name: &'static str,
        drift: f64,
        tol: f64,
        t: f64,
    },

    #[error("trajectories have mismatched grids or time ladders")]
    TrajectoryMismatch,

    #[error("need at least {need} snapshots, got {got}")]
    TooFewSnapshots { need: usize, got: usize },

    #[error("alpha below admissibility")]
    AlphaBelowAdmissibility { alpha: f64, required: f64 },

    #[error("R must be > 1, got {0}")]
    RadiusTooSmall(f64),

    #[error("time margin r must lie in (0, 1/2), got {0}")]
    BadTimeMargin(f64),

    #[error("support violation at (x, t) = ({x}, {t}): |x/R + phi(t)| = {value} < 1")]
    SupportViolation { x: f64, t: f64, value: f64 },

    #[error("cutoff requires N > 28 R, got N = {n}, R = {r}")]
    CutoffRangeTooSmall { n: f64, r: f64 },

    #[error("theta must lie in [0, 1], got {0}")]
    BadTheta(f64),

    #[error("Bessel order k must lie in 1..=4, got {0}")]
    BadBesselOrder(i32),

    #[error("field does not decay before the torus boundary (boundary max {0:.3e})")]
    NoBoundaryDecay(f64),

    #[error("weighted field overflows: exponent {exponent:.1} exceeds cap {cap}")]
    OverflowGuard { exponent: f64, cap: f64 },

    #[error("annulus R = {r} exceeds the domain (max usable {max})")]
    AnnulusOutsideDomain { r: f64, max: f64 },

    #[error("radii must be ascending and positive")]
    BadRadii,

    #[error("need at least 3 positive annulus values to fit, got {0}")]
    TooFewFitPoints(usize),
}

impl Error {
    /// Exit-code class for CLI reporting.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NanDetected { .. }
            | Error::OverflowGuard { .. }
            | Error::InvariantDrift { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

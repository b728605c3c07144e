//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by geometry, solvers and the experiment pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Metric |df/dsigma| fell below the degeneracy threshold.
    #[error("degenerate curve: metric {metric:.3e} below {threshold:.1e} at sigma = {sigma:.6}")]
    DegenerateCurve {
        sigma: f64,
        metric: f64,
        threshold: f64,
    },

    /// Contact angle outside (0, pi).
    #[error("invalid contact angle {0} (must lie in (0, pi))")]
    InvalidAngle(f64),

    /// Endpoint tangents do not match the requested contact angle.
    #[error("endpoint tangent mismatch: {0}")]
    AngleMismatch(String),

    /// Curve endpoints are not on the supporting line.
    #[error("endpoints off axis: |y| = {0:.3e} exceeds tolerance")]
    EndpointsOffAxis(f64),

    /// Initial curve rejected by the flow; names the violated condition.
    #[error("incompatible initial curve: {0}")]
    IncompatibleInitialCurve(String),

    /// Time step collapsed below `dt_min`; candidate blow-up.
    #[error("step failure at t = {t:.6e}: dt = {dt:.3e} fell below dt_min = {dt_min:.3e}")]
    StepFailure { t: f64, dt: f64, dt_min: f64 },

    /// Banded linear system was singular or produced non-finite values.
    #[error("linear solve failure: {0}")]
    LinearSolveFailure(String),

    /// Not enough samples for the requested operation.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// Norm specification violates its own invariants.
    #[error("invalid norm specification: {0}")]
    InvalidSpec(String),

    /// Point left the tubular chart domain.
    #[error("outside tube at sigma = {sigma:.6}: |q| = {q:.4e} >= {limit:.4e}")]
    OutsideTube { sigma: f64, q: f64, limit: f64 },

    /// Height extraction lost injectivity of the reparametrization.
    #[error("non-monotone reparametrization at sigma = {sigma:.6}")]
    NonMonotone { sigma: f64 },

    /// Newton iteration failed to converge during height extraction.
    #[error("newton divergence at sigma = {sigma:.6} (residual {residual:.3e})")]
    NewtonDivergence { sigma: f64, residual: f64 },

    /// Epsilon scan exhausted without an admissible reference curve.
    #[error("no admissible epsilon in scan ({0} candidates tried)")]
    NoAdmissibleEpsilon(usize),

    /// File input/output failure.
    #[error("io failure: {0}")]
    IoFailure(#[from] std::io::Error),

    /// Malformed input file.
    #[error("parse failure: {0}")]
    ParseFailure(String),
}

use thiserror::Error;

/// Errors raised while evaluating geometry on an immersion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid space form factor: {0}")]
    InvalidFactor(String),

    #[error("point is off the ambient product (constraint residual {residual:e} > {tolerance:e})")]
    OffManifold { residual: f64, tolerance: f64 },

    #[error("vector is not tangent to the ambient product (normal component {component:e})")]
    NotTangent { component: f64 },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("stencil leaves the chart on axis {axis}: {value} not in [{lo}, {hi}]")]
    OutsideChart {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("immersion callback produced a non-finite value at {at:?}")]
    Evaluation { at: Vec<f64> },

    #[error("degenerate immersion: metric eigenvalues [{min_eig:e}, {max_eig:e}]")]
    DegenerateImmersion { min_eig: f64, max_eig: f64 },

    #[error("codimension too small: dim M = {domain_dim}, dim Q = {ambient_dim}")]
    Codimension {
        domain_dim: usize,
        ambient_dim: usize,
    },

    #[error("normal field lost continuity on the stencil (norm ratio {ratio:.3})")]
    FrameContinuity { ratio: f64 },

    #[error("complex structure incompatible with the metric (residual {residual:e})")]
    KahlerIncompatible { residual: f64 },

    #[error("immersion is not minimal at the sample (|H| = {mean_curvature:e})")]
    NotMinimal { mean_curvature: f64 },

    #[error("wrong target: {0}")]
    WrongTarget(String),

    #[error("all {count} samples failed; first error: {first}")]
    AllSamplesFailed { count: usize, first: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;

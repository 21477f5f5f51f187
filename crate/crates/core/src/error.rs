use thiserror::Error;

use crate::geometry::CertificateReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("unbounded polytope: recession direction {direction:?}")]
    UnboundedPolytope { direction: Vec<f64> },

    #[error("vertex enumeration failed: {0}")]
    VertexEnumeration(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("origin is not an interior point of the domain (signed distance {signed_distance})")]
    OriginNotInterior { signed_distance: f64 },

    #[error("mesh size {mesh_size} too coarse: at most {required} needed (8 cells across the slab diameter)")]
    MeshTooCoarse { mesh_size: f64, required: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("field does not live on the expected grid")]
    GridMismatch,

    #[error("coincident points in Green's function evaluation")]
    CoincidentPoints,

    #[error("point outside the open unit ball (|x| = {0})")]
    OutsideUnitBall(f64),

    #[error("quadrature failed: achieved relative error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("coefficient {name} exceeds its certified bound: sampled sup {sampled} > {bound}")]
    CoefficientBound {
        name: &'static str,
        sampled: f64,
        bound: f64,
    },

    #[error("admissibility certificate failed ({})", .0.describe_failure())]
    CertificateFailed(Box<CertificateReport>),

    #[error(
        "|curvature|·exp(2c) = {value} exceeds the rescaling bound 1/4 \
         (need |curvature| <= exp(-2c)/4 = {limit})"
    )]
    RescalingBound { value: f64, limit: f64 },

    #[error("deformation at scale {scale} is not admissible; largest admissible scale is about {suggested:?}")]
    DeformNotAdmissible { scale: f64, suggested: Option<f64> },

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by body construction, quadrature, normalization and the
/// inequality checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A vertex list or radial table is not invariant under `x -> -x`.
    #[error("body is not centrally symmetric: {0}")]
    NotSymmetric(String),
    /// Vertices are affinely dependent, a semi-axis vanishes, or a matrix is
    /// not positive definite.
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    /// The origin is not an interior point of the body.
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    /// A direction argument was the zero vector.
    #[error("zero vector passed where a direction was required")]
    ZeroVector,
    /// A point handed to the boundary map is not on the boundary.
    #[error("point is not on the boundary (gauge = {0})")]
    NotOnBoundary(f64),
    /// A linear map is not invertible.
    #[error("linear map is singular (det = {0})")]
    SingularMap(f64),
    /// Grid sizes outside the supported range or not octant aligned.
    #[error("bad grid size {0}x{1}: sizes must be even, in [8, 4096], with n_beta divisible by 4")]
    BadGridSize(usize, usize),
    /// A scalar parameter is outside its admissible range.
    #[error("bad parameter: {0}")]
    BadParameter(String),
    /// Too many quadrature nodes sit on a polar piece boundary.
    #[error("polar piece classification unstable: {0} of {1} nodes on a piece boundary")]
    ClassificationUnstable(usize, usize),
    /// An iterative method did not reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
    /// The field (G, H) vanishes on the winding contour.
    #[error("field vanishes on the contour (|(G,H)| = {0})")]
    NotGeneric(f64),
    /// The zero finder exhausted its subdivision budget.
    #[error("no zero of (F, G, H) found: {0}")]
    NoZeroFound(String),
    /// Two points handed to the planar dual-vertex solve are collinear with the origin.
    #[error("points are collinear with the origin")]
    CollinearPoints,
    /// Three points handed to the spatial dual-vertex solve are linearly dependent.
    #[error("face points are linearly dependent")]
    SingularFace,
    /// A polygon handed to the planar verifier is not in normalized position.
    #[error("polygon is not normalized: {0}")]
    NotNormalized(String),
    /// A test point left its body by more than the tolerance.
    #[error("test point membership violated: {0}")]
    MembershipViolated(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

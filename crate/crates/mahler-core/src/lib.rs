//! Numerical convex geometry around the Mahler volume product of centrally
//! symmetric bodies in dimensions two and three.

pub mod body;
pub mod bound2d;
pub mod bound3d;
pub mod error;
pub mod normalize;
mod pieces;
pub mod polygon;
pub mod quadrature;
pub mod random;

pub use body::{ConvexBody3, Direction, LinearMap3, Mat3, Vec3};
pub use error::{Error, Result};
pub use polygon::Polygon;

/// Double-precision polygon.
pub type Polygon2 = Polygon<f64>;
/// Exact rational polygon.
pub type ExactPolygon2 = Polygon<num_rational::BigRational>;

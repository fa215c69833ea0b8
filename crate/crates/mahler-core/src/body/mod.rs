//! Centrally symmetric convex bodies with gauge, radial, support and boundary-map evaluators.
//!
//! For a body `K` with the origin inside, the gauge is
//! `mu(x) = min{l >= 0 : x in l K}`, the radial function is `rho = 1 / mu`
//! and the support function is `h(u) = max_{x in K} u . x`.  The polar body
//! `K° = {y : y . x <= 1 for all x in K}` has radial function `1 / h`.  The
//! boundary map `Lambda = grad(mu^2 / 2)` sends a boundary point `x` of `K` to
//! the boundary point of `K°` whose outer normal is parallel to `x`.

mod polytope;
mod radial;

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

pub use polytope::{Facet, Polytope};
pub(crate) use polytope::{clip_ring, convex_hull3, ring_cone_volume};
pub use radial::RadialField;

/// Column vector in space.
pub type Vec3 = Vector3<f64>;
/// Real 3x3 matrix.
pub type Mat3 = Matrix3<f64>;

/// Spherical coordinates `P(alpha, beta) = (cos a, sin a cos b, sin a sin b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    /// Angle from the positive `x` axis, in `[0, pi]`.
    pub alpha: f64,
    /// Angle in the `yz` plane measured from `+y` towards `+z`, in `[0, 2 pi)`.
    pub beta: f64,
}

impl Direction {
    /// Direction with the given angles.
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Unit vector `P(alpha, beta)`.
    pub fn to_vec(&self) -> Vec3 {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        Vec3::new(ca, sa * cb, sa * sb)
    }

    /// Angles of a nonzero vector.
    pub fn from_vec(v: &Vec3) -> Self {
        let r = v.norm();
        let alpha = (v.x / r).clamp(-1.0, 1.0).acos();
        let mut beta = v.z.atan2(v.y);
        if beta < 0.0 {
            beta += 2.0 * PI;
        }
        Self { alpha, beta }
    }
}

/// Invertible linear map of space with cached inverse and determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap3 {
    matrix: Mat3,
    inverse: Mat3,
    det: f64,
}

impl LinearMap3 {
    /// Wraps `matrix`, failing when it is numerically singular.
    pub fn new(matrix: Mat3) -> Result<Self> {
        let det = matrix.determinant();
        if !det.is_finite() || det.abs() <= 1e-12 {
            return Err(Error::SingularMap(det));
        }
        let inverse = matrix.try_inverse().ok_or(Error::SingularMap(det))?;
        Ok(Self { matrix, inverse, det })
    }

    /// Builds a map from row-major entries.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Mat3::from_fn(|i, j| rows[i][j]))
    }

    /// Identity map.
    pub fn identity() -> Self {
        Self { matrix: Mat3::identity(), inverse: Mat3::identity(), det: 1.0 }
    }

    /// Diagonal map.
    pub fn diagonal(d: [f64; 3]) -> Result<Self> {
        Self::new(Mat3::from_diagonal(&Vec3::new(d[0], d[1], d[2])))
    }

    /// Matrix of the map.
    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    /// Matrix of the inverse map.
    pub fn inverse(&self) -> &Mat3 {
        &self.inverse
    }

    /// Determinant.
    pub fn det(&self) -> f64 {
        self.det
    }

    /// Row-major entries.
    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.matrix;
        [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
    }

    /// Applies the map to a vector.
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.matrix * v
    }

    /// Applies the inverse map to a vector.
    pub fn apply_inverse(&self, v: &Vec3) -> Vec3 {
        self.inverse * v
    }

    /// The composition `self ∘ other`.
    pub fn compose(&self, other: &LinearMap3) -> LinearMap3 {
        LinearMap3 {
            matrix: self.matrix * other.matrix,
            inverse: other.inverse * self.inverse,
            det: self.det * other.det,
        }
    }

    /// The map `A^{-T}`, which carries polars: `(A K)° = A^{-T} K°`.
    pub fn inverse_transpose(&self) -> LinearMap3 {
        LinearMap3 { matrix: self.inverse.transpose(), inverse: self.matrix.transpose(), det: 1.0 / self.det }
    }
}

/// The unit ball of a weighted `l_p` norm: `sum |x_i / a_i|^p <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpBall {
    p: f64,
    axes: [f64; 3],
}

fn p_norm(z: [f64; 3], p: f64) -> f64 {
    let m = z.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let even = p.fract() == 0.0 && p <= 32.0 && (p as i32) % 2 == 0;
    let s: f64 = if even {
        z.iter().map(|c| (c / m).powi(p as i32)).sum()
    } else {
        z.iter().map(|c| (c.abs() / m).powf(p)).sum()
    };
    m * s.powf(1.0 / p)
}

impl LpBall {
    /// Ball with exponent `p > 1` and positive semi-axes.
    pub fn new(p: f64, axes: [f64; 3]) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::BadParameter(format!("exponent p = {p} must lie in (1, inf)")));
        }
        if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::DegenerateBody(format!("semi-axes {axes:?} must be positive")));
        }
        Ok(Self { p, axes })
    }

    /// Exponent.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Semi-axes.
    pub fn axes(&self) -> [f64; 3] {
        self.axes
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn gauge(&self, x: &Vec3) -> f64 {
        p_norm([x.x / self.axes[0], x.y / self.axes[1], x.z / self.axes[2]], self.p)
    }

    fn support(&self, u: &Vec3) -> f64 {
        p_norm([u.x * self.axes[0], u.y * self.axes[1], u.z * self.axes[2]], self.conjugate())
    }

    fn lambda(&self, x: &Vec3) -> Vec3 {
        let mu = self.gauge(x);
        let comp = |c: f64, a: f64| {
            let y = c / a;
            mu * (y.abs() / mu).powf(self.p - 1.0) * y.signum() / a
        };
        Vec3::new(comp(x.x, self.axes[0]), comp(x.y, self.axes[1]), comp(x.z, self.axes[2]))
    }

    fn volume(&self) -> f64 {
        let g = gamma(1.0 + 1.0 / self.p);
        8.0 * self.axes.iter().product::<f64>() * g * g * g / gamma(1.0 + 3.0 / self.p)
    }

    fn polar(&self) -> LpBall {
        LpBall { p: self.conjugate(), axes: self.axes.map(|a| 1.0 / a) }
    }
}

/// The ellipsoid `x . M x <= 1` for a symmetric positive-definite `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    matrix: Mat3,
    inverse: Mat3,
}

impl Ellipsoid {
    /// Ellipsoid of a symmetric positive-definite matrix.
    pub fn new(matrix: Mat3) -> Result<Self> {
        let scale = matrix.abs().max();
        if !(matrix - matrix.transpose()).iter().all(|c| c.abs() <= 1e-12 * scale) {
            return Err(Error::DegenerateBody("ellipsoid matrix is not symmetric".into()));
        }
        let sym = (matrix + matrix.transpose()) * 0.5;
        if sym.cholesky().is_none() {
            return Err(Error::DegenerateBody("ellipsoid matrix is not positive definite".into()));
        }
        let inverse = sym.try_inverse().ok_or_else(|| Error::DegenerateBody("singular matrix".into()))?;
        Ok(Self { matrix: sym, inverse })
    }

    /// Ellipsoid with the given semi-axes along the coordinate axes.
    pub fn from_semi_axes(axes: [f64; 3]) -> Result<Self> {
        if axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::DegenerateBody(format!("semi-axes {axes:?} must be positive")));
        }
        Self::new(Mat3::from_diagonal(&Vec3::new(
            1.0 / (axes[0] * axes[0]),
            1.0 / (axes[1] * axes[1]),
            1.0 / (axes[2] * axes[2]),
        )))
    }

    /// Defining matrix.
    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    fn gauge(&self, x: &Vec3) -> f64 {
        x.dot(&(self.matrix * x)).max(0.0).sqrt()
    }

    fn support(&self, u: &Vec3) -> f64 {
        u.dot(&(self.inverse * u)).max(0.0).sqrt()
    }
}

/// The concrete description of a body.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Symmetric polytope in vertex and facet form.
    Polytope(Polytope),
    /// Weighted `l_p` ball.
    LpBall(LpBall),
    /// Ellipsoid `x . M x <= 1`.
    Ellipsoid(Ellipsoid),
    /// Tabulated radial function.
    Radial(RadialField),
    /// Linear image `A K` of a base body that is itself not a polytope.
    Transformed(Box<ConvexBody3>, LinearMap3),
}

/// Input description accepted by [`make_body`].
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    /// Vertex list closed under negation (non-extreme points are discarded).
    Polytope {
        /// Points whose convex hull is the body.
        vertices: Vec<[f64; 3]>,
    },
    /// Weighted `l_p` ball.
    LpBall {
        /// Exponent in `(1, inf)`.
        p: f64,
        /// Semi-axes.
        axes: [f64; 3],
    },
    /// Ellipsoid `x . M x <= 1`.
    Ellipsoid {
        /// Symmetric positive-definite matrix, row-major.
        matrix: [[f64; 3]; 3],
    },
    /// Radial table on the nodes of `make_grid(n_alpha, n_beta)`.
    Radial {
        /// Number of `alpha` rings.
        n_alpha: usize,
        /// Number of `beta` nodes per ring.
        n_beta: usize,
        /// Values ring by ring.
        rho: Vec<f64>,
    },
    /// Linear image of another body.
    Transformed {
        /// The body being mapped.
        base: Box<BodySpec>,
        /// Row-major matrix of the map.
        matrix: [[f64; 3]; 3],
    },
}

/// A centrally symmetric convex body together with a free-text provenance label.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody3 {
    repr: Representation,
    label: String,
}

impl ConvexBody3 {
    /// Wraps a representation.
    pub fn new(repr: Representation, label: impl Into<String>) -> Self {
        Self { repr, label: label.into() }
    }

    /// Cube `[-1, 1]^3`.
    pub fn cube() -> Self {
        let mut v = Vec::new();
        for s in 0..8 {
            let c = |b: i32| if s & (1 << b) == 0 { 1.0 } else { -1.0 };
            v.push([c(0), c(1), c(2)]);
        }
        make_body(&BodySpec::Polytope { vertices: v }, "cube").expect("cube is valid")
    }

    /// Cross-polytope `conv{±e1, ±e2, ±e3}`.
    pub fn cross_polytope() -> Self {
        let mut v = Vec::new();
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            v.push(e);
            e[k] = -1.0;
            v.push(e);
        }
        make_body(&BodySpec::Polytope { vertices: v }, "cross-polytope").expect("cross-polytope is valid")
    }

    /// Euclidean unit ball.
    pub fn unit_ball() -> Self {
        Self::new(Representation::LpBall(LpBall { p: 2.0, axes: [1.0; 3] }), "unit ball")
    }

    /// Representation.
    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// Provenance label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same body with another label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The polytope, when the body is one.
    pub fn as_polytope(&self) -> Option<&Polytope> {
        match &self.repr {
            Representation::Polytope(p) => Some(p),
            _ => None,
        }
    }

    /// True when the boundary is given by an analytic formula (not a table, not a polytope).
    pub fn is_analytic(&self) -> bool {
        match &self.repr {
            Representation::LpBall(_) | Representation::Ellipsoid(_) => true,
            Representation::Transformed(base, _) => base.is_analytic(),
            _ => false,
        }
    }

    /// Gauge `mu_K(x)`.
    pub fn gauge(&self, x: &Vec3) -> f64 {
        match &self.repr {
            Representation::Polytope(p) => p.gauge(x),
            Representation::LpBall(b) => b.gauge(x),
            Representation::Ellipsoid(e) => e.gauge(x),
            Representation::Radial(r) => {
                let n = x.norm();
                if n == 0.0 {
                    0.0
                } else {
                    n / r.radial_unit(x)
                }
            }
            Representation::Transformed(base, map) => base.gauge(&map.apply_inverse(x)),
        }
    }

    /// Radial function `rho_K(v) = 1 / mu_K(v)`.
    pub fn radial(&self, v: &Vec3) -> f64 {
        1.0 / self.gauge(v)
    }

    /// Support function `h_K(u)`.
    pub fn support(&self, u: &Vec3) -> f64 {
        match &self.repr {
            Representation::Polytope(p) => p.support(u),
            Representation::LpBall(b) => b.support(u),
            Representation::Ellipsoid(e) => e.support(u),
            Representation::Radial(r) => r.support(u),
            Representation::Transformed(base, map) => base.support(&(map.matrix().transpose() * u)),
        }
    }

    /// Boundary map `grad(mu^2 / 2)` at `x` without validating that `x` lies on the boundary.
    pub fn lambda(&self, x: &Vec3) -> Vec3 {
        match &self.repr {
            Representation::Polytope(p) => p.facet_dual(x),
            Representation::LpBall(b) => b.lambda(x),
            Representation::Ellipsoid(e) => e.matrix * x,
            Representation::Radial(_) => {
                let h = 1e-6 * x.norm();
                let f = |y: Vec3| 0.5 * self.gauge(&y).powi(2);
                Vec3::from_fn(|k, _| {
                    let mut e = Vec3::zeros();
                    e[k] = h;
                    (f(x + e) - f(x - e)) / (2.0 * h)
                })
            }
            Representation::Transformed(base, map) => {
                map.inverse().transpose() * base.lambda(&map.apply_inverse(x))
            }
        }
    }

    /// Closed-form volume when one exists (polytopes, `l_p` balls, ellipsoids and their linear images).
    pub fn exact_volume(&self) -> Option<f64> {
        match &self.repr {
            Representation::Polytope(p) => Some(p.volume()),
            Representation::LpBall(b) => Some(b.volume()),
            Representation::Ellipsoid(e) => Some(4.0 * PI / (3.0 * e.matrix.determinant().sqrt())),
            Representation::Radial(_) => None,
            Representation::Transformed(base, map) => base.exact_volume().map(|v| v * map.det().abs()),
        }
    }

    /// Polar body.
    pub fn polar(&self) -> ConvexBody3 {
        let label = if self.label.is_empty() { "polar".to_string() } else { format!("polar of {}", self.label) };
        let repr = match &self.repr {
            Representation::Polytope(p) => Representation::Polytope(p.polar()),
            Representation::LpBall(b) => Representation::LpBall(b.polar()),
            Representation::Ellipsoid(e) => {
                Representation::Ellipsoid(Ellipsoid { matrix: e.inverse, inverse: e.matrix })
            }
            Representation::Radial(r) => {
                let grid = crate::quadrature::make_grid(r.n_alpha(), r.n_beta())
                    .expect("radial tables live on valid grids");
                let polar = RadialField::sample(&grid, |u| 1.0 / r.support(u))
                    .expect("support of a valid radial body is positive and symmetric");
                Representation::Radial(polar)
            }
            Representation::Transformed(base, map) => {
                Representation::Transformed(Box::new(base.polar()), map.inverse_transpose())
            }
        };
        ConvexBody3 { repr, label }
    }

    /// Linear image `A K`.
    pub fn apply_linear(&self, map: &LinearMap3) -> ConvexBody3 {
        let repr = match &self.repr {
            Representation::Polytope(p) => Representation::Polytope(p.mapped(map)),
            Representation::Ellipsoid(e) => {
                let m = map.inverse().transpose() * e.matrix * map.inverse();
                let sym = (m + m.transpose()) * 0.5;
                let inverse = map.matrix() * e.inverse * map.matrix().transpose();
                Representation::Ellipsoid(Ellipsoid { matrix: sym, inverse: (inverse + inverse.transpose()) * 0.5 })
            }
            Representation::Transformed(base, inner) => {
                Representation::Transformed(base.clone(), map.compose(inner))
            }
            _ => Representation::Transformed(Box::new(self.clone()), map.clone()),
        };
        ConvexBody3 { repr, label: self.label.clone() }
    }

    /// Input description reproducing this body.
    pub fn to_spec(&self) -> BodySpec {
        match &self.repr {
            Representation::Polytope(p) => {
                BodySpec::Polytope { vertices: p.vertices().iter().map(|v| [v.x, v.y, v.z]).collect() }
            }
            Representation::LpBall(b) => BodySpec::LpBall { p: b.p, axes: b.axes },
            Representation::Ellipsoid(e) => BodySpec::Ellipsoid {
                matrix: LinearMap3 { matrix: e.matrix, inverse: e.inverse, det: 1.0 }.rows(),
            },
            Representation::Radial(r) => {
                BodySpec::Radial { n_alpha: r.n_alpha(), n_beta: r.n_beta(), rho: r.table().to_vec() }
            }
            Representation::Transformed(base, map) => {
                BodySpec::Transformed { base: Box::new(base.to_spec()), matrix: map.rows() }
            }
        }
    }
}

/// Constructs and validates a body from its description.
pub fn make_body(spec: &BodySpec, label: &str) -> Result<ConvexBody3> {
    let repr = match spec {
        BodySpec::Polytope { vertices } => {
            let pts: Vec<Vec3> = vertices.iter().map(|v| Vec3::new(v[0], v[1], v[2])).collect();
            Representation::Polytope(Polytope::from_vertices(&pts)?)
        }
        BodySpec::LpBall { p, axes } => Representation::LpBall(LpBall::new(*p, *axes)?),
        BodySpec::Ellipsoid { matrix } => {
            Representation::Ellipsoid(Ellipsoid::new(Mat3::from_fn(|i, j| matrix[i][j]))?)
        }
        BodySpec::Radial { n_alpha, n_beta, rho } => {
            Representation::Radial(RadialField::from_table(*n_alpha, *n_beta, rho.clone())?)
        }
        BodySpec::Transformed { base, matrix } => {
            let base = make_body(base, label)?;
            let map = LinearMap3::from_rows(*matrix)?;
            return Ok(base.apply_linear(&map).with_label(label));
        }
    };
    Ok(ConvexBody3 { repr, label: label.to_string() })
}

fn nonzero(v: &Vec3) -> Result<()> {
    if v.norm() == 0.0 || !v.iter().all(|c| c.is_finite()) {
        Err(Error::ZeroVector)
    } else {
        Ok(())
    }
}

/// Gauge and radial function at a nonzero vector.
pub fn gauge_radial(k: &ConvexBody3, v: &Vec3) -> Result<(f64, f64)> {
    nonzero(v)?;
    let mu = k.gauge(v);
    Ok((mu, 1.0 / mu))
}

/// Support function at a nonzero vector.
pub fn support(k: &ConvexBody3, u: &Vec3) -> Result<f64> {
    nonzero(u)?;
    Ok(k.support(u))
}

/// Polar body.
pub fn polar(k: &ConvexBody3) -> ConvexBody3 {
    k.polar()
}

/// Boundary map `Lambda(x) = grad(mu^2 / 2)` at a boundary point of `K`.
///
/// On polytopes the result is the dual vertex of the facet containing `x`,
/// the lowest-indexed facet when `x` lies on several.
pub fn boundary_map(k: &ConvexBody3, x: &Vec3) -> Result<Vec3> {
    nonzero(x)?;
    let mu = k.gauge(x);
    if (mu - 1.0).abs() > 1e-8 {
        return Err(Error::NotOnBoundary(mu));
    }
    Ok(k.lambda(x))
}

/// Linear image `A K`.
pub fn apply_linear(k: &ConvexBody3, map: &LinearMap3) -> ConvexBody3 {
    k.apply_linear(map)
}

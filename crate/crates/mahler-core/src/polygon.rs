//! Planar convex polygons over an arbitrary ordered field.
//!
//! The same code runs on `f64` and on exact rationals, so every planar area,
//! polar and clip can be reproduced without rounding error.

use std::fmt::Debug;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Ordered field usable as polygon coordinates.
pub trait Field: Clone + PartialOrd + Num + Neg<Output = Self> + Debug {
    /// Converts a double into the field (exactly for rationals).
    fn from_f64(x: f64) -> Self;
    /// Nearest double.
    fn to_f64(&self) -> f64;
    /// Relative structural tolerance; zero for exact fields.
    fn tolerance() -> Self;
    /// Absolute value.
    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Field for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-12
    }
}

impl Field for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite coordinate")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        BigRational::zero()
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// A point of the plane.
pub type Point<T> = [T; 2];

fn sub<T: Field>(a: &Point<T>, b: &Point<T>) -> Point<T> {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone()]
}

/// Planar cross product `a x b`.
pub fn cross<T: Field>(a: &Point<T>, b: &Point<T>) -> T {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}

/// Dot product.
pub fn dot<T: Field>(a: &Point<T>, b: &Point<T>) -> T {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone()
}

fn max_abs<T: Field>(points: &[Point<T>]) -> T {
    let mut m = T::zero();
    for p in points {
        for c in p {
            let a = c.abs_val();
            if a > m {
                m = a;
            }
        }
    }
    m
}

/// Signed shoelace area of a closed vertex ring (positive when counterclockwise).
pub fn shoelace<T: Field>(ring: &[Point<T>]) -> T {
    let n = ring.len();
    let mut acc = T::zero();
    for i in 0..n {
        acc = acc + cross(&ring[i], &ring[(i + 1) % n]);
    }
    acc / (T::one() + T::one())
}

/// Counterclockwise convex hull by the monotone chain; collinear points are dropped.
pub fn convex_hull<T: Field>(points: &[Point<T>]) -> Vec<Point<T>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .expect("ordered coordinates")
            .then(a[1].partial_cmp(&b[1]).expect("ordered coordinates"))
    });
    pts.dedup_by(|a, b| a[0] == b[0] && a[1] == b[1]);
    if pts.len() < 3 {
        return pts;
    }
    let scale = max_abs(&pts);
    let eps = T::tolerance() * scale.clone() * scale;
    let turn = |o: &Point<T>, a: &Point<T>, b: &Point<T>| cross(&sub(a, o), &sub(b, o));
    let mut lower: Vec<Point<T>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point<T>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Point `v` with `v . p = v . q = 1`, the vertex of the polar dual to the edge `pq`.
pub fn dual_vertex2<T: Field>(p: &Point<T>, q: &Point<T>) -> Result<Point<T>> {
    let det = cross(p, q);
    let scale = max_abs(&[p.clone(), q.clone()]);
    if det.abs_val() <= T::tolerance() * scale.clone() * scale || det.is_zero() {
        return Err(Error::CollinearPoints);
    }
    Ok([
        (q[1].clone() - p[1].clone()) / det.clone(),
        (p[0].clone() - q[0].clone()) / det,
    ])
}

/// Keeps the part of a convex ring where `n . x >= 0` (Sutherland-Hodgman step).
pub fn clip_halfplane<T: Field>(ring: &[Point<T>], n: &Point<T>) -> Vec<Point<T>> {
    let len = ring.len();
    let mut out = Vec::with_capacity(len + 1);
    for i in 0..len {
        let a = &ring[i];
        let b = &ring[(i + 1) % len];
        let da = dot(n, a);
        let db = dot(n, b);
        let zero = T::zero();
        if da >= zero {
            out.push(a.clone());
        }
        if (da > zero && db < zero) || (da < zero && db > zero) {
            let t = da.clone() / (da - db);
            out.push([
                a[0].clone() + t.clone() * (b[0].clone() - a[0].clone()),
                a[1].clone() + t * (b[1].clone() - a[1].clone()),
            ]);
        }
    }
    out
}

/// Centrally symmetric convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T: Field> {
    vertices: Vec<Point<T>>,
}

impl<T: Field> Polygon<T> {
    /// Builds the convex hull of `points` and validates symmetry and nondegeneracy.
    pub fn from_points(points: &[Point<T>]) -> Result<Self> {
        let hull = convex_hull(points);
        if hull.len() < 3 || shoelace(&hull) <= T::zero() {
            return Err(Error::DegenerateBody("polygon has empty interior".into()));
        }
        let scale = max_abs(&hull);
        let eps = T::tolerance() * scale;
        for v in &hull {
            let found = hull.iter().any(|w| {
                (w[0].clone() + v[0].clone()).abs_val() <= eps
                    && (w[1].clone() + v[1].clone()).abs_val() <= eps
            });
            if !found {
                return Err(Error::NotSymmetric(format!("no opposite vertex for {v:?}")));
            }
        }
        Ok(Self { vertices: hull })
    }

    /// Wraps a counterclockwise vertex ring without validation.
    pub fn from_ccw_unchecked(vertices: Vec<Point<T>>) -> Self {
        Self { vertices }
    }

    /// Counterclockwise vertices.
    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    /// Area by the shoelace formula.
    pub fn area(&self) -> T {
        shoelace(&self.vertices)
    }

    /// Outer edge functionals `w_i` with the polygon equal to `{x : w_i . x <= 1}`.
    pub fn edge_functionals(&self) -> Vec<Point<T>> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                dual_vertex2(&self.vertices[i], &self.vertices[(i + 1) % n])
                    .expect("edges of a polygon with interior origin are not collinear with it")
            })
            .collect()
    }

    /// Polar polygon: the edge functionals, already in counterclockwise order.
    pub fn polar(&self) -> Self {
        Self { vertices: self.edge_functionals() }
    }

    /// Minkowski gauge `max_i w_i . x`.
    pub fn gauge(&self, x: &Point<T>) -> T {
        self.edge_functionals()
            .iter()
            .map(|w| dot(w, x))
            .fold(None, |m: Option<T>, v| match m {
                Some(m) if m >= v => Some(m),
                _ => Some(v),
            })
            .expect("nonempty polygon")
    }

    /// Support function `max_v v . u`.
    pub fn support(&self, u: &Point<T>) -> T {
        self.vertices
            .iter()
            .map(|v| dot(v, u))
            .fold(None, |m: Option<T>, v| match m {
                Some(m) if m >= v => Some(m),
                _ => Some(v),
            })
            .expect("nonempty polygon")
    }

    /// Area of the intersection with the cone `{x : n_k . x >= 0 for all k}`.
    pub fn cone_area(&self, normals: &[Point<T>]) -> T {
        let mut ring = self.vertices.clone();
        for n in normals {
            ring = clip_halfplane(&ring, n);
            if ring.len() < 3 {
                return T::zero();
            }
        }
        shoelace(&ring)
    }

    /// Area of the intersection with the closed quadrant of the given signs.
    pub fn quadrant_area(&self, sx: bool, sy: bool) -> T {
        let one = T::one();
        let nx = if sx { one.clone() } else { -one.clone() };
        let ny = if sy { one } else { -T::one() };
        self.cone_area(&[[nx, T::zero()], [T::zero(), ny]])
    }

    /// True when the polygon is a parallelogram: four vertices, opposite sides parallel.
    pub fn is_parallelogram(&self) -> bool {
        if self.vertices.len() != 4 {
            return false;
        }
        let v = &self.vertices;
        let e0 = sub(&v[1], &v[0]);
        let e2 = sub(&v[3], &v[2]);
        let e1 = sub(&v[2], &v[1]);
        let e3 = sub(&v[0], &v[3]);
        let scale = max_abs(v);
        let eps = T::from_f64(1e-6) * scale.clone() * scale;
        cross(&e0, &e2).abs_val() <= eps && cross(&e1, &e3).abs_val() <= eps
    }
}

impl Polygon<f64> {
    /// Image under the linear map `m` (rows), keeping counterclockwise order.
    pub fn map(&self, m: &[[f64; 2]; 2]) -> Self {
        let mut vs: Vec<Point<f64>> = self
            .vertices
            .iter()
            .map(|p| [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]])
            .collect();
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] < 0.0 {
            vs.reverse();
        }
        Self { vertices: vs }
    }

    /// Exact rational copy of the polygon.
    pub fn to_exact(&self) -> Polygon<BigRational> {
        Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| [BigRational::from_f64(p[0]), BigRational::from_f64(p[1])])
                .collect(),
        }
    }
}

//! Centrally symmetric polytopes in vertex and facet form.

use crate::body::{LinearMap3, Vec3};
use crate::error::{Error, Result};
use crate::polygon::{self, Polygon};

/// A facet `{x : normal . x = 1}` with its vertex indices in counterclockwise
/// order as seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Facet functional: the body satisfies `normal . x <= 1`.
    pub normal: Vec3,
    /// Indices into the vertex list, counterclockwise from outside.
    pub vertices: Vec<usize>,
}

/// Symmetric convex polytope with the origin in its interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec3>,
    facets: Vec<Facet>,
}

/// Facet of a general hull: `normal . x <= offset`, `normal` a unit vector.
#[derive(Debug, Clone)]
pub(crate) struct HullFacet {
    pub normal: Vec3,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let pick = if n.x.abs() < 0.6 {
        Vec3::x()
    } else if n.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (pick - n * n.dot(&pick)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Convex hull of a point cloud by exhaustive supporting-plane search.
///
/// Coplanar triangles are merged into polygonal facets whose vertices are the
/// extreme points of the plane, ordered counterclockwise from outside.
pub(crate) fn convex_hull3(points: &[Vec3]) -> Result<Vec<HullFacet>> {
    let n = points.len();
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if n < 4 || scale == 0.0 {
        return Err(Error::DegenerateBody("fewer than four distinct points".into()));
    }
    let tol = 1e-10 * scale;
    let mut facets: Vec<HullFacet> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let raw = (points[j] - points[i]).cross(&(points[k] - points[i]));
                let len = raw.norm();
                if len <= 1e-9 * scale * scale {
                    continue;
                }
                let mut normal = raw / len;
                let mut offset = normal.dot(&points[i]);
                let (mut above, mut below) = (false, false);
                for p in points {
                    let s = normal.dot(p) - offset;
                    above |= s > tol;
                    below |= s < -tol;
                    if above && below {
                        break;
                    }
                }
                if above && below {
                    continue;
                }
                if above {
                    normal = -normal;
                    offset = -offset;
                }
                if facets
                    .iter()
                    .any(|f| (f.normal - normal).norm() < 1e-9 && (f.offset - offset).abs() < tol)
                {
                    continue;
                }
                let on_plane: Vec<usize> = (0..n)
                    .filter(|&m| (normal.dot(&points[m]) - offset).abs() <= tol)
                    .collect();
                let (e1, e2) = plane_basis(&normal);
                let flat: Vec<[f64; 2]> = on_plane
                    .iter()
                    .map(|&m| [points[m].dot(&e1), points[m].dot(&e2)])
                    .collect();
                let ring = polygon::convex_hull(&flat);
                let vertices = ring
                    .iter()
                    .map(|q| on_plane[flat.iter().position(|f| f == q).expect("hull point from input")])
                    .collect();
                facets.push(HullFacet { normal, offset, vertices });
            }
        }
    }
    if facets.len() < 4 {
        return Err(Error::DegenerateBody("points are coplanar".into()));
    }
    Ok(facets)
}

/// Cone volume `(1/3) * area * distance` of a planar ring seen from the origin.
pub(crate) fn ring_cone_volume(ring: &[Vec3]) -> f64 {
    let mut acc = 0.0;
    for m in 1..ring.len().saturating_sub(1) {
        acc += ring[0].dot(&ring[m].cross(&ring[m + 1]));
    }
    acc / 6.0
}

/// Keeps the part of a planar ring with `n . x >= 0`.
pub(crate) fn clip_ring(ring: &[Vec3], n: &Vec3) -> Vec<Vec3> {
    let len = ring.len();
    let mut out = Vec::with_capacity(len + 2);
    for i in 0..len {
        let a = ring[i];
        let b = ring[(i + 1) % len];
        let da = n.dot(&a);
        let db = n.dot(&b);
        if da >= 0.0 {
            out.push(a);
        }
        if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

impl Polytope {
    /// Builds the polytope spanned by a vertex list closed under negation.
    pub fn from_vertices(points: &[Vec3]) -> Result<Self> {
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::DegenerateBody("non-finite coordinate".into()));
        }
        let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::DegenerateBody("all vertices at the origin".into()));
        }
        for p in points {
            if !points.iter().any(|q| (p + q).norm() <= 1e-9 * scale) {
                return Err(Error::NotSymmetric(format!(
                    "vertex ({}, {}, {}) has no opposite vertex",
                    p.x, p.y, p.z
                )));
            }
        }
        let mut distinct: Vec<Vec3> = Vec::new();
        for p in points {
            if !distinct.iter().any(|q| (p - q).norm() <= 1e-12 * scale) {
                distinct.push(*p);
            }
        }
        let hull = convex_hull3(&distinct)?;
        if hull.iter().any(|f| f.offset <= 1e-9 * scale) {
            return Err(Error::OriginNotInterior);
        }
        let mut used: Vec<usize> = hull.iter().flat_map(|f| f.vertices.iter().copied()).collect();
        used.sort_unstable();
        used.dedup();
        let remap = |old: usize| used.binary_search(&old).expect("vertex of some facet");
        let vertices = used.iter().map(|&i| distinct[i]).collect();
        let facets = hull
            .iter()
            .map(|f| Facet {
                normal: f.normal / f.offset,
                vertices: f.vertices.iter().map(|&v| remap(v)).collect(),
            })
            .collect();
        Ok(Self { vertices, facets })
    }

    /// Extreme points.
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    /// Facets with their functionals.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertex coordinates of facet `f`, counterclockwise from outside.
    pub fn facet_ring(&self, f: usize) -> Vec<Vec3> {
        self.facets[f].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Gauge `max_F a_F . x`.
    pub fn gauge(&self, x: &Vec3) -> f64 {
        self.facets.iter().map(|f| f.normal.dot(x)).fold(0.0, f64::max)
    }

    /// Support `max_v v . u`.
    pub fn support(&self, u: &Vec3) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(0.0, f64::max)
    }

    /// Dual vertex of the facet attaining the gauge; ties go to the lowest facet index.
    pub fn facet_dual(&self, x: &Vec3) -> Vec3 {
        let best = self.gauge(x);
        let slack = 1e-12 * best.abs().max(f64::MIN_POSITIVE);
        self.facets
            .iter()
            .find(|f| f.normal.dot(x) >= best - slack)
            .map(|f| f.normal)
            .expect("gauge attained by some facet")
    }

    /// Exact volume by cones over the facets.
    pub fn volume(&self) -> f64 {
        (0..self.facets.len()).map(|f| ring_cone_volume(&self.facet_ring(f))).sum()
    }

    /// Exact volume of the intersection with the cone `{x : n_k . x >= 0}`.
    pub fn cone_volume(&self, normals: &[Vec3]) -> f64 {
        let mut acc = 0.0;
        for f in 0..self.facets.len() {
            let mut ring = self.facet_ring(f);
            for n in normals {
                ring = clip_ring(&ring, n);
                if ring.len() < 3 {
                    break;
                }
            }
            if ring.len() >= 3 {
                acc += ring_cone_volume(&ring);
            }
        }
        acc
    }

    /// Polar polytope: facet functionals become vertices and vice versa.
    pub fn polar(&self) -> Polytope {
        let vertices: Vec<Vec3> = self.facets.iter().map(|f| f.normal).collect();
        let facets = self
            .vertices
            .iter()
            .enumerate()
            .map(|(vi, v)| {
                let incident: Vec<usize> = self
                    .facets
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.vertices.contains(&vi))
                    .map(|(fi, _)| fi)
                    .collect();
                let n = v.normalize();
                let (e1, e2) = plane_basis(&n);
                let centroid =
                    incident.iter().map(|&fi| vertices[fi]).sum::<Vec3>() / incident.len() as f64;
                let mut keyed: Vec<(f64, usize)> = incident
                    .iter()
                    .map(|&fi| {
                        let d = vertices[fi] - centroid;
                        (d.dot(&e2).atan2(d.dot(&e1)), fi)
                    })
                    .collect();
                keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
                Facet { normal: *v, vertices: keyed.into_iter().map(|(_, fi)| fi).collect() }
            })
            .collect();
        Polytope { vertices, facets }
    }

    /// Image under an invertible linear map.
    pub fn mapped(&self, map: &LinearMap3) -> Polytope {
        let reverse = map.det() < 0.0;
        let inv_t = map.inverse().transpose();
        Polytope {
            vertices: self.vertices.iter().map(|v| map.apply(v)).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| {
                    let mut vertices = f.vertices.clone();
                    if reverse {
                        vertices.reverse();
                    }
                    Facet { normal: inv_t * f.normal, vertices }
                })
                .collect(),
        }
    }

    /// Central section by the plane spanned by orthonormal `u`, `v`, in `(u, v)` coordinates.
    pub fn section(&self, u: &Vec3, v: &Vec3) -> Polygon<f64> {
        let functionals: Vec<[f64; 2]> =
            self.facets.iter().map(|f| [f.normal.dot(u), f.normal.dot(v)]).collect();
        Polygon::from_points(&functionals)
            .expect("projected functionals of a symmetric polytope form a symmetric polygon")
            .polar()
    }

    /// Orthogonal projection onto the plane spanned by orthonormal `u`, `v`.
    pub fn projection(&self, u: &Vec3, v: &Vec3) -> Polygon<f64> {
        let pts: Vec<[f64; 2]> = self.vertices.iter().map(|p| [p.dot(u), p.dot(v)]).collect();
        Polygon::from_points(&pts).expect("projection of a symmetric polytope")
    }
}

//! Spherical quadrature and the scalar measures of a body: volumes, octant
//! volumes, polar piece volumes, central sections, projections, quarter-plane
//! areas, the volume product and the Santaló point.
//!
//! Directions are written `P(alpha, beta) = (cos a, sin a cos b, sin a sin b)`.
//! The grid uses Gauss–Legendre nodes in `alpha` on each hemisphere and
//! Gauss–Legendre nodes in `beta` on each quarter turn, so that every
//! coordinate plane is a cell boundary and octant restrictions are exact.

use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::{ConvexBody3, Direction, Polytope, Vec3};
use crate::error::{Error, Result};
use crate::pieces;
use crate::polygon::Polygon;

/// Samples per half turn used for arc profiles (quarter areas, sections, projections).
pub const ARC_SAMPLES: usize = 256;

/// Gauss–Legendre rule on `[0, 1]`, nodes ascending, weights summing to one.
pub(crate) fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("positive rule size"));
    let mut pairs: Vec<(f64, f64)> =
        rule.as_node_weight_pairs().iter().map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Index of the closed octant containing `v`, numbered
/// `+++, -++, --+, +-+, ++-, -+-, ---, +--` from 0 to 7.
pub fn octant_index(v: &Vec3) -> usize {
    let base = match (v.x >= 0.0, v.y >= 0.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    };
    if v.z >= 0.0 {
        base
    } else {
        base + 4
    }
}

/// Sign vector of octant `i` (see [`octant_index`]).
pub fn octant_signs(i: usize) -> [f64; 3] {
    let (sx, sy) = match i % 4 {
        0 => (1.0, 1.0),
        1 => (-1.0, 1.0),
        2 => (-1.0, -1.0),
        _ => (1.0, -1.0),
    };
    [sx, sy, if i < 4 { 1.0 } else { -1.0 }]
}

/// Product quadrature on the unit sphere in `(alpha, beta)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    alpha: Vec<f64>,
    alpha_w: Vec<f64>,
    beta: Vec<f64>,
    beta_w: Vec<f64>,
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
    octants: Vec<u8>,
}

/// Builds the product grid with `n_alpha` rings and `n_beta` nodes per ring.
///
/// Both sizes must be even and at most 4096, with `n_alpha >= 8`,
/// `n_beta >= 16` and `n_beta` divisible by four.
pub fn make_grid(n_alpha: usize, n_beta: usize) -> Result<SphereGrid> {
    if n_alpha < 8 || n_beta < 16 || n_alpha > 4096 || n_beta > 4096 || !n_alpha.is_multiple_of(2) || !n_beta.is_multiple_of(4) {
        return Err(Error::BadGridSize(n_alpha, n_beta));
    }
    let half = gauss_legendre_unit(n_alpha / 2);
    let mut north: Vec<(f64, f64)> =
        half.iter().map(|&(t, w)| (FRAC_PI_2 * t, FRAC_PI_2 * w * (FRAC_PI_2 * t).sin())).collect();
    let total: f64 = north.iter().map(|p| p.1).sum();
    for p in &mut north {
        p.1 /= total;
    }
    let mut alpha = Vec::with_capacity(n_alpha);
    let mut alpha_w = Vec::with_capacity(n_alpha);
    for &(a, w) in &north {
        alpha.push(a);
        alpha_w.push(w);
    }
    for &(a, w) in north.iter().rev() {
        alpha.push(PI - a);
        alpha_w.push(w);
    }
    let quarter = gauss_legendre_unit(n_beta / 4);
    let mut beta = Vec::with_capacity(n_beta);
    let mut beta_w = Vec::with_capacity(n_beta);
    for q in 0..4 {
        for &(t, w) in &quarter {
            beta.push(FRAC_PI_2 * (q as f64 + t));
            beta_w.push(FRAC_PI_2 * w);
        }
    }
    let mut dirs = Vec::with_capacity(n_alpha * n_beta);
    let mut weights = Vec::with_capacity(n_alpha * n_beta);
    let mut octants = Vec::with_capacity(n_alpha * n_beta);
    for (a, wa) in alpha.iter().zip(&alpha_w) {
        for (b, wb) in beta.iter().zip(&beta_w) {
            let d = Direction::new(*a, *b).to_vec();
            octants.push(octant_index(&d) as u8);
            dirs.push(d);
            weights.push(wa * wb);
        }
    }
    Ok(SphereGrid { alpha, alpha_w, beta, beta_w, dirs, weights, octants })
}

impl SphereGrid {
    /// Number of `alpha` rings.
    pub fn n_alpha(&self) -> usize {
        self.alpha.len()
    }

    /// Number of `beta` nodes per ring.
    pub fn n_beta(&self) -> usize {
        self.beta.len()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    /// True when the grid has no nodes (never the case for a constructed grid).
    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Ring angles in increasing order.
    pub fn alpha_nodes(&self) -> &[f64] {
        &self.alpha
    }

    /// Ring weights including the `sin(alpha)` Jacobian; they sum to 2.
    pub fn alpha_weights(&self) -> &[f64] {
        &self.alpha_w
    }

    /// Angles within a ring in increasing order.
    pub fn beta_nodes(&self) -> &[f64] {
        &self.beta
    }

    /// Weights within a ring; they sum to `2 pi`.
    pub fn beta_weights(&self) -> &[f64] {
        &self.beta_w
    }

    /// Unit vectors of the nodes, ring by ring.
    pub fn directions(&self) -> &[Vec3] {
        &self.dirs
    }

    /// Surface weights of the nodes; they sum to `4 pi`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Octant of every node.
    pub fn octants(&self) -> &[u8] {
        &self.octants
    }

    /// Nodes as `(Direction, weight)` pairs.
    pub fn nodes(&self) -> impl Iterator<Item = (Direction, f64)> + '_ {
        let nb = self.beta.len();
        self.weights.iter().enumerate().map(move |(i, &w)| (Direction::new(self.alpha[i / nb], self.beta[i % nb]), w))
    }

    /// Evaluates `f` at every node in parallel, in node order.
    pub fn map<F: Fn(&Vec3) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        self.dirs.par_iter().with_min_len(256).map(&f).collect()
    }

    /// Integral of `f` over the sphere, summed in node order.
    pub fn integrate<F: Fn(&Vec3) -> f64 + Sync>(&self, f: F) -> f64 {
        self.map(f).iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Integrals of `f` over the eight octants.
    pub fn integrate_octants<F: Fn(&Vec3) -> f64 + Sync>(&self, f: F) -> [f64; 8] {
        let vals = self.map(f);
        let mut out = [0.0; 8];
        for ((v, w), o) in vals.iter().zip(&self.weights).zip(&self.octants) {
            out[*o as usize] += v * w;
        }
        out
    }
}

/// A real trigonometric polynomial of period `pi`,
/// `c0 + sum_k (a_k cos 2kt + b_k sin 2kt)`, interpolating uniform samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    c0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PeriodicProfile {
    /// Interpolates samples `f(m pi / N)`, `m = 0..N`.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let table: Vec<(f64, f64)> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin_cos()).collect();
        let c0 = samples.iter().sum::<f64>() / n as f64;
        let kmax = n / 2;
        let mut a = Vec::with_capacity(kmax);
        let mut b = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (m, f) in samples.iter().enumerate() {
                let (s, c) = table[(k * m) % n];
                sa += f * c;
                sb += f * s;
            }
            let scale = if 2 * k == n { 1.0 } else { 2.0 } / n as f64;
            a.push(sa * scale);
            b.push(if 2 * k == n { 0.0 } else { sb * scale });
        }
        Self { c0, a, b }
    }

    /// Samples `f` on `n` uniform points of `[0, pi)` and interpolates.
    pub fn sample(n: usize, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let samples: Vec<f64> = (0..n).into_par_iter().map(|m| f(PI * m as f64 / n as f64)).collect();
        Self::from_samples(&samples)
    }

    /// Mean value over a period.
    pub fn mean(&self) -> f64 {
        self.c0
    }

    /// Value at `t`.
    pub fn value(&self, t: f64) -> f64 {
        let mut acc = self.c0;
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let (s, c) = (2.0 * (k + 1) as f64 * t).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }

    /// Integral over `[t0, t1]`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let mut acc = self.c0 * (t1 - t0);
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let w = 2.0 * (k + 1) as f64;
            let (s1, c1) = (w * t1).sin_cos();
            let (s0, c0) = (w * t0).sin_cos();
            acc += (a * (s1 - s0) - b * (c1 - c0)) / w;
        }
        acc
    }

    /// The profile `t -> f(t - gamma)`.
    pub fn shifted(&self, gamma: f64) -> Self {
        let mut a = Vec::with_capacity(self.a.len());
        let mut b = Vec::with_capacity(self.b.len());
        for (k, (ak, bk)) in self.a.iter().zip(&self.b).enumerate() {
            let (s, c) = (2.0 * (k + 1) as f64 * gamma).sin_cos();
            a.push(ak * c - bk * s);
            b.push(ak * s + bk * c);
        }
        Self { c0: self.c0, a, b }
    }

    /// The balance point `x` in `(0, pi)` with `int_0^x f = int_x^pi f`, by bisection.
    pub fn balance(&self) -> f64 {
        let total = self.integral(0.0, PI);
        bisect(|x| 2.0 * self.integral(0.0, x) - total, 0.0, PI, 1e-13)
    }

    /// Area `(1/2) int (h^2 - h'^2)` of the planar body whose support function is this profile.
    pub fn support_area(&self) -> f64 {
        let mut acc = PI * self.c0 * self.c0;
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let kk = ((k + 1) * (k + 1)) as f64;
            acc += 0.5 * PI * (1.0 - 4.0 * kk) * (a * a + b * b);
        }
        acc
    }
}

/// Root of an increasing function on `[lo, hi]` by bisection to width `tol`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Orthonormal bases `(b1, b2)` of the `yz`, `zx` and `xy` planes.
pub fn plane_bases() -> [(Vec3, Vec3); 3] {
    [(Vec3::y(), Vec3::z()), (Vec3::z(), Vec3::x()), (Vec3::x(), Vec3::y())]
}

/// Profile of `rho^2` along the great circle `cos t b1 + sin t b2`.
pub(crate) fn rho2_profile(k: &ConvexBody3, b1: &Vec3, b2: &Vec3, n: usize) -> PeriodicProfile {
    PeriodicProfile::sample(n, |t| {
        let (s, c) = t.sin_cos();
        let r = k.radial(&(b1 * c + b2 * s));
        r * r
    })
}

/// Volume `(1/3) int rho^3` by quadrature, ignoring any closed form.
pub fn volume_by_quadrature(k: &ConvexBody3, grid: &SphereGrid) -> f64 {
    grid.integrate(|u| k.radial(u).powi(3)) / 3.0
}

/// Volume: closed form when available, quadrature otherwise.
pub fn volume(k: &ConvexBody3, grid: &SphereGrid) -> f64 {
    k.exact_volume().unwrap_or_else(|| volume_by_quadrature(k, grid))
}

fn polytope_octant_volumes(p: &Polytope) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (i, o) in out.iter_mut().enumerate() {
        let s = octant_signs(i);
        *o = p.cone_volume(&[Vec3::new(s[0], 0.0, 0.0), Vec3::new(0.0, s[1], 0.0), Vec3::new(0.0, 0.0, s[2])]);
    }
    out
}

/// Volumes `|Delta_i|` of the parts of the body in the eight closed octants.
pub fn octant_volumes(k: &ConvexBody3, grid: &SphereGrid) -> [f64; 8] {
    match k.as_polytope() {
        Some(p) => polytope_octant_volumes(p),
        None => grid.integrate_octants(|u| k.radial(u).powi(3)).map(|v| v / 3.0),
    }
}

/// Volumes `|K°_i|` of the eight pieces of the polar body.
///
/// A polar direction belongs to piece `i` when the boundary point of `K`
/// it is dual to lies in octant `i`.
pub fn polar_piece_volumes(k: &ConvexBody3, grid: &SphereGrid) -> Result<[f64; 8]> {
    pieces::polar_piece_volumes(k, grid)
}

/// Areas of central sections and orthogonal projections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneMeasures {
    /// Areas of the sections by the `yz`, `zx` and `xy` planes.
    pub sections: [f64; 3],
    /// Areas of the projections onto the `yz`, `zx` and `xy` planes.
    pub projections: [f64; 3],
}

/// Section and projection areas for the three coordinate planes.
pub fn plane_measures(k: &ConvexBody3, _grid: &SphereGrid) -> PlaneMeasures {
    let mut sections = [0.0; 3];
    let mut projections = [0.0; 3];
    for (i, (b1, b2)) in plane_bases().iter().enumerate() {
        match k.as_polytope() {
            Some(p) => {
                sections[i] = p.section(b1, b2).area();
                projections[i] = p.projection(b1, b2).area();
            }
            None => {
                sections[i] = PI * rho2_profile(k, b1, b2, ARC_SAMPLES).mean();
                projections[i] = PeriodicProfile::sample(ARC_SAMPLES, |t| {
                    let (s, c) = t.sin_cos();
                    k.support(&(b1 * c + b2 * s))
                })
                .support_area();
            }
        }
    }
    PlaneMeasures { sections, projections }
}

/// Central section by the plane spanned by orthonormal `b1`, `b2`, as a polygon
/// in `(b1, b2)` coordinates (polytopes only).
pub fn polytope_section(p: &Polytope, b1: &Vec3, b2: &Vec3) -> Polygon<f64> {
    p.section(b1, b2)
}

/// Quarter-plane areas `(|O*d|, |O*e|, |O*f|, |O*g|, |O*h|, |O*i|)`.
pub fn quarter_areas(k: &ConvexBody3) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, (b1, b2)) in plane_bases().iter().enumerate() {
        let (first, second) = match k.as_polytope() {
            Some(p) => {
                let sec = p.section(b1, b2);
                (sec.quadrant_area(true, true), sec.quadrant_area(false, true))
            }
            None => {
                let prof = rho2_profile(k, b1, b2, ARC_SAMPLES);
                (0.5 * prof.integral(0.0, FRAC_PI_2), 0.5 * prof.integral(FRAC_PI_2, PI))
            }
        };
        out[2 * i] = first;
        out[2 * i + 1] = second;
    }
    out
}

/// Volume product `|K| |K°|`.
pub fn volume_product(k: &ConvexBody3, grid: &SphereGrid) -> f64 {
    volume(k, grid) * volume(&k.polar(), grid)
}

/// Input accepted by [`santalo_point`].
#[derive(Debug, Clone)]
pub enum SantaloInput {
    /// Convex hull of a finite point set (not necessarily symmetric).
    Vertices(Vec<Vec3>),
    /// A centrally symmetric body.
    Body(ConvexBody3),
}

fn hull_polar_volume(points: &[Vec3], z: &Vec3) -> f64 {
    let shifted: Vec<Vec3> = points.iter().map(|p| p - z).collect();
    let Ok(hull) = crate::body::convex_hull3(&shifted) else {
        return f64::INFINITY;
    };
    if hull.iter().any(|f| f.offset <= 1e-12) {
        return f64::INFINITY;
    }
    let duals: Vec<Vec3> = hull.iter().map(|f| f.normal / f.offset).collect();
    let Ok(dual_hull) = crate::body::convex_hull3(&duals) else {
        return f64::INFINITY;
    };
    dual_hull
        .iter()
        .map(|f| {
            let ring: Vec<Vec3> = f.vertices.iter().map(|&i| duals[i]).collect();
            crate::body::ring_cone_volume(&ring)
        })
        .sum()
}

/// Nelder–Mead minimization in three variables.
fn nelder_mead(f: impl Fn(&Vec3) -> f64, start: Vec3, step: f64, tol: f64, max_iter: usize) -> Result<Vec3> {
    let mut simplex: Vec<(Vec3, f64)> = (0..4)
        .map(|i| {
            let mut p = start;
            if i > 0 {
                p[i - 1] += step;
            }
            (p, f(&p))
        })
        .collect();
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = simplex[1..].iter().map(|(p, _)| (p - simplex[0].0).norm()).fold(0.0, f64::max);
        if size < tol {
            return Ok(simplex[0].0);
        }
        let centroid = (simplex[0].0 + simplex[1].0 + simplex[2].0) / 3.0;
        let worst = simplex[3];
        let reflect = centroid + (centroid - worst.0);
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand = centroid + 2.0 * (centroid - worst.0);
            let fe = f(&expand);
            simplex[3] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflect, fr);
        } else {
            let contract = if fr < worst.1 {
                centroid + 0.5 * (reflect - centroid)
            } else {
                centroid + 0.5 * (worst.0 - centroid)
            };
            let fc = f(&contract);
            if fc < worst.1.min(fr) {
                simplex[3] = (contract, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best + 0.5 * (s.0 - best);
                    s.1 = f(&s.0);
                }
            }
        }
    }
    Err(Error::NoConvergence("Nelder-Mead did not shrink below tolerance in 10^4 iterations".into()))
}

/// The Santaló point: the translation `z` minimizing `|(K - z)°|`.
pub fn santalo_point(input: &SantaloInput, grid: &SphereGrid) -> Result<Vec3> {
    match input {
        SantaloInput::Vertices(points) => {
            if points.len() < 4 {
                return Err(Error::DegenerateBody("fewer than four points".into()));
            }
            let start = points.iter().sum::<Vec3>() / points.len() as f64;
            let scale = points.iter().map(|p| (p - start).norm()).fold(0.0, f64::max);
            let z = nelder_mead(|z| hull_polar_volume(points, z), start, 0.1 * scale, 1e-10 * scale.max(1.0), 10_000)?;
            Ok(z)
        }
        SantaloInput::Body(k) => {
            let scale = k.support(&Vec3::x()).max(k.support(&Vec3::y())).max(k.support(&Vec3::z()));
            let h = grid.map(|u| k.support(u));
            let objective = |z: &Vec3| {
                let mut acc = 0.0;
                for ((u, hu), w) in grid.directions().iter().zip(&h).zip(grid.weights()) {
                    let gap = hu - z.dot(u);
                    if gap <= 0.0 {
                        return f64::INFINITY;
                    }
                    acc += w / (gap * gap * gap);
                }
                acc / 3.0
            };
            nelder_mead(objective, Vec3::zeros(), 0.1 * scale, 1e-10 * scale.max(1.0), 10_000)
        }
    }
}

/// Exact area of the part of a planar section between two rays, used by balance-angle solvers.
pub(crate) fn polygon_sector_area(section: &Polygon<f64>, angle: f64) -> f64 {
    let (s, c) = angle.sin_cos();
    section.cone_area(&[[0.0, 1.0], [s, -c]])
}


//! Decomposition of the polar body into the eight pieces dual to the octants
//! of `K`, and the signed curve vectors of the curves separating them.
//!
//! On a polytope the boundary map is multivalued, so pieces are defined as
//! the limit of smooth approximations `K + eps B`: the facet of `K°` dual to
//! a vertex `v` of `K` belongs to the octant of `v`, and when `v` lies on a
//! coordinate plane `y_k = 0` the facet is split by that plane and each part
//! takes the sign of `y_k`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::body::{clip_ring, ring_cone_volume, ConvexBody3, Direction, Polytope, Representation, Vec3};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_unit, octant_index, octant_signs, SphereGrid};

/// Relative size below which a vertex coordinate counts as zero.
const ZERO_REL: f64 = 1e-12;

/// Endpoints and separated pieces `(left, right)` of the curves `d, e, f, g, h, i`.
///
/// The curve runs from the first endpoint to the second; the left piece lies
/// to the left when the boundary is viewed from outside.
pub(crate) fn curve_layout(k: &ConvexBody3) -> [(Vec3, Vec3, usize, usize); 6] {
    let a = Vec3::x() * k.radial(&Vec3::x());
    let b = Vec3::y() * k.radial(&Vec3::y());
    let c = Vec3::z() * k.radial(&Vec3::z());
    [(b, c, 0, 1), (c, -b, 3, 2), (c, a, 0, 3), (a, -c, 4, 7), (a, b, 0, 4), (b, -a, 1, 5)]
}

fn zero_axes(v: &Vec3) -> Vec<usize> {
    let scale = v.norm();
    (0..3).filter(|&k| v[k].abs() <= ZERO_REL * scale).collect()
}

/// Piece of the polar facet dual to vertex `v`, at a point `y` of that facet.
fn facet_label(v: &Vec3, y: &Vec3) -> usize {
    let scale = v.norm();
    let s = |k: usize| if v[k].abs() > ZERO_REL * scale { v[k] } else { y[k] };
    octant_index(&Vec3::new(s(0), s(1), s(2)))
}

/// Single-sign label changes passed when moving from the polar facet dual to
/// `v` to the one dual to `w`.
///
/// When the two labels differ in several signs, the edge `vw` of `K` crosses
/// several coordinate planes; the intermediate pieces then degenerate to
/// zero-area slivers along the polar edge, visited in the order in which the
/// coordinates of `(1 - t) v + t w` change sign.
fn label_steps(from: usize, to: usize, v: &Vec3, w: &Vec3) -> Vec<(usize, usize)> {
    if from == to {
        return Vec::new();
    }
    let mut signs = octant_signs(from);
    let target = octant_signs(to);
    let mut flips: Vec<(f64, usize)> = (0..3)
        .filter(|&k| signs[k] != target[k])
        .map(|k| {
            let denom = v[k] - w[k];
            let t = if denom.abs() > 0.0 { (v[k] / denom).clamp(0.0, 1.0) } else { 0.5 };
            (t, k)
        })
        .collect();
    flips.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut steps = Vec::with_capacity(flips.len());
    let mut current = from;
    for (_, k) in flips {
        signs[k] = target[k];
        let next = octant_index(&Vec3::from(signs));
        steps.push((current, next));
        current = next;
    }
    steps
}

/// Exact piece volumes of the polar of a polytope.
pub(crate) fn polytope_piece_volumes(p: &Polytope) -> [f64; 8] {
    let polar = p.polar();
    let mut out = [0.0; 8];
    for (vi, v) in p.vertices().iter().enumerate() {
        let ring = polar.facet_ring(vi);
        let zeros = zero_axes(v);
        for mask in 0..(1usize << zeros.len()) {
            let mut part = ring.clone();
            let mut signs = Vec3::new(v.x.signum(), v.y.signum(), v.z.signum());
            for (bit, &k) in zeros.iter().enumerate() {
                let s = if mask & (1 << bit) == 0 { 1.0 } else { -1.0 };
                signs[k] = s;
                let mut n = Vec3::zeros();
                n[k] = s;
                part = clip_ring(&part, &n);
            }
            if part.len() >= 3 {
                out[octant_index(&signs)] += ring_cone_volume(&part);
            }
        }
    }
    out
}

/// A straight piece of the boundary between two polar pieces.
#[derive(Debug, Clone, Copy)]
struct Segment {
    p: Vec3,
    q: Vec3,
    left: usize,
    right: usize,
}

fn inside_ring(ring: &[Vec3], normal: &Vec3, y: &Vec3) -> bool {
    let n = ring.len();
    let scale = ring.iter().map(|r| r.norm()).fold(0.0, f64::max);
    (0..n).all(|i| {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        normal.dot(&(b - a).cross(&(y - a))) > 1e-14 * scale * scale
    })
}

fn split_params(a: &Vec3, b: &Vec3, axes: &[usize]) -> Vec<f64> {
    let mut ts = vec![0.0, 1.0];
    for &k in axes {
        if (a[k] > 0.0 && b[k] < 0.0) || (a[k] < 0.0 && b[k] > 0.0) {
            ts.push(a[k] / (a[k] - b[k]));
        }
    }
    ts.sort_by(|x, y| x.total_cmp(y));
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    ts
}

fn polytope_boundary_segments(p: &Polytope) -> Vec<Segment> {
    let polar = p.polar();
    let verts = p.vertices();
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (g, f) in polar.facets().iter().enumerate() {
        let n = f.vertices.len();
        for i in 0..n {
            owner.insert((f.vertices[i], f.vertices[(i + 1) % n]), g);
        }
    }
    let mut segs = Vec::new();
    for (g, f) in polar.facets().iter().enumerate() {
        let v1 = verts[g];
        let n = f.vertices.len();
        for i in 0..n {
            let (ia, ib) = (f.vertices[i], f.vertices[(i + 1) % n]);
            let Some(&g2) = owner.get(&(ib, ia)) else { continue };
            if g2 <= g {
                continue;
            }
            let v2 = verts[g2];
            let a = polar.vertices()[ia];
            let b = polar.vertices()[ib];
            let mut axes = zero_axes(&v1);
            axes.extend(zero_axes(&v2));
            let ts = split_params(&a, &b, &axes);
            let len = (b - a).norm();
            let in1 = v1.cross(&(b - a)).normalize();
            let in2 = v2.cross(&(a - b)).normalize();
            for w in ts.windows(2) {
                let sp = a + (b - a) * w[0];
                let sq = a + (b - a) * w[1];
                let mid = 0.5 * (sp + sq);
                let delta = 1e-7 * len;
                let left = facet_label(&v1, &(mid + in1 * delta));
                let right = facet_label(&v2, &(mid + in2 * delta));
                for (l, r) in label_steps(left, right, &v1, &v2) {
                    segs.push(Segment { p: sp, q: sq, left: l, right: r });
                }
            }
        }
        let zeros = zero_axes(&v1);
        let ring = polar.facet_ring(g);
        for &k in &zeros {
            let mut hits: Vec<Vec3> = Vec::new();
            for i in 0..n {
                let a = ring[i];
                let b = ring[(i + 1) % n];
                if a[k] == 0.0 {
                    hits.push(a);
                } else if (a[k] > 0.0 && b[k] < 0.0) || (a[k] < 0.0 && b[k] > 0.0) {
                    hits.push(a + (b - a) * (a[k] / (a[k] - b[k])));
                }
            }
            if hits.len() < 2 {
                continue;
            }
            let (mut cp, mut cq, mut best) = (hits[0], hits[1], 0.0);
            for x in 0..hits.len() {
                for y in (x + 1)..hits.len() {
                    let d = (hits[x] - hits[y]).norm();
                    if d > best {
                        best = d;
                        cp = hits[x];
                        cq = hits[y];
                    }
                }
            }
            if best <= 1e-12 * v1.norm().recip() {
                continue;
            }
            let t = cq - cp;
            let side = v1.cross(&t).normalize();
            let delta = 1e-7 * t.norm();
            let mid = 0.5 * (cp + cq);
            if !inside_ring(&ring, &v1, &(mid + side * delta)) || !inside_ring(&ring, &v1, &(mid - side * delta)) {
                continue;
            }
            let others: Vec<usize> = zeros.iter().copied().filter(|&m| m != k).collect();
            let ts = split_params(&cp, &cq, &others);
            for w in ts.windows(2) {
                let sp = cp + t * w[0];
                let sq = cp + t * w[1];
                let m = 0.5 * (sp + sq);
                let left = facet_label(&v1, &(m + side * delta));
                let right = facet_label(&v1, &(m - side * delta));
                if left != right {
                    segs.push(Segment { p: sp, q: sq, left, right });
                }
            }
        }
    }
    segs
}

/// Exact polar curve vectors of a polytope from the limiting piece boundaries.
pub(crate) fn polytope_curve_vectors(p: &Polytope) -> [Vec3; 6] {
    let segs = polytope_boundary_segments(p);
    let pairs = [(0, 1), (3, 2), (0, 3), (4, 7), (0, 4), (1, 5)];
    pairs.map(|(pos, neg)| {
        let mut acc = Vec3::zeros();
        for s in &segs {
            if (s.left, s.right) == (pos, neg) {
                acc += s.p.cross(&s.q);
            } else if (s.left, s.right) == (neg, pos) {
                acc += s.q.cross(&s.p);
            }
        }
        acc
    })
}

/// Fourth-order central difference of a vector-valued function.
fn derivative(f: impl Fn(f64) -> Vec3, t: f64, h: f64) -> Vec3 {
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

/// Polar piece volumes of a body with an analytic boundary map, by pulling
/// the cone-volume form of `K°` back to the sphere of directions of `K`.
fn pullback_piece_volumes(k: &ConvexBody3, grid: &SphereGrid) -> [f64; 8] {
    let y_of = |a: f64, b: f64| {
        let u = Direction::new(a, b).to_vec();
        k.lambda(&(u * k.radial(&u)))
    };
    let nb = grid.n_beta();
    let alpha = grid.alpha_nodes();
    let beta = grid.beta_nodes();
    let contrib: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|idx| {
            let a = alpha[idx / nb];
            let b = beta[idx % nb];
            let cell_a = if a < FRAC_PI_2 { 0.0 } else { FRAC_PI_2 };
            let cell_b = (b / FRAC_PI_2).floor() * FRAC_PI_2;
            let da = (a - cell_a).min(cell_a + FRAC_PI_2 - a);
            let db = (b - cell_b).min(cell_b + FRAC_PI_2 - b);
            let ha = (da / 3.0).min(1e-3);
            let hb = (db / 3.0).min(1e-3);
            let y = y_of(a, b);
            let ya = derivative(|s| y_of(s, b), a, ha);
            let yb = derivative(|s| y_of(a, s), b, hb);
            grid.weights()[idx] / a.sin() * y.dot(&ya.cross(&yb)) / 3.0
        })
        .collect();
    let mut out = [0.0; 8];
    for (c, o) in contrib.iter().zip(grid.octants()) {
        out[*o as usize] += c;
    }
    out
}

/// Support value and a maximizing point for bodies built on a radial table.
fn table_support_point(k: &ConvexBody3, u: &Vec3) -> Option<(f64, Vec3)> {
    match k.representation() {
        Representation::Radial(r) => Some(r.support_point(u)),
        Representation::Transformed(base, map) => {
            let (h, x) = table_support_point(base, &(map.matrix().transpose() * u))?;
            Some((h, map.apply(&x)))
        }
        _ => None,
    }
}

/// Polar piece volumes by classifying each polar direction through its support point.
fn classified_piece_volumes(k: &ConvexBody3, grid: &SphereGrid) -> Result<[f64; 8]> {
    let found: Vec<Option<(f64, Vec3)>> =
        grid.directions().par_iter().with_min_len(16).map(|u| table_support_point(k, u)).collect();
    let mut out = [0.0; 8];
    let mut unstable = 0usize;
    for ((hit, w), u) in found.iter().zip(grid.weights()).zip(grid.directions()) {
        let (h, x) = hit.unwrap_or_else(|| (k.support(u), k.lambda(u)));
        if x.iter().any(|c| c.abs() <= 1e-9 * x.norm()) {
            unstable += 1;
        }
        out[octant_index(&x)] += w / (3.0 * h * h * h);
    }
    if unstable as f64 > 1e-3 * grid.len() as f64 {
        return Err(Error::ClassificationUnstable(unstable, grid.len()));
    }
    Ok(out)
}

/// Volumes of the eight polar pieces.
pub(crate) fn polar_piece_volumes(k: &ConvexBody3, grid: &SphereGrid) -> Result<[f64; 8]> {
    if let Some(p) = k.as_polytope() {
        Ok(polytope_piece_volumes(p))
    } else if k.is_analytic() {
        Ok(pullback_piece_volumes(k, grid))
    } else {
        classified_piece_volumes(k, grid)
    }
}

/// Polar curve vectors `(d°, e°, f°, g°, h°, i°)`.
pub(crate) fn polar_curve_vectors(k: &ConvexBody3, n_curve: usize) -> Result<[Vec3; 6]> {
    if n_curve < 64 {
        return Err(Error::BadParameter(format!("n_curve = {n_curve} must be at least 64")));
    }
    if let Some(p) = k.as_polytope() {
        return Ok(polytope_curve_vectors(p));
    }
    let layout = curve_layout(k);
    let analytic = k.is_analytic();
    let rule = gauss_legendre_unit(n_curve);
    Ok(layout.map(|(from, to, _, _)| {
        let y_of = |t: f64| {
            let c = from * (1.0 - t) + to * t;
            k.lambda(&(c * k.radial(&c)))
        };
        if analytic {
            rule.iter().map(|&(t, w)| y_of(t).cross(&derivative(y_of, t, 1e-3)) * w).sum()
        } else {
            let pts: Vec<Vec3> = (0..=n_curve).map(|j| y_of(j as f64 / n_curve as f64)).collect();
            pts.windows(2).map(|w| w[0].cross(&w[1])).sum()
        }
    }))
}

/// Curve vectors `(d, e, f, g, h, i)` of `K` itself: twice the quarter areas along the normal axis.
pub(crate) fn body_curve_vectors(quarters: &[f64; 6]) -> [Vec3; 6] {
    let axis = [Vec3::x(), Vec3::x(), Vec3::y(), Vec3::y(), Vec3::z(), Vec3::z()];
    let mut out = [Vec3::zeros(); 6];
    for i in 0..6 {
        out[i] = axis[i] * (2.0 * quarters[i]);
    }
    out
}


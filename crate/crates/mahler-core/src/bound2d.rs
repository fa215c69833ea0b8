//! The planar theory: polar polygons, the balanced position with
//! `|K_1| = |K_2|` and `(1,0), (0,1)` on the boundary, the test points
//! `S_1, S_2, R_1, R_2`, the bound `|K| |K°| >= 8`, and the square family
//! attaining it.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polygon::{Point, Polygon};

pub use crate::polygon::dual_vertex2;

/// Tolerance for the normalization check performed by [`verify2`].
const NORMALIZED_TOL: f64 = 1e-9;

/// Polar polygon.
pub fn polar2(p: &Polygon<f64>) -> Polygon<f64> {
    p.polar()
}

fn rotation2(t: f64) -> [[f64; 2]; 2] {
    let (s, c) = t.sin_cos();
    [[c, -s], [s, c]]
}

fn quadrant_imbalance(p: &Polygon<f64>) -> f64 {
    p.quadrant_area(true, true) - p.quadrant_area(false, true)
}

/// A linear map `D R` with `R` a rotation balancing the first two quadrants
/// and `D` diagonal putting `(1,0)` and `(0,1)` on the boundary, together
/// with the image polygon.
pub fn normalize2(p: &Polygon<f64>) -> ([[f64; 2]; 2], Polygon<f64>) {
    let area = p.area();
    let imbalance = |t: f64| quadrant_imbalance(&p.map(&rotation2(t)));
    let f0 = imbalance(0.0);
    let t = if f0.abs() <= 1e-14 * area {
        0.0
    } else {
        let sign = f0.signum();
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        while hi - lo > 1e-16 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if imbalance(mid) * sign > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let r = rotation2(t);
    let rotated = p.map(&r);
    let dx = rotated.gauge(&[1.0, 0.0]);
    let dy = rotated.gauge(&[0.0, 1.0]);
    let map = [[dx * r[0][0], dx * r[0][1]], [dy * r[1][0], dy * r[1][1]]];
    (map, p.map(&map))
}

/// Everything computed by the planar verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verify2Report {
    /// `|K|`.
    pub area: f64,
    /// `|K°|`.
    pub polar_area: f64,
    /// `|K| |K°|`.
    pub product: f64,
    /// Second coordinate of `B° = (1, b)`.
    pub b: f64,
    /// First coordinate of `C° = (c, 1)`.
    pub c: f64,
    /// `|K°_1|`, `|K°_2|`.
    pub polar_pieces: [f64; 2],
    /// Test points in `K`.
    pub s: [Point<f64>; 2],
    /// Test points in `K°`.
    pub r: [Point<f64>; 2],
    /// `R_i . S_i`.
    pub pairings: [f64; 2],
    /// Gauges of `S_i` with respect to `K`.
    pub s_gauges: [f64; 2],
    /// Gauges of `R_i` with respect to `K°`.
    pub r_gauges: [f64; 2],
    /// Whether every pairing, membership and the bound hold within tolerance.
    pub bound_holds: bool,
}

/// The extreme point of `K°` in direction `axis` (0 or 1), with the tie rule
/// described in [`verify2`].
fn extreme_point(polar: &Polygon<f64>, axis: usize) -> Point<f64> {
    let other = 1 - axis;
    let top = polar.vertices().iter().map(|v| v[axis]).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<Point<f64>> = polar.vertices().iter().copied().filter(|v| v[axis] >= top - 1e-12 * top.abs().max(1.0)).collect();
    let pick = *tied.iter().max_by(|a, b| a[other].total_cmp(&b[other])).expect("nonempty polygon");
    if tied.len() > 1 && pick[other].abs() >= 1.0 - 1e-9 {
        let low = *tied.iter().min_by(|a, b| a[other].total_cmp(&b[other])).expect("nonempty polygon");
        let mut mid = [0.0; 2];
        mid[axis] = 0.5 * (pick[axis] + low[axis]);
        mid[other] = 0.5 * (pick[other] + low[other]);
        return mid;
    }
    pick
}

/// Planar verification on a normalized polygon.
///
/// `B°` is the point of `K°` with largest first coordinate; on ties the one
/// with larger second coordinate is used, unless that coordinate is `±1`, in
/// which case the midpoint of the tied edge is used. `C°` is chosen in the
/// same way with the roles of the coordinates exchanged.
pub fn verify2(p: &Polygon<f64>) -> Result<Verify2Report> {
    let area = p.area();
    let gx = p.gauge(&[1.0, 0.0]);
    let gy = p.gauge(&[0.0, 1.0]);
    let imbalance = quadrant_imbalance(p);
    if (gx - 1.0).abs() > NORMALIZED_TOL || (gy - 1.0).abs() > NORMALIZED_TOL || imbalance.abs() > NORMALIZED_TOL * area {
        return Err(Error::NotNormalized(format!(
            "gauge(e1) = {gx}, gauge(e2) = {gy}, |K1| - |K2| = {imbalance}"
        )));
    }
    let polar = p.polar();
    let polar_area = polar.area();
    let b = extreme_point(&polar, 0)[1];
    let c = extreme_point(&polar, 1)[0];
    let k1 = polar.cone_area(&[[-b, 1.0], [1.0, -c]]);
    let k2 = polar.cone_area(&[[-b, 1.0], [-1.0, c]]);
    let s = [[(1.0 - b) / (2.0 * k1), (1.0 - c) / (2.0 * k1)], [(-1.0 - b) / (2.0 * k2), (1.0 + c) / (2.0 * k2)]];
    let r = [[2.0 / area, 2.0 / area], [-2.0 / area, 2.0 / area]];
    let pairings = [r[0][0] * s[0][0] + r[0][1] * s[0][1], r[1][0] * s[1][0] + r[1][1] * s[1][1]];
    let s_gauges = [p.gauge(&s[0]), p.gauge(&s[1])];
    let r_gauges = [p.support(&r[0]), p.support(&r[1])];
    let product = area * polar_area;
    let bound_holds = pairings.iter().all(|&x| x <= 1.0 + 1e-12)
        && s_gauges.iter().chain(&r_gauges).all(|&g| g <= 1.0 + 1e-10)
        && product >= 8.0 - 1e-9;
    Ok(Verify2Report { area, polar_area, product, b, c, polar_pieces: [k1, k2], s, r, pairings, s_gauges, r_gauges, bound_holds })
}

/// The square `K` with vertices `±(1-a, 1+a)/(1+a^2)`, `±(-1-a, 1-a)/(1+a^2)`
/// and its polar `conv{±(1,a), ±(-a,1)}`.
pub fn equality_family(a: f64) -> Result<(Polygon<f64>, Polygon<f64>)> {
    if !(a > -1.0 && a <= 1.0) {
        return Err(Error::BadParameter(format!("a = {a} must lie in (-1, 1]")));
    }
    let n = 1.0 + a * a;
    let p = [(1.0 - a) / n, (1.0 + a) / n];
    let q = [(-1.0 - a) / n, (1.0 - a) / n];
    let k = Polygon::from_points(&[p, q, [-p[0], -p[1]], [-q[0], -q[1]]])?;
    let kp = Polygon::from_points(&[[1.0, a], [-a, 1.0], [-1.0, -a], [a, -1.0]])?;
    Ok((k, kp))
}

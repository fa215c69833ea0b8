//! Curve vectors, the test points `S_i` in `K` and `R_i` in `K°`, the chain
//! of inequalities leading to `|K| |K°| >= 32/3`, the cone-volume inequality
//! for triangles on the boundary, dual vertices and equality detection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::body::{ConvexBody3, Mat3, Polytope, Vec3};
use crate::error::{Error, Result};
use crate::normalize::condition_residuals;
use crate::pieces;
use crate::quadrature::{
    gauss_legendre_unit, octant_volumes, plane_measures, polar_piece_volumes, quarter_areas, volume, SphereGrid,
};
use crate::random::random_direction;

/// Membership tolerance for the test points.
pub const MEMBERSHIP_TOL: f64 = 1e-6;
/// Tolerance for the pairings `R_i . S_i <= 1`.
pub const PAIRING_TOL: f64 = 1e-8;
/// The three-dimensional lower bound.
pub const BOUND_3D: f64 = 32.0 / 3.0;

fn arr(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Signed curve vectors of the six coordinate-plane curves of `K` and of
/// their images on the boundary of `K°`, in the order `d, e, f, g, h, i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveVectors {
    /// Vectors of the curves on the boundary of `K`.
    pub body: [[f64; 3]; 6],
    /// Vectors of the image curves on the boundary of `K°`.
    pub polar: [[f64; 3]; 6],
}

impl CurveVectors {
    fn body_vec(&self, i: usize) -> Vec3 {
        Vec3::from(self.body[i])
    }

    fn polar_vec(&self, i: usize) -> Vec3 {
        Vec3::from(self.polar[i])
    }
}

/// Curve vectors of `K` and `K°`. `n_curve` sets the number of quadrature
/// nodes on each image curve of a non-polytope body.
pub fn curve_vectors(k: &ConvexBody3, n_curve: usize) -> Result<CurveVectors> {
    let polar = pieces::polar_curve_vectors(k, n_curve)?;
    let body = pieces::body_curve_vectors(&quarter_areas(k));
    Ok(CurveVectors { body: body.map(|v| arr(&v)), polar: polar.map(|v| arr(&v)) })
}

/// The four test points in `K`, the four in `K°`, and the piece volumes they use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestPoints {
    /// Points `S_1..S_4`, expected in `K`.
    pub s: [[f64; 3]; 4],
    /// Points `R_1..R_4`, expected in `K°`.
    pub r: [[f64; 3]; 4],
    /// `|K_1|..|K_4|`.
    pub pieces: [f64; 4],
    /// `|K°_1|..|K°_4|`.
    pub polar_pieces: [f64; 4],
    /// Gauges of `S_i` with respect to `K`.
    pub s_gauges: [f64; 4],
    /// Gauges of `R_i` with respect to `K°`.
    pub r_gauges: [f64; 4],
    /// Whether `|K°_i|` vanishes. `S_i` is then undefined and reported as the origin.
    pub empty_pieces: [bool; 4],
}

/// Signed combinations of the curve vectors `(d, e, f, g, h, i)` producing the four test points.
const COMBINATIONS: [[f64; 6]; 4] = [
    [1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
    [-1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
    [0.0, -1.0, 0.0, -1.0, 1.0, 0.0],
    [0.0, 1.0, -1.0, 0.0, 0.0, 1.0],
];

fn compute_test_points(k: &ConvexBody3, grid: &SphereGrid, cv: &CurveVectors) -> Result<TestPoints> {
    let oct = octant_volumes(k, grid);
    let polar_oct = polar_piece_volumes(k, grid)?;
    let mut out = TestPoints {
        s: [[0.0; 3]; 4],
        r: [[0.0; 3]; 4],
        pieces: [oct[0], oct[1], oct[2], oct[3]],
        polar_pieces: [polar_oct[0], polar_oct[1], polar_oct[2], polar_oct[3]],
        s_gauges: [0.0; 4],
        r_gauges: [0.0; 4],
        empty_pieces: [false; 4],
    };
    let polar_total: f64 = polar_oct.iter().sum();
    for (i, comb) in COMBINATIONS.iter().enumerate() {
        let mut s = Vec3::zeros();
        let mut r = Vec3::zeros();
        for (j, &c) in comb.iter().enumerate() {
            s += cv.polar_vec(j) * c;
            r += cv.body_vec(j) * c;
        }
        out.empty_pieces[i] = out.polar_pieces[i] <= 1e-12 * polar_total;
        let s = if out.empty_pieces[i] { Vec3::zeros() } else { s / (6.0 * out.polar_pieces[i]) };
        let r = r / (6.0 * out.pieces[i]);
        out.s_gauges[i] = k.gauge(&s);
        out.r_gauges[i] = k.support(&r);
        out.s[i] = arr(&s);
        out.r[i] = arr(&r);
    }
    Ok(out)
}

/// Test points `S_i = (combination of polar curve vectors) / (6 |K°_i|)` and
/// `R_i = (same combination of body curve vectors) / (6 |K_i|)`, checked for
/// membership in `K` and `K°`.
pub fn test_points(k: &ConvexBody3, grid: &SphereGrid, n_curve: usize) -> Result<TestPoints> {
    let cv = curve_vectors(k, n_curve)?;
    let tp = compute_test_points(k, grid, &cv)?;
    for i in 0..4 {
        if tp.s_gauges[i] > 1.0 + MEMBERSHIP_TOL {
            return Err(Error::MembershipViolated(format!("S_{} has gauge {}", i + 1, tp.s_gauges[i])));
        }
        if tp.r_gauges[i] > 1.0 + MEMBERSHIP_TOL {
            return Err(Error::MembershipViolated(format!("R_{} has polar gauge {}", i + 1, tp.r_gauges[i])));
        }
    }
    Ok(tp)
}

/// All quantities of the inequality chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    /// Curve vectors of `K` and `K°`.
    pub curve_vectors: CurveVectors,
    /// Test points and piece volumes.
    pub test_points: TestPoints,
    /// `R_i . S_i`.
    pub pairings: [f64; 4],
    /// Areas of the coordinate sections `Q_i(K)`.
    pub sections: [f64; 3],
    /// Areas of the coordinate projections `P_i(K°)`.
    pub projections: [f64; 3],
    /// `|Q_i(K)| |P_i(K°)|`.
    pub planar_products: [f64; 3],
    /// `|K|`.
    pub volume: f64,
    /// `|K°|`.
    pub polar_volume: f64,
    /// `|K| |K°|`.
    pub product: f64,
    /// `|K| |K°| - 32/3`.
    pub slack: f64,
    /// `(9/4) |K| |K°|`.
    pub weighted_product: f64,
    /// `sum_i |Q_i(K)| |P_i(K°)|`.
    pub planar_sum: f64,
    /// Largest octant and quarter-area residual relative to `|K|`.
    pub condition_residual: f64,
    /// Whether the body is normalized closely enough for the chain to apply.
    pub applicable: bool,
    /// Every pairing is at most `1 + 1e-8`.
    pub pairings_ok: bool,
    /// Every test point lies in its body within `1e-6`.
    pub membership_ok: bool,
    /// Every planar product is at least `8 - 1e-6`.
    pub planar_ok: bool,
    /// `(9/4) |K| |K°| >= sum_i |Q_i| |P_i|` (meaningful when applicable).
    pub weighted_ok: bool,
    /// `|K| |K°| >= 32/3 - 1e-6`.
    pub bound_ok: bool,
}

/// Evaluates the full chain. Violations are recorded in the report.
pub fn verify_chain(k: &ConvexBody3, grid: &SphereGrid, n_curve: usize) -> Result<ChainReport> {
    let cv = curve_vectors(k, n_curve)?;
    let tp = compute_test_points(k, grid, &cv)?;
    let mut pairings = [0.0; 4];
    for i in 0..4 {
        pairings[i] = Vec3::from(tp.r[i]).dot(&Vec3::from(tp.s[i]));
    }
    let measures = plane_measures(k, grid);
    let polar_measures = plane_measures(&k.polar(), grid);
    let sections = measures.sections;
    let projections = polar_measures.projections;
    let planar_products = [0, 1, 2].map(|i| sections[i] * projections[i]);
    let vol = volume(k, grid);
    let polar_volume = volume(&k.polar(), grid);
    let product = vol * polar_volume;
    let weighted_product = 2.25 * product;
    let planar_sum: f64 = planar_products.iter().sum();
    let residuals = condition_residuals(k, grid);
    let condition_residual = residuals.r23.iter().map(|r| r.abs()).fold(0.0, f64::max) / vol;
    Ok(ChainReport {
        curve_vectors: cv,
        test_points: tp,
        pairings,
        sections,
        projections,
        planar_products,
        volume: vol,
        polar_volume,
        product,
        slack: product - BOUND_3D,
        weighted_product,
        planar_sum,
        condition_residual,
        applicable: condition_residual < 1e-4,
        pairings_ok: pairings.iter().all(|&p| p <= 1.0 + PAIRING_TOL),
        membership_ok: tp.s_gauges.iter().chain(&tp.r_gauges).all(|&g| g <= 1.0 + MEMBERSHIP_TOL),
        planar_ok: planar_products.iter().all(|&p| p >= 8.0 - 1e-6),
        weighted_ok: weighted_product >= planar_sum - 1e-6 * planar_sum,
        bound_ok: product >= BOUND_3D - 1e-6,
    })
}

/// Outcome of [`cone_inequality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeCheckStats {
    /// Number of random trials.
    pub trials: usize,
    /// Trials whose margin fell below `-1e-6`.
    pub violations: usize,
    /// Smallest margin `|O*S| - (1/3) P . (C_12 + C_23 + C_31)` observed.
    pub worst_margin: f64,
}

/// `int_0^1 rho^2((1-t) a + t b) dt`.
fn chord_rho2_integral(k: &ConvexBody3, a: &Vec3, b: &Vec3) -> f64 {
    if let Some(p) = k.as_polytope() {
        return polytope_chord_integral(p, a, b);
    }
    let rule = gauss_legendre_unit(16);
    let eval = |t0: f64, t1: f64| -> f64 {
        rule.iter()
            .map(|&(u, w)| {
                let t = t0 + (t1 - t0) * u;
                let r = k.radial(&(a * (1.0 - t) + b * t));
                w * r * r
            })
            .sum::<f64>()
            * (t1 - t0)
    };
    let whole = eval(0.0, 1.0);
    adaptive_segment(&eval, 0.0, 1.0, whole, ADAPTIVE_TOL * whole.abs().max(1.0), 0)
}

/// Relative tolerance of the adaptive cone and chord integrals.
const ADAPTIVE_TOL: f64 = 1e-12;
/// Maximum bisection depth of the adaptive integrals.
const ADAPTIVE_DEPTH: usize = 30;

fn adaptive_segment(eval: &impl Fn(f64, f64) -> f64, t0: f64, t1: f64, whole: f64, tol: f64, depth: usize) -> f64 {
    let mid = 0.5 * (t0 + t1);
    let (left, right) = (eval(t0, mid), eval(mid, t1));
    if depth >= ADAPTIVE_DEPTH || (left + right - whole).abs() <= tol {
        return left + right;
    }
    adaptive_segment(eval, t0, mid, left, 0.5 * tol, depth + 1) + adaptive_segment(eval, mid, t1, right, 0.5 * tol, depth + 1)
}

/// Exact `int_0^1 dt / g(t)^2` for the piecewise linear gauge `g` of a polytope along a chord.
fn polytope_chord_integral(p: &Polytope, a: &Vec3, b: &Vec3) -> f64 {
    let lines: Vec<(f64, f64)> = p.facets().iter().map(|f| (f.normal.dot(a), f.normal.dot(&(b - a)))).collect();
    let value = |l: &(f64, f64), t: f64| l.0 + l.1 * t;
    let mut t = 0.0;
    let mut acc = 0.0;
    let mut active = (0..lines.len())
        .max_by(|&i, &j| value(&lines[i], 0.0).total_cmp(&value(&lines[j], 0.0)).then(lines[i].1.total_cmp(&lines[j].1)))
        .expect("polytope has facets");
    while t < 1.0 {
        let (a0, b0) = lines[active];
        let mut next = 1.0;
        let mut next_line = active;
        for (j, &(aj, bj)) in lines.iter().enumerate() {
            if bj > b0 {
                let cross = (a0 - aj) / (bj - b0);
                if cross > t + 1e-15 && cross < next {
                    next = cross;
                    next_line = j;
                }
            }
        }
        acc += (next - t) / ((a0 + b0 * t) * (a0 + b0 * next));
        t = next;
        active = next_line;
    }
    acc
}

/// `|O*S|` for the boundary triangle spanned by `a1, a2, a3` (positively oriented).
fn cone_volume(k: &ConvexBody3, a1: &Vec3, a2: &Vec3, a3: &Vec3) -> f64 {
    if let Some(p) = k.as_polytope() {
        return p.cone_volume(&[a2.cross(a3), a3.cross(a1), a1.cross(a2)]);
    }
    let rule = gauss_legendre_unit(8);
    let eval = |t: &[Vec3; 3]| -> f64 {
        let det = t[0].dot(&t[1].cross(&t[2]));
        let mut acc = 0.0;
        for &(u, wu) in &rule {
            for &(v, wv) in &rule {
                let (x, y) = (u, (1.0 - u) * v);
                let point = t[0] * (1.0 - x - y) + t[1] * x + t[2] * y;
                acc += wu * wv * (1.0 - u) * k.radial(&point).powi(3);
            }
        }
        det * acc / 3.0
    };
    let tri = [*a1, *a2, *a3];
    let whole = eval(&tri);
    adaptive_triangle(&eval, &tri, whole, ADAPTIVE_TOL * whole.abs().max(1.0), 0)
}

fn adaptive_triangle(eval: &impl Fn(&[Vec3; 3]) -> f64, t: &[Vec3; 3], whole: f64, tol: f64, depth: usize) -> f64 {
    let (ab, bc, ca) = ((t[0] + t[1]) * 0.5, (t[1] + t[2]) * 0.5, (t[2] + t[0]) * 0.5);
    let children = [[t[0], ab, ca], [ab, t[1], bc], [ca, bc, t[2]], [ab, bc, ca]];
    let parts = children.each_ref().map(eval);
    let sum: f64 = parts.iter().sum();
    if depth >= ADAPTIVE_DEPTH / 3 || (sum - whole).abs() <= tol {
        return sum;
    }
    children.iter().zip(parts).map(|(c, w)| adaptive_triangle(eval, c, w, 0.25 * tol, depth + 1)).sum()
}

/// Random trials of `(1/3) P . (C_12 + C_23 + C_31) <= |O*S|` for boundary
/// triangles `A_1 A_2 A_3` and points `P` of `K`.
pub fn cone_inequality_check(k: &ConvexBody3, trials: usize, seed: u64) -> ConeCheckStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut done = 0;
    while done < trials {
        let mut a: Vec<Vec3> = (0..3)
            .map(|_| {
                let u = random_direction(&mut rng);
                u * k.radial(&u)
            })
            .collect();
        let orient = a[0].dot(&a[1].cross(&a[2]));
        if orient.abs() < 1e-3 * a.iter().map(|x| x.norm()).product::<f64>() {
            continue;
        }
        if orient < 0.0 {
            a.swap(0, 1);
        }
        let u = random_direction(&mut rng);
        let p = u * (k.radial(&u) * rng.random::<f64>().cbrt());
        let mut lhs = 0.0;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let c = a[i].cross(&a[j]) * (0.5 * chord_rho2_integral(k, &a[i], &a[j]));
            lhs += p.dot(&c) / 3.0;
        }
        let margin = cone_volume(k, &a[0], &a[1], &a[2]) - lhs;
        if margin < -1e-6 {
            violations += 1;
        }
        worst = worst.min(margin);
        done += 1;
    }
    ConeCheckStats { trials, violations, worst_margin: worst }
}

/// The point `v` with `v . p_i = 1` for three independent points.
pub fn dual_vertex3(p1: &Vec3, p2: &Vec3, p3: &Vec3) -> Result<Vec3> {
    let m = Mat3::from_rows(&[p1.transpose(), p2.transpose(), p3.transpose()]);
    let scale = p1.norm() * p2.norm() * p3.norm();
    if m.determinant().abs() <= 1e-12 * scale {
        return Err(Error::SingularFace);
    }
    m.lu().solve(&Vec3::new(1.0, 1.0, 1.0)).ok_or(Error::SingularFace)
}

/// Classification used for the equality cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EqualityClass {
    /// The body is a parallelepiped.
    Parallelepiped,
    /// The polar body is a parallelepiped.
    CrossPolytopeDual,
    /// Neither.
    Neither,
}

/// True when the points are `{±a ± b ± c}` for independent `a, b, c`, up to `tol` relative.
fn is_parallelepiped(vertices: &[Vec3], tol: f64) -> bool {
    if vertices.len() != 8 {
        return false;
    }
    let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let p = vertices[0];
    let others: Vec<Vec3> = vertices[1..].iter().copied().filter(|v| (v + p).norm() > tol * scale).collect();
    let close = |x: &Vec3| vertices.iter().any(|v| (v - x).norm() <= tol * scale);
    for i in 0..others.len() {
        for j in (i + 1)..others.len() {
            for l in (j + 1)..others.len() {
                let a = (p - others[i]) * 0.5;
                let b = (p - others[j]) * 0.5;
                let c = (p - others[l]) * 0.5;
                if a.dot(&b.cross(&c)).abs() <= tol * scale.powi(3) {
                    continue;
                }
                let all = (0..8).all(|m| {
                    let s = |bit: usize| if m & (1 << bit) == 0 { 1.0 } else { -1.0 };
                    close(&(a * s(0) + b * s(1) + c * s(2)))
                });
                if all {
                    return true;
                }
            }
        }
    }
    false
}

/// Detects whether `K` or `K°` is a parallelepiped.
pub fn detect_equality(k: &ConvexBody3, tol: f64) -> EqualityClass {
    match k.as_polytope() {
        Some(p) if is_parallelepiped(p.vertices(), tol) => EqualityClass::Parallelepiped,
        Some(p) if is_parallelepiped(p.polar().vertices(), tol) => EqualityClass::CrossPolytopeDual,
        _ => EqualityClass::Neither,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Solid angle of the spherical triangle spanned by three unit vectors.
    fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
        let num = a.dot(&b.cross(c));
        let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
        2.0 * num.atan2(den)
    }

    #[test]
    fn ball_cone_volume_is_a_third_of_the_solid_angle() {
        let ball = ConvexBody3::unit_ball();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut a = [random_direction(&mut rng), random_direction(&mut rng), random_direction(&mut rng)];
            if a[0].dot(&a[1].cross(&a[2])) < 0.0 {
                a.swap(0, 1);
            }
            let exact = solid_angle(&a[0], &a[1], &a[2]) / 3.0;
            let got = cone_volume(&ball, &a[0], &a[1], &a[2]);
            assert!((got - exact).abs() < 1e-10 * exact, "{got} vs {exact}");
        }
    }

    #[test]
    fn ball_chord_integral_is_angle_over_sine() {
        let ball = ConvexBody3::unit_ball();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (a, b) = (random_direction(&mut rng), random_direction(&mut rng));
            let t = a.dot(&b).clamp(-1.0, 1.0).acos();
            if t > 3.0 {
                continue;
            }
            let got = chord_rho2_integral(&ball, &a, &b);
            assert!((got - t / t.sin()).abs() < 1e-9 * got, "{t}: {got} vs {}", t / t.sin());
        }
    }

    #[test]
    fn polytope_chord_integral_matches_quadrature() {
        let k = ConvexBody3::cube();
        let p = k.as_polytope().expect("cube is a polytope");
        let (a, b) = (Vec3::new(1.0, 0.3, -0.2), Vec3::new(-0.4, 1.0, 0.5));
        let n = 200_000;
        let dense: f64 = (0..n)
            .map(|j| {
                let t = (j as f64 + 0.5) / n as f64;
                let r = k.radial(&(a * (1.0 - t) + b * t));
                r * r / n as f64
            })
            .sum();
        assert!((polytope_chord_integral(p, &a, &b) - dense).abs() < 1e-9);
    }

    #[test]
    fn cube_cone_inequality_is_tight_at_a_vertex() {
        let k = ConvexBody3::cube();
        let a = [Vec3::new(1.0, 1.0, 1.0), Vec3::new(-1.0, 1.0, 1.0), Vec3::new(1.0, -1.0, 1.0)];
        let (a1, a2, a3) = if a[0].dot(&a[1].cross(&a[2])) > 0.0 { (a[0], a[1], a[2]) } else { (a[1], a[0], a[2]) };
        let corners = [a1, a2, a3];
        let mut lhs = 0.0;
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let c = corners[i].cross(&corners[j]) * (0.5 * chord_rho2_integral(&k, &corners[i], &corners[j]));
            lhs += Vec3::new(1.0, 1.0, 1.0).dot(&c) / 3.0;
        }
        assert!((cone_volume(&k, &a1, &a2, &a3) - lhs).abs() < 1e-12);
    }
}

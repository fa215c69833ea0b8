//! Seeded generators of random directions, rotations and centrally symmetric
//! bodies used by the property suites and the command-line sweeps.

use rand::Rng;

use crate::body::{ConvexBody3, LinearMap3, LpBall, Mat3, Polytope, Representation, Vec3};
use crate::polygon::Polygon;

/// Uniform direction on the unit sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Uniform rotation from a random unit quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let q = loop {
        let q = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0f64..1.0),
        ];
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            break q.map(|x| x / n);
        }
    };
    let [w, x, y, z] = q;
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// A linear map `I + noise` with entries of the noise in `[-amplitude, amplitude]`.
pub fn random_near_identity<R: Rng + ?Sized>(rng: &mut R, amplitude: f64) -> LinearMap3 {
    loop {
        let m = Mat3::from_fn(|i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-amplitude..=amplitude));
        if m.determinant().abs() > 0.2 {
            return LinearMap3::new(m).expect("determinant checked");
        }
    }
}

/// Convex hull of `n_pairs` random antipodal pairs at radii in `[0.5, 1.5]`,
/// retried until the hull is full dimensional.
pub fn random_symmetric_polytope<R: Rng + ?Sized>(rng: &mut R, n_pairs: usize) -> ConvexBody3 {
    loop {
        let mut pts = Vec::with_capacity(2 * n_pairs);
        for _ in 0..n_pairs {
            let v = random_direction(rng) * rng.random_range(0.5..1.5);
            pts.push(v);
            pts.push(-v);
        }
        if let Ok(p) = Polytope::from_vertices(&pts) {
            return ConvexBody3::new(Representation::Polytope(p), "random symmetric polytope");
        }
    }
}

/// A randomly rotated `l_p` ball with `p` in `[1.5, 8]` and semi-axes in `[0.5, 2]`.
pub fn random_lp_ball<R: Rng + ?Sized>(rng: &mut R) -> ConvexBody3 {
    let p = rng.random_range(1.5..8.0);
    let axes = [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
    let ball = ConvexBody3::new(Representation::LpBall(LpBall::new(p, axes).expect("valid parameters")), "lp ball");
    let rot = LinearMap3::new(random_rotation(rng)).expect("rotation");
    ball.apply_linear(&rot).with_label(format!("rotated l_{p:.3} ball"))
}

/// The cube under a random map close to the identity.
pub fn random_sheared_cube<R: Rng + ?Sized>(rng: &mut R) -> ConvexBody3 {
    ConvexBody3::cube().apply_linear(&random_near_identity(rng, 0.5)).with_label("sheared cube")
}

/// A smooth strongly convex body: an `l_4` or `l_6` ball with random
/// semi-axes under a random map close to the identity.
pub fn random_smooth_body<R: Rng + ?Sized>(rng: &mut R) -> ConvexBody3 {
    let p = if rng.random_bool(0.5) { 4.0 } else { 6.0 };
    let axes = [rng.random_range(0.6..1.6), rng.random_range(0.6..1.6), rng.random_range(0.6..1.6)];
    let ball = ConvexBody3::new(Representation::LpBall(LpBall::new(p, axes).expect("valid parameters")), "lp ball");
    ball.apply_linear(&random_near_identity(rng, 0.4)).with_label(format!("smooth l_{p} image"))
}

/// The cube with the vertices of one half moved by up to `eps` (and their
/// antipodes moved correspondingly).
pub fn perturbed_cube<R: Rng + ?Sized>(rng: &mut R, eps: f64) -> ConvexBody3 {
    loop {
        let mut pts = Vec::with_capacity(8);
        for s in [[1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [1.0, -1.0, 1.0]] {
            let v = Vec3::from(s) + Vec3::from_fn(|_, _| rng.random_range(-eps..=eps));
            pts.push(v);
            pts.push(-v);
        }
        if let Ok(p) = Polytope::from_vertices(&pts) {
            return ConvexBody3::new(Representation::Polytope(p), "perturbed cube");
        }
    }
}

/// A centrally symmetric polygon from `n_pairs` antipodal pairs at radii in `[0.5, 1.5]`.
pub fn random_symmetric_polygon<R: Rng + ?Sized>(rng: &mut R, n_pairs: usize) -> Polygon<f64> {
    loop {
        let mut pts = Vec::with_capacity(2 * n_pairs);
        for _ in 0..n_pairs {
            let t = rng.random_range(0.0..std::f64::consts::PI);
            let r = rng.random_range(0.5..1.5);
            pts.push([r * t.cos(), r * t.sin()]);
            pts.push([-r * t.cos(), -r * t.sin()]);
        }
        if let Ok(p) = Polygon::from_points(&pts) {
            return p;
        }
    }
}

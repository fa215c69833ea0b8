use std::f64::consts::{FRAC_PI_2, PI};

use mahler_core::body::{boundary_map, Polytope};
use mahler_core::bound3d::{
    cone_inequality_check, curve_vectors, detect_equality, dual_vertex3, test_points, verify_chain, EqualityClass,
    BOUND_3D,
};
use mahler_core::normalize::find_normalization;
use mahler_core::quadrature::{make_grid, plane_bases, plane_measures, polar_piece_volumes, volume_product};
use mahler_core::random::{random_direction, random_lp_ball, random_sheared_cube, random_smooth_body, random_symmetric_polytope};
use mahler_core::{ConvexBody3, Error, LinearMap3, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plane and parameter range of each of the six curves `d, e, f, g, h, i`.
fn curve_arc(i: usize) -> (Vec3, Vec3, f64, f64) {
    let (b1, b2) = plane_bases()[i / 2];
    if i.is_multiple_of(2) {
        (b1, b2, 0.0, FRAC_PI_2)
    } else {
        (b1, b2, FRAC_PI_2, PI)
    }
}

/// `sum a_k x a_{k+1}` over the facet normals met by a dense walk along the curve.
fn polytope_walk_oracle(p: &Polytope, i: usize, reversed: bool) -> Vec3 {
    let (b1, b2, t0, t1) = curve_arc(i);
    let n = 200_000;
    let argmax = |x: &Vec3| {
        let mut best = 0;
        for (j, f) in p.facets().iter().enumerate() {
            if f.normal.dot(x) > p.facets()[best].normal.dot(x) {
                best = j;
            }
        }
        p.facets()[best].normal
    };
    let mut acc = Vec3::zeros();
    let param = |j: usize| {
        let s = j as f64 / n as f64;
        let s = if reversed { 1.0 - s } else { s };
        t0 + (t1 - t0) * s
    };
    let mut prev = argmax(&(b1 * param(0).cos() + b2 * param(0).sin()));
    for j in 1..=n {
        let t = param(j);
        let next = argmax(&(b1 * t.cos() + b2 * t.sin()));
        if next != prev {
            acc += prev.cross(&next);
            prev = next;
        }
    }
    acc
}

/// `sum y_k x y_{k+1}` for the boundary-map image of a dense polyline of the curve.
fn smooth_walk_oracle(k: &ConvexBody3, i: usize) -> Vec3 {
    let (b1, b2, t0, t1) = curve_arc(i);
    let n = 20_000;
    let image = |t: f64| {
        let u = b1 * t.cos() + b2 * t.sin();
        boundary_map(k, &(u * k.radial(&u))).unwrap()
    };
    let mut acc = Vec3::zeros();
    let mut prev = image(t0);
    for j in 1..=n {
        let next = image(t0 + (t1 - t0) * j as f64 / n as f64);
        acc += prev.cross(&next);
        prev = next;
    }
    acc
}

#[test]
fn cube_curve_vectors() {
    let cv = curve_vectors(&ConvexBody3::cube(), 512).unwrap();
    let expected_body = [[2.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0], [0.0, 0.0, 2.0]];
    for i in 0..6 {
        for c in 0..3 {
            assert!((cv.body[i][c] - expected_body[i][c]).abs() < 1e-14, "{:?}", cv.body);
        }
    }
    let cross = curve_vectors(&ConvexBody3::cross_polytope(), 512).unwrap();
    for i in 0..6 {
        assert!((Vec3::from(cross.body[i]).norm() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn polytope_polar_curve_vectors_match_dense_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bodies = vec![ConvexBody3::cube(), random_sheared_cube(&mut rng)];
    for _ in 0..4 {
        bodies.push(random_symmetric_polytope(&mut rng, 10));
    }
    for k in &bodies {
        let cv = curve_vectors(k, 512).unwrap();
        let p = k.as_polytope().unwrap();
        for i in 0..6 {
            let oracle = polytope_walk_oracle(p, i, false);
            let reversed = polytope_walk_oracle(p, i, true);
            assert!((oracle + reversed).norm() < 1e-12);
            assert!((Vec3::from(cv.polar[i]) - oracle).norm() < 1e-10, "{} curve {i}: {:?} vs {oracle}", k.label(), cv.polar[i]);
        }
    }
}

#[test]
fn smooth_polar_curve_vectors_match_dense_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in [random_smooth_body(&mut rng), random_lp_ball(&mut rng), ConvexBody3::unit_ball()] {
        let cv = curve_vectors(&k, 512).unwrap();
        for i in 0..6 {
            let oracle = smooth_walk_oracle(&k, i);
            let got = Vec3::from(cv.polar[i]);
            assert!((got - oracle).norm() < 1e-6 * oracle.norm().max(1.0), "{} curve {i}: {got} vs {oracle}", k.label());
        }
    }
}

#[test]
fn polar_curve_vectors_add_up_to_polar_projections() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = make_grid(32, 64).unwrap();
    for k in [random_symmetric_polytope(&mut rng, 9), random_smooth_body(&mut rng), ConvexBody3::cube()] {
        let cv = curve_vectors(&k, 512).unwrap();
        let proj = plane_measures(&k.polar(), &g).projections;
        for axis in 0..3 {
            let sum = cv.polar[2 * axis][axis] + cv.polar[2 * axis + 1][axis];
            assert!((sum - proj[axis]).abs() < 1e-6 * proj[axis], "{} axis {axis}: {sum} vs {}", k.label(), proj[axis]);
        }
    }
}

#[test]
fn cube_test_points_are_tight() {
    let g = make_grid(32, 64).unwrap();
    let tp = test_points(&ConvexBody3::cube(), &g, 512).unwrap();
    let third = 1.0 / 3.0;
    assert!((Vec3::from(tp.r[0]) - Vec3::repeat(third)).norm() < 1e-14, "{:?}", tp.r[0]);
    for i in 0..4 {
        assert!(tp.s_gauges[i] <= 1.0 + 1e-12 && tp.r_gauges[i] <= 1.0 + 1e-12);
        assert!((Vec3::from(tp.r[i]).dot(&Vec3::from(tp.s[i])) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn first_test_point_inequality_on_random_polar_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = make_grid(64, 128).unwrap();
    for k in [random_symmetric_polytope(&mut rng, 8), random_smooth_body(&mut rng)] {
        let cv = curve_vectors(&k, 512).unwrap();
        let pieces = polar_piece_volumes(&k, &g).unwrap();
        let w = Vec3::from(cv.polar[0]) + Vec3::from(cv.polar[2]) + Vec3::from(cv.polar[4]);
        let kp = k.polar();
        for _ in 0..1000 {
            let u = random_direction(&mut rng);
            let y = u * kp.radial(&u) * rng.random::<f64>().cbrt();
            assert!(w.dot(&y) <= 6.0 * pieces[0] * (1.0 + 1e-6), "{}", k.label());
        }
    }
}

#[test]
fn empty_polar_pieces_are_reported() {
    let pts = [Vec3::new(1.0, 0.2, 0.3), Vec3::new(0.1, 1.0, 0.2), Vec3::new(0.3, 0.1, 1.0)];
    let all: Vec<Vec3> = pts.iter().flat_map(|&v| [v, -v]).collect();
    let k = ConvexBody3::new(mahler_core::body::Representation::Polytope(Polytope::from_vertices(&all).unwrap()), "octahedron");
    let g = make_grid(16, 32).unwrap();
    let chain = verify_chain(&k, &g, 256).unwrap();
    assert!(chain.test_points.empty_pieces.iter().any(|&e| e));
    assert!(chain.pairings.iter().all(|p| p.is_finite()));
    assert!(chain.pairings_ok && chain.membership_ok && chain.bound_ok);
}

#[test]
fn chain_on_the_cube() {
    let g = make_grid(32, 64).unwrap();
    let chain = verify_chain(&ConvexBody3::cube(), &g, 512).unwrap();
    assert!((chain.product - 32.0 / 3.0).abs() < 1e-12);
    for p in chain.planar_products {
        assert!((p - 8.0).abs() < 1e-12);
    }
    for p in chain.pairings {
        assert!((p - 1.0).abs() < 1e-12);
    }
    assert!(chain.applicable && chain.pairings_ok && chain.membership_ok && chain.planar_ok && chain.weighted_ok && chain.bound_ok);
    assert!(chain.slack.abs() < 1e-12);
}

#[test]
fn chain_on_the_ball() {
    let g = make_grid(64, 128).unwrap();
    let chain = verify_chain(&ConvexBody3::unit_ball(), &g, 512).unwrap();
    let expected = (4.0 * PI / 3.0).powi(2);
    assert!((chain.product - expected).abs() < 1e-3 * expected);
    assert!(chain.slack > 6.0);
    assert!(chain.applicable && chain.pairings_ok && chain.membership_ok && chain.planar_ok && chain.weighted_ok);
}

#[test]
fn chain_on_a_normalized_smooth_body_agrees_with_volume_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = make_grid(64, 128).unwrap();
    let k = random_smooth_body(&mut rng);
    let n = find_normalization(&k, &g).unwrap();
    let chain = verify_chain(&n.normalized_body, &g, 512).unwrap();
    assert!(chain.applicable && chain.bound_ok && chain.planar_ok && chain.weighted_ok);
    let independent = volume_product(&k, &g);
    assert!((chain.product - independent).abs() < 1e-6 * independent);
}

#[test]
fn unnormalized_body_is_flagged() {
    let m = LinearMap3::from_rows([[1.0, 0.4, 0.1], [0.0, 1.0, 0.5], [0.2, 0.0, 1.0]]).unwrap();
    let g = make_grid(32, 64).unwrap();
    let chain = verify_chain(&ConvexBody3::unit_ball().apply_linear(&m), &g, 512).unwrap();
    assert!(!chain.applicable);
}

#[test]
fn cone_inequality_on_random_bodies() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [random_symmetric_polytope(&mut rng, 10), random_smooth_body(&mut rng), ConvexBody3::cube()] {
        let stats = cone_inequality_check(&k, 1000, 11);
        assert_eq!(stats.trials, 1000);
        assert_eq!(stats.violations, 0, "{}: worst {}", k.label(), stats.worst_margin);
    }
    let a = cone_inequality_check(&ConvexBody3::cube(), 50, 3);
    let b = cone_inequality_check(&ConvexBody3::cube(), 50, 3);
    assert_eq!(a, b);
}

#[test]
fn dual_vertex3_solves_the_face_system() {
    let (p1, p2, p3) = (Vec3::new(1.0, 0.2, 0.1), Vec3::new(-0.3, 1.1, 0.0), Vec3::new(0.2, 0.1, 0.9));
    let v = dual_vertex3(&p1, &p2, &p3).unwrap();
    for p in [p1, p2, p3] {
        assert!((v.dot(&p) - 1.0).abs() < 1e-14);
    }
    assert_eq!(dual_vertex3(&p1, &p2, &(p1 + p2)), Err(Error::SingularFace));
}

#[test]
fn equality_cases_are_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    assert_eq!(detect_equality(&ConvexBody3::cube(), 1e-9), EqualityClass::Parallelepiped);
    assert_eq!(detect_equality(&ConvexBody3::cross_polytope(), 1e-9), EqualityClass::CrossPolytopeDual);
    let sheared = random_sheared_cube(&mut rng);
    assert_eq!(detect_equality(&sheared, 1e-9), EqualityClass::Parallelepiped);
    assert_eq!(detect_equality(&sheared.polar(), 1e-9), EqualityClass::CrossPolytopeDual);
    assert_eq!(detect_equality(&ConvexBody3::unit_ball(), 1e-9), EqualityClass::Neither);
    let g = make_grid(16, 32).unwrap();
    for _ in 0..20 {
        let k = random_symmetric_polytope(&mut rng, 7);
        if volume_product(&k, &g) > BOUND_3D + 1e-3 {
            assert_eq!(detect_equality(&k, 1e-6), EqualityClass::Neither);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_polytopes_satisfy_the_bound(seed in any::<u64>(), pairs in 3usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_symmetric_polytope(&mut rng, pairs);
        let g = make_grid(16, 32).unwrap();
        prop_assert!(volume_product(&k, &g) >= BOUND_3D - 1e-9);
    }

    #[test]
    fn polytope_pairings_are_bounded(seed in any::<u64>(), pairs in 3usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_symmetric_polytope(&mut rng, pairs);
        let g = make_grid(16, 32).unwrap();
        let chain = verify_chain(&k, &g, 256).unwrap();
        prop_assert!(chain.pairings_ok, "{:?}", chain.pairings);
        prop_assert!(chain.membership_ok);
    }
}

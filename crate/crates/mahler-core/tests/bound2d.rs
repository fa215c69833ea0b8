use std::f64::consts::PI;

use mahler_core::bound2d::{dual_vertex2, equality_family, normalize2, polar2, verify2};
use mahler_core::polygon::{clip_halfplane, Point};
use mahler_core::random::random_symmetric_polygon;
use mahler_core::{Error, ExactPolygon2, Polygon2};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

/// Twice-signed-area shoelace over exact rationals, written independently of the crate.
fn exact_area(points: &[[BigRational; 2]]) -> BigRational {
    let n = points.len();
    let mut acc = BigRational::zero();
    for i in 0..n {
        let (a, b) = (&points[i], &points[(i + 1) % n]);
        acc += &a[0] * &b[1] - &a[1] * &b[0];
    }
    acc / BigRational::from_integer(2.into())
}

/// Exact polar vertices: the functional of each edge.
fn exact_polar(points: &[[BigRational; 2]]) -> Vec<[BigRational; 2]> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (p, q) = (&points[i], &points[(i + 1) % n]);
            let det = &p[0] * &q[1] - &p[1] * &q[0];
            [(&q[1] - &p[1]) / &det, (&p[0] - &q[0]) / &det]
        })
        .collect()
}

fn quadrant(ring: &[Point<f64>], sx: f64, sy: f64) -> f64 {
    let r = clip_halfplane(ring, &[sx, 0.0]);
    let r = clip_halfplane(&r, &[0.0, sy]);
    let n = r.len();
    (0..n).map(|i| r[i][0] * r[(i + 1) % n][1] - r[i][1] * r[(i + 1) % n][0]).sum::<f64>() / 2.0
}

fn regular(n: usize, phase: f64) -> Polygon2 {
    let pts: Vec<Point<f64>> = (0..n).map(|k| {
        let t = phase + 2.0 * PI * k as f64 / n as f64;
        [t.cos(), t.sin()]
    }).collect();
    Polygon2::from_points(&pts).unwrap()
}

fn same_vertex_set(a: &Polygon2, b: &Polygon2, tol: f64) -> bool {
    a.vertices().len() == b.vertices().len()
        && a.vertices().iter().all(|v| b.vertices().iter().any(|w| (v[0] - w[0]).abs() < tol && (v[1] - w[1]).abs() < tol))
}

#[test]
fn polygon_construction_errors() {
    assert!(matches!(Polygon2::from_points(&[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]]), Err(Error::NotSymmetric(_))));
    assert!(matches!(Polygon2::from_points(&[[1.0, 1.0], [-1.0, -1.0], [2.0, 2.0], [-2.0, -2.0]]), Err(Error::DegenerateBody(_))));
    assert_eq!(dual_vertex2(&[1.0, 1.0], &[-2.0, -2.0]), Err(Error::CollinearPoints));
}

#[test]
fn polar_is_an_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let p = random_symmetric_polygon(&mut rng, 5);
        assert!(same_vertex_set(&p, &polar2(&polar2(&p)), 1e-12));
    }
}

#[test]
fn square_family_matches_closed_forms() {
    for a in [0.0, 0.3, 0.5, 0.7, 1.0] {
        let (k, kp) = equality_family(a).unwrap();
        let s = 1.0 + a * a;
        assert!((k.area() - 4.0 / s).abs() < 1e-12);
        assert!((kp.area() - 2.0 * s).abs() < 1e-12);
        assert!((k.area() * kp.area() - 8.0).abs() < 1e-12);
        assert!(same_vertex_set(&polar2(&k), &kp, 1e-12));
        assert!(k.is_parallelogram());
    }
    let (k, _) = equality_family(0.5).unwrap();
    assert!((k.area() - 3.2).abs() < 1e-12);
    let (k, _) = equality_family(1.0).unwrap();
    let expected = Polygon2::from_points(&[[0.0, 1.0], [0.0, -1.0], [-1.0, 0.0], [1.0, 0.0]]).unwrap();
    assert!(same_vertex_set(&k, &expected, 1e-15));
    for bad in [-1.0, 1.5, f64::NAN] {
        assert!(matches!(equality_family(bad), Err(Error::BadParameter(_))));
    }
}

#[test]
fn square_family_product_is_exactly_eight_in_rationals() {
    let a = BigRational::new(3.into(), 10.into());
    let one = BigRational::one();
    let n = &one + &a * &a;
    let p = [(&one - &a) / &n, (&one + &a) / &n];
    let q = [-(&one + &a) / &n, (&one - &a) / &n];
    let k = ExactPolygon2::from_points(&[p.clone(), q.clone(), [-p[0].clone(), -p[1].clone()], [-q[0].clone(), -q[1].clone()]]).unwrap();
    let product = k.area() * k.polar().area();
    assert_eq!(product, BigRational::from_integer(8.into()));
}

#[test]
fn verify2_on_the_square_family() {
    for a in [0.0, 0.3, 0.7, 1.0] {
        let (k, _) = equality_family(a).unwrap();
        let (_, q) = normalize2(&k);
        let rep = verify2(&q).unwrap();
        assert!((rep.product - 8.0).abs() < 1e-10);
        assert!(rep.bound_holds);
    }
    let square = Polygon2::from_points(&[[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]).unwrap();
    let (_, q) = normalize2(&square);
    let rep = verify2(&q).unwrap();
    assert!((rep.product - 8.0).abs() < 1e-12);
    for p in rep.pairings {
        assert!((p - 1.0).abs() < 1e-10, "{:?}", rep.pairings);
    }
}

#[test]
fn verify2_requires_normalized_input() {
    let p = Polygon2::from_points(&[[2.0, 0.0], [0.0, 1.0], [-2.0, 0.0], [0.0, -1.0], [1.0, 0.8], [-1.0, -0.8]]).unwrap();
    assert!(matches!(verify2(&p), Err(Error::NotNormalized(_))));
}

#[test]
fn rotated_square_is_balanced() {
    let square = regular(4, PI / 4.0 + PI / 6.0);
    let (_, q) = normalize2(&square);
    let ring = q.vertices();
    assert!((quadrant(ring, 1.0, 1.0) - quadrant(ring, -1.0, 1.0)).abs() < 1e-10);
}

#[test]
fn random_hexagon_balance_against_shoelace_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let p = random_symmetric_polygon(&mut rng, 3);
        let (map, q) = normalize2(&p);
        let ring = q.vertices();
        let (k1, k2) = (quadrant(ring, 1.0, 1.0), quadrant(ring, -1.0, 1.0));
        assert!((k1 - k2).abs() < 1e-10 * q.area());
        assert!((q.gauge(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((q.gauge(&[0.0, 1.0]) - 1.0).abs() < 1e-12);
        let det = map[0][0] * map[1][1] - map[0][1] * map[1][0];
        assert!((q.area() - det.abs() * p.area()).abs() < 1e-12 * q.area());
    }
}

#[test]
fn regular_fourteen_gon_against_rational_shoelace() {
    let p = regular(14, 0.1);
    let (_, q) = normalize2(&p);
    let rep = verify2(&q).unwrap();
    assert!(rep.bound_holds && rep.product >= 8.0);
    let exact: Vec<[BigRational; 2]> = p.vertices().iter().map(|v| [rat(v[0]), rat(v[1])]).collect();
    let exact_product = exact_area(&exact) * exact_area(&exact_polar(&exact));
    let expected = exact_product.to_f64().unwrap();
    assert!((p.area() * p.polar().area() - expected).abs() < 1e-13 * expected);
    assert!((rep.product - expected).abs() < 1e-10 * expected);
    let closed = 14.0 * 14.0 * (PI / 14.0).sin().powi(2);
    assert!((expected - closed).abs() < 1e-12 * closed);
}

#[test]
fn test_points_lie_in_their_bodies() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for pairs in [2, 3, 4, 6, 9] {
        let p = random_symmetric_polygon(&mut rng, pairs);
        let (_, q) = normalize2(&p);
        let rep = verify2(&q).unwrap();
        for g in rep.s_gauges.iter().chain(&rep.r_gauges) {
            assert!(*g <= 1.0 + 1e-10);
        }
        for x in rep.pairings {
            assert!(x <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn edge_through_b_and_first_test_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut checked = 0;
    while checked < 5 {
        let p = random_symmetric_polygon(&mut rng, 4);
        let (_, q) = normalize2(&p);
        let rep = verify2(&q).unwrap();
        if (1.0 - rep.c).abs() < 1e-3 {
            continue;
        }
        let y = dual_vertex2(&[1.0, 0.0], &rep.s[0]).unwrap();
        let expected = [1.0, (2.0 * rep.polar_pieces[0] - 1.0 + rep.b) / (1.0 - rep.c)];
        assert!((y[0] - expected[0]).abs() < 1e-10 && (y[1] - expected[1]).abs() < 1e-9, "{y:?} vs {expected:?}");
        checked += 1;
    }
}

#[test]
fn near_minimal_polygons_are_parallelograms() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..200 {
        let pairs = rng.random_range(2..6);
        let p = random_symmetric_polygon(&mut rng, pairs);
        if p.area() * p.polar().area() < 8.0 + 1e-6 {
            assert!(p.is_parallelogram());
        }
    }
    assert!(regular(4, 0.3).is_parallelogram());
    assert!(!regular(6, 0.3).is_parallelogram());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn planar_product_is_at_least_eight(seed in any::<u64>(), pairs in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_symmetric_polygon(&mut rng, pairs);
        let (_, q) = normalize2(&p);
        let rep = verify2(&q).unwrap();
        prop_assert!(rep.bound_holds);
        prop_assert!(rep.product >= 8.0 - 1e-9);
        prop_assert!((rep.product - p.area() * p.polar().area()).abs() < 1e-9 * rep.product);
    }

    #[test]
    fn gauge_and_support_are_dual(seed in any::<u64>(), t in 0.0f64..6.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_symmetric_polygon(&mut rng, 5);
        let u = [t.cos(), t.sin()];
        prop_assert!((p.support(&u) - p.polar().gauge(&u)).abs() < 1e-12);
    }
}

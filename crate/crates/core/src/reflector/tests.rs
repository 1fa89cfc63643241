use super::*;
use crate::suite;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(dim: u32, level: u32) -> Arc<DirectionGrid> {
    Arc::new(make_grid(dim, level).unwrap())
}

fn dense_min(x: &Direction, c: f64) -> f64 {
    make_grid(2, 5)
        .unwrap()
        .points()
        .iter()
        .filter(|y| 1.0 - x.dot(y) > 1e-10)
        .map(|y| c / (1.0 - x.dot(y)))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn constant_field_gives_unit_sphere() {
    let g = grid(2, 2);
    let p = suite::sphere(&g, 2.0).unwrap();
    let rho = radial_from_focal(&p, &g, 1e-9).unwrap();
    for (x, r) in g.points().iter().zip(rho.values()) {
        assert!((r - 1.0).abs() < 1e-15);
        // No direction of a much finer grid does better than the antipode.
        assert!(dense_min(x, 2.0) >= 1.0 - 1e-15);
    }
}

#[test]
fn lens_radial_function() {
    for dim in [1, 2] {
        let g = grid(dim, 3);
        let p = suite::lens(&g).unwrap();
        let n = suite::pole(dim);
        let rho = radial_from_focal(&p, &g, 1e-9).unwrap();
        for (x, r) in g.points().iter().zip(rho.values()) {
            let brute = [n, -n]
                .iter()
                .filter(|y| 1.0 - x.dot(y) > 1e-10)
                .map(|y| 1.0 / (1.0 - x.dot(y)))
                .fold(f64::INFINITY, f64::min);
            assert!((r - brute).abs() < 1e-15);
            assert!((r - 1.0 / (1.0 + x.dot(&n).abs())).abs() < 1e-15);
        }
    }
    let g = grid(2, 3);
    let rho = radial_from_focal(&suite::lens(&g).unwrap(), &g, 1e-9).unwrap();
    assert_eq!(rho.radius(&Direction::e1()), Some(1.0));
    assert_eq!(rho.radius(&Direction::e3()), Some(0.5));
}

#[test]
fn single_member_is_unbounded() {
    let g = grid(2, 2);
    let p = FocalField::from_entries(g.clone(), &[(Direction::e3(), 1.0)], f64::INFINITY).unwrap();
    let err = radial_from_focal(&p, &g, 1e-9).unwrap_err();
    assert_eq!(err.name(), "unbounded-reflector");
    assert_eq!(build_reflector(&p, 2, 1e-9).unwrap_err().name(), "unbounded-reflector");
}

#[test]
fn off_grid_axis_is_rejected() {
    let g = grid(2, 2);
    let y = Direction::new(Vector3::new(0.1, 0.2, 0.9)).unwrap();
    assert!(FocalField::from_entries(g, &[(y, 1.0)], f64::INFINITY).is_err());
}

#[test]
fn focal_of_unit_sphere_is_two() {
    let g = grid(2, 3);
    let rho = RadialField::new(g.clone(), vec![1.0; g.len()]).unwrap();
    let p = focal_from_radial(&rho, &g, 1e-9).unwrap();
    assert!(p.values().iter().all(|v| (v - 2.0).abs() < 1e-15));
}

#[test]
fn focal_of_sampled_lens() {
    let g = grid(2, 4);
    let values = g.points().iter().map(|x| 1.0 / (1.0 + x.vector().z.abs())).collect();
    let rho = RadialField::new(g.clone(), values).unwrap();
    let p = focal_from_radial(&rho, &g, 1e-9).unwrap();
    // Brute force over the same samples: (1 + x1) / (1 + |x3|) peaks at e1.
    let brute = g
        .points()
        .iter()
        .map(|x| (1.0 + x.vector().x) / (1.0 + x.vector().z.abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((brute - 2.0).abs() < 1e-15);
    assert!((p.value_at(&-Direction::e1()).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn focal_recovers_a_generating_paraboloid() {
    let g = grid(2, 3);
    let axis = *g.point(17);
    let pt = 1.3;
    let rho = RadialField::from_fn(g.clone(), move |x: &Direction| {
        let d = 1.0 - x.dot(&axis);
        if d > 1e-10 {
            (pt / d).min(pt)
        } else {
            pt
        }
    })
    .unwrap();
    let p = focal_from_radial(&rho, &g, 1e-9).unwrap();
    assert!((p.value(17) - pt).abs() < 1e-9);
}

#[test]
fn sphere_reflector() {
    let g = grid(2, 2);
    let r = build_reflector(&suite::sphere(&g, 2.0).unwrap(), 2, 1e-9).unwrap();
    assert!(r.is_exact());
    for (i, s) in r.support_samples().iter().enumerate() {
        assert!((r.radial().value(i) - 1.0).abs() < 1e-12);
        assert!((s.h - 1.0).abs() < 1e-12);
        let off = (s.contact - g.point(i).vector()).norm();
        assert!(off < 1e-12, "{i} {off}");
        assert!(s.gradient.norm() < g.resolution());
    }
    assert!(r.closure().values().iter().all(|v| (v - 2.0).abs() < 1e-12));
    for x in g.points().iter().step_by(7) {
        let map = reflector_map(&r, x, MAP_EPS);
        assert_eq!(map.len(), 1);
        assert!(map[0].angle(&-*x) < 1e-12);
    }
}

#[test]
fn lens_reflector() {
    let g = grid(2, 3);
    let r = build_reflector(&suite::lens(&g).unwrap(), 3, 1e-9).unwrap();
    assert!(r.is_exact());
    let (h, contact) = support_function(&r, &Direction::e1());
    assert!((h - 1.0).abs() < 1e-12);
    assert!((contact - Vector3::x()).norm() < 1e-6);
    let (h, contact) = support_function(&r, &Direction::e3());
    assert!((h - 0.5).abs() < 1e-12);
    assert!((contact - Vector3::z() * 0.5).norm() < 1e-6);
    // Brute force of max x3 / (1 + |x3|) on a fine grid.
    let brute = make_grid(2, 5)
        .unwrap()
        .points()
        .iter()
        .map(|x| x.vector().z / (1.0 + x.vector().z.abs()))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((brute - 0.5).abs() < 1e-15);

    assert!((r.focal_at(&-Direction::e1()) - 2.0).abs() < 1e-12);

    let top = reflector_map(&r, &Direction::e3(), MAP_EPS);
    assert_eq!(top.len(), 1);
    assert!(top[0].angle(&-Direction::e3()) < 1e-12);

    let edge = reflector_map(&r, &Direction::e1(), MAP_EPS);
    for y in [Direction::e3(), -Direction::e3(), -Direction::e1()] {
        assert!(edge.iter().any(|z| z.angle(&y) < 1e-12), "{y:?} missing");
    }

    let tol = 5.0 * g.resolution() * r.diameter();
    let x = surface_from_support(&r, &Direction::e1());
    assert!((x - Vector3::x()).norm() <= tol);
}

#[test]
fn near_zero_parameter_is_degenerate() {
    let g = grid(2, 2);
    let p = suite::sphere(&g, 2.0).unwrap().with_value(5, 1e-14).unwrap();
    assert_eq!(build_reflector(&p, 2, 1e-9).unwrap_err().name(), "degenerate-reflector");
}

#[test]
fn support_dominates_radius_and_samples() {
    let g = grid(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = suite::random_family(&g, 5..=20, 0.5..3.0, &mut rng).unwrap();
    let r = build_reflector(&p, 3, 1e-9).unwrap();
    let pts: Vec<Vector3<f64>> = g
        .points()
        .iter()
        .zip(r.radial().values())
        .map(|(x, rho)| x.vector() * *rho)
        .collect();
    for (u, s) in g.points().iter().zip(r.support_samples()) {
        assert!(s.h > 0.0);
        assert!(s.h >= r.radius(u) - 1e-12);
        let sampled = pts.iter().map(|x| x.dot(u.vector())).fold(f64::NEG_INFINITY, f64::max);
        assert!(s.h >= sampled - 1e-12);
        let x = u.vector() * s.h + s.gradient;
        assert!((x - s.contact).norm() <= 5.0 * g.resolution() * r.diameter());
    }
    // Supporting inequality for all grid pairs with finite p.
    for (x, rho) in g.points().iter().zip(r.radial().values()) {
        for (y, py) in g.points().iter().zip(p.values()) {
            if py.is_finite() {
                assert!(rho * (1.0 - x.dot(y)) <= py + 1e-9);
            }
        }
    }
}

#[test]
fn gradient_jump_shrinks_on_the_lens() {
    let jumps: Vec<f64> = (3..=4)
        .map(|level| {
            let g = grid(2, level);
            build_reflector(&suite::lens(&g).unwrap(), level, 1e-9)
                .unwrap()
                .gradient_jump()
        })
        .collect();
    for w in jumps.windows(2) {
        assert!(w[1] < 0.7 * w[0], "{jumps:?}");
    }
}

fn family_strategy() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radial_transform_laws(seed in family_strategy(), c in 0.2f64..5.0) {
        let g = grid(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1 = suite::random_family(&g, 2..=12, 0.5..3.0, &mut rng).unwrap();
        let bump: Vec<f64> = p1
            .values()
            .iter()
            .map(|v| if v.is_finite() { v * (1.0 + 0.5 * v.fract()) } else { *v })
            .collect();
        let p2 = FocalField::new(g.clone(), bump).unwrap();
        let r1 = radial_from_focal(&p1, &g, 1e-9).unwrap();
        let r2 = radial_from_focal(&p2, &g, 1e-9).unwrap();
        let rc = radial_from_focal(&p1.scaled(c).unwrap(), &g, 1e-9).unwrap();
        for (i, x) in g.points().iter().enumerate() {
            // Never above any single member's polar radius.
            for (y, py) in g.points().iter().zip(p1.values()) {
                if py.is_finite() && 1.0 - x.dot(y) > 1e-10 {
                    prop_assert!(r1.value(i) <= py / (1.0 - x.dot(y)));
                }
            }
            prop_assert!(r1.value(i) <= r2.value(i));
            prop_assert!((rc.value(i) - c * r1.value(i)).abs() <= 1e-12 * rc.value(i));
        }
        let f1 = focal_from_radial(&r1, &g, 1e-9).unwrap();
        let fc = focal_from_radial(&r1.scaled(c).unwrap(), &g, 1e-9).unwrap();
        for (a, b) in f1.values().iter().zip(fc.values()) {
            prop_assert!((b - c * a).abs() <= 1e-9 * b);
        }
    }
}

use std::sync::Arc;

use nalgebra::Vector3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::optics::reflect;
use crate::reflector::{build_reflector, FocalField, MAP_EPS};
use crate::sphere::{make_grid, Direction, DirectionGrid};
use crate::suite;

fn grid(dim: u32, level: u32) -> Arc<DirectionGrid> {
    Arc::new(make_grid(dim, level).unwrap())
}

/// Brute-force `max_x rho(x) (1 - <x, y>)` over a fine grid for a finite
/// family given as (axis, p) pairs.
fn brute_focal(members: &[(Direction, f64)], y: &Direction, level: u32) -> f64 {
    make_grid(2, level)
        .unwrap()
        .points()
        .iter()
        .map(|x| {
            let rho = members
                .iter()
                .filter(|(a, _)| 1.0 - x.dot(a) > 1e-10)
                .map(|(a, p)| p / (1.0 - x.dot(a)))
                .fold(f64::INFINITY, f64::min);
            rho * (1.0 - x.dot(y))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn sphere_is_a_fixed_point() {
    let g = grid(2, 2);
    let p = suite::sphere(&g, 2.0).unwrap();
    let star = closure(&p, 2, 1e-9).unwrap();
    assert!(star.values().iter().all(|v| (v - 2.0).abs() < 1e-12));
    let v = is_focal_function(&p, 1e-9).unwrap();
    assert!(v.valid);
    assert!(v.witness.is_none());
    assert!(v.max_relative_gap < 1e-12);
}

#[test]
fn inflated_lens_member_is_not_supporting() {
    let g = grid(2, 3);
    let top = g.find(&Direction::e3(), 1e-12).unwrap();
    let y0 = g.neighbors(top)[0];
    let p = suite::lens(&g).unwrap().with_value(y0, 100.0).unwrap();
    let star = closure(&p, 3, 1e-9).unwrap();
    let n = Direction::e3();
    let brute = brute_focal(&[(n, 1.0), (-n, 1.0), (*g.point(y0), 100.0)], g.point(y0), 6);
    assert!(star.value(y0) < 100.0);
    // The fine grid only bounds the supremum from below.
    assert!(star.value(y0) >= brute - 1e-12);
    assert!(star.value(y0) <= brute * (1.0 + 1e-3));

    let v = is_focal_function(&p, 1e-9).unwrap();
    assert!(!v.valid);
    let w = v.witness.unwrap();
    assert!(w.axis.angle(g.point(y0)) < 1e-12);
    assert_eq!(w.value, 100.0);
    assert!(w.closure < w.value);
    assert!(v.max_relative_gap > 1e-9);
}

#[test]
fn degenerate_inputs_are_rejected() {
    let g = grid(2, 1);
    let p = FocalField::from_entries(g, &[(Direction::e3(), 1.0)], f64::INFINITY).unwrap();
    assert_eq!(is_focal_function(&p, 1e-9).unwrap_err().name(), "invalid-input");
}

#[test]
fn sphere_supporting_axes_and_decomposition() {
    let g = grid(2, 2);
    let r = build_reflector(&suite::sphere(&g, 2.0).unwrap(), 2, 1e-9).unwrap();
    for x in g.points().iter().step_by(11) {
        let axes = supporting_axes(&r, x, MAP_EPS);
        assert_eq!(axes.len(), 1);
        assert!(axes[0].angle(&-*x) < 1e-12);
        let d = find_decomposition(&r, x, &-*x, MAP_EPS).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].0, 1.0);
        assert!(check_minkg(r.closure(), &d).unwrap().abs() < 1e-12);
    }
}

#[test]
fn lens_edge_decomposition() {
    let g = grid(2, 3);
    let r = build_reflector(&suite::lens(&g).unwrap(), 3, 1e-9).unwrap();
    let x = Direction::e1();
    let axes = supporting_axes(&r, &x, MAP_EPS);
    for y in [Direction::e3(), -Direction::e3(), -Direction::e1()] {
        assert!(axes.iter().any(|z| z.angle(&y) < 1e-12));
    }
    let d = find_decomposition(&r, &x, &-Direction::e1(), MAP_EPS).unwrap();
    assert_eq!(d.terms.len(), 2);
    for (a, y) in &d.terms {
        assert!((a - 1.0).abs() < 1e-12);
        assert!(y.angle(&Direction::e3()) < 1e-12 || y.angle(&-Direction::e3()) < 1e-12);
    }
    assert!(d.residual < 1e-12);

    let p = r.focal();
    let lookup = ExtendedFocal {
        field: r.closure(),
        reflector: &r,
    };
    assert!(check_minkg(&lookup, &d).unwrap().abs() < 1e-12);
    // The lens input is infinite at -e1.
    assert_eq!(check_minkg(p, &d).unwrap_err().name(), "not-evaluable");
    let i = g.find(&-Direction::e1(), 1e-12).unwrap();
    let inflated = p.with_value(i, 3.0).unwrap();
    assert!((check_minkg(&inflated, &d).unwrap() + 1.0).abs() < 1e-12);

    // An axis on the edge cone that is not a member decomposes the same way.
    let u = Direction::new(Vector3::new(1.0, 0.0, 0.3)).unwrap();
    let y = reflect(&x, &u).unwrap();
    let d = find_decomposition(&r, &x, &y, MAP_EPS).unwrap();
    assert!(d.terms.len() <= 3 && d.residual <= RESIDUAL_LIMIT);
    assert!(check_minkg(&lookup, &d).unwrap() >= -1e-9);
}

#[test]
fn non_supporting_axis_is_rejected() {
    let g = grid(2, 2);
    let r = build_reflector(&suite::lens(&g).unwrap(), 2, 1e-9).unwrap();
    let err = find_decomposition(&r, &Direction::e3(), &Direction::e1(), MAP_EPS).unwrap_err();
    assert_eq!(err.name(), "not-supporting");
}

#[test]
fn perpendicular_axes_are_not_in_the_span() {
    let g = grid(2, 3);
    let r = build_reflector(&suite::perpendicular(&g).unwrap(), 3, 1e-9).unwrap();
    let x = Direction::e3();
    let axes = supporting_axes(&r, &x, MAP_EPS);
    let t = Vector3::new(1.0, 1.0, 1.0).normalize();
    let res = g.resolution();
    let mut off_span = 0.0f64;
    for y in &axes {
        // Cone of axes: <y, t> = <x, t>.
        assert!((y.vector().dot(&t) - x.vector().dot(&t)).abs() <= 2.0 * res);
        off_span = off_span.max(y.vector().z.abs());
        let is_member = y.angle(&Direction::e1()) < 1e-12 || y.angle(&Direction::e2()) < 1e-12;
        if !is_member {
            // Not a nonnegative combination of e1 and e2.
            assert!(y.vector().z.abs() > 1e-9 || y.vector().x < 0.0 || y.vector().y < 0.0);
        }
    }
    assert!(off_span > 0.1);
    // The midpoint of the arc.
    let mid = Vector3::new(2.0, 2.0, -1.0) / 3.0;
    assert!(axes.iter().any(|y| (y.vector() - mid).norm() < res));
}

/// Radius bound of the sampled sphere `p ≡ 2`: every direction is within the
/// grid resolution of an antipodal axis, so `1 <= rho <= 1 / cos²(res / 2)`.
fn sphere_bulge(g: &DirectionGrid) -> f64 {
    1.0 / (0.5 * g.resolution()).cos().powi(2) - 1.0
}

#[test]
fn extension_on_the_sphere() {
    let g = grid(2, 2);
    let r = build_reflector(&suite::sphere(&g, 2.0).unwrap(), 2, 1e-9).unwrap();
    for y in g.points().iter().step_by(13) {
        let e = extend_focal(&r, y.vector());
        assert!((e.value - 2.0).abs() < 1e-12);
        // The whole face of the member with axis y attains the maximum.
        assert!(Direction::new(e.argmax).unwrap().angle(&-*y) <= g.resolution());
        let scaled = extend_focal(&r, &(y.vector() * 3.5));
        assert!((scaled.value - 3.5 * e.value).abs() < 1e-12);
        assert!((e.value - r.focal_at(y)).abs() < 1e-12);
    }
    let zero = extend_focal(&r, &Vector3::zeros());
    assert_eq!(zero.value, 0.0);
    assert_eq!(zero.argmax, Vector3::zeros());

    let delta = sphere_bulge(&g);
    let root2 = 2f64.sqrt();
    let (e1, e2) = (Vector3::x(), Vector3::y());
    let s = check_subadditivity(&r, &e1, &e2);
    assert!(s <= 4.0 - 2.0 * root2 + 1e-12);
    assert!(s >= 4.0 - 2.0 * root2 * (1.0 + delta));
    assert!(check_subadditivity(&r, &e1, &Vector3::zeros()).abs() < 1e-12);
    assert!(check_subadditivity(&r, &e1, &e1).abs() < 1e-12);

    let c = check_refined_inequality(&r, &[(1.0, e1), (1.0, e2)]).unwrap();
    assert!(c.residual <= 2.0 - root2 + 1e-12);
    assert!(c.residual >= 2.0 - root2 - delta * (2.0 + root2));
    assert!(c.rhs >= 0.0);
    let one = check_refined_inequality(&r, &[(1.0, e1)]).unwrap();
    assert!(one.residual.abs() < 1e-12);
    let rev = check_refined_inequality(&r, &[(-1.0, e1)]).unwrap();
    assert!(rev.residual <= 1e-9);
    assert_eq!(
        check_refined_inequality(&r, &[(1.0, e1), (-1.0, e2)]).unwrap_err().name(),
        "unsupported-case"
    );
}

#[test]
fn lens_extension_matches_brute_force() {
    let g = grid(2, 3);
    let r = build_reflector(&suite::lens(&g).unwrap(), 3, 1e-9).unwrap();
    let n = Direction::e3();
    for y in g.points().iter().step_by(29) {
        let brute = brute_focal(&[(n, 1.0), (-n, 1.0)], y, 6);
        let v = extend_focal(&r, y.vector()).value;
        assert!(v >= brute - 1e-12);
        assert!(v <= brute + 1e-3);
    }
}

#[test]
fn constants_and_closures_yield_no_witness() {
    let g = grid(2, 1);
    let consts = Constants {
        grid: g.clone(),
        values: 0.5..4.0,
        seed: 5,
    };
    assert!(sublinear_but_invalid_search(&consts, 6, 1, 1e-9).unwrap().is_none());
    let closed = ClosureOutputs { grid: g, seed: 5 };
    assert!(sublinear_but_invalid_search(&closed, 6, 1, 1e-9).unwrap().is_none());
}

#[test]
fn polytope_supports_are_sublinear() {
    let g = grid(2, 1);
    let family = PolytopeSupports {
        grid: g,
        vertices: 2..8,
        seed: 9,
    };
    for i in 0..4 {
        let c = family.candidate(i).unwrap();
        assert!(sublinearity_violation(&*c.extension, 2, 2000, i as u64) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closure_is_a_closure_operator(seed in any::<u64>()) {
        let g = grid(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = suite::random_family(&g, 3..=15, 0.5..3.0, &mut rng).unwrap();
        let star = closure(&p, 2, 1e-9).unwrap();
        for (a, b) in p.values().iter().zip(star.values()) {
            prop_assert!(b <= &(a + 1e-9));
        }
        let again = closure(&star, 2, 1e-9).unwrap();
        let scale = star.p_max();
        for (a, b) in star.values().iter().zip(again.values()) {
            prop_assert!((a - b).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn decompositions_satisfy_the_inequality(seed in any::<u64>()) {
        let g = grid(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = suite::random_family(&g, 3..=15, 0.5..3.0, &mut rng).unwrap();
        let r = build_reflector(&p, 2, 1e-9).unwrap();
        let lookup = ExtendedFocal { field: r.closure(), reflector: &r };
        for u in g.points().iter().step_by(17) {
            let s = r.support_at(u).1;
            let x = Direction::new(s).unwrap();
            let y = reflect(&x, u).unwrap();
            let d = find_decomposition(&r, &x, &y, MAP_EPS).unwrap();
            prop_assert!(d.residual <= RESIDUAL_LIMIT);
            prop_assert!(d.terms.len() <= 3);
            prop_assert!(d.terms.iter().all(|(a, _)| *a >= 0.0));
            prop_assert!(d.independence() > 1e-9);
            prop_assert!(check_minkg(&lookup, &d).unwrap() >= -1e-6);
        }
    }
}

#[test]
fn supporting_axes_cover_the_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (dim, level) in [(1, 4), (2, 2), (2, 3)] {
        let g = grid(dim, level);
        let mut fields = vec![
            suite::sphere(&g, 2.0).unwrap(),
            suite::lens(&g).unwrap(),
            suite::random_family(&g, 5..=30, 0.5..2.0, &mut rng).unwrap(),
        ];
        if dim == 2 {
            fields.push(suite::perpendicular(&g).unwrap());
        }
        for p in fields {
            let r = build_reflector(&p, level, 1e-9).unwrap();
            let gap = axis_coverage(&r, MAP_EPS).unwrap();
            assert!(gap <= 2.0 * g.resolution(), "dim {dim} level {level}: {gap}");
        }
    }
}

//! The property suite behind `reflector report`.
//!
//! Every property reduces to one number compared against a limit. Sampling
//! is driven by the job seed only, so equal jobs give equal reports.

use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::directrix::{
    agreement_tolerance, directrix_from_support, directrix_map_cloud, hausdorff, smoothness_probe,
};
use crate::error::Result;
use crate::optics::{reflect, trace};
use crate::reflector::{FocalField, Reflector, MAP_EPS};
use crate::sphere::{make_grid, Direction, DirectionGrid};
use crate::suite;
use crate::validity::{
    axis_coverage, check_minkg, check_refined_inequality, check_subadditivity, closure, find_decomposition,
    is_focal_function, supporting_axes, ExtendedFocal,
};

const FAMILIES: usize = 6;
const POINTS_PER_REFLECTOR: usize = 4;
const PAIRS_PER_REFLECTOR: usize = 200;
const TRIPLES_PER_REFLECTOR: usize = 40;
const REFLECT_PAIRS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
}

impl Property {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        // Adding zero turns -0 into +0.
        let value = value + 0.0;
        Self {
            name: name.into(),
            value,
            bound: Bound::AtMost,
            limit,
            passed: value <= limit,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        let value = value + 0.0;
        Self {
            name: name.into(),
            value,
            bound: Bound::AtLeast,
            limit,
            passed: value >= limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub dim: u32,
    pub level: u32,
    pub tol: f64,
    pub properties: Vec<Property>,
    pub passed: bool,
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn gaussian(rng: &mut ChaCha8Rng, dim: u32) -> Vector3<f64> {
    let mut v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    if dim == 1 {
        v.z = 0.0;
    }
    v
}

fn random_direction(rng: &mut ChaCha8Rng, dim: u32) -> Direction {
    loop {
        if let Ok(d) = Direction::new(gaussian(rng, dim)) {
            return d;
        }
    }
}

/// Runs every property at grid level `level`. A supplied field adds its own
/// validity check.
pub fn run_suite(
    dim: u32,
    level: u32,
    tol: f64,
    seed: u64,
    field: Option<&FocalField>,
) -> Result<Report> {
    let grid = Arc::new(make_grid(dim, level)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut props = Vec::new();

    sphere_properties(&grid, tol, &mut props)?;

    let families: Vec<FocalField> = (0..FAMILIES)
        .map(|_| suite::random_family(&grid, 5..=30, 0.5..3.0, &mut rng))
        .collect::<Result<_>>()?;
    let reflectors: Vec<Reflector> = families
        .iter()
        .map(|q| Reflector::build(q, level, tol))
        .collect::<Result<_>>()?;

    closure_properties(&families, &reflectors, level, tol, &mut rng, &mut props)?;
    decomposition_properties(&reflectors, &mut rng, &mut props)?;
    inequality_properties(&reflectors, &mut rng, &mut props)?;

    let lens = Reflector::build(&suite::lens(&grid)?, level, tol)?;
    lens_properties(&lens, &mut props)?;
    optics_properties(&lens, &mut rng, &mut props)?;

    let mut tested = vec![&lens];
    let perpendicular = if dim == 2 {
        Some(Reflector::build(&suite::perpendicular(&grid)?, level, tol)?)
    } else {
        None
    };
    if let Some(r) = &perpendicular {
        let off_span = max_of(supporting_axes(r, &Direction::e3(), MAP_EPS).iter().map(|y| y.vector().z.abs()));
        props.push(Property::at_least("perpendicular.axis_off_span", off_span, 0.1));
        tested.push(r);
    }
    tested.extend(reflectors.iter().take(3));
    directrix_properties(&tested, &mut props);
    let coverage = tested
        .iter()
        .map(|r| Ok(axis_coverage(r, MAP_EPS)? / r.closure().grid().resolution()))
        .collect::<Result<Vec<f64>>>()?;
    props.push(Property::at_most("map.axis_coverage_over_resolution", max_of(coverage), 2.0));
    smoothness_properties(dim, level, tol, &mut props)?;

    if let Some(p) = field {
        let v = is_focal_function(p, tol)?;
        props.push(Property::at_most("input.relative_gap", v.max_relative_gap, tol));
    }

    let passed = props.iter().all(|p| p.passed);
    Ok(Report {
        seed,
        dim,
        level,
        tol,
        properties: props,
        passed,
    })
}

fn sphere_properties(grid: &Arc<DirectionGrid>, tol: f64, props: &mut Vec<Property>) -> Result<()> {
    let r = Reflector::build(&suite::sphere(grid, 2.0)?, grid.level(), tol)?;
    props.push(Property::at_most(
        "sphere.radius",
        max_of(r.radial().values().iter().map(|v| (v - 1.0).abs())),
        1e-9,
    ));
    props.push(Property::at_most(
        "sphere.support",
        max_of(r.support_samples().iter().map(|s| (s.h - 1.0).abs())),
        1e-9,
    ));
    props.push(Property::at_most(
        "sphere.closure_gap",
        max_of(r.closure().values().iter().map(|v| (2.0 - v) / 2.0)),
        1e-9,
    ));
    let d = directrix_from_support(&r, r.eval_grid());
    props.push(Property::at_most(
        "sphere.directrix_radius",
        max_of(d.points().iter().map(|z| (z.norm() - 2.0).abs())),
        1e-6,
    ));
    Ok(())
}

fn closure_properties(
    families: &[FocalField],
    reflectors: &[Reflector],
    level: u32,
    tol: f64,
    rng: &mut ChaCha8Rng,
    props: &mut Vec<Property>,
) -> Result<()> {
    let mut below = 0.0f64;
    let mut idempotent = 0.0f64;
    let mut homogeneous = 0.0f64;
    let mut monotone = 0.0f64;
    for (q, r) in families.iter().zip(reflectors) {
        let star = r.closure();
        for (p, s) in q.values().iter().zip(star.values()) {
            if p.is_finite() {
                below = below.max((s - p) / p);
            }
        }
        let again = closure(star, level, tol)?;
        let diff = max_of(again.values().iter().zip(star.values()).map(|(a, b)| (a - b).abs()));
        idempotent = idempotent.max(diff / star.p_max());

        let c = 2.5;
        let scaled = closure(&q.scaled(c)?, level, tol)?;
        for (a, b) in scaled.values().iter().zip(star.values()) {
            homogeneous = homogeneous.max((a - c * b).abs() / (c * b));
        }

        // A larger field: every finite value raised by up to half.
        let raised: Vec<f64> = q
            .values()
            .iter()
            .map(|p| if p.is_finite() { p * rng.random_range(1.0..1.5) } else { *p })
            .collect();
        let larger = closure(&FocalField::new(q.grid().clone(), raised)?, level, tol)?;
        for (small, large) in star.values().iter().zip(larger.values()) {
            monotone = monotone.max((small - large) / large);
        }
    }
    props.push(Property::at_most("closure.below_input", below, tol));
    props.push(Property::at_most("closure.idempotent", idempotent, 1e-6));
    props.push(Property::at_most("closure.homogeneous", homogeneous, 1e-9));
    props.push(Property::at_most("closure.monotone", monotone, tol));
    Ok(())
}

fn decomposition_properties(
    reflectors: &[Reflector],
    rng: &mut ChaCha8Rng,
    props: &mut Vec<Property>,
) -> Result<()> {
    let mut residual = 0.0f64;
    let mut excess_terms = 0.0f64;
    let mut minkg = 0.0f64;
    for r in reflectors {
        let grid = r.eval_grid();
        let lookup = ExtendedFocal {
            field: r.closure(),
            reflector: r,
        };
        for _ in 0..POINTS_PER_REFLECTOR {
            let x = *grid.point(rng.random_range(0..grid.len()));
            for y in supporting_axes(r, &x, MAP_EPS) {
                let d = find_decomposition(r, &x, &y, MAP_EPS)?;
                residual = residual.max(d.residual);
                excess_terms = excess_terms.max(d.terms.len() as f64 - (r.dim() + 1) as f64);
                minkg = minkg.max(-check_minkg(&lookup, &d)?);
            }
        }
    }
    props.push(Property::at_most("decomposition.residual", residual, 1e-7));
    props.push(Property::at_most("decomposition.excess_terms", excess_terms, 0.0));
    props.push(Property::at_most("decomposition.inequality_violation", minkg, 1e-6));
    Ok(())
}

fn inequality_properties(
    reflectors: &[Reflector],
    rng: &mut ChaCha8Rng,
    props: &mut Vec<Property>,
) -> Result<()> {
    let mut plain = 0.0f64;
    let mut refined = 0.0f64;
    for r in reflectors {
        let dim = r.dim();
        for _ in 0..PAIRS_PER_REFLECTOR {
            let (a, b) = (gaussian(rng, dim), gaussian(rng, dim));
            plain = plain.max(-check_subadditivity(r, &a, &b));
        }
        for k in 0..TRIPLES_PER_REFLECTOR {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let terms: Vec<(f64, Vector3<f64>)> = (0..3)
                .map(|_| (sign * rng.random_range(0.0..2.0), gaussian(rng, dim)))
                .collect();
            let check = check_refined_inequality(r, &terms)?;
            refined = refined.max(-sign * check.residual);
        }
    }
    props.push(Property::at_most("extension.subadditivity", plain, 1e-9));
    props.push(Property::at_most("extension.refined_inequality", refined, 1e-8));
    Ok(())
}

fn lens_properties(lens: &Reflector, props: &mut Vec<Property>) -> Result<()> {
    let pole = suite::pole(lens.dim());
    let side = Direction::e1();
    let (h, _) = lens.support_at(&pole);
    let d = find_decomposition(lens, &side, &-side, MAP_EPS)?;
    let mut coefficients = d.terms.clone();
    coefficients.sort_by(|a, b| a.1.vector().dot(pole.vector()).total_cmp(&b.1.vector().dot(pole.vector())));
    let expected = [(1.0, -pole), (1.0, pole)];
    let decomposition_error = if coefficients.len() == 2 {
        max_of(
            coefficients
                .iter()
                .zip(&expected)
                .map(|((a, y), (b, z))| (a - b).abs().max((y.vector() - z.vector()).norm())),
        )
    } else {
        f64::INFINITY
    };
    let error = max_of([
        (lens.radius(&pole) - 0.5).abs(),
        (h - 0.5).abs(),
        (lens.focal_at(&-side) - 2.0).abs(),
        decomposition_error,
    ]);
    props.push(Property::at_most("lens.closed_forms", error, 1e-6));
    Ok(())
}

fn optics_properties(lens: &Reflector, rng: &mut ChaCha8Rng, props: &mut Vec<Property>) -> Result<()> {
    let dim = lens.dim();
    let pole = suite::pole(dim);
    let mut cap = 0.0f64;
    for x in lens.eval_grid().points().iter().filter(|x| x.dot(&pole) > 1e-9) {
        for o in trace(lens, x, MAP_EPS)?.outgoing {
            cap = cap.max((o.vector() + pole.vector()).norm());
        }
    }
    props.push(Property::at_most("optics.upper_cap_to_focus_axis", cap, 1e-9));

    let mut involution = 0.0f64;
    let mut norm = 0.0f64;
    let mut checked = 0;
    while checked < REFLECT_PAIRS {
        let x = random_direction(rng, dim);
        let u = random_direction(rng, dim);
        let Ok(y) = reflect(&x, &u) else { continue };
        norm = norm.max((y.vector().norm() - 1.0).abs());
        let back = reflect(&y, &-u)?;
        involution = involution.max((back.vector() - x.vector()).norm());
        checked += 1;
    }
    props.push(Property::at_most("optics.involution", involution, 1e-12));
    props.push(Property::at_most("optics.unit_norm", norm, 1e-12));
    Ok(())
}

fn directrix_properties(reflectors: &[&Reflector], props: &mut Vec<Property>) {
    let mut agreement = 0.0f64;
    let mut identity = 0.0f64;
    let mut pedal = 0.0f64;
    let mut convexity = 0.0f64;
    let mut planes = 0.0f64;
    for r in reflectors {
        let d = directrix_from_support(r, r.eval_grid());
        let cloud = directrix_map_cloud(r, MAP_EPS);
        let tol = agreement_tolerance(r);
        let points: Vec<Vector3<f64>> = cloud.iter().map(|m| m.point).collect();
        agreement = agreement.max(hausdorff(&points, d.points()) / tol);
        identity = identity.max(max_of(d.support_check().iter().map(|rec| rec.residual().abs())) / tol);
        pedal = pedal.max(d.pedal_defect());
        convexity = convexity.max(d.convexity_defect());
        planes = planes.max(max_of(cloud.iter().map(|m| m.plane_slack(r).abs() / r.focal_at(&m.axis))));
    }
    props.push(Property::at_most("directrix.hausdorff_over_tolerance", agreement, 1.0));
    props.push(Property::at_most("directrix.support_identity_over_tolerance", identity, 1.0));
    props.push(Property::at_most("directrix.pedal", pedal, 1e-12));
    props.push(Property::at_most("directrix.convexity", convexity, 1e-9));
    props.push(Property::at_most("directrix.plane_slack", planes, MAP_EPS));
}

fn smoothness_properties(dim: u32, level: u32, tol: f64, props: &mut Vec<Property>) -> Result<()> {
    let mut jumps = Vec::new();
    let mut surfaces = Vec::new();
    for l in [level, level + 1] {
        let grid = Arc::new(make_grid(dim, l)?);
        let lens = Reflector::build(&suite::lens(&grid)?, l, tol)?;
        jumps.push(lens.gradient_jump());
        surfaces.push(directrix_from_support(&lens, lens.eval_grid()));
    }
    let probe = smoothness_probe(&surfaces)?;
    props.push(Property::at_most("smoothness.support_gradient_ratio", jumps[1] / jumps[0], 0.7));
    props.push(Property::at_most("smoothness.directrix_angle_ratio", probe.ratios[0], 0.7));
    Ok(())
}

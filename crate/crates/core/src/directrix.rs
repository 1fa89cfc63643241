//! The directrix surface of a reflector.
//!
//! Two constructions are provided. The canonical one doubles the pedal
//! surface, `r(u) = 2 h(u) u`. The second follows the reflected rays:
//! a surface point `X = ρ(x) x` with supporting axis `y` contributes
//! `ρ(x) (x - y)`, the point where the ray reflected at `X` would meet the
//! directrix plane of the paraboloid with axis `y`. Their agreement is the
//! main end-to-end check of the crate.

use std::sync::Arc;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{ReflectorError, Result};
use crate::optics::reflect;
use crate::paraboloid::Hyperplane;
use crate::reflector::{Reflector, SupportSample};
use crate::sphere::{angle_between, Direction, DirectionGrid};
use crate::validity::supporting_axes;

/// `H(-y)` of the sampled directrix against the focal value `p(y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportRecord {
    pub axis: Direction,
    pub directrix_support: f64,
    pub focal: f64,
}

impl SupportRecord {
    pub fn residual(&self) -> f64 {
        self.directrix_support - self.focal
    }
}

/// Directrix sampled as `2 h(u) u` over a direction grid.
#[derive(Clone, Debug)]
pub struct DirectrixSurface {
    grid: Arc<DirectionGrid>,
    points: Vec<Vector3<f64>>,
    /// Outward normal `-y` of the directrix at each point, `y` the axis of
    /// the paraboloid touching the reflector at the contact point of `u`.
    normals: Vec<Direction>,
    samples: Vec<SupportSample>,
    support_check: Vec<SupportRecord>,
}

impl DirectrixSurface {
    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn normals(&self) -> &[Direction] {
        &self.normals
    }

    pub fn support_check(&self) -> &[SupportRecord] {
        &self.support_check
    }

    /// Support function of the point cloud.
    pub fn support(&self, w: &Vector3<f64>) -> f64 {
        self.points.iter().map(|z| z.dot(w)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest distance between the foot of the perpendicular from the
    /// origin onto the supporting plane `<X, u> = h(u)` and half the
    /// directrix point.
    pub fn pedal_defect(&self) -> f64 {
        self.grid
            .points()
            .iter()
            .zip(&self.samples)
            .zip(&self.points)
            .map(|((u, s), z)| {
                let plane = Hyperplane {
                    normal: *u,
                    offset: s.h,
                };
                (plane.foot_from_origin() - z / 2.0).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest amount by which a sample point sticks out of the supporting
    /// half-space of another sample point. Zero up to rounding when every
    /// point lies on the boundary of the convex hull of the cloud.
    pub fn convexity_defect(&self) -> f64 {
        self.points
            .par_iter()
            .zip(&self.normals)
            .map(|(z, n)| {
                let level = z.dot(n.vector());
                self.points
                    .iter()
                    .map(|w| w.dot(n.vector()) - level)
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Exterior angles of the polyhedral surface: dihedral angles across
    /// mesh edges on the sphere, turning angles of the polygon on the circle.
    pub fn turning_angles(&self) -> Vec<f64> {
        if self.grid.dim() == 1 {
            let mut order: Vec<usize> = (0..self.points.len()).collect();
            order.sort_by(|&i, &j| {
                let a = self.grid.point(i).vector();
                let b = self.grid.point(j).vector();
                a.y.atan2(a.x).total_cmp(&b.y.atan2(b.x))
            });
            let n = order.len();
            (0..n)
                .map(|k| {
                    let prev = self.points[order[(k + n - 1) % n]];
                    let here = self.points[order[k]];
                    let next = self.points[order[(k + 1) % n]];
                    angle_between(&(here - prev), &(next - here))
                })
                .collect()
        } else {
            let faces = self.grid.faces();
            let normals: Vec<Vector3<f64>> = faces
                .iter()
                .map(|&[a, b, c]| {
                    let [p, q, r] = [a, b, c].map(|i| self.points[i]);
                    (q - p).cross(&(r - p))
                })
                .collect();
            let mut by_edge = std::collections::HashMap::new();
            for (f, &[a, b, c]) in faces.iter().enumerate() {
                for (i, j) in [(a, b), (b, c), (c, a)] {
                    by_edge.entry((i.min(j), i.max(j))).or_insert_with(Vec::new).push(f);
                }
            }
            let mut edges: Vec<_> = by_edge.into_iter().collect();
            edges.sort_unstable_by_key(|(e, _)| *e);
            edges
                .into_iter()
                .filter(|(_, fs)| fs.len() == 2)
                .map(|(_, fs)| angle_between(&normals[fs[0]], &normals[fs[1]]))
                .collect()
        }
    }

    pub fn max_turning_angle(&self) -> f64 {
        self.turning_angles().into_iter().fold(0.0, f64::max)
    }
}

/// `2 h(u) u` over `grid`, reusing the reflector's support samples when
/// `grid` is its evaluation grid.
pub fn directrix_from_support(r: &Reflector, grid: &Arc<DirectionGrid>) -> DirectrixSurface {
    let own = r.eval_grid();
    let samples: Vec<SupportSample> = if own.dim() == grid.dim() && own.level() == grid.level() {
        r.support_samples().to_vec()
    } else {
        grid.points()
            .par_iter()
            .map(|u| {
                let (h, contact) = r.support_at(u);
                SupportSample {
                    h,
                    contact,
                    gradient: Vector3::zeros(),
                }
            })
            .collect()
    };
    let points: Vec<Vector3<f64>> = grid
        .points()
        .iter()
        .zip(&samples)
        .map(|(u, s)| u.vector() * (2.0 * s.h))
        .collect();
    let normals = grid
        .points()
        .iter()
        .zip(&samples)
        .map(|(u, s)| {
            // Contact lies on <X, u> = h > 0, so the reflection is defined.
            let x = Direction::new(s.contact).expect("contact point is away from the focus");
            let y = reflect(&x, u).expect("contact direction faces the normal");
            Direction::new(-y.vector()).expect("unit")
        })
        .collect();
    let mut d = DirectrixSurface {
        grid: grid.clone(),
        points,
        normals,
        samples,
        support_check: Vec::new(),
    };
    let focal = r.closure();
    d.support_check = focal
        .grid()
        .points()
        .par_iter()
        .zip(focal.values())
        .map(|(y, p)| SupportRecord {
            axis: *y,
            directrix_support: d.support(&-y.vector()),
            focal: *p,
        })
        .collect();
    d
}

/// A directrix point produced by the reflector map, with the supporting axis
/// that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapPoint {
    pub axis: Direction,
    pub point: Vector3<f64>,
}

impl MapPoint {
    /// `<Z, -y> - p(y)`: zero when the point lies on the directrix plane of
    /// the paraboloid with axis `y` and parameter `p(y)`.
    pub fn plane_slack(&self, r: &Reflector) -> f64 {
        let plane = Hyperplane {
            normal: Direction::new(-self.axis.vector()).expect("unit"),
            offset: r.focal_at(&self.axis),
        };
        plane.signed_distance(&self.point)
    }
}

/// `ρ(x) (x - y)` for every supporting axis `y` at `x`, the normal cone
/// sampled at the grid spacing where several paraboloids meet.
pub fn directrix_from_map(r: &Reflector, x: &Direction, eps: f64) -> Vec<MapPoint> {
    let rho = r.radius(x);
    supporting_axes(r, x, eps)
        .into_iter()
        .map(|y| MapPoint {
            axis: y,
            point: (x.vector() - y.vector()) * rho,
        })
        .collect()
}

/// Map points over every evaluation direction, the crossings of the body's
/// edges with grid edges, and the body's vertices.
pub fn directrix_map_cloud(r: &Reflector, eps: f64) -> Vec<MapPoint> {
    let grid = r.eval_grid();
    let mut sources: Vec<Direction> = grid.points().to_vec();
    sources.extend(r.edge_directions(grid));
    sources.extend(r.vertices());
    sources
        .par_iter()
        .flat_map_iter(|x| directrix_from_map(r, x, eps))
        .collect()
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    let one_sided = |from: &[Vector3<f64>], to: &[Vector3<f64>]| {
        from.par_iter()
            .map(|p| to.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
            .sqrt()
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// `H(-y) - p(y)` with `H` the support function of the directrix sampled on
/// the reflector's evaluation grid and `p` the reflector's focal function.
pub fn directrix_support_identity(r: &Reflector, y: &Direction) -> f64 {
    let h = r
        .eval_grid()
        .points()
        .iter()
        .zip(r.support_samples())
        .map(|(u, s)| 2.0 * s.h * u.dot(&Direction::new(-y.vector()).expect("unit")))
        .fold(f64::NEG_INFINITY, f64::max);
    h - r.focal_at(y)
}

/// Tolerance for the agreement of the two constructions:
/// `5 × resolution × diameter`.
pub fn agreement_tolerance(r: &Reflector) -> f64 {
    5.0 * r.eval_grid().resolution() * r.diameter()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelAngle {
    pub level: u32,
    pub resolution: f64,
    pub max_angle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub levels: Vec<LevelAngle>,
    /// `max_angle[k + 1] / max_angle[k]` for consecutive levels.
    pub ratios: Vec<f64>,
}

impl SmoothnessReport {
    /// Whether the largest angle shrinks by at least the factor `limit` at
    /// every refinement.
    pub fn converges(&self, limit: f64) -> bool {
        self.ratios.iter().all(|q| *q < limit)
    }
}

/// Largest exterior angle of each surface, ordered by increasing level.
pub fn smoothness_probe(surfaces: &[DirectrixSurface]) -> Result<SmoothnessReport> {
    if surfaces.len() < 2 {
        return Err(ReflectorError::InsufficientData(format!(
            "{} level(s); the probe compares at least two",
            surfaces.len()
        )));
    }
    let mut levels: Vec<LevelAngle> = surfaces
        .iter()
        .map(|d| LevelAngle {
            level: d.grid.level(),
            resolution: d.grid.resolution(),
            max_angle: d.max_turning_angle(),
        })
        .collect();
    levels.sort_by_key(|l| l.level);
    let ratios = levels.windows(2).map(|w| w[1].max_angle / w[0].max_angle).collect();
    Ok(SmoothnessReport { levels, ratios })
}

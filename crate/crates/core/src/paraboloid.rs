//! Paraboloids of revolution with focus at the origin.
//!
//! A paraboloid is given by its axis `y` (the direction of its opening) and a
//! focal parameter `p`; its polar radius is `p / (1 - <x, y>)` and its solid
//! is `{X : |X| - <X, y> <= p}`.

use nalgebra::Vector3;

use crate::error::{ReflectorError, Result};
use crate::sphere::Direction;

/// Guard on `1 - <x, y>` below which the polar radius is treated as unbounded.
pub const AXIS_GUARD: f64 = 1e-10;

/// Confocal paraboloid; `focal_param = ∞` marks an improper paraboloid whose
/// solid is the whole space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Paraboloid {
    axis: Direction,
    focal_param: f64,
}

/// Affine hyperplane `{Z : <Z, normal> = offset}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperplane {
    pub normal: Direction,
    pub offset: f64,
}

impl Hyperplane {
    /// Signed distance `<Z, normal> - offset`.
    pub fn signed_distance(&self, z: &Vector3<f64>) -> f64 {
        z.dot(self.normal.vector()) - self.offset
    }

    /// Orthogonal projection of the origin onto the plane.
    pub fn foot_from_origin(&self) -> Vector3<f64> {
        self.normal.vector() * self.offset
    }
}

/// Result of a containment test: `slack = p - (|X| - <X, y>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Containment {
    pub inside: bool,
    pub slack: f64,
}

impl Paraboloid {
    pub fn new(axis: Direction, focal_param: f64) -> Result<Self> {
        if focal_param.is_nan() || focal_param <= 0.0 {
            return Err(ReflectorError::DegenerateFocalParameter(focal_param));
        }
        Ok(Self { axis, focal_param })
    }

    pub fn improper(axis: Direction) -> Self {
        Self {
            axis,
            focal_param: f64::INFINITY,
        }
    }

    pub fn axis(&self) -> &Direction {
        &self.axis
    }

    pub fn focal_param(&self) -> f64 {
        self.focal_param
    }

    pub fn is_proper(&self) -> bool {
        self.focal_param.is_finite()
    }

    /// Distance from the focus to the surface along `x`.
    pub fn polar_radius(&self, x: &Direction) -> Result<f64> {
        if !self.is_proper() {
            return Err(ReflectorError::ImproperParaboloid);
        }
        let denom = 1.0 - x.dot(&self.axis);
        if denom <= AXIS_GUARD {
            return Err(ReflectorError::AxisSingularity);
        }
        Ok(self.focal_param / denom)
    }

    pub fn surface_point(&self, x: &Direction) -> Result<Vector3<f64>> {
        Ok(x.vector() * self.polar_radius(x)?)
    }

    /// Containment in the closed solid, with tolerance `tol` on the slack.
    pub fn contains(&self, point: &Vector3<f64>, tol: f64) -> Containment {
        if !self.is_proper() {
            return Containment {
                inside: true,
                slack: f64::INFINITY,
            };
        }
        let slack = self.focal_param - (point.norm() - point.dot(self.axis.vector()));
        Containment {
            inside: slack >= -tol,
            slack,
        }
    }

    /// Outward unit normal at the surface point in direction `x`:
    /// `u = (x - y) / |x - y|`, so that reflecting `x` in `u` gives the axis.
    pub fn tangent_normal(&self, x: &Direction) -> Result<Direction> {
        if 1.0 - x.dot(&self.axis) <= AXIS_GUARD {
            return Err(ReflectorError::AxisSingularity);
        }
        Direction::new(x.vector() - self.axis.vector())
    }

    /// The directrix `{Z : <Z, -y> = p}`.
    pub fn directrix_hyperplane(&self) -> Result<Hyperplane> {
        if !self.is_proper() {
            return Err(ReflectorError::ImproperParaboloid);
        }
        Ok(Hyperplane {
            normal: -self.axis,
            offset: self.focal_param,
        })
    }

    /// The unique paraboloid with axis `y` whose surface passes through `point`.
    pub fn through(point: &Vector3<f64>, y: &Direction) -> Result<Self> {
        let p = point.norm() - point.dot(y.vector());
        if !(p > 0.0) {
            return Err(ReflectorError::DegenerateFocalParameter(p));
        }
        Self::new(*y, p)
    }
}

/// Free-function form of [`Paraboloid::through`].
pub fn paraboloid_through(point: &Vector3<f64>, y: &Direction) -> Result<Paraboloid> {
    Paraboloid::through(point, y)
}

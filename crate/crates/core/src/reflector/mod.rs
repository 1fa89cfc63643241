//! Reflectors and the radial/focal transform pair.
//!
//! A [`FocalField`] samples the focal function on a grid; `∞` marks grid
//! directions without a paraboloid, so a field with finitely many finite
//! values is exactly a finite family. The radial transform is the pointwise
//! minimum over that family. The focal transform is a supremum over the
//! surface, computed exactly from the edges and vertices of the body for
//! families of moderate size and by grid-seeded local search otherwise.

pub(crate) mod arrangement;
mod body;
mod family;

use std::sync::Arc;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{ReflectorError, Result};
use crate::sphere::{make_grid, Direction, DirectionGrid};

pub(crate) use arrangement::Affine;
pub(crate) use body::{seeded_search, Body, Samples};
pub use family::Family;

/// Tolerance, in radians, for matching a direction to a grid point.
pub const GRID_MATCH_TOL: f64 = 1e-9;

/// Default relative tolerance of the reflector-map equality test.
pub const MAP_EPS: f64 = 1e-7;

/// Focal parameters `p(y_j) ∈ (0, ∞]` on a direction grid.
#[derive(Clone, Debug)]
pub struct FocalField {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    p_max: f64,
}

impl FocalField {
    pub fn new(grid: Arc<DirectionGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ReflectorError::InvalidInput(format!(
                "{} focal values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
            return Err(ReflectorError::InvalidInput(format!(
                "focal values must be positive, got {v}"
            )));
        }
        let p_max = values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        Ok(Self {
            grid,
            values,
            p_max,
        })
    }

    pub fn constant(grid: Arc<DirectionGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    /// Field equal to `default` except at the listed axes, each of which must
    /// coincide with a grid point. Repeated axes keep the smallest value.
    pub fn from_entries(
        grid: Arc<DirectionGrid>,
        entries: &[(Direction, f64)],
        default: f64,
    ) -> Result<Self> {
        let mut values = vec![default; grid.len()];
        let mut set = vec![false; grid.len()];
        for (y, p) in entries {
            let i = grid.find(y, GRID_MATCH_TOL).ok_or_else(|| {
                ReflectorError::InvalidInput(format!(
                    "axis {:?} is not a point of the level-{} grid",
                    y.coords(grid.dim()),
                    grid.level()
                ))
            })?;
            values[i] = if set[i] { values[i].min(*p) } else { *p };
            set[i] = true;
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn dim(&self) -> u32 {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value at a grid direction, or `None` off the grid.
    pub fn value_at(&self, y: &Direction) -> Option<f64> {
        self.grid.find(y, GRID_MATCH_TOL).map(|i| self.values[i])
    }

    /// Largest finite value.
    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v * c).collect())
    }

    pub fn with_value(&self, i: usize, p: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values[i] = p;
        Self::new(self.grid.clone(), values)
    }

    /// The finite members as a family.
    pub fn family(&self) -> Family {
        Family::new(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, p)| p.is_finite())
                .map(|(i, p)| (*self.grid.point(i), *p, i)),
        )
    }
}

type RadiusFn = dyn Fn(&Direction) -> f64 + Send + Sync;

#[derive(Clone)]
enum RadialSource {
    Body(Arc<Body>),
    Function(Arc<RadiusFn>),
}

/// Radial function samples `0 < rho(x_i) < ∞` on a direction grid, optionally
/// backed by a continuous description used to refine suprema.
#[derive(Clone)]
pub struct RadialField {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    source: Option<RadialSource>,
}

impl std::fmt::Debug for RadialField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialField")
            .field("grid_len", &self.grid.len())
            .field("values", &self.values)
            .field("continuous", &self.source.is_some())
            .finish()
    }
}

impl RadialField {
    pub fn new(grid: Arc<DirectionGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(ReflectorError::InvalidInput(format!(
                "{} radii for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(ReflectorError::InvalidInput(format!(
                "radii must be positive and finite, got {v}"
            )));
        }
        Ok(Self {
            grid,
            values,
            source: None,
        })
    }

    /// Samples `f` on the grid and keeps it for refinement between samples.
    pub fn from_fn<F>(grid: Arc<DirectionGrid>, f: F) -> Result<Self>
    where
        F: Fn(&Direction) -> f64 + Send + Sync + 'static,
    {
        let values = grid.points().iter().map(&f).collect();
        let mut field = Self::new(grid, values)?;
        field.source = Some(RadialSource::Function(Arc::new(f)));
        Ok(field)
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Radius in an arbitrary direction when a continuous description exists.
    pub fn radius(&self, x: &Direction) -> Option<f64> {
        match &self.source {
            Some(RadialSource::Body(b)) => Some(b.radius(x)),
            Some(RadialSource::Function(f)) => Some(f(x)),
            None => self.grid.find(x, GRID_MATCH_TOL).map(|i| self.values[i]),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut out = Self::new(self.grid.clone(), self.values.iter().map(|v| v * c).collect())?;
        out.source = match &self.source {
            Some(RadialSource::Body(b)) => Some(RadialSource::Body(Arc::new(Body::new(
                b.family().scaled(c),
                self.grid.dim(),
            )))),
            Some(RadialSource::Function(f)) => {
                let f = f.clone();
                Some(RadialSource::Function(Arc::new(move |x: &Direction| c * f(x))))
            }
            None => None,
        };
        Ok(out)
    }

    fn samples(&self) -> Samples<'_> {
        Samples {
            grid: &self.grid,
            radii: &self.values,
        }
    }

    /// `max_x rho(x) (k + <x, v>)` over the surface.
    pub(crate) fn maximize(&self, obj: &Affine, tol: f64) -> (Direction, f64) {
        let samples = self.samples();
        match &self.source {
            Some(RadialSource::Body(b)) => b.maximize(obj, &samples, tol),
            Some(RadialSource::Function(f)) => {
                let (x, _) = seeded_search(&samples, obj, tol, |_| |x: &Direction| f(x));
                (x, f(&x) * obj.weight(&x))
            }
            None => {
                let (i, v) = self
                    .values
                    .iter()
                    .zip(self.grid.points())
                    .map(|(r, x)| r * obj.weight(x))
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
                (*self.grid.point(i), v)
            }
        }
    }
}

/// A point of the reflector: `position = radius * direction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub direction: Direction,
    pub radius: f64,
    pub position: Vector3<f64>,
}

impl SurfacePoint {
    pub fn new(direction: Direction, radius: f64) -> Self {
        Self {
            direction,
            radius,
            position: direction.vector() * radius,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(ReflectorError::InvalidInput(format!("tol must be positive, got {tol}")))
    }
}

fn check_dims(a: &DirectionGrid, b: &DirectionGrid) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(ReflectorError::InvalidInput(format!(
            "grid dimensions differ ({} vs {})",
            a.dim(),
            b.dim()
        )))
    }
}

/// `rho(x) = min_y p(y) / (1 - <x, y>)` on `eval_grid`.
pub fn radial_from_focal(
    p: &FocalField,
    eval_grid: &Arc<DirectionGrid>,
    tol: f64,
) -> Result<RadialField> {
    check_tol(tol)?;
    check_dims(p.grid(), eval_grid)?;
    let family = p.family();
    if family.distinct_axes() < 2 {
        return Err(ReflectorError::UnboundedReflector(format!(
            "{} distinct finite axes; at least two are needed for a compact body",
            family.distinct_axes()
        )));
    }
    let values: Vec<f64> = eval_grid
        .points()
        .par_iter()
        .map(|x| family.radius(x).0)
        .collect();
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(ReflectorError::UnboundedReflector(format!("radius {v}")));
    }
    Ok(RadialField {
        grid: eval_grid.clone(),
        values,
        source: Some(RadialSource::Body(Arc::new(Body::new(family, p.dim())))),
    })
}

/// `p(y) = sup_x rho(x) (1 - <x, y>)` on `eval_grid`.
pub fn focal_from_radial(
    rho: &RadialField,
    eval_grid: &Arc<DirectionGrid>,
    tol: f64,
) -> Result<FocalField> {
    check_tol(tol)?;
    check_dims(rho.grid(), eval_grid)?;
    let values: Vec<f64> = eval_grid
        .points()
        .par_iter()
        .map(|y| rho.maximize(&Affine::focal(y.vector()), tol).1)
        .collect();
    FocalField::new(eval_grid.clone(), values)
}

/// Support sample: `h(u)`, the contact point `X(u)`, and the tangential
/// gradient of `h` at `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportSample {
    pub h: f64,
    pub contact: Vector3<f64>,
    pub gradient: Vector3<f64>,
}

/// A convex reflector built from a focal field.
#[derive(Clone, Debug)]
pub struct Reflector {
    focal: FocalField,
    closure: FocalField,
    radial: RadialField,
    body: Arc<Body>,
    support: Vec<SupportSample>,
    tol: f64,
    diameter: f64,
}

/// Builds the reflector of `p` with radial and support samples on the grid of
/// level `eval_level`.
pub fn build_reflector(p: &FocalField, eval_level: u32, tol: f64) -> Result<Reflector> {
    Reflector::build(p, eval_level, tol)
}

impl Reflector {
    pub fn build(p: &FocalField, eval_level: u32, tol: f64) -> Result<Self> {
        let eval_grid = if eval_level == p.grid().level() {
            p.grid().clone()
        } else {
            Arc::new(make_grid(p.dim(), eval_level)?)
        };
        let radial = radial_from_focal(p, &eval_grid, tol)?;
        let (lo, hi) = radial
            .values
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
        if lo <= tol * hi {
            return Err(ReflectorError::DegenerateReflector(format!(
                "min radius {lo:e} <= tol * max radius {hi:e}; the focus is not interior"
            )));
        }
        let body = match &radial.source {
            Some(RadialSource::Body(b)) => b.clone(),
            _ => unreachable!("radial_from_focal always attaches the body"),
        };
        let closure = focal_from_radial(&radial, p.grid(), tol)?;
        let mut r = Self {
            focal: p.clone(),
            closure,
            radial,
            body,
            support: Vec::new(),
            tol,
            diameter: 0.0,
        };
        let grid = r.radial.grid.clone();
        r.support = grid
            .points()
            .par_iter()
            .map(|u| {
                let (h, contact) = r.support_at(u);
                SupportSample {
                    h,
                    contact,
                    gradient: r.support_gradient(u),
                }
            })
            .collect();
        let anti = grid.antipodal_map();
        r.diameter = (0..grid.len())
            .map(|i| r.support[i].h + r.support[anti[i]].h)
            .fold(0.0, f64::max);
        Ok(r)
    }

    pub fn dim(&self) -> u32 {
        self.focal.dim()
    }

    /// The input field.
    pub fn focal(&self) -> &FocalField {
        &self.focal
    }

    /// The focal function of the reflector on the input grid.
    pub fn closure(&self) -> &FocalField {
        &self.closure
    }

    pub fn radial(&self) -> &RadialField {
        &self.radial
    }

    pub fn eval_grid(&self) -> &Arc<DirectionGrid> {
        &self.radial.grid
    }

    pub fn support_samples(&self) -> &[SupportSample] {
        &self.support
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Largest width `h(u) + h(-u)` over the sample directions.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn family(&self) -> &Family {
        self.body.family()
    }

    /// Whether suprema are computed from the exact edge/vertex structure.
    pub fn is_exact(&self) -> bool {
        self.body.is_exact()
    }

    pub fn radius(&self, x: &Direction) -> f64 {
        self.body.radius(x)
    }

    /// Directions of the surface points where three or more generating
    /// paraboloids meet (two for n = 1). Empty for families too large for
    /// the exact arrangement.
    pub fn vertices(&self) -> Vec<Direction> {
        self.body.vertices()
    }

    /// Points where the edges of `grid` cross the edges of the surface,
    /// located by bisection on the member that attains the radius.
    pub fn edge_directions(&self, grid: &DirectionGrid) -> Vec<Direction> {
        let family = self.family();
        let owner = |x: &Direction| family.radius(x).1;
        grid.edges()
            .par_iter()
            .filter_map(|&(i, j)| {
                let a = *grid.point(i).vector();
                let b = *grid.point(j).vector();
                let start = owner(grid.point(i));
                if owner(grid.point(j)) == start {
                    return None;
                }
                let at = |t: f64| Direction::new(a * (1.0 - t) + b * t).ok();
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    match at(mid) {
                        Some(x) if owner(&x) == start => lo = mid,
                        Some(_) => hi = mid,
                        None => return None,
                    }
                }
                at(0.5 * (lo + hi))
            })
            .collect()
    }

    pub fn surface_point(&self, x: &Direction) -> SurfacePoint {
        SurfacePoint::new(*x, self.radius(x))
    }

    /// `sup_x rho(x) (k + <x, v>)` and its direction.
    pub(crate) fn maximize(&self, obj: &Affine) -> (Direction, f64) {
        self.radial.maximize(obj, self.tol)
    }

    /// Focal function of the reflector at `y`: the stored value on the input
    /// grid, otherwise the supremum.
    pub fn focal_at(&self, y: &Direction) -> f64 {
        match self.closure.grid.find(y, 1e-15) {
            Some(i) => self.closure.values[i],
            None => self.maximize(&Affine::focal(y.vector())).1,
        }
    }

    /// `h(u)` and the contact point.
    pub fn support_at(&self, u: &Direction) -> (f64, Vector3<f64>) {
        let (x, h) = self.maximize(&Affine::linear(u));
        (h, x.vector() * self.radius(&x))
    }

    /// Tangential gradient of `h` by central differences with half the grid
    /// spacing as step.
    pub fn support_gradient(&self, u: &Direction) -> Vector3<f64> {
        let step = 0.5 * self.eval_grid().resolution();
        u.tangent_basis(self.dim())
            .iter()
            .map(|t| {
                let plus = self.support_at(&u.exp(&(t * step))).0;
                let minus = self.support_at(&u.exp(&(-t * step))).0;
                t * ((plus - minus) / (2.0 * step))
            })
            .sum()
    }

    /// Members of the generating family whose paraboloids pass through the
    /// surface point in direction `x`, to relative accuracy `rel`.
    pub fn active_members(&self, x: &Direction, rel: f64) -> Vec<(Direction, f64)> {
        let f = self.family();
        let rho = self.radius(x);
        f.active(x, rho, rel)
            .into_iter()
            .map(|j| (*f.axis(j), f.param(j)))
            .collect()
    }

    /// Largest difference of `∇h` between neighboring sample directions.
    pub fn gradient_jump(&self) -> f64 {
        self.eval_grid()
            .edges()
            .into_iter()
            .map(|(i, j)| (self.support[i].gradient - self.support[j].gradient).norm())
            .fold(0.0, f64::max)
    }
}

/// Axes `y` of the input grid whose paraboloid `P(y, p*(y))` passes through
/// the surface point in direction `x`, within relative accuracy `eps`.
///
/// The argmin member at `x` always qualifies, so the set is never empty.
pub fn reflector_map(r: &Reflector, x: &Direction, eps: f64) -> Vec<Direction> {
    let rho = r.radius(x);
    let grid = r.closure.grid();
    let mut out: Vec<Direction> = r
        .closure
        .values
        .iter()
        .zip(grid.points())
        .filter(|(p, y)| p.is_finite() && **p - rho * (1.0 - x.dot(y)) <= eps * **p)
        .map(|(_, y)| *y)
        .collect();
    if out.is_empty() {
        let (_, arg) = r.family().radius(x);
        out.push(*r.family().axis(arg));
    }
    out
}

/// `h(u) = max <X, u>` over the reflector and the contact point.
pub fn support_function(r: &Reflector, u: &Direction) -> (f64, Vector3<f64>) {
    r.support_at(u)
}

/// `X(u) = h(u) u + ∇h(u)`.
pub fn surface_from_support(r: &Reflector, u: &Direction) -> Vector3<f64> {
    let (h, _) = r.support_at(u);
    u.vector() * h + r.support_gradient(u)
}

#[cfg(test)]
mod tests;

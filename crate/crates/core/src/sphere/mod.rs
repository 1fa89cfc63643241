//! Directions and direction grids on the unit circle (n = 1) and the unit
//! sphere (n = 2).
//!
//! All vectors live in `R^3`; for n = 1 the circle is embedded in the
//! `z = 0` plane and every operation keeps the third coordinate at zero.
//! Grids are antipodally symmetric, carry neighbor lists and (for n = 2) the
//! icosphere faces, and are immutable once built.

mod icosphere;
mod refine;

use std::ops::Neg;

use nalgebra::Vector3;

use crate::error::{ReflectorError, Result};

pub use refine::{refine_direction, Mode};
pub(crate) use refine::{maximize_near, LocalSearch};

/// Tolerance on `‖v‖ = 1` for a [`Direction`].
pub const UNIT_TOL: f64 = 1e-12;

/// A unit vector. For n = 1 the third coordinate is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(Vector3<f64>);

impl Direction {
    /// Normalizes `v`. Zero and non-finite vectors are rejected.
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(ReflectorError::InvalidInput(format!(
                "cannot normalize vector {:?}",
                [v.x, v.y, v.z]
            )));
        }
        Ok(Self(v / n))
    }

    /// Builds a direction from 2 (circle) or 3 (sphere) coordinates.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        match coords {
            [x, y] => Self::new(Vector3::new(*x, *y, 0.0)),
            [x, y, z] => Self::new(Vector3::new(*x, *y, *z)),
            _ => Err(ReflectorError::InvalidInput(format!(
                "a direction needs 2 or 3 coordinates, got {}",
                coords.len()
            ))),
        }
    }

    /// Wraps a vector that is already unit length.
    pub(crate) fn from_unit(v: Vector3<f64>) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-9, "not a unit vector: {v:?}");
        Self(v)
    }

    pub fn e1() -> Self {
        Self(Vector3::x())
    }

    pub fn e2() -> Self {
        Self(Vector3::y())
    }

    pub fn e3() -> Self {
        Self(Vector3::z())
    }

    #[inline]
    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.dot(&other.0)
    }

    /// Geodesic distance in radians, accurate for small and near-antipodal angles.
    pub fn angle(&self, other: &Direction) -> f64 {
        angle_between(&self.0, &other.0)
    }

    /// Coordinates in the ambient space `R^(n+1)`.
    pub fn coords(&self, dim: u32) -> Vec<f64> {
        if dim == 1 {
            vec![self.0.x, self.0.y]
        } else {
            vec![self.0.x, self.0.y, self.0.z]
        }
    }

    /// Point reached by walking along the geodesic with initial tangent `t`
    /// for arc length `‖t‖`.
    pub fn exp(&self, t: &Vector3<f64>) -> Direction {
        let len = t.norm();
        if len == 0.0 {
            return *self;
        }
        let v = self.0 * len.cos() + t * (len.sin() / len);
        Direction(v / v.norm())
    }

    /// Orthonormal tangent basis at this direction: one vector for n = 1,
    /// two for n = 2.
    pub fn tangent_basis(&self, dim: u32) -> Vec<Vector3<f64>> {
        let x = &self.0;
        if dim == 1 {
            return vec![Vector3::new(-x.y, x.x, 0.0).normalize()];
        }
        let helper = if x.x.abs() <= x.y.abs() && x.x.abs() <= x.z.abs() {
            Vector3::x()
        } else if x.y.abs() <= x.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let t1 = (helper - x * x.dot(&helper)).normalize();
        let t2 = x.cross(&t1);
        vec![t1, t2]
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}

pub(crate) fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// A discretization of `S^n` used to seed every sup/inf transform.
#[derive(Clone, Debug)]
pub struct DirectionGrid {
    dim: u32,
    level: u32,
    points: Vec<Direction>,
    antipodal: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    /// Triangles (n = 2) or consecutive segments stored as `[i, j, j]` (n = 1).
    faces: Vec<[usize; 3]>,
    resolution: f64,
}

/// Builds the grid of the given level: `2^(level+3)` equally spaced points on
/// the circle, or the icosphere subdivided `level` times.
pub fn make_grid(dim: u32, level: u32) -> Result<DirectionGrid> {
    let (points, faces) = match dim {
        1 => circle(level),
        2 => icosphere::build(level),
        other => return Err(ReflectorError::UnsupportedDimension(other)),
    };
    DirectionGrid::assemble(dim, level, points, faces)
}

fn circle(level: u32) -> (Vec<Direction>, Vec<[usize; 3]>) {
    let n = 1usize << (level + 3);
    let points = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            Direction(Vector3::new(a.cos(), a.sin(), 0.0))
        })
        .collect();
    let faces = (0..n).map(|k| [k, (k + 1) % n, (k + 1) % n]).collect();
    (points, faces)
}

impl DirectionGrid {
    fn assemble(
        dim: u32,
        level: u32,
        mut points: Vec<Direction>,
        faces: Vec<[usize; 3]>,
    ) -> Result<Self> {
        // Symmetrize: add the antipode of any point that lacks one.
        let present = |set: &[Direction], q: &Direction| {
            let key = coord_key(q.vector());
            set.iter().any(|p| coord_key(p.vector()) == key)
                || nearest_index(set, q.vector()).1 <= 1e-9
        };
        let index: std::collections::HashSet<_> =
            points.iter().map(|p| coord_key(p.vector())).collect();
        let mut extra: Vec<Direction> = Vec::new();
        for p in &points {
            let q = -*p;
            if !index.contains(&coord_key(q.vector()))
                && !present(&points, &q)
                && !present(&extra, &q)
            {
                extra.push(q);
            }
        }
        points.extend(extra);

        let n = points.len();
        let mut neighbors = vec![Vec::new(); n];
        for f in &faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                if a != b {
                    neighbors[a].push(b);
                    neighbors[b].push(a);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }

        let antipodal = antipodal_map(&points);
        let resolution = points
            .iter()
            .zip(&neighbors)
            .map(|(p, nb)| {
                nb.iter()
                    .map(|&j| p.angle(&points[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);

        Ok(Self {
            dim,
            level,
            points,
            antipodal,
            neighbors,
            faces,
            resolution,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Direction] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Direction {
        &self.points[i]
    }

    pub fn antipodal_map(&self) -> &[usize] {
        &self.antipodal
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Icosphere triangles for n = 2; for n = 1, segment `[i, j]` is stored as `[i, j, j]`.
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Maximum over points of the geodesic distance to the nearest neighbor.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Each undirected neighbor pair once, `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Index of the grid point closest to `v` and its angle.
    pub fn nearest(&self, v: &Vector3<f64>) -> (usize, f64) {
        nearest_index(&self.points, v)
    }

    /// Index of the grid point equal to `d` within `tol` radians.
    pub fn find(&self, d: &Direction, tol: f64) -> Option<usize> {
        let (i, a) = self.nearest(d.vector());
        (a <= tol).then_some(i)
    }

    /// Whether the neighbor graph is connected.
    pub fn is_connected(&self) -> bool {
        if self.points.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.len()
    }
}

fn nearest_index(points: &[Direction], v: &Vector3<f64>) -> (usize, f64) {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, p) in points.iter().enumerate() {
        let c = p.vector().dot(v);
        if c > best.1 {
            best = (i, c);
        }
    }
    if points.is_empty() {
        return (0, f64::INFINITY);
    }
    let i = best.0;
    (i, angle_between(points[i].vector(), v))
}

fn coord_key(v: &Vector3<f64>) -> (i64, i64, i64) {
    let q = |c: f64| (c * 1e8).round() as i64;
    (q(v.x), q(v.y), q(v.z))
}

fn antipodal_map(points: &[Direction]) -> Vec<usize> {
    use std::collections::HashMap;
    let key = coord_key;
    let index: HashMap<_, usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (key(p.vector()), i))
        .collect();
    points
        .iter()
        .map(|p| {
            let q = -p.0;
            index
                .get(&key(&q))
                .copied()
                .filter(|&j| (points[j].0 + p.0).norm() <= 1e-12)
                .unwrap_or_else(|| nearest_index(points, &q).0)
        })
        .collect()
}

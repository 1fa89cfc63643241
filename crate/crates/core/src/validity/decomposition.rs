//! Axes supporting the reflector at a point, and nonnegative decompositions
//! of `x - y` over them.

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use crate::error::{ReflectorError, Result};
use crate::nnls::nnls;
use crate::optics::reflect;
use crate::reflector::{reflector_map, FocalField, Reflector, GRID_MATCH_TOL};
use crate::sphere::{make_grid, Direction};

/// Largest accepted reconstruction residual `‖(x - y) - Σ α_i (x - y_i)‖`.
pub const RESIDUAL_LIMIT: f64 = 1e-7;

/// Smallest accepted singular value of the normalized term vectors.
const INDEPENDENCE: f64 = 1e-9;

/// Directions closer than this are the same axis.
const SAME_AXIS: f64 = 1e-9;

/// `x - y = Σ α_i (x - y_i)` with `α_i ≥ 0` and independent `x - y_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub base: Direction,
    pub target: Direction,
    pub terms: Vec<(f64, Direction)>,
    pub residual: f64,
}

impl Decomposition {
    /// Recomputes the residual from the terms.
    pub fn reconstruction_error(&self) -> f64 {
        let x = self.base.vector();
        let sum: Vector3<f64> = self
            .terms
            .iter()
            .map(|(a, y)| (x - y.vector()) * *a)
            .sum();
        ((x - self.target.vector()) - sum).norm()
    }

    /// Smallest singular value of the unit term vectors `(x - y_i) / |x - y_i|`.
    pub fn independence(&self) -> f64 {
        let cols: Vec<Vector3<f64>> = self
            .terms
            .iter()
            .map(|(_, y)| (self.base.vector() - y.vector()).normalize())
            .collect();
        min_singular(&cols)
    }
}

fn min_singular(cols: &[Vector3<f64>]) -> f64 {
    if cols.is_empty() || cols.len() > 3 {
        return 0.0;
    }
    let m = DMatrix::from_fn(3, cols.len(), |r, c| cols[c][r]);
    m.singular_values().min()
}

fn push_unique(out: &mut Vec<Direction>, y: Direction) {
    if !out.iter().any(|z| z.angle(&y) < SAME_AXIS) {
        out.push(y);
    }
}

/// Normals at `x` of the generating paraboloids through the surface point.
fn active_normals(r: &Reflector, x: &Direction, eps: f64) -> Vec<(Direction, Direction)> {
    r.active_members(x, eps)
        .into_iter()
        .filter_map(|(y, _)| {
            let d = x.vector() - y.vector();
            Direction::new(d).ok().map(|u| (y, u))
        })
        .collect()
}

/// Axes of paraboloids supporting `R` at the surface point in direction `x`.
///
/// Besides the grid axes of the reflector map, the normal cone at an edge or
/// vertex is sampled at roughly the grid spacing: every normal `u` in the cone
/// spanned by the generating normals gives the supporting axis
/// `reflect(x, u)`. At smooth points the result is the single axis.
pub fn supporting_axes(r: &Reflector, x: &Direction, eps: f64) -> Vec<Direction> {
    let mut out = Vec::new();
    let act = active_normals(r, x, eps);
    for (y, _) in &act {
        push_unique(&mut out, *y);
    }
    for y in reflector_map(r, x, eps) {
        push_unique(&mut out, y);
    }
    if act.len() < 2 {
        return out;
    }
    let spacing = r.eval_grid().resolution();
    let normals: Vec<Vector3<f64>> = act.iter().map(|(_, u)| *u.vector()).collect();
    let mut add = |u: Vector3<f64>| {
        if let Ok(u) = Direction::new(u) {
            if let Ok(y) = reflect(x, &u) {
                push_unique(&mut out, y);
            }
        }
    };
    // The axis turns twice as fast as the normal.
    let steps = |angle: f64| ((2.0 * angle / spacing).ceil() as usize).max(1);
    let k = normals.len();
    for a in 0..k {
        for b in a + 1..k {
            let m = steps(crate::sphere::angle_between(&normals[a], &normals[b]));
            for i in 1..m {
                let t = i as f64 / m as f64;
                add(normals[a] * (1.0 - t) + normals[b] * t);
            }
            if r.dim() == 1 {
                continue;
            }
            for c in b + 1..k {
                let widest = [(a, b), (a, c), (b, c)]
                    .iter()
                    .map(|&(i, j)| crate::sphere::angle_between(&normals[i], &normals[j]))
                    .fold(0.0, f64::max);
                let m = steps(widest);
                for i in 1..m {
                    for j in 1..m - i {
                        let l = m - i - j;
                        add(normals[a] * i as f64 + normals[b] * j as f64 + normals[c] * l as f64);
                    }
                }
            }
        }
    }
    out
}

fn solve(x: &Direction, target: &Vector3<f64>, axes: &[Direction]) -> (Vec<f64>, f64) {
    let a = DMatrix::from_fn(3, axes.len(), |r, c| x.vector()[r] - axes[c].vector()[r]);
    let b = DVector::from_column_slice(target.as_slice());
    let s = nnls(&a, &b);
    (s.coefficients.iter().copied().collect(), s.residual)
}

/// Largest angle between an axis of the input grid and the nearest axis
/// supporting the surface somewhere.
///
/// Supporting axes are collected at the evaluation directions, at the
/// crossings of the surface edges with the edges of the next finer grid, and
/// at the vertices. The reflector map is onto, so the result shrinks with
/// the grid spacing.
pub fn axis_coverage(r: &Reflector, eps: f64) -> Result<f64> {
    let eval = r.eval_grid();
    let finer = make_grid(r.dim(), eval.level() + 1)?;
    let mut sources: Vec<Direction> = eval.points().to_vec();
    sources.extend(r.edge_directions(&finer));
    sources.extend(r.vertices());
    let axes: Vec<Direction> = sources
        .par_iter()
        .flat_map_iter(|x| supporting_axes(r, x, eps))
        .collect();
    Ok(r.closure()
        .grid()
        .points()
        .par_iter()
        .map(|y| axes.iter().map(|z| y.angle(z)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max))
}

/// Writes `x - y` as a nonnegative combination of at most `n + 1`
/// independent vectors `x - y_i` over axes `y_i` supporting `R` at `x`.
///
/// `y` must itself support `R` at `x` to relative accuracy `eps`.
pub fn find_decomposition(
    r: &Reflector,
    x: &Direction,
    y: &Direction,
    eps: f64,
) -> Result<Decomposition> {
    let rho = r.radius(x);
    let py = r.focal_at(y);
    let gap = (py - rho * (1.0 - x.dot(y))).abs() / py;
    if !(gap <= eps) {
        return Err(ReflectorError::NotSupporting { gap });
    }
    let generators: Vec<Direction> = r.active_members(x, eps).into_iter().map(|(a, _)| a).collect();
    let done = |terms: Vec<(f64, Direction)>| {
        let mut d = Decomposition {
            base: *x,
            target: *y,
            terms,
            residual: 0.0,
        };
        d.residual = d.reconstruction_error();
        d
    };
    if let Some(g) = generators.iter().find(|g| g.angle(y) < SAME_AXIS) {
        return Ok(done(vec![(1.0, *g)]));
    }

    let target = x.vector() - y.vector();
    let mut axes = generators;
    let (mut coef, mut residual) = if axes.is_empty() {
        (Vec::new(), f64::INFINITY)
    } else {
        solve(x, &target, &axes)
    };
    if residual > RESIDUAL_LIMIT {
        for z in supporting_axes(r, x, eps) {
            push_unique(&mut axes, z);
        }
        (coef, residual) = solve(x, &target, &axes);
    }
    if residual > RESIDUAL_LIMIT {
        return Err(ReflectorError::DecompositionFailure { residual });
    }

    let mut terms: Vec<(f64, Direction)> = coef
        .into_iter()
        .zip(axes)
        .filter(|(a, _)| *a > 0.0)
        .collect();
    let max_terms = r.dim() as usize + 1;
    loop {
        let cols: Vec<Vector3<f64>> = terms
            .iter()
            .map(|(_, z)| (x.vector() - z.vector()).normalize())
            .collect();
        if terms.len() <= max_terms && min_singular(&cols) > INDEPENDENCE {
            break;
        }
        // Drop the term whose removal still reconstructs `x - y`, smallest
        // coefficient first.
        let mut order: Vec<usize> = (0..terms.len()).collect();
        order.sort_by(|&i, &j| terms[i].0.total_cmp(&terms[j].0));
        let reduced = order.into_iter().find_map(|drop| {
            let rest: Vec<Direction> = terms
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, t)| t.1)
                .collect();
            let (c, res) = solve(x, &target, &rest);
            (res <= RESIDUAL_LIMIT).then(|| {
                c.into_iter()
                    .zip(rest)
                    .filter(|(a, _)| *a > 0.0)
                    .collect::<Vec<_>>()
            })
        });
        match reduced {
            Some(t) if !t.is_empty() => terms = t,
            _ => {
                return Err(ReflectorError::DecompositionFailure { residual });
            }
        }
    }
    let d = done(terms);
    if d.residual > RESIDUAL_LIMIT {
        return Err(ReflectorError::DecompositionFailure {
            residual: d.residual,
        });
    }
    Ok(d)
}

/// Finite focal values at arbitrary directions.
pub trait FocalLookup {
    fn focal(&self, y: &Direction) -> Result<f64>;
}

fn not_evaluable(y: &Direction) -> ReflectorError {
    let v = y.vector();
    ReflectorError::NotEvaluable([v.x, v.y, v.z])
}

/// Grid values only; infinite or off-grid directions are not evaluable.
impl FocalLookup for FocalField {
    fn focal(&self, y: &Direction) -> Result<f64> {
        self.value_at(y)
            .filter(|v| v.is_finite())
            .ok_or_else(|| not_evaluable(y))
    }
}

/// The focal function of the reflector, everywhere.
impl FocalLookup for Reflector {
    fn focal(&self, y: &Direction) -> Result<f64> {
        Ok(self.focal_at(y))
    }
}

/// A field on its grid, and the focal function of a reflector elsewhere.
#[derive(Clone, Copy, Debug)]
pub struct ExtendedFocal<'a> {
    pub field: &'a FocalField,
    pub reflector: &'a Reflector,
}

impl FocalLookup for ExtendedFocal<'_> {
    fn focal(&self, y: &Direction) -> Result<f64> {
        match self.field.grid().find(y, GRID_MATCH_TOL) {
            Some(i) if self.field.value(i).is_finite() => Ok(self.field.value(i)),
            Some(_) => Err(not_evaluable(y)),
            None => Ok(self.reflector.focal_at(y)),
        }
    }
}

/// `Σ α_i p(y_i) - p(y)`; nonnegative for focal functions.
pub fn check_minkg(p: &impl FocalLookup, d: &Decomposition) -> Result<f64> {
    let mut sum = 0.0;
    for (a, y) in &d.terms {
        sum += a * p.focal(y)?;
    }
    Ok(sum - p.focal(&d.target)?)
}

//! Local search for extrema of a scalar function on the sphere.
//!
//! The search works in the gnomonic chart at the start direction, restricted
//! to a geodesic cap. On the circle it is a coarse scan followed by
//! golden-section search; on the sphere it is Nelder–Mead with restarts.

use nalgebra::Vector2;

use super::{Direction, DirectionGrid};
use crate::error::{ReflectorError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Maximize,
    Minimize,
}

/// Parameters of a capped local search.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LocalSearch {
    /// Cap radius around the start direction (radians).
    pub radius: f64,
    /// Initial simplex edge / scan half-width scale (radians).
    pub step: f64,
    /// Convergence tolerance on the chart coordinates (radians near the start).
    pub tol: f64,
    pub max_evals: usize,
}

impl LocalSearch {
    pub fn for_grid(grid: &DirectionGrid, tol: f64) -> Self {
        let res = grid.resolution();
        Self {
            radius: (2.0 * res).min(1.4),
            step: 0.5 * res,
            tol,
            max_evals: 4000,
        }
    }
}

/// Returns a direction near `grid[start]` where `objective` is locally
/// extremal to within `tol`.
///
/// The result never lies farther than twice the grid resolution from the
/// start and is never worse than the start itself.
pub fn refine_direction<F>(
    grid: &DirectionGrid,
    start: usize,
    objective: F,
    mode: Mode,
    tol: f64,
) -> Result<Direction>
where
    F: Fn(&Direction) -> f64,
{
    if !(tol > 0.0) {
        return Err(ReflectorError::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let cfg = LocalSearch::for_grid(grid, tol);
    let x0 = *grid.point(start);
    let (x, _) = match mode {
        Mode::Maximize => maximize_near(grid.dim(), x0, &objective, &cfg)?,
        Mode::Minimize => maximize_near(grid.dim(), x0, &|d: &Direction| -objective(d), &cfg)?,
    };
    Ok(x)
}

/// Maximizes `objective` in the cap of radius `cfg.radius` around `start`.
/// Returns the best direction and its objective value.
pub(crate) fn maximize_near<F>(
    dim: u32,
    start: Direction,
    objective: &F,
    cfg: &LocalSearch,
) -> Result<(Direction, f64)>
where
    F: Fn(&Direction) -> f64 + ?Sized,
{
    let basis = start.tangent_basis(dim);
    let limit = cfg.radius.min(1.5).tan();
    let chart = |a: &[f64]| -> Direction {
        let mut v = *start.vector();
        for (t, c) in basis.iter().zip(a) {
            v += t * *c;
        }
        Direction::from_unit(v.normalize())
    };
    let eval = |a: &[f64]| -> Result<f64> {
        let r2: f64 = a.iter().map(|c| c * c).sum();
        if r2.sqrt() > limit {
            return Ok(f64::NEG_INFINITY);
        }
        let v = objective(&chart(a));
        if !v.is_finite() {
            return Err(ReflectorError::NumericalEvaluation(v));
        }
        Ok(v)
    };

    let f0 = eval(&[0.0, 0.0][..basis.len()])?;
    let (best, fbest) = if dim == 1 {
        let (a, f) = scan_golden(&|t| eval(&[t]), limit, cfg)?;
        (vec![a], f)
    } else {
        let (a, f) = nelder_mead(&|p: Vector2<f64>| eval(&[p.x, p.y]), cfg)?;
        (vec![a.x, a.y], f)
    };
    if fbest > f0 {
        Ok((chart(&best), fbest))
    } else {
        Ok((start, f0))
    }
}

fn scan_golden<F>(f: &F, limit: f64, cfg: &LocalSearch) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const SAMPLES: usize = 16;
    let half = limit.min(cfg.radius.tan());
    let h = half / SAMPLES as f64;
    let mut best = (0.0, f(0.0)?);
    for k in 1..=SAMPLES {
        for t in [k as f64 * h, -(k as f64) * h] {
            let v = f(t)?;
            if v > best.1 {
                best = (t, v);
            }
        }
    }
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut evals = 2 * SAMPLES + 3;
    while hi - lo > cfg.tol && evals < cfg.max_evals {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d)?;
        }
        evals += 1;
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(best)
}

/// Nelder–Mead maximization in the plane starting at the origin, restarted
/// with shrinking simplices until a restart stops improving.
fn nelder_mead<F>(f: &F, cfg: &LocalSearch) -> Result<(Vector2<f64>, f64)>
where
    F: Fn(Vector2<f64>) -> Result<f64>,
{
    let mut best = (Vector2::zeros(), f(Vector2::zeros())?);
    let mut evals = 1usize;
    let mut size = cfg.step.max(cfg.tol * 10.0);
    for restart in 0..6 {
        let (p, v, used) = nelder_mead_once(f, best.0, size, cfg, cfg.max_evals.saturating_sub(evals))?;
        evals += used;
        let improved = v > best.1;
        if improved {
            best = (p, v);
        }
        if (!improved && restart > 0) || evals >= cfg.max_evals {
            break;
        }
        size = (size * 0.05).max(cfg.tol * 10.0);
    }
    Ok(best)
}

fn nelder_mead_once<F>(
    f: &F,
    origin: Vector2<f64>,
    size: f64,
    cfg: &LocalSearch,
    budget: usize,
) -> Result<(Vector2<f64>, f64, usize)>
where
    F: Fn(Vector2<f64>) -> Result<f64>,
{
    let mut s = [
        (origin, f(origin)?),
        (origin + Vector2::new(size, 0.0), f(origin + Vector2::new(size, 0.0))?),
        (origin + Vector2::new(0.0, size), f(origin + Vector2::new(0.0, size))?),
    ];
    let mut evals = 3usize;
    loop {
        // Descending by value; the sort is stable so ties keep their order.
        s.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let diam = (s[1].0 - s[0].0).norm().max((s[2].0 - s[0].0).norm());
        if diam <= cfg.tol || evals >= budget {
            break;
        }
        let centroid = (s[0].0 + s[1].0) / 2.0;
        let worst = s[2];
        let xr = centroid + (centroid - worst.0);
        let fr = f(xr)?;
        evals += 1;
        if fr > s[0].1 {
            let xe = centroid + 2.0 * (centroid - worst.0);
            let fe = f(xe)?;
            evals += 1;
            s[2] = if fe > fr { (xe, fe) } else { (xr, fr) };
        } else if fr > s[1].1 {
            s[2] = (xr, fr);
        } else {
            let outside = fr > worst.1;
            let xc = if outside {
                centroid + 0.5 * (xr - centroid)
            } else {
                centroid + 0.5 * (worst.0 - centroid)
            };
            let fc = f(xc)?;
            evals += 1;
            let accept = if outside { fc >= fr } else { fc > worst.1 };
            if accept {
                s[2] = (xc, fc);
            } else {
                let b = s[0].0;
                for v in s.iter_mut().skip(1) {
                    v.0 = b + 0.5 * (v.0 - b);
                    v.1 = f(v.0)?;
                }
                evals += 2;
            }
        }
    }
    Ok((s[0].0, s[0].1, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::make_grid;
    use nalgebra::Vector3;

    #[test]
    fn linear_objective_peaks_at_axis() {
        for dim in [1u32, 2] {
            let g = make_grid(dim, 2).unwrap();
            let e1 = Direction::e1();
            let start = g.nearest(e1.vector()).0;
            let x = refine_direction(&g, start, |d| d.dot(&e1), Mode::Maximize, 1e-10).unwrap();
            assert!(x.angle(&e1) < 1e-9, "dim {dim}: {}", x.angle(&e1));
        }
    }

    #[test]
    fn constant_objective_returns_start() {
        let g = make_grid(2, 1).unwrap();
        let x = refine_direction(&g, 7, |_| 1.0, Mode::Maximize, 1e-9).unwrap();
        assert_eq!(x, *g.point(7));
    }

    #[test]
    fn focal_ratio_is_minimized_at_antipode() {
        // min over y of p / (1 - <x0, y>) is attained at y = -x0.
        let x0 = Direction::new(Vector3::new(0.3, -0.5, 0.8)).unwrap();
        let objective = |y: &Direction| 1.5 / (1.0 - x0.dot(y));
        // Dense sampling oracle: nothing beats the antipode.
        let dense = make_grid(2, 5).unwrap();
        let best = dense.points().iter().map(objective).fold(f64::INFINITY, f64::min);
        assert!(objective(&-x0) <= best);

        let g = make_grid(2, 3).unwrap();
        let start = g.nearest(&-x0.vector()).0;
        let tol = 1e-9;
        let y = refine_direction(&g, start, objective, Mode::Minimize, tol).unwrap();
        assert!(y.angle(&-x0) < 1e-6, "angle {}", y.angle(&-x0));
        assert!(objective(&y) - objective(&-x0) < 1e-12);
        assert!(y.angle(g.point(start)) <= 2.0 * g.resolution());
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let g = make_grid(2, 1).unwrap();
        let err = refine_direction(&g, 0, |_| f64::NAN, Mode::Maximize, 1e-9).unwrap_err();
        assert_eq!(err.name(), "numerical-evaluation");
    }

    #[test]
    fn never_leaves_the_cap_or_worsens() {
        let g = make_grid(2, 2).unwrap();
        let target = Direction::new(Vector3::new(-1.0, 2.0, 0.5)).unwrap();
        for start in [0usize, 5, 40, 100] {
            let obj = |d: &Direction| d.dot(&target);
            let x = refine_direction(&g, start, obj, Mode::Maximize, 1e-9).unwrap();
            assert!(x.angle(g.point(start)) <= 2.0 * g.resolution() + 1e-12);
            assert!(obj(&x) >= obj(g.point(start)));
        }
    }
}

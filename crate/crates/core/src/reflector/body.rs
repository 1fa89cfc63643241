//! Maximization of `rho(x) (k + <x, v>)` over the surface of a body given by
//! a finite family.

use std::sync::OnceLock;

use super::arrangement::{Affine, Arrangement};
use super::family::Family;
use crate::sphere::{maximize_near, Direction, DirectionGrid, LocalSearch};

/// Families up to this size get the exact edge/vertex arrangement; larger
/// ones are handled by grid-seeded local search.
pub(crate) const ARRANGEMENT_LIMIT: usize = 3000;

/// Number of discrete local maxima used as local-search seeds.
const SEEDS: usize = 3;

#[derive(Debug)]
pub(crate) struct Body {
    dim: u32,
    family: Family,
    arrangement: OnceLock<Option<Arrangement>>,
}

/// Radii sampled on a grid, used to seed local searches.
pub(crate) struct Samples<'a> {
    pub grid: &'a DirectionGrid,
    pub radii: &'a [f64],
}

/// Relative margin by which a member must undercut the body of the others
/// to be kept.
const REDUNDANCY_MARGIN: f64 = 1e-12;

/// Families at least this large are pruned of redundant members.
const PRUNE_FROM: usize = 24;

impl Body {
    pub fn new(family: Family, dim: u32) -> Self {
        if family.len() >= PRUNE_FROM && family.len() <= ARRANGEMENT_LIMIT {
            let (family, arrangement) = prune(family, dim);
            return Self {
                dim,
                family,
                arrangement: OnceLock::from(Some(arrangement)),
            };
        }
        Self {
            dim,
            family,
            arrangement: OnceLock::new(),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    fn arrangement(&self) -> Option<&Arrangement> {
        self.arrangement
            .get_or_init(|| {
                (self.family.len() <= ARRANGEMENT_LIMIT)
                    .then(|| Arrangement::new(&self.family, self.dim))
            })
            .as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.family.len() <= ARRANGEMENT_LIMIT
    }

    /// Vertex directions of the surface, when the arrangement is available.
    pub fn vertices(&self) -> Vec<Direction> {
        self.arrangement()
            .map(|a| a.vertices().copied().collect())
            .unwrap_or_default()
    }

    #[inline]
    pub fn radius(&self, x: &Direction) -> f64 {
        self.family.radius(x).0
    }

    /// Best direction and value of `rho(x) (k + <x, v>)`.
    pub fn maximize(&self, obj: &Affine, samples: &Samples<'_>, tol: f64) -> (Direction, f64) {
        if let Some(arr) = self.arrangement() {
            if let Some(best) = arr.maximize(&self.family, obj) {
                return best;
            }
        }
        self.search(obj, samples, tol)
    }

    fn search(&self, obj: &Affine, samples: &Samples<'_>, tol: f64) -> (Direction, f64) {
        let cap = LocalSearch::for_grid(samples.grid, tol).radius * 1.05;
        let (x, _) = seeded_search(samples, obj, tol, |start| {
            let local = self.family.local(start, cap);
            move |x: &Direction| local.radius(x).0
        });
        (x, self.radius(&x) * obj.weight(&x))
    }
}

/// Local search for the maximum of `radius(x) (k + <x, v>)` from the best
/// discrete local maxima on the sample grid. `radius_near(start)` returns a
/// radial function valid in the search cap around `start`.
pub(crate) fn seeded_search<R, G>(
    samples: &Samples<'_>,
    obj: &Affine,
    tol: f64,
    radius_near: G,
) -> (Direction, f64)
where
    G: Fn(&Direction) -> R,
    R: Fn(&Direction) -> f64,
{
    let grid = samples.grid;
    let values: Vec<f64> = grid
        .points()
        .iter()
        .zip(samples.radii)
        .map(|(x, r)| r * obj.weight(x))
        .collect();
    let mut peaks: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.neighbors(i).iter().all(|&j| values[j] <= values[i]))
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks.truncate(SEEDS);

    let cfg = LocalSearch::for_grid(grid, tol);
    let mut best = (*grid.point(peaks[0]), values[peaks[0]]);
    for &i in &peaks {
        let start = *grid.point(i);
        let radius = radius_near(&start);
        let f = |x: &Direction| radius(x) * obj.weight(x);
        if let Ok((x, v)) = maximize_near(grid.dim(), start, &f, &cfg) {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

/// Drops members whose paraboloid contains the body of the others.
///
/// Starts from the members that are minimal at the antipode of some axis and
/// adds every member that undercuts the current body along its own axis until
/// none does. Each remaining outsider then contains the body, so the body
/// is unchanged.
fn prune(family: Family, dim: u32) -> (Family, Arrangement) {
    let n = family.len();
    let mut keep = vec![false; n];
    for j in 0..n {
        keep[family.radius(&-*family.axis(j)).1] = true;
    }
    loop {
        let sub = subfamily(&family, &keep);
        if sub.distinct_axes() < 2 {
            // Close the body with the member minimal along the lone axis.
            let lone = keep.iter().position(|&k| k).unwrap_or(0);
            keep[family.radius(family.axis(lone)).1] = true;
            continue;
        }
        let arr = Arrangement::new(&sub, dim);
        let undercut: Vec<usize> = (0..n)
            .filter(|&j| !keep[j])
            .filter(|&j| {
                let sup = arr
                    .maximize(&sub, &Affine::focal(family.axis(j).vector()))
                    .map_or(f64::INFINITY, |(_, v)| v);
                family.param(j) < sup * (1.0 - REDUNDANCY_MARGIN)
            })
            .collect();
        if undercut.is_empty() {
            return (sub, arr);
        }
        for j in undercut {
            keep[j] = true;
        }
    }
}

fn subfamily(family: &Family, keep: &[bool]) -> Family {
    Family::new(
        (0..family.len())
            .filter(|&j| keep[j])
            .map(|j| (*family.axis(j), family.param(j), family.source(j))),
    )
}

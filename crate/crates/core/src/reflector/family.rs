//! A finite family of confocal paraboloids and the radial function of the
//! intersection of their solids.

use crate::paraboloid::AXIS_GUARD;
use crate::sphere::Direction;

/// Members `(axis, focal parameter)` with `0 < p < ∞`, each remembering the
/// grid index it came from.
#[derive(Clone, Debug, Default)]
pub struct Family {
    axes: Vec<Direction>,
    params: Vec<f64>,
    sources: Vec<usize>,
}

impl Family {
    pub fn new(members: impl IntoIterator<Item = (Direction, f64, usize)>) -> Self {
        let mut f = Self::default();
        for (y, p, s) in members {
            debug_assert!(p > 0.0 && p.is_finite());
            f.axes.push(y);
            f.params.push(p);
            f.sources.push(s);
        }
        f
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn axis(&self, j: usize) -> &Direction {
        &self.axes[j]
    }

    pub fn axes(&self) -> &[Direction] {
        &self.axes
    }

    pub fn param(&self, j: usize) -> f64 {
        self.params[j]
    }

    pub fn source(&self, j: usize) -> usize {
        self.sources[j]
    }

    /// Number of pairwise distinct axes, up to `1e-12` rad.
    pub fn distinct_axes(&self) -> usize {
        let mut seen: Vec<&Direction> = Vec::new();
        for y in &self.axes {
            if !seen.iter().any(|s| s.angle(y) <= 1e-12) {
                seen.push(y);
            }
        }
        seen.len()
    }

    /// Member term `p_j / (1 - <x, y_j>)`, or `∞` inside the axis guard.
    #[inline]
    pub fn term(&self, j: usize, x: &Direction) -> f64 {
        let d = 1.0 - x.dot(&self.axes[j]);
        if d <= AXIS_GUARD {
            f64::INFINITY
        } else {
            self.params[j] / d
        }
    }

    /// Radial function and the index of a minimizing member.
    #[inline]
    pub fn radius(&self, x: &Direction) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..self.axes.len() {
            let r = self.term(j, x);
            if r < best.0 {
                best = (r, j);
            }
        }
        best
    }

    /// Relative slack `(p_j - rho (1 - <x, y_j>)) / p_j` of member `j` at the
    /// surface point in direction `x` with radius `rho`.
    pub fn slack(&self, j: usize, x: &Direction, rho: f64) -> f64 {
        (self.params[j] - rho * (1.0 - x.dot(&self.axes[j]))) / self.params[j]
    }

    /// Members whose paraboloid passes through the surface point in
    /// direction `x`, to relative accuracy `rel`, ordered by slack.
    pub fn active(&self, x: &Direction, rho: f64, rel: f64) -> Vec<usize> {
        let mut act: Vec<(f64, usize)> = (0..self.len())
            .map(|j| (self.slack(j, x, rho), j))
            .filter(|(s, _)| *s <= rel)
            .collect();
        act.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        act.into_iter().map(|(_, j)| j).collect()
    }

    /// Sub-family of members that can attain the minimum somewhere in the
    /// geodesic cap of radius `radius` around `center`.
    pub fn local(&self, center: &Direction, radius: f64) -> Family {
        let bounds: Vec<(f64, f64)> = self
            .axes
            .iter()
            .zip(&self.params)
            .map(|(y, p)| {
                let theta = center.angle(y);
                let near = (theta - radius).max(0.0);
                let far = (theta + radius).min(std::f64::consts::PI);
                // Range of 1/rho_j = (1 - cos(angle)) / p over the cap.
                ((1.0 - near.cos()) / p, (1.0 - far.cos()) / p)
            })
            .collect();
        let floor = bounds.iter().map(|b| b.0).fold(0.0, f64::max);
        Family::new(
            bounds
                .iter()
                .enumerate()
                .filter(|(_, b)| b.1 >= floor)
                .map(|(j, _)| (self.axes[j], self.params[j], self.sources[j])),
        )
    }

    pub fn scaled(&self, c: f64) -> Family {
        Family {
            axes: self.axes.clone(),
            params: self.params.iter().map(|p| p * c).collect(),
            sources: self.sources.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn lens() -> Family {
        Family::new([(Direction::e3(), 1.0, 0), (-Direction::e3(), 1.0, 1)])
    }

    #[test]
    fn lens_radius() {
        let f = lens();
        assert_eq!(f.radius(&Direction::e1()).0, 1.0);
        assert_eq!(f.radius(&Direction::e3()).0, 0.5);
        let x = Direction::new(Vector3::new(0.3, 0.1, -0.7)).unwrap();
        assert!((f.radius(&x).0 - 1.0 / (1.0 + x.vector().z.abs())).abs() < 1e-15);
    }

    #[test]
    fn local_family_keeps_the_minimizer() {
        let g = crate::sphere::make_grid(2, 2).unwrap();
        let f = Family::new(
            g.points()
                .iter()
                .enumerate()
                .map(|(i, y)| (*y, 1.0 + 0.5 * ((i * 7919) % 13) as f64 / 13.0, i)),
        );
        for c in g.points().iter().step_by(17) {
            let loc = f.local(c, 0.3);
            assert!(loc.len() < f.len());
            for x in g.points().iter().filter(|x| x.angle(c) <= 0.3) {
                assert_eq!(loc.radius(x).0, f.radius(x).0);
            }
        }
    }

    #[test]
    fn active_members_at_lens_edge() {
        let f = lens();
        let x = Direction::e1();
        let (rho, _) = f.radius(&x);
        assert_eq!(f.active(&x, rho, 1e-9), vec![0, 1]);
        assert_eq!(f.distinct_axes(), 2);
    }
}

//! Standard test reflectors and seeded random families.

use std::ops::{Range, RangeInclusive};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::reflector::FocalField;
use crate::sphere::{Direction, DirectionGrid};

/// `p ≡ c`: the sphere of radius `c / 2`.
pub fn sphere(grid: &Arc<DirectionGrid>, c: f64) -> Result<FocalField> {
    FocalField::constant(grid.clone(), c)
}

/// The pole axis of the lens: `e3` on the sphere, `e2` on the circle.
pub fn pole(dim: u32) -> Direction {
    if dim == 1 {
        Direction::e2()
    } else {
        Direction::e3()
    }
}

/// Two opposite paraboloids `p(±pole) = 1`; the body has radius
/// `1 / (1 + |<x, pole>|)`.
pub fn lens(grid: &Arc<DirectionGrid>) -> Result<FocalField> {
    let n = pole(grid.dim());
    FocalField::from_entries(grid.clone(), &[(n, 1.0), (-n, 1.0)], f64::INFINITY)
}

/// Two paraboloids with perpendicular axes, `p(e1) = p(e2) = 1`.
pub fn perpendicular(grid: &Arc<DirectionGrid>) -> Result<FocalField> {
    FocalField::from_entries(
        grid.clone(),
        &[(Direction::e1(), 1.0), (Direction::e2(), 1.0)],
        f64::INFINITY,
    )
}

/// A family of `members` paraboloids on distinct grid axes with parameters
/// drawn uniformly from `params`; all other directions are `∞`.
pub fn random_family<R: Rng + ?Sized>(
    grid: &Arc<DirectionGrid>,
    members: RangeInclusive<usize>,
    params: Range<f64>,
    rng: &mut R,
) -> Result<FocalField> {
    let count = rng.random_range(members).clamp(2, grid.len());
    let mut values = vec![f64::INFINITY; grid.len()];
    for i in sample(rng, grid.len(), count) {
        values[i] = rng.random_range(params.clone());
    }
    FocalField::new(grid.clone(), values)
}

//! Law of reflection and ray tracing from the focus.

use nalgebra::Vector3;

use crate::error::{ReflectorError, Result};
use crate::reflector::{reflector_map, Reflector};
use crate::sphere::Direction;

/// A ray leaving the focus in direction `source`, the surface point it hits,
/// and one (normal, outgoing) pair per supporting paraboloid at that point.
#[derive(Clone, Debug)]
pub struct ReflectionRecord {
    pub source: Direction,
    pub hit: Vector3<f64>,
    pub axes: Vec<Direction>,
    pub normals: Vec<Direction>,
    pub outgoing: Vec<Direction>,
}

impl ReflectionRecord {
    /// Largest distance between an outgoing direction and the axis of its
    /// supporting paraboloid.
    pub fn max_axis_deviation(&self) -> f64 {
        self.outgoing
            .iter()
            .zip(&self.axes)
            .map(|(o, y)| (o.vector() - y.vector()).norm())
            .fold(0.0, f64::max)
    }
}

/// `y = x - 2 <x, u> u`. The normal must face the incoming direction
/// (`<x, u> > 0`), matching the outward orientation of supporting paraboloids.
pub fn reflect(x: &Direction, u: &Direction) -> Result<Direction> {
    let c = x.dot(u);
    if !(c > 0.0) {
        return Err(ReflectorError::Orientation(c));
    }
    Ok(Direction::from_unit(x.vector() - u.vector() * (2.0 * c)))
}

/// Traces the ray from the focus in direction `x` off the reflector.
pub fn trace(reflector: &Reflector, x: &Direction, eps: f64) -> Result<ReflectionRecord> {
    let rho = reflector.radius(x);
    let axes = reflector_map(reflector, x, eps);
    let mut normals = Vec::with_capacity(axes.len());
    let mut outgoing = Vec::with_capacity(axes.len());
    for y in &axes {
        let u = Direction::new(x.vector() - y.vector())?;
        outgoing.push(reflect(x, &u)?);
        normals.push(u);
    }
    Ok(ReflectionRecord {
        source: *x,
        hit: x.vector() * rho,
        axes,
        normals,
        outgoing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn retroreflection() {
        let y = reflect(&Direction::e1(), &Direction::e1()).unwrap();
        assert!((y.vector() + Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn tilted_normal_sends_e1_to_e3() {
        let u = Direction::new(Vector3::new(1.0, 0.0, -1.0)).unwrap();
        let y = reflect(&Direction::e1(), &u).unwrap();
        assert!((y.vector() - Vector3::z()).norm() < 1e-15);
    }

    #[test]
    fn tangential_normal_is_rejected() {
        assert_eq!(
            reflect(&Direction::e1(), &Direction::e3()).unwrap_err().name(),
            "orientation"
        );
    }

    #[test]
    fn involution_and_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 2000 {
            let mut v = || Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (Ok(x), Ok(u)) = (Direction::new(v()), Direction::new(v())) else { continue };
            let Ok(y) = reflect(&x, &u) else { continue };
            assert!((y.vector().norm() - 1.0).abs() <= 1e-12);
            // Reflecting back uses the normal facing the new direction.
            let back = reflect(&y, &-u).unwrap();
            assert!((back.vector() - x.vector()).norm() <= 1e-12);
            checked += 1;
        }
    }
}

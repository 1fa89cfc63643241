//! Convex reflectors generated by confocal paraboloids of revolution.
//!
//! A reflector is the boundary of an intersection of solid paraboloids that
//! share a focus at the origin. This crate samples such bodies on direction
//! grids of the circle and the sphere, computes the radial and focal
//! transforms between the two functions that describe a reflector, decides
//! whether a sampled function is the focal function of some reflector, and
//! builds the directrix surface in two independent ways.
//!
//! Finite families are handled exactly: the radial function is a minimum over
//! the members, and suprema over the surface are taken over the edges and
//! vertices of the body, which are computed in closed form.

// `!(a > b)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod directrix;
pub mod error;
pub mod nnls;
pub mod optics;
pub mod paraboloid;
pub mod reflector;
pub mod sphere;
pub mod suite;
pub mod validity;

pub use directrix::{
    directrix_from_map, directrix_from_support, directrix_map_cloud, directrix_support_identity,
    hausdorff, smoothness_probe, DirectrixSurface, MapPoint, SmoothnessReport,
};
pub use error::{ReflectorError, Result};
pub use optics::{reflect, trace, ReflectionRecord};
pub use paraboloid::{paraboloid_through, Containment, Hyperplane, Paraboloid};
pub use reflector::{
    build_reflector, focal_from_radial, radial_from_focal, reflector_map, support_function,
    surface_from_support, FocalField, RadialField, Reflector, SurfacePoint,
};
pub use sphere::{make_grid, refine_direction, Direction, DirectionGrid, Mode};

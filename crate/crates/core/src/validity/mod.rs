//! Deciding whether a sampled function is a focal function, and the
//! inequalities that every focal function satisfies.
//!
//! A field `p` is valid exactly when the closure `p* = focal(radial(p))`
//! reproduces it. The closure is always pointwise below `p`, so the largest
//! relative drop `(p - p*) / p` is the validity gap.

mod decomposition;
mod extension;
mod search;

use std::sync::Arc;

use crate::error::{ReflectorError, Result};
use crate::reflector::{focal_from_radial, radial_from_focal, FocalField, Reflector};
use crate::sphere::{make_grid, Direction, DirectionGrid};

pub use decomposition::{
    axis_coverage, check_minkg, find_decomposition, supporting_axes, Decomposition, ExtendedFocal, FocalLookup,
    RESIDUAL_LIMIT,
};
pub use extension::{
    check_refined_inequality, check_subadditivity, extend_focal, Extension, RefinedCheck,
};
pub use search::{
    sublinear_but_invalid_search, sublinearity_violation, Candidate, ClosureOutputs, Constants,
    polytope_support, FieldFamily, PolytopeSupports, SearchHit, SUBLINEARITY_PAIRS,
};

/// `p* = focal(radial(p))` on `p`'s grid, with the radial function sampled
/// on the grid of level `level`.
pub fn closure(p: &FocalField, level: u32, tol: f64) -> Result<FocalField> {
    let eval: Arc<DirectionGrid> = if level == p.grid().level() {
        p.grid().clone()
    } else {
        Arc::new(make_grid(p.dim(), level)?)
    };
    let rho = radial_from_focal(p, &eval, tol)?;
    focal_from_radial(&rho, p.grid(), tol)
}

/// Direction where the closure drops the most.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub axis: Direction,
    pub value: f64,
    pub closure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityVerdict {
    pub valid: bool,
    /// Present on invalid verdicts only; `closure < value` there.
    pub witness: Option<Witness>,
    pub max_relative_gap: f64,
}

/// Compares `p` with its closure over the finite entries of `p`.
///
/// Infinite entries mean "no paraboloid with this axis" and are not compared.
/// At least two finite entries are required.
pub fn is_focal_function(p: &FocalField, tol: f64) -> Result<ValidityVerdict> {
    if p.finite_count() < 2 {
        return Err(ReflectorError::InvalidInput(format!(
            "{} finite focal values; a bounded positive field needs at least two",
            p.finite_count()
        )));
    }
    let star = closure(p, p.grid().level(), tol)?;
    Ok(verdict(p, &star, tol))
}

/// Verdict for `p` against a precomputed closure `star` on the same grid.
pub fn verdict(p: &FocalField, star: &FocalField, tol: f64) -> ValidityVerdict {
    let (gap, worst) = p
        .values()
        .iter()
        .zip(star.values())
        .enumerate()
        .filter(|(_, (v, _))| v.is_finite())
        .map(|(i, (v, s))| ((v - s) / v, i))
        .fold((f64::NEG_INFINITY, 0), |best, cur| if cur.0 > best.0 { cur } else { best });
    let valid = gap <= tol;
    ValidityVerdict {
        valid,
        witness: (!valid).then(|| Witness {
            axis: *p.grid().point(worst),
            value: p.value(worst),
            closure: star.value(worst),
        }),
        max_relative_gap: gap.max(0.0),
    }
}

/// Verdict for the input field of a built reflector, reusing its closure.
pub fn reflector_verdict(r: &Reflector, tol: f64) -> ValidityVerdict {
    verdict(r.focal(), r.closure(), tol)
}

#[cfg(test)]
mod tests;

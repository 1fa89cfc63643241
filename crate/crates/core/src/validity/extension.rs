//! The positively homogeneous extension `p(Y) = sup_X |X| |Y| - <X, Y>` of
//! the focal function to all vectors, and its subadditivity.

use nalgebra::Vector3;

use crate::error::{ReflectorError, Result};
use crate::reflector::arrangement::Affine;
use crate::reflector::Reflector;

/// Value of the extension and a maximizing surface point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extension {
    pub value: f64,
    pub argmax: Vector3<f64>,
}

/// `p(Y)` over the body; the origin is the maximizer for `Y = 0`.
pub fn extend_focal(r: &Reflector, y: &Vector3<f64>) -> Extension {
    if *y == Vector3::zeros() {
        return Extension {
            value: 0.0,
            argmax: Vector3::zeros(),
        };
    }
    let (x, _) = r.maximize(&Affine::focal(y));
    let point = x.vector() * r.radius(&x);
    Extension {
        value: point.norm() * y.norm() - point.dot(y),
        argmax: point,
    }
}

/// `p(Y1) + p(Y2) - p(Y1 + Y2)`.
pub fn check_subadditivity(r: &Reflector, y1: &Vector3<f64>, y2: &Vector3<f64>) -> f64 {
    extend_focal(r, y1).value + extend_focal(r, y2).value - extend_focal(r, &(y1 + y2)).value
}

/// Both sides of the refined subadditivity inequality for
/// `Y = Σ α_i Y_i`, with `X` the maximizer for `Y`:
/// `rhs = Σ α_i p(Y_i) + |X| (|Y| - Σ α_i |Y_i|)` and `lhs = p(Y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinedCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`: at least zero for `α ≥ 0`, at most zero for `α ≤ 0`.
    pub residual: f64,
}

pub fn check_refined_inequality(
    r: &Reflector,
    terms: &[(f64, Vector3<f64>)],
) -> Result<RefinedCheck> {
    if terms.is_empty() {
        return Err(ReflectorError::InvalidInput("no terms".into()));
    }
    let nonneg = terms.iter().all(|(a, _)| *a >= 0.0);
    let nonpos = terms.iter().all(|(a, _)| *a <= 0.0);
    if !nonneg && !nonpos {
        return Err(ReflectorError::UnsupportedCase);
    }
    let y: Vector3<f64> = terms.iter().map(|(a, v)| v * *a).sum();
    let ext = extend_focal(r, &y);
    let weighted: f64 = terms.iter().map(|(a, v)| a * extend_focal(r, v).value).sum();
    let lengths: f64 = terms.iter().map(|(a, v)| a * v.norm()).sum();
    let rhs = weighted + ext.argmax.norm() * (y.norm() - lengths);
    Ok(RefinedCheck {
        lhs: ext.value,
        rhs,
        residual: rhs - ext.value,
    })
}

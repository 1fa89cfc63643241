//! Search for fields whose homogeneous extension is sublinear but which are
//! not focal functions.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{extend_focal, is_focal_function, ValidityVerdict};
use crate::error::Result;
use crate::reflector::{build_reflector, FocalField};
use crate::sphere::DirectionGrid;
use crate::suite;

/// Random pairs used by the sampled sublinearity test.
pub const SUBLINEARITY_PAIRS: usize = 10_000;

/// Accepted subadditivity defect in the sampled test.
const SUBLINEARITY_SLACK: f64 = 1e-9;

type Extension = dyn Fn(&Vector3<f64>) -> f64 + Send + Sync;

/// A field together with its extension `P(Y)`, positively homogeneous and
/// equal to the field on unit grid vectors.
pub struct Candidate {
    pub field: FocalField,
    pub extension: Box<Extension>,
}

/// A deterministic, indexable family of candidates.
pub trait FieldFamily: Sync {
    fn candidate(&self, index: usize) -> Result<Candidate>;
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, dim: u32) -> Vector3<f64> {
    let mut v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    if dim == 1 {
        v.z = 0.0;
    }
    v
}

/// Constant fields `p ≡ c`, extended by `c |Y|`.
pub struct Constants {
    pub grid: Arc<DirectionGrid>,
    pub values: Range<f64>,
    pub seed: u64,
}

impl FieldFamily for Constants {
    fn candidate(&self, index: usize) -> Result<Candidate> {
        let c = rng_for(self.seed, index).random_range(self.values.clone());
        Ok(Candidate {
            field: suite::sphere(&self.grid, c)?,
            extension: Box::new(move |y| c * y.norm()),
        })
    }
}

/// Closures of random finite families, extended through their reflectors.
pub struct ClosureOutputs {
    pub grid: Arc<DirectionGrid>,
    pub seed: u64,
}

impl FieldFamily for ClosureOutputs {
    fn candidate(&self, index: usize) -> Result<Candidate> {
        let mut rng = rng_for(self.seed, index);
        let q = suite::random_family(&self.grid, 3..=12, 0.5..3.0, &mut rng)?;
        let r = build_reflector(&q, self.grid.level(), 1e-9)?;
        Ok(Candidate {
            field: r.closure().clone(),
            extension: Box::new(move |y| extend_focal(&r, y).value),
        })
    }
}

/// `p(y) = H(-y)` for the support function `H` of a random polytope that
/// contains the origin in its interior.
pub struct PolytopeSupports {
    pub grid: Arc<DirectionGrid>,
    pub vertices: Range<usize>,
    pub seed: u64,
}

impl PolytopeSupports {
    /// Vertices of candidate `index`: a random cross-polytope around the
    /// origin plus random points.
    pub fn vertices(&self, index: usize) -> Vec<Vector3<f64>> {
        let dim = self.grid.dim();
        let mut rng = rng_for(self.seed, index);
        let axes = if dim == 1 { 2 } else { 3 };
        let mut out = Vec::new();
        for i in 0..axes {
            for sign in [1.0, -1.0] {
                let mut v = Vector3::zeros();
                v[i] = sign * rng.random_range(0.3..1.0);
                out.push(v);
            }
        }
        let extra = rng.random_range(self.vertices.clone());
        for _ in 0..extra {
            let v = gaussian(&mut rng, dim);
            out.push(v.normalize() * rng.random_range(0.5..2.0));
        }
        out
    }
}

/// `max_k <v_k, z>`.
pub fn polytope_support(vertices: &[Vector3<f64>], z: &Vector3<f64>) -> f64 {
    vertices.iter().map(|v| v.dot(z)).fold(f64::NEG_INFINITY, f64::max)
}

impl FieldFamily for PolytopeSupports {
    fn candidate(&self, index: usize) -> Result<Candidate> {
        let vertices = self.vertices(index);
        let values = self
            .grid
            .points()
            .iter()
            .map(|y| polytope_support(&vertices, &-y.vector()))
            .collect();
        Ok(Candidate {
            field: FocalField::new(self.grid.clone(), values)?,
            extension: Box::new(move |y| polytope_support(&vertices, &-y)),
        })
    }
}

/// Worst subadditivity defect `P(Y1 + Y2) - P(Y1) - P(Y2)` over seeded
/// Gaussian pairs; sublinear extensions give at most about zero.
pub fn sublinearity_violation(
    extension: &Extension,
    dim: u32,
    pairs: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let a = gaussian(&mut rng, dim);
            let b = gaussian(&mut rng, dim);
            extension(&(a + b)) - extension(&a) - extension(&b)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// A candidate that passed the sublinearity test and failed validity.
#[derive(Clone, Debug)]
pub struct SearchHit {
    pub index: usize,
    pub field: FocalField,
    pub verdict: ValidityVerdict,
    pub sublinearity_defect: f64,
}

/// Examines candidates `0..budget` of `family` and returns the one with the
/// lowest index that is sublinear (sampled) and not a focal function.
pub fn sublinear_but_invalid_search(
    family: &impl FieldFamily,
    budget: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<SearchHit>> {
    let hit = (0..budget).into_par_iter().find_map_first(|index| {
        let run = || -> Result<Option<SearchHit>> {
            let c = family.candidate(index)?;
            let defect = sublinearity_violation(
                &*c.extension,
                c.field.dim(),
                SUBLINEARITY_PAIRS,
                seed ^ index as u64,
            );
            if defect > SUBLINEARITY_SLACK {
                return Ok(None);
            }
            let verdict = is_focal_function(&c.field, tol)?;
            Ok((!verdict.valid).then_some(SearchHit {
                index,
                field: c.field,
                verdict,
                sublinearity_defect: defect,
            }))
        };
        run().transpose()
    });
    hit.transpose()
}

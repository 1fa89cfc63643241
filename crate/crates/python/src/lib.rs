//! Python bindings: grids, focal fields, reflectors, validity and the
//! directrix. Vectors cross the boundary as lists of 2 or 3 floats.

use std::sync::Arc;

use convex_reflector as core;
use core::reflector::MAP_EPS;
use core::{Direction, DirectionGrid};
use nalgebra::Vector3;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pyreflector, ReflectorError, PyException);

fn err(e: core::ReflectorError) -> PyErr {
    ReflectorError::new_err(format!("[{}] {e}", e.name()))
}

fn direction(coords: Vec<f64>) -> PyResult<Direction> {
    Direction::from_coords(&coords).map_err(err)
}

fn vector(coords: &[f64]) -> PyResult<Vector3<f64>> {
    match coords {
        [x, y] => Ok(Vector3::new(*x, *y, 0.0)),
        [x, y, z] => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(ReflectorError::new_err("a vector needs 2 or 3 coordinates")),
    }
}

fn coords(v: &Vector3<f64>, dim: u32) -> Vec<f64> {
    v.iter().take(dim as usize + 1).copied().collect()
}

/// Sample directions on the circle (dim 1) or the sphere (dim 2).
#[pyclass(name = "DirectionGrid", frozen)]
struct PyGrid(Arc<DirectionGrid>);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: u32, level: u32) -> PyResult<Self> {
        Ok(Self(Arc::new(core::make_grid(dim, level).map_err(err)?)))
    }

    #[getter]
    fn dim(&self) -> u32 {
        self.0.dim()
    }

    #[getter]
    fn level(&self) -> u32 {
        self.0.level()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.0.points().iter().map(|p| p.coords(self.0.dim())).collect()
    }

    fn faces(&self) -> Vec<[usize; 3]> {
        self.0.faces().to_vec()
    }
}

/// Focal parameters on a grid; `inf` means no paraboloid with that axis.
#[pyclass(name = "FocalField", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField(core::FocalField);

#[pymethods]
impl PyField {
    /// Field equal to `default` except at the listed `(axis, p)` entries.
    #[new]
    #[pyo3(signature = (grid, entries, default = f64::INFINITY))]
    fn new(grid: &PyGrid, entries: Vec<(Vec<f64>, f64)>, default: f64) -> PyResult<Self> {
        let entries = entries
            .into_iter()
            .map(|(a, p)| Ok((direction(a)?, p)))
            .collect::<PyResult<Vec<_>>>()?;
        core::FocalField::from_entries(grid.0.clone(), &entries, default)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_values(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        core::FocalField::new(grid.0.clone(), values).map(Self).map_err(err)
    }

    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// The focal function of this field's reflector, sampled on its grid.
    #[pyo3(signature = (level = None, tol = 1e-9))]
    fn closure(&self, level: Option<u32>, tol: f64) -> PyResult<Self> {
        let level = level.unwrap_or(self.0.grid().level());
        core::validity::closure(&self.0, level, tol).map(Self).map_err(err)
    }

    /// `{"valid", "max_relative_gap", "witness"}`.
    #[pyo3(signature = (tol = 1e-9))]
    fn check<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let v = core::validity::is_focal_function(&self.0, tol).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("valid", v.valid)?;
        out.set_item("max_relative_gap", v.max_relative_gap)?;
        match v.witness {
            Some(w) => {
                let d = PyDict::new(py);
                d.set_item("axis", w.axis.coords(self.0.dim()))?;
                d.set_item("p", w.value)?;
                d.set_item("closure", w.closure)?;
                out.set_item("witness", d)?;
            }
            None => out.set_item("witness", py.None())?,
        }
        Ok(out)
    }
}

/// A convex reflector built from a focal field.
#[pyclass(name = "Reflector", frozen)]
struct PyReflector(core::Reflector);

#[pymethods]
impl PyReflector {
    #[new]
    #[pyo3(signature = (field, level = None, tol = 1e-9))]
    fn new(py: Python<'_>, field: &PyField, level: Option<u32>, tol: f64) -> PyResult<Self> {
        let level = level.unwrap_or(field.0.grid().level());
        let f = field.0.clone();
        py.detach(|| core::Reflector::build(&f, level, tol))
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> u32 {
        self.0.dim()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.0.diameter()
    }

    #[getter]
    fn is_exact(&self) -> bool {
        self.0.is_exact()
    }

    fn radius(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.0.radius(&direction(x)?))
    }

    /// `(h(u), contact point)`.
    fn support(&self, u: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let (h, x) = self.0.support_at(&direction(u)?);
        Ok((h, coords(&x, self.0.dim())))
    }

    fn focal(&self, y: Vec<f64>) -> PyResult<f64> {
        Ok(self.0.focal_at(&direction(y)?))
    }

    fn radial_values(&self) -> Vec<f64> {
        self.0.radial().values().to_vec()
    }

    fn closure(&self) -> PyField {
        PyField(self.0.closure().clone())
    }

    /// Grid axes of the paraboloids touching the surface in direction `x`.
    #[pyo3(signature = (x, eps = MAP_EPS))]
    fn reflector_map(&self, x: Vec<f64>, eps: f64) -> PyResult<Vec<Vec<f64>>> {
        let axes = core::reflector_map(&self.0, &direction(x)?, eps);
        Ok(axes.iter().map(|y| y.coords(self.0.dim())).collect())
    }

    /// All axes supporting the surface at `x`, with the normal cone sampled.
    #[pyo3(signature = (x, eps = MAP_EPS))]
    fn supporting_axes(&self, x: Vec<f64>, eps: f64) -> PyResult<Vec<Vec<f64>>> {
        let axes = core::validity::supporting_axes(&self.0, &direction(x)?, eps);
        Ok(axes.iter().map(|y| y.coords(self.0.dim())).collect())
    }

    /// Outgoing directions of the ray from the focus through `x`.
    #[pyo3(signature = (x, eps = MAP_EPS))]
    fn trace(&self, x: Vec<f64>, eps: f64) -> PyResult<Vec<Vec<f64>>> {
        let rec = core::trace(&self.0, &direction(x)?, eps).map_err(err)?;
        Ok(rec.outgoing.iter().map(|o| o.coords(self.0.dim())).collect())
    }

    /// `x - y = Σ α_i (x - y_i)` as a list of `(α_i, y_i)`.
    #[pyo3(signature = (x, y, eps = MAP_EPS))]
    fn decompose(&self, x: Vec<f64>, y: Vec<f64>, eps: f64) -> PyResult<Vec<(f64, Vec<f64>)>> {
        let d = core::validity::find_decomposition(&self.0, &direction(x)?, &direction(y)?, eps)
            .map_err(err)?;
        Ok(d.terms.iter().map(|(a, z)| (*a, z.coords(self.0.dim()))).collect())
    }

    /// `(p(Y), argmax)` for the extension to all vectors.
    fn extend(&self, y: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let e = core::validity::extend_focal(&self.0, &vector(&y)?);
        Ok((e.value, coords(&e.argmax, self.0.dim())))
    }

    /// Directrix points `2 h(u) u` on the evaluation grid together with the
    /// agreement and identity checks.
    fn directrix<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = &self.0;
        let (d, dist) = py.detach(|| {
            let d = core::directrix_from_support(r, r.eval_grid());
            let cloud: Vec<Vector3<f64>> =
                core::directrix_map_cloud(r, MAP_EPS).into_iter().map(|m| m.point).collect();
            let dist = core::hausdorff(&cloud, d.points());
            (d, dist)
        });
        let out = PyDict::new(py);
        let dim = r.dim();
        out.set_item("points", d.points().iter().map(|z| coords(z, dim)).collect::<Vec<_>>())?;
        out.set_item("hausdorff", dist)?;
        out.set_item("tolerance", core::directrix::agreement_tolerance(r))?;
        out.set_item(
            "support_residuals",
            d.support_check().iter().map(|s| s.residual()).collect::<Vec<_>>(),
        )?;
        out.set_item("convexity_defect", d.convexity_defect())?;
        out.set_item("max_turning_angle", d.max_turning_angle())?;
        Ok(out)
    }
}

/// Mirror image of `x` in the plane with normal `u`; requires `<x, u> > 0`.
#[pyfunction]
fn reflect(x: Vec<f64>, u: Vec<f64>) -> PyResult<Vec<f64>> {
    let dim = if x.len() == 2 { 1 } else { 2 };
    let y = core::reflect(&direction(x)?, &direction(u)?).map_err(err)?;
    Ok(y.coords(dim))
}

#[pymodule]
fn pyreflector(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ReflectorError", m.py().get_type::<ReflectorError>())?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyReflector>()?;
    m.add_function(wrap_pyfunction!(reflect, m)?)?;
    Ok(())
}

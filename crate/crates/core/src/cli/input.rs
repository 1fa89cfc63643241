//! The focal-field JSON document:
//! `{"dim": 1|2, "entries": [{"axis": [..], "p": number}, ..], "default": "inf" | number}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::reflector::{FocalField, GRID_MATCH_TOL};
use crate::sphere::{Direction, DirectionGrid};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub dim: u32,
    pub entries: Vec<Entry>,
    #[serde(default)]
    pub default: Fill,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub axis: Vec<f64>,
    pub p: f64,
}

/// Value of the grid directions not listed in `entries`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Fill {
    #[default]
    Infinite,
    Value(f64),
}

impl Fill {
    fn value(self) -> f64 {
        match self {
            Fill::Infinite => f64::INFINITY,
            Fill::Value(v) => v,
        }
    }
}

impl Serialize for Fill {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Fill::Infinite => s.serialize_str("inf"),
            Fill::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Fill {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Word(String),
        }
        match Raw::deserialize(d).map_err(|_| {
            serde::de::Error::custom("expected a positive number or the string \"inf\"")
        })? {
            Raw::Number(v) => Ok(Fill::Value(v)),
            Raw::Word(w) if w == "inf" => Ok(Fill::Infinite),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "unknown default {w:?}; expected a number or \"inf\""
            ))),
        }
    }
}

/// Parses a document, reporting the JSON path, line and column of the first
/// problem.
pub fn parse(text: &str) -> Result<FieldDocument, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Schema(format!("{path}: {inner}"))
    })
}

fn field_error(path: String, message: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{path}: {message}"))
}

impl FieldDocument {
    /// Checks the document against `grid` and samples it there. Axes are
    /// normalized and must coincide with grid directions.
    pub fn to_field(&self, grid: &Arc<DirectionGrid>) -> Result<FocalField, CliError> {
        if self.dim != grid.dim() {
            return Err(field_error(
                "dim".into(),
                format!("document has dim {} but the job asks for {}", self.dim, grid.dim()),
            ));
        }
        if let Fill::Value(v) = self.default {
            if !(v > 0.0) {
                return Err(field_error("default".into(), format!("{v} is not positive")));
            }
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            let at = |field: &str| format!("entries[{i}].{field}");
            if e.axis.len() != self.dim as usize + 1 {
                return Err(field_error(
                    at("axis"),
                    format!("expected {} coordinates, found {}", self.dim + 1, e.axis.len()),
                ));
            }
            let axis = Direction::from_coords(&e.axis).map_err(|err| field_error(at("axis"), err))?;
            if grid.find(&axis, GRID_MATCH_TOL).is_none() {
                return Err(field_error(
                    at("axis"),
                    format!("not a direction of the level-{} grid", grid.level()),
                ));
            }
            if !(e.p > 0.0) {
                return Err(field_error(at("p"), format!("{} is not positive", e.p)));
            }
            entries.push((axis, e.p));
        }
        FocalField::from_entries(grid.clone(), &entries, self.default.value())
            .map_err(|err| field_error("entries".into(), err))
    }

    /// Lists every finite value of `field`; other directions are `inf`.
    pub fn from_field(field: &FocalField) -> Self {
        let dim = field.dim();
        Self {
            dim,
            entries: field
                .grid()
                .points()
                .iter()
                .zip(field.values())
                .filter(|(_, p)| p.is_finite())
                .map(|(y, p)| Entry {
                    axis: y.coords(dim),
                    p: *p,
                })
                .collect(),
            default: Fill::Infinite,
        }
    }
}

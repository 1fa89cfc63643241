//! File writers. Every float is printed with 17 significant digits and every
//! file is written to a temporary sibling first and then renamed into place.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::Vector3;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::sphere::DirectionGrid;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Pretty JSON whose floats use the fixed 17-digit exponent form.
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    write_atomic(path, &json_bytes(value))
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Coordinates of `v` in `R^(dim+1)`.
pub fn coords(v: &Vector3<f64>, dim: u32) -> Vec<String> {
    let n = dim as usize + 1;
    v.iter().take(n).map(|c| num(*c)).collect()
}

/// ASCII OBJ with one vertex per grid direction, in grid order, and the grid
/// triangles as faces.
pub fn obj(grid: &DirectionGrid, points: &[Vector3<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "v {} {} {}", num(p.x), num(p.y), num(p.z));
    }
    for [a, b, c] in grid.faces() {
        let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
    }
    out
}

/// Grid indices of the circle ordered by polar angle in `[0, 2π)`.
fn by_angle(grid: &DirectionGrid) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, d)| (i, d.vector().y.atan2(d.vector().x).rem_euclid(std::f64::consts::TAU)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    order
}

/// `angle,radius` polyline of a closed planar curve sampled on the circle.
pub fn polyline_csv(grid: &DirectionGrid, points: &[Vector3<f64>]) -> String {
    csv(
        &["angle", "radius"],
        by_angle(grid).into_iter().map(|(i, a)| vec![num(a), num(points[i].norm())]),
    )
}

/// The curve as a closed SVG polygon with the focus marked.
pub fn polyline_svg(grid: &DirectionGrid, points: &[Vector3<f64>]) -> String {
    let reach = points.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max) * 1.1;
    let size = 512.0;
    let scale = size / (2.0 * reach);
    let map = |p: &Vector3<f64>| ((p.x + reach) * scale, (reach - p.y) * scale);
    let mut path = String::new();
    for (i, _) in by_angle(grid) {
        let (x, y) = map(&points[i]);
        let _ = write!(path, "{x:.6},{y:.6} ");
    }
    let (ox, oy) = map(&Vector3::zeros());
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n\
         <circle cx=\"{ox:.6}\" cy=\"{oy:.6}\" r=\"3\" fill=\"red\"/>\n</svg>\n",
        path.trim_end()
    )
}

/// OBJ on the sphere, CSV plus SVG on the circle.
pub fn write_surface(dir: &Path, stem: &str, grid: &DirectionGrid, points: &[Vector3<f64>]) -> io::Result<Vec<String>> {
    if grid.dim() == 2 {
        let name = format!("{stem}.obj");
        write_atomic(&dir.join(&name), obj(grid, points).as_bytes())?;
        Ok(vec![name])
    } else {
        let csv_name = format!("{stem}.csv");
        let svg_name = format!("{stem}.svg");
        write_atomic(&dir.join(&csv_name), polyline_csv(grid, points).as_bytes())?;
        write_atomic(&dir.join(&svg_name), polyline_svg(grid, points).as_bytes())?;
        Ok(vec![csv_name, svg_name])
    }
}

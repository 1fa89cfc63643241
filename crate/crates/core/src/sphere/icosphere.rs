//! Icosphere construction by midpoint subdivision.
//!
//! The base icosahedron uses the vertices `(0, ±1, ±φ)` and their cyclic
//! permutations, so the coordinate axes `±e_i` are edge midpoints and appear
//! as grid points from level 1 on.

use std::collections::HashMap;

use nalgebra::Vector3;

use super::Direction;

pub(super) fn build(level: u32) -> (Vec<Direction>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw: Vec<Vector3<f64>> = [
        (0.0, 1.0, phi),
        (0.0, -1.0, phi),
        (0.0, 1.0, -phi),
        (0.0, -1.0, -phi),
        (1.0, phi, 0.0),
        (-1.0, phi, 0.0),
        (1.0, -phi, 0.0),
        (-1.0, -phi, 0.0),
        (phi, 0.0, 1.0),
        (phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z))
    .collect();

    // Edges have length 2 in these coordinates; faces are mutually adjacent triples.
    let adjacent = |a: usize, b: usize| ((raw[a] - raw[b]).norm_squared() - 4.0).abs() < 1e-9;
    let mut faces = Vec::with_capacity(20);
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if adjacent(a, b) && adjacent(b, c) && adjacent(a, c) {
                    faces.push(orient([a, b, c], &raw));
                }
            }
        }
    }

    let mut verts: Vec<Vector3<f64>> = raw.iter().map(|v| v.normalize()).collect();
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    verts.push((verts[a] + verts[b]).normalize());
                    verts.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }

    (verts.into_iter().map(Direction::from_unit).collect(), faces)
}

/// Orders a triangle counter-clockwise when seen from outside.
fn orient(f: [usize; 3], v: &[Vector3<f64>]) -> [usize; 3] {
    let n = (v[f[1]] - v[f[0]]).cross(&(v[f[2]] - v[f[0]]));
    if n.dot(&(v[f[0]] + v[f[1]] + v[f[2]])) >= 0.0 {
        f
    } else {
        [f[0], f[2], f[1]]
    }
}

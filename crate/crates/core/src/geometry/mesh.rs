use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{self, Write};

use crate::{Error, Result};

/// Deepest supported subdivision (about 5.2 million triangles).
pub const MAX_SUBDIVISIONS: u32 = 9;

/// Triangulated unit sphere S^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcoMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    /// Longest edge, in radians.
    pub edge_length_max: f64,
    pub subdivisions: u32,
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

pub(crate) fn arc(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    // atan2 form: accurate at tiny and at near-antipodal separations
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let s = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let c = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    s.atan2(c)
}

/// Area of the geodesic triangle with unit-vector corners, from
/// `tan(E/2) = |a.(b x c)| / (1 + a.b + b.c + c.a)`.
pub fn spherical_triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * triple.abs().atan2(denom)
}

/// Icosahedron subdivided `subdivisions` times; every new vertex is an
/// edge midpoint pushed out to the sphere.
pub fn icosphere(subdivisions: u32) -> Result<IcoMesh> {
    if subdivisions > MAX_SUBDIVISIONS {
        return Err(Error::SubdivisionLimit(subdivisions));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<[f64; 3]> = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3 / 2);
        let mut next = Vec::with_capacity(triangles.len() * 4);
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a as usize], vertices[b as usize]);
                vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                vertices.len() as u32 - 1
            })
        };
        for &[a, b, c] in &triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    let edge_length_max = triangles
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(p, q)| arc(&vertices[p as usize], &vertices[q as usize]))
        .fold(0.0, f64::max);
    Ok(IcoMesh { vertices, triangles, edge_length_max, subdivisions })
}

impl IcoMesh {
    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn triangle_area(&self, &[a, b, c]: &[u32; 3]) -> f64 {
        spherical_triangle_area(
            &self.vertices[a as usize],
            &self.vertices[b as usize],
            &self.vertices[c as usize],
        )
    }

    /// Writes one `v x y z` line per vertex and one `t i j k` line per
    /// triangle.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Smallest level whose longest edge is at most `max_edge` radians.
    pub fn level_for_edge(max_edge: f64) -> Result<u32> {
        // Edges shrink by a factor close to 2 per level; the icosahedron edge
        // is about 1.107 radians and the ratio stays within 1.2 of halving.
        for level in 0..=MAX_SUBDIVISIONS {
            if icosahedron_edge_bound(level) <= max_edge {
                return Ok(level);
            }
        }
        Err(Error::SubdivisionLimit(MAX_SUBDIVISIONS + 1))
    }
}

/// Longest edge of `icosphere(level)`, computed once per level.
fn icosahedron_edge_bound(level: u32) -> f64 {
    use std::sync::OnceLock;
    static EDGES: OnceLock<Vec<f64>> = OnceLock::new();
    let edges = EDGES.get_or_init(|| {
        // Deep levels are extrapolated from level 7 with the halving rate,
        // avoiding huge meshes just to read one number.
        let mut e: Vec<f64> = (0..=7).map(|l| icosphere(l).unwrap().edge_length_max).collect();
        for _ in 8..=MAX_SUBDIVISIONS {
            let last = *e.last().unwrap();
            e.push(last * 0.5 * 1.001);
        }
        e
    });
    edges[level as usize]
}

//! Nodal lines of sampled eigenfunctions on icosphere meshes.
//!
//! [`extract_nodal`] runs marching triangles on the linear interpolant of
//! the vertex values. The Leray measure is estimated either along the
//! extracted line ([`leray_estimate_line`]) or from the area of thin
//! sublevel bands ([`leray_estimate_sublevel`]).

mod experiment;
mod sublevel;

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::ensemble::HarmonicSample;
use crate::geometry::{arc, IcoMesh, SpherePoint};
use crate::{Error, Result};

pub use experiment::{monte_carlo_experiment, monte_carlo_experiment_with, ExperimentOptions, ExperimentReport};
pub use sublevel::{band_fraction, default_eps_schedule, leray_estimate_sublevel, leray_sublevel_from_values, SublevelEstimate};

/// Vertex values below this are replaced by a nearby evaluation so that
/// every sign change happens strictly inside an edge.
pub const ZERO_VALUE: f64 = 1e-13;
/// Distance along an edge at which a vanishing vertex is re-evaluated.
pub const NUDGE: f64 = 1e-7;
/// Midpoint gradients below this mark the sample as near-singular.
pub const SINGULAR_GRADIENT: f64 = 1e-9;

/// Piecewise geodesic approximation of `{f = 0}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodalSet {
    /// Segment endpoints, unit vectors in R^3.
    pub segments: Vec<[[f64; 3]; 2]>,
    /// Sum of the great-circle lengths of the segments.
    pub total_length: f64,
    /// `|grad f|` at each segment midpoint; empty when gradients were not
    /// requested.
    pub gradient_norms: Vec<f64>,
    /// The mesh is coarser than `pi / (8n)`.
    pub under_resolved: bool,
}

impl NodalSet {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segment_points(&self) -> Vec<(SpherePoint, SpherePoint)> {
        let point = |p: &[f64; 3]| SpherePoint::normalize(p.to_vec()).expect("unit vector");
        self.segments.iter().map(|[p, q]| (point(p), point(q))).collect()
    }

    /// CSV polyline segments, one row per segment.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x0,y0,z0,x1,y1,z1,grad_norm")?;
        for (i, [p, q]) in self.segments.iter().enumerate() {
            let g = self.gradient_norms.get(i).copied().unwrap_or(f64::NAN);
            writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e},{:e}", p[0], p[1], p[2], q[0], q[1], q[2], g)?;
        }
        Ok(())
    }
}

/// Largest edge for which a mesh resolves degree `n`.
pub fn resolution_limit(n: u32) -> f64 {
    PI / (8.0 * n as f64)
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

fn point(v: [f64; 3]) -> SpherePoint {
    SpherePoint::new(v.to_vec()).expect("unit vector")
}

/// Nodal set of `sample` on `mesh`, evaluating `f` at every vertex.
pub fn extract_nodal(sample: &HarmonicSample, mesh: &IcoMesh) -> NodalSet {
    let values: Vec<f64> = mesh.vertices.iter().map(|&v| sample.eval(&point(v))).collect();
    extract_from_values(sample, mesh, &values, true)
}

/// Nodal set from precomputed vertex values (see
/// [`MeshBasis`](crate::ensemble::MeshBasis)). `sample` is needed for the
/// nudge of vanishing vertices and for the midpoint gradients, which are
/// skipped when `gradients` is false.
pub fn extract_from_values(sample: &HarmonicSample, mesh: &IcoMesh, values: &[f64], gradients: bool) -> NodalSet {
    assert_eq!(values.len(), mesh.vertices.len(), "one value per vertex");
    let values = nudged(sample, mesh, values);
    let mut set = NodalSet {
        under_resolved: mesh.edge_length_max > resolution_limit(sample.basis.degree()),
        ..Default::default()
    };
    for t in &mesh.triangles {
        let positive = t.map(|v| values[v as usize] > 0.0);
        if positive[0] == positive[1] && positive[1] == positive[2] {
            continue;
        }
        let mut ends = [[0.0; 3]; 2];
        let mut k = 0;
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            if positive[e] != positive[(e + 1) % 3] {
                ends[k] = crossing(mesh, &values, a, b);
                k += 1;
            }
        }
        let len = arc(&ends[0], &ends[1]);
        set.total_length += len;
        if gradients {
            let mid = unit([ends[0][0] + ends[1][0], ends[0][1] + ends[1][1], ends[0][2] + ends[1][2]]);
            let (_, g) = sample.eval_with_gradient(&point(mid));
            set.gradient_norms.push((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
        }
        set.segments.push(ends);
    }
    set
}

/// Zero of the linear interpolant on edge `(a, b)`, projected to the
/// sphere. The edge is always walked from the smaller index, so the two
/// triangles sharing it produce the same point.
fn crossing(mesh: &IcoMesh, values: &[f64], a: u32, b: u32) -> [f64; 3] {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let (fa, fb) = (values[a as usize], values[b as usize]);
    let (pa, pb) = (mesh.vertices[a as usize], mesh.vertices[b as usize]);
    let s = fa / (fa - fb);
    unit([0, 1, 2].map(|i| pa[i] + s * (pb[i] - pa[i])))
}

fn nudged(sample: &HarmonicSample, mesh: &IcoMesh, values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    let mut fixed = vec![false; values.len()];
    for t in &mesh.triangles {
        for e in 0..3 {
            let v = t[e] as usize;
            if fixed[v] || out[v].abs() >= ZERO_VALUE {
                continue;
            }
            let (p, q) = (mesh.vertices[v], mesh.vertices[t[(e + 1) % 3] as usize]);
            let x = unit([0, 1, 2].map(|i| p[i] + NUDGE * (q[i] - p[i])));
            out[v] = sample.eval(&point(x));
            if out[v] == 0.0 {
                out[v] = f64::MIN_POSITIVE;
            }
            fixed[v] = true;
        }
    }
    out
}

/// `sum over segments of length / |grad f(midpoint)|`. An empty set has
/// Leray measure 0. Fails with [`Error::NearSingular`] when a midpoint
/// gradient is below [`SINGULAR_GRADIENT`]. Gradients are recomputed if
/// `nodal` was extracted without them.
pub fn leray_estimate_line(sample: &HarmonicSample, nodal: &NodalSet) -> Result<f64> {
    let mut total = 0.0;
    for (i, [p, q]) in nodal.segments.iter().enumerate() {
        let g = match nodal.gradient_norms.get(i) {
            Some(&g) => g,
            None => {
                let mid = unit([p[0] + q[0], p[1] + q[1], p[2] + q[2]]);
                let (_, g) = sample.eval_with_gradient(&point(mid));
                (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
            }
        };
        if !(g > SINGULAR_GRADIENT) {
            return Err(Error::NearSingular { gradient: g });
        }
        total += arc(p, q) / g;
    }
    Ok(total)
}

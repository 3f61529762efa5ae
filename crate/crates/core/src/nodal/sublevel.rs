use serde::{Deserialize, Serialize};

use crate::ensemble::HarmonicSample;
use crate::geometry::{IcoMesh, SpherePoint};
use crate::{Error, Result};

/// Relative size of an increment that is still treated as noise when
/// checking the band estimates for monotonicity.
const MONOTONE_NOISE: f64 = 1e-3;

/// Band estimates `(1/2 eps) area{|f| < eps}` and their extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelEstimate {
    pub eps: Vec<f64>,
    pub raw: Vec<f64>,
    /// Intercept of the least-squares line in `eps^2`; `None` if the raw
    /// sequence is not monotone.
    pub extrapolated: Option<f64>,
}

impl SublevelEstimate {
    /// The extrapolated value, or the estimate at the smallest `eps`.
    pub fn value(&self) -> f64 {
        self.extrapolated.unwrap_or(*self.raw.last().expect("at least three levels"))
    }
}

/// Fraction of a triangle on which the linear interpolant of the corner
/// values `f` satisfies `|f| < eps`. The fraction is affine invariant, so
/// the band is clipped in barycentric coordinates.
pub fn band_fraction(f: [f64; 3], eps: f64) -> f64 {
    let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo >= eps || hi <= -eps {
        return 0.0;
    }
    if lo > -eps && hi < eps {
        return 1.0;
    }
    let poly = vec![([0.0, 0.0], f[0]), ([1.0, 0.0], f[1]), ([0.0, 1.0], f[2])];
    let poly = clip(poly, |v| eps - v);
    let poly = clip(poly, |v| v + eps);
    let mut area = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i].0, poly[(i + 1) % poly.len()].0);
        area += p[0] * q[1] - p[1] * q[0];
    }
    area.abs()
}

/// Keeps the part of a convex polygon where `side(f) >= 0`. `side` is
/// affine in `f`, and `f` is affine on the polygon.
fn clip(poly: Vec<([f64; 2], f64)>, side: impl Fn(f64) -> f64) -> Vec<([f64; 2], f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sp, sq) = (side(p.1), side(q.1));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            let x = [p.0[0] + t * (q.0[0] - p.0[0]), p.0[1] + t * (q.0[1] - p.0[1])];
            out.push((x, p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// `{4h, 2h, h} * max|f|` with `h` the longest mesh edge.
pub fn default_eps_schedule(mesh: &IcoMesh, values: &[f64]) -> Vec<f64> {
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    [4.0, 2.0, 1.0].iter().map(|k| k * mesh.edge_length_max * sup).collect()
}

/// Sublevel estimate of the Leray measure, evaluating `f` at every vertex.
pub fn leray_estimate_sublevel(sample: &HarmonicSample, mesh: &IcoMesh, eps_list: &[f64]) -> Result<SublevelEstimate> {
    let values: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|v| sample.eval(&SpherePoint::new(v.to_vec()).expect("mesh vertex")))
        .collect();
    leray_sublevel_from_values(mesh, &values, eps_list)
}

/// For each `eps`, `(1/2 eps) sum_T |T| band_fraction(T, eps)` with `|T|`
/// the spherical triangle area, then a straight-line fit in `eps^2`
/// evaluated at 0.
pub fn leray_sublevel_from_values(mesh: &IcoMesh, values: &[f64], eps_list: &[f64]) -> Result<SublevelEstimate> {
    if eps_list.len() < 3 {
        return Err(Error::Invalid(format!("need at least three eps values, got {}", eps_list.len())));
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("eps values must be positive and strictly decreasing".into()));
    }
    let mut raw = vec![0.0; eps_list.len()];
    for t in &mesh.triangles {
        let f = t.map(|v| values[v as usize]);
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo >= eps_list[0] || hi <= -eps_list[0] {
            continue;
        }
        let area = mesh.triangle_area(t);
        for (r, &eps) in raw.iter_mut().zip(eps_list) {
            *r += area * band_fraction(f, eps);
        }
    }
    for (r, &eps) in raw.iter_mut().zip(eps_list) {
        *r /= 2.0 * eps;
    }
    let scale = raw.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let steps: Vec<f64> = raw.windows(2).map(|w| w[1] - w[0]).filter(|d| d.abs() > MONOTONE_NOISE * scale).collect();
    let monotone = steps.iter().all(|d| *d > 0.0) || steps.iter().all(|d| *d < 0.0);
    let extrapolated = monotone.then(|| {
        let x: Vec<f64> = eps_list.iter().map(|e| e * e).collect();
        let k = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / k, raw.iter().sum::<f64>() / k);
        let sxy: f64 = x.iter().zip(&raw).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        my - sxy / sxx * mx
    });
    Ok(SublevelEstimate { eps: eps_list.to_vec(), raw, extrapolated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_indexed, HarmonicBasis, MeshBasis};
    use crate::geometry::icosphere;
    use crate::nodal::{extract_from_values, leray_estimate_line};
    use std::sync::Arc;

    #[test]
    fn single_triangle_bands() {
        // f = 2 (l1 + l2) - 1: the band is the trapezoid between two
        // parallels to the hypotenuse, of area fraction eps
        for eps in [0.05, 0.3, 0.9] {
            assert!((band_fraction([-1.0, 1.0, 1.0], eps) - eps).abs() < 1e-12);
        }
        // f = l1: a strip along one side, fraction 1 - (1 - eps)^2
        for eps in [0.1, 0.5] {
            let want = 1.0 - (1.0 - eps) * (1.0 - eps);
            assert!((band_fraction([0.0, 1.0, 0.0], eps) - want).abs() < 1e-12);
        }
        assert_eq!(band_fraction([2.0, 3.0, 4.0], 1.0), 0.0);
        assert_eq!(band_fraction([0.1, -0.2, 0.3], 1.0), 1.0);
        // split band across a sign change, by symmetry half of each side
        let a = band_fraction([-1.0, 1.0, 0.0], 0.25);
        let b = band_fraction([1.0, -1.0, 0.0], 0.25);
        assert!((a - b).abs() < 1e-15 && a > 0.0);
    }

    #[test]
    fn rejects_bad_schedules() {
        let mesh = icosphere(1).unwrap();
        let v = vec![1.0; mesh.vertices.len()];
        assert!(leray_sublevel_from_values(&mesh, &v, &[0.2, 0.1]).is_err());
        assert!(leray_sublevel_from_values(&mesh, &v, &[0.1, 0.2, 0.05]).is_err());
        assert!(leray_sublevel_from_values(&mesh, &v, &[0.3, 0.2, 0.0]).is_err());
    }

    #[test]
    fn homogeneous_in_scale() {
        let mesh = icosphere(4).unwrap();
        let basis = Arc::new(HarmonicBasis::new(8));
        let f = sample_indexed(&basis, 2, 0);
        let b = 0.37;
        let eps = [0.2, 0.1, 0.05];
        let e = leray_estimate_sublevel(&f, &mesh, &eps).unwrap();
        let eps_b = eps.map(|x| x * b);
        let eb = leray_estimate_sublevel(&f.scaled(b), &mesh, &eps_b).unwrap();
        for (x, y) in e.raw.iter().zip(&eb.raw) {
            assert!((y - x / b).abs() < 1e-10 * y);
        }
        assert!((eb.value() - e.value() / b).abs() < 1e-9 * eb.value());
    }

    #[test]
    fn agrees_with_the_line_estimate() {
        let mesh = icosphere(5).unwrap();
        let basis = Arc::new(HarmonicBasis::new(20));
        let mb = MeshBasis::new(&basis, &mesh);
        let (mut line, mut band) = (0.0, 0.0);
        for i in 0..20 {
            let f = sample_indexed(&basis, 4, i);
            let values = mb.vertex_values(&f);
            let set = extract_from_values(&f, &mesh, &values, true);
            let l = leray_estimate_line(&f, &set).unwrap();
            let s = leray_sublevel_from_values(&mesh, &values, &default_eps_schedule(&mesh, &values)).unwrap();
            line += l;
            band += s.value();
        }
        assert!((band / line - 1.0).abs() < 0.02, "{band} {line}");
    }
}

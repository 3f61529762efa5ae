//! Sphere geometry: volumes, the measure `mu`, geodesic distance,
//! parallel-transport frames and the icosphere mesh.

mod frame;
mod mesh;

pub use frame::{aligned_frames, north_frame, transport_frame, TangentFrame, SOUTH_POLE_CAP};
pub use mesh::{icosphere, spherical_triangle_area, IcoMesh, MAX_SUBDIVISIONS};
pub(crate) use mesh::arc;

use serde::{Deserialize, Serialize};

use crate::quadrature::mu_prefactor;
use crate::specfun::gamma_half;
use crate::{Error, Result};

/// `|S^m| = 2 pi^((m+1)/2) / Gamma((m+1)/2)`.
pub fn sphere_volume(m: u32) -> f64 {
    assert!(m >= 1, "sphere_volume needs m >= 1");
    2.0 * std::f64::consts::PI.powf((m as f64 + 1.0) / 2.0) / gamma_half(m + 1)
}

/// Density of `mu`, the pushforward of the volume of `S^m` under
/// `x -> <x, N>`: `2 pi^(m/2) / Gamma(m/2) (1-t^2)^((m-2)/2)`.
pub fn mu_density(m: u32, t: f64) -> Result<f64> {
    if !t.is_finite() || t.abs() > 1.0 {
        return Err(Error::Domain { what: "t", value: t });
    }
    let w = 1.0 - t * t;
    let power = if m == 2 { 1.0 } else { w.powf((m as f64 - 2.0) / 2.0) };
    Ok(mu_prefactor(m) * power)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of `S^m` stored by its `m+1` ambient coordinates. The north
/// pole is the last basis vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Accepts coordinates of norm 1 within `1e-12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if coords.len() < 3 || (r - 1.0).abs() > 1e-12 {
            return Err(Error::Domain { what: "point norm", value: r });
        }
        Ok(Self { coords })
    }

    /// Normalizes a non-zero ambient vector.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if coords.len() < 3 || !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain { what: "point norm", value: r });
        }
        coords.iter_mut().for_each(|c| *c /= r);
        Ok(Self { coords })
    }

    pub fn north(m: u32) -> Self {
        let mut coords = vec![0.0; m as usize + 1];
        coords[m as usize] = 1.0;
        Self { coords }
    }

    pub fn south(m: u32) -> Self {
        let mut p = Self::north(m);
        p.coords[m as usize] = -1.0;
        p
    }

    /// S^2 point from the polar angle `theta` (from N) and longitude `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { coords: vec![s * phi.cos(), s * phi.sin(), c] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Dimension `m` of the sphere the point lives on.
    pub fn dim(&self) -> u32 {
        self.coords.len() as u32 - 1
    }

    pub fn antipode(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| -c).collect() }
    }
}

/// `arccos <x, y>` with the inner product clamped to `[-1, 1]`.
pub fn geodesic_distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    dot(&x.coords, &y.coords).clamp(-1.0, 1.0).acos()
}

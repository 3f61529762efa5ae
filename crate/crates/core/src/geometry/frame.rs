use serde::{Deserialize, Serialize};

use super::{dot, norm, SpherePoint};
use crate::{Error, Result};

/// Radius of the cap around the south pole where transport from N is
/// undefined.
pub const SOUTH_POLE_CAP: f64 = 1e-9;

/// Orthonormal basis of the tangent space at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    pub base: SpherePoint,
    pub vectors: Vec<Vec<f64>>,
}

impl TangentFrame {
    /// Checks orthonormality and tangency to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = self.base.dim() as usize;
        if self.vectors.len() != m {
            return Err(Error::Invalid(format!("frame has {} vectors, expected {m}", self.vectors.len())));
        }
        for (i, v) in self.vectors.iter().enumerate() {
            if dot(v, self.base.coords()).abs() > tol {
                return Err(Error::Invalid(format!("frame vector {i} is not tangent")));
            }
            for (j, w) in self.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(v, w) - want).abs() > tol {
                    return Err(Error::Invalid(format!("frame Gram entry ({i}, {j}) off")));
                }
            }
        }
        Ok(())
    }

    /// Coordinates of a tangent (or ambient) vector in this frame.
    pub fn coordinates(&self, v: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|e| dot(e, v)).collect()
    }

    /// Ambient vector with the given frame coordinates.
    pub fn ambient(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.base.coords().len()];
        for (c, e) in coords.iter().zip(&self.vectors) {
            for (o, x) in out.iter_mut().zip(e) {
                *o += c * x;
            }
        }
        out
    }
}

/// The standard frame at N: the first `m` ambient basis vectors.
pub fn north_frame(m: u32) -> TangentFrame {
    let m = m as usize;
    let vectors = (0..m)
        .map(|i| {
            let mut v = vec![0.0; m + 1];
            v[i] = 1.0;
            v
        })
        .collect();
    TangentFrame { base: SpherePoint::north(m as u32), vectors }
}

/// Parallel transport along the geodesic from N to `x`. The transport is
/// the rotation in the plane of N and `x`; on a vector `v` orthogonal to N it
/// acts as `v - <x, v>/(1 + <N, x>) (N + x)`.
pub fn transport_frame(x: &SpherePoint, reference: &TangentFrame) -> Result<TangentFrame> {
    let m = x.dim();
    if reference.base != SpherePoint::north(m) {
        return Err(Error::Invalid("reference frame must sit at the north pole".into()));
    }
    let c = x.coords()[m as usize];
    // chordal form of the distance to S, accurate near S
    let south = SpherePoint::south(m);
    let chord: Vec<f64> = x.coords().iter().zip(south.coords()).map(|(a, b)| a - b).collect();
    if 2.0 * (0.5 * norm(&chord)).asin() <= SOUTH_POLE_CAP {
        return Err(Error::SouthPole);
    }
    let north = SpherePoint::north(m);
    let vectors = reference
        .vectors
        .iter()
        .map(|v| {
            let k = dot(x.coords(), v) / (1.0 + c);
            v.iter()
                .zip(north.coords().iter().zip(x.coords()))
                .map(|(vi, (ni, xi))| vi - k * (ni + xi))
                .collect()
        })
        .collect();
    Ok(TangentFrame { base: x.clone(), vectors })
}

/// Frames at `x` and `y` whose first vectors are the geodesic tangents: at
/// `x` pointing towards `y`, at `y` pointing away from `x` (the transport of
/// the first). The remaining vectors span the common orthogonal complement
/// of `x` and `y`, which transport leaves fixed. In these coordinates
/// `grad_x d(x, y) = (-1, 0, ...)` and `grad_y d(x, y) = (1, 0, ...)`.
pub fn aligned_frames(x: &SpherePoint, y: &SpherePoint) -> Result<(TangentFrame, TangentFrame)> {
    if x.dim() != y.dim() {
        return Err(Error::Invalid("points on spheres of different dimension".into()));
    }
    let c = dot(x.coords(), y.coords()).clamp(-1.0, 1.0);
    let s = (1.0 - c * c).sqrt();
    if s < 1e-12 {
        return Err(Error::CoincidentPoints);
    }
    let (xs, ys) = (x.coords(), y.coords());
    let ex: Vec<f64> = ys.iter().zip(xs).map(|(b, a)| (b - c * a) / s).collect();
    let ey: Vec<f64> = ys.iter().zip(xs).map(|(b, a)| (c * b - a) / s).collect();
    // orthonormal complement of span(x, ex) by Gram-Schmidt on the standard basis
    let dim = xs.len();
    let mut basis: Vec<Vec<f64>> = vec![xs.to_vec(), ex.clone()];
    let mut transversal = Vec::with_capacity(dim - 2);
    for k in 0..dim {
        if transversal.len() == dim - 2 {
            break;
        }
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
            }
        }
        let r = norm(&v);
        if r > 1e-6 {
            v.iter_mut().for_each(|vi| *vi /= r);
            basis.push(v.clone());
            transversal.push(v);
        }
    }
    let mut fx = vec![ex];
    fx.extend(transversal.iter().cloned());
    let mut fy = vec![ey];
    fy.extend(transversal);
    Ok((
        TangentFrame { base: x.clone(), vectors: fx },
        TangentFrame { base: y.clone(), vectors: fy },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geodesic_distance;
    use crate::rng::{stream, Domain};
    use rand_distr::{Distribution, StandardNormal};

    fn random_point(m: u32, rng: &mut impl rand::Rng) -> SpherePoint {
        let v: Vec<f64> = (0..=m).map(|_| StandardNormal.sample(rng)).collect();
        SpherePoint::normalize(v).unwrap()
    }

    /// Moves `p` a distance `h` along the unit tangent `v`.
    fn exp_map(p: &SpherePoint, v: &[f64], h: f64) -> SpherePoint {
        let (s, c) = h.sin_cos();
        SpherePoint::normalize(p.coords().iter().zip(v).map(|(a, b)| c * a + s * b).collect()).unwrap()
    }

    #[test]
    fn zero_length_transport() {
        for m in 2..5 {
            let b = north_frame(m);
            let t = transport_frame(&SpherePoint::north(m), &b).unwrap();
            assert_eq!(t, b);
        }
    }

    #[test]
    fn transported_frames_are_orthonormal() {
        let mut rng = stream(2, Domain::Test, 0);
        for m in 2..6 {
            for _ in 0..50 {
                let x = random_point(m, &mut rng);
                let f = transport_frame(&x, &north_frame(m)).unwrap();
                f.validate(1e-10).unwrap();
            }
        }
    }

    #[test]
    fn equator_transport_is_a_quarter_rotation() {
        // Rodrigues rotation by pi/2 about the axis N x x.
        for phi in [0.0, 0.7, 2.5, -1.9] {
            let x = SpherePoint::from_angles(std::f64::consts::FRAC_PI_2, phi);
            let f = transport_frame(&x, &north_frame(2)).unwrap();
            let n = [0.0, 0.0, 1.0];
            let xs = x.coords();
            let k = [
                n[1] * xs[2] - n[2] * xs[1],
                n[2] * xs[0] - n[0] * xs[2],
                n[0] * xs[1] - n[1] * xs[0],
            ];
            for (idx, e) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]].iter().enumerate() {
                // angle pi/2: R v = k x v + k (k . v)
                let kv = k[0] * e[0] + k[1] * e[1] + k[2] * e[2];
                let cross = [
                    k[1] * e[2] - k[2] * e[1],
                    k[2] * e[0] - k[0] * e[2],
                    k[0] * e[1] - k[1] * e[0],
                ];
                for j in 0..3 {
                    let want = cross[j] + k[j] * kv;
                    assert!((f.vectors[idx][j] - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn south_pole_is_rejected() {
        let s = SpherePoint::south(2);
        assert_eq!(transport_frame(&s, &north_frame(2)), Err(Error::SouthPole));
        let near = SpherePoint::from_angles(std::f64::consts::PI - 1e-6, 0.0);
        assert!(transport_frame(&near, &north_frame(2)).is_ok());
    }

    #[test]
    fn transport_is_smooth() {
        let mut rng = stream(3, Domain::Test, 0);
        let h = 1e-4;
        for _ in 0..50 {
            let x = random_point(2, &mut rng);
            if x.coords()[2] < -0.99 {
                continue;
            }
            let f = transport_frame(&x, &north_frame(2)).unwrap();
            let x2 = exp_map(&x, &f.vectors[0], h);
            let f2 = transport_frame(&x2, &north_frame(2)).unwrap();
            for (a, b) in f.vectors.iter().zip(&f2.vectors) {
                let d: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
                assert!(norm(&d) <= 10.0 * h);
            }
        }
    }

    #[test]
    fn aligned_gradients_are_opposite() {
        let mut rng = stream(4, Domain::Test, 0);
        for m in 2..5 {
            for _ in 0..30 {
                let x = random_point(m, &mut rng);
                let y = random_point(m, &mut rng);
                let (fx, fy) = aligned_frames(&x, &y).unwrap();
                fx.validate(1e-10).unwrap();
                fy.validate(1e-10).unwrap();
                let h = 1e-6;
                let d0 = geodesic_distance(&x, &y);
                let gx: Vec<f64> = fx
                    .vectors
                    .iter()
                    .map(|e| (geodesic_distance(&exp_map(&x, e, h), &y) - geodesic_distance(&exp_map(&x, e, -h), &y)) / (2.0 * h))
                    .collect();
                let gy: Vec<f64> = fy
                    .vectors
                    .iter()
                    .map(|e| (geodesic_distance(&x, &exp_map(&y, e, h)) - geodesic_distance(&x, &exp_map(&y, e, -h))) / (2.0 * h))
                    .collect();
                assert!(d0 > 0.0);
                assert!((gx[0] + 1.0).abs() < 1e-6, "{gx:?}");
                for k in 1..m as usize {
                    assert!(gx[k].abs() < 1e-6);
                }
                for k in 0..m as usize {
                    assert!((gx[k] + gy[k]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn swapping_points_flips_first_vectors() {
        let x = SpherePoint::from_angles(0.4, 0.2);
        let y = SpherePoint::from_angles(1.9, -2.0);
        let (fx, fy) = aligned_frames(&x, &y).unwrap();
        let (gy, gx) = aligned_frames(&y, &x).unwrap();
        for j in 0..3 {
            assert!((fx.vectors[0][j] + gx.vectors[0][j]).abs() < 1e-12);
            assert!((fy.vectors[0][j] + gy.vectors[0][j]).abs() < 1e-12);
        }
    }

    #[test]
    fn coincident_points_rejected() {
        let x = SpherePoint::from_angles(0.4, 0.2);
        assert_eq!(aligned_frames(&x, &x).unwrap_err(), Error::CoincidentPoints);
        assert_eq!(aligned_frames(&x, &x.antipode()).unwrap_err(), Error::CoincidentPoints);
    }
}

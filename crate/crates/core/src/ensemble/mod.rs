//! Random eigenfunctions: the real spherical-harmonic expansion on `S^2`,
//! and a dense Gaussian sampler from the two-point function for any `m`.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use crate::geometry::{north_frame, transport_frame, IcoMesh, SpherePoint};
use crate::linalg::{cholesky, Matrix};
use crate::rng::{stream, Domain};
use crate::specfun::{q_normalized, SphereModel};
use crate::{Error, Result};

/// Gradients in the transported frame are refused this close to the south
/// pole, where the frame is undefined.
pub const GRADIENT_SOUTH_CAP: f64 = 1e-6;

/// Largest point set accepted by [`sample_gaussian_field`].
pub const MAX_FIELD_POINTS: usize = 4000;

/// Jitter of the dense covariance factorization, relative to the diagonal.
pub const FIELD_JITTER: f64 = 1e-10;

/// Rescaling step that keeps `sin^k theta` out of the subnormal range.
const RESCALE: f64 = 1e-250;

/// Real orthonormal spherical harmonics of degree `n` on `S^2`, indexed
/// `k + n` for `k = -n..=n`:
/// `Y_0 = P_0`, `Y_k = sqrt(2) P_k cos(k phi)`, `Y_-k = sqrt(2) P_k sin(k phi)`,
/// with `P_k` the associated Legendre functions normalized so that
/// `2 pi int P_k^2 dt = 1` (no Condon-Shortley phase).
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    n: u32,
    /// `P_k^k / sin^k theta`.
    diagonal: Vec<f64>,
    /// `a_lk = sqrt((4l^2 - 1) / (l^2 - k^2))`, row `k`, entry `l - k`.
    recurrence: Vec<Vec<f64>>,
}

impl HarmonicBasis {
    pub fn new(n: u32) -> Self {
        let mut diagonal = Vec::with_capacity(n as usize + 1);
        let mut d = 1.0 / (4.0 * PI).sqrt();
        diagonal.push(d);
        for k in 1..=n {
            let k = k as f64;
            d *= ((2.0 * k + 1.0) / (2.0 * k)).sqrt();
            diagonal.push(d);
        }
        let recurrence = (0..=n)
            .map(|k| {
                (k..=n)
                    .map(|l| {
                        if l == k {
                            0.0
                        } else {
                            let (l, k) = (l as f64, k as f64);
                            ((4.0 * l * l - 1.0) / (l * l - k * k)).sqrt()
                        }
                    })
                    .collect()
            })
            .collect();
        Self { n, diagonal, recurrence }
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// `N = 2n + 1`.
    pub fn size(&self) -> usize {
        2 * self.n as usize + 1
    }

    /// `P_n^k(cos theta)` and, for `k >= 1`, `P_n^k / sin theta`, both
    /// regular at the poles. Column `k` is run from `P_k^k / sin theta`
    /// (a multiple of `sin^(k-1)`), so the division by `sin theta` is never
    /// carried out.
    fn legendre(&self, t: f64, s: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as usize;
        let mut p = vec![0.0; n + 1];
        let mut p_over_s = vec![0.0; n + 1];
        // s^(k-1) as mantissa and count of RESCALE factors
        let mut power = 1.0;
        let mut shifts = 0i32;
        for k in 0..=n {
            let start = if k == 0 {
                self.diagonal[0]
            } else {
                if k >= 2 {
                    power *= s;
                    if power != 0.0 && power < RESCALE {
                        power /= RESCALE;
                        shifts += 1;
                    }
                }
                self.diagonal[k] * power
            };
            let a = &self.recurrence[k];
            let mut prev = start;
            let mut cur = if n > k { (2.0 * k as f64 + 3.0).sqrt() * t * start } else { start };
            if n > k + 1 {
                for l in k + 2..=n {
                    let next = a[l - k] * (t * cur - prev / a[l - k - 1]);
                    prev = cur;
                    cur = next;
                }
            }
            // cur now holds column k at l = n
            let value = if n == k { start } else { cur };
            let unscaled = value * RESCALE.powi(shifts);
            if k == 0 {
                p[0] = unscaled;
            } else {
                p_over_s[k] = unscaled;
                p[k] = unscaled * s;
            }
        }
        (p, p_over_s)
    }

    /// Values of all `N` basis functions at `x`.
    pub fn eval_basis(&self, x: &SpherePoint) -> Vec<f64> {
        let (t, s, phi) = polar(x);
        let (p, _) = self.legendre(t, s);
        let n = self.n as usize;
        let mut out = vec![0.0; self.size()];
        out[n] = p[0];
        for k in 1..=n {
            let (sk, ck) = (k as f64 * phi).sin_cos();
            out[n + k] = 2f64.sqrt() * p[k] * ck;
            out[n - k] = 2f64.sqrt() * p[k] * sk;
        }
        out
    }

    /// Values and ambient gradients (tangent vectors in `R^3`) of all basis
    /// functions at `x`.
    pub fn eval_basis_with_gradient(&self, x: &SpherePoint) -> (Vec<f64>, Vec<[f64; 3]>) {
        let (t, s, phi) = polar(x);
        let (p, p_over_s) = self.legendre(t, s);
        let n = self.n as usize;
        let nf = n as f64;
        let (sp, cp) = phi.sin_cos();
        let e_theta = [t * cp, t * sp, -s];
        let e_phi = [-sp, cp, 0.0];
        let combine = |g_theta: f64, g_phi: f64| {
            [
                g_theta * e_theta[0] + g_phi * e_phi[0],
                g_theta * e_theta[1] + g_phi * e_phi[1],
                g_theta * e_theta[2] + g_phi * e_phi[2],
            ]
        };
        let get = |k: usize| if k <= n { p[k] } else { 0.0 };
        // d/dtheta of P_n^k
        let dp = |k: usize| {
            if k == 0 {
                -(nf * (nf + 1.0)).sqrt() * get(1)
            } else {
                let kf = k as f64;
                0.5 * (((nf + kf) * (nf - kf + 1.0)).sqrt() * get(k - 1)
                    - ((nf - kf) * (nf + kf + 1.0)).max(0.0).sqrt() * get(k + 1))
            }
        };
        let mut values = vec![0.0; self.size()];
        let mut grads = vec![[0.0; 3]; self.size()];
        values[n] = p[0];
        grads[n] = combine(dp(0), 0.0);
        let r2 = 2f64.sqrt();
        for k in 1..=n {
            let kf = k as f64;
            let (sk, ck) = (kf * phi).sin_cos();
            let d = dp(k);
            values[n + k] = r2 * p[k] * ck;
            values[n - k] = r2 * p[k] * sk;
            grads[n + k] = combine(r2 * d * ck, -r2 * kf * p_over_s[k] * sk);
            grads[n - k] = combine(r2 * d * sk, r2 * kf * p_over_s[k] * ck);
        }
        (values, grads)
    }
}

/// `(cos theta, sin theta, phi)` of an `S^2` point, with `sin theta` taken
/// from the equatorial radius so that it stays accurate near the poles.
fn polar(x: &SpherePoint) -> (f64, f64, f64) {
    let c = x.coords();
    let s = c[0].hypot(c[1]);
    (c[2], s, c[1].atan2(c[0]))
}

/// `f = scale * sum a_k Y_k`.
#[derive(Debug, Clone)]
pub struct HarmonicSample {
    pub basis: Arc<HarmonicBasis>,
    pub coefficients: Vec<f64>,
    pub scale: f64,
}

/// The random eigenfunction for `seed`: i.i.d. standard normal
/// coefficients and scale `sqrt(|S^2| / N)`, so that `E f(x)^2 = 1`.
pub fn sample_function(basis: &Arc<HarmonicBasis>, seed: u64) -> HarmonicSample {
    sample_indexed(basis, seed, 0)
}

/// Sample number `index` of the sequence for `seed`. Each sample has its
/// own stream, and its coefficients are drawn from it in index order.
pub fn sample_indexed(basis: &Arc<HarmonicBasis>, seed: u64, index: u64) -> HarmonicSample {
    let mut rng = stream(seed, Domain::HarmonicSample, index);
    let coefficients = (0..basis.size()).map(|_| rng.sample(StandardNormal)).collect();
    HarmonicSample {
        basis: Arc::clone(basis),
        coefficients,
        scale: (4.0 * PI / basis.size() as f64).sqrt(),
    }
}

impl HarmonicSample {
    /// A fixed combination `scale * sum a_k Y_k`.
    pub fn from_coefficients(basis: &Arc<HarmonicBasis>, coefficients: Vec<f64>, scale: f64) -> Result<Self> {
        if coefficients.len() != basis.size() {
            return Err(Error::Invalid(format!(
                "{} coefficients for a basis of size {}",
                coefficients.len(),
                basis.size()
            )));
        }
        Ok(Self { basis: Arc::clone(basis), coefficients, scale })
    }

    /// `b f`.
    pub fn scaled(&self, b: f64) -> Self {
        Self { scale: self.scale * b, ..self.clone() }
    }

    /// `x -> f(-x)`.
    pub fn reflected(&self) -> Self {
        // Y_k(-x) = (-1)^n Y_k(x) for every k of degree n
        let sign = if self.basis.degree() % 2 == 0 { 1.0 } else { -1.0 };
        self.scaled(sign)
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        self.combine(&self.basis.eval_basis(x))
    }

    fn combine(&self, values: &[f64]) -> f64 {
        self.scale * values.iter().zip(&self.coefficients).map(|(y, a)| y * a).sum::<f64>()
    }

    /// `f(x)` and the ambient gradient (tangent to the sphere at `x`).
    /// Defined everywhere, including both poles.
    pub fn eval_with_gradient(&self, x: &SpherePoint) -> (f64, [f64; 3]) {
        let (values, grads) = self.basis.eval_basis_with_gradient(x);
        let mut g = [0.0; 3];
        for (gk, a) in grads.iter().zip(&self.coefficients) {
            for i in 0..3 {
                g[i] += a * gk[i];
            }
        }
        (self.combine(&values), g.map(|v| v * self.scale))
    }

    /// Gradient coordinates in the frame transported from the north pole.
    pub fn eval_gradient(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        let c = x.coords();
        // distance to S via the chord
        let chord = (c[0] * c[0] + c[1] * c[1] + (c[2] + 1.0).powi(2)).sqrt();
        if 2.0 * (0.5 * chord).asin() <= GRADIENT_SOUTH_CAP {
            return Err(Error::SouthPole);
        }
        let frame = transport_frame(x, &north_frame(2))?;
        let (_, g) = self.eval_with_gradient(x);
        Ok(frame.coordinates(&g))
    }
}

/// Basis values at every vertex of a mesh, computed once and reused for
/// all samples.
#[derive(Debug, Clone)]
pub struct MeshBasis {
    pub basis: Arc<HarmonicBasis>,
    /// Row-major, `vertices x N`.
    values: Vec<f64>,
    vertices: usize,
}

impl MeshBasis {
    pub fn new(basis: &Arc<HarmonicBasis>, mesh: &IcoMesh) -> Self {
        let size = basis.size();
        let eval = |v: &[f64; 3]| basis.eval_basis(&SpherePoint::normalize(v.to_vec()).expect("mesh vertex"));
        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<f64>> = {
            use rayon::prelude::*;
            mesh.vertices.par_iter().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<f64>> = mesh.vertices.iter().map(eval).collect();
        let mut values = Vec::with_capacity(rows.len() * size);
        rows.iter().for_each(|r| values.extend_from_slice(r));
        Self { basis: Arc::clone(basis), values, vertices: mesh.vertices.len() }
    }

    /// `f` at every vertex.
    pub fn vertex_values(&self, sample: &HarmonicSample) -> Vec<f64> {
        let size = self.basis.size();
        (0..self.vertices)
            .map(|v| sample.combine(&self.values[v * size..(v + 1) * size]))
            .collect()
    }
}

/// CSV of `(vertex index, f value)`.
pub fn write_vertex_values<W: Write>(values: &[f64], mut out: W) -> io::Result<()> {
    writeln!(out, "vertex,f")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:e}")?;
    }
    Ok(())
}

/// Dense Gaussian sampler with covariance `Q(<x_i, x_j>)` on a fixed point
/// set, for any `m`.
#[derive(Debug, Clone)]
pub struct GaussianField {
    factor: Matrix,
}

impl GaussianField {
    pub fn new(model: SphereModel, points: &[SpherePoint]) -> Result<Self> {
        if points.len() > MAX_FIELD_POINTS {
            return Err(Error::TooManyPoints(points.len()));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != model.m()) {
            return Err(Error::Invalid(format!("point on S^{} for a model on S^{}", p.dim(), model.m())));
        }
        let cov = Matrix::from_fn(points.len(), |i, j| {
            let c: f64 = points[i].coords().iter().zip(points[j].coords()).map(|(a, b)| a * b).sum();
            q_normalized(model.m(), model.n(), c.clamp(-1.0, 1.0))
        });
        Ok(Self { factor: cholesky(&cov, FIELD_JITTER)? })
    }

    /// Draw number `index` for `seed`.
    pub fn draw(&self, seed: u64, index: u64) -> Vec<f64> {
        let mut rng = stream(seed, Domain::GaussianField, index);
        let z: Vec<f64> = (0..self.factor.size()).map(|_| rng.sample(StandardNormal)).collect();
        self.factor.mul_vec(&z)
    }
}

/// One joint draw of the field at `points`.
pub fn sample_gaussian_field(model: SphereModel, points: &[SpherePoint], seed: u64) -> Result<Vec<f64>> {
    Ok(GaussianField::new(model, points)?.draw(seed, 0))
}

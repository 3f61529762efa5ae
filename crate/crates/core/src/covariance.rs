//! Covariance structure of `(f(x), f(y), grad f(x), grad f(y))` for the
//! random eigenfunction `f`, written in the geodesic-aligned frames of
//! [`aligned_frames`](crate::geometry::aligned_frames).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::linalg::{Matrix, SymmetricEigen};
use crate::geometry::{aligned_frames, SpherePoint};
use crate::specfun::{gegenbauer_eval, q_normalized, SphereModel};
use crate::{Error, Result};

/// Relative threshold (times `E/m`) below which the reduced covariance is
/// called degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-7;

/// The four scalars that fix the covariance at separation `theta`:
/// `u = Q(cos theta)`, the single non-zero coordinate of
/// `D = grad_x u(x, y)` and the longitudinal and transverse diagonal
/// entries of `H = grad_x grad_y u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceBlocks {
    pub model: SphereModel,
    pub theta: f64,
    pub u: f64,
    pub d_long: f64,
    pub h_long: f64,
    pub h_trans: f64,
    /// `E/m`, the variance of each gradient coordinate.
    pub scale: f64,
    /// `1 - u^2`.
    pub one_minus_u2: f64,
    /// Diagonal and cross entry of the longitudinal part of the reduced
    /// covariance `Omega`.
    pub omega_long: [f64; 2],
}

/// Blocks at geodesic separation `theta` in `(0, pi)`.
///
/// With `t = cos theta`, `H_ab = Q''(t) <a, y><x, b> + Q'(t) <a, b>`; in the
/// aligned frames `<e1x, y> = sin theta`, `<x, e1y> = -sin theta` and
/// `<e1x, e1y> = t`, which gives `h_long = -(1-t^2) Q'' + t Q'` and
/// `h_trans = Q'`.
pub fn blocks_at(model: SphereModel, theta: f64) -> Result<CovarianceBlocks> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let t = theta.cos();
    let s = theta.sin();
    let p = gegenbauer_eval(model, t)?;
    let mut blocks = CovarianceBlocks::from_scalars(
        model,
        theta,
        p.q,
        p.dq * s,
        -(s * s) * p.d2q + t * p.dq,
        p.dq,
    );
    let near = theta.min(PI - theta);
    let x = (0.5 * near).sin().powi(2);
    if model.eigenvalue() * x <= POLE_SERIES_RANGE {
        let (g, a_plus, a_minus) = pole_series(model, x);
        let (a_plus, a_minus) =
            if theta > PI / 2.0 && model.n() % 2 == 1 { (a_minus, a_plus) } else { (a_plus, a_minus) };
        blocks.one_minus_u2 = g * (2.0 - g);
        blocks.omega_long = [0.5 * (a_plus + a_minus), 0.5 * (a_plus - a_minus)];
    }
    Ok(blocks)
}

/// Range of `E sin^2(theta/2)` (distance to the nearer pole) where the
/// longitudinal block of `Omega` is taken from [`pole_series`].
const POLE_SERIES_RANGE: f64 = 0.5;

/// Longitudinal reduced covariance near a pole.
///
/// Along the geodesic the field is a stationary process `g` with
/// covariance `r(phi) = Q(cos phi)`. Given `g(0) = g(phi) = 0`, the sum
/// `g'(0) + g'(phi)` and the difference `g'(0) - g'(phi)` are independent,
/// with conditional variances `2 A+` and `2 A-`:
/// `A+ = lambda - r'' - r'^2/(1 - r)` and `A- = lambda + r'' - r'^2/(1 + r)`,
/// `lambda = E/m`. Near `phi = 0`, `A+` is a difference of terms of size
/// `lambda` that vanishes like `phi^4`. Both are evaluated here as
/// polynomials in `x = sin^2(phi/2)` from the hypergeometric coefficients
/// of `Q`. The numerator of `A+` is known to start at `x^3`, so its
/// vanishing lower coefficients are dropped rather than summed.
///
/// Returns `(1 - r, A+, A-)`.
fn pole_series(model: SphereModel, x: f64) -> (f64, f64, f64) {
    let (m, n) = (model.m() as f64, model.n() as usize);
    let len = (2 * n + 4).min(48);
    let mut f = vec![0.0; len + 3];
    f[0] = 1.0;
    for k in 1..=n.min(len + 2) {
        let kf = k as f64;
        f[k] = f[k - 1] * (kf - 1.0 - n as f64) * (n as f64 + m + kf - 2.0) / ((0.5 * m + kf - 1.0) * kf);
    }
    let get = |v: &[f64], j: isize| if j >= 0 && (j as usize) < v.len() { v[j as usize] } else { 0.0 };
    // F' and F'' coefficients
    let a: Vec<f64> = (0..len).map(|j| (j + 1) as f64 * f[j + 1]).collect();
    let b: Vec<f64> = (0..len).map(|j| ((j + 2) * (j + 1)) as f64 * f[j + 2]).collect();
    let lambda = -0.5 * f[1];
    // r'' as a polynomial: F'' x (1 - x) + F' (1 - 2x) / 2
    let rpp: Vec<f64> = (0..len as isize)
        .map(|j| get(&b, j - 1) - get(&b, j - 2) + 0.5 * get(&a, j) - get(&a, j - 1))
        .collect();
    let g: Vec<f64> = (0..len).map(|j| if j == 0 { 0.0 } else { -f[j] }).collect();
    let conv = |p: &[f64], q: &[f64], j: usize| (0..=j).map(|i| p[i] * q[j - i]).sum::<f64>();
    let a2: Vec<f64> = (0..len).map(|j| conv(&a, &a, j)).collect();
    // r'^2 = F'^2 x (1 - x)
    let r1sq: Vec<f64> = (0..len as isize).map(|j| get(&a2, j - 1) - get(&a2, j - 2)).collect();
    let p_plus: Vec<f64> = (0..len).map(|j| if j == 0 { lambda } else { 0.0 } - rpp[j]).collect();
    let p_minus: Vec<f64> = (0..len).map(|j| if j == 0 { lambda } else { 0.0 } + rpp[j]).collect();
    let one_plus_r: Vec<f64> = (0..len).map(|j| if j == 0 { 2.0 } else { 0.0 } - g[j]).collect();

    let horner = |coef: &dyn Fn(usize) -> f64, from: usize| {
        (from..len).rev().fold(0.0, |acc, j| acc * x + coef(j)) * x.powi(from as i32)
    };
    let g_val = horner(&|j| g[j], 1);
    let num_plus = horner(&|j| conv(&p_plus, &g, j) - r1sq[j], 3);
    // p_minus has no constant term: lambda + r''(0) = 0
    let num_minus = horner(&|j| if j == 0 { 0.0 } else { conv(&p_minus, &one_plus_r, j) - r1sq[j] }, 1);
    (g_val, num_plus / g_val, num_minus / (2.0 - g_val))
}

impl CovarianceBlocks {
    /// Blocks with prescribed scalars, used for oracle cases such as the
    /// independent one `u = d = h = 0`. `theta` is set to `arccos u`.
    pub fn synthetic(model: SphereModel, u: f64, d_long: f64, h_long: f64, h_trans: f64) -> Result<Self> {
        if !(u.abs() <= 1.0) {
            return Err(Error::Domain { what: "u", value: u });
        }
        Ok(Self::from_scalars(model, u.acos(), u, d_long, h_long, h_trans))
    }

    fn from_scalars(model: SphereModel, theta: f64, u: f64, d_long: f64, h_long: f64, h_trans: f64) -> Self {
        let scale = model.gradient_scale();
        let one_minus_u2 = (1.0 - u) * (1.0 + u);
        let dd = d_long * d_long / one_minus_u2;
        Self {
            model,
            theta,
            u,
            d_long,
            h_long,
            h_trans,
            scale,
            one_minus_u2,
            omega_long: [scale - dd, h_long - u * dd],
        }
    }

    fn m(&self) -> usize {
        self.model.m() as usize
    }

    /// `D` in the aligned frame at `x`.
    pub fn d_vector(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.m()];
        d[0] = self.d_long;
        d
    }

    /// `H` in the aligned frames (rows at `x`, columns at `y`).
    pub fn h_matrix(&self) -> Matrix {
        Matrix::from_fn(self.m(), |i, j| match (i, j) {
            (0, 0) => self.h_long,
            _ if i == j => self.h_trans,
            _ => 0.0,
        })
    }

    /// `1 - u^2`.
    pub fn a_det(&self) -> f64 {
        self.one_minus_u2
    }

    fn check_nonsingular_u(&self) -> Result<()> {
        if self.u.abs() >= 1.0 - 1e-12 {
            return Err(Error::Domain { what: "u", value: self.u });
        }
        Ok(())
    }
}

/// `Sigma = [[A, B], [B^t, C]]` for `(f(x), f(y), grad f(x), grad f(y))`
/// with `A = [[1, u], [u, 1]]`, `B = [[0, -D], [D, 0]]` and
/// `C = [[(E/m) I, H], [H^t, (E/m) I]]`.
pub fn sigma_matrix(blocks: &CovarianceBlocks) -> Matrix {
    let m = blocks.m();
    let mut s = Matrix::zeros(2 * m + 2);
    s[(0, 0)] = 1.0;
    s[(1, 1)] = 1.0;
    s[(0, 1)] = blocks.u;
    s[(1, 0)] = blocks.u;
    let d = blocks.d_vector();
    for k in 0..m {
        // cov(f(x), grad f(y)) = grad_y u = -D; cov(f(y), grad f(x)) = D
        s[(0, 2 + m + k)] = -d[k];
        s[(2 + m + k, 0)] = -d[k];
        s[(1, 2 + k)] = d[k];
        s[(2 + k, 1)] = d[k];
    }
    let omega = c_block(blocks);
    for i in 0..2 * m {
        for j in 0..2 * m {
            s[(2 + i, 2 + j)] = omega[(i, j)];
        }
    }
    s
}

fn c_block(blocks: &CovarianceBlocks) -> Matrix {
    let m = blocks.m();
    let h = blocks.h_matrix();
    Matrix::from_fn(2 * m, |i, j| {
        let (bi, ii) = (i / m, i % m);
        let (bj, jj) = (j / m, j % m);
        match (bi, bj) {
            (0, 0) | (1, 1) => {
                if ii == jj {
                    blocks.scale
                } else {
                    0.0
                }
            }
            (0, 1) => h[(ii, jj)],
            _ => h[(jj, ii)],
        }
    })
}

/// Reduced covariance of `(grad f(x), grad f(y))` given `f(x) = f(y) = 0`,
/// the Schur complement `Omega = C - B^t A^{-1} B`:
/// `Omega = [[(E/m) I - DD^t/(1-u^2), H - u DD^t/(1-u^2)], [.., (E/m) I - DD^t/(1-u^2)]]`.
pub fn omega_matrix(blocks: &CovarianceBlocks) -> Result<Matrix> {
    blocks.check_nonsingular_u()?;
    let m = blocks.m();
    let mut omega = c_block(blocks);
    let [diag, cross] = blocks.omega_long;
    omega[(0, 0)] = diag;
    omega[(m, m)] = diag;
    omega[(0, m)] = cross;
    omega[(m, 0)] = cross;
    Ok(omega)
}

/// `Sigma`, `Omega` and the quantities derived from them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianJoint {
    pub sigma: Matrix,
    pub omega: Matrix,
    pub a_det: f64,
    pub omega_det: f64,
    pub omega_eigenvalues: Vec<f64>,
    pub degenerate: bool,
}

impl GaussianJoint {
    pub fn new(blocks: &CovarianceBlocks) -> Result<Self> {
        let omega = omega_matrix(blocks)?;
        let eig = SymmetricEigen::new(&omega);
        Ok(Self {
            sigma: sigma_matrix(blocks),
            a_det: blocks.a_det(),
            omega_det: eig.determinant(),
            degenerate: eig.min() < DEGENERACY_THRESHOLD * blocks.scale,
            omega_eigenvalues: eig.values,
            omega,
        })
    }

    /// Determinant of `Sigma` from its own eigendecomposition.
    pub fn sigma_det(&self) -> f64 {
        SymmetricEigen::new(&self.sigma).determinant()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.omega_eigenvalues[0]
    }
}

/// `S = I - (m/E) Omega` and its spectral norm `sigma = max |lambda(S)|`.
pub fn s_matrix(blocks: &CovarianceBlocks) -> Result<(Matrix, f64)> {
    let omega = omega_matrix(blocks)?;
    let k = 1.0 / blocks.scale;
    let s = Matrix::from_fn(omega.size(), |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - k * omega[(i, j)]
    });
    let norm = SymmetricEigen::new(&s).max_abs();
    Ok((s, norm))
}

/// Spectral norm of `S` in closed form. `Omega` splits into the
/// longitudinal pair and `m-1` transverse pairs, each a 2x2 block
/// `[[a, b], [b, a]]` with eigenvalues `a +- b`.
pub fn sigma_norm_closed_form(blocks: &CovarianceBlocks) -> Result<f64> {
    blocks.check_nonsingular_u()?;
    let dd = blocks.d_long * blocks.d_long / blocks.a_det();
    let a = blocks.scale - dd;
    let b = blocks.h_long - blocks.u * dd;
    let mut eig = vec![a + b, a - b];
    if blocks.m() > 1 {
        eig.push(blocks.scale + blocks.h_trans);
        eig.push(blocks.scale - blocks.h_trans);
    }
    Ok(eig
        .into_iter()
        .map(|l| (1.0 - l / blocks.scale).abs())
        .fold(0.0, f64::max))
}

/// Thetas from `thetas` at which the reduced covariance is degenerate.
pub fn degenerate_thetas(model: SphereModel, thetas: &[f64]) -> Result<Vec<f64>> {
    let mut bad = Vec::new();
    for &theta in thetas {
        let blocks = blocks_at(model, theta)?;
        if blocks.u.abs() >= 1.0 - 1e-12 || GaussianJoint::new(&blocks)?.degenerate {
            bad.push(theta);
        }
    }
    Ok(bad)
}

/// Central finite differences of `u(x, y) = Q(cos d(x, y))` along the
/// aligned frames, an oracle for [`blocks_at`] that never uses the closed
/// forms of the derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifferenceBlocks {
    pub u: f64,
    pub d_long: f64,
    pub h_long: f64,
    /// Along the second frame vectors.
    pub h_trans: f64,
    /// Largest entry of `D` and `H` that should vanish by isotropy.
    pub off_pattern: f64,
}

fn exp_map(p: &SpherePoint, v: &[f64], h: f64) -> SpherePoint {
    let (s, c) = h.sin_cos();
    SpherePoint::normalize(p.coords().iter().zip(v).map(|(a, b)| c * a + s * b).collect())
        .expect("moved point is nonzero")
}

/// Finite-difference blocks at separation `theta` with step `h`. The pair
/// is placed at a generic position (not on an axis).
pub fn finite_difference_blocks(model: SphereModel, theta: f64, h: f64) -> Result<FiniteDifferenceBlocks> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let m = model.m() as usize;
    let mut y = vec![0.1; m + 1];
    y[..3].copy_from_slice(&[0.3, -0.2, 0.9]);
    let y = SpherePoint::normalize(y)?;
    let mut toward = vec![0.0; m + 1];
    toward[0] = 1.0;
    let (fy0, _) = aligned_frames(&y, &SpherePoint::normalize(toward)?)?;
    let x = exp_map(&y, &fy0.vectors[0], theta);
    let (fx, fy) = aligned_frames(&x, &y)?;
    let u = |a: &SpherePoint, b: &SpherePoint| q_normalized(model.m(), model.n(), dot(a.coords(), b.coords()));
    let mut d = vec![0.0; m];
    let mut hm = vec![vec![0.0; m]; m];
    for a in 0..m {
        let xp = exp_map(&x, &fx.vectors[a], h);
        let xm = exp_map(&x, &fx.vectors[a], -h);
        d[a] = (u(&xp, &y) - u(&xm, &y)) / (2.0 * h);
        for b in 0..m {
            let yp = exp_map(&y, &fy.vectors[b], h);
            let ym = exp_map(&y, &fy.vectors[b], -h);
            hm[a][b] = (u(&xp, &yp) - u(&xp, &ym) - u(&xm, &yp) + u(&xm, &ym)) / (4.0 * h * h);
        }
    }
    let mut off = d[1..].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for a in 0..m {
        for b in 0..m {
            if a != b {
                off = off.max(hm[a][b].abs());
            }
        }
    }
    Ok(FiniteDifferenceBlocks { u: u(&x, &y), d_long: d[0], h_long: hm[0][0], h_trans: hm[1][1], off_pattern: off })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>().clamp(-1.0, 1.0)
}

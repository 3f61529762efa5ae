use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::gaussian_norm_mean;
use crate::covariance::{omega_matrix, CovarianceBlocks, DEGENERACY_THRESHOLD};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::rng::{stream, Domain};
use crate::{Error, Result};

/// Monte Carlo estimator of `E ||w1|| ||w2||` for `w ~ N(0, Omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelEstimator {
    /// Independent draws `w = P z` with `P` the symmetric root of `Omega`.
    Plain,
    /// The same draws with the control variate `(E/m) ||z1|| ||z2||`, whose
    /// mean `(E/m) (E||z_m||)^2` is known. The control is exact in the
    /// independent case and strongly correlated near it, which is where the
    /// variance of the nodal volume lives.
    #[default]
    ControlVariate,
    /// Deterministic evaluation through
    /// `sqrt(a) = (1 / 2 sqrt(pi)) int_0^inf (1 - exp(-s a)) s^(-3/2) ds`,
    /// which turns the expectation into a double integral of Gaussian
    /// Laplace transforms `det(I + 2 Omega D)^(-1/2)`. The integral is
    /// taken by the trapezoidal rule in `ln s`, `ln t`. No random numbers
    /// are drawn and the reported standard error is zero.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    pub paths: u32,
    pub seed: u64,
    pub estimator: KernelEstimator,
    /// Largest accepted Monte Carlo standard error of an integrated second
    /// moment; `None` accepts any.
    pub max_std_error: Option<f64>,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { paths: 20_000, seed: 0, estimator: KernelEstimator::ControlVariate, max_std_error: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// `K = E ||w1|| ||w2|| / (2 pi sqrt(1 - u^2))`, `w ~ N(0, Omega)`, with the
/// default control-variate estimator on stream `(seed, 0)`.
pub fn kernel_k(blocks: &CovarianceBlocks, mc_paths: u32, seed: u64) -> Result<KernelEstimate> {
    let opts = KernelOptions { paths: mc_paths, seed, ..Default::default() };
    kernel_k_with(blocks, &opts, 0, true)
}

/// Kernel estimate on stream `(seed, node)`. With `refuse_degenerate` a
/// reduced covariance below the degeneracy threshold is an error; without
/// it the estimate is formed anyway (the expectation stays finite as
/// `Omega` loses rank).
pub fn kernel_k_with(
    blocks: &CovarianceBlocks,
    opts: &KernelOptions,
    node: u64,
    refuse_degenerate: bool,
) -> Result<KernelEstimate> {
    if opts.paths < 2 {
        return Err(Error::Invalid(format!("mc_paths = {} < 2", opts.paths)));
    }
    let omega = omega_matrix(blocks)?;
    let eig = SymmetricEigen::new(&omega);
    if refuse_degenerate && eig.min() < DEGENERACY_THRESHOLD * blocks.scale {
        return Err(Error::DegenerateOmega { theta: blocks.theta, eigenvalue: eig.min() });
    }
    let m = blocks.model.m() as usize;
    let norm = 1.0 / (2.0 * PI * blocks.a_det().sqrt());
    if opts.estimator == KernelEstimator::Quadrature {
        return Ok(KernelEstimate { value: norm * norm_product_by_quadrature(&omega, m, LOG_STEP), std_error: 0.0 });
    }
    let root = eig.sym_sqrt();
    let mut rng = stream(opts.seed, Domain::KernelNode, node);
    let control_mean = blocks.scale * gaussian_norm_mean(m as u32).powi(2);
    let mut z = vec![0.0; 2 * m];
    let mut acc = crate::stats::Accumulator::new();
    for _ in 0..opts.paths {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let w = root.mul_vec(&z);
        let n1 = w[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
        let n2 = w[m..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let y = match opts.estimator {
            KernelEstimator::Plain => n1 * n2,
            KernelEstimator::Quadrature => unreachable!(),
            KernelEstimator::ControlVariate => {
                let z1 = z[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
                let z2 = z[m..].iter().map(|x| x * x).sum::<f64>().sqrt();
                n1 * n2 - blocks.scale * z1 * z2 + control_mean
            }
        };
        acc.push(y);
    }
    Ok(KernelEstimate { value: acc.mean() * norm, std_error: acc.std_error() * norm })
}

/// Step and half-width in `ln s` of the trapezoidal rule. The integrand
/// is analytic in a strip of half-width `pi` around the real axis, so the
/// rule converges like `exp(-2 pi^2 / step)`; the tails decay like
/// `exp(-|x| / 2)`.
const LOG_STEP: f64 = 0.5;
const LOG_HALF_WIDTH: f64 = 64.0;

/// `ln det(I - G)` for a small symmetric PSD `G` with eigenvalues in
/// `[0, 1)`, accurate when `G` is tiny.
fn log_det_one_minus(g: &[f64], m: usize) -> f64 {
    let arg = match m {
        1 => -g[0],
        2 => -(g[0] + g[3]) + (g[0] * g[3] - g[1] * g[2]),
        3 => {
            let tr = g[0] + g[4] + g[8];
            let minors = g[0] * g[4] - g[1] * g[3] + g[0] * g[8] - g[2] * g[6] + g[4] * g[8] - g[5] * g[7];
            let det = g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6])
                + g[2] * (g[3] * g[7] - g[4] * g[6]);
            -tr + minors - det
        }
        _ => {
            let eig = SymmetricEigen::new(&Matrix::from_fn(m, |i, j| g[i * m + j]));
            return eig.values.iter().map(|l| (-l.clamp(0.0, 1.0 - 1e-16)).ln_1p()).sum();
        }
    };
    arg.max(-1.0 + 1e-300).ln_1p()
}

/// `E ||w1|| ||w2||` for `w ~ N(0, Omega)`, `w1, w2` the two `m`-blocks.
///
/// With `A = ||w1||^2`, `B = ||w2||^2` the expectation is
/// `(1/4 pi) int int (s t)^(-3/2) E[(1 - e^(-sA))(1 - e^(-tB))] ds dt`.
/// Writing the Laplace transform as `exp(-a - b - c)` with
/// `a = (1/2) ln det(I + 2s Omega11)`, `b` likewise and the coupling
/// `c = (1/2) ln det(I - G)`, `G = 4st B^(-1/2) Omega21 A^(-1) Omega12 B^(-1/2)`,
/// the bracket becomes `(1 - e^-a)(1 - e^-b) + e^(-a-b) (e^-c - 1)` and is
/// formed without cancellation for small `s`, `t`.
fn norm_product_by_quadrature(omega: &Matrix, m: usize, step: f64) -> f64 {
    let block = |r0: usize, c0: usize| Matrix::from_fn(m, |i, j| omega[(r0 + i, c0 + j)]);
    let e1 = SymmetricEigen::new(&block(0, 0));
    let e2 = SymmetricEigen::new(&block(m, m));
    let lam1: Vec<f64> = e1.values.iter().map(|v| v.max(0.0)).collect();
    let lam2: Vec<f64> = e2.values.iter().map(|v| v.max(0.0)).collect();
    let reference = lam1.iter().chain(&lam2).fold(0.0f64, |acc, &v| acc.max(v));
    if reference <= 0.0 {
        return 0.0;
    }
    // cross block in the two eigenbases
    let o12 = block(0, m);
    let cross = Matrix::from_fn(m, |i, j| {
        let mut acc = 0.0;
        for k in 0..m {
            for l in 0..m {
                acc += e1.vectors[(k, i)] * o12[(k, l)] * e2.vectors[(l, j)];
            }
        }
        acc
    });

    let count = (2.0 * LOG_HALF_WIDTH / step).round() as usize + 1;
    let x0 = -reference.ln() - LOG_HALF_WIDTH;
    let grid = |i: usize| (x0 + step * i as f64).exp();

    // per s: a, 1 - e^-a, weight s^(-1/2), and P_kl = sum_i cross_ik cross_il / (1 + 2 s lam1_i)
    struct Row {
        s: f64,
        a: f64,
        one_minus: f64,
        weight: f64,
        p: Vec<f64>,
    }
    let rows: Vec<Row> = (0..count)
        .map(|i| {
            let s = grid(i);
            let a = 0.5 * lam1.iter().map(|l| (2.0 * s * l).ln_1p()).sum::<f64>();
            let mut p = vec![0.0; m * m];
            for k in 0..m {
                for l in 0..m {
                    p[k * m + l] = (0..m).map(|r| cross[(r, k)] * cross[(r, l)] / (1.0 + 2.0 * s * lam1[r])).sum();
                }
            }
            Row { s, a, one_minus: -(-a).exp_m1(), weight: s.powf(-0.5), p }
        })
        .collect();
    let cols: Vec<(f64, f64, f64, f64, Vec<f64>)> = (0..count)
        .map(|j| {
            let t = grid(j);
            let b = 0.5 * lam2.iter().map(|l| (2.0 * t * l).ln_1p()).sum::<f64>();
            let beta = lam2.iter().map(|l| 1.0 / (1.0 + 2.0 * t * l).sqrt()).collect();
            (t, b, -(-b).exp_m1(), t.powf(-0.5), beta)
        })
        .collect();

    let mut g = vec![0.0; m * m];
    let mut total = 0.0;
    for row in &rows {
        let mut row_sum = 0.0;
        for (t, b, b_minus, t_weight, beta) in &cols {
            let st4 = 4.0 * row.s * t;
            for k in 0..m {
                for l in 0..m {
                    g[k * m + l] = st4 * beta[k] * beta[l] * row.p[k * m + l];
                }
            }
            let c = 0.5 * log_det_one_minus(&g, m);
            let ab = row.a + b;
            let coupling = if c > -1.0 { (-ab).exp() * (-c).exp_m1() } else { (-ab - c).exp() - (-ab).exp() };
            row_sum += t_weight * (row.one_minus * b_minus + coupling);
        }
        total += row.weight * row_sum;
    }
    total * step * step / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::blocks_at;
    use crate::specfun::SphereModel;

    fn s2(e_model_n: u32) -> SphereModel {
        SphereModel::new(2, e_model_n).unwrap()
    }

    #[test]
    fn independence_oracle() {
        // n = 2 on S^2: E = 6
        let md = s2(2);
        let plain = KernelOptions { paths: 20_000, seed: 5, estimator: KernelEstimator::Plain, max_std_error: None };
        let ind = CovarianceBlocks::synthetic(md, 0.0, 0.0, 0.0, 0.0).unwrap();
        let k = kernel_k_with(&ind, &plain, 0, true).unwrap();
        assert!((k.value - 0.75).abs() <= 3.0 * k.std_error, "{k:?}");
        let k = kernel_k(&ind, 1000, 5).unwrap();
        assert!((k.value - 0.75).abs() < 1e-12 && k.std_error < 1e-12);

        let half = CovarianceBlocks::synthetic(md, 0.5, 0.0, 0.0, 0.0).unwrap();
        let want = 0.75 / 0.75f64.sqrt();
        let k = kernel_k_with(&half, &plain, 0, true).unwrap();
        assert!((k.value - want).abs() <= 3.0 * k.std_error);
        let k = kernel_k(&half, 1000, 1).unwrap();
        assert!((k.value - want).abs() < 1e-12);
    }

    #[test]
    fn quadrature_estimator() {
        let quad = KernelOptions { estimator: KernelEstimator::Quadrature, ..Default::default() };
        let md = s2(2);
        for (u, want) in [(0.0, 0.75), (0.5, 0.75 / 0.75f64.sqrt())] {
            let b = CovarianceBlocks::synthetic(md, u, 0.0, 0.0, 0.0).unwrap();
            let k = kernel_k_with(&b, &quad, 0, true).unwrap();
            assert!((k.value - want).abs() < 1e-10 * want, "{k:?}");
        }
        // against Monte Carlo on correlated blocks, m = 2 and 3
        for (m, n, theta) in [(2, 12, 0.9), (2, 30, 0.05), (3, 9, 1.3)] {
            let b = blocks_at(SphereModel::new(m, n).unwrap(), theta).unwrap();
            let q = kernel_k_with(&b, &quad, 0, true).unwrap();
            let plain = KernelOptions { paths: 200_000, seed: 9, estimator: KernelEstimator::Plain, max_std_error: None };
            let p = kernel_k_with(&b, &plain, 0, true).unwrap();
            assert!((q.value - p.value).abs() < 4.0 * p.std_error, "{m} {n} {theta}: {q:?} {p:?}");
        }
    }

    #[test]
    fn quadrature_is_converged_in_step() {
        for (m, n, theta) in [(2, 20, 0.4), (2, 40, 0.01), (3, 10, 2.0)] {
            let b = blocks_at(SphereModel::new(m, n).unwrap(), theta).unwrap();
            let omega = omega_matrix(&b).unwrap();
            let coarse = norm_product_by_quadrature(&omega, m as usize, LOG_STEP);
            let fine = norm_product_by_quadrature(&omega, m as usize, 0.7 * LOG_STEP);
            assert!(((coarse - fine) / fine).abs() < 1e-12, "{m} {n} {theta}: {coarse} {fine}");
        }
        // the explicit small-G log det against eigenvalues
        let g = [0.01, 0.002, 0.002, 0.03];
        let eig = SymmetricEigen::new(&Matrix::from_fn(2, |i, j| g[i * 2 + j]));
        let via: f64 = eig.values.iter().map(|l| (-l).ln_1p()).sum();
        assert!((log_det_one_minus(&g, 2) - via).abs() < 1e-15);
    }

    #[test]
    fn degenerate_is_refused() {
        let b = blocks_at(s2(2), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(matches!(kernel_k(&b, 100, 0), Err(Error::DegenerateOmega { .. })));
        let b = CovarianceBlocks::synthetic(s2(3), 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(kernel_k(&b, 100, 0), Err(Error::Domain { .. })));
    }

    #[test]
    fn deterministic_and_estimators_agree() {
        let b = blocks_at(SphereModel::new(2, 12).unwrap(), 0.9).unwrap();
        let a = kernel_k(&b, 5000, 3).unwrap();
        assert_eq!(a, kernel_k(&b, 5000, 3).unwrap());
        let plain = KernelOptions { paths: 20_000, seed: 4, estimator: KernelEstimator::Plain, max_std_error: None };
        let p = kernel_k_with(&b, &plain, 0, true).unwrap();
        let se = (a.std_error.powi(2) + p.std_error.powi(2)).sqrt();
        assert!((a.value - p.value).abs() < 4.0 * se);
        // the control variate is the better estimator in the bulk
        assert!(a.std_error < p.std_error);
    }

    #[test]
    fn kernel_is_positive_and_bounded() {
        for n in [10u32, 20] {
            let md = s2(n);
            let e = md.eigenvalue();
            for i in 1..60 {
                let theta = std::f64::consts::PI * i as f64 / 60.0;
                let b = blocks_at(md, theta).unwrap();
                let k = kernel_k(&b, 2000, i).unwrap();
                assert!(k.value > 0.0);
                assert!(k.value <= 2.0 * e / b.a_det().sqrt());
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{
    kernel_k_with, leray_variance_integrand, volume_expectation, KernelEstimate, KernelOptions,
    MomentReport, QuadratureSpec, SingularSplit,
};
use crate::covariance::{blocks_at, sigma_norm_closed_form, CovarianceBlocks};
use crate::geometry::sphere_volume;
use crate::quadrature::{mu_prefactor, mu_theta_integral, panels_for, GaussLegendre};
use crate::specfun::SphereModel;
use crate::{Error, Result};

/// Panels on each singular cap per panel-per-oscillation. The caps are a
/// fraction of one oscillation.
fn cap_panels(quad: &QuadratureSpec) -> usize {
    (quad.panels_per_oscillation as usize / 4).max(4)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    theta: f64,
    /// Quadrature weight including the density of `mu`.
    weight: f64,
    singular: bool,
}

fn nodes(model: SphereModel, quad: &QuadratureSpec, split: &SingularSplit) -> Vec<Node> {
    let rule = GaussLegendre::standard();
    let c = mu_prefactor(model.m());
    let k = model.m() as i32 - 1;
    let mut out = Vec::new();
    for (a, b, singular) in split.pieces() {
        let panels = if singular {
            cap_panels(quad)
        } else {
            panels_for(b - a, model.n(), quad.panels_per_oscillation)
        };
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + width * p as f64;
            for (theta, w) in rule.mapped(lo, lo + width) {
                out.push(Node { theta, weight: w * c * theta.sin().powi(k), singular });
            }
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn map_nodes<F>(nodes: &[Node], f: F) -> Vec<Result<KernelEstimate>>
where
    F: Fn(usize, &Node) -> Result<KernelEstimate> + Sync,
{
    use rayon::prelude::*;
    nodes.par_iter().enumerate().map(|(i, nd)| f(i, nd)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_nodes<F>(nodes: &[Node], f: F) -> Vec<Result<KernelEstimate>>
where
    F: Fn(usize, &Node) -> Result<KernelEstimate>,
{
    nodes.iter().enumerate().map(|(i, nd)| f(i, nd)).collect()
}

/// `E Z^2 = |S^m| int K dmu` with the default kernel estimator.
pub fn volume_second_moment(
    model: SphereModel,
    quad: &QuadratureSpec,
    mc_paths: u32,
    seed: u64,
) -> Result<MomentReport> {
    let opts = KernelOptions { paths: mc_paths, seed, ..Default::default() };
    volume_second_moment_with(model, quad, &opts, blocks_at)
}

/// `E Z^2 = |S^m| int K dmu`, the kernel estimated by Monte Carlo at
/// every Gauss-Legendre node in `theta`.
///
/// Node `i` uses the random stream `(seed, i)`, so the result does not
/// depend on scheduling. Nodes of the nonsingular interval with a
/// degenerate reduced covariance make the call fail with the list of
/// offending angles. On the singular caps the kernel is estimated as well
/// and reported as `singular_contribution`; the bound shape
/// `|S^m| E int_{B^c} dmu / sqrt(1-Q^2)` is reported next to it.
///
/// `blocks` supplies the covariance scalars of each node; pass
/// [`blocks_at`] for the model itself.
pub fn volume_second_moment_with<B>(
    model: SphereModel,
    quad: &QuadratureSpec,
    opts: &KernelOptions,
    blocks: B,
) -> Result<MomentReport>
where
    B: Fn(SphereModel, f64) -> Result<CovarianceBlocks> + Sync,
{
    quad.validate()?;
    let split = SingularSplit::new(model, quad.singular_split_eps0)?;
    let nodes = nodes(model, quad, &split);
    let estimates = map_nodes(&nodes, |i, nd| {
        let b = blocks(model, nd.theta)?;
        kernel_k_with(&b, opts, i as u64, !nd.singular)
    });
    let mut degenerate = Vec::new();
    let mut sums = [0.0; 2];
    let mut var_mc = 0.0;
    let mut worst = (0.0, f64::NAN);
    for (nd, est) in nodes.iter().zip(estimates) {
        match est {
            Ok(k) => {
                sums[nd.singular as usize] += nd.weight * k.value;
                let v = (nd.weight * k.std_error).powi(2);
                var_mc += v;
                if v > worst.0 {
                    worst = (v, nd.theta);
                }
            }
            Err(Error::DegenerateOmega { theta, .. }) => degenerate.push(theta),
            Err(e) => return Err(e),
        }
    }
    if !degenerate.is_empty() {
        return Err(Error::DegenerateNodes { thetas: degenerate });
    }
    let volume = sphere_volume(model.m());
    let mc_std_error = volume * var_mc.sqrt();
    if let Some(tolerance) = opts.max_std_error {
        if mc_std_error > tolerance {
            return Err(Error::KernelPrecision { theta: worst.1, std_error: mc_std_error, tolerance });
        }
    }
    let nonsingular_contribution = volume * sums[0];
    let singular_contribution = volume * sums[1];
    let second_moment = nonsingular_contribution + singular_contribution;
    let expectation = volume_expectation(model);
    let variance = second_moment - expectation * expectation;
    let e = model.eigenvalue();
    let theory = e / model.dimension().sqrt();

    // bound shape and mass of the caps
    let mut bound = 0.0;
    let mut singular_mass = 0.0;
    for (a, b, singular) in split.pieces() {
        if singular {
            bound += mu_theta_integral(
                model.m(),
                model.n(),
                |th| 1.0 + leray_variance_integrand(model, th),
                a,
                b,
                quad.panels_per_oscillation * 8,
                quad.relative_tolerance,
            )?
            .value;
            singular_mass += mu_theta_integral(model.m(), 0, |_| 1.0, a, b, 8, quad.relative_tolerance)?.value;
        }
    }
    Ok(MomentReport {
        model,
        expectation,
        second_moment,
        variance,
        theory_asymptotic: theory,
        ratio: variance / theory,
        singular_contribution,
        nonsingular_contribution,
        singular_bound: volume * e * bound,
        singular_mass,
        mc_std_error,
        c0: split.c0,
    })
}

/// Integrals of the spectral norm `sigma` of `S` over the nonsingular
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaScaling {
    pub int_sigma: f64,
    pub int_sigma_sq: f64,
    /// `mu` of the nonsingular interval.
    pub nonsingular_mass: f64,
}

/// `int_B sigma dmu` and `int_B sigma^2 dmu`. `sigma` is a maximum of
/// smooth branches and has kinks, so a fixed fine grid (four times the
/// oscillation resolution) replaces panel doubling.
pub fn sigma_scaling_report(model: SphereModel, quad: &QuadratureSpec) -> Result<SigmaScaling> {
    quad.validate()?;
    let split = SingularSplit::new(model, quad.singular_split_eps0)?;
    let (a, b, _) = split.pieces()[1];
    let panels = 4 * panels_for(b - a, model.n(), quad.panels_per_oscillation);
    let c = mu_prefactor(model.m());
    let k = model.m() as i32 - 1;
    let mut sums = (0.0, 0.0, 0.0);
    let rule = GaussLegendre::standard();
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + width * p as f64;
        for (th, w) in rule.mapped(lo, lo + width) {
            let bl = blocks_at(model, th)?;
            let s = sigma_norm_closed_form(&bl)?;
            let dens = w * c * th.sin().powi(k);
            sums.0 += dens * s;
            sums.1 += dens * s * s;
            sums.2 += dens;
        }
    }
    Ok(SigmaScaling { int_sigma: sums.0, int_sigma_sq: sums.1, nonsingular_mass: sums.2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::KernelEstimator;

    fn model(m: u32, n: u32) -> SphereModel {
        SphereModel::new(m, n).unwrap()
    }

    #[test]
    fn independence_sanity() {
        let quad = QuadratureSpec::default();
        for (m, n) in [(2, 10), (3, 6)] {
            let md = model(m, n);
            let opts = KernelOptions { paths: 4000, seed: 1, estimator: KernelEstimator::Plain, max_std_error: None };
            let r = volume_second_moment_with(md, &quad, &opts, |md, _| {
                CovarianceBlocks::synthetic(md, 0.0, 0.0, 0.0, 0.0)
            })
            .unwrap();
            let ez2 = volume_expectation(md).powi(2);
            assert!((r.second_moment - ez2).abs() <= 4.0 * r.mc_std_error, "m={m}: {r:?}");
        }
    }

    #[test]
    fn deterministic_kernel_against_monte_carlo() {
        let md = model(2, 10);
        let quad = QuadratureSpec::default();
        let exact = KernelOptions { estimator: KernelEstimator::Quadrature, ..Default::default() };
        let q = volume_second_moment_with(md, &quad, &exact, blocks_at).unwrap();
        assert_eq!(q.mc_std_error, 0.0);
        assert!(q.variance > 0.0);
        let mc = volume_second_moment(md, &quad, 20_000, 11).unwrap();
        assert!((mc.second_moment - q.second_moment).abs() < 4.0 * mc.mc_std_error, "{q:?} {mc:?}");
        // the precision guard refuses the noisy estimate
        let strict = KernelOptions { paths: 2000, max_std_error: Some(1e-3), ..Default::default() };
        let err = volume_second_moment_with(md, &quad, &strict, blocks_at).unwrap_err();
        assert!(matches!(err, Error::KernelPrecision { .. }));
    }

    #[test]
    fn small_degree_is_refused_with_angles() {
        let err = volume_second_moment(model(2, 2), &QuadratureSpec::default(), 100, 0).unwrap_err();
        match err {
            Error::DegenerateNodes { thetas } => assert!(!thetas.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn variance_is_small_and_nonnegative() {
        let r = volume_second_moment(model(2, 10), &QuadratureSpec::default(), 4000, 3).unwrap();
        assert!(r.variance >= -3.0 * r.mc_std_error, "{r:?}");
        assert!(r.variance < 0.05 * r.second_moment);
        assert_eq!(r, volume_second_moment(model(2, 10), &QuadratureSpec::default(), 4000, 3).unwrap());
    }

    #[test]
    fn sigma_integrals() {
        let quad = QuadratureSpec::default();
        let s = sigma_scaling_report(model(2, 10), &quad).unwrap();
        assert!(s.int_sigma > 0.0 && s.int_sigma_sq > 0.0);
        assert!(s.int_sigma.powi(2) <= s.int_sigma_sq * s.nonsingular_mass * (1.0 + 1e-12));
    }
}

//! Expectations and second moments of the Leray measure `L` and the nodal
//! volume `Z`, with the singular/nonsingular split of `[-1, 1]`.

mod kernel;
mod leray;
mod volume;

pub use kernel::{kernel_k, kernel_k_with, KernelEstimate, KernelEstimator, KernelOptions};
pub use leray::{leray_report, leray_second_moment, leray_variance_asymptotic, leray_variance_integrand};
pub use volume::{
    sigma_scaling_report, volume_second_moment, volume_second_moment_with, SigmaScaling,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::geometry::sphere_volume;
use crate::specfun::{find_c0, gamma_half, SphereModel};
use crate::{Error, Result};

/// Resolution policy for the integrals over `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Panels per period of a degree-`n` harmonic, at least 8.
    pub panels_per_oscillation: u32,
    /// Stopping tolerance of panel doubling, in `[1e-12, 1e-3]`.
    pub relative_tolerance: f64,
    /// `eps0` of the split `|Q| <= eps0` defining the nonsingular interval.
    pub singular_split_eps0: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panels_per_oscillation: 16, relative_tolerance: 1e-10, singular_split_eps0: 0.9 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels_per_oscillation < 8 {
            return Err(Error::Invalid(format!(
                "panels_per_oscillation = {} < 8",
                self.panels_per_oscillation
            )));
        }
        if !(1e-12..=1e-3).contains(&self.relative_tolerance) {
            return Err(Error::Domain { what: "relative_tolerance", value: self.relative_tolerance });
        }
        if !(self.singular_split_eps0 > 0.0 && self.singular_split_eps0 < 1.0) {
            return Err(Error::Domain { what: "singular_split_eps0", value: self.singular_split_eps0 });
        }
        Ok(())
    }
}

/// Angle `theta_0 = arccos(1 - c0/n^2)` separating the singular caps
/// `[0, theta_0]`, `[pi - theta_0, pi]` from the nonsingular interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSplit {
    pub c0: f64,
    pub theta0: f64,
}

impl SingularSplit {
    pub fn new(model: SphereModel, eps0: f64) -> Result<Self> {
        let c0 = find_c0(model, eps0)?;
        let n2 = (model.n() as f64).powi(2);
        Ok(Self { c0, theta0: (1.0 - c0 / n2).acos() })
    }

    /// The two caps and the middle interval, as `theta` ranges.
    pub fn pieces(&self) -> [(f64, f64, bool); 3] {
        [
            (0.0, self.theta0, true),
            (self.theta0, PI - self.theta0, false),
            (PI - self.theta0, PI, true),
        ]
    }
}

/// Moments of one of the nodal functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub model: SphereModel,
    pub expectation: f64,
    pub second_moment: f64,
    /// `second_moment - expectation^2`.
    pub variance: f64,
    /// Reference scale the variance is compared with.
    pub theory_asymptotic: f64,
    /// `variance / theory_asymptotic`.
    pub ratio: f64,
    /// Part of `second_moment` coming from the singular caps.
    pub singular_contribution: f64,
    /// Part of `second_moment` coming from the nonsingular interval.
    pub nonsingular_contribution: f64,
    /// Upper-bound shape `E int_{B^c} dmu / sqrt(1 - Q^2)` (times `|S^m|`)
    /// for the singular part; zero for the Leray measure.
    pub singular_bound: f64,
    /// `mu` of the singular caps.
    pub singular_mass: f64,
    /// Accumulated Monte Carlo standard error of `second_moment`.
    pub mc_std_error: f64,
    pub c0: f64,
}

/// `E L = |S^m| / sqrt(2 pi)`.
pub fn leray_expectation(m: u32) -> f64 {
    sphere_volume(m) / (2.0 * PI).sqrt()
}

/// `c_m = 2 pi^(m/2) / (sqrt(m) Gamma(m/2))`.
pub fn volume_constant(m: u32) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / ((m as f64).sqrt() * gamma_half(m))
}

/// `E Z = c_m sqrt(E)`.
pub fn volume_expectation(model: SphereModel) -> f64 {
    volume_constant(model.m()) * model.eigenvalue().sqrt()
}

/// `E ||z||` for a standard Gaussian in `R^m`,
/// `sqrt(2) Gamma((m+1)/2) / Gamma(m/2)`.
pub fn gaussian_norm_mean(m: u32) -> f64 {
    2f64.sqrt() * gamma_half(m + 1) / gamma_half(m)
}

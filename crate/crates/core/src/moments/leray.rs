use std::f64::consts::PI;

use super::{leray_expectation, MomentReport, QuadratureSpec, SingularSplit};
use crate::geometry::sphere_volume;
use crate::quadrature::mu_theta_integral;
use crate::specfun::{gamma_half, one_minus_q, SphereModel};
use crate::Result;

/// `1/sqrt(1 - Q^2) - 1` at `theta`, written as
/// `Q^2 / (r (1 + r))` with `r = sqrt((1 - Q)(1 + Q))` so that nothing
/// cancels where `Q` is small. `1 - Q^2` is symmetric under
/// `theta -> pi - theta` and is taken from the nearer pole.
pub fn leray_variance_integrand(model: SphereModel, theta: f64) -> f64 {
    let near = theta.min(PI - theta);
    let omq = one_minus_q(model.m(), model.n(), near);
    let q = 1.0 - omq;
    let r = (omq * (2.0 - omq)).sqrt();
    q * q / (r * (1.0 + r))
}

/// `E L^2 = (|S^m| / 2 pi) int dmu / sqrt(1 - Q^2)`.
pub fn leray_second_moment(model: SphereModel, quad: &QuadratureSpec) -> Result<f64> {
    Ok(leray_report(model, quad)?.second_moment)
}

/// Quadrature evaluation of `E L^2` and `Var L`.
///
/// The integral is split at `theta_0 = arccos(1 - c0/n^2)`. Since
/// `(|S^m| / 2 pi) mu([-1, 1]) = (E L)^2`, the variance is the integral of
/// [`leray_variance_integrand`] alone; the second moment adds the square of
/// the expectation back.
pub fn leray_report(model: SphereModel, quad: &QuadratureSpec) -> Result<MomentReport> {
    quad.validate()?;
    let (m, n) = (model.m(), model.n());
    let prefactor = sphere_volume(m) / (2.0 * PI);
    let split = SingularSplit::new(model, quad.singular_split_eps0)?;
    let mut var_parts = [0.0; 3];
    let mut mass_parts = [0.0; 3];
    for (k, &(a, b, singular)) in split.pieces().iter().enumerate() {
        // The caps are a small fraction of one oscillation; a few panels
        // there, refined by doubling, resolve them.
        let per = if singular { quad.panels_per_oscillation * 8 } else { quad.panels_per_oscillation };
        var_parts[k] = mu_theta_integral(
            m,
            n,
            |th| leray_variance_integrand(model, th),
            a,
            b,
            per,
            quad.relative_tolerance,
        )?
        .value;
        mass_parts[k] = mu_theta_integral(m, 0, |_| 1.0, a, b, 8, quad.relative_tolerance)?.value;
    }
    let expectation = leray_expectation(m);
    let var_integral: f64 = var_parts.iter().sum();
    let second_moment = expectation * expectation + prefactor * var_integral;
    let variance = second_moment - expectation * expectation;
    let singular_mass = mass_parts[0] + mass_parts[2];
    let singular_contribution = prefactor * (var_parts[0] + var_parts[2] + singular_mass);
    let theory = leray_variance_asymptotic(model);
    Ok(MomentReport {
        model,
        expectation,
        second_moment,
        variance,
        theory_asymptotic: theory,
        ratio: variance / theory,
        singular_contribution,
        nonsingular_contribution: second_moment - singular_contribution,
        singular_bound: 0.0,
        singular_mass,
        mc_std_error: 0.0,
        c0: split.c0,
    })
}

/// `2^(m-2) pi^((m-2)/2) Gamma(m/2) |S^m| / ((m-1)! N)`.
pub fn leray_variance_asymptotic(model: SphereModel) -> f64 {
    let m = model.m();
    let factorial: f64 = (1..m).map(|k| k as f64).product();
    2f64.powi(m as i32 - 2) * PI.powf((m as f64 - 2.0) / 2.0) * gamma_half(m) * sphere_volume(m)
        / (factorial * model.dimension())
}

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::{bessel_j, c_tilde, gamma_half, SphereModel};
use crate::{Error, Result};

/// Constant in front of the Hilb error shape. Fitted once at `(m, n) = (2, 50)`
/// with a safety margin and then frozen; see `fitted_constant_has_margin`.
pub const HILB_ENVELOPE_CONSTANT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HilbApprox {
    pub approx: f64,
    pub error_envelope: f64,
}

/// `Gamma(n + alpha + 1) / n!` by the recursion `r(k) = r(k-1) (k + alpha) / k`.
fn gamma_ratio(model: SphereModel) -> f64 {
    let alpha = model.alpha();
    let mut r = gamma_half(model.m());
    for k in 1..=model.n() {
        r *= (k as f64 + alpha) / k as f64;
    }
    r
}

fn envelope_shape(model: SphereModel, theta: f64) -> f64 {
    let n = model.n().max(1) as f64;
    if theta > 1.0 / n {
        theta.sqrt() * n.powf(-1.5)
    } else {
        theta.powf(model.alpha() + 2.0) * n.powf(model.alpha())
    }
}

/// Hilb's Bessel approximation of `Q_n^m(cos theta)` on `(0, pi/2]`,
/// normalized so that it tends to 1 as `theta -> 0`.
///
/// The error envelope is Hilb's error shape divided by the same
/// normalization `P_n(1) (sin(theta)/2)^alpha`, times
/// [`HILB_ENVELOPE_CONSTANT`].
pub fn hilb_approx(model: SphereModel, theta: f64) -> Result<HilbApprox> {
    if !(theta > 0.0 && theta <= FRAC_PI_2 + 1e-15) {
        return Err(Error::Domain { what: "theta", value: theta });
    }
    let alpha = model.alpha();
    let nh = model.n() as f64 + (model.m() as f64 - 1.0) / 2.0;
    let s = theta.sin();
    let x = nh * theta;
    // J_alpha(x) / x^alpha stays finite as x -> 0; use the series limit
    // there rather than dividing two tiny numbers.
    let bessel_over_power = if x < 1e-8 {
        1.0 / c_tilde(model.m())
    } else {
        bessel_j(alpha, x)? / x.powf(alpha)
    };
    let approx = c_tilde(model.m())
        * (theta / s).sqrt()
        * bessel_over_power
        * (theta / s).powf(alpha);
    // P_n(1) (s/2)^alpha = gamma_ratio / Gamma(alpha+1) * (s/2)^alpha
    let norm = gamma_ratio(model) / gamma_half(model.m()) * (0.5 * s).powf(alpha);
    let error_envelope = HILB_ENVELOPE_CONSTANT * envelope_shape(model, theta) / norm;
    Ok(HilbApprox { approx, error_envelope })
}

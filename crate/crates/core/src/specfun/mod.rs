//! Special functions: normalized ultraspherical polynomials `Q_n^m`,
//! Bessel `J_alpha` at the orders `alpha = (m-2)/2`, Hilb's Bessel
//! approximation and the `mu`-moments of `Q_n^m` and its derivatives.

mod bessel;
mod gegenbauer;
mod hilb;
mod moment;

pub use bessel::bessel_j;
pub use gegenbauer::{
    derivative_via_degree_recurrence, gegenbauer_eval, gegenbauer_q, one_minus_q, q_normalized,
    PolyEval,
};
pub use hilb::{hilb_approx, HilbApprox, HILB_ENVELOPE_CONSTANT};
pub use moment::{find_c0, moment_integral, second_moment_closed_form, MomentKind};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Dimension `m` of the sphere together with the degree `n` of the
/// harmonics. Every formula in the crate takes one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphereModel {
    m: u32,
    n: u32,
}

impl SphereModel {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidModel(format!("sphere dimension m = {m} < 2")));
        }
        if m > 64 {
            return Err(Error::InvalidModel(format!("sphere dimension m = {m} > 64")));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The Laplace eigenvalue `E = n(n+m-1)`, exact in integer arithmetic.
    pub fn eigenvalue_exact(&self) -> u64 {
        let n = self.n as u64;
        n * (n + self.m as u64 - 1)
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue_exact() as f64
    }

    /// Dimension `N` of the degree-`n` eigenspace,
    /// `binom(n+m-1, m-1) + binom(n+m-2, m-1)`.
    pub fn dimension_exact(&self) -> u128 {
        let n = self.n as u128;
        let m = self.m as u128;
        if n == 0 {
            return 1;
        }
        binomial(n + m - 1, m - 1) + binomial(n + m - 2, m - 1)
    }

    pub fn dimension(&self) -> f64 {
        self.dimension_exact() as f64
    }

    /// `alpha = (m-2)/2`, the Jacobi parameter of `Q_n^m`.
    pub fn alpha(&self) -> f64 {
        (self.m as f64 - 2.0) / 2.0
    }

    /// `E/m`, the variance of each gradient coordinate.
    pub fn gradient_scale(&self) -> f64 {
        self.eigenvalue() / self.m as f64
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `Gamma(k/2)` for a positive integer `k`, by the exact recursions
/// `Gamma(1) = 1`, `Gamma(1/2) = sqrt(pi)`, `Gamma(x+1) = x Gamma(x)`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half(0) is a pole");
    let mut x = if k % 2 == 0 { 1.0 } else { 0.5 };
    let mut g = if k % 2 == 0 { 1.0 } else { PI.sqrt() };
    while 2.0 * x < k as f64 - 0.5 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `n! / (n+k)!` as a direct product.
pub(crate) fn falling_ratio(n: u32, k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc / (n + j) as f64)
}

/// `C~ = 2^alpha Gamma(alpha+1)`, the inverse of `lim J_alpha(phi)/phi^alpha`.
pub fn c_tilde(m: u32) -> f64 {
    let alpha = (m as f64 - 2.0) / 2.0;
    2f64.powf(alpha) * gamma_half(m)
}

/// Rate of the remainder in the Leray variance asymptotics:
/// `log(n)/n^2` on S^2 and `n^-m` otherwise.
pub fn epsilon_rate(m: u32, n: u32) -> f64 {
    let nf = n as f64;
    if m == 2 {
        nf.ln() / (nf * nf)
    } else {
        nf.powi(-(m as i32))
    }
}

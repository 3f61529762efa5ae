use serde::{Deserialize, Serialize};

use super::SphereModel;
use crate::{Error, Result};

/// Value and first two derivatives of `Q_n^m` at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyEval {
    pub t: f64,
    pub q: f64,
    pub dq: f64,
    pub d2q: f64,
}

fn check_domain(t: f64) -> Result<f64> {
    if !t.is_finite() || t.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain { what: "t", value: t });
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// `Q_n^m(t)` for any integer `m >= 2` (also used internally with the
/// shifted dimensions `m+2`, `m+4` that carry the derivatives).
///
/// The three-term recurrence is run directly on the normalized values:
/// with `lambda = (m-1)/2`,
/// `Q_k = 2(k+lambda-1)/(k+2lambda-1) t Q_{k-1} - (k-1)/(k+2lambda-1) Q_{k-2}`.
/// Nothing grows with `k`, so there is no overflow at large degree.
pub fn q_normalized(m: u32, n: u32, t: f64) -> f64 {
    if t == 1.0 {
        return 1.0;
    }
    if t == -1.0 {
        return if n % 2 == 0 { 1.0 } else { -1.0 };
    }
    if n == 0 {
        return 1.0;
    }
    let two_lambda = m as f64 - 1.0;
    let mut prev = 1.0;
    let mut cur = t;
    for k in 2..=n {
        let k = k as f64;
        let denom = k + two_lambda - 1.0;
        let next = (2.0 * k + two_lambda - 2.0) / denom * t * cur - (k - 1.0) / denom * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `1 - Q_n^m(cos theta)` without cancellation near the poles.
///
/// Near `theta = 0` the hypergeometric form
/// `Q = 2F1(-n, n+m-1; m/2; sin^2(theta/2))` is summed directly, its terms
/// shrinking geometrically while `n (n+m-1) sin^2(theta/2)` is small.
/// Near `theta = pi` the result is `1 - (-1)^n Q(pi - theta)`.
pub fn one_minus_q(m: u32, n: u32, theta: f64) -> f64 {
    let x = (0.5 * theta).sin().powi(2);
    let nn = n as f64;
    let b = nn + m as f64 - 1.0;
    if nn * b * x < 0.25 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=n {
            let k = k as f64;
            term *= (k - 1.0 - nn) * (b + k - 1.0) / ((0.5 * m as f64 + k - 1.0) * k) * x;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return -sum;
    }
    if n % 2 == 0 && theta > std::f64::consts::FRAC_PI_2 {
        return one_minus_q(m, n, std::f64::consts::PI - theta);
    }
    1.0 - q_normalized(m, n, theta.cos())
}

/// Normalized ultraspherical polynomial `Q_n^m(t) = P_n^alpha(t) / P_n^alpha(1)`.
pub fn gegenbauer_q(model: SphereModel, t: f64) -> Result<f64> {
    let t = check_domain(t)?;
    Ok(q_normalized(model.m(), model.n(), t))
}

/// `Q_n^m` with its first and second derivatives.
///
/// Derivatives use the shift identity `d/dt Q_n^m = (E/m) Q_{n-1}^{m+2}`,
/// which follows from `d/dt C_n^lambda = 2 lambda C_{n-1}^{lambda+1}` after
/// normalizing at `t = 1`. It is regular at `t = +-1`, where it reproduces
/// the limits `dq(1) = E/m` and `dq(-1) = (-1)^(n+1) E/m`.
pub fn gegenbauer_eval(model: SphereModel, t: f64) -> Result<PolyEval> {
    let t = check_domain(t)?;
    let (m, n) = (model.m(), model.n());
    let q = q_normalized(m, n, t);
    let (dq, d2q) = match n {
        0 => (0.0, 0.0),
        1 => (1.0, 0.0),
        _ => {
            let e = model.eigenvalue();
            let first = e / m as f64;
            // E' / (m+2) for the shifted family (m+2, n-1).
            let second = ((n - 1) as f64 * (n + m) as f64) / (m + 2) as f64;
            (
                first * q_normalized(m + 2, n - 1, t),
                first * second * q_normalized(m + 4, n - 2, t),
            )
        }
    };
    Ok(PolyEval { t, q, dq, d2q })
}

/// First derivative from the degree recurrence
/// `(1-t^2) P_n' = (n+alpha) P_{n-1} - n t P_n`, which for the normalized
/// family reads `(1-t^2) Q_n' = n (Q_{n-1} - t Q_n)`.
///
/// Singular at the endpoints; the ODE limits are returned there.
pub fn derivative_via_degree_recurrence(model: SphereModel, t: f64) -> Result<f64> {
    let t = check_domain(t)?;
    let (m, n) = (model.m(), model.n());
    if n == 0 {
        return Ok(0.0);
    }
    let w = 1.0 - t * t;
    if w == 0.0 {
        let v = model.gradient_scale();
        return Ok(if t > 0.0 || n % 2 == 1 { v } else { -v });
    }
    let qn = q_normalized(m, n, t);
    let qn1 = q_normalized(m, n - 1, t);
    Ok(n as f64 * (qn1 - t * qn) / w)
}

use std::f64::consts::PI;

use super::gamma_half;
use crate::{Error, Result};

/// Bessel function of the first kind `J_alpha(x)` for the orders that
/// arise from spheres, `alpha = (m-2)/2`: non-negative integers and
/// half-integers.
///
/// Small arguments use the power series. Larger arguments use the
/// spherical Bessel closed forms for half-integer orders and Miller's
/// backward recurrence, normalized by `J_0 + 2 sum J_2k = 1`, for
/// integer orders.
pub fn bessel_j(alpha: f64, x: f64) -> Result<f64> {
    let twice = 2.0 * alpha;
    if !(alpha >= 0.0) || twice.fract() != 0.0 || twice > 40.0 {
        return Err(Error::UnsupportedOrder(alpha));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain { what: "x", value: x });
    }
    let twice = twice as u32;
    if x == 0.0 {
        return Ok(if twice == 0 { 1.0 } else { 0.0 });
    }
    if x < 1.0 || x < 0.5 * alpha {
        return Ok(power_series(twice, x));
    }
    if twice % 2 == 1 {
        Ok(half_integer(twice / 2, x))
    } else {
        Ok(miller(twice / 2, x))
    }
}

fn power_series(twice: u32, x: f64) -> f64 {
    let alpha = twice as f64 / 2.0;
    let half = 0.5 * x;
    let y = -half * half;
    // First term (x/2)^alpha / Gamma(alpha+1).
    let lead = half.powf(alpha) / gamma_half(twice + 2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let k = k as f64;
        term *= y / (k * (k + alpha));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// `J_{l+1/2}(x) = sqrt(2x/pi) j_l(x)` with the spherical Bessel `j_l`
/// from the upward recurrence, which is stable for `x > l`. Orders above
/// the argument fall back to the series.
fn half_integer(l: u32, x: f64) -> f64 {
    if (l as f64) > x {
        return power_series(2 * l + 1, x);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let value = if l == 0 {
        j0
    } else {
        let mut prev = j0;
        let mut cur = s / (x * x) - c / x;
        for k in 1..l {
            let next = (2 * k + 1) as f64 / x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    };
    (2.0 * x / PI).sqrt() * value
}

fn miller(order: u32, x: f64) -> f64 {
    let start = (x + 20.0 + 6.0 * x.sqrt()).max(order as f64 + 20.0) as u32;
    let start = start + start % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    let mut k = start;
    while k > 0 {
        // cur holds J_k (unnormalized); produce J_{k-1}.
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k == order {
            wanted = cur;
        }
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    if order == 0 {
        wanted = cur;
    }
    wanted / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert!(bessel_j(0.5, PI).unwrap().abs() < 1e-15);
        assert!(bessel_j(0.0, 2.404825557695773).unwrap().abs() < 1e-9);
    }

    /// Power series summed independently, used only as an oracle.
    fn series_oracle(alpha: f64, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = (0.5 * x).powf(alpha) / gamma_half((2.0 * alpha + 2.0) as u32);
        for k in 0..400 {
            sum += term;
            let k = k as f64;
            term *= -(0.25 * x * x) / ((k + 1.0) * (k + 1.0 + alpha));
        }
        sum
    }

    #[test]
    fn first_zero_of_j0_by_bisection_on_series() {
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series_oracle(0.0, lo) * series_oracle(0.0, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((root - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j(0.0, root).unwrap().abs() < 1e-12);
    }

    #[test]
    fn agrees_with_series_at_moderate_arguments() {
        for twice in 0..6u32 {
            let alpha = twice as f64 / 2.0;
            for i in 1..=120 {
                let x = 0.1 * i as f64;
                let a = bessel_j(alpha, x).unwrap();
                let b = series_oracle(alpha, x);
                assert!((a - b).abs() < 1e-12, "alpha={alpha} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        for i in 1..500 {
            let x = 0.37 * i as f64;
            let j12 = (2.0 / (PI * x)).sqrt() * x.sin();
            let j32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(0.5, x).unwrap() - j12).abs() < 1e-13);
            assert!((bessel_j(1.5, x).unwrap() - j32).abs() < 1e-13);
        }
    }

    #[test]
    fn wronskian_like_recurrence_holds_at_large_argument() {
        // J_{a-1} + J_{a+1} = (2a/x) J_a
        for x in [15.0, 40.0, 123.4, 250.0] {
            for a in 1..4 {
                let a = a as f64;
                let lhs = bessel_j(a - 1.0, x).unwrap() + bessel_j(a + 1.0, x).unwrap();
                let rhs = 2.0 * a / x * bessel_j(a, x).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "x={x} a={a}");
            }
        }
    }

    #[test]
    fn bounded_by_one() {
        for twice in 0..8u32 {
            for i in 0..3000 {
                let x = 0.1 * i as f64;
                assert!(bessel_j(twice as f64 / 2.0, x).unwrap().abs() <= 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn rejects_unsupported_orders() {
        assert!(bessel_j(0.3, 1.0).is_err());
        assert!(bessel_j(-1.0, 1.0).is_err());
        assert!(bessel_j(1.0, -2.0).is_err());
    }
}

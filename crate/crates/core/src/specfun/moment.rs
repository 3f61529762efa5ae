use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use super::{falling_ratio, gamma_half, gegenbauer_eval, q_normalized, SphereModel};
use crate::quadrature::mu_theta_integral;
use crate::{Error, Result};

/// Integrands of the `mu`-moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    /// `Q^2`
    Q2,
    /// `Q^4`
    Q4,
    /// `Q'^2`
    DQ2,
    /// `Q'^4 (1-t^2)^2`
    DQ4Weighted,
    /// `Q''^2 (1-t^2)^2`
    D2Q2Weighted,
}

impl MomentKind {
    pub const ALL: [MomentKind; 5] = [
        MomentKind::Q2,
        MomentKind::Q4,
        MomentKind::DQ2,
        MomentKind::DQ4Weighted,
        MomentKind::D2Q2Weighted,
    ];
}

pub const DEFAULT_PANELS_PER_OSCILLATION: u32 = 16;
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-10;

/// `int g dmu` for the chosen integrand, by composite Gauss-Legendre in
/// `theta` with 16 panels per oscillation and panel doubling.
pub fn moment_integral(model: SphereModel, kind: MomentKind) -> f64 {
    moment_integral_with(
        model,
        kind,
        DEFAULT_PANELS_PER_OSCILLATION,
        DEFAULT_RELATIVE_TOLERANCE,
    )
    .expect("polynomial moment integrals converge")
}

pub fn moment_integral_with(
    model: SphereModel,
    kind: MomentKind,
    per_oscillation: u32,
    rel_tol: f64,
) -> Result<f64> {
    let (m, n) = (model.m(), model.n());
    let g = |theta: f64| {
        let t = theta.cos();
        match kind {
            MomentKind::Q2 => q_normalized(m, n, t).powi(2),
            MomentKind::Q4 => q_normalized(m, n, t).powi(4),
            _ => {
                let p = gegenbauer_eval(model, t).expect("t = cos theta is in range");
                let w = theta.sin().powi(2);
                match kind {
                    MomentKind::DQ2 => p.dq * p.dq,
                    MomentKind::DQ4Weighted => (p.dq * p.dq * w).powi(2),
                    _ => (p.d2q * w).powi(2),
                }
            }
        }
    };
    Ok(mu_theta_integral(m, n, g, 0.0, PI, per_oscillation, rel_tol)?.value)
}

/// `2^m pi^(m/2) Gamma(m/2) / (2n+m-1) * n!/(n+m-2)!`, the exact value of
/// `int Q^2 dmu`. The factorial ratio is a direct product of `m-2` factors,
/// so it never overflows and stays accurate to rounding.
pub fn second_moment_closed_form(model: SphereModel) -> f64 {
    let (m, n) = (model.m(), model.n());
    let mf = m as f64;
    2f64.powi(m as i32) * PI.powf(mf / 2.0) * gamma_half(m) / (2.0 * n as f64 + mf - 1.0)
        * falling_ratio(n, m - 2)
}

/// Step of the geometric scan in [`find_c0`].
const C0_GRID_START: f64 = 1e-4;
const C0_GRID_FACTOR: f64 = 1.01;

/// Smallest `c` on the grid `1e-4 * 1.01^k` such that `|Q_n^m| <= eps0` on
/// `[-1 + c/n^2, 1 - c/n^2]`. The sup is taken over a `theta`-grid of
/// spacing `pi/(64n)` together with the interval endpoint; by parity only
/// `[theta_c, pi/2]` is scanned.
pub fn find_c0(model: SphereModel, eps0: f64) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::Domain { what: "eps0", value: eps0 });
    }
    let (m, n) = (model.m(), model.n());
    if n == 0 {
        return Err(Error::EmptyInterval { n, eps0 });
    }
    let n2 = (n as f64).powi(2);
    let h = PI / (64.0 * n as f64);
    let count = (FRAC_PI_2 / h).floor() as usize;
    let mut grid: Vec<f64> = (0..=count)
        .map(|j| q_normalized(m, n, (j as f64 * h).cos()).abs())
        .collect();
    grid.push(q_normalized(m, n, 0.0).abs());
    // suffix maxima
    for j in (0..grid.len() - 1).rev() {
        grid[j] = grid[j].max(grid[j + 1]);
    }
    let mut c = C0_GRID_START;
    while c < n2 {
        let t = 1.0 - c / n2;
        let theta = t.acos();
        let first = (theta / h).ceil() as usize;
        let interior = grid.get(first.min(grid.len() - 1)).copied().unwrap_or(0.0);
        let sup = q_normalized(m, n, t).abs().max(interior);
        if sup <= eps0 {
            return Ok(c);
        }
        c *= C0_GRID_FACTOR;
    }
    Err(Error::EmptyInterval { n, eps0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(m: u32, n: u32) -> SphereModel {
        SphereModel::new(m, n).unwrap()
    }

    #[test]
    fn examples() {
        let v = moment_integral(model(2, 10), MomentKind::Q2);
        assert!((v - 4.0 * PI / 21.0).abs() < 1e-8);
        let v = moment_integral(model(2, 0), MomentKind::Q2);
        assert!((v - 4.0 * PI).abs() < 1e-10);
        assert!((second_moment_closed_form(model(2, 10)) - 4.0 * PI / 21.0).abs() < 1e-15);
        assert!((second_moment_closed_form(model(2, 0)) - 4.0 * PI).abs() < 1e-14);
        for (m, n) in [(3, 8), (4, 5)] {
            let q = moment_integral(model(m, n), MomentKind::Q2);
            let c = second_moment_closed_form(model(m, n));
            assert!(((q - c) / c).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_matches_quadrature_sweep() {
        for m in 2..=5 {
            for n in 1..=40 {
                let md = model(m, n);
                let q = moment_integral(md, MomentKind::Q2);
                let c = second_moment_closed_form(md);
                assert!(((q - c) / c).abs() < 1e-8, "m={m} n={n}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn closed_form_at_large_degree() {
        // Independent route: Gamma ratio through logarithms of the factors.
        let md = model(5, 160);
        let log_ratio: f64 = (161..=163).map(|k| -(k as f64).ln()).sum();
        let direct = 32.0 * PI.powf(2.5) * gamma_half(5) / 324.0 * log_ratio.exp();
        let c = second_moment_closed_form(md);
        assert!(((c - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn derivative_moment_of_linear_polynomial() {
        // Q_1 = t, Q' = 1: int dmu = |S^1| * 2 on S^2.
        let v = moment_integral(model(2, 1), MomentKind::DQ2);
        assert!((v - 4.0 * PI).abs() < 1e-10);
        // (1-t^2)^2 against dmu on S^2: 2 pi * 16/15.
        let v = moment_integral(model(2, 1), MomentKind::DQ4Weighted);
        assert!((v - 2.0 * PI * 16.0 / 15.0).abs() < 1e-10);
        assert!(moment_integral(model(2, 1), MomentKind::D2Q2Weighted).abs() < 1e-14);
    }

    #[test]
    fn c0_examples() {
        for (m, n) in [(2, 40), (3, 40)] {
            let md = model(m, n);
            let c = find_c0(md, 0.9).unwrap();
            // independent fine-grid verification of the sup
            let t_max = 1.0 - c / (n as f64).powi(2);
            let theta_c = t_max.acos();
            let mut sup: f64 = 0.0;
            for i in 0..=20_000 {
                let theta = theta_c + (PI - 2.0 * theta_c) * i as f64 / 20_000.0;
                sup = sup.max(q_normalized(m, n, theta.cos()).abs());
            }
            assert!(sup <= 0.9 + 1e-3, "m={m}: sup {sup}");
            let loose = find_c0(md, 0.999).unwrap();
            assert!(loose <= c);
        }
    }

    #[test]
    fn c0_is_order_one_and_stable_in_degree() {
        let cs: Vec<f64> = [20, 40, 80, 160]
            .iter()
            .map(|&n| find_c0(model(2, n), 0.9).unwrap())
            .collect();
        for c in &cs {
            assert!(*c > 0.05 && *c < 1.0, "{cs:?}");
        }
    }

    #[test]
    fn c0_errors() {
        assert!(find_c0(model(2, 10), 0.0).is_err());
        assert!(find_c0(model(2, 10), 1.0).is_err());
        assert!(find_c0(model(2, 0), 0.5).is_err());
    }
}

//! Growth rates of the moments of `Q_n^m` and its derivatives, and the
//! Hilb envelope.

use std::f64::consts::PI;

use sphere_nodal::specfun::{epsilon_rate, gegenbauer_q, hilb_approx, moment_integral, MomentKind};
use sphere_nodal::SphereModel;

fn model(m: u32, n: u32) -> SphereModel {
    SphereModel::new(m, n).unwrap()
}

/// Gamma(m/2) for the few dimensions used here.
fn gamma_half_table(m: u32) -> f64 {
    match m {
        2 => 1.0,
        3 => PI.sqrt() / 2.0,
        4 => 1.0,
        5 => 0.75 * PI.sqrt(),
        _ => unreachable!(),
    }
}

#[test]
fn second_moment_scaling_limit() {
    for m in [2, 3] {
        let limit = 2f64.powi(m as i32 - 1) * PI.powf(m as f64 / 2.0) * gamma_half_table(m);
        let n = 80u32;
        let scaled = (n as f64).powi(m as i32 - 1) * moment_integral(model(m, n), MomentKind::Q2);
        assert!((scaled / limit - 1.0).abs() <= 0.03, "m={m}: {scaled} vs {limit}");
    }
}

#[test]
fn fourth_moment_slope() {
    let ns = [20u32, 40, 80, 160];
    let pts: Vec<(f64, f64)> =
        ns.iter().map(|&n| ((n as f64).ln(), moment_integral(model(2, n), MomentKind::Q4).ln())).collect();
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((-2.3..=-1.8).contains(&slope), "slope {slope}");
    // and the bound against eps(2; n) stays flat
    let r: Vec<f64> = ns.iter().map(|&n| moment_integral(model(2, n), MomentKind::Q4) / epsilon_rate(2, n)).collect();
    assert!(r.iter().all(|&x| x <= 1.5 * r[0]), "{r:?}");
}

/// The moment over its proven rate, fitted at n = 20, never grows past 1.5x
/// up to n = 160.
fn bounded_by_rate(m: u32, kind: MomentKind, rate: impl Fn(f64) -> f64) {
    let ratio = |n: u32| moment_integral(model(m, n), kind) / rate(n as f64);
    let c = ratio(20);
    for n in [30, 40, 60, 80, 120, 160] {
        let r = ratio(n);
        assert!(r <= 1.5 * c, "m={m} {kind:?} n={n}: {r} vs {c}");
    }
}

#[test]
fn derivative_moments_bounded() {
    // int Q'^2 << log n / n^(m-4)
    bounded_by_rate(2, MomentKind::DQ2, |n| n * n * n.ln());
    bounded_by_rate(3, MomentKind::DQ2, |n| n * n.ln());
    // int Q'^4 (1-t^2)^2 << n^2 log n (m = 2), n^(4-m) (m >= 3)
    bounded_by_rate(2, MomentKind::DQ4Weighted, |n| n * n * n.ln());
    bounded_by_rate(3, MomentKind::DQ4Weighted, |n| n);
    // int Q''^2 (1-t^2)^2 << n^(5-m)
    bounded_by_rate(2, MomentKind::D2Q2Weighted, |n| n.powi(3));
    bounded_by_rate(3, MomentKind::D2Q2Weighted, |n| n * n);
}

#[test]
fn hilb_envelope_on_the_grid() {
    for m in [2, 3] {
        for n in [30, 50, 80] {
            let md = model(m, n);
            let lo = 5.0 / n as f64;
            for i in 0..=400 {
                let theta = lo + (PI / 2.0 - lo) * i as f64 / 400.0;
                let h = hilb_approx(md, theta).unwrap();
                let q = gegenbauer_q(md, theta.cos()).unwrap();
                assert!((q - h.approx).abs() <= h.error_envelope, "m={m} n={n} theta={theta}");
            }
        }
    }
}

//! Composite Gauss-Legendre quadrature with panel doubling.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::{Error, Result};

/// Nodes per panel.
pub const NODES_PER_PANEL: usize = 8;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_k` from the Chebyshev-like guesses.
    pub fn new(k: usize) -> Self {
        assert!(k >= 1);
        let mut nodes = vec![0.0; k];
        let mut weights = vec![0.0; k];
        for i in 0..(k + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(k, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(k, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[k - 1 - i] = x;
            weights[i] = w;
            weights[k - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(NODES_PER_PANEL))
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sum of the standard rule over `panels` equal panels of `[a, b]`.
pub fn composite<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    composite_with_magnitude(f, a, b, panels).0
}

/// The composite sum together with the same rule applied to `|f|`.
fn composite_with_magnitude<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
) -> (f64, f64) {
    let rule = GaussLegendre::standard();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    let mut magnitude = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        let mut part = 0.0;
        for (x, w) in rule.mapped(lo, hi) {
            let v = w * f(x);
            part += v;
            magnitude += v.abs();
        }
        total += part;
    }
    (total, magnitude)
}

/// Outcome of [`integrate_doubling`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub panels: usize,
    pub last_change: f64,
}

/// Maximum number of panel doublings before giving up.
pub const MAX_DOUBLINGS: u32 = 14;

/// Composite rule starting from `panels` panels, doubled until two successive
/// values agree to `rel_tol`. For integrals that cancel to (nearly) zero the
/// test falls back to the rounding floor `1e-14 * int |f|`.
pub fn integrate_doubling<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    rel_tol: f64,
) -> Result<Integral> {
    let mut panels = panels.max(1);
    let (mut prev, _) = composite_with_magnitude(&mut f, a, b, panels);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let (cur, magnitude) = composite_with_magnitude(&mut f, a, b, panels);
        let change = (cur - prev).abs();
        if change <= rel_tol * cur.abs() || change <= 1e-14 * magnitude || change < 1e-300 {
            return Ok(Integral { value: cur, panels, last_change: change });
        }
        prev = cur;
    }
    Err(Error::Invalid(format!(
        "quadrature on [{a}, {b}] did not reach relative tolerance {rel_tol} with {panels} panels"
    )))
}

/// Number of panels of width at most `2 pi / (per_oscillation * n)` covering
/// an interval of length `len` in `theta`.
pub fn panels_for(len: f64, n: u32, per_oscillation: u32) -> usize {
    let width = 2.0 * PI / (per_oscillation as f64 * n.max(1) as f64);
    ((len / width).ceil() as usize).max(1)
}

/// `2 pi^(m/2) / Gamma(m/2)`, the constant in front of the density of `mu`.
pub fn mu_prefactor(m: u32) -> f64 {
    2.0 * PI.powf(m as f64 / 2.0) / crate::specfun::gamma_half(m)
}

/// `int g dmu` with `g` given as a function of `theta = arccos t`, over
/// `theta` in `[a, b]`. Written in the angle
/// the weight becomes `mu_prefactor(m) sin^(m-1) theta`, which is smooth at the
/// poles so no endpoint treatment is needed. Panels start at the width
/// resolving `per_oscillation` panels per period of a degree-`n` harmonic.
pub fn mu_theta_integral<F: FnMut(f64) -> f64>(
    m: u32,
    n: u32,
    mut g: F,
    a: f64,
    b: f64,
    per_oscillation: u32,
    rel_tol: f64,
) -> Result<Integral> {
    let c = mu_prefactor(m);
    let k = m as i32 - 1;
    let panels = panels_for(b - a, n, per_oscillation);
    let r = integrate_doubling(|th| g(th) * th.sin().powi(k), a, b, panels, rel_tol)?;
    Ok(Integral { value: c * r.value, last_change: c * r.last_change, ..r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        for deg in 0..16 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(deg))
                .sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn known_nodes() {
        let rule = GaussLegendre::new(2);
        assert!((rule.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let rule = GaussLegendre::new(3);
        assert!(rule.nodes[1].abs() < 1e-15);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_integral() {
        let r = integrate_doubling(|x| (50.0 * x).cos(), 0.0, PI, 4, 1e-12).unwrap();
        assert!((r.value - (50.0 * PI).sin() / 50.0).abs() < 1e-12);
    }

    #[test]
    fn mu_total_mass_is_sphere_volume() {
        for m in 2..7 {
            // total mass is |S^m| = 2 pi^((m+1)/2) / Gamma((m+1)/2)
            let volume = 2.0 * PI.powf((m as f64 + 1.0) / 2.0) / crate::specfun::gamma_half(m + 1);
            let r = mu_theta_integral(m, 1, |_| 1.0, 0.0, PI, 16, 1e-12).unwrap();
            assert!((r.value - volume).abs() < 1e-10 * volume, "m={m} {r:?}");
        }
        assert!((mu_prefactor(2) - 2.0 * PI).abs() < 1e-15);
        assert!((mu_prefactor(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn panel_count() {
        assert_eq!(panels_for(PI, 10, 16), 80);
        assert_eq!(panels_for(0.0, 10, 16), 1);
    }
}

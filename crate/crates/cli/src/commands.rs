use std::f64::consts::PI;

use sphere_nodal::covariance::{blocks_at, degenerate_thetas, finite_difference_blocks, GaussianJoint};
use sphere_nodal::moments::{
    kernel_k_with, leray_report, volume_second_moment_with, KernelOptions, SingularSplit,
};
use sphere_nodal::nodal::{monte_carlo_experiment, ExperimentReport};
use sphere_nodal::specfun::{epsilon_rate, gamma_half, moment_integral, second_moment_closed_form, MomentKind};
use sphere_nodal::{Error, SphereModel};

use crate::table::{Cell, Table};
use crate::{CliError, CommandKind, RunConfig};

/// Step of the finite-difference oracle in `covariance-check`.
const FD_STEP: f64 = 1e-4;

pub fn run_command(config: &RunConfig) -> Result<Table, CliError> {
    match config.command.expect("resolved config has a command") {
        CommandKind::MomentsTable => moments_table(config),
        CommandKind::LerayVariance => leray_variance(config),
        CommandKind::VolumeVariance => volume_variance(config),
        CommandKind::McVerify => mc_verify(config),
        CommandKind::CovarianceCheck => covariance_check(config),
        CommandKind::KernelProfile => kernel_profile(config),
    }
}

fn model(m: u32, n: u32) -> Result<SphereModel, CliError> {
    SphereModel::new(m, n).map_err(|e| module(e, m, n))
}

fn module(error: Error, m: u32, n: u32) -> CliError {
    CliError::Module { error, context: format!("m = {m}, n = {n}") }
}

fn moments_table(c: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "m",
        "n",
        "q2_quad",
        "q2_closed",
        "q4",
        "dq2",
        "dq4_weighted",
        "d2q2_weighted",
        "q2_scaled",
        "q4_over_eps",
        "dq2_over_rate",
    ]);
    let m = c.m;
    let limit = 2f64.powi(m as i32 - 1) * PI.powf(m as f64 / 2.0) * gamma_half(m);
    for &n in &c.n {
        let md = model(m, n)?;
        let q2 = moment_integral(md, MomentKind::Q2);
        let q4 = moment_integral(md, MomentKind::Q4);
        let dq2 = moment_integral(md, MomentKind::DQ2);
        let nf = n as f64;
        let (q4_scaled, dq2_scaled) = if n >= 2 {
            (q4 / epsilon_rate(m, n), dq2 / (nf.ln() * nf.powi(4 - m as i32)))
        } else {
            (f64::NAN, f64::NAN)
        };
        t.push(vec![
            m.into(),
            n.into(),
            q2.into(),
            second_moment_closed_form(md).into(),
            q4.into(),
            dq2.into(),
            moment_integral(md, MomentKind::DQ4Weighted).into(),
            moment_integral(md, MomentKind::D2Q2Weighted).into(),
            (nf.powi(m as i32 - 1) * q2 / limit).into(),
            q4_scaled.into(),
            dq2_scaled.into(),
        ]);
    }
    Ok(t)
}

fn leray_variance(c: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&["m", "n", "N", "var_quad", "var_asym", "ratio"]);
    for &n in &c.n {
        let md = model(c.m, n)?;
        let r = leray_report(md, &c.quadrature()).map_err(|e| module(e, c.m, n))?;
        t.push(vec![
            c.m.into(),
            n.into(),
            md.dimension().into(),
            r.variance.into(),
            r.theory_asymptotic.into(),
            r.ratio.into(),
        ]);
    }
    Ok(t)
}

fn volume_variance(c: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "m",
        "n",
        "N",
        "E",
        "expectation",
        "second_moment",
        "variance",
        "theory",
        "ratio",
        "singular_contribution",
        "nonsingular_contribution",
        "singular_bound",
        "singular_mass",
        "eps_rate",
        "singular_budget_ratio",
        "mc_std_error",
        "c0",
    ]);
    let opts = KernelOptions { paths: c.mc_paths, seed: c.seed, estimator: c.kernel.into(), max_std_error: None };
    for &n in &c.n {
        let md = model(c.m, n)?;
        let r = volume_second_moment_with(md, &c.quadrature(), &opts, blocks_at).map_err(|e| module(e, c.m, n))?;
        let e = md.eigenvalue();
        let eps = if n >= 2 { epsilon_rate(c.m, n) } else { f64::NAN };
        t.push(vec![
            c.m.into(),
            n.into(),
            md.dimension().into(),
            e.into(),
            r.expectation.into(),
            r.second_moment.into(),
            r.variance.into(),
            r.theory_asymptotic.into(),
            r.ratio.into(),
            r.singular_contribution.into(),
            r.nonsingular_contribution.into(),
            r.singular_bound.into(),
            r.singular_mass.into(),
            eps.into(),
            (r.singular_contribution / (e * eps)).into(),
            r.mc_std_error.into(),
            r.c0.into(),
        ]);
    }
    Ok(t)
}

pub const MC_COLUMNS: [&str; 19] = [
    "n",
    "mesh_level",
    "edge_length_max",
    "samples",
    "seed",
    "mean_z",
    "var_z",
    "se_z",
    "mean_l",
    "var_l",
    "se_l",
    "near_singular",
    "theory_ez",
    "theory_el",
    "theory_var_l",
    "exact_var_l",
    "ratio_z",
    "ratio_l",
    "ratio_var_l",
];

fn report_row(r: &ExperimentReport) -> Vec<Cell> {
    vec![
        r.model.n().into(),
        r.mesh_level.into(),
        r.edge_length_max.into(),
        r.sample_count.into(),
        r.seed.into(),
        r.mean_z.into(),
        r.var_z.into(),
        r.se_z.into(),
        r.mean_l.into(),
        r.var_l.into(),
        r.se_l.into(),
        r.near_singular.into(),
        r.theory_ez.into(),
        r.theory_el.into(),
        r.theory_var_l.into(),
        r.exact_var_l.into(),
        r.ratio_z.into(),
        r.ratio_l.into(),
        r.ratio_var_l.into(),
    ]
}

fn mc_verify(c: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&MC_COLUMNS);
    for &n in &c.n {
        let r = monte_carlo_experiment(model(c.m, n)?, c.mesh_level, c.samples, c.seed).map_err(|e| module(e, c.m, n))?;
        for w in &r.warnings {
            t.note("warning", format!("n = {n}: {w}"));
        }
        t.push(report_row(&r));
    }
    Ok(t)
}

fn theta_grid(points: u32) -> Vec<f64> {
    (0..points).map(|i| 0.05 + (PI - 0.1) * i as f64 / (points - 1) as f64).collect()
}

fn covariance_check(c: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "m",
        "n",
        "thetas",
        "det_identity_max_rel",
        "fd_max_rel",
        "degenerate_nodes",
        "min_omega_eigen_rel",
    ]);
    let grid = theta_grid(c.points);
    for &n in &c.n {
        let md = model(c.m, n)?;
        let (mut det_err, mut fd_err, mut min_eig, mut degenerate) = (0.0f64, 0.0f64, f64::INFINITY, 0u64);
        for &theta in &grid {
            let b = blocks_at(md, theta).map_err(|e| module(e, c.m, n))?;
            let j = GaussianJoint::new(&b).map_err(|e| module(e, c.m, n))?;
            let det = j.sigma_det();
            det_err = det_err.max((det - j.a_det * j.omega_det).abs() / det.abs().max(1.0));
            let f = finite_difference_blocks(md, theta, FD_STEP).map_err(|e| module(e, c.m, n))?;
            for (got, want) in [(f.u, b.u), (f.d_long, b.d_long), (f.h_long, b.h_long), (f.h_trans, b.h_trans)] {
                fd_err = fd_err.max((got - want).abs() / b.scale);
            }
            fd_err = fd_err.max(f.off_pattern / b.scale);
            min_eig = min_eig.min(j.min_eigenvalue() / b.scale);
            degenerate += j.degenerate as u64;
        }
        t.push(vec![
            c.m.into(),
            n.into(),
            c.points.into(),
            det_err.into(),
            fd_err.into(),
            degenerate.into(),
            min_eig.into(),
        ]);
    }
    // smallest n from which no degree up to the largest requested one has a
    // degenerate node on the grid
    let top = *c.n.iter().max().expect("nonempty sweep");
    let mut safe = None;
    for n in (1..=top).rev() {
        let bad = degenerate_thetas(model(c.m, n)?, &grid).map_err(|e| module(e, c.m, n))?;
        if !bad.is_empty() {
            break;
        }
        safe = Some(n);
    }
    match safe {
        Some(n) => t.note("smallest_safe_n", n),
        None => t.note("smallest_safe_n", format!("none up to {top}")),
    }
    Ok(t)
}

fn kernel_profile(c: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(&["m", "n", "theta", "u", "kernel", "std_error", "bound", "singular", "degenerate"]);
    let opts = KernelOptions { paths: c.mc_paths, seed: c.seed, estimator: c.kernel.into(), max_std_error: None };
    for &n in &c.n {
        let md = model(c.m, n)?;
        let split = SingularSplit::new(md, c.eps0).map_err(|e| module(e, c.m, n))?;
        let e = md.eigenvalue();
        for i in 0..c.points {
            let theta = PI * (i as f64 + 0.5) / c.points as f64;
            let b = blocks_at(md, theta).map_err(|e| module(e, c.m, n))?;
            let degenerate = GaussianJoint::new(&b).map_err(|e| module(e, c.m, n))?.degenerate;
            let k = kernel_k_with(&b, &opts, i as u64, false).map_err(|e| module(e, c.m, n))?;
            let singular = theta < split.theta0 || theta > PI - split.theta0;
            t.push(vec![
                c.m.into(),
                n.into(),
                theta.into(),
                b.u.into(),
                k.value.into(),
                k.std_error.into(),
                (e / b.a_det().sqrt()).into(),
                singular.into(),
                degenerate.into(),
            ]);
        }
    }
    Ok(t)
}

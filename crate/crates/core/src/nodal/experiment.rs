use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{extract_from_values, leray_estimate_line, resolution_limit};
use crate::ensemble::{sample_indexed, HarmonicBasis, MeshBasis};
use crate::geometry::icosphere;
use crate::moments::{leray_expectation, leray_report, leray_variance_asymptotic, volume_expectation, QuadratureSpec};
use crate::stats::Accumulator;
use crate::{Error, Result, SphereModel};

/// Near-singular exclusions above this fraction are reported as a warning.
const EXCLUSION_WARNING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Also estimate the Leray measure (needs midpoint gradients).
    pub leray: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { leray: true }
    }
}

/// Monte Carlo statistics of nodal length `Z` and Leray measure `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: SphereModel,
    pub seed: u64,
    pub sample_count: u64,
    pub mesh_level: u32,
    pub edge_length_max: f64,
    pub mean_z: f64,
    pub var_z: f64,
    pub se_z: f64,
    /// Leray statistics over the samples that were not excluded; NaN when
    /// the Leray measure was not requested.
    pub mean_l: f64,
    pub var_l: f64,
    pub se_l: f64,
    pub leray_count: u64,
    pub near_singular: u64,
    pub theory_ez: f64,
    pub theory_el: f64,
    /// Leading-order asymptotic `Var L`.
    pub theory_var_l: f64,
    /// `Var L` from the exact second-moment integral.
    pub exact_var_l: f64,
    pub ratio_z: f64,
    pub ratio_l: f64,
    pub ratio_var_l: f64,
    pub warnings: Vec<String>,
}

pub fn monte_carlo_experiment(model: SphereModel, mesh_level: u32, samples: u64, seed: u64) -> Result<ExperimentReport> {
    monte_carlo_experiment_with(model, mesh_level, samples, seed, &ExperimentOptions::default())
}

/// Draws `samples` eigenfunctions on S^2 and measures each on the icosphere
/// of `mesh_level`. Sample `i` uses stream `(seed, i)` and the statistics
/// are merged in index order, so the report is independent of the thread
/// count.
pub fn monte_carlo_experiment_with(
    model: SphereModel,
    mesh_level: u32,
    samples: u64,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    if model.m() != 2 {
        return Err(Error::InvalidModel(format!("nodal experiments need m = 2, got m = {}", model.m())));
    }
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is needed".into()));
    }
    let mesh = icosphere(mesh_level)?;
    let basis = Arc::new(HarmonicBasis::new(model.n()));
    let mesh_basis = MeshBasis::new(&basis, &mesh);
    let run = |i: u64| -> (f64, Option<Result<f64>>) {
        let f = sample_indexed(&basis, seed, i);
        let values = mesh_basis.vertex_values(&f);
        let set = extract_from_values(&f, &mesh, &values, opts.leray);
        let l = opts.leray.then(|| leray_estimate_line(&f, &set));
        (set.total_length, l)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = (0..samples).map(run).collect();

    let (mut z, mut l) = (Accumulator::new(), Accumulator::new());
    let mut near_singular = 0;
    for (zi, li) in results {
        z.push(zi);
        match li {
            Some(Ok(v)) => l.push(v),
            Some(Err(Error::NearSingular { .. })) => near_singular += 1,
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    let mut warnings = Vec::new();
    if mesh.edge_length_max > resolution_limit(model.n()) {
        warnings.push(format!(
            "mesh edge {:.4} exceeds pi/(8n) = {:.4}",
            mesh.edge_length_max,
            resolution_limit(model.n())
        ));
    }
    if near_singular as f64 > EXCLUSION_WARNING * samples as f64 {
        warnings.push(format!("{near_singular} of {samples} samples excluded as near-singular"));
    }
    let nan_unless = |v: f64| if opts.leray { v } else { f64::NAN };
    let theory_ez = volume_expectation(model);
    let theory_el = leray_expectation(2);
    let theory_var_l = leray_variance_asymptotic(model);
    let exact_var_l = leray_report(model, &QuadratureSpec::default())?.variance;
    Ok(ExperimentReport {
        model,
        seed,
        sample_count: samples,
        mesh_level,
        edge_length_max: mesh.edge_length_max,
        mean_z: z.mean(),
        var_z: z.variance(),
        se_z: z.std_error(),
        mean_l: nan_unless(l.mean()),
        var_l: nan_unless(l.variance()),
        se_l: nan_unless(l.std_error()),
        leray_count: l.count(),
        near_singular,
        theory_ez,
        theory_el,
        theory_var_l,
        exact_var_l,
        ratio_z: z.mean() / theory_ez,
        ratio_l: nan_unless(l.mean() / theory_el),
        ratio_var_l: nan_unless(l.variance() / theory_var_l),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_experiment() {
        let model = SphereModel::new(2, 6).unwrap();
        let r = monte_carlo_experiment(model, 5, 60, 7).unwrap();
        assert_eq!(r.sample_count, 60);
        assert_eq!(r.leray_count + r.near_singular, 60);
        assert!((r.se_z - (r.var_z / 60.0).sqrt()).abs() < 1e-12 * r.se_z.max(1e-300));
        assert!((r.ratio_z - 1.0).abs() < 6.0 * r.se_z / r.theory_ez + 0.02, "{r:?}");
        assert!((r.ratio_l - 1.0).abs() < 6.0 * r.se_l / r.theory_el + 0.03, "{r:?}");
        assert!(r.warnings.is_empty());
        assert_eq!(r, monte_carlo_experiment(model, 5, 60, 7).unwrap());
    }

    #[test]
    fn length_only_runs_and_refusals() {
        let model = SphereModel::new(2, 6).unwrap();
        let opts = ExperimentOptions { leray: false };
        let r = monte_carlo_experiment_with(model, 2, 10, 1, &opts).unwrap();
        assert!(r.mean_l.is_nan() && r.leray_count == 0);
        assert!(!r.warnings.is_empty());
        let full = monte_carlo_experiment(model, 2, 10, 1).unwrap();
        assert_eq!(full.mean_z, r.mean_z);
        assert!(monte_carlo_experiment(SphereModel::new(3, 6).unwrap(), 2, 10, 1).is_err());
        assert!(monte_carlo_experiment(model, 2, 0, 1).is_err());
    }
}

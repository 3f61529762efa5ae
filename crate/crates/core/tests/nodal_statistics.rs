//! Statistical properties of the nodal estimators on sampled functions.

use std::sync::Arc;

use sphere_nodal::ensemble::{sample_indexed, HarmonicBasis, MeshBasis};
use sphere_nodal::geometry::icosphere;
use sphere_nodal::nodal::{
    default_eps_schedule, extract_from_values, leray_estimate_line, leray_sublevel_from_values,
    monte_carlo_experiment_with, ExperimentOptions,
};
use sphere_nodal::SphereModel;

#[test]
fn length_bias_shrinks_under_refinement() {
    let model = SphereModel::new(2, 10).unwrap();
    let opts = ExperimentOptions { leray: false };
    let bias: Vec<f64> = (4..=6)
        .map(|level| {
            let r = monte_carlo_experiment_with(model, level, 500, 3, &opts).unwrap();
            (r.mean_z - r.theory_ez).abs()
        })
        .collect();
    assert!(bias[0] > bias[1] && bias[1] > bias[2], "{bias:?}");
}

/// Per-sample relative differences between the sublevel and line
/// estimators at level 5, n = 20.
fn leray_differences(samples: u64) -> Vec<f64> {
    let basis = Arc::new(HarmonicBasis::new(20));
    let mesh = icosphere(5).unwrap();
    let mb = MeshBasis::new(&basis, &mesh);
    (0..samples)
        .map(|i| {
            let f = sample_indexed(&basis, 17, i);
            let values = mb.vertex_values(&f);
            let set = extract_from_values(&f, &mesh, &values, true);
            let line = leray_estimate_line(&f, &set).unwrap();
            let band = leray_sublevel_from_values(&mesh, &values, &default_eps_schedule(&mesh, &values)).unwrap();
            (band.value() - line) / line
        })
        .collect()
}

#[test]
fn leray_estimators_agree_on_average() {
    let d = leray_differences(100);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    assert!(mean.abs() <= 0.02, "mean relative difference {mean}");
}

#[test]
fn leray_estimators_agree_per_sample() {
    let d = leray_differences(200);
    let close = d.iter().filter(|x| x.abs() <= 0.05).count();
    let fraction = close as f64 / d.len() as f64;
    assert!(fraction >= 0.95, "only {close} of {} samples within 5%", d.len());
}

#[test]
fn no_sample_is_near_singular() {
    let r = monte_carlo_experiment_with(SphereModel::new(2, 12).unwrap(), 5, 200, 5, &ExperimentOptions::default())
        .unwrap();
    assert_eq!(r.near_singular, 0);
    assert_eq!(r.leray_count, 200);
}

//! The covariance matrix of `(f(x), f(y), grad f(x), grad f(y))` against
//! sampled eigenfunctions on S^2.

use std::sync::Arc;

use sphere_nodal::covariance::{blocks_at, sigma_matrix};
use sphere_nodal::ensemble::{sample_indexed, HarmonicBasis};
use sphere_nodal::geometry::{aligned_frames, geodesic_distance, SpherePoint};
use sphere_nodal::SphereModel;

const SAMPLES: u64 = 100_000;

#[test]
fn sigma_is_the_ensemble_covariance() {
    for (n, x) in [(5, SpherePoint::from_angles(1.2, 0.4)), (10, SpherePoint::from_angles(0.5, 2.0))] {
        let y = SpherePoint::north(2);
        let theta = geodesic_distance(&x, &y);
        let sigma = sigma_matrix(&blocks_at(SphereModel::new(2, n).unwrap(), theta).unwrap());
        let (fx, fy) = aligned_frames(&x, &y).unwrap();
        let basis = Arc::new(HarmonicBasis::new(n));
        let mut sum = [[0.0; 6]; 6];
        let mut sum_sq = [[0.0; 6]; 6];
        for i in 0..SAMPLES {
            let f = sample_indexed(&basis, 2024, i);
            let (vx, gx) = f.eval_with_gradient(&x);
            let (vy, gy) = f.eval_with_gradient(&y);
            let (cx, cy) = (fx.coordinates(&gx), fy.coordinates(&gy));
            let v = [vx, vy, cx[0], cx[1], cy[0], cy[1]];
            for a in 0..6 {
                for b in 0..6 {
                    let p = v[a] * v[b];
                    sum[a][b] += p;
                    sum_sq[a][b] += p * p;
                }
            }
        }
        let k = SAMPLES as f64;
        for a in 0..6 {
            for b in 0..6 {
                let mean = sum[a][b] / k;
                let se = ((sum_sq[a][b] / k - mean * mean) / k).sqrt();
                let want = sigma[(a, b)];
                assert!((mean - want).abs() <= 4.0 * se, "n={n} [{a},{b}]: {mean} vs {want} (se {se})");
            }
        }
    }
}

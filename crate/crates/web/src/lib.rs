//! Browser bindings: the two-point function, the Leray variance ratio and a
//! sampled nodal line on the icosphere.

use std::f64::consts::PI;
use std::sync::Arc;

use sphere_nodal::ensemble::{sample_function, HarmonicBasis};
use sphere_nodal::geometry::icosphere;
use sphere_nodal::moments::{leray_report, volume_expectation, QuadratureSpec};
use sphere_nodal::nodal::{extract_nodal, leray_estimate_line};
use sphere_nodal::specfun::q_normalized;
use sphere_nodal::SphereModel;
use wasm_bindgen::prelude::*;

/// Finest mesh the page offers; level 6 already has 82k triangles.
const MAX_LEVEL: u32 = 6;

fn js_err(e: sphere_nodal::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `Q_n^m(cos theta)` at `points` equally spaced angles in `[0, pi]`.
#[wasm_bindgen]
pub fn q_profile(m: u32, n: u32, points: u32) -> Result<Vec<f64>, JsValue> {
    SphereModel::new(m, n).map_err(js_err)?;
    let k = points.max(2);
    Ok((0..k)
        .map(|i| q_normalized(m, n, (PI * i as f64 / (k - 1) as f64).cos()))
        .collect())
}

/// `N Var L / (4 pi)` on S^2, or `Var L` over its asymptotic form in higher
/// dimensions.
#[wasm_bindgen]
pub fn leray_variance_ratio(m: u32, n: u32) -> Result<f64, JsValue> {
    let model = SphereModel::new(m, n).map_err(js_err)?;
    Ok(leray_report(model, &QuadratureSpec::default()).map_err(js_err)?.ratio)
}

#[wasm_bindgen]
pub struct NodalSample {
    segments: Vec<f64>,
    length: f64,
    expected_length: f64,
    leray: f64,
}

#[wasm_bindgen]
impl NodalSample {
    /// Segment endpoints, six coordinates per segment.
    #[wasm_bindgen(getter)]
    pub fn segments(&self) -> Vec<f64> {
        self.segments.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[wasm_bindgen(getter)]
    pub fn expected_length(&self) -> f64 {
        self.expected_length
    }

    #[wasm_bindgen(getter)]
    pub fn leray(&self) -> f64 {
        self.leray
    }
}

/// Nodal line of one random degree-`n` harmonic on an icosphere of the
/// given subdivision level.
#[wasm_bindgen]
pub fn nodal_sample(n: u32, level: u32, seed: u64) -> Result<NodalSample, JsValue> {
    let model = SphereModel::new(2, n).map_err(js_err)?;
    if level > MAX_LEVEL {
        return Err(JsValue::from_str(&format!("mesh level {level} is above {MAX_LEVEL}")));
    }
    let mesh = icosphere(level).map_err(js_err)?;
    let f = sample_function(&Arc::new(HarmonicBasis::new(n)), seed);
    let set = extract_nodal(&f, &mesh);
    let leray = leray_estimate_line(&f, &set).unwrap_or(f64::NAN);
    Ok(NodalSample {
        segments: set.segments.iter().flatten().flatten().copied().collect(),
        length: set.total_length,
        expected_length: volume_expectation(model),
        leray,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_starts_at_one() {
        let q = q_profile(2, 7, 50).unwrap();
        assert_eq!(q.len(), 50);
        assert!((q[0] - 1.0).abs() < 1e-12);
        // Q_n(-1) = (-1)^n
        assert!((q[49] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn nodal_sample_is_consistent() {
        let s = nodal_sample(8, 4, 3).unwrap();
        assert_eq!(s.segments().len() % 6, 0);
        assert!(s.length > 0.0 && s.leray > 0.0);
        let again = nodal_sample(8, 4, 3).unwrap();
        assert_eq!(s.segments(), again.segments());
        assert!(leray_variance_ratio(2, 10).unwrap() > 1.0);
    }
}

//! wasm-bindgen exports for the static demo page in `www/`.

use sascomp::frame::Momenta;
use sascomp::geoflow::{trajectory, FD_FLOW_TOL};
use sascomp::models::{ModelKind, ModelSpace};
use sascomp::volume::ball_volume;
use wasm_bindgen::prelude::*;

fn model(kind: &str, c: f64) -> Result<ModelSpace, JsError> {
    let kind: ModelKind = kind.parse().map_err(|e| JsError::new(&format!("{e}")))?;
    ModelSpace::new(kind, c).map_err(|e| JsError::new(&e.to_string()))
}

/// Volume of the ball of radius `radius` about the origin.
#[wasm_bindgen]
pub fn ball_volume_at(kind: &str, c: f64, radius: f64) -> Result<f64, JsError> {
    let m = model(kind, c)?;
    ball_volume(&m, radius).map(|v| v.volume).map_err(|e| JsError::new(&e.to_string()))
}

/// Space-form volumes at radius `radius` for each curvature in `ks`.
#[wasm_bindgen]
pub fn space_form_volumes(ks: &[f64], radius: f64) -> Result<Vec<f64>, JsError> {
    ks.iter()
        .map(|&k| {
            ball_volume(&ModelSpace::space_form(k), radius)
                .map(|v| v.volume)
                .map_err(|e| JsError::new(&e.to_string()))
        })
        .collect()
}

/// Geodesic from the origin sampled at `steps + 1` times, flattened as
/// (x0, x1, x2, x3) per sample.
#[wasm_bindgen]
pub fn geodesic(kind: &str, c: f64, h0: f64, h1: f64, h2: f64, t_end: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    let m = model(kind, c)?;
    let steps = steps.max(1);
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let states =
        trajectory(&m, &m.origin(), &Momenta::new(h0, h1, h2), &times, FD_FLOW_TOL).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(states.iter().flat_map(|s| s.x.iter().copied().collect::<Vec<_>>()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_agree_with_the_core_crate() {
        let v = ball_volume_at("su2", 1.0, 1.0).unwrap();
        let expect = ball_volume(&ModelSpace::su2(1.0).unwrap(), 1.0).unwrap().volume;
        assert_eq!(v, expect);
        let vols = space_form_volumes(&[-1.0, 0.0, 1.0], 1.0).unwrap();
        assert!(vols[0] > vols[1] && vols[1] > vols[2]);
        let g = geodesic("heisenberg", 1.0, 0.0, 1.0, 0.0, 1.0, 4).unwrap();
        assert_eq!(g.len(), 20);
        assert!((g[16] - 1.0).abs() < 1e-9);
    }
}

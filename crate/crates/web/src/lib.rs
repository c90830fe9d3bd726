//! Browser demo bindings. Each operation is a plain function returning JSON
//! text so it can be tested natively; the `#[wasm_bindgen]` wrappers only
//! translate errors.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use splbee::harness::brute_force_reduced;
use splbee::metrics::{self, Front, NormalizationBounds};
use splbee::mobafs::{self, predict_speedup, RunParams};
use splbee::model_io::{augment_attributes, generate_synthetic_model};
use splbee::preprocess::preprocess;

/// Largest model the demo will enumerate exactly.
pub const DEMO_MAX_FEATURES: usize = 16;

/// Runs the optimizer on a synthetic model and compares it with the exact front.
pub fn demo_front(features: usize, clauses: usize, seed: u64, population: usize, iterations: u64) -> Result<String, String> {
    if !(2..=DEMO_MAX_FEATURES).contains(&features) {
        return Err(format!("features must be in 2..={DEMO_MAX_FEATURES}"));
    }
    let model = generate_synthetic_model(features, clauses, 2..=3, seed);
    let attrs = augment_attributes(&model, seed);
    let reduced = preprocess(&model).map_err(|e| e.to_string())?;
    let params = RunParams {
        population,
        max_iter: Some(iterations),
        budget_seconds: None,
        seed,
        ..RunParams::default()
    };
    let result = mobafs::run(&params, &reduced, &attrs).map_err(|e| e.to_string())?;
    let oracle = brute_force_reduced(&reduced, &attrs).map_err(|e| e.to_string())?;

    let found = Front::new(result.front.iter().map(|e| e.objectives.to_array().to_vec()).collect());
    let exact = Front::new(oracle.iter().map(|r| r.objectives.to_array().to_vec()).collect());
    let bounds = NormalizationBounds::from_points(&exact.points).ok_or("model has no valid product")?;
    let (found_n, exact_n) = (metrics::normalize(&found, &bounds), metrics::normalize(&exact, &bounds));
    let recovered = exact.points.iter().filter(|p| found.points.contains(p)).count();

    let front: Vec<Value> = result
        .front
        .iter()
        .map(|e| json!({ "objectives": e.objectives.to_array(), "features": e.config.to_bitstring() }))
        .collect();
    Ok(json!({
        "features": features,
        "clauses": clauses,
        "free": reduced.num_free(),
        "iterations": result.iterations,
        "front": front,
        "oracle": exact.points,
        "recovered": recovered,
        "igd": metrics::igd(&found_n, &exact_n),
        "hv": metrics::hypervolume(&found_n),
        "oracle_hv": metrics::hypervolume(&exact_n),
    })
    .to_string())
}

/// Hypervolume of 2-D points in the unit square against the reference (1, 1).
/// Input is a JSON array of `[x, y]` pairs; coordinates are clipped to `[0, 1]`.
pub fn hypervolume_2d(points_json: &str) -> Result<String, String> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(points_json).map_err(|e| format!("expected [[x, y], ...]: {e}"))?;
    let points: Vec<Vec<f64>> = raw
        .iter()
        .filter(|p| p.iter().all(|v| v.is_finite()))
        .map(|p| p.iter().map(|v| v.clamp(0.0, 1.0)).collect())
        .collect();
    let mut front = metrics::non_dominated(&points);
    front.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let hv = if front.is_empty() { 0.0 } else { metrics::hypervolume(&Front::new(front.clone())) };
    Ok(json!({ "hv": hv, "front": front }).to_string())
}

/// Predicted speedup for `1..=max_processors` processors.
pub fn speedup_curve(population: f64, features: f64, constraints: f64, max_processors: u32) -> Result<String, String> {
    if population <= 0.0 || features < 0.0 || constraints < 0.0 || max_processors == 0 {
        return Err("population and processors must be positive, sizes non-negative".into());
    }
    let curve: Vec<Value> = (1..=max_processors)
        .map(|p| json!({ "p": p, "speedup": predict_speedup(1.0, population, features, constraints, p as f64) }))
        .collect();
    Ok(json!({ "curve": curve, "limit": (features + constraints + population) / population }).to_string())
}

#[wasm_bindgen(js_name = demoFront)]
pub fn wasm_demo_front(features: usize, clauses: usize, seed: u32, population: usize, iterations: u32) -> Result<String, JsValue> {
    demo_front(features, clauses, seed as u64, population, iterations as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = hypervolume2d)]
pub fn wasm_hypervolume_2d(points_json: &str) -> Result<String, JsValue> {
    hypervolume_2d(points_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = speedupCurve)]
pub fn wasm_speedup_curve(population: f64, features: f64, constraints: f64, max_processors: u32) -> Result<String, JsValue> {
    speedup_curve(population, features, constraints, max_processors).map_err(|e| JsValue::from_str(&e))
}

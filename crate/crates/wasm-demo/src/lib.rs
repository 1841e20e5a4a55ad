//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; errors are thrown as JS strings.

pub mod demo;

use wasm_bindgen::prelude::*;

fn to_js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

/// Optimal weights, wce and distances to the polynomial rule over a
/// log-spaced length-scale grid.
#[wasm_bindgen]
pub fn weights_sweep(functional: &str, nodes: Vec<f64>, l_min: f64, l_max: f64, count: usize) -> Result<String, JsValue> {
    to_js(demo::weights_sweep(functional, &nodes, l_min, l_max, count))
}

/// Jointly optimised `n`-point rule at one length scale.
#[wasm_bindgen]
pub fn optimal_rule(functional: &str, n: usize, length_scale: f64, restarts: usize, seed: u32) -> Result<String, JsValue> {
    to_js(demo::optimal_rule(functional, n, length_scale, restarts, u64::from(seed)))
}

/// `n`-point Gauss rule of the functional.
#[wasm_bindgen]
pub fn gauss_rule(functional: &str, n: usize) -> Result<String, JsValue> {
    to_js(demo::gauss_rule(functional, n))
}

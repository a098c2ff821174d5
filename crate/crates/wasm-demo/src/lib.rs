//! Three operations for the static page in `www/`: the μ comparison curve,
//! the four-point δ of a cycle or pasted graph, and isometry classification
//! for a word in Z/p * Z/q acting on its Bass-Serre tree.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::json;
use wasm_bindgen::prelude::*;

use coarse_cancel::action::classify;
use coarse_cancel::coneoff::{mu, mu_lower_bound};
use coarse_cancel::grouptheory::{bass_serre_window, default_generators, AmalgamData, GroupTable};
use coarse_cancel::metric::{hyperbolicity_delta, FiniteMetricSpace, GraphSpec};

/// Largest graph the page will scan; the δ search is quartic.
pub const MAX_POINTS: usize = 80;

/// Flat triples (t, μ(t), lower bound) on [0, π sinh ρ].
pub fn mu_samples(rho: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(rho > 0.0 && rho <= 20.0) || samples < 2 {
        return Err("rho must lie in (0, 20] and samples be at least 2".into());
    }
    let end = PI * rho.sinh();
    Ok((0..samples)
        .flat_map(|k| {
            let t = end * k as f64 / (samples - 1) as f64;
            [t, mu(t, rho), mu_lower_bound(t, rho)]
        })
        .collect())
}

fn delta_report(spec: &GraphSpec) -> Result<String, String> {
    if spec.vertices.len() > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} vertices in the browser"));
    }
    let space = FiniteMetricSpace::from_graph(spec).map_err(|e| e.to_string())?;
    let r = hyperbolicity_delta(&space);
    Ok(json!({ "points": space.len(), "diameter": space.diameter(), "delta": r.delta, "witness": r.witness }).to_string())
}

/// δ of the n-cycle with every edge cut into `subdivide` pieces.
pub fn cycle_delta_json(n: usize, subdivide: usize) -> Result<String, String> {
    if n < 3 {
        return Err("a cycle needs at least 3 vertices".into());
    }
    let spec = GraphSpec::cycle(n).subdivide(subdivide.max(1)).map_err(|e| e.to_string())?;
    delta_report(&spec)
}

/// δ of a graph given as `{"vertices": [...], "edges": [[u, v, w], ...]}`.
pub fn graph_delta_json(text: &str) -> Result<String, String> {
    let spec: GraphSpec = serde_json::from_str(text).map_err(|e| format!("malformed graph: {e}"))?;
    delta_report(&spec)
}

/// Classify a word over the letters of Z/p * Z/q (a, A, ... for the first
/// factor, b, B, ... for the second) on the tree ball of the given radius.
pub fn classify_json(p: usize, q: usize, word: &str, radius: usize) -> Result<String, String> {
    if !(2..=12).contains(&p) || !(2..=12).contains(&q) || !(1..=5).contains(&radius) {
        return Err("factors of order 2..=12 and radius 1..=5".into());
    }
    let data = Arc::new(AmalgamData::free_product(GroupTable::cyclic(p), GroupTable::cyclic(q)));
    let gens = default_generators(&data);
    let max_len = word.chars().count().max(1);
    let window = bass_serre_window(data, &gens, radius, max_len).map_err(|e| e.to_string())?;
    let w = window.parse(word).map_err(|e| e.to_string())?;
    let c = classify(&window, &w, 4).map_err(|e| e.to_string())?;
    Ok(json!({
        "word": window.format(&w),
        "tree_points": window.space.len(),
        "kind": c.kind,
        "len": c.len,
        "stable_len": c.stable_len,
        "certificate": c.certificate,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn mu_curve(rho: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    mu_samples(rho, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cycle_delta(n: usize, subdivide: usize) -> Result<String, JsValue> {
    cycle_delta_json(n, subdivide).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn graph_delta(text: &str) -> Result<String, JsValue> {
    graph_delta_json(text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn classify_word(p: usize, q: usize, word: &str, radius: usize) -> Result<String, JsValue> {
    classify_json(p, q, word, radius).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curve_ends_at_two_rho() {
        let s = mu_samples(1.0, 50).unwrap();
        assert_eq!(s.len(), 150);
        assert_eq!(s[1], 0.0);
        assert!((s[s.len() - 2] - 2.0).abs() < 1e-9);
        assert!(s.chunks(3).all(|c| c[2] <= c[1] + 1e-12 && c[1] <= c[0] + 1e-12));
        assert!(mu_samples(0.0, 10).is_err());
    }

    #[test]
    fn cycle_and_pasted_graph() {
        let v: Value = serde_json::from_str(&cycle_delta_json(4, 1).unwrap()).unwrap();
        assert_eq!(v["delta"], 1.0);
        let v: Value = serde_json::from_str(&cycle_delta_json(6, 2).unwrap()).unwrap();
        assert_eq!(v["delta"], 1.5);
        let path = r#"{"vertices": ["a", "b", "c"], "edges": [["a", "b", 1], ["b", "c", 2]]}"#;
        let v: Value = serde_json::from_str(&graph_delta_json(path).unwrap()).unwrap();
        assert_eq!(v["delta"], 0.0);
        assert!(graph_delta_json("{").unwrap_err().starts_with("malformed"));
    }

    #[test]
    fn tree_classification() {
        let v: Value = serde_json::from_str(&classify_json(3, 5, "ab", 4).unwrap()).unwrap();
        assert_eq!(v["kind"], "LoxodromicEstimate");
        assert_eq!(v["len"], 2.0);
        let v: Value = serde_json::from_str(&classify_json(3, 5, "aba", 4).unwrap()).unwrap();
        assert_eq!(v["kind"], "LoxodromicEstimate");
        let v: Value = serde_json::from_str(&classify_json(3, 5, "bab", 4).unwrap()).unwrap();
        assert_eq!(v["len"], 2.0);
        let v: Value = serde_json::from_str(&classify_json(3, 5, "A", 3).unwrap()).unwrap();
        assert_eq!(v["kind"], "Elliptic");
        assert!(classify_json(1, 5, "a", 3).is_err());
    }
}

use serde_json::{json, Value};

use super::solve::Solution;
use crate::linalg::space::{BlockValue, Element};

/// Blocks of an element as JSON: numbers, weight arrays, or matrices.
pub fn element_to_json(e: &Element) -> Value {
    let blocks: Vec<Value> = (0..e.space().n_blocks())
        .map(|k| match e.block_value(k) {
            BlockValue::Scalar(x) => json!({ "scalar": x }),
            BlockValue::Weights(w) => json!({ "weights": w }),
            BlockValue::Hermitian(m) => json!({ "hermitian": m }),
        })
        .collect();
    Value::Array(blocks)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Certificate file contents: status, values and both points.
pub fn solution_to_json(s: &Solution) -> Value {
    json!({
        "status": s.status,
        "sense": s.sense,
        "primal_value": num(s.primal_value),
        "dual_value": num(s.dual_value),
        "gap": num(s.gap),
        "iterations": s.iterations,
        "primal": s.primal.as_ref().map(element_to_json),
        "dual": s.dual.as_ref().map(element_to_json),
    })
}

//! Browser bindings. Every export takes plain numbers or strings and returns
//! a JSON string; failures come back as `{"error": "..."}`.

use conecert::vanishing::vanishing_angle_with;
use conecert::{
    minimal_product, BoundEvaluator, BoundKind, CatalogId, Certifier, Link, Outcome, SolverOptions,
    Strategy,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn outcome_fields(outcome: &Outcome) -> Value {
    match outcome {
        Outcome::Found { theta0, tan_theta0 } => json!({
            "found": true,
            "theta0_rad": theta0,
            "theta0_deg": theta0.to_degrees(),
            "tan_theta0": tan_theta0,
        }),
        Outcome::NotFound(reason) => json!({ "found": false, "reason": reason.as_str() }),
    }
}

/// Profile `w(θ)` and its envelope for a scalar bound.
pub fn trace_value(m: usize, alpha: f64, bound: &str) -> Result<Value, String> {
    let kind: BoundKind = bound.parse().map_err(|e| format!("{e}"))?;
    let evaluator = BoundEvaluator::new(kind, m, alpha).map_err(|e| e.to_string())?;
    let opts = SolverOptions {
        record_trajectory: true,
        ..SolverOptions::default()
    };
    let r = vanishing_angle_with(&evaluator, &opts).map_err(|e| e.to_string())?;
    let points: Vec<[f64; 3]> = r
        .trajectory
        .as_deref()
        .unwrap_or_default()
        .iter()
        .map(|&(th, w)| [th, w, evaluator.envelope_at(th)])
        .collect();
    let mut out = outcome_fields(&r.outcome);
    out["bound"] = json!(kind.as_str());
    out["m"] = json!(m);
    out["points"] = json!(points);
    Ok(out)
}

/// Certificate for the minimal product of whitespace separated catalog ids.
pub fn certify_value(ids: &str, strategy: &str) -> Result<Value, String> {
    let strategy: Strategy = strategy.parse().map_err(|e| format!("{e}"))?;
    let factors = ids
        .split_whitespace()
        .map(|id| {
            id.parse::<CatalogId>()
                .and_then(|c| c.build())
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<Link>, String>>()?;
    if factors.is_empty() {
        return Err("no factors given".into());
    }
    let link = minimal_product(&factors).map_err(|e| e.to_string())?;
    Ok(Certifier::default()
        .certify(&link, strategy)
        .to_json_value())
}

/// Vanishing angle in degrees over `samples` evenly spaced `α ∈ [0, alpha_max]`.
pub fn curve_value(m: usize, bound: &str, alpha_max: f64, samples: usize) -> Result<Value, String> {
    let kind: BoundKind = bound.parse().map_err(|e| format!("{e}"))?;
    if alpha_max.is_nan() || alpha_max < 0.0 || !(2..=2000).contains(&samples) {
        return Err("need alpha_max ≥ 0 and 2 ≤ samples ≤ 2000".into());
    }
    let rows = (0..samples)
        .map(|i| {
            let alpha = alpha_max * i as f64 / (samples - 1) as f64;
            let evaluator = BoundEvaluator::new(kind, m, alpha).map_err(|e| e.to_string())?;
            let r = vanishing_angle_with(&evaluator, &SolverOptions::default())
                .map_err(|e| e.to_string())?;
            Ok(json!([alpha, r.theta0().map(f64::to_degrees)]))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(json!({ "m": m, "bound": kind.as_str(), "rows": rows }))
}

#[wasm_bindgen]
pub fn trace(m: usize, alpha: f64, bound: &str) -> String {
    respond(trace_value(m, alpha, bound))
}

#[wasm_bindgen]
pub fn certify(ids: &str, strategy: &str) -> String {
    respond(certify_value(ids, strategy))
}

#[wasm_bindgen]
pub fn curve(m: usize, bound: &str, alpha_max: f64, samples: usize) -> String {
    respond(curve_value(m, bound, alpha_max, samples))
}

//! Browser bindings. Each export returns a JSON string for the page to plot.

use isoflow::flow;
use isoflow::foliation::{adaptedness, shape_operator, FoliationConfig, Normal};
use isoflow::lie_oracle::ModelId;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn config(model: &str, k: usize, t1: f64) -> Result<FoliationConfig, String> {
    let id: ModelId = model.parse().map_err(|e: isoflow::Error| e.to_string())?;
    FoliationConfig::for_model(id, k, 0, vec![t1; k]).map_err(|e| e.to_string())
}

/// Numeric distance to the reference leaf next to the closed form.
pub fn flow_curve_json(model: &str, t1: f64, horizon: f64) -> Result<String, String> {
    let cfg = config(model, 1, t1)?;
    let coeffs = cfg.coefficients().map_err(|e| e.to_string())?;
    let mut u0 = vec![0.0; cfg.m0()];
    u0.push(t1);
    let every = ((horizon / flow::DEFAULT_STEP) / 200.0).ceil().max(1.0) as usize;
    let traj = flow::integrate(&coeffs, &u0, horizon, flow::DEFAULT_STEP, every).map_err(|e| e.to_string())?;
    let mut t = Vec::new();
    let mut numeric = Vec::new();
    let mut closed = Vec::new();
    for s in &traj.samples {
        t.push(s.t);
        numeric.push(s.dist_to_ref);
        closed.push(flow::leaf_distance(&coeffs, &[t1], s.t).map_err(|e| e.to_string())?);
    }
    Ok(json!({
        "t": t,
        "numeric": numeric,
        "closed_form": closed,
        "decay_rate": coeffs.decay_rates()[0],
        "max_residual": traj.max_residual(),
    })
    .to_string())
}

/// Eigenvalues of the shape operator along the first normal, sampled over offsets.
pub fn principal_curvatures_json(model: &str, t_min: f64, t_max: f64, samples: usize) -> Result<String, String> {
    if samples < 2 || t_min >= t_max {
        return Err("need at least two samples over a non-empty range".into());
    }
    let mut ts = Vec::with_capacity(samples);
    let mut curves = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = t_min + (t_max - t_min) * i as f64 / (samples - 1) as f64;
        let cfg = config(model, 1, t)?;
        let a = shape_operator(&cfg, &Normal::Root(0)).map_err(|e| e.to_string())?;
        let full = a.to_full().ok_or("shape operator has unresolved blocks")?;
        let mut eig: Vec<f64> = full.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        ts.push(t);
        curves.push(eig);
    }
    Ok(json!({ "t": ts, "eigenvalues": curves }).to_string())
}

/// Whether the shape and normal Jacobi operators commute, with the doubled-block sizes.
pub fn adaptedness_json(model: &str, k: usize, t1: f64) -> Result<String, String> {
    let cfg = config(model, k, t1)?;
    let rep = adaptedness(&cfg).map_err(|e| e.to_string())?;
    let doubled: Vec<_> = rep
        .doubled
        .iter()
        .map(|d| json!({ "root_norm": d.root_norm, "closed_norm": d.closed_norm, "measured_norm": d.measured_norm }))
        .collect();
    Ok(json!({ "verdict": rep.verdict, "verified": rep.verified, "doubled": doubled }).to_string())
}

#[wasm_bindgen]
pub fn flow_curve(model: &str, t1: f64, horizon: f64) -> Result<String, JsError> {
    flow_curve_json(model, t1, horizon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn principal_curvatures(model: &str, t_min: f64, t_max: f64, samples: usize) -> Result<String, JsError> {
    principal_curvatures_json(model, t_min, t_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn adaptedness_verdict(model: &str, k: usize, t1: f64) -> Result<String, JsError> {
    adaptedness_json(model, k, t1).map_err(|e| JsError::new(&e))
}

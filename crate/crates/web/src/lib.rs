//! wasm-bindgen front for the static demo page in `www/`.
//!
//! Every export returns plain numbers or a JSON string; the `*_value`
//! functions hold the logic so it can be tested natively.

use nlrouter_core::analytics::{find_optimal_phase, success_curve, Protocol};
use nlrouter_core::protocols::router_outcomes;
use nlrouter_core::{Result, WorkingPoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub od_b: Option<f64>,
    /// `[φ, P]` pairs; unreachable phases are left out.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct CurveSet {
    pub protocol: Protocol,
    pub baseline: f64,
    pub curves: Vec<Curve>,
}

fn grid(points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| std::f64::consts::PI * k as f64 / (n - 1) as f64).collect()
}

/// Success probability over `φ ∈ [0, π]` at `od_b` next to the loss-free
/// curve, plus the linear-optics baseline at the same detector efficiency.
pub fn curves_value(protocol: &str, od_b: f64, p_de: f64, points: usize) -> Result<CurveSet> {
    let protocol: Protocol = protocol.parse()?;
    let phis = grid(points);
    let mut curves = Vec::new();
    for od in [od_b, f64::INFINITY] {
        let c = success_curve(protocol, &phis, od, p_de, 0.0)?;
        curves.push(Curve {
            // JSON has no infinity
            od_b: od.is_finite().then_some(od),
            points: c.points.iter().map(|p| [p.phi, p.probability]).collect(),
        });
    }
    let baseline = nlrouter_core::analytics::formula(protocol, &WorkingPoint::new(0.0, od_b, p_de))?;
    Ok(CurveSet { protocol, baseline, curves })
}

/// Two photons through the router, from the Fock-space simulation:
/// `[uu, uw, ww, lost]`.
pub fn router_value(phi: f64, od_b: f64) -> Result<[f64; 4]> {
    let o = router_outcomes(&WorkingPoint::new(phi, od_b, 1.0))?;
    Ok([o.uu, o.uw, o.ww, o.lost])
}

/// `[φ_opt, P_opt]` for a resonant medium.
pub fn optimal_value(protocol: &str, od_b: f64, p_de: f64) -> Result<[f64; 2]> {
    let r = find_optimal_phase(protocol.parse()?, od_b, p_de)?;
    Ok([r.phi_opt, r.p_opt])
}

#[wasm_bindgen]
pub fn success_curves(protocol: &str, od_b: f64, p_de: f64, points: usize) -> std::result::Result<String, JsError> {
    let set = curves_value(protocol, od_b, p_de, points)?;
    Ok(serde_json::to_string(&set)?)
}

#[wasm_bindgen]
pub fn router_distribution(phi: f64, od_b: f64) -> std::result::Result<Vec<f64>, JsError> {
    Ok(router_value(phi, od_b)?.to_vec())
}

#[wasm_bindgen]
pub fn optimal_phase(protocol: &str, od_b: f64, p_de: f64) -> std::result::Result<Vec<f64>, JsError> {
    Ok(optimal_value(protocol, od_b, p_de)?.to_vec())
}

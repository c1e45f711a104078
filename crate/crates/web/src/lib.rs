//! Browser bindings. Every export takes and returns JSON strings so the page
//! needs no generated TypeScript types.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use junglesim::control::{build_activation_game, solve_backward_induction, verify_prop3, PayoffParams};
use junglesim::equilibrium::{check_prop1, solve_jungle_equilibrium};
use junglesim::io::parse_scenario;
use junglesim::model::FunctionDescriptor;
use junglesim::optimize::{optimize_power, PowerOptions};

fn parse<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

/// Net resources curve and optimal power for endowment density `f` and
/// power cost `c`, both function descriptors.
pub fn power_curve_json(f: &str, c: &str) -> Result<String, String> {
    let f: FunctionDescriptor = parse("endowment", f)?;
    let c: FunctionDescriptor = parse("power cost", c)?;
    let opts = PowerOptions { grid_points: 2001, curve_points: 201, ..PowerOptions::default() };
    let sol = optimize_power(&f, &c, &FunctionDescriptor::linear(1.0), opts).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&sol).expect("solution serializes"))
}

/// Jungle equilibrium of a scenario document.
pub fn jungle_equilibrium_json(scenario: &str) -> Result<String, String> {
    let s = parse_scenario(scenario, "scenario", &[]).map_err(|e| e.to_string())?;
    let eq = solve_jungle_equilibrium(&s).map_err(|e| e.to_string())?;
    let out = json!({ "equilibrium": eq, "all_to_ai": check_prop1(&s), "total": s.total_resources() });
    Ok(out.to_string())
}

/// Backward-induction play of the activation game.
pub fn activation_game_json(payoffs: &str, depth: usize) -> Result<String, String> {
    let p: PayoffParams = parse("payoffs", payoffs)?;
    let g = build_activation_game(p, depth).map_err(|e| e.to_string())?;
    let profile = solve_backward_induction(&g);
    let report = verify_prop3(&[p], depth).map_err(|e| e.to_string())?;
    let nodes: Vec<Value> = g.players.iter().map(|n| json!({ "id": n.id, "kind": n.kind, "parent": n.parent, "level": n.level })).collect();
    Ok(json!({ "nodes": nodes, "profile": profile, "report": report }).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn power_curve(f: &str, c: &str) -> Result<String, JsError> {
    js(power_curve_json(f, c))
}

#[wasm_bindgen]
pub fn jungle_equilibrium(scenario: &str) -> Result<String, JsError> {
    js(jungle_equilibrium_json(scenario))
}

#[wasm_bindgen]
pub fn activation_game(payoffs: &str, depth: usize) -> Result<String, JsError> {
    js(activation_game_json(payoffs, depth))
}

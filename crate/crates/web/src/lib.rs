//! Browser bindings: abstract matching in each domain and the analyzer's
//! comparison of the two backward modes.

use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use shlin::analyzer::{diff, parse_goal, parse_program, AnalysisRequest, Element, Injection, Mode};
use shlin::{Domain, Var};

fn domain(name: &str) -> Result<Domain, String> {
    name.parse().map_err(|e: shlin::Error| e.to_string())
}

/// Matches `first` against `second` in the named domain (`omega`, `two`,
/// or `sl`) and returns the printed result.
#[wasm_bindgen]
pub fn match_elements(domain_name: &str, first: &str, second: &str) -> Result<String, String> {
    let d = domain(domain_name)?;
    let e1 = Element::parse(d, first).map_err(|e| format!("first operand: {e}"))?;
    let e2 = Element::parse(d, second).map_err(|e| format!("second operand: {e}"))?;
    e1.matching(&e2).map(|m| m.to_string()).map_err(|e| e.to_string())
}

/// Analyzes `goal` under `call` with both backward modes. `injection` may
/// be empty. Returns a JSON object with `matching`, `mgu`, `groups`,
/// `sharing`, and `nonlinear`.
#[wasm_bindgen]
pub fn analyzer_diff(
    domain_name: &str,
    program: &str,
    goal: &str,
    call: &str,
    injection: &str,
) -> Result<String, String> {
    let d = domain(domain_name)?;
    let program = parse_program(program).map_err(|e| format!("program: {e}"))?;
    let goal = parse_goal(goal).map_err(|e| format!("goal: {e}"))?;
    let call = Element::parse(d, call).map_err(|e| format!("call: {e}"))?;
    let mut req = AnalysisRequest::new(program, goal, call, Mode::Matching);
    req.injection = Injection::parse(d, injection).map_err(|e| format!("injection: {e}"))?;
    let out = diff(&req).map_err(|e| e.to_string())?;
    let sharing: Vec<String> = out
        .sharing
        .iter()
        .map(|b| b.iter().map(Var::name).collect())
        .collect();
    let nonlinear: Vec<&str> = out.nonlinear.iter().map(Var::name).collect();
    Ok(json!({
        "matching": out.matching.to_string(),
        "mgu": out.mgu.to_string(),
        "groups": out.groups,
        "sharing": sharing,
        "nonlinear": nonlinear,
    })
    .to_string())
}

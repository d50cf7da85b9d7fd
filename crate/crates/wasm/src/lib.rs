//! Browser bindings: every export returns a JSON string, with failures reported
//! as `{"error": "..."}` so the page never has to catch exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use sos_ggm::boundary_law::{solve_generic, BoundaryLawPair, ModelParams, PairKind};
use sos_ggm::format::to_json_string;
use sos_ggm::ggm::{
    boundary_law_from_pair, build_window, measure_with_budget, PeriodicBoundaryLaw, Pin,
};
use sos_ggm::phase_diagram::{scan_tau, scan_tau_h};
use sos_ggm::polyroots::DEFAULT_TOL;

/// Table-size cap for the browser; far below the native default.
pub const WASM_BUDGET: u64 = 2_000_000;
const MAX_STEPS: usize = 2000;
const MAX_GRID_STEPS: usize = 120;

#[derive(Serialize)]
struct ErrorReply {
    error: String,
}

fn reply<T: Serialize>(r: Result<T, String>) -> String {
    let out = match r {
        Ok(v) => to_json_string(&v),
        Err(error) => to_json_string(&ErrorReply { error }),
    };
    out.unwrap_or_else(|e| format!("{{\"error\":\"serialisation failed: {e}\"}}"))
}

fn check_steps(steps: usize, max: usize) -> Result<(), String> {
    if steps > max {
        return Err(format!("at most {max} steps in the browser, got {steps}"));
    }
    Ok(())
}

/// Solution counts along a tau sweep, with refined transitions.
#[wasm_bindgen]
pub fn phase_scan(k: u32, tau_min: f64, tau_max: f64, steps: usize) -> String {
    reply(
        check_steps(steps, MAX_STEPS)
            .and_then(|_| scan_tau(k, tau_min, tau_max, steps).map_err(|e| e.to_string())),
    )
}

/// Uniform-field grid for k = 2: counts per (tau, h) cell and the region boundaries.
#[wasm_bindgen]
pub fn field_grid(tau_min: f64, tau_max: f64, h_min: f64, h_max: f64, steps: usize) -> String {
    reply(check_steps(steps, MAX_GRID_STEPS).and_then(|_| {
        scan_tau_h((tau_min, tau_max), (h_min, h_max), steps).map_err(|e| e.to_string())
    }))
}

#[derive(Serialize)]
struct SolutionView {
    a: f64,
    b: f64,
    equal: bool,
    law: PeriodicBoundaryLaw,
}

#[derive(Serialize)]
struct GradientView {
    solutions: Vec<SolutionView>,
    index: usize,
    m: u32,
    pin: u8,
    /// Distribution of the gradient on one root edge, for ζ = -M..=M.
    marginal: Vec<f64>,
}

fn gradient_view(k: u32, tau: f64, index: usize, m: u32, pin: u8) -> Result<GradientView, String> {
    let params = ModelParams::new(k, tau).map_err(|e| e.to_string())?;
    let pairs: Vec<BoundaryLawPair> =
        solve_generic(&params, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let solutions = pairs
        .iter()
        .map(|p| {
            Ok(SolutionView {
                a: p.a,
                b: p.b,
                equal: p.kind == PairKind::Equal,
                law: boundary_law_from_pair(p).map_err(|e| e.to_string())?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let chosen = solutions.get(index).ok_or_else(|| {
        format!(
            "solution index {index} out of range ({} found)",
            solutions.len()
        )
    })?;
    let window = build_window(k, 1).map_err(|e| e.to_string())?;
    let table = measure_with_budget(&chosen.law, &window, Pin::Pinned(pin), m, WASM_BUDGET)
        .map_err(|e| e.to_string())?;
    let marginal = table.edge_marginal(0);
    Ok(GradientView {
        solutions,
        index,
        m,
        pin,
        marginal,
    })
}

/// All laws at (k, tau) and the root-edge gradient distribution of the chosen one.
#[wasm_bindgen]
pub fn gradient_marginal(k: u32, tau: f64, index: usize, m: u32, pin: u8) -> String {
    reply(gradient_view(k, tau, index, m, pin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn scan_reports_transitions() {
        let v = parse(&phase_scan(2, 2.1, 8.0, 300));
        assert_eq!(v["transitions"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn errors_are_json() {
        assert!(parse(&phase_scan(2, 1.0, 8.0, 10))["error"].is_string());
        assert!(parse(&phase_scan(2, 2.1, 8.0, MAX_STEPS + 1))["error"].is_string());
        assert!(parse(&gradient_marginal(2, 3.0, 4, 5, 0))["error"].is_string());
        assert!(parse(&field_grid(3.0, 6.0, 2.0, 1.0, 5))["error"].is_string());
    }

    #[test]
    fn grid_has_one_point_per_cell() {
        let v = parse(&field_grid(3.0, 6.0, 0.5, 2.0, 4));
        assert_eq!(v["points"].as_array().unwrap().len(), 16);
    }

    #[test]
    fn marginal_is_a_symmetric_distribution_for_the_free_law() {
        let v = parse(&gradient_marginal(2, 3.0, 0, 8, 0));
        let p: Vec<f64> = v["marginal"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(p.len(), 17);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..p.len() {
            assert!((p[i] - p[p.len() - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn over_budget_is_reported() {
        assert!(parse(&gradient_marginal(3, 5.0, 0, 40, 0))["error"]
            .as_str()
            .unwrap()
            .contains("budget"));
    }
}

//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes a JSON model description (the `[model]` keys of the CLI
//! config) and returns a JSON document.

use lrfput::catalog::ModelConfig;
use lrfput::dispersion::{certify_type1, lambda_curve, CertifyGrid};
use lrfput::operators::OperatorContext;
use lrfput::solver::{correction_scaling_sweep, solve_contraction, SweepSetup};
use lrfput::spectral::Grid;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const DEMO_HALF_LENGTH: f64 = 40.0;

#[derive(Serialize)]
pub struct Classification {
    pub type1: bool,
    pub c0_sq: f64,
    pub lambda_dd0: f64,
    pub sigma: f64,
    pub range: usize,
    pub notes: Vec<String>,
    pub curve: Vec<(f64, f64)>,
}

#[derive(Serialize)]
pub struct Profile {
    pub eps: f64,
    pub sigma: f64,
    pub c_eps: f64,
    pub residual_h1: f64,
    pub iterations: usize,
    pub x: Vec<f64>,
    pub w0: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Serialize)]
pub struct Scaling {
    pub sigma: f64,
    pub slope: Option<f64>,
    pub eps: Vec<f64>,
    pub diff_h1: Vec<f64>,
}

fn parse_model(json: &str) -> Result<ModelConfig, String> {
    serde_json::from_str(json).map_err(|e| format!("model: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

pub fn classify_json(model_json: &str, points: usize) -> Result<String, String> {
    let model = parse_model(model_json)?.build().map_err(|e| e.to_string())?;
    let grid = CertifyGrid::default();
    let profile = certify_type1(&model, grid).map_err(|e| e.to_string())?;
    to_json(&Classification {
        type1: profile.type1_certified,
        c0_sq: profile.c0_sq,
        lambda_dd0: profile.lambda_dd0,
        sigma: profile.sigma,
        range: model.range(),
        notes: profile.notes.clone(),
        curve: lambda_curve(&model, grid.k_max, points.clamp(2, 4000)),
    })
}

pub fn solve_json(model_json: &str, eps: f64, points: usize) -> Result<String, String> {
    let model = parse_model(model_json)?.build().map_err(|e| e.to_string())?;
    let profile = certify_type1(&model, CertifyGrid::default()).map_err(|e| e.to_string())?;
    if !profile.type1_certified {
        return Err("the model is not certified Type I".into());
    }
    let grid = Grid::new(DEMO_HALF_LENGTH, points).map_err(|e| e.to_string())?;
    let ctx = OperatorContext::new(&model, &profile, &grid, eps, profile.working_sigma()).map_err(|e| e.to_string())?;
    let sol = solve_contraction(&ctx, 1e-12, 300).map_err(|e| e.to_string())?;
    to_json(&Profile {
        eps,
        sigma: sol.sigma,
        c_eps: sol.c_eps_sq.sqrt(),
        residual_h1: sol.residual_h1,
        iterations: sol.iterations,
        x: grid.points(),
        w0: ctx.w0().to_vec(),
        w: sol.w,
    })
}

pub fn sweep_json(model_json: &str, eps_list: &[f64], points: usize) -> Result<String, String> {
    let model = parse_model(model_json)?.build().map_err(|e| e.to_string())?;
    let profile = certify_type1(&model, CertifyGrid::default()).map_err(|e| e.to_string())?;
    if !profile.type1_certified {
        return Err("the model is not certified Type I".into());
    }
    let grid = Grid::new(DEMO_HALF_LENGTH, points).map_err(|e| e.to_string())?;
    let setup = SweepSetup {
        model: &model,
        profile: &profile,
        grid: &grid,
        sigma: profile.working_sigma(),
        options: Default::default(),
        tol: 1e-12,
        max_iter: 300,
    };
    let report = correction_scaling_sweep(&setup, eps_list);
    if let Some(row) = report.rows.iter().find(|r| r.error.is_some()) {
        return Err(format!("ε = {}: {}", row.eps, row.error.as_deref().unwrap_or("")));
    }
    to_json(&Scaling {
        sigma: report.sigma,
        slope: report.slope,
        eps: report.rows.iter().map(|r| r.eps).collect(),
        diff_h1: report.rows.iter().map(|r| r.diff_h1).collect(),
    })
}

/// Type I certificate and `λ(k)` on `[0, 4π]`.
#[wasm_bindgen]
pub fn classify(model_json: &str, points: usize) -> Result<String, JsValue> {
    classify_json(model_json, points).map_err(|e| JsValue::from_str(&e))
}

/// Solitary-wave profile `W_ε` on `[−40, 40)` with `points` samples.
#[wasm_bindgen]
pub fn solve(model_json: &str, eps: f64, points: usize) -> Result<String, JsValue> {
    solve_json(model_json, eps, points).map_err(|e| JsValue::from_str(&e))
}

/// `‖W_ε − W₀‖_{H¹}` over `eps_list` with its log-log slope.
#[wasm_bindgen]
pub fn sweep(model_json: &str, eps_list: Vec<f64>, points: usize) -> Result<String, JsValue> {
    sweep_json(model_json, &eps_list, points).map_err(|e| JsValue::from_str(&e))
}

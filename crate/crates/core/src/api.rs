//! Request options and response envelopes shared by the command line and
//! the HTTP service, so both emit identical bytes for identical inputs.
//!
//! Every response is `{"params", "applicability", "result"}`; every error
//! is `{"code", "paper_condition", "message"}`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linearize::{linearize, JacobianPair};
use crate::model::{Equilibrium, ModelParams, NullclineGrid, NullclineMesh, State};
use crate::presets;
use crate::simulate::{detect_oscillation, integrate, uniform_times, Oscillation, Trajectory};
use crate::stability::{
    alpha_scan, analyze, classify_general_n, sweep, AlphaScan, GeneralNReport, StabilityReport,
    SweepParam, SweepRow,
};

/// Largest number of output samples a simulation request may ask for.
pub const MAX_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStatus {
    pub condition: String,
    pub holds: bool,
}

/// Which model conditions hold for the request; `failed` lists the names
/// of those that do not.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub conditions: Vec<ConditionStatus>,
    pub failed: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Applicability {
    fn push(&mut self, condition: impl Into<String>, holds: bool) {
        let condition = condition.into();
        if !holds {
            self.failed.push(condition.clone());
        }
        self.conditions.push(ConditionStatus { condition, holds });
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Response<T> {
    pub params: ModelParams,
    pub applicability: Applicability,
    pub result: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub paper_condition: Option<String>,
    pub message: String,
    /// States accepted before an integration failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<Trajectory>,
}

impl From<&Error> for ApiError {
    fn from(e: &Error) -> Self {
        let partial = match e {
            Error::StepSizeUnderflow { partial, .. } | Error::PositivityLost { partial, .. } => {
                Some((**partial).clone())
            }
            _ => None,
        };
        ApiError {
            code: e.code().to_string(),
            paper_condition: e.violated_condition().map(str::to_string),
            message: e.to_string(),
            partial,
        }
    }
}

/// HTTP status for an error: 422 without a positive equilibrium, 500 for
/// numerical failures, 400 otherwise.
pub fn http_status(e: &Error) -> u16 {
    match e {
        Error::NoPositiveEquilibrium { .. } => 422,
        e if e.is_numeric() => 500,
        _ => 400,
    }
}

/// Process exit status for an error: 2 without a positive equilibrium,
/// 3 for numerical failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoPositiveEquilibrium { .. } => 2,
        e if e.is_numeric() => 3,
        _ => 1,
    }
}

/// Pretty JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("response types serialize");
    s.push('\n');
    s
}

const EQUILIBRIUM_CONDITION: &str = "r > sum_i d_i u_i* (positive equilibrium)";

fn equilibrium_applicability(params: &ModelParams) -> Applicability {
    let mut app = Applicability::default();
    app.push(EQUILIBRIUM_CONDITION, params.equilibrium().is_ok());
    app
}

pub fn equilibrium(params: &ModelParams) -> Result<Response<Equilibrium>> {
    let eq = params.equilibrium()?;
    Ok(Response {
        params: params.clone(),
        applicability: equilibrium_applicability(params),
        result: eq,
    })
}

pub fn jacobian(params: &ModelParams) -> Result<Response<JacobianPair>> {
    let (_, jac) = linearize(params)?;
    let mut app = equilibrium_applicability(params);
    app.push("alpha given (delayed Jacobian A_d)", params.alpha.is_some());
    Ok(Response {
        params: params.clone(),
        applicability: app,
        result: jac,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityOptions {
    /// Memory rates certified by the general-n check.
    pub alpha_small: f64,
    pub alpha_large: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            alpha_small: 1e-3,
            alpha_large: 1e3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityResult {
    #[serde(flatten)]
    pub report: StabilityReport,
    /// Small and large memory-rate certificates, for any number of predators.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general_n: Option<GeneralNReport>,
}

fn stability_applicability(rep: &StabilityReport) -> Applicability {
    let mut app = Applicability::default();
    app.push(EQUILIBRIUM_CONDITION, rep.has_equilibrium);
    if let Some(s) = &rep.sign_stability {
        app.push("a11 <= 0 (outside the Allee zone)", s.a11_nonpositive);
        app.push(
            "p_i'(u_i*) < 0 for all i",
            s.derivative_negative.iter().all(|&b| b),
        );
        app.push(
            "-d_i - u_i* p_i'(u_i*) < 0 for all i",
            s.row_negative.iter().all(|&b| b),
        );
    }
    if let Some(h) = &rep.hurwitz {
        app.push("a3, a2, a1, a0 > 0 (necessary for stability)", h.necessary);
        app.push("a3 (a1 a2 - a0 a3) - a1^2 > 0 (Hurwitz)", h.sufficient);
    }
    if let Some(d) = &rep.delay_robustness {
        if d.applicable {
            app.push(
                "a11^2 > a_ii^2 > -a_1i a_iq for both predators (delay-robust)",
                d.holds,
            );
        } else {
            app.push("sign pattern of A_d", false);
        }
    }
    if let Some(t) = rep.strategy_threshold {
        app.push("half-saturation constants above their bounds", t);
    }
    app
}

pub fn stability(
    params: &ModelParams,
    opts: &StabilityOptions,
) -> Result<Response<StabilityResult>> {
    let report = analyze(params)?;
    let general_n = match (report.has_equilibrium, params.alpha) {
        (true, Some(_)) => {
            let (_, jac) = linearize(params)?;
            Some(classify_general_n(
                &jac,
                opts.alpha_small,
                opts.alpha_large,
            )?)
        }
        _ => None,
    };
    let mut app = stability_applicability(&report);
    if let Some(g) = &general_n {
        if !g.applicable {
            app.notes.push(format!(
                "general-n certificate inapplicable: {}",
                g.reason.as_deref().unwrap_or("hypotheses violated")
            ));
        }
    }
    Ok(Response {
        params: params.clone(),
        applicability: app,
        result: StabilityResult { report, general_n },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HcurveOptions {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
}

impl Default for HcurveOptions {
    fn default() -> Self {
        Self {
            alpha_min: 0.01,
            alpha_max: 100.0,
            points: 200,
        }
    }
}

pub fn hcurve(params: &ModelParams, opts: &HcurveOptions) -> Result<Response<AlphaScan>> {
    if opts.points > MAX_SAMPLES {
        return Err(Error::Domain(format!("at most {MAX_SAMPLES} points")));
    }
    let scan = alpha_scan(params, opts.alpha_min, opts.alpha_max, opts.points)?;
    let mut app = equilibrium_applicability(params);
    app.push(
        "H(alpha) > 0 on the whole range",
        scan.switch_points.is_empty() && scan.h_values.iter().all(|&h| h > 0.0),
    );
    Ok(Response {
        params: params.clone(),
        applicability: app,
        result: scan,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateOptions {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of uniformly spaced output times including both ends.
    pub samples: usize,
    /// Initial state; defaults to the equilibrium scaled by `1 + perturbation`.
    pub initial: Option<State>,
    pub perturbation: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            t_end: 200.0,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            samples: 2001,
            initial: None,
            perturbation: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResult {
    pub trajectory: Trajectory,
    /// Heuristic; see [`Oscillation::sustained`].
    pub oscillation: Option<Oscillation>,
    /// Distance of the final state from the equilibrium, when one exists.
    pub final_distance: Option<f64>,
}

pub fn simulate(params: &ModelParams, opts: &SimulateOptions) -> Result<Response<SimulateResult>> {
    let mut app = equilibrium_applicability(params);
    let eq = params.equilibrium().ok();
    let target = eq.as_ref().map(|e| {
        if params.alpha.is_some() {
            e.delayed_state()
        } else {
            e.state()
        }
    });
    let s0 = match (&opts.initial, &target) {
        (Some(s), _) => s.clone(),
        (None, Some(t)) => t.perturbed(opts.perturbation),
        (None, None) => params.equilibrium().map(|e| e.state())?,
    };
    if opts.samples < 2 {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    let samples = if opts.samples > MAX_SAMPLES {
        app.notes.push(format!("samples capped at {MAX_SAMPLES}"));
        MAX_SAMPLES
    } else {
        opts.samples
    };
    let dt = opts.t_end / (samples - 1) as f64;
    let times = uniform_times(opts.t_end, dt);
    let traj = integrate(params, &s0, opts.t_end, opts.rel_tol, opts.abs_tol, &times)?;
    let final_distance = target.as_ref().zip(traj.last()).map(|(t, s)| {
        let mut s = s.clone();
        if t.q.is_none() {
            s.q = None;
        }
        s.distance(t)
    });
    Ok(Response {
        params: params.clone(),
        applicability: app,
        result: SimulateResult {
            oscillation: detect_oscillation(&traj),
            trajectory: traj,
            final_distance,
        },
    })
}

/// Default grid: both predator axes from `1e-4 K` to twice the larger
/// equilibrium predator value (or `K / 2` without an equilibrium), 41 nodes.
pub fn default_nullcline_grid(params: &ModelParams) -> NullclineGrid {
    let k = params.k();
    let hi = params
        .equilibrium()
        .map(|e| 2.0 * e.y_star.iter().copied().fold(0.0, f64::max))
        .unwrap_or(0.5 * k);
    NullclineGrid {
        y1_min: 1e-4 * k,
        y1_max: hi,
        y2_min: 1e-4 * k,
        y2_max: hi,
        n1: 41,
        n2: 41,
    }
}

pub fn nullcline(
    params: &ModelParams,
    grid: Option<&NullclineGrid>,
) -> Result<Response<NullclineMesh>> {
    let grid = grid
        .cloned()
        .unwrap_or_else(|| default_nullcline_grid(params));
    if grid.n1.saturating_mul(grid.n2) > MAX_SAMPLES {
        return Err(Error::Domain(format!("grid exceeds {MAX_SAMPLES} cells")));
    }
    let mesh = params.prey_nullcline_sample(&grid)?;
    let mut app = equilibrium_applicability(params);
    let empty = mesh.cells.iter().filter(|c| c.roots.is_empty()).count();
    if empty > 0 {
        app.notes
            .push(format!("{empty} cells have no root in (0, K)"));
    }
    Ok(Response {
        params: params.clone(),
        applicability: app,
        result: mesh,
    })
}

pub fn bifurcate(
    params: &ModelParams,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Response<Vec<SweepRow>>> {
    if steps > MAX_SAMPLES {
        return Err(Error::Domain(format!("at most {MAX_SAMPLES} steps")));
    }
    let rows = sweep(params, param, from, to, steps)?;
    Ok(Response {
        params: params.clone(),
        applicability: Applicability::default(),
        result: rows,
    })
}

/// Built-in parameter sets at `r = 13`, `alpha = 1`.
pub fn presets() -> Value {
    let list: Vec<Value> = presets::names()
        .iter()
        .filter_map(|&name| {
            presets::by_name(name, 13.0, Some(1.0)).map(|p| json!({ "name": name, "params": p }))
        })
        .collect();
    json!({ "presets": list })
}

/// Compact description of the HTTP interface.
pub fn schema() -> Value {
    let params = json!({
        "type": "object",
        "required": ["r", "K", "predators"],
        "properties": {
            "r": { "type": "number", "exclusiveMinimum": 0 },
            "K": { "type": "number", "exclusiveMinimum": 0 },
            "alpha": { "type": ["number", "null"], "exclusiveMinimum": 0 },
            "predators": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["kind", "m", "a", "d"],
                    "properties": {
                        "kind": { "enum": ["holling", "ivlev"] },
                        "m": { "type": "number" },
                        "a": { "type": "number" },
                        "d": { "type": "number" }
                    }
                }
            }
        }
    });
    let post = |summary: &str, options: Value| {
        json!({
            "post": {
                "summary": summary,
                "requestBody": { "params": "#/components/ModelParams", "options": options },
                "responses": {
                    "200": "{params, applicability, result}",
                    "400": "validation error {code, paper_condition, message}",
                    "408": "time budget exceeded",
                    "422": "no positive equilibrium",
                    "500": "numeric failure"
                }
            }
        })
    };
    json!({
        "openapi": "3.0.0",
        "info": { "title": "predmem", "version": env!("CARGO_PKG_VERSION") },
        "components": { "ModelParams": params },
        "paths": {
            "/api/equilibrium": post("positive interior equilibrium", json!({})),
            "/api/jacobian": post("Jacobians A and A_d with named entries", json!({})),
            "/api/stability": post("stability report", json!({ "alpha_small": 1e-3, "alpha_large": 1e3 })),
            "/api/hcurve": post("H(alpha) scan with switch points", json!({ "alpha_min": 0.01, "alpha_max": 100, "points": 200 })),
            "/api/simulate": post("trajectory of the model", json!({
                "t_end": 200, "rel_tol": 1e-9, "abs_tol": 1e-12, "samples": 2001,
                "initial": "{x, y, q} or null", "perturbation": 0.1
            })),
            "/api/nullcline": post("prey zero-isocline over a (y1, y2) grid", json!({ "grid": "{y1_min, y1_max, y2_min, y2_max, n1, n2} or null" })),
            "/api/bifurcate": post("classification along a parameter sweep", json!({ "param": "r | K | alpha", "from": 4, "to": 14, "steps": 101 })),
            "/api/presets": { "get": { "summary": "built-in parameter sets" } },
            "/api/schema": { "get": { "summary": "this document" } },
            "/healthz": { "get": { "summary": "liveness probe, returns ok" } }
        }
    })
}

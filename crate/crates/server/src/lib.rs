//! HTTP front end. Every handler parses the body itself so validation
//! failures map to 400 rather than the extractor's 422, which is reserved
//! for a missing positive equilibrium.

use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use predmem::api::{self, ApiError, HcurveOptions, SimulateOptions, StabilityOptions};
use predmem::model::{ModelParams, NullclineGrid};
use predmem::stability::SweepParam;
use predmem::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

pub const DEFAULT_BUDGET: Duration = Duration::from_secs(10);

#[derive(Debug, Clone)]
pub struct Config {
    /// Wall-clock budget of one request.
    pub budget: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Request body: the parameter document with the endpoint's options
/// alongside, e.g. `{"r": 13, "K": 0.1, "alpha": 1, "predators": [...], "points": 50}`.
#[derive(Deserialize)]
struct Body<O> {
    #[serde(flatten)]
    params: ModelParams,
    #[serde(flatten)]
    options: O,
}

#[derive(Deserialize, Default)]
struct NoOptions {}

#[derive(Deserialize, Default)]
struct NullclineOptions {
    #[serde(default)]
    grid: Option<NullclineGrid>,
}

#[derive(Deserialize)]
struct BifurcateOptions {
    #[serde(default = "default_param")]
    param: String,
    from: f64,
    to: f64,
    #[serde(default = "default_steps")]
    steps: usize,
}

fn default_param() -> String {
    "r".into()
}

fn default_steps() -> usize {
    101
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: &Error) -> Response {
    let status = StatusCode::from_u16(api::http_status(e)).unwrap_or(StatusCode::BAD_REQUEST);
    json_response(status, api::to_json(&ApiError::from(e)))
}

fn plain_error(status: StatusCode, code: &str, message: String) -> Response {
    let body = ApiError {
        code: code.into(),
        paper_condition: None,
        message,
        partial: None,
    };
    json_response(status, api::to_json(&body))
}

/// Parses the body, runs `f` on a blocking thread under the budget and
/// renders the shared JSON envelope.
async fn handle<O, T, F>(cfg: &Config, bytes: Bytes, f: F) -> Response
where
    O: DeserializeOwned,
    T: Serialize,
    F: FnOnce(ModelParams, O) -> predmem::Result<T> + Send + 'static,
    O: Send + 'static,
    T: Send + 'static,
{
    let body: Body<O> = match serde_json::from_slice(&bytes) {
        Ok(b) => b,
        Err(e) => return plain_error(StatusCode::BAD_REQUEST, "invalid_params", e.to_string()),
    };
    let task = tokio::task::spawn_blocking(move || f(body.params, body.options));
    match tokio::time::timeout(cfg.budget, task).await {
        Err(_) => plain_error(
            StatusCode::REQUEST_TIMEOUT,
            "timeout",
            format!("request exceeded the {:?} budget", cfg.budget),
        ),
        Ok(Err(e)) => plain_error(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
        Ok(Ok(Err(e))) => error_response(&e),
        Ok(Ok(Ok(v))) => json_response(StatusCode::OK, api::to_json(&v)),
    }
}

async fn equilibrium(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, _: NoOptions| api::equilibrium(&p)).await
}

async fn jacobian(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, _: NoOptions| api::jacobian(&p)).await
}

async fn stability(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, o: StabilityOptions| api::stability(&p, &o)).await
}

async fn hcurve(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, o: HcurveOptions| api::hcurve(&p, &o)).await
}

async fn simulate(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, o: SimulateOptions| api::simulate(&p, &o)).await
}

async fn nullcline(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, o: NullclineOptions| {
        api::nullcline(&p, o.grid.as_ref())
    })
    .await
}

async fn bifurcate(State(cfg): State<Config>, bytes: Bytes) -> Response {
    handle(&cfg, bytes, |p, o: BifurcateOptions| {
        let param: SweepParam = o.param.parse()?;
        api::bifurcate(&p, param, o.from, o.to, o.steps)
    })
    .await
}

async fn presets() -> Response {
    json_response(StatusCode::OK, api::to_json(&api::presets()))
}

async fn schema() -> Response {
    json_response(StatusCode::OK, api::to_json(&api::schema()))
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(cfg: Config) -> Router {
    Router::new()
        .route("/api/equilibrium", post(equilibrium))
        .route("/api/jacobian", post(jacobian))
        .route("/api/stability", post(stability))
        .route("/api/hcurve", post(hcurve))
        .route("/api/simulate", post(simulate))
        .route("/api/nullcline", post(nullcline))
        .route("/api/bifurcate", post(bifurcate))
        .route("/api/presets", get(presets))
        .route("/api/schema", get(schema))
        .route("/healthz", get(healthz))
        .layer(CorsLayer::permissive())
        .with_state(cfg)
}

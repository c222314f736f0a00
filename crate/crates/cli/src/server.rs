//! HTTP API over in-memory project sessions and tool instances.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pcw_core::lang::{Diagnostic, FrontendError, Project};
use pcw_core::slice::{Element, ElementId, Slice};
use pcw_core::tools::{run_tool_script, ActionOutcome, ToolContext, ToolError, ToolInstance};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::ServerConfig;

/// An error response: status, stable error name and message.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: &'static str,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, error, message: message.into(), diagnostics: Vec::new() }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", format!("unknown {what} `{id}`"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.error, "message": self.message });
        if !self.diagnostics.is_empty() {
            body["diagnostics"] = serde_json::to_value(&self.diagnostics).expect("diagnostics serialize");
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<FrontendError> for ApiError {
    fn from(e: FrontendError) -> Self {
        match e {
            FrontendError::InvalidForest(diagnostics) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                error: "ParseFailed",
                message: format!("project has {} error diagnostic(s)", diagnostics.len()),
                diagnostics,
            },
            e @ (FrontendError::Io { .. } | FrontendError::EmptyProject(_)) => ApiError::bad_request(e.to_string()),
            e => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "AnalysisError", e.to_string()),
        }
    }
}

impl From<ToolError> for ApiError {
    fn from(e: ToolError) -> Self {
        let (status, error) = match &e {
            ToolError::StaleAction(_) => (StatusCode::CONFLICT, "StaleAction"),
            ToolError::ScriptSyntaxError { .. } => (StatusCode::BAD_REQUEST, "ScriptSyntaxError"),
            ToolError::UnknownTool(_) => (StatusCode::BAD_REQUEST, "UnknownTool"),
            ToolError::ParamValidation(_) => (StatusCode::BAD_REQUEST, "ParamValidation"),
            ToolError::BadOption(_) => (StatusCode::BAD_REQUEST, "BadOption"),
            ToolError::UnsupportedFormat { .. } => (StatusCode::BAD_REQUEST, "UnsupportedFormat"),
            ToolError::EmptySlice => (StatusCode::UNPROCESSABLE_ENTITY, "EmptySlice"),
            ToolError::Slice(_) => (StatusCode::UNPROCESSABLE_ENTITY, "SliceError"),
            ToolError::Analysis(_) | ToolError::Frontend(_) => (StatusCode::UNPROCESSABLE_ENTITY, "AnalysisError"),
        };
        ApiError::new(status, error, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct ProjectSession {
    pub id: String,
    pub root: PathBuf,
    pub project: Arc<Project>,
    slice: Slice,
}

struct ToolSession {
    project_id: String,
    /// Actions on one instance run one at a time.
    instance: Mutex<ToolInstance>,
}

/// Sessions and tool instances of one server.
pub struct AppState {
    config: ServerConfig,
    next_id: AtomicU64,
    projects: Mutex<HashMap<String, Arc<ProjectSession>>>,
    tools: Mutex<HashMap<String, Arc<ToolSession>>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Arc<Self> {
        Arc::new(AppState {
            config,
            next_id: AtomicU64::new(1),
            projects: Mutex::new(HashMap::new()),
            tools: Mutex::new(HashMap::new()),
        })
    }

    fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}{}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    fn project(&self, id: &str) -> ApiResult<Arc<ProjectSession>> {
        self.projects.lock().expect("sessions poisoned").get(id).cloned().ok_or_else(|| ApiError::not_found("project", id))
    }

    fn tool(&self, id: &str) -> ApiResult<Arc<ToolSession>> {
        self.tools.lock().expect("tools poisoned").get(id).cloned().ok_or_else(|| ApiError::not_found("tool", id))
    }

    fn context(&self, project: Arc<Project>) -> ToolContext {
        ToolContext { project, solver: self.config.solver(), bounds: self.config.bounds() }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let origins: Vec<HeaderValue> =
        state.config.cors_allowlist.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/projects", post(open_project))
        .route("/api/projects/{id}/slice/roots", get(slice_roots))
        .route("/api/projects/{id}/elements/{eid}/children", get(element_children))
        .route("/api/projects/{id}/source", get(source))
        .route("/api/tools", post(create_tool))
        .route("/api/tools/{tid}", get(tool_model))
        .route("/api/tools/{tid}/actions", post(tool_action))
        .route("/api/tools/{tid}/export", get(tool_export))
        .layer(cors)
        .with_state(state)
}

/// Runs blocking analysis work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

fn body<T: serde::de::DeserializeOwned>(payload: Result<Json<Value>, axum::extract::rejection::JsonRejection>) -> ApiResult<T> {
    let Json(value) = payload.map_err(|e| ApiError::bad_request(e.body_text()))?;
    serde_json::from_value(value).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenProject {
    path: PathBuf,
}

async fn open_project(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<Value>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req: OpenProject = body(payload)?;
    let id = state.fresh_id("p");
    let session = {
        let id = id.clone();
        blocking(move || {
            let project = Arc::new(Project::open(&req.path)?);
            let slice = project.full_slice().map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "SliceError", e.to_string()))?;
            Ok(ProjectSession { id, root: req.path, project, slice })
        })
        .await?
    };
    let response = json!({
        "id": session.id,
        "name": session.project.name(),
        "root": session.root,
        "files": session.project.forest().files.iter().map(|f| f.path.clone()).collect::<Vec<_>>(),
        "diagnostics": session.project.forest().diagnostics,
    });
    state.projects.lock().expect("sessions poisoned").insert(id, Arc::new(session));
    Ok(Json(response))
}

fn element_json(slice: &Slice, e: &Element) -> Value {
    json!({
        "id": e.id,
        "kind": e.kind,
        "name": e.name(),
        "attrs": e.attributes,
        "hasChildren": !slice.children_of(&e.id).is_empty(),
    })
}

async fn slice_roots(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.project(&id)?;
    let roots: Vec<Value> = session.slice.roots().into_iter().map(|e| element_json(&session.slice, e)).collect();
    Ok(Json(Value::Array(roots)))
}

async fn element_children(
    State(state): State<Arc<AppState>>,
    Path((id, eid)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let session = state.project(&id)?;
    let eid = ElementId::new(eid);
    if !session.slice.contains(&eid) {
        return Err(ApiError::not_found("element", eid.as_str()));
    }
    let children: Vec<Value> =
        session.slice.children_of(&eid).into_iter().map(|e| element_json(&session.slice, e)).collect();
    Ok(Json(Value::Array(children)))
}

#[derive(Deserialize)]
struct SourceQuery {
    file: String,
    from: Option<u32>,
    to: Option<u32>,
}

async fn source(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    query: Result<Query<SourceQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Json<Value>> {
    let session = state.project(&id)?;
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    if let (Some(from), Some(to)) = (q.from, q.to) {
        if from > to {
            return Err(ApiError::bad_request(format!("from {from} is after to {to}")));
        }
    }
    let text = session.project.source_lines(&q.file, q.from, q.to).ok_or_else(|| ApiError::not_found("file", &q.file))?;
    Ok(Json(json!({ "file": q.file, "from": q.from.unwrap_or(1), "text": text })))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateTool {
    project_id: String,
    /// A script object, or its JSON text.
    script: Value,
}

fn tool_json(id: &str, project_id: &str, instance: &ToolInstance) -> Value {
    json!({ "toolId": id, "projectId": project_id, "tool": instance.tool(), "model": instance.model() })
}

async fn create_tool(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<Value>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req: CreateTool = body(payload)?;
    let session = state.project(&req.project_id)?;
    let text = match req.script {
        Value::String(s) => s,
        other => other.to_string(),
    };
    let ctx = state.context(session.project.clone());
    let instance = blocking(move || Ok(run_tool_script(&text, &ctx)?)).await?;
    let id = state.fresh_id("t");
    let response = tool_json(&id, &req.project_id, &instance);
    let tool = ToolSession { project_id: req.project_id, instance: Mutex::new(instance) };
    state.tools.lock().expect("tools poisoned").insert(id, Arc::new(tool));
    Ok(Json(response))
}

async fn tool_model(State(state): State<Arc<AppState>>, Path(tid): Path<String>) -> ApiResult<Json<Value>> {
    let tool = state.tool(&tid)?;
    let instance = tool.instance.lock().expect("tool poisoned");
    Ok(Json(tool_json(&tid, &tool.project_id, &instance)))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ActionRequest {
    action_id: String,
}

async fn tool_action(
    State(state): State<Arc<AppState>>,
    Path(tid): Path<String>,
    payload: Result<Json<Value>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let req: ActionRequest = body(payload)?;
    let tool = state.tool(&tid)?;
    let outcome = blocking(move || {
        let mut instance = tool.instance.lock().expect("tool poisoned");
        Ok(instance.apply(&req.action_id)?)
    })
    .await?;
    Ok(Json(match outcome {
        ActionOutcome::Model(model) => json!({ "model": model }),
        ActionOutcome::Navigate(nav) => json!({ "navigate": nav }),
    }))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: String,
}

async fn tool_export(
    State(state): State<Arc<AppState>>,
    Path(tid): Path<String>,
    query: Result<Query<ExportQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Response> {
    let tool = state.tool(&tid)?;
    let Query(q) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let document = tool.instance.lock().expect("tool poisoned").export(&q.format)?;
    let content_type = if q.format == "dot" { "text/vnd.graphviz" } else { "application/json" };
    Ok(([(header::CONTENT_TYPE, content_type)], document).into_response())
}

/// Binds the configured address and serves until the process ends.
pub async fn serve(config: ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((config.bind.as_str(), config.port as u16)).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config))).await
}

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use pcw::config::ServerConfig;
use pcw::server::{router, AppState};
use pcw_testkit::corpus_dir;
use serde_json::{json, Value};
use tower::ServiceExt;

const ENTRY: &str = "Configurations.ConfigurationController.CreateConfiguration";

fn app() -> Router {
    let config = ServerConfig { cors_allowlist: vec!["http://ui.test".into()], ..ServerConfig::default() };
    router(AppState::new(config))
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn send_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = send(app, method, uri, body).await;
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

async fn open(app: &Router, variant: &str) -> String {
    let (status, body) = send_json(app, "POST", "/api/projects", Some(json!({ "path": corpus_dir(variant) }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["id"].as_str().unwrap().to_string()
}

async fn tool(app: &Router, project: &str, script: Value) -> Value {
    let (status, body) = send_json(app, "POST", "/api/tools", Some(json!({ "projectId": project, "script": script }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body
}

#[tokio::test]
async fn projects_and_structure() {
    let app = app();
    let p = open(&app, "buggy").await;
    let (status, roots) = send_json(&app, "GET", &format!("/api/projects/{p}/slice/roots"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(roots.as_array().unwrap().len(), 1);
    let root = roots[0]["id"].as_str().unwrap().replace('/', "%2F");
    let (_, children) = send_json(&app, "GET", &format!("/api/projects/{p}/elements/{root}/children"), None).await;
    let names: Vec<&str> = children.as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["Configurations", "Storage", "Validation"]);
    let ns = children[1]["id"].as_str().unwrap().replace('/', "%2F");
    let (_, classes) = send_json(&app, "GET", &format!("/api/projects/{p}/elements/{ns}/children"), None).await;
    assert_eq!(classes[0]["name"], "Twin");
    assert_eq!(classes[0]["hasChildren"], true);

    let (status, src) = send_json(&app, "GET", &format!("/api/projects/{p}/source?file=Storage.mini&from=1&to=1"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(src["text"], "// Persistence of device twin configurations.");
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = app();
    let p = open(&app, "buggy").await;
    for uri in [
        "/api/projects/p999/slice/roots".to_string(),
        format!("/api/projects/{p}/elements/nope/children"),
        format!("/api/projects/{p}/source?file=Nope.mini"),
        "/api/tools/t999".to_string(),
        "/api/tools/t999/export?format=json".to_string(),
    ] {
        let (status, body) = send_json(&app, "GET", &uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}: {body}");
        assert_eq!(body["error"], "NotFound");
    }
    let (status, _) =
        send_json(&app, "POST", "/api/tools", Some(json!({ "projectId": "p999", "script": {"tool": "structureBrowser"} }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn validation_errors_are_400() {
    let app = app();
    let p = open(&app, "buggy").await;
    let cases = [
        ("/api/projects", json!({ "path": "/definitely/not/here" })),
        ("/api/projects", json!({ "dir": "x" })),
        ("/api/tools", json!({ "projectId": p, "script": "{\"tool\": " })),
        ("/api/tools", json!({ "projectId": p, "script": {"tool": "nope"} })),
        ("/api/tools", json!({ "projectId": p, "script": {"tool": "callGraphExplorer", "roots": []} })),
    ];
    for (uri, body) in cases {
        let (status, resp) = send_json(&app, "POST", uri, Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}: {resp}");
    }
    let (status, _) = send_json(&app, "GET", &format!("/api/projects/{p}/source?file=Storage.mini&from=3&to=1"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn broken_project_is_422_with_diagnostics() {
    let dir = std::env::temp_dir().join(format!("pcw-svc-broken-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("X.mini"), "namespace X { class Y { fn z( } }").unwrap();
    let app = app();
    let (status, body) = send_json(&app, "POST", "/api/projects", Some(json!({ "path": dir }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "ParseFailed");
    assert_eq!(body["diagnostics"][0]["file"], "X.mini");
}

#[tokio::test]
async fn catalog_action_navigates() {
    let app = app();
    let p = open(&app, "buggy").await;
    let created = tool(&app, &p, json!({"tool": "apiEndpointCatalog"})).await;
    let items = &created["model"]["items"];
    assert_eq!(items.as_array().unwrap().len(), 1);
    assert_eq!(items[0]["label"], "POST /configurations");
    let tid = created["toolId"].as_str().unwrap();
    let action = items[0]["action"]["id"].as_str().unwrap();
    let (status, body) =
        send_json(&app, "POST", &format!("/api/tools/{tid}/actions"), Some(json!({ "actionId": action }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["navigate"]["file"], "Configurations.mini");
    assert_eq!(body["navigate"]["line"], 4);
    let (status, body) = send_json(&app, "GET", &format!("/api/tools/{tid}/export?format=dot"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "UnsupportedFormat");
}

#[tokio::test]
async fn stale_actions_are_409_and_reads_are_stable() {
    let app = app();
    let p = open(&app, "buggy").await;
    let created = tool(&app, &p, json!({"tool": "callGraphExplorer", "roots": [ENTRY]})).await;
    let tid = created["toolId"].as_str().unwrap();
    let expand = created["model"]["pendingActions"].as_object().unwrap().values().next().unwrap()["id"].clone();
    let (first, a) = send(&app, "GET", &format!("/api/tools/{tid}"), None).await;
    let (_, b) = send(&app, "GET", &format!("/api/tools/{tid}"), None).await;
    assert_eq!(first, StatusCode::OK);
    assert_eq!(a, b);
    let uri = format!("/api/tools/{tid}/actions");
    let (status, body) = send_json(&app, "POST", &uri, Some(json!({ "actionId": expand }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["model"]["nodes"].as_array().unwrap().len(), 3);
    let (status, body) = send_json(&app, "POST", &uri, Some(json!({ "actionId": expand }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "StaleAction");
    let (status, dot) = send(&app, "GET", &format!("/api/tools/{tid}/export?format=dot"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(dot.matches("  \"").count(), 3 + 2);
    let (_, again) = send(&app, "GET", &format!("/api/tools/{tid}/export?format=dot"), None).await;
    assert_eq!(dot, again);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app();
    let p1 = open(&app, "buggy").await;
    let p2 = open(&app, "buggy").await;
    assert_ne!(p1, p2);
    let script = json!({"tool": "callGraphExplorer", "roots": [ENTRY]});
    let t1 = tool(&app, &p1, script.clone()).await;
    let t2 = tool(&app, &p2, script).await;
    let id1 = t1["toolId"].as_str().unwrap();
    let id2 = t2["toolId"].as_str().unwrap();
    let (_, before) = send(&app, "GET", &format!("/api/tools/{id2}"), None).await;
    let action = t1["model"]["pendingActions"].as_object().unwrap().values().next().unwrap()["id"].clone();
    let (status, _) = send_json(&app, "POST", &format!("/api/tools/{id1}/actions"), Some(json!({ "actionId": action }))).await;
    assert_eq!(status, StatusCode::OK);
    let (_, after) = send(&app, "GET", &format!("/api/tools/{id2}"), None).await;
    assert_eq!(before, after);
}

#[tokio::test]
async fn reachability_over_http() {
    let app = app();
    let p = open(&app, "buggy").await;
    let created = tool(
        &app,
        &p,
        json!({
            "tool": "reachabilityInspector",
            "method": ENTRY,
            "target": "call:Storage.Twin.CreateDeviceTwinConfiguration",
            "constraints": ["name !~ \"[0-9a-z]([0-9a-z-]{0,62}[0-9a-z])?\""]
        }),
    )
    .await;
    let items = &created["model"]["items"];
    assert_eq!(items[0]["label"], "Status: Reachable");
    assert_eq!(items[1]["children"][0]["label"], "name = \"-\"");
}

#[tokio::test]
async fn cors_allowlist() {
    let app = app();
    let req = |origin: &str| {
        Request::builder()
            .method("OPTIONS")
            .uri("/api/tools")
            .header(header::ORIGIN, origin)
            .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
            .body(Body::empty())
            .unwrap()
    };
    let ok = app.clone().oneshot(req("http://ui.test")).await.unwrap();
    assert_eq!(ok.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://ui.test");
    let denied = app.clone().oneshot(req("http://evil.test")).await.unwrap();
    assert!(denied.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
}

#[test]
fn state_is_shareable() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<Arc<AppState>>();
}
